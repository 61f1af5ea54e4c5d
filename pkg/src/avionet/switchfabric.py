"""Switch model.

Ingress filtering (CRC check plus per-VL token-bucket policing), a fixed
technological latency between reception and output-queue eligibility, and
per-output-port FIFO queues backed by dedicated-per-port memory with a
shared overflow pool. Store-and-forward: frames are inspected only after
full reception, and memory is held from output-queue insertion until
transmission completes.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .netmodel import NS_PER_S, SwitchDecl, transmission_time_ns


@dataclass
class TokenBucket:
    """Credit-based policer; starts full.

    Default provisioning (rate = max frame bytes per BAG, depth = two max
    frames) passes conforming traffic, tolerates a burst of two, and drops a
    sustained over-rate flow.
    """

    rate_bytes_per_s: float
    depth_bytes: float
    credit_bytes: float
    last_update_ns: int = 0

    def refill(self, now_ns: int) -> None:
        dt = now_ns - self.last_update_ns
        if dt < 0:
            raise ValueError("token bucket refilled backwards in time")
        if dt:
            self.credit_bytes = min(self.depth_bytes,
                                    self.credit_bytes + self.rate_bytes_per_s * dt / NS_PER_S)
            self.last_update_ns = now_ns

    def try_debit(self, nbytes: int, now_ns: int) -> bool:
        self.refill(now_ns)
        if self.credit_bytes < nbytes:
            return False
        self.credit_bytes -= nbytes
        return True


class PortQueue:
    """Output port: a FIFO plus the transmit occupancy window.

    Queue entries are (frame, memory charge tag); the head entry moves to
    ``in_flight`` for the duration of its serialization.
    """

    __slots__ = ("peer", "speed_bps", "prop_ns", "fifo", "busy_until_ns",
                 "in_flight", "dedicated_used")

    def __init__(self, peer: str, speed_bps: int, prop_ns: int):
        self.peer = peer
        self.speed_bps = speed_bps
        self.prop_ns = prop_ns
        self.fifo: deque = deque()
        self.busy_until_ns = 0
        self.in_flight: tuple | None = None
        self.dedicated_used = 0

    def idle(self, now_ns: int) -> bool:
        return self.in_flight is None and self.busy_until_ns <= now_ns


CHARGE_DEDICATED = "dedicated"
CHARGE_SHARED = "shared"

DROP_CAUSES = ("crc", "credit", "memory", "no_route", "link_down")


class SwitchState:
    """All mutable state of one switch during a run."""

    def __init__(self, switch_id: str, params: SwitchDecl,
                 ports: dict[str, PortQueue],
                 table: dict[tuple[int, str], tuple[str, ...]],
                 buckets: dict[tuple[int, str], TokenBucket]):
        self.switch_id = switch_id
        self.params = params
        self.ports = ports
        self.table = table
        self.buckets = buckets
        self.shared_used = 0
        self.used_bytes = 0
        self.peak_used_bytes = 0
        self.total_capacity_bytes = (len(ports) * params.dedicated_bytes_per_port
                                     + params.shared_pool_bytes)
        self.drops: dict[str, int] = {c: 0 for c in DROP_CAUSES}
        self.frames_in = 0
        self.frames_out = 0
        self.fanout_created = 0
        #: (time_ns, used_bytes, used_percent, kind) step samples
        self.capacity_log: list[tuple[int, int, float, str]] = []

    # -- ingress ----------------------------------------------------------

    def ingress(self, frame, now_ns: int) -> tuple[str, object]:
        """Filter an arriving frame.

        Returns ("forward", ready_time_ns) when the frame passes the CRC and
        policing checks, else ("drop", cause). Corrupt frames leave the
        bucket untouched.
        """
        self.frames_in += 1
        if not frame.crc_valid:
            self.drops["crc"] += 1
            return ("drop", "crc")
        bucket = self.buckets[(frame.vl_id, frame.copy)]
        if not bucket.try_debit(frame.length_bytes, now_ns):
            self.drops["credit"] += 1
            return ("drop", "credit")
        return ("forward", now_ns + self.params.latency_ns)

    # -- output queueing ---------------------------------------------------

    def enqueue_output(self, frame, port_id: str, now_ns: int) -> bool:
        """Charge memory for a forward-ready frame and queue it.

        Whole-frame charging: dedicated port memory first, then the shared
        pool, never split. Returns False (and counts a memory drop) when
        neither pool has room.
        """
        port = self.ports[port_id]
        n = frame.length_bytes
        if port.dedicated_used + n <= self.params.dedicated_bytes_per_port:
            port.dedicated_used += n
            tag = CHARGE_DEDICATED
        elif self.shared_used + n <= self.params.shared_pool_bytes:
            self.shared_used += n
            tag = CHARGE_SHARED
        else:
            self.drops["memory"] += 1
            return False
        self.used_bytes += n
        port.fifo.append((frame, tag))
        self.record_sample(now_ns, "charge")
        return True

    def start_transmission(self, port_id: str, now_ns: int) -> tuple:
        """Begin serializing the head frame; returns (frame, done_ns)."""
        port = self.ports[port_id]
        frame, tag = port.fifo.popleft()
        port.in_flight = (frame, tag)
        done = now_ns + transmission_time_ns(frame.length_bytes, port.speed_bps)
        port.busy_until_ns = done
        return frame, done

    def complete_transmission(self, port_id: str, now_ns: int):
        """Release the in-flight frame's memory charge; returns the frame."""
        port = self.ports[port_id]
        frame, tag = port.in_flight
        port.in_flight = None
        if tag == CHARGE_DEDICATED:
            port.dedicated_used -= frame.length_bytes
        else:
            self.shared_used -= frame.length_bytes
        self.used_bytes -= frame.length_bytes
        self.frames_out += 1
        self.record_sample(now_ns, "release")
        return frame

    # -- capacity ---------------------------------------------------------

    def capacity_sample(self, now_ns: int) -> tuple[int, float]:
        used = self.used_bytes
        percent = 100.0 * used / self.total_capacity_bytes if self.total_capacity_bytes else 0.0
        return used, percent

    def record_sample(self, now_ns: int, kind: str) -> None:
        used, percent = self.capacity_sample(now_ns)
        if used > self.peak_used_bytes:
            self.peak_used_bytes = used
        self.capacity_log.append((now_ns, used, percent, kind))
