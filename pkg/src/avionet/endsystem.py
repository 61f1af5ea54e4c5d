"""End System model.

Transmit side: BAG/periodicity-regulated frame generation, per-copy CRC fate
drawn from the bit error rate, duplication onto routes A and B. Receive side:
first-valid-wins redundancy management with a bounded dedup window.
"""

from __future__ import annotations

import enum
import hashlib
import random
from dataclasses import dataclass, replace

from .netmodel import COPY_A, Protocol, ResolvedVl

#: ARINC sequence numbers are one byte; remember at most this many accepted
#: sequence values per VL to bound memory on long runs.
RX_WINDOW = 256


def rng_stream(global_seed: int, vl_id: int, purpose: str) -> random.Random:
    """Independent deterministic stream per (seed, VL, purpose).

    Derived by hashing instead of offsetting so adding a VL never perturbs
    the draws of existing ones.
    """
    digest = hashlib.sha256(f"{global_seed}/{vl_id}/{purpose}".encode()).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


def corruption_probability(length_bytes: int, ber: float) -> float:
    """P(at least one of the 8*length bits flips)."""
    if not (0.0 <= ber < 1.0):
        raise ValueError(f"ber must be in [0, 1), got {ber}")
    return 1.0 - (1.0 - ber) ** (8 * length_bytes)


def corrupt_decision(length_bytes: int, ber: float, rng: random.Random) -> bool:
    """Draw one copy's CRC fate; returns True when the frame stays valid."""
    return rng.random() >= corruption_probability(length_bytes, ber)


@dataclass(slots=True)
class Frame:
    """One frame copy flowing through the network as an entity."""

    vl_id: int
    seq: int
    copy: str
    length_bytes: int
    crc_valid: bool
    generated_at_ns: int
    hop_log: list | None = None


def clone_frame(frame: Frame) -> Frame:
    """Duplicate a frame entity (multicast fan-out keeps all identifiers)."""
    return replace(frame, hop_log=[] if frame.hop_log is not None else None)


class GenerationError(RuntimeError):
    """Departure handler ran at a time the regulator did not plan."""


class VlTxState:
    """Per-VL transmit regulator.

    Departures sit on the BAG/periodicity grid anchored at the first
    departure; an optional uniform jitter in [0, jitter_max] shifts each
    departure inside its window, clamped so consecutive departures never get
    closer than one BAG.
    """

    def __init__(self, vl: ResolvedVl, global_seed: int, protocol: Protocol,
                 first_departure_ns: int | None = None):
        self.vl = vl
        self.protocol = protocol
        self.next_seq = 0
        self.last_departure_ns: int | None = None
        self._grid_ns = (vl.decl.start_offset_ns if first_departure_ns is None
                         else first_departure_ns)
        self._planned_ns: int | None = None
        self._rng_length = rng_stream(global_seed, vl.vl_id, "length")
        self._rng_crc = rng_stream(global_seed, vl.vl_id, "crc")
        self._rng_jitter = rng_stream(global_seed, vl.vl_id, "jitter")

    def plan_departure(self) -> int:
        """Time of the next departure; advances the grid."""
        dep = self._grid_ns
        jmax = self.vl.decl.jitter_max_ns
        if jmax:
            dep += self._rng_jitter.randint(0, jmax)
        if self.last_departure_ns is not None:
            dep = max(dep, self.last_departure_ns + self.vl.bag_ns)
        self._grid_ns += self.vl.bag_ns
        self._planned_ns = dep
        return dep

    @property
    def planned_departure_ns(self) -> int | None:
        return self._planned_ns


def generate_frame(state: VlTxState, now_ns: int) -> Frame:
    """Create the logical frame departing now; one length draw per frame."""
    if now_ns != state.planned_departure_ns:
        raise GenerationError(
            f"VL{state.vl.vl_id} departure at {now_ns} ns, "
            f"planned {state.planned_departure_ns} ns")
    decl = state.vl.decl
    length = state._rng_length.randint(decl.min_frame_bytes, decl.max_frame_bytes)
    frame = Frame(vl_id=state.vl.vl_id, seq=state.next_seq, copy=COPY_A,
                  length_bytes=length, crc_valid=True, generated_at_ns=now_ns)
    state.next_seq += 1
    state.last_departure_ns = now_ns
    return frame


def emit(state: VlTxState, frame: Frame, ber: float) -> list[Frame]:
    """Fan a logical frame out to its network copies.

    Copies share seq, length and generation time; each copy's CRC fate is an
    independent draw, so with redundancy one copy can arrive intact while the
    other is corrupt.
    """
    copies = []
    for copy_id in state.vl.copies:
        copies.append(replace(
            frame, copy=copy_id,
            crc_valid=corrupt_decision(frame.length_bytes, ber, state._rng_crc)))
    return copies


class ReceiveOutcome(enum.Enum):
    ACCEPTED = "accepted"
    DUPLICATE_DISCARDED = "duplicate_discarded"
    CORRUPT_DISCARDED = "corrupt_discarded"


class RxState:
    """Per-End-System reception state: first valid copy of each (vl, seq)
    wins, later copies are discarded as duplicates."""

    def __init__(self) -> None:
        self._seen: dict[int, set[int]] = {}
        self._hi: dict[int, int] = {}
        self.counters: dict[int, dict[str, int]] = {}

    def receive(self, frame: Frame) -> ReceiveOutcome:
        if not frame.crc_valid:
            outcome = ReceiveOutcome.CORRUPT_DISCARDED
        else:
            seen = self._seen.setdefault(frame.vl_id, set())
            hi = self._hi.get(frame.vl_id, -1)
            if frame.seq in seen or frame.seq <= hi - RX_WINDOW:
                outcome = ReceiveOutcome.DUPLICATE_DISCARDED
            else:
                outcome = ReceiveOutcome.ACCEPTED
                seen.add(frame.seq)
                if frame.seq > hi:
                    self._hi[frame.vl_id] = frame.seq
                    floor = frame.seq - RX_WINDOW
                    if len(seen) > RX_WINDOW:
                        self._seen[frame.vl_id] = {s for s in seen if s > floor}
        counts = self.counters.setdefault(frame.vl_id, {})
        counts[outcome.value] = counts.get(outcome.value, 0) + 1
        return outcome
