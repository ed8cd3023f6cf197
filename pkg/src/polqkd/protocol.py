"""BB84 and B92 coding rules under polarization tracking, plus sifting and QBER.

Bit conventions: in every basis or B92 pair the first-listed state carries
bit 1 (H, D45, L for BB84).

Receiver tables are derived from where the tracked channel sends each
transmitted state (:func:`polqkd.tracking.tracked_image`):

* Faraday tracking restores every state, so the receiver decodes with the
  transmitter's own table.
* Half-wave-plate tracking keeps H/V but swaps D45/D135 and L/R, so the
  diagonal and circular tables are flipped at the receiver.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence, Union

import numpy as np

from .jones import ORTHOGONAL_PARTNER, StateLabel
from .tracking import TrackingMode, tracked_image


class Protocol(enum.Enum):
    BB84 = "BB84"
    B92 = "B92"

    def __str__(self) -> str:
        return self.value

    @classmethod
    def parse(cls, text: str) -> "Protocol":
        key = text.strip().upper()
        for member in cls:
            if member.value == key:
                return member
        raise ValueError(f"unknown protocol {text!r}")


class Bb84Basis(enum.Enum):
    RECTILINEAR = "Rectilinear"
    DIAGONAL = "Diagonal"
    CIRCULAR = "Circular"

    def __str__(self) -> str:
        return self.value

    @property
    def states(self) -> tuple[StateLabel, StateLabel]:
        """``(bit-1 state, bit-0 state)``."""
        return _BASIS_STATES[self]

    @classmethod
    def parse(cls, text: str) -> "Bb84Basis":
        key = text.strip().lower()
        aliases = {"rectilinear": cls.RECTILINEAR, "hv": cls.RECTILINEAR, "z": cls.RECTILINEAR,
                   "diagonal": cls.DIAGONAL, "x": cls.DIAGONAL,
                   "circular": cls.CIRCULAR, "lr": cls.CIRCULAR, "y": cls.CIRCULAR}
        if key not in aliases:
            raise ValueError(f"unknown BB84 basis {text!r}")
        return aliases[key]


_BASIS_STATES = {
    Bb84Basis.RECTILINEAR: (StateLabel.H, StateLabel.V),
    Bb84Basis.DIAGONAL: (StateLabel.D45, StateLabel.D135),
    Bb84Basis.CIRCULAR: (StateLabel.L, StateLabel.R),
}


@dataclass(frozen=True)
class B92Scheme:
    one_state: StateLabel
    zero_state: StateLabel

    def __post_init__(self):
        if (self.one_state, self.zero_state) not in _B92_SUPPORTED:
            raise ValueError(
                f"unsupported B92 pair ({self.one_state}, {self.zero_state}); "
                f"choose one of {', '.join(f'({a},{b})' for a, b in _B92_SUPPORTED)}")

    @classmethod
    def parse(cls, text: str) -> "B92Scheme":
        parts = [p for p in text.replace("(", "").replace(")", "").split(",") if p.strip()]
        if len(parts) != 2:
            raise ValueError(f"B92 scheme needs two states, got {text!r}")
        return cls(StateLabel.parse(parts[0]), StateLabel.parse(parts[1]))

    def __str__(self) -> str:
        return f"{self.one_state},{self.zero_state}"


_B92_SUPPORTED = (
    (StateLabel.H, StateLabel.D45),
    (StateLabel.H, StateLabel.L),
    (StateLabel.D45, StateLabel.L),
)


@dataclass(frozen=True)
class CodingTable:
    """Received state -> bit map for one (protocol, basis/scheme, mode)."""

    protocol: Protocol
    basis_or_scheme: str
    mode: TrackingMode
    entries: Mapping[StateLabel, int] = field(default_factory=dict)

    def decode(self, label: StateLabel) -> int:
        try:
            return self.entries[label]
        except KeyError:
            raise ValueError(f"{label} is outside the {self.basis_or_scheme} coding table") from None

    def to_dict(self) -> dict:
        return {
            "protocol": str(self.protocol),
            "basis_or_scheme": self.basis_or_scheme,
            "mode": str(self.mode),
            "entries": {str(k): v for k, v in self.entries.items()},
        }


def _check_tracked(mode: TrackingMode) -> None:
    if mode is TrackingMode.NONE:
        raise ValueError("no receiver coding table is agreed without polarization tracking")


def bb84_encode(bit: int, basis: Bb84Basis) -> StateLabel:
    if bit not in (0, 1):
        raise ValueError(f"bit must be 0 or 1, got {bit!r}")
    one, zero = basis.states
    return one if bit == 1 else zero


def transmitter_table(basis: Bb84Basis) -> CodingTable:
    """The encoder's own map, read back at the receiver without remapping."""
    one, zero = basis.states
    return CodingTable(Protocol.BB84, str(basis), TrackingMode.NONE, {one: 1, zero: 0})


def bb84_receiver_table(basis: Bb84Basis, mode: TrackingMode) -> CodingTable:
    _check_tracked(mode)
    entries = {tracked_image(mode, bb84_encode(bit, basis)): bit for bit in (1, 0)}
    return CodingTable(Protocol.BB84, str(basis), mode, entries)


def b92_encode(bit: int, scheme: B92Scheme) -> StateLabel:
    if bit not in (0, 1):
        raise ValueError(f"bit must be 0 or 1, got {bit!r}")
    return scheme.one_state if bit == 1 else scheme.zero_state


def b92_receiver_projectors(scheme: B92Scheme, mode: TrackingMode
                            ) -> tuple[tuple[StateLabel, int], tuple[StateLabel, int]]:
    """The two unambiguous-discrimination projectors as ``(target, bit)``.

    Each projector is orthogonal to the state the *other* bit arrives in, so a
    click can only come from its own bit. Ordered bit 1 first.
    """
    _check_tracked(mode)
    out = []
    for bit in (1, 0):
        opposite = b92_encode(1 - bit, scheme)
        out.append((ORTHOGONAL_PARTNER[tracked_image(mode, opposite)], bit))
    return out[0], out[1]


def untracked_b92_projectors(scheme: B92Scheme):
    """Projectors built for an unrotated channel (control runs without tracking)."""
    return tuple((ORTHOGONAL_PARTNER[b92_encode(1 - bit, scheme)], bit) for bit in (1, 0))


def b92_decode(click: bool, chosen_projector: tuple[StateLabel, int]) -> Optional[int]:
    return chosen_projector[1] if click else None


@dataclass(frozen=True)
class PulseRecord:
    index: int
    alice_bit: int
    alice_basis_or_scheme: str
    sent_label: StateLabel
    theta: float
    t: float = 0.0
    lost: bool = False
    bob_choice: str = ""
    outcome: Optional[int] = None
    sifted: bool = False
    bob_bit: Optional[int] = None

    def __post_init__(self):
        if self.sifted != (self.bob_bit is not None):
            raise ValueError("bob_bit must be present exactly for sifted pulses")


def sift(records: Iterable[PulseRecord], protocol: Protocol
         ) -> tuple[np.ndarray, np.ndarray]:
    """Index-aligned sifted keys.

    BB84 keeps pulses measured in the preparation basis, B92 keeps conclusive
    (clicked) pulses. Lost pulses never survive.
    """
    alice, bob = [], []
    for rec in records:
        if rec.lost or rec.bob_bit is None:
            continue
        if protocol is Protocol.BB84 and rec.bob_choice != rec.alice_basis_or_scheme:
            continue
        if protocol is Protocol.B92 and not rec.outcome:
            continue
        alice.append(rec.alice_bit)
        bob.append(rec.bob_bit)
    return np.array(alice, dtype=np.uint8), np.array(bob, dtype=np.uint8)


def qber(alice_key: Union[Sequence[int], np.ndarray],
         bob_key: Union[Sequence[int], np.ndarray]) -> float:
    a = np.asarray(alice_key)
    b = np.asarray(bob_key)
    if a.shape != b.shape:
        raise ValueError(f"key length mismatch: {a.shape} vs {b.shape}")
    if a.size == 0:
        raise ValueError("QBER is undefined for empty sifted keys")
    return float(np.count_nonzero(a != b)) / a.size
