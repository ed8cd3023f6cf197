"""Polarization-tracking compensators.

The channel turns the polarization frame by ``theta`` (operator ``D``). A
compensator undoes it in one of two ways:

* Faraday rotator: rotates by ``-theta``; the composed map is the identity.
  The required field follows ``beta = V * B * l``.
* Half-wave plate with its axis at ``theta / 2``: the composed map is the fixed
  mirror ``diag(1, -1)`` for every ``theta``. H and V come back unchanged while
  D45/D135 and L/R swap, so the receiver has to remap bits.

Sign convention: the Faraday compensator always rotates by the negative of the
channel angle, wrapped to ``(-pi, pi]`` so the field magnitude stays minimal.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from .jones import (
    JonesMatrix,
    StateLabel,
    apply,
    canonical_state,
    classify_state,
    compose,
    faraday_operator,
    hwp_matrices,
    hwp_operator,
    identity,
    rotation_matrices,
    rotation_operator,
)


class TrackingMode(enum.Enum):
    FARADAY = "Faraday"
    HALF_WAVE_PLATE = "HalfWavePlate"
    NONE = "None"

    def __str__(self) -> str:
        return self.value

    @classmethod
    def parse(cls, text: str) -> "TrackingMode":
        key = text.strip().lower().replace("_", "").replace("-", "")
        aliases = {"faraday": cls.FARADAY, "halfwaveplate": cls.HALF_WAVE_PLATE,
                   "hwp": cls.HALF_WAVE_PLATE, "none": cls.NONE}
        if key not in aliases:
            raise ValueError(f"unknown tracking mode {text!r}")
        return aliases[key]


class Placement(enum.Enum):
    RECEIVER = "receiver"
    TRANSMITTER = "transmitter"


@dataclass(frozen=True)
class VerdetMedium:
    """Magneto-optic medium: Verdet constant in rad/(T*m), length in m."""

    verdet: float
    length: float

    def __post_init__(self):
        if not math.isfinite(self.verdet) or self.verdet == 0:
            raise ValueError(f"Verdet constant must be finite and nonzero, got {self.verdet}")
        if not math.isfinite(self.length) or self.length <= 0:
            raise ValueError(f"medium length must be positive, got {self.length}")


# Placeholder medium (roughly a 2 cm TGG crystal near 1 um); only the field
# magnitudes depend on it, never the composed polarization map.
DEFAULT_MEDIUM = VerdetMedium(verdet=-40.0, length=0.02)


@dataclass(frozen=True)
class CompensatorState:
    mode: TrackingMode
    theta_estimate: float
    field: Optional[float] = None
    axis: Optional[float] = None


def wrap_angle(angle):
    """Map angles into ``(-pi, pi]``; works on scalars and arrays."""
    wrapped = math.pi - np.mod(math.pi - np.asarray(angle, dtype=float), 2 * math.pi)
    return float(wrapped) if np.ndim(wrapped) == 0 else wrapped


def field_for_angle(beta: float, medium: VerdetMedium) -> float:
    """Magnetic induction (tesla) needed to rotate the plane by ``beta``."""
    return beta / (medium.verdet * medium.length)


def angle_for_field(field: float, medium: VerdetMedium) -> float:
    return medium.verdet * field * medium.length


def faraday_compensator(theta: float, medium: VerdetMedium
                        ) -> tuple[JonesMatrix, CompensatorState]:
    beta = wrap_angle(-theta)
    op = faraday_operator(beta)
    return op, CompensatorState(TrackingMode.FARADAY, float(theta),
                                field=field_for_angle(beta, medium))


def hwp_compensator(theta: float) -> tuple[JonesMatrix, CompensatorState]:
    axis = float(theta) / 2.0
    return hwp_operator(axis), CompensatorState(TrackingMode.HALF_WAVE_PLATE,
                                                float(theta), axis=axis)


def compensator(mode: TrackingMode, theta: float,
                medium: Optional[VerdetMedium] = None,
                placement: Placement = Placement.RECEIVER) -> JonesMatrix:
    """Corrective operator for a channel angle estimate ``theta``.

    At the transmitter the operator acts before ``D(theta)``; the HWP axis then
    sits at ``-theta/2`` so the composed map is the same mirror as at the
    receiver.
    """
    _check_medium(mode, medium)
    if mode is TrackingMode.NONE:
        return identity()
    if mode is TrackingMode.FARADAY:
        return faraday_compensator(theta, medium)[0]
    if placement is Placement.TRANSMITTER:
        return hwp_operator(-float(theta) / 2.0)
    return hwp_compensator(theta)[0]


def _check_medium(mode: TrackingMode, medium: Optional[VerdetMedium]) -> None:
    if mode is TrackingMode.FARADAY and medium is None:
        raise ValueError("Faraday tracking needs a VerdetMedium")
    if mode is not TrackingMode.FARADAY and medium is not None:
        raise ValueError(f"a VerdetMedium is only meaningful for Faraday tracking, not {mode}")


def composed_tracking_map(mode: TrackingMode, theta: float,
                          medium: Optional[VerdetMedium] = None) -> JonesMatrix:
    """``compensator(theta) @ D(theta)`` for a receiver-side compensator."""
    return compose(compensator(mode, theta, medium), rotation_operator(theta))


def compensator_matrices(mode: TrackingMode, theta_estimates: np.ndarray,
                         placement: Placement = Placement.RECEIVER) -> np.ndarray:
    """Vectorized :func:`compensator` over an array of angle estimates."""
    est = np.asarray(theta_estimates, dtype=float)
    if mode is TrackingMode.NONE:
        return np.broadcast_to(np.eye(2, dtype=complex), est.shape + (2, 2)).copy()
    if mode is TrackingMode.FARADAY:
        return rotation_matrices(wrap_angle(-est))
    sign = -1.0 if placement is Placement.TRANSMITTER else 1.0
    return hwp_matrices(sign * est / 2.0)


@lru_cache(maxsize=None)
def tracked_image(mode: TrackingMode, label: StateLabel) -> StateLabel:
    """Label that a canonical state arrives as after channel + compensator.

    Computed from the operator algebra; it does not depend on theta.
    """
    if mode is TrackingMode.NONE:
        raise ValueError("untracked channel has no fixed image")
    medium = DEFAULT_MEDIUM if mode is TrackingMode.FARADAY else None
    out = apply(composed_tracking_map(mode, 0.0, medium), canonical_state(label))
    return classify_state(out)


@dataclass(frozen=True)
class EstimationError:
    """Channel-angle oracle error: ``estimate = theta + bias + sigma * N(0, 1)``."""

    sigma: float = 0.0
    bias: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.sigma) and self.sigma >= 0):
            raise ValueError(f"estimation sigma must be >= 0, got {self.sigma}")
        if not math.isfinite(self.bias):
            raise ValueError("estimation bias must be finite")

    def estimate(self, theta, normals):
        return np.asarray(theta) + self.bias + self.sigma * np.asarray(normals)
