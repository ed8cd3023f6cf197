"""Rotating satellite channel.

The channel is a pure frame rotation ``D(theta(t))``: no retardance, no
ellipticity, no depolarization. Optional non-idealities are photon loss and
an additive Gaussian jitter on the rotation angle.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .jones import JonesVector, apply, rotation_operator


def _finite(x: float, name: str) -> float:
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"{name} must be finite, got {x}")
    return x


def _check_times(t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if np.any(~np.isfinite(t)) or np.any(t < 0):
        raise ValueError("time must be finite and >= 0")
    return t


def _out(values):
    return float(values) if np.ndim(values) == 0 else values


@dataclass(frozen=True)
class Constant:
    theta0: float

    def __post_init__(self):
        _finite(self.theta0, "theta0")

    def at(self, t):
        t = _check_times(t)
        return _out(np.full(t.shape, float(self.theta0)))


@dataclass(frozen=True)
class LinearRamp:
    theta0: float
    rate: float  # rad/s

    def __post_init__(self):
        _finite(self.theta0, "theta0")
        _finite(self.rate, "rate")

    def at(self, t):
        t = _check_times(t)
        return _out(self.theta0 + self.rate * t)


@dataclass(frozen=True)
class Sinusoid:
    """``amplitude * sin(2*pi*t/period + phase)``."""

    amplitude: float
    period: float
    phase: float = 0.0

    def __post_init__(self):
        _finite(self.amplitude, "amplitude")
        _finite(self.phase, "phase")
        if not (_finite(self.period, "period") > 0):
            raise ValueError("period must be positive")

    def at(self, t):
        t = _check_times(t)
        return _out(self.amplitude * np.sin(2 * math.pi * t / self.period + self.phase))


@dataclass(frozen=True)
class Table:
    """Piecewise-linear ``theta(t)`` through ``(t, theta)`` samples."""

    times: tuple
    angles: tuple

    def __post_init__(self):
        times = tuple(float(x) for x in self.times)
        angles = tuple(float(x) for x in self.angles)
        if len(times) != len(angles) or len(times) < 1:
            raise ValueError("table needs matching, non-empty time and angle columns")
        if not all(math.isfinite(x) for x in times + angles):
            raise ValueError("table entries must be finite")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("table times must be strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "angles", angles)

    @classmethod
    def from_pairs(cls, pairs) -> "Table":
        pairs = list(pairs)
        return cls(tuple(p[0] for p in pairs), tuple(p[1] for p in pairs))

    @classmethod
    def from_csv(cls, path: Union[str, Path]) -> "Table":
        """Two columns ``t_seconds, theta_radians``; a header row is optional."""
        rows = []
        with open(path, newline="") as fh:
            for i, row in enumerate(csv.reader(fh)):
                row = [c.strip() for c in row]
                if not row or all(c == "" for c in row) or row[0].startswith("#"):
                    continue
                if len(row) < 2:
                    raise ValueError(f"{path}:{i + 1}: expected two columns")
                try:
                    rows.append((float(row[0]), float(row[1])))
                except ValueError:
                    if rows:
                        raise ValueError(f"{path}:{i + 1}: non-numeric row {row!r}") from None
                    # header
        return cls.from_pairs(rows)

    def at(self, t):
        t = _check_times(t)
        if np.any(t < self.times[0]) or np.any(t > self.times[-1]):
            raise ValueError(
                f"t outside table span [{self.times[0]}, {self.times[-1]}]")
        return _out(np.interp(t, self.times, self.angles))


ThetaProfile = Union[Constant, LinearRamp, Sinusoid, Table]

# Not a physical pass model; just a slow default drift.
DEFAULT_PROFILE = LinearRamp(theta0=0.0, rate=0.01)


def theta_at(profile: ThetaProfile, t):
    return profile.at(t)


@dataclass(frozen=True)
class ChannelConfig:
    profile: ThetaProfile = DEFAULT_PROFILE
    pulse_rate: float = 1.0e6
    loss_probability: float = 0.0
    angle_jitter_sigma: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.pulse_rate) and self.pulse_rate > 0):
            raise ValueError("pulse_rate must be positive")
        if not (0.0 <= self.loss_probability <= 1.0):
            raise ValueError("loss_probability must lie in [0, 1]")
        if not (math.isfinite(self.angle_jitter_sigma) and self.angle_jitter_sigma >= 0):
            raise ValueError("angle_jitter_sigma must be >= 0")

    def pulse_time(self, index):
        return np.asarray(index) / self.pulse_rate


def transmit(state: JonesVector, t: float, cfg: ChannelConfig,
             rng: np.random.Generator) -> Optional[JonesVector]:
    """Send one photon through the channel; ``None`` means it was lost."""
    if rng.random() < cfg.loss_probability:
        return None
    jitter = cfg.angle_jitter_sigma * rng.standard_normal()
    return apply(rotation_operator(theta_at(cfg.profile, t) + jitter), state)


def channel_angles(t: np.ndarray, cfg: ChannelConfig, normals: np.ndarray) -> np.ndarray:
    """Per-pulse rotation angle given pre-drawn standard normals for the jitter."""
    return np.asarray(theta_at(cfg.profile, t)) + cfg.angle_jitter_sigma * normals


def loss_mask(cfg: ChannelConfig, uniforms: np.ndarray) -> np.ndarray:
    return np.asarray(uniforms) < cfg.loss_probability
