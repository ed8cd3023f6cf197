"""Jones-calculus kernel: pure polarization states, 2x2 operators, projection
and Born-rule measurement.

Conventions (chosen so the half-wave-plate transform table holds exactly):

* ``H = (1, 0)``, ``V = (0, 1)``, ``D45 = (1, 1)/sqrt2``, ``D135 = (-1, 1)/sqrt2``
* ``L = (1, i)/sqrt2``, ``R = (1, -i)/sqrt2``
* rotation ``D(theta) = [[cos, -sin], [sin, cos]]``
* half-wave plate with fast axis at ``alpha``:
  ``[[cos 2alpha, sin 2alpha], [sin 2alpha, -cos 2alpha]]`` (a mirror about the axis)

Global phase carries no physical meaning, so every state comparison goes
through :func:`equal_up_to_phase`.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

NORM_TOL = 1e-12
UNITARY_TOL = 1e-12
ORTHONORMAL_TOL = 1e-9
# probabilities this close to 0 or 1 are snapped, so eigenstates measure deterministically
_SNAP = 1e-12

_SQRT1_2 = 1.0 / math.sqrt(2.0)


class StateLabel(enum.Enum):
    H = "H"
    V = "V"
    D45 = "D45"
    D135 = "D135"
    L = "L"
    R = "R"
    OTHER = "Other"

    def __str__(self) -> str:
        return self.value

    @classmethod
    def parse(cls, text: str) -> "StateLabel":
        key = text.strip()
        for member in cls:
            if key.upper() in (member.value.upper(), member.name):
                return member
        raise ValueError(f"unknown state label {text!r}")


NAMED_LABELS = (StateLabel.H, StateLabel.V, StateLabel.D45,
                StateLabel.D135, StateLabel.L, StateLabel.R)

ORTHOGONAL_PARTNER = {
    StateLabel.H: StateLabel.V, StateLabel.V: StateLabel.H,
    StateLabel.D45: StateLabel.D135, StateLabel.D135: StateLabel.D45,
    StateLabel.L: StateLabel.R, StateLabel.R: StateLabel.L,
}


@dataclass(frozen=True)
class PhaseTolerance:
    eps: float = 1e-9

    def __post_init__(self):
        if not (self.eps > 0 and math.isfinite(self.eps)):
            raise ValueError(f"phase tolerance must be positive, got {self.eps}")


DEFAULT_TOL = PhaseTolerance()


def _require_finite(value: float, name: str) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value}")
    return value


@dataclass(frozen=True)
class JonesVector:
    """Normalized complex 2-vector ``(a0, a1)`` on the (horizontal, vertical) axes."""

    a0: complex
    a1: complex

    def __post_init__(self):
        object.__setattr__(self, "a0", complex(self.a0))
        object.__setattr__(self, "a1", complex(self.a1))
        norm2 = abs(self.a0) ** 2 + abs(self.a1) ** 2
        if not math.isfinite(norm2) or abs(norm2 - 1.0) > NORM_TOL:
            raise ValueError(f"Jones vector not normalized: |a|^2 = {norm2!r}")

    @classmethod
    def from_array(cls, arr, normalize: bool = False) -> "JonesVector":
        arr = np.asarray(arr, dtype=complex).reshape(2)
        if normalize:
            n = np.linalg.norm(arr)
            if n == 0:
                raise ValueError("cannot normalize the zero vector")
            arr = arr / n
        return cls(arr[0], arr[1])

    @property
    def array(self) -> np.ndarray:
        return np.array([self.a0, self.a1], dtype=complex)

    def inner(self, other: "JonesVector") -> complex:
        """<self|other>"""
        return self.a0.conjugate() * other.a0 + self.a1.conjugate() * other.a1

    def to_text(self) -> str:
        """Render as ``(re+imi, re+imi)`` with 17 significant digits."""
        return f"({_fmt_complex(self.a0)}, {_fmt_complex(self.a1)})"

    @classmethod
    def from_text(cls, text: str) -> "JonesVector":
        body = text.strip()
        if not (body.startswith("(") and body.endswith(")")):
            raise ValueError(f"malformed Jones vector text {text!r}")
        parts = body[1:-1].split(",")
        if len(parts) != 2:
            raise ValueError(f"malformed Jones vector text {text!r}")
        return cls(*(complex(p.strip().replace("i", "j")) for p in parts))

    def __str__(self) -> str:
        return self.to_text()


def _fmt_complex(z: complex) -> str:
    return f"{z.real:.17g}{z.imag:+.17g}i"


@dataclass(frozen=True, eq=False)
class JonesMatrix:
    """2x2 complex operator. ``kind`` tags where it came from (rotation, faraday,
    hwp, projector, ...) and has no effect on the algebra."""

    m: np.ndarray
    kind: str = field(default="generic")

    def __post_init__(self):
        arr = np.array(self.m, dtype=complex).reshape(2, 2)
        if not np.all(np.isfinite(arr)):
            raise ValueError("Jones matrix entries must be finite")
        arr.flags.writeable = False
        object.__setattr__(self, "m", arr)

    m00 = property(lambda self: complex(self.m[0, 0]))
    m01 = property(lambda self: complex(self.m[0, 1]))
    m10 = property(lambda self: complex(self.m[1, 0]))
    m11 = property(lambda self: complex(self.m[1, 1]))

    def dagger(self) -> "JonesMatrix":
        return JonesMatrix(self.m.conj().T, self.kind)

    def is_unitary(self, tol: float = UNITARY_TOL) -> bool:
        return bool(np.allclose(self.m.conj().T @ self.m, np.eye(2), rtol=0, atol=tol))

    def __matmul__(self, other):
        if isinstance(other, JonesMatrix):
            return compose(self, other)
        if isinstance(other, JonesVector):
            return apply(self, other)
        return NotImplemented

    def __repr__(self) -> str:
        return f"JonesMatrix(kind={self.kind!r}, m={self.m.tolist()!r})"


# --- array-level constructors (broadcast over leading axes) -----------------

def rotation_matrices(angles) -> np.ndarray:
    """Stack of rotation matrices with shape ``angles.shape + (2, 2)``."""
    a = np.asarray(angles, dtype=float)
    c, s = np.cos(a), np.sin(a)
    out = np.empty(a.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = c
    out[..., 0, 1] = -s
    out[..., 1, 0] = s
    out[..., 1, 1] = c
    return out


def hwp_matrices(axes) -> np.ndarray:
    """Stack of half-wave-plate mirror matrices for fast-axis angles ``axes``."""
    a = 2.0 * np.asarray(axes, dtype=float)
    c, s = np.cos(a), np.sin(a)
    out = np.empty(a.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = c
    out[..., 0, 1] = s
    out[..., 1, 0] = s
    out[..., 1, 1] = -c
    return out


def apply_batch(ops: np.ndarray, states: np.ndarray) -> np.ndarray:
    """Apply ``(N, 2, 2)`` operators to ``(N, 2)`` states, pulse by pulse."""
    return np.einsum("nij,nj->ni", ops, states)


def born_probabilities(target: JonesVector, states: np.ndarray) -> np.ndarray:
    """``|<target|psi_n>|^2`` for every row of ``states``."""
    amp = states @ target.array.conj()
    return snap_probabilities(np.abs(amp) ** 2)


def snap_probabilities(p):
    """Clip to [0, 1] and snap values within 1e-12 of either end."""
    p = np.clip(p, 0.0, 1.0)
    p = np.where(p < _SNAP, 0.0, p)
    return np.where(p > 1.0 - _SNAP, 1.0, p)


# --- states -----------------------------------------------------------------

_CANONICAL = {
    StateLabel.H: (1.0, 0.0),
    StateLabel.V: (0.0, 1.0),
    StateLabel.D45: (_SQRT1_2, _SQRT1_2),
    StateLabel.D135: (-_SQRT1_2, _SQRT1_2),
    StateLabel.L: (_SQRT1_2, 1j * _SQRT1_2),
    StateLabel.R: (_SQRT1_2, -1j * _SQRT1_2),
}


def canonical_state(label: StateLabel) -> JonesVector:
    if label not in _CANONICAL:
        raise ValueError(f"no canonical vector for label {label}")
    return JonesVector(*_CANONICAL[label])


def linear_state(angle: float) -> JonesVector:
    """Linear polarization at ``angle`` radians from horizontal."""
    angle = _require_finite(angle, "angle")
    return JonesVector(math.cos(angle), math.sin(angle))


# --- operators --------------------------------------------------------------

def identity() -> JonesMatrix:
    return JonesMatrix(np.eye(2), "identity")


def rotation_operator(theta: float) -> JonesMatrix:
    """Channel rotation D(theta); leaves circular states fixed up to phase."""
    theta = _require_finite(theta, "theta")
    return JonesMatrix(rotation_matrices(theta), "rotation")


def faraday_operator(beta: float) -> JonesMatrix:
    """Faraday rotator turning the polarization plane by ``beta``."""
    beta = _require_finite(beta, "beta")
    return JonesMatrix(rotation_matrices(beta), "faraday")


def hwp_operator(axis_angle: float) -> JonesMatrix:
    """Half-wave plate with its axis at ``axis_angle``.

    Sends ``linear_state(phi)`` to ``linear_state(2*axis_angle - phi)`` and
    swaps L and R, both up to global phase.
    """
    axis_angle = _require_finite(axis_angle, "axis_angle")
    return JonesMatrix(hwp_matrices(axis_angle), "hwp")


def projector(target: JonesVector) -> JonesMatrix:
    t = target.array
    return JonesMatrix(np.outer(t, t.conj()), "projector")


def compose(outer: JonesMatrix, inner: JonesMatrix) -> JonesMatrix:
    """Product ``outer @ inner``: ``inner`` acts first."""
    kind = outer.kind if outer.kind == inner.kind else "composite"
    return JonesMatrix(outer.m @ inner.m, kind)


def apply(op: JonesMatrix, state: JonesVector) -> JonesVector:
    out = op.m @ state.array
    norm = float(np.linalg.norm(out))
    if abs(norm - 1.0) > NORM_TOL:
        raise ValueError(
            f"operator changed the state norm to {norm!r}; use project() for projectors")
    return JonesVector.from_array(out / norm)


def project(target: JonesVector, state: JonesVector) -> tuple[complex, JonesVector]:
    """Return ``(<target|state>, target)``; the squared amplitude is the click probability."""
    return target.inner(state), target


def _check_orthonormal(basis: Sequence[JonesVector]) -> None:
    if len(basis) != 2:
        raise ValueError("a measurement basis needs exactly two vectors")
    if abs(basis[0].inner(basis[1])) > ORTHONORMAL_TOL:
        raise ValueError("measurement basis vectors are not orthogonal")


def measure_in_basis(basis: Sequence[JonesVector], state: JonesVector,
                     rng: np.random.Generator) -> int:
    """Born-rule outcome index: 0 with probability ``|<b0|state>|^2``, else 1."""
    _check_orthonormal(basis)
    p0 = float(snap_probabilities(abs(basis[0].inner(state)) ** 2))
    return 0 if rng.random() < p0 else 1


def measure_projector(target: JonesVector, state: JonesVector,
                      rng: np.random.Generator) -> bool:
    p = float(snap_probabilities(abs(target.inner(state)) ** 2))
    return bool(rng.random() < p)


def equal_up_to_phase(a: JonesVector, b: JonesVector,
                      tol: PhaseTolerance = DEFAULT_TOL) -> bool:
    return abs(a.inner(b)) >= 1.0 - tol.eps


def matrices_equal_up_to_phase(a: JonesMatrix, b: JonesMatrix,
                               tol: float = 1e-9) -> bool:
    """True when ``a = exp(i*phi) * b`` for some real phi."""
    # |tr(b^dagger a)| = 2 exactly when a is a phase multiple of unitary b
    ov = np.trace(b.m.conj().T @ a.m)
    if abs(ov) < 1e-15:
        return False
    phase = ov / abs(ov)
    return bool(np.allclose(a.m, phase * b.m, rtol=0, atol=tol))


def classify_state(state: JonesVector, tol: PhaseTolerance = DEFAULT_TOL) -> StateLabel:
    for label in NAMED_LABELS:
        if equal_up_to_phase(state, canonical_state(label), tol):
            return label
    return StateLabel.OTHER
