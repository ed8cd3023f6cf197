"""Self-checks and the six-state transform table, as run by ``polqkd verify``
and ``polqkd table``."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .config import SessionConfig
from .jones import (
    NAMED_LABELS,
    JonesMatrix,
    StateLabel,
    apply,
    canonical_state,
    classify_state,
    compose,
    equal_up_to_phase,
    faraday_operator,
    hwp_operator,
    identity,
    linear_state,
    matrices_equal_up_to_phase,
    rotation_operator,
)
from .protocol import (
    B92Scheme,
    Bb84Basis,
    Protocol,
    b92_encode,
    b92_receiver_projectors,
    bb84_encode,
    bb84_receiver_table,
)
from .session import run_session
from .tracking import (
    DEFAULT_MEDIUM,
    TrackingMode,
    VerdetMedium,
    angle_for_field,
    composed_tracking_map,
    faraday_compensator,
    field_for_angle,
    tracked_image,
)

HWP_TABLE = {
    StateLabel.H: StateLabel.H, StateLabel.V: StateLabel.V,
    StateLabel.D45: StateLabel.D135, StateLabel.D135: StateLabel.D45,
    StateLabel.L: StateLabel.R, StateLabel.R: StateLabel.L,
}

TABLE_THETAS = (0.3, 1.7, 4.0)
ALGEBRA_TOL = 1e-12

B92_SCHEMES = (B92Scheme(StateLabel.H, StateLabel.D45),
               B92Scheme(StateLabel.H, StateLabel.L),
               B92Scheme(StateLabel.D45, StateLabel.L))


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


def sign_flipped_hwp(axis_angle: float) -> JonesMatrix:
    """Deliberately broken wave plate (off-diagonal sign flipped), used as a
    negative control for :func:`run_checks`."""
    c, s = math.cos(2 * axis_angle), math.sin(2 * axis_angle)
    return JonesMatrix([[c, -s], [-s, -c]], "hwp")


MUTATIONS = {"hwp-sign": sign_flipped_hwp}


def _close(a: JonesMatrix, b: JonesMatrix, tol: float = ALGEBRA_TOL) -> bool:
    return bool(np.allclose(a.m, b.m, rtol=0, atol=tol))


def _phase_eq(a: JonesMatrix, b: JonesMatrix) -> bool:
    return matrices_equal_up_to_phase(a, b, 1e-9)


def core_checks(rng: np.random.Generator, n: int,
                hwp: Callable[[float], JonesMatrix]) -> list:
    angles = rng.uniform(0, 2 * math.pi, size=(n, 2))
    L, R = canonical_state(StateLabel.L), canonical_state(StateLabel.R)
    out = []

    def check(name, ok):
        out.append(CheckResult(name, bool(ok)))

    check("unitarity of rotation/faraday/hwp", all(
        op(a).is_unitary(ALGEBRA_TOL)
        for a, _ in angles for op in (rotation_operator, faraday_operator, hwp)))
    check("rotation additivity D(a)D(b) = D(a+b)", all(
        _close(compose(rotation_operator(a), rotation_operator(b)), rotation_operator(a + b))
        for a, b in angles))
    check("circular states invariant under D", all(
        equal_up_to_phase(apply(rotation_operator(a), s), s)
        for a, _ in angles for s in (L, R)))
    check("hwp involution", all(_phase_eq(compose(hwp(a), hwp(a)), identity())
                                for a, _ in angles))
    check("hwp swaps L and R", all(
        equal_up_to_phase(apply(hwp(a), L), R) and equal_up_to_phase(apply(hwp(a), R), L)
        for a, _ in angles))
    check("mirror law hwp(theta/2) D(theta) |phi> = |-phi>", all(
        equal_up_to_phase(apply(compose(hwp(th / 2), rotation_operator(th)), linear_state(phi)),
                          linear_state(-phi))
        for phi, th in angles))
    check("six-state table under hwp(theta/2) D(theta)", all(
        classify_state(apply(compose(hwp(th / 2), rotation_operator(th)),
                             canonical_state(s))) is HWP_TABLE[s]
        for th, _ in angles for s in NAMED_LABELS))
    check("Born completeness", all(
        abs(abs(s0.inner(psi)) ** 2 + abs(s1.inner(psi)) ** 2 - 1) < ALGEBRA_TOL
        for psi in (apply(rotation_operator(a), canonical_state(StateLabel.L)) for a, _ in angles)
        for s0, s1 in (_pair(b) for b in Bb84Basis)))
    return out


def _pair(basis: Bb84Basis):
    return tuple(canonical_state(s) for s in basis.states)


def tracking_checks(rng: np.random.Generator, n: int) -> list:
    thetas = rng.uniform(0, 2 * math.pi, size=n)
    out = []
    out.append(CheckResult("Faraday tracking restores all six states", all(
        equal_up_to_phase(apply(composed_tracking_map(TrackingMode.FARADAY, th, DEFAULT_MEDIUM),
                                canonical_state(s)), canonical_state(s))
        for th in thetas for s in NAMED_LABELS)))
    out.append(CheckResult("HWP tracking fixes H,V and swaps D45/D135, L/R", all(
        classify_state(apply(composed_tracking_map(TrackingMode.HALF_WAVE_PLATE, th),
                             canonical_state(s))) is HWP_TABLE[s]
        for th in thetas for s in NAMED_LABELS)))
    betas = rng.uniform(-10, 10, size=n)
    verdets = rng.uniform(1, 200, size=n) * rng.choice([-1, 1], size=n)
    lengths = rng.uniform(1e-3, 1, size=n)
    out.append(CheckResult("Verdet round trip", all(
        abs(angle_for_field(field_for_angle(b, VerdetMedium(v, l)), VerdetMedium(v, l)) - b)
        <= ALGEBRA_TOL
        for b, v, l in zip(betas, verdets, lengths))))
    out.append(CheckResult("estimation error leaves residual rotation D(-delta)", all(
        _phase_eq(compose(faraday_compensator(th + d, DEFAULT_MEDIUM)[0], rotation_operator(th)),
                  rotation_operator(-d))
        for th, d in zip(thetas, rng.normal(0, 0.1, size=n)))))
    return out


def protocol_checks() -> list:
    tracked = (TrackingMode.FARADAY, TrackingMode.HALF_WAVE_PLATE)
    out = []
    ok = True
    for mode in tracked:
        for basis in Bb84Basis:
            table = bb84_receiver_table(basis, mode)
            for bit in (0, 1):
                ok &= table.decode(tracked_image(mode, bb84_encode(bit, basis))) == bit
            if mode is TrackingMode.FARADAY:
                ok &= dict(table.entries) == {bb84_encode(1, basis): 1, bb84_encode(0, basis): 0}
    out.append(CheckResult("BB84 receiver tables decode every tracked state", ok))

    unambiguous, half = True, True
    for mode in tracked:
        for scheme in B92_SCHEMES:
            for target, bit in b92_receiver_projectors(scheme, mode):
                t = canonical_state(target)
                own = canonical_state(tracked_image(mode, b92_encode(bit, scheme)))
                other = canonical_state(tracked_image(mode, b92_encode(1 - bit, scheme)))
                unambiguous &= abs(t.inner(other)) ** 2 < ALGEBRA_TOL
                half &= abs(abs(t.inner(own)) ** 2 - 0.5) < ALGEBRA_TOL
    out.append(CheckResult("B92 projectors never click on the opposite bit", unambiguous))
    out.append(CheckResult("B92 conclusive click probability is 1/2", half))
    return out


def session_checks(seed: int) -> list:
    out = []
    for mode in (TrackingMode.FARADAY, TrackingMode.HALF_WAVE_PLATE):
        medium = DEFAULT_MEDIUM if mode is TrackingMode.FARADAY else None
        bb84 = run_session(SessionConfig(tracking=mode, medium=medium, pulses=4000, seed=seed,
                                         bases=(Bb84Basis.DIAGONAL, Bb84Basis.CIRCULAR)))
        out.append(CheckResult(f"noiseless BB84 session under {mode} has zero QBER",
                               bb84.qber == 0.0, f"qber {bb84.qber}"))
        errors = sum(run_session(SessionConfig(protocol=Protocol.B92, scheme=scheme,
                                               tracking=mode, medium=medium, pulses=4000,
                                               seed=seed)).errors
                     for scheme in B92_SCHEMES)
        out.append(CheckResult(f"noiseless B92 sessions under {mode} have no conclusive errors",
                               errors == 0, f"{errors} errors"))
    return out


def run_checks(seed: int = 2024, n: int = 100, mutation: Optional[str] = None,
               sessions: bool = True) -> list:
    """Run every invariant check; ``mutation`` swaps in a broken component."""
    hwp = hwp_operator
    if mutation is not None:
        if mutation not in MUTATIONS:
            raise ValueError(f"unknown mutation {mutation!r}; known: {sorted(MUTATIONS)}")
        hwp = MUTATIONS[mutation]
    rng = np.random.default_rng(seed)
    results = core_checks(rng, n, hwp) + tracking_checks(rng, n) + protocol_checks()
    if sessions:
        results += session_checks(seed)
    return results


def format_report(results: list) -> str:
    lines = [f"[{'PASS' if r.passed else 'FAIL'}] {r.name}" + (f": {r.detail}" if r.detail else "")
             for r in results]
    failed = sum(not r.passed for r in results)
    lines.append(f"{len(results) - failed}/{len(results)} checks passed")
    return "\n".join(lines)


def transform_table(thetas=TABLE_THETAS, medium: VerdetMedium = DEFAULT_MEDIUM) -> dict:
    """``{mode: {state: [label at each theta]}}`` for the composed tracking maps."""
    table = {}
    for mode in TrackingMode:
        rows = {}
        for s in NAMED_LABELS:
            rows[s] = [classify_state(apply(
                composed_tracking_map(mode, th, medium if mode is TrackingMode.FARADAY else None),
                canonical_state(s))) for th in thetas]
        table[mode] = rows
    return table


def emit_transform_table(thetas=TABLE_THETAS) -> str:
    table = transform_table(thetas)
    header = ["mode", "state"] + [f"theta={th:g}" for th in thetas]
    rows = [[str(mode), str(s)] + [str(x) for x in labels]
            for mode, per_state in table.items() for s, labels in per_state.items()]
    widths = [max(len(r[i]) for r in [header] + rows) for i in range(len(header))]
    fmt = "  ".join(f"{{:<{w}}}" for w in widths)
    return "\n".join([fmt.format(*header)] + [fmt.format(*r) for r in rows])
