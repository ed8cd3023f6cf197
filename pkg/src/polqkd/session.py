"""End-to-end key-distribution sessions over the rotating channel.

Randomness: pulses are grouped in fixed blocks of :data:`BLOCK_SIZE`; block
``k`` draws from ``SeedSequence(seed, spawn_key=(k,))``. Results therefore do
not depend on how many workers evaluate the blocks.
"""
from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np

from . import channel as chan
from .config import ReceiverTable, SessionConfig, config_echo
from .jones import (
    NAMED_LABELS,
    apply_batch,
    canonical_state,
    rotation_matrices,
    snap_probabilities,
)
from .protocol import (
    B92Scheme,
    Protocol,
    PulseRecord,
    b92_receiver_projectors,
    bb84_receiver_table,
    qber,
    sift,
    transmitter_table,
    untracked_b92_projectors,
)
from .tracking import Placement, compensator_matrices

BLOCK_SIZE = 4096

CSV_COLUMNS = ("index", "t_seconds", "theta_radians", "alice_bit", "alice_basis_or_scheme",
               "sent_label", "lost", "bob_choice", "outcome", "sifted", "bob_bit")

_LABEL_INDEX = {label: i for i, label in enumerate(NAMED_LABELS)}
_STATE_ROWS = np.array([canonical_state(label).array for label in NAMED_LABELS])


class EmptyKeyError(ValueError):
    """No pulse survived sifting, so the QBER is undefined."""


@dataclass
class SessionResult:
    config: SessionConfig
    alice_sifted: np.ndarray
    bob_sifted: np.ndarray
    qber: float
    sift_rate: float
    pulse_log: list
    qber_per_basis: dict = field(default_factory=dict)
    coding_tables: list = field(default_factory=list)
    matching_click_rate: Optional[float] = None

    @property
    def conclusive_rate(self) -> float:
        """Fraction of all pulses that yielded a key bit (the B92 name for sift_rate)."""
        return self.sift_rate

    @property
    def errors(self) -> int:
        return int(np.count_nonzero(self.alice_sifted != self.bob_sifted))

    def summary(self) -> dict:
        cfg = self.config
        rate_key = "sift_rate" if cfg.protocol is Protocol.BB84 else "conclusive_rate"
        out = {
            "config": config_echo(cfg),
            "seed": cfg.seed,
            "pulses": cfg.pulses,
            "sifted_bits": int(self.alice_sifted.size),
            "errors": self.errors,
            rate_key: self.sift_rate,
            "qber": self.qber,
            "qber_per_basis": self.qber_per_basis,
            "coding_table": self.coding_tables,
        }
        if self.matching_click_rate is not None:
            out["matching_click_rate"] = self.matching_click_rate
        return out

    def summary_json(self) -> str:
        return json.dumps(self.summary(), indent=2, sort_keys=True) + "\n"

    def pulses_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in self.pulse_log:
            writer.writerow((
                r.index, repr(r.t), repr(r.theta), r.alice_bit, r.alice_basis_or_scheme,
                r.sent_label.value, int(r.lost), r.bob_choice,
                "" if r.outcome is None else r.outcome, int(r.sifted),
                "" if r.bob_bit is None else r.bob_bit,
            ))
        return buf.getvalue()

    def write(self, output_dir: Union[str, Path]) -> tuple[Path, Path]:
        out = Path(output_dir)
        out.mkdir(parents=True, exist_ok=True)
        pulses, summary = out / "pulses.csv", out / "summary.json"
        pulses.write_text(self.pulses_csv())
        summary.write_text(self.summary_json())
        return pulses, summary


def _block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(block,)))


def _receiver_setup(cfg: SessionConfig):
    """Per-basis decode tables (BB84) or the two projectors (B92)."""
    remap = cfg.effective_receiver_table is ReceiverTable.TRACKED_REMAP
    if cfg.protocol is Protocol.BB84:
        return {b: (bb84_receiver_table(b, cfg.tracking) if remap else transmitter_table(b))
                for b in cfg.bases}
    if remap:
        return b92_receiver_projectors(cfg.scheme, cfg.tracking)
    return untracked_b92_projectors(cfg.scheme)


def _simulate_block(cfg: SessionConfig, receiver, block: int) -> list:
    start = block * BLOCK_SIZE
    n = min(BLOCK_SIZE, cfg.pulses - start)
    rng = _block_rng(cfg.seed, block)
    # fixed draw order; every stream is drawn even when unused
    bits = rng.integers(0, 2, n)
    alice_choice = rng.integers(0, 2, n)
    bob_u = rng.random(n)
    loss_u = rng.random(n)
    jitter_z = rng.standard_normal(n)
    estimate_z = rng.standard_normal(n)
    measure_u = rng.random(n)

    index = np.arange(start, start + n)
    t = cfg.channel.pulse_time(index)
    theta = np.asarray(chan.theta_at(cfg.channel.profile, t), dtype=float)
    lost = chan.loss_mask(cfg.channel, loss_u)
    channel_ops = rotation_matrices(chan.channel_angles(t, cfg.channel, jitter_z))
    comp = compensator_matrices(cfg.tracking, cfg.estimation_error.estimate(theta, estimate_z),
                                cfg.placement)
    if cfg.placement is Placement.TRANSMITTER:
        total = channel_ops @ comp
    else:
        total = comp @ channel_ops

    if cfg.protocol is Protocol.BB84:
        bases = cfg.bases
        alice_basis = alice_choice
        bob_basis = (bob_u >= 0.5).astype(int)
        sent = [bases[a].states[1 - b] for a, b in zip(alice_basis.tolist(), bits.tolist())]
        # bob measures onto (bit-1 state, bit-0 state) of his basis; outcome 0 = bit-1 state
        targets = np.array([_LABEL_INDEX[bases[k].states[0]] for k in (0, 1)])[bob_basis]
        label_names = [str(bases[0]), str(bases[1])]
    else:
        scheme: B92Scheme = cfg.scheme
        sent = [scheme.one_state if b else scheme.zero_state for b in bits.tolist()]
        # projector 0 is the bit-1 projector
        bob_basis = (bob_u >= cfg.b92_projector_bias).astype(int)
        targets = np.array([_LABEL_INDEX[receiver[k][0]] for k in (0, 1)])[bob_basis]
        label_names = [str(receiver[0][0]), str(receiver[1][0])]

    states = _STATE_ROWS[[_LABEL_INDEX[s] for s in sent]]
    arrived = apply_batch(total, states)
    amp = np.einsum("ni,ni->n", _STATE_ROWS[targets].conj(), arrived)
    p = snap_probabilities(np.abs(amp) ** 2)
    hit = measure_u < p  # BB84: outcome 0; B92: click

    records = []
    for i in range(n):
        b = int(bits[i])
        choice = int(bob_basis[i])
        if cfg.protocol is Protocol.BB84:
            a_name = label_names[int(alice_basis[i])]
            b_name = label_names[choice]
            if lost[i]:
                outcome, sifted, bob_bit = None, False, None
            else:
                outcome = 0 if hit[i] else 1
                sifted = a_name == b_name
                basis = bases[choice]
                bob_bit = receiver[basis].decode(basis.states[outcome]) if sifted else None
        else:
            a_name = str(cfg.scheme)
            b_name = label_names[choice]
            if lost[i]:
                outcome, sifted, bob_bit = None, False, None
            else:
                outcome = int(hit[i])
                sifted = bool(hit[i])
                bob_bit = receiver[choice][1] if sifted else None
        records.append(PulseRecord(
            index=int(index[i]), alice_bit=b, alice_basis_or_scheme=a_name,
            sent_label=sent[i], theta=float(theta[i]), t=float(t[i]), lost=bool(lost[i]),
            bob_choice=b_name, outcome=outcome, sifted=sifted, bob_bit=bob_bit,
        ))
    return records


def simulate_pulses(cfg: SessionConfig, workers: int = 1) -> list:
    """Pulse log for a session, ordered by pulse index."""
    receiver = _receiver_setup(cfg)
    blocks = range((cfg.pulses + BLOCK_SIZE - 1) // BLOCK_SIZE)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda k: _simulate_block(cfg, receiver, k), blocks))
    else:
        parts = [_simulate_block(cfg, receiver, k) for k in blocks]
    return [rec for part in parts for rec in part]


def _group_qber(records, key) -> dict:
    groups: dict = {}
    for r in records:
        if r.sifted:
            g = groups.setdefault(key(r), [0, 0])
            g[0] += 1
            g[1] += int(r.alice_bit != r.bob_bit)
    return {k: {"sifted": s, "errors": e, "qber": e / s} for k, (s, e) in sorted(groups.items())}


def _tables_for_output(cfg: SessionConfig, receiver) -> list:
    if cfg.protocol is Protocol.BB84:
        return [receiver[b].to_dict() for b in cfg.bases]
    return [{"projector": str(label), "bit": bit} for label, bit in receiver]


def run_session(cfg: SessionConfig, workers: int = 1) -> SessionResult:
    """Encode, transmit, compensate, measure, sift and score one session.

    Raises :class:`EmptyKeyError` when no pulse survives sifting.
    """
    receiver = _receiver_setup(cfg)
    records = simulate_pulses(cfg, workers)
    alice, bob = sift(records, cfg.protocol)
    if alice.size == 0:
        raise EmptyKeyError("no sifted bits; QBER is undefined")
    if cfg.protocol is Protocol.BB84:
        per_basis = _group_qber(records, lambda r: r.alice_basis_or_scheme)
        matching = None
    else:
        per_basis = _group_qber(records, lambda r: r.bob_choice)
        bit_of = {str(label): bit for label, bit in receiver}
        trials = [r for r in records if not r.lost and bit_of[r.bob_choice] == r.alice_bit]
        matching = sum(r.outcome for r in trials) / len(trials) if trials else None
    return SessionResult(
        config=cfg,
        alice_sifted=alice,
        bob_sifted=bob,
        qber=qber(alice, bob),
        sift_rate=alice.size / cfg.pulses,
        pulse_log=records,
        qber_per_basis=per_basis,
        coding_tables=_tables_for_output(cfg, receiver),
        matching_click_rate=matching,
    )
