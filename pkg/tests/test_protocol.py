import math

import numpy as np
import pytest

from polqkd.jones import StateLabel
from polqkd.protocol import (
    B92Scheme,
    Bb84Basis,
    Protocol,
    PulseRecord,
    b92_decode,
    b92_encode,
    b92_receiver_projectors,
    bb84_encode,
    bb84_receiver_table,
    qber,
    sift,
    transmitter_table,
    untracked_b92_projectors,
)
from polqkd.tracking import TrackingMode

S = StateLabel
FARADAY, HWP, NONE = TrackingMode.FARADAY, TrackingMode.HALF_WAVE_PLATE, TrackingMode.NONE


@pytest.mark.parametrize("bit,basis,expected", [
    (1, Bb84Basis.RECTILINEAR, S.H), (0, Bb84Basis.RECTILINEAR, S.V),
    (1, Bb84Basis.DIAGONAL, S.D45), (0, Bb84Basis.DIAGONAL, S.D135),
    (1, Bb84Basis.CIRCULAR, S.L), (0, Bb84Basis.CIRCULAR, S.R),
])
def test_bb84_encode(bit, basis, expected):
    assert bb84_encode(bit, basis) is expected


def test_bb84_encode_rejects_bad_bit():
    with pytest.raises(ValueError):
        bb84_encode(2, Bb84Basis.DIAGONAL)


# receiver coding under half-wave-plate tracking, as tabulated by hand
HWP_RECEIVER = {
    Bb84Basis.RECTILINEAR: {S.H: 1, S.V: 0},
    Bb84Basis.DIAGONAL: {S.D135: 1, S.D45: 0},
    Bb84Basis.CIRCULAR: {S.R: 1, S.L: 0},
}


@pytest.mark.parametrize("basis", list(Bb84Basis))
def test_bb84_receiver_table_hwp(basis):
    assert dict(bb84_receiver_table(basis, HWP).entries) == HWP_RECEIVER[basis]


@pytest.mark.parametrize("basis", list(Bb84Basis))
def test_bb84_receiver_table_faraday_is_encoder_table(basis):
    table = bb84_receiver_table(basis, FARADAY)
    assert dict(table.entries) == dict(transmitter_table(basis).entries)
    assert table.decode(bb84_encode(1, basis)) == 1


def test_bb84_receiver_table_examples():
    assert bb84_receiver_table(Bb84Basis.DIAGONAL, HWP).decode(S.D135) == 1
    assert bb84_receiver_table(Bb84Basis.RECTILINEAR, HWP).decode(S.H) == 1
    assert bb84_receiver_table(Bb84Basis.CIRCULAR, FARADAY).decode(S.L) == 1


def test_bb84_receiver_table_rejects_untracked():
    with pytest.raises(ValueError):
        bb84_receiver_table(Bb84Basis.DIAGONAL, NONE)


def test_table_decode_outside_domain():
    with pytest.raises(ValueError):
        bb84_receiver_table(Bb84Basis.DIAGONAL, HWP).decode(S.H)


def test_coding_table_json_shape():
    d = bb84_receiver_table(Bb84Basis.DIAGONAL, HWP).to_dict()
    assert d == {"protocol": "BB84", "basis_or_scheme": "Diagonal", "mode": "HalfWavePlate",
                 "entries": {"D135": 1, "D45": 0}}


@pytest.mark.parametrize("bit,pair,expected", [
    (1, (S.H, S.D45), S.H), (0, (S.H, S.D45), S.D45),
    (0, (S.H, S.L), S.L), (1, (S.D45, S.L), S.D45),
])
def test_b92_encode(bit, pair, expected):
    assert b92_encode(bit, B92Scheme(*pair)) is expected


def test_b92_unsupported_scheme():
    with pytest.raises(ValueError):
        B92Scheme(S.H, S.V)
    with pytest.raises(ValueError):
        B92Scheme(S.D45, S.H)


def test_b92_scheme_parse():
    assert B92Scheme.parse("H, D45") == B92Scheme(S.H, S.D45)
    assert B92Scheme.parse("(D45,L)") == B92Scheme(S.D45, S.L)
    assert str(B92Scheme(S.H, S.L)) == "H,L"


@pytest.mark.parametrize("pair,expected", [
    ((S.H, S.D45), ((S.D45, 1), (S.V, 0))),
    ((S.H, S.L), ((S.L, 1), (S.V, 0))),
    ((S.D45, S.L), ((S.L, 1), (S.D45, 0))),
])
def test_b92_projectors_hwp(pair, expected):
    assert b92_receiver_projectors(B92Scheme(*pair), HWP) == expected


@pytest.mark.parametrize("pair,expected", [
    ((S.H, S.D45), ((S.D135, 1), (S.V, 0))),
    ((S.H, S.L), ((S.R, 1), (S.V, 0))),
    ((S.D45, S.L), ((S.R, 1), (S.D135, 0))),
])
def test_b92_projectors_faraday(pair, expected):
    scheme = B92Scheme(*pair)
    assert b92_receiver_projectors(scheme, FARADAY) == expected
    assert untracked_b92_projectors(scheme) == expected


def test_b92_projectors_reject_untracked():
    with pytest.raises(ValueError):
        b92_receiver_projectors(B92Scheme(S.H, S.D45), NONE)


def test_b92_decode():
    assert b92_decode(True, (S.D45, 1)) == 1
    assert b92_decode(False, (S.D45, 1)) is None
    assert b92_decode(True, (S.V, 0)) == 0


def _rec(i, bit, a, b, bob_bit, lost=False, outcome=0):
    return PulseRecord(index=i, alice_bit=bit, alice_basis_or_scheme=a, sent_label=S.H,
                       theta=0.0, lost=lost, bob_choice=b, outcome=None if lost else outcome,
                       sifted=bob_bit is not None, bob_bit=bob_bit)


def test_sift_bb84_keeps_matching_bases():
    recs = [
        _rec(0, 1, "Rectilinear", "Rectilinear", 1),
        _rec(1, 0, "Rectilinear", "Diagonal", None),
        _rec(2, 0, "Diagonal", "Diagonal", 1),
        _rec(3, 1, "Diagonal", "Diagonal", None, lost=True),
    ]
    a, b = sift(recs, Protocol.BB84)
    assert a.tolist() == [1, 0] and b.tolist() == [1, 1]


def test_sift_b92_keeps_clicks():
    recs = [_rec(0, 1, "H,D45", "D45", 1, outcome=1),
            _rec(1, 0, "H,D45", "V", None, outcome=0)]
    a, b = sift(recs, Protocol.B92)
    assert a.tolist() == [1] and b.tolist() == [1]


def test_sift_empty():
    a, b = sift([], Protocol.BB84)
    assert a.size == 0 and b.size == 0


def test_pulse_record_invariant():
    with pytest.raises(ValueError):
        PulseRecord(index=0, alice_bit=1, alice_basis_or_scheme="x", sent_label=S.H,
                    theta=0.0, sifted=True, bob_bit=None)


def test_qber():
    assert qber([0, 1, 1], [0, 1, 1]) == 0.0
    assert qber([0, 1, 1], [1, 0, 0]) == 1.0
    assert qber([0, 1, 1, 0], [0, 1, 0, 0]) == 0.25
    with pytest.raises(ValueError):
        qber([], [])
    with pytest.raises(ValueError):
        qber([0, 1], [0])


def test_sift_fraction_oracle():
    # oracle: independent binomial draw of basis matches, no simulator involved
    rng = np.random.default_rng(2)
    n = 10_000
    alice, bob = rng.integers(0, 2, n), rng.integers(0, 2, n)
    names = ["Rectilinear", "Diagonal"]
    recs = [_rec(i, 0, names[a], names[b], 0 if a == b else None)
            for i, (a, b) in enumerate(zip(alice, bob))]
    k = sift(recs, Protocol.BB84)[0].size
    assert abs(k - n / 2) <= 3 * math.sqrt(n / 4)


def test_parse_helpers():
    assert Protocol.parse("b92") is Protocol.B92
    assert Bb84Basis.parse("circular") is Bb84Basis.CIRCULAR
    with pytest.raises(ValueError):
        Bb84Basis.parse("spiral")
