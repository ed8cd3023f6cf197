import textwrap

import pytest

from polqkd.channel import LinearRamp, Sinusoid, Table
from polqkd.config import (
    ConfigError,
    ReceiverTable,
    build_config,
    config_echo,
    load_config,
    read_config_file,
)
from polqkd.jones import StateLabel
from polqkd.protocol import B92Scheme, Bb84Basis, Protocol
from polqkd.tracking import Placement, TrackingMode


def write(tmp_path, text, name="session.ini"):
    path = tmp_path / name
    path.write_text(textwrap.dedent(text))
    return path


def test_load_full_config(tmp_path):
    path = write(tmp_path, """
        [session]
        protocol = BB84
        bases = Diagonal, Circular
        tracking = Faraday
        pulses = 500
        seed = 0x10
        placement = transmitter

        [medium]
        verdet = 3.5
        length = 0.1

        [tracking]
        estimation_sigma = 0.01

        [channel]
        loss_probability = 0.1   # comment
        angle_jitter_sigma = 0.02

        [channel.profile]
        kind = Sinusoid
        amplitude = 0.5
        period = 2.0
    """)
    cfg = load_config(path)
    assert cfg.bases == (Bb84Basis.DIAGONAL, Bb84Basis.CIRCULAR)
    assert cfg.tracking is TrackingMode.FARADAY
    assert cfg.medium.verdet == 3.5 and cfg.seed == 16 and cfg.pulses == 500
    assert cfg.placement is Placement.TRANSMITTER
    assert cfg.channel.profile == Sinusoid(0.5, 2.0, 0.0)
    assert cfg.estimation_error.sigma == 0.01
    assert cfg.effective_receiver_table is ReceiverTable.TRACKED_REMAP


def test_defaults():
    cfg = build_config({})
    assert cfg.protocol is Protocol.BB84
    assert cfg.tracking is TrackingMode.HALF_WAVE_PLATE
    assert isinstance(cfg.channel.profile, LinearRamp)
    assert build_config({"session.tracking": "None"}).effective_receiver_table \
        is ReceiverTable.TRANSMITTER_TABLE


def test_overrides_win(tmp_path):
    path = write(tmp_path, "[session]\nseed = 1\n")
    cfg = load_config(path, {"session.seed": "9", "session.protocol": "B92",
                             "session.scheme": "D45,L"})
    assert cfg.seed == 9 and cfg.scheme == B92Scheme(StateLabel.D45, StateLabel.L)


def test_table_profile_relative_path(tmp_path):
    (tmp_path / "theta.csv").write_text("t,theta\n0,0\n1,2\n")
    path = write(tmp_path, "[channel.profile]\nkind = Table\ntable = theta.csv\n")
    cfg = load_config(path)
    assert isinstance(cfg.channel.profile, Table)
    assert cfg.channel.profile.angles == (0.0, 2.0)


@pytest.mark.parametrize("flat", [
    {"session.protocl": "BB84"},
    {"session.pulses": "ten"},
    {"session.pulses": "0"},
    {"session.seed": "-1"},
    {"session.bases": "Diagonal, Diagonal"},
    {"session.tracking": "HalfWavePlate", "medium.verdet": "1"},
    {"session.protocol": "B92", "session.scheme": "H,V"},
    {"channel.loss_probability": "1.2"},
    {"channel.angle_jitter_sigma": "nan"},
    {"channel.profile.kind": "Spiral"},
    {"channel.profile.kind": "LinearRamp"},
    {"channel.profile.kind": "Table"},
    {"session.receiver_table": "whatever"},
    {"session.tracking": "None", "session.receiver_table": "paper_remap"},
    {"session.tracking": "Faraday", "medium.verdet": "0"},
])
def test_invalid_configs(flat):
    with pytest.raises(ConfigError):
        build_config(flat)


def test_unreadable_and_unknown(tmp_path):
    with pytest.raises(ConfigError):
        read_config_file(tmp_path / "missing.ini")
    with pytest.raises(ConfigError):
        read_config_file(write(tmp_path, "[session]\ncolour = blue\n"))
    with pytest.raises(ConfigError):
        read_config_file(write(tmp_path, "not an ini file"))


def test_echo():
    cfg = build_config({"session.tracking": "Faraday", "channel.profile.kind": "Constant",
                        "channel.profile.theta0": "0.2"})
    echo = config_echo(cfg)
    assert echo["tracking"] == "Faraday"
    assert echo["medium"] == {"verdet": -40.0, "length": 0.02}
    assert echo["channel"]["profile"] == {"kind": "Constant", "theta0": 0.2}
