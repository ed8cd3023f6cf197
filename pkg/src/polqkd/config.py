"""Session configuration.

A session is described by one INI-style file whose sections use dotted names::

    [session]
    protocol = BB84
    bases = Rectilinear, Diagonal
    tracking = HalfWavePlate
    pulses = 10000
    seed = 7

    [channel]
    loss_probability = 0.0
    angle_jitter_sigma = 0.0

    [channel.profile]
    kind = LinearRamp
    theta0 = 0.0
    rate = 0.01

Every key flattens to ``section.key`` (e.g. ``channel.profile.rate``) and can
be overridden from the command line. See :data:`FIELDS` for the full list.
"""
from __future__ import annotations

import configparser
import enum
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping, Optional, Union

from .channel import (
    DEFAULT_PROFILE,
    ChannelConfig,
    Constant,
    LinearRamp,
    Sinusoid,
    Table,
    ThetaProfile,
)
from .protocol import B92Scheme, Bb84Basis, Protocol
from .tracking import EstimationError, Placement, TrackingMode, VerdetMedium

MAX_SEED = 2**64 - 1


class ConfigError(ValueError):
    """Invalid or inconsistent session configuration."""


class ReceiverTable(enum.Enum):
    TRACKED_REMAP = "paper_remap"
    TRANSMITTER_TABLE = "transmitter_table"

    def __str__(self) -> str:
        return self.value


# key -> help text; order is the documented order
FIELDS = {
    "session.protocol": "BB84 or B92",
    "session.bases": "two distinct BB84 bases, e.g. 'Rectilinear, Diagonal'",
    "session.scheme": "B92 state pair: 'H,D45', 'H,L' or 'D45,L'",
    "session.tracking": "Faraday, HalfWavePlate or None",
    "session.pulses": "number of transmitted pulses",
    "session.seed": "master seed (0 .. 2**64-1)",
    "session.receiver_table": "paper_remap or transmitter_table (default depends on tracking)",
    "session.placement": "receiver or transmitter (where the compensator sits)",
    "session.b92_projector_bias": "probability that Bob picks the bit-1 projector",
    "medium.verdet": "Verdet constant, rad/(T*m) (Faraday only)",
    "medium.length": "medium length, m (Faraday only)",
    "tracking.estimation_sigma": "std-dev of the channel-angle estimate error, rad",
    "tracking.estimation_bias": "constant channel-angle estimate error, rad",
    "channel.pulse_rate": "pulses per second",
    "channel.loss_probability": "per-pulse photon loss probability",
    "channel.angle_jitter_sigma": "std-dev of the additive rotation jitter, rad",
    "channel.profile.kind": "Constant, LinearRamp, Sinusoid or Table",
    "channel.profile.theta0": "offset angle, rad (Constant, LinearRamp)",
    "channel.profile.rate": "ramp rate, rad/s (LinearRamp)",
    "channel.profile.amplitude": "rad (Sinusoid)",
    "channel.profile.period": "s (Sinusoid)",
    "channel.profile.phase": "rad (Sinusoid)",
    "channel.profile.table": "CSV path with t_seconds, theta_radians (Table)",
}


@dataclass(frozen=True)
class SessionConfig:
    protocol: Protocol = Protocol.BB84
    bases: tuple = (Bb84Basis.RECTILINEAR, Bb84Basis.DIAGONAL)
    scheme: Optional[B92Scheme] = None
    tracking: TrackingMode = TrackingMode.HALF_WAVE_PLATE
    medium: Optional[VerdetMedium] = None
    channel: ChannelConfig = field(default_factory=ChannelConfig)
    pulses: int = 10_000
    seed: int = 0
    receiver_table: Optional[ReceiverTable] = None
    placement: Placement = Placement.RECEIVER
    estimation_error: EstimationError = field(default_factory=EstimationError)
    b92_projector_bias: float = 0.5

    def __post_init__(self):
        if self.protocol is Protocol.B92 and self.scheme is None:
            raise ConfigError("B92 sessions need a scheme")
        if self.protocol is Protocol.BB84:
            if len(self.bases) != 2 or self.bases[0] == self.bases[1]:
                raise ConfigError("BB84 needs two distinct bases")
        if (self.medium is not None) != (self.tracking is TrackingMode.FARADAY):
            raise ConfigError("a Verdet medium must be given exactly when tracking is Faraday")
        if isinstance(self.pulses, bool) or not isinstance(self.pulses, int) or self.pulses <= 0:
            raise ConfigError(f"pulses must be a positive integer, got {self.pulses!r}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) \
                or not 0 <= self.seed <= MAX_SEED:
            raise ConfigError(f"seed must be an integer in [0, 2**64), got {self.seed!r}")
        if self.tracking is TrackingMode.NONE and self.receiver_table is ReceiverTable.TRACKED_REMAP:
            raise ConfigError("paper_remap needs tracking; untracked runs use transmitter_table")
        if not (0.0 <= self.b92_projector_bias <= 1.0):
            raise ConfigError("b92_projector_bias must lie in [0, 1]")

    @property
    def effective_receiver_table(self) -> ReceiverTable:
        if self.receiver_table is not None:
            return self.receiver_table
        if self.tracking is TrackingMode.NONE:
            return ReceiverTable.TRANSMITTER_TABLE
        return ReceiverTable.TRACKED_REMAP

    def replace(self, **changes) -> "SessionConfig":
        return replace(self, **changes)


def read_config_file(path: Union[str, Path]) -> dict[str, str]:
    """Flatten an INI file to ``{"section.key": "value"}``."""
    path = Path(path)
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    flat = {}
    for section in parser.sections():
        for key, value in parser.items(section):
            flat[f"{section}.{key}"] = value
    unknown = sorted(set(flat) - set(FIELDS))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    table = flat.get("channel.profile.table")
    if table and not Path(table).is_absolute():
        flat["channel.profile.table"] = str(path.parent / table)
    return flat


def _float(flat, key, default=None):
    if key not in flat or flat[key] == "":
        if default is None:
            raise ConfigError(f"missing required key {key}")
        return default
    try:
        value = float(flat[key])
    except ValueError:
        raise ConfigError(f"{key}: not a number: {flat[key]!r}") from None
    if not math.isfinite(value):
        raise ConfigError(f"{key}: must be finite")
    return value


def _int(flat, key, default):
    if key not in flat or flat[key] == "":
        return default
    try:
        return int(flat[key], 0)
    except ValueError:
        raise ConfigError(f"{key}: not an integer: {flat[key]!r}") from None


def _profile(flat) -> ThetaProfile:
    kind = flat.get("channel.profile.kind", "").strip().lower()
    if not kind:
        return DEFAULT_PROFILE
    p = "channel.profile."
    if kind == "constant":
        return Constant(_float(flat, p + "theta0", 0.0))
    if kind == "linearramp":
        return LinearRamp(_float(flat, p + "theta0", 0.0), _float(flat, p + "rate"))
    if kind == "sinusoid":
        return Sinusoid(_float(flat, p + "amplitude"), _float(flat, p + "period"),
                        _float(flat, p + "phase", 0.0))
    if kind == "table":
        if not flat.get(p + "table"):
            raise ConfigError("Table profile needs channel.profile.table")
        return Table.from_csv(flat[p + "table"])
    raise ConfigError(f"unknown theta profile kind {flat['channel.profile.kind']!r}")


def build_config(flat: Mapping[str, str]) -> SessionConfig:
    """Build and validate a :class:`SessionConfig` from flat dotted keys."""
    unknown = sorted(set(flat) - set(FIELDS))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    try:
        protocol = Protocol.parse(flat.get("session.protocol", "BB84"))
        tracking = TrackingMode.parse(flat.get("session.tracking", "HalfWavePlate"))
        bases = tuple(Bb84Basis.parse(b) for b in
                      flat.get("session.bases", "Rectilinear, Diagonal").split(",") if b.strip())
        scheme = None
        if protocol is Protocol.B92:
            scheme = B92Scheme.parse(flat.get("session.scheme", "H,D45"))
        medium = None
        if tracking is TrackingMode.FARADAY:
            medium = VerdetMedium(_float(flat, "medium.verdet", -40.0),
                                  _float(flat, "medium.length", 0.02))
        elif "medium.verdet" in flat or "medium.length" in flat:
            raise ConfigError("medium.* keys are only valid with Faraday tracking")
        channel = ChannelConfig(
            profile=_profile(flat),
            pulse_rate=_float(flat, "channel.pulse_rate", 1.0e6),
            loss_probability=_float(flat, "channel.loss_probability", 0.0),
            angle_jitter_sigma=_float(flat, "channel.angle_jitter_sigma", 0.0),
        )
        table = flat.get("session.receiver_table", "").strip()
        return SessionConfig(
            protocol=protocol,
            bases=bases,
            scheme=scheme,
            tracking=tracking,
            medium=medium,
            channel=channel,
            pulses=_int(flat, "session.pulses", 10_000),
            seed=_int(flat, "session.seed", 0),
            receiver_table=ReceiverTable(table) if table else None,
            placement=Placement(flat.get("session.placement", "receiver").strip().lower()),
            estimation_error=EstimationError(_float(flat, "tracking.estimation_sigma", 0.0),
                                             _float(flat, "tracking.estimation_bias", 0.0)),
            b92_projector_bias=_float(flat, "session.b92_projector_bias", 0.5),
        )
    except ConfigError:
        raise
    except (ValueError, OSError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: Union[str, Path], overrides: Optional[Mapping[str, str]] = None
                ) -> SessionConfig:
    flat = read_config_file(path)
    flat.update(overrides or {})
    return build_config(flat)


def _profile_echo(profile: ThetaProfile) -> dict:
    if isinstance(profile, Table):
        return {"kind": "Table", "points": [list(p) for p in zip(profile.times, profile.angles)]}
    out = {"kind": type(profile).__name__}
    out.update(vars(profile))
    return out


def config_echo(cfg: SessionConfig) -> dict:
    """JSON-ready description of a resolved configuration."""
    return {
        "protocol": str(cfg.protocol),
        "bases": [str(b) for b in cfg.bases] if cfg.protocol is Protocol.BB84 else None,
        "scheme": str(cfg.scheme) if cfg.scheme else None,
        "tracking": str(cfg.tracking),
        "placement": cfg.placement.value,
        "receiver_table": str(cfg.effective_receiver_table),
        "medium": vars(cfg.medium) if cfg.medium else None,
        "estimation_error": vars(cfg.estimation_error),
        "b92_projector_bias": cfg.b92_projector_bias,
        "pulses": cfg.pulses,
        "seed": cfg.seed,
        "channel": {
            "pulse_rate": cfg.channel.pulse_rate,
            "loss_probability": cfg.channel.loss_probability,
            "angle_jitter_sigma": cfg.channel.angle_jitter_sigma,
            "profile": _profile_echo(cfg.channel.profile),
        },
    }
