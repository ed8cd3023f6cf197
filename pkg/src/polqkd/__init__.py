"""Polarization tracking for satellite QKD: Jones-calculus kernel, Faraday and
half-wave-plate compensators, BB84/B92 coding under tracking, and a seeded
session simulator."""

from .jones import (
    JonesMatrix,
    JonesVector,
    PhaseTolerance,
    StateLabel,
    apply,
    canonical_state,
    classify_state,
    compose,
    equal_up_to_phase,
    faraday_operator,
    hwp_operator,
    linear_state,
    measure_in_basis,
    measure_projector,
    project,
    rotation_operator,
)
from .tracking import (
    CompensatorState,
    TrackingMode,
    VerdetMedium,
    angle_for_field,
    composed_tracking_map,
    faraday_compensator,
    field_for_angle,
    hwp_compensator,
)
from .protocol import (
    B92Scheme,
    Bb84Basis,
    CodingTable,
    Protocol,
    PulseRecord,
    b92_decode,
    b92_encode,
    b92_receiver_projectors,
    bb84_encode,
    bb84_receiver_table,
    qber,
    sift,
)
from .channel import ChannelConfig, Constant, LinearRamp, Sinusoid, Table, theta_at, transmit
from .config import ConfigError, ReceiverTable, SessionConfig, load_config
from .session import SessionResult, run_session

__version__ = "0.1.0"
