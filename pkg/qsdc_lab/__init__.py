# Set version ----
from importlib_metadata import PackageNotFoundError, version as _v

try:
    __version__ = _v("qsdc-lab")
except PackageNotFoundError:  # pragma: no cover
    __version__ = "0.0.0"

del _v, PackageNotFoundError

# Main imports ----

from . import attack
from ._quantum_core import (
    DensityMatrix,
    PureState,
    QubitBasis,
    Unitary,
    apply,
    measure,
    outcome_distribution,
    partial_measure,
    reduced_density,
    rotation_gate,
    tensor,
    trace_distance,
)
from ._config import PartyIdentities, ProtocolConfig
from ._ecc import RepetitionCode, logical_error_rate, max_channel_length, threshold_check
from ._noise import ChannelModel, DeviceModel, fit_gamma, predicted_success
from ._protocol import SequenceLayout, SessionOutcome, SessionPlan, draw_plan, run_session
from ._analysis import (
    ComparisonRow,
    EstimateWithCI,
    Scenario,
    closed_form,
    comparison_suite,
    estimate,
    run_trials,
    sweep_angle,
    sweep_channel_length,
)
from ._report import emit_report, read_report
from ._serialize import dumps, load_config, to_jsonable
from ._transcript import Transcript

__all__ = (
    "attack",
    "DensityMatrix",
    "PureState",
    "QubitBasis",
    "Unitary",
    "apply",
    "measure",
    "outcome_distribution",
    "partial_measure",
    "reduced_density",
    "rotation_gate",
    "tensor",
    "trace_distance",
    "PartyIdentities",
    "ProtocolConfig",
    "RepetitionCode",
    "logical_error_rate",
    "max_channel_length",
    "threshold_check",
    "ChannelModel",
    "DeviceModel",
    "fit_gamma",
    "predicted_success",
    "SequenceLayout",
    "SessionOutcome",
    "SessionPlan",
    "draw_plan",
    "run_session",
    "ComparisonRow",
    "EstimateWithCI",
    "Scenario",
    "closed_form",
    "comparison_suite",
    "estimate",
    "run_trials",
    "sweep_angle",
    "sweep_channel_length",
    "emit_report",
    "read_report",
    "dumps",
    "load_config",
    "to_jsonable",
    "Transcript",
)
