"""thermident: bilinear RC thermal models of multi-zone buildings.

Construct RC state-space models from a declarative building description,
identify their physical parameters and internal-gains disturbances from
operational data, and evaluate multi-step temperature prediction accuracy
with fixed and online-updated internal-gains models.
"""

from .building import BuildingDescription, BuildingElement, Layer, VavBox, Zone
from .dataset import TimeSeriesDataset, time_of_week_index
from .errors import (
    ConfigError,
    EstimationError,
    NetworkError,
    SchemaError,
    SimulationError,
    ThermidentError,
)
from .evaluate import (
    EvaluationReport,
    compare_predictors,
    horizon_curve,
    report_from_predictions,
    rms_by_zone,
)
from .excitation import ExcitationSchedule, generate_excitation
from .identify import (
    IdentificationResult,
    OptimizerSettings,
    PredictionSet,
    estimate_fixed_ig,
    estimate_ig_snapshot,
    identify_parameters,
    predict_fixed_ig,
    predict_online_ig,
    simulate_no_ig,
    weekend_identification_slice,
)
from .igprofile import InternalGainsProfile
from .params import ParameterBounds, ParameterVector, default_bounds
from .rcmodel import (
    DiscreteModel,
    RCStateSpaceModel,
    assemble_continuous,
    build_discrete_model,
    build_rc_network,
    build_thermal_model,
    discretize,
    hull_flux,
    hvac_flux,
    ig_flux,
)
from .simulate import KalmanEstimate, KalmanNoise, Trajectory, kalman_filter, simulate, step
from .synth import (
    ControllerConfig,
    IGConfig,
    NoiseConfig,
    WeatherConfig,
    synthesize_dataset,
    synthesize_weekend_experiment,
    synthesize_weeks,
)
from .twin import twin_description, twin_true_parameters

__version__ = "0.1.0"
