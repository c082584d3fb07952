"""Joint beamforming and satellite selection for LEO networks that serve
communication and navigation with the same downlink signal."""

from .geometry import (
    EARTH_RADIUS_M,
    RadioParams,
    SatelliteState,
    Scenario,
    ScenarioGenerationError,
    ScenarioSpec,
    default_radio,
    distance,
    generate_scenario,
    scenario_table,
    upa_angles,
)
from .channel import ChannelVector, build_channel_map, channel_vector, path_loss, upa_response
from .metrics import LinkAssignment, gdop, geometry_matrix, per_ue_rates, rate, sinr, sum_rate
from .convex_kernel import (
    SurrogateProblem,
    SurrogateSolution,
    psd_project,
    solve_surrogate,
    surrogate_gradient,
    surrogate_objective,
)
from .beamforming import (
    DcSettings,
    DcTrace,
    ZeroForcingRankError,
    ZeroForcingSizeError,
    dc_beamforming,
    dc_beamforming_all,
    dc_split_rate,
    mrt_beamforming,
    rank1_extract,
    taylor_g_bar,
    zf_beamforming,
)
from .selection import (
    CoalitionStructure,
    InfeasibleSelectionError,
    build_preference_list,
    cfg_selection,
    gdop_greedy_selection,
    gdop_selection,
)
from .harness import (
    DEFAULT_SCHEMES,
    ExperimentConfig,
    ExperimentReport,
    SchemeId,
    emit_reports,
    run_experiment,
)

__version__ = "0.1.0"
