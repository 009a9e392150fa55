"""Phase synchronization of a driven two-level system in a squeezed thermal reservoir."""

__version__ = "0.1.0"

from .dynamics import (  # noqa: E402
    AffineGenerator,
    Trajectory,
    build_generator,
    integrate,
    lindblad_rhs_density,
    steady_state,
    steady_state_analytic,
    steady_state_numeric,
)
from .errors import *  # noqa: E402,F401,F403
from .limit_cycle import (  # noqa: E402
    AngularState,
    EnsembleRun,
    angular_rhs,
    limit_cycle_radius,
    project_xy,
    sample_initial_states,
    simulate_ensemble,
    steady_theta,
)
from .metrics import (  # noqa: E402
    PhaseGrid,
    SyncCurve,
    epsilon_opt,
    husimi_q,
    husimi_q_operator,
    q_grid,
    s_max,
    sync_curve,
    sync_measure,
    sync_measure_integral,
)
from .params import (  # noqa: E402
    BlochVector,
    DensityMatrix,
    DerivedReservoir,
    SystemParams,
    bloch_to_density,
    density_to_bloch,
    derive_reservoir,
    squeeze_db,
    validate_params,
)
from .sweep import SweepGrid, arnold_tongue, sweep_s_vs_delta, sweep_s_vs_eps  # noqa: E402
