"""salvo3d: multi-interceptor 3D salvo engagement simulation.

A numpy-based library for simulating simultaneous target interception by a
swarm of constant-speed interceptors that agree on a common time-to-go within
a configurable settling time, exchanging estimates over an arbitrarily
switching communication topology, and splitting the resulting scalar command
into pitch/yaw lateral accelerations by closed-form weighted-norm
minimization.
"""

from .allocation import (
    AllocationProblem,
    AllocationResult,
    allocate,
    allocate_l1,
    allocate_linf,
    allocate_p,
    oracle_allocate,
    saturate,
)
from .engine import (
    PostConsensusReport,
    SimRecord,
    Simulation,
    SwarmState,
    UncertaintyModel,
    detect_capture,
    post_consensus_checks,
    run,
    step,
)
from .errors import (
    CertificationError,
    DegenerateGeometryError,
    DomainError,
    ParameterError,
    ValidationError,
)
from .guidance import (
    CertificationReport,
    GuidanceParams,
    certify,
    consensus_term,
    effective_command,
    gamma_positive,
    min_gain,
    min_mu,
    settling_constant,
    smooth_sign,
)
from .kinematics import (
    InterceptorState,
    LateralAccel,
    TgoEstimate,
    effective_lead_angle,
    lead_angle_rate,
    state_derivatives,
    tgo_rate_coefficients,
    time_to_go,
    wrap_angle,
)
from .scenario import (
    InterceptorSpec,
    Scenario,
    load_scenario,
    save_scenario,
    scenario_from_dict,
    serialize,
)
from .topology import (
    Graph,
    SwitchedNetwork,
    TopologyBounds,
    active_graph,
    algebraic_connectivity,
    graph_from_edges,
    incidence,
    jacobi_eigenvalues,
    laplacian,
    random_schedule,
    topology_bounds,
)

__version__ = "0.1.0"
