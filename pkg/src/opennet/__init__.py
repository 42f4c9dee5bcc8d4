"""Open-network signal amplification analysis.

Directed weighted networks are treated as linear time-invariant systems
``x' = A x + B u, y = C x`` whose input and output matrices select nodes.
The package computes transfer functions, controllability Gramians, the
H2-norm, DAG path gains and a Monte-Carlo test that labels an input-node
choice as passing, blocking or typical.
"""

from opennet.errors import (
    ConditioningError,
    ControllabilityError,
    CyclicityError,
    DegenerateDistributionError,
    LeakError,
    NumericError,
    OpenNetError,
    PathExplosionError,
    ResolventError,
    StabilityError,
    UndefinedIndexError,
    ValidationError,
)
from opennet.network import (
    UNREACHABLE,
    NetworkSpec,
    ShiftPolicy,
    StableSystem,
    StructuralReport,
    build_adjacency,
    build_system,
    detect_dag,
    henrici_index,
    shortest_path_matrix,
    shortest_unweighted_path,
    stabilize,
    structural_report,
)
from opennet.gramian import (
    Gramian,
    H2Report,
    controllability_gramian,
    gramian_spectrum,
    h2_norm,
    min_steering_energy,
    observability_gramian,
    solve_lyapunov,
    trace_linear_approximation,
)
from opennet.frequency import (
    AsymptoticPrediction,
    BodeSweep,
    asymptotic_prediction,
    bode_sweep,
    cofactor_dc_gain,
    dc_gain,
    frequency_h2_squared,
    transfer_function,
)
from opennet.dag import PathGainTerm, dag_dc_entry, dominant_paths, enumerate_paths
from opennet.selection import (
    ContributionVector,
    input_contributions,
    output_contributions,
    top_k,
)
from opennet.stats import (
    SampleStats,
    empirical_test,
    sample_trace_distribution,
    score_empirical_choice,
    trace_vs_henrici,
)
from opennet.simulation import Trajectory, impulse_energy, simulate, steady_state_extract

__version__ = "0.1.0"
