"""Pool-based active learning with lower confidence bounds on importance-weighted risk."""

from .bounds import (
    BoundConfig,
    QueryLog,
    QueryRecord,
    enumerate_round_variance,
    importance_weighted_risk,
    lcb,
    lcb_prime_gradient,
    lcb_prime_objective,
    variance_bound,
    variance_statistic,
)
from .classifiers import LCBALClassifier, PassiveClassifier, UPALClassifier
from .data import Dataset, UnitBoxScaler, load_csv, make_synthetic, save_csv, scale_to_unit_box, split
from .learners import (
    InteractiveOracle,
    LearnerConfig,
    RunResult,
    SimulatedOracle,
    run_lcb_al,
    run_passive,
    run_upal,
)
from .losses import MarginLoss
from .metrics import auc, evaluate_error
from .optimize import SolveReport, finite_difference_gradient, minimize_barrier_objective
from .sampling import draw_index, query_distribution, upal_distribution

__version__ = "0.1.0"
