"""Few-view tomographic reconstruction workbench.

Reconstructs images from heavily undersampled parallel-beam projection
data with population-based optimisers (primarily dispersive flies with
search-space expansion and total-variation regularisation) and benchmarks
them against classical algebraic and analytic reconstructors under a
rank-sum significance protocol.
"""

from .baselines import BASELINES, BaselineConfig, reconstruct, run_baseline
from .harness import (ExperimentConfig, ResultStore, build_problem,
                      build_suite, emit_tables, render_image, run_experiment,
                      stable_seed, sweep_boxes, sweep_mu)
from .imaging import (PHANTOM_KINDS, PhantomSpec, generate_binary_phantom,
                      generate_phantom, generate_shepp_logan, quantise)
from .objective import (Problem, reconstruction_error, regularised_error,
                        reproduction_error, scale_to_range, total_variation)
from .optimizers import (ALGORITHMS, BoxSchedule, OptimizerConfig, RunRecord,
                         SwarmState, active_box, de_step, dfo_step, pso_step,
                         run_optimizer, tune_dfo)
from .projector import (ParallelGeometry, back_project, build_system_matrix,
                        dump_matrix, forward_project)
from .stats import WinMatrix, median, ranksum_test, win_matrix

__version__ = "0.1.0"

__all__ = [
    "ALGORITHMS", "BASELINES", "BaselineConfig", "BoxSchedule",
    "ExperimentConfig", "OptimizerConfig", "PHANTOM_KINDS",
    "ParallelGeometry", "PhantomSpec", "Problem", "ResultStore", "RunRecord",
    "SwarmState", "WinMatrix", "active_box", "back_project", "build_problem",
    "build_suite", "build_system_matrix", "de_step", "dfo_step",
    "dump_matrix", "emit_tables", "forward_project",
    "generate_binary_phantom", "generate_phantom", "generate_shepp_logan",
    "median", "pso_step", "quantise", "ranksum_test", "reconstruct",
    "reconstruction_error", "regularised_error", "render_image",
    "reproduction_error", "run_baseline", "run_experiment", "run_optimizer",
    "scale_to_range", "stable_seed", "sweep_boxes", "sweep_mu",
    "total_variation", "tune_dfo", "win_matrix",
]
