"""Regression depth, the deepest-fit regression median and its finite-sample
breakdown point."""
from .breakdown import (AttackConstructionFailed, AttackPlan, BreakdownBounds,
                        attack_addition, attack_nullspace_pair, attack_replacement,
                        bounds_from_k, bounds_report, empirical_breakdown_search)
from .core import (BudgetExceeded, Dataset, DegenerateSubset, DimensionError, Fit,
                   fit_through_points, four_point_dataset, is_general_position,
                   read_csv, residuals, write_csv)
from .depth import (DepthWitness, rdepth_approx, rdepth_counts, rdepth_exact,
                    rdepth_oracle, rdepth_sweep_p2, witness_count)
from .median import DeepestFitResult, deepest_fit, k_star_approx, k_star_exact
from .sim import (SimulationSpec, SimulationSummary, boxplot_summary, gen_contaminated,
                  gen_std_normal, run_table_experiment)

__version__ = "0.1.0"

__all__ = [
    "AttackConstructionFailed", "AttackPlan", "BreakdownBounds", "BudgetExceeded",
    "Dataset", "DeepestFitResult", "DegenerateSubset", "DepthWitness", "DimensionError",
    "Fit", "SimulationSpec", "SimulationSummary", "attack_addition",
    "attack_nullspace_pair", "attack_replacement", "bounds_from_k", "bounds_report",
    "boxplot_summary", "deepest_fit", "empirical_breakdown_search", "fit_through_points",
    "four_point_dataset", "gen_contaminated", "gen_std_normal", "is_general_position",
    "k_star_approx", "k_star_exact", "rdepth_approx", "rdepth_counts", "rdepth_exact",
    "rdepth_oracle", "rdepth_sweep_p2", "read_csv", "residuals", "run_table_experiment",
    "witness_count", "write_csv",
]
