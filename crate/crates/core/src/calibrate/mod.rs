//! Multi-objective indirect inference of the agent model.

mod coverage;
mod kernel;
mod nsga2;
mod operators;
mod pareto;
mod problem;
mod report;
mod single;

pub use coverage::{coverage_analysis, quantile_sorted, CoverageRow, CoverageSettings, CoverageTable, MIN_REPLICATIONS};
pub use kernel::{mutate_covariance, CovarianceKernel, GenerationHistory, HistoryWeighting, KernelSettings, LocalScale};
pub use nsga2::{generation_seed, run_nsga2, Evaluation, GenerationTrace, Individual, Nsga2Config, Nsga2Result, Problem, PENALTY};
pub use operators::{polynomial_delta, polynomial_mutation, sbx_alpha, sbx_blend, sbx_crossover, Bounds, ParamBound};
pub use pareto::{crowding_distance, dominates, hypervolume_2d, non_dominated_sort};
pub use problem::{
    coefficient_distance, objective_vector, simulate_series, simulated_coefficients, CalibrationSetup, GeneLayout,
    LobProblem, MIXTURE_SHAPES,
};
pub use report::{calibrate, front_header, write_front_csv, CalibrationReport};
pub use single::{indirect_inference_single, AuxiliaryModel, Metric, SingleConfig, SingleResult};
