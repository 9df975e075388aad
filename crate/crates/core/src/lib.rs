//! Linear optimization subject to fuzzy relation equations with max-Dombi
//! composition.
//!
//! The pipeline: build the maximum solution, test feasibility, shrink the
//! matrix with the three zeroing rules, then solve the positive-cost part with
//! a best-first branch-and-bound over row assignments and recombine with the
//! maximum solution for the non-positive costs.

pub mod bnb;
pub mod candidates;
pub mod cli;
pub mod error;
pub mod feasibility;
pub mod io;
pub mod model;
pub mod reduction;
pub mod tnorm;

pub use bnb::{
    branch_and_bound, combine_optimum, node_lower_bound, solve, split_costs, BranchOrder, CostSplit, SolveConfig,
    SolveReport,
};
pub use candidates::{
    assemble_min_candidate, brute_force_optimum, candidate_vector, enumerate_candidates, sample_solution_set,
    Assignment, CandidateRecord,
};
pub use error::{FreError, Result, Violation};
pub use feasibility::{check_feasibility, check_membership, max_solution, row_max_vector, FeasibilityReport};
pub use io::{generate_instance, parse_instance, serialize_instance, GeneratorConfig, InstanceDocument};
pub use model::{compute_index_sets, validate_instance, FreInstance, IndexKind, IndexSets, Role, SolutionVector};
pub use reduction::{
    reduced_index_sets, search_space_size, simplify_matrix, simplify_matrix_with_tol, ReducedSystem, Rule,
};
pub use tnorm::{dombi_generator, dombi_row_composition, dombi_tnorm, residual_v, Lambda, UnitValue};
