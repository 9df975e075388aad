//! Matrix simplification that removes entries no solution can use.
//!
//! Three zeroing rules, each evaluated once against the original matrix:
//!
//! * **I** - `a_ij < b_i`: column `j` can never reach `b_i` in row `i`.
//! * **II** - another nonzero row `i'` covers `j` with a strictly smaller
//!   residual, so `x_j` is capped below what row `i` would need. The entry is
//!   kept when that cap still brings row `i` within the feasibility tolerance.
//! * **III** - a zero row `i'` with `a_i'j > 0` forces `x_j = 0`.
//!
//! The reduced matrix has exactly the same solution set as the original.

use std::fmt;

use num_bigint::BigUint;
use serde::Serialize;

use crate::feasibility::DEFAULT_FEAS_TOL;
use crate::model::{compute_index_sets, FreInstance, IndexKind, IndexSets};
use crate::tnorm::{residual_raw, tnorm_raw};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Rule {
    I,
    II,
    III,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::I => "I",
            Rule::II => "II",
            Rule::III => "III",
        })
    }
}

/// One zeroed entry (0-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Zeroing {
    pub row: usize,
    pub col: usize,
    pub rule: Rule,
}

#[derive(Debug, Clone)]
pub struct ReducedSystem {
    pub a_bar: Vec<Vec<f64>>,
    pub zero_log: Vec<Zeroing>,
    pub j: IndexSets,
    pub j_bar: IndexSets,
    pub size_e: BigUint,
    pub size_e_bar: BigUint,
}

impl ReducedSystem {
    pub fn rule_of(&self, row: usize, col: usize) -> Option<Rule> {
        self.zero_log.iter().find(|z| z.row == row && z.col == col).map(|z| z.rule)
    }
}

/// [`simplify_matrix_with_tol`] at the default feasibility tolerance.
pub fn simplify_matrix(inst: &FreInstance) -> ReducedSystem {
    simplify_matrix_with_tol(inst, DEFAULT_FEAS_TOL)
}

/// Applies rules I-III in a single pass and logs each zeroing in `(i, j)` order.
///
/// Rule II fires only when the shortfall `b_i - φ(a_ij, V_i'j)` exceeds `tol`,
/// so the reduced system has the same solutions under `tol`-membership.
pub fn simplify_matrix_with_tol(inst: &FreInstance, tol: f64) -> ReducedSystem {
    let (m, n) = (inst.m(), inst.n());
    let lambda = inst.lambda().get();
    let b = inst.b();
    let j = compute_index_sets(inst);

    // residuals V(b_i, a_ij) for every j in J_i with b_i != 0
    let resid: Vec<Vec<Option<f64>>> = (0..m)
        .map(|i| {
            (0..n)
                .map(|col| {
                    (b[i] != 0.0 && j.contains(i, col))
                        .then(|| residual_raw(b[i], inst.row(i)[col], lambda).unwrap_or(1.0))
                })
                .collect()
        })
        .collect();
    // columns touched by a zero row
    let blocked: Vec<bool> = (0..n).map(|col| (0..m).any(|i| b[i] == 0.0 && inst.row(i)[col] > 0.0)).collect();

    let mut a_bar = inst.a().to_vec();
    let mut zero_log = Vec::new();
    for i in 0..m {
        for col in 0..n {
            let rule = if !j.contains(i, col) {
                Some(Rule::I)
            } else if b[i] == 0.0 {
                None
            } else if dominated(inst, &resid, i, col, tol) {
                Some(Rule::II)
            } else if blocked[col] {
                Some(Rule::III)
            } else {
                None
            };
            if let Some(rule) = rule {
                a_bar[i][col] = 0.0;
                zero_log.push(Zeroing { row: i, col, rule });
            }
        }
    }

    let j_bar = IndexSets::from_matrix(&a_bar, b, IndexKind::Reduced);
    let size_e = search_space_size(&j);
    let size_e_bar = search_space_size(&j_bar);
    ReducedSystem { a_bar, zero_log, j, j_bar, size_e, size_e_bar }
}

fn dominated(inst: &FreInstance, resid: &[Vec<Option<f64>>], i: usize, col: usize, tol: f64) -> bool {
    let Some(own) = resid[i][col] else { return false };
    let lambda = inst.lambda().get();
    let aij = inst.row(i)[col];
    let bi = inst.b()[i];
    resid
        .iter()
        .enumerate()
        .any(|(other, r)| other != i && matches!(r[col], Some(v) if v < own && bi - tnorm_raw(aij, v, lambda) > tol))
}

/// `J̄_i = { j : ā_ij >= b_i }`.
pub fn reduced_index_sets(rs: &ReducedSystem, inst: &FreInstance) -> IndexSets {
    IndexSets::from_matrix(&rs.a_bar, inst.b(), IndexKind::Reduced)
}

/// `∏ |sets_i|` over rows with `b_i != 0`.
pub fn search_space_size(sets: &IndexSets) -> BigUint {
    sets.counted_rows().map(|i| BigUint::from(sets.row(i).len())).product()
}
