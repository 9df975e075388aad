//! Maximum solution and feasibility tests.

use serde::Serialize;

use crate::error::{FreError, Result};
use crate::model::{FreInstance, Role, SolutionVector};
use crate::tnorm::{residual_raw, row_composition_raw};

/// Default absolute tolerance on `|max_j φ(a_ij, x_j) - b_i|`.
pub const DEFAULT_FEAS_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Serialize)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub x_max: SolutionVector,
    pub row_residuals: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MembershipReport {
    pub feasible: bool,
    /// `max_j φ(a_ij, x_j)` per row.
    pub row_values: Vec<f64>,
    pub row_residuals: Vec<f64>,
}

impl MembershipReport {
    pub fn max_residual(&self) -> f64 {
        self.row_residuals.iter().copied().fold(0.0, f64::max)
    }
}

/// Entry `j` of the per-row upper bound `x̄_i`.
#[inline]
pub(crate) fn row_max_entry(aij: f64, bi: f64, lambda: f64) -> f64 {
    if bi == 0.0 {
        if aij > 0.0 {
            0.0
        } else {
            1.0
        }
    } else if aij >= bi {
        // a_ij >= b_i > 0 keeps residual_raw inside its domain
        residual_raw(bi, aij, lambda).unwrap_or(1.0)
    } else {
        1.0
    }
}

/// The per-row vector `x̄_i`: the largest `x` that keeps row `i` at or below `b_i`.
pub fn row_max_vector(inst: &FreInstance, i: usize) -> Result<SolutionVector> {
    if i >= inst.m() {
        return Err(FreError::Domain(format!("row {} out of range 1..={}", i + 1, inst.m())));
    }
    let lambda = inst.lambda().get();
    let bi = inst.b()[i];
    let x = inst.row(i).iter().map(|&a| row_max_entry(a, bi, lambda)).collect();
    Ok(SolutionVector::new_unchecked(x, Role::Probe))
}

/// `X̄ = min_i x̄_i`, componentwise, reduced in row order.
pub fn max_solution(inst: &FreInstance) -> SolutionVector {
    let lambda = inst.lambda().get();
    let mut x = vec![1.0_f64; inst.n()];
    for (row, &bi) in inst.a().iter().zip(inst.b()) {
        for (xj, &aij) in x.iter_mut().zip(row) {
            *xj = xj.min(row_max_entry(aij, bi, lambda));
        }
    }
    SolutionVector::new_unchecked(x, Role::Maximum)
}

pub(crate) fn row_values(inst: &FreInstance, x: &[f64]) -> Vec<f64> {
    let lambda = inst.lambda().get();
    inst.a().iter().map(|row| row_composition_raw(row, x, lambda)).collect()
}

/// Evaluates every constraint at `x`.
pub fn check_membership(inst: &FreInstance, x: &[f64], tol: f64) -> Result<MembershipReport> {
    if x.len() != inst.n() {
        return Err(FreError::Dimension { expected: inst.n(), found: x.len() });
    }
    let row_values = row_values(inst, x);
    let row_residuals: Vec<f64> = row_values.iter().zip(inst.b()).map(|(v, b)| (v - b).abs()).collect();
    let feasible = row_residuals.iter().all(|&r| r <= tol);
    Ok(MembershipReport { feasible, row_values, row_residuals })
}

/// Allocation-free membership test for hot loops.
pub(crate) fn is_member(inst: &FreInstance, x: &[f64], tol: f64) -> bool {
    let lambda = inst.lambda().get();
    inst.a().iter().zip(inst.b()).all(|(row, &bi)| (row_composition_raw(row, x, lambda) - bi).abs() <= tol)
}

/// Builds `X̄` and tests it: the system is solvable iff `X̄` solves it.
pub fn check_feasibility(inst: &FreInstance, tol: f64) -> FeasibilityReport {
    let x_max = max_solution(inst);
    let row_residuals: Vec<f64> = row_values(inst, &x_max.x).iter().zip(inst.b()).map(|(v, b)| (v - b).abs()).collect();
    let feasible = row_residuals.iter().all(|&r| r <= tol);
    FeasibilityReport { feasible, x_max, row_residuals }
}
