//! Candidate minimal solutions and the exhaustive oracle.
//!
//! Every minimal solution is of the form `X(e)`: pick one column `e(i)` per
//! nonzero row, place the residual `V(b_i, a_i,e(i))` at that column and take
//! the componentwise maximum over rows. Enumerating all assignments gives a
//! brute-force optimizer used to cross-check the branch-and-bound.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};

use crate::error::{FreError, Result};
use crate::feasibility::{check_feasibility, is_member, max_solution};
use crate::model::{FreInstance, IndexKind, IndexSets, Role, SolutionVector};
use crate::reduction::{search_space_size, simplify_matrix_with_tol};
use crate::tnorm::{residual_raw, tnorm_raw};

pub const DEFAULT_ENUM_CAP: u64 = 1_000_000;

/// One column per row, 0-based; `None` marks a `b_i = 0` row, which places no
/// requirement on `x`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Assignment(pub Vec<Option<usize>>);

impl Assignment {
    /// From 1-based column numbers (`None` for unconstrained rows).
    pub fn from_one_based(cols: &[Option<usize>]) -> Self {
        Assignment(cols.iter().map(|c| c.map(|j| j - 1)).collect())
    }

    pub fn to_one_based(&self) -> Vec<Option<usize>> {
        self.0.iter().map(|c| c.map(|j| j + 1)).collect()
    }

    pub fn get(&self, i: usize) -> Option<usize> {
        self.0[i]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> =
            self.to_one_based().iter().map(|c| c.map_or_else(|| "*".to_string(), |j| j.to_string())).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

impl Serialize for Assignment {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_one_based().serialize(s)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CandidateRecord {
    pub e: Assignment,
    pub x: SolutionVector,
    pub z1: f64,
    pub feasible: bool,
}

/// `Σ_j max(c_j, 0) · x_j`.
pub fn positive_cost(c: &[f64], x: &[f64]) -> f64 {
    c.iter().zip(x).map(|(c, x)| c.max(0.0) * x).sum()
}

/// `x̌_i(j)`: the residual at column `j`, zero elsewhere.
pub fn candidate_vector(inst: &FreInstance, i: usize, j: usize) -> Result<SolutionVector> {
    if i >= inst.m() || j >= inst.n() {
        return Err(FreError::Domain(format!("({}, {}) out of range", i + 1, j + 1)));
    }
    let (aij, bi) = (inst.row(i)[j], inst.b()[i]);
    if aij < bi {
        return Err(FreError::Domain(format!("column {} is not in J{}", j + 1, i + 1)));
    }
    let mut x = vec![0.0; inst.n()];
    if bi != 0.0 {
        x[j] = residual_raw(bi, aij, inst.lambda().get())?;
    }
    Ok(SolutionVector::new_unchecked(x, Role::Candidate))
}

/// `X(e) = max_i x̌_i(e(i))`.
pub fn assemble_min_candidate(inst: &FreInstance, e: &Assignment) -> Result<SolutionVector> {
    if e.len() != inst.m() {
        return Err(FreError::Dimension { expected: inst.m(), found: e.len() });
    }
    let lambda = inst.lambda().get();
    let mut x = vec![0.0_f64; inst.n()];
    for (i, choice) in e.0.iter().enumerate() {
        let bi = inst.b()[i];
        match (bi == 0.0, choice) {
            (true, None) => {}
            (true, Some(_)) => {
                return Err(FreError::Assignment(format!("row {} has b = 0 and takes no column", i + 1)))
            }
            (false, None) => return Err(FreError::Assignment(format!("row {} needs a column", i + 1))),
            (false, Some(j)) => {
                let aij = *inst
                    .row(i)
                    .get(*j)
                    .ok_or_else(|| FreError::Assignment(format!("column {} out of range", j + 1)))?;
                if aij < bi {
                    return Err(FreError::Assignment(format!("column {} is not in J{}", j + 1, i + 1)));
                }
                x[*j] = x[*j].max(residual_raw(bi, aij, lambda)?);
            }
        }
    }
    Ok(SolutionVector::new_unchecked(x, Role::Candidate))
}

/// Residual values for every (row, column) pair of a set of index sets.
///
/// Over reduced sets each residual is capped at `X̄_j`; surviving entries
/// meet that cap exactly in real arithmetic.
#[derive(Debug, Clone)]
pub(crate) struct ResidualTable {
    /// Per row: `(column, V)`; empty for uncounted rows.
    pub rows: Vec<Vec<(usize, f64)>>,
    pub counted: Vec<bool>,
}

impl ResidualTable {
    pub fn new(inst: &FreInstance, sets: &IndexSets) -> Result<Self> {
        let lambda = inst.lambda().get();
        let cap = match sets.kind() {
            IndexKind::Reduced => Some(max_solution(inst).x),
            IndexKind::Original => None,
        };
        let mut rows = Vec::with_capacity(inst.m());
        for i in 0..inst.m() {
            let bi = inst.b()[i];
            let mut row = Vec::new();
            if sets.is_counted(i) {
                for &j in sets.row(i) {
                    let aij = inst.row(i)[j];
                    if aij < bi {
                        return Err(FreError::Domain(format!("column {} is not in J{}", j + 1, i + 1)));
                    }
                    let v = residual_raw(bi, aij, lambda)?;
                    row.push((j, cap.as_ref().map_or(v, |c| v.min(c[j]))));
                }
            }
            rows.push(row);
        }
        Ok(ResidualTable { rows, counted: (0..inst.m()).map(|i| sets.is_counted(i)).collect() })
    }
}

/// Lazy lexicographic enumeration of `{X(e)}` over a set of index sets.
pub struct Candidates<'a> {
    inst: &'a FreInstance,
    table: ResidualTable,
    /// Odometer position per row (index into `table.rows[i]`).
    pos: Vec<usize>,
    done: bool,
    tol: f64,
}

impl Iterator for Candidates<'_> {
    type Item = CandidateRecord;

    fn next(&mut self) -> Option<CandidateRecord> {
        if self.done {
            return None;
        }
        let n = self.inst.n();
        let mut x = vec![0.0_f64; n];
        let mut e = Vec::with_capacity(self.pos.len());
        for (i, &p) in self.pos.iter().enumerate() {
            if self.table.counted[i] {
                let (j, v) = self.table.rows[i][p];
                x[j] = x[j].max(v);
                e.push(Some(j));
            } else {
                e.push(None);
            }
        }
        // advance: last row varies fastest
        self.done = true;
        for i in (0..self.pos.len()).rev() {
            if !self.table.counted[i] {
                continue;
            }
            if self.pos[i] + 1 < self.table.rows[i].len() {
                self.pos[i] += 1;
                self.done = false;
                break;
            }
            self.pos[i] = 0;
        }
        let z1 = positive_cost(self.inst.c(), &x);
        let feasible = is_member(self.inst, &x, self.tol);
        Some(CandidateRecord { e: Assignment(e), x: SolutionVector::new_unchecked(x, Role::Candidate), z1, feasible })
    }
}

fn check_cap(sets: &IndexSets, cap: u64) -> Result<()> {
    let size = search_space_size(sets);
    if size > cap.into() {
        return Err(FreError::CapExceeded { size: size.to_string(), cap });
    }
    Ok(())
}

/// Streams one record per assignment over `sets`, in lexicographic order of `e`.
pub fn enumerate_candidates<'a>(inst: &'a FreInstance, sets: &IndexSets, cap: u64, tol: f64) -> Result<Candidates<'a>> {
    check_cap(sets, cap)?;
    let table = ResidualTable::new(inst, sets)?;
    let empty = table.counted.iter().zip(&table.rows).any(|(&c, r)| c && r.is_empty());
    Ok(Candidates { inst, pos: vec![0; inst.m()], table, done: empty, tol })
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleOutcome {
    pub e_star: Assignment,
    pub x_min_star: SolutionVector,
    pub z1_star: f64,
    pub x_opt: SolutionVector,
    pub z_opt: f64,
    pub candidates: u64,
}

/// Exhaustive optimum over the reduced assignments, no pruning.
pub fn brute_force_optimum(inst: &FreInstance, cap: u64, tol: f64) -> Result<OracleOutcome> {
    let feas = check_feasibility(inst, tol);
    if !feas.feasible {
        return Err(FreError::Infeasible);
    }
    let rs = simplify_matrix_with_tol(inst, tol);
    let mut best: Option<CandidateRecord> = None;
    let mut count = 0u64;
    for rec in enumerate_candidates(inst, &rs.j_bar, cap, tol)? {
        count += 1;
        // strict < keeps the lexicographically first minimizer
        if best.as_ref().is_none_or(|b| rec.z1 < b.z1) {
            best = Some(rec);
        }
    }
    let best = best.ok_or_else(|| FreError::TheoryViolation("feasible instance with an empty reduced row".into()))?;
    let x_opt: Vec<f64> =
        inst.c().iter().enumerate().map(|(j, &cj)| if cj > 0.0 { best.x.x[j] } else { feas.x_max.x[j] }).collect();
    let z_opt = inst.objective(&x_opt);
    Ok(OracleOutcome {
        e_star: best.e,
        x_min_star: best.x,
        z1_star: best.z1,
        x_opt: SolutionVector::new_unchecked(x_opt, Role::Optimum),
        z_opt,
        candidates: count,
    })
}

/// Outcome of probing the box-union structure of the solution set.
#[derive(Debug, Clone, Default)]
pub struct SampleReport {
    /// Points drawn inside random boxes `[X(e), X̄]`, with their membership.
    pub in_box: Vec<(SolutionVector, bool)>,
    /// Points drawn uniformly from the unit cube, with their membership.
    pub uniform: Vec<(SolutionVector, bool)>,
    /// Indices into `in_box` that failed membership.
    pub in_box_failures: Vec<usize>,
    /// Indices into `uniform` that are feasible but inside no box.
    pub outside_feasible: Vec<usize>,
    /// Assignments whose `X(e)` fails membership.
    pub corner_failures: Vec<Assignment>,
    /// Assignments whose `X(e)` exceeds `X̄` somewhere by more than `tol`.
    pub dominance_failures: Vec<Assignment>,
    pub boxes: usize,
}

impl SampleReport {
    pub fn is_clean(&self) -> bool {
        self.in_box_failures.is_empty()
            && self.outside_feasible.is_empty()
            && self.corner_failures.is_empty()
            && self.dominance_failures.is_empty()
    }
}

/// Samples `samples` points from random boxes `[X(e), X̄]` and `samples`
/// uniform points, and checks them against the box-union description.
pub fn sample_solution_set(inst: &FreInstance, samples: usize, seed: u64, cap: u64, tol: f64) -> Result<SampleReport> {
    let feas = check_feasibility(inst, tol);
    if !feas.feasible {
        return Err(FreError::Infeasible);
    }
    let x_max = feas.x_max.x;
    let rs = simplify_matrix_with_tol(inst, tol);
    let corners: Vec<CandidateRecord> = enumerate_candidates(inst, &rs.j_bar, cap, tol)?.collect();
    if corners.is_empty() {
        return Err(FreError::TheoryViolation("feasible instance with an empty reduced row".into()));
    }
    let mut report = SampleReport { boxes: corners.len(), ..Default::default() };
    for rec in &corners {
        if !rec.feasible {
            report.corner_failures.push(rec.e.clone());
        }
        if rec.x.x.iter().zip(&x_max).any(|(lo, hi)| lo > &(hi + tol)) {
            report.dominance_failures.push(rec.e.clone());
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = inst.n();
    for k in 0..samples {
        let lo = &corners[rng.random_range(0..corners.len())].x.x;
        let x: Vec<f64> = (0..n)
            .map(|j| {
                let (a, b) = (lo[j].min(x_max[j]), x_max[j]);
                if a < b {
                    rng.random_range(a..=b)
                } else {
                    b
                }
            })
            .collect();
        let ok = is_member(inst, &x, tol);
        if !ok {
            report.in_box_failures.push(k);
        }
        report.in_box.push((SolutionVector::new_unchecked(x, Role::Probe), ok));
    }
    for k in 0..samples {
        let x: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let ok = is_member(inst, &x, tol);
        if ok && !in_some_box(inst, &rs.j_bar, &x, tol) {
            report.outside_feasible.push(k);
        }
        report.uniform.push((SolutionVector::new_unchecked(x, Role::Probe), ok));
    }
    Ok(report)
}

/// Box-union membership measured in constraint units.
///
/// `x <= X̄` holds within `tol` when no term `φ(a_ij, x_j)` exceeds `b_i + tol`;
/// `x >= X(e)` holds within `tol` when every counted row reaches `b_i - tol`
/// through its chosen column. Rows choose independently, so some `e` exists
/// iff every counted row has such a column in `J̄_i`.
fn in_some_box(inst: &FreInstance, j_bar: &IndexSets, x: &[f64], tol: f64) -> bool {
    let lambda = inst.lambda().get();
    (0..inst.m()).all(|i| {
        let (row, bi) = (inst.row(i), inst.b()[i]);
        let below = row.iter().zip(x).all(|(&a, &v)| tnorm_raw(a, v, lambda) <= bi + tol);
        below && (!j_bar.is_counted(i) || j_bar.row(i).iter().any(|&j| tnorm_raw(row[j], x[j], lambda) >= bi - tol))
    })
}
