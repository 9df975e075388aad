//! Problem instances, index sets and solution vectors.
//!
//! Rows and columns are 0-based internally. Everything that reaches a user
//! (display impls, documents, CLI output) is 1-based.

use std::fmt;

use serde::Serialize;

use crate::error::{FreError, Result, Violation};
use crate::tnorm::{is_unit, Lambda};

/// Distance under which `a_ij < b_i` is reported as a likely rounding artifact.
pub const NEAR_TIE_WARNING: f64 = 1e-12;

/// A validated instance of `min c·x  s.t.  A ∘ x = b,  x ∈ [0,1]^n`
/// under max-Dombi composition.
#[derive(Debug, Clone, PartialEq)]
pub struct FreInstance {
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    c: Vec<f64>,
    lambda: Lambda,
}

impl FreInstance {
    /// Validates the raw data, collecting every violation found.
    pub fn new(a: Vec<Vec<f64>>, b: Vec<f64>, c: Vec<f64>, lambda: f64) -> Result<Self> {
        let mut violations = Vec::new();
        if !(lambda.is_finite() && lambda > 0.0) {
            violations.push(Violation::Lambda { value: lambda });
        }
        if a.is_empty() {
            violations.push(Violation::Empty { field: "A" });
        }
        let n = a.first().map_or(0, Vec::len);
        if !a.is_empty() && n == 0 {
            violations.push(Violation::Empty { field: "A row" });
        }
        for (i, row) in a.iter().enumerate() {
            if row.len() != n {
                violations.push(Violation::Dimension { field: "A row", expected: n, found: row.len() });
            }
            for (j, &v) in row.iter().enumerate() {
                if !is_unit(v) {
                    violations.push(Violation::MatrixEntry { row: i + 1, col: j + 1, value: v });
                }
            }
        }
        if b.len() != a.len() {
            violations.push(Violation::Dimension { field: "b", expected: a.len(), found: b.len() });
        }
        for (i, &v) in b.iter().enumerate() {
            if !is_unit(v) {
                violations.push(Violation::RhsEntry { row: i + 1, value: v });
            }
        }
        if c.len() != n {
            violations.push(Violation::Dimension { field: "c", expected: n, found: c.len() });
        }
        for (j, &v) in c.iter().enumerate() {
            if !v.is_finite() {
                violations.push(Violation::Cost { col: j + 1, value: v });
            }
        }
        if !violations.is_empty() {
            return Err(FreError::Validation(violations));
        }
        Ok(FreInstance { a, b, c, lambda: Lambda::new(lambda)? })
    }

    pub fn m(&self) -> usize {
        self.a.len()
    }

    pub fn n(&self) -> usize {
        self.c.len()
    }

    pub fn a(&self) -> &[Vec<f64>] {
        &self.a
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.a[i]
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn lambda(&self) -> Lambda {
        self.lambda
    }

    /// Same right-hand side, costs and lambda over a different matrix.
    pub fn with_matrix(&self, a: Vec<Vec<f64>>) -> Result<Self> {
        FreInstance::new(a, self.b.clone(), self.c.clone(), self.lambda.get())
    }

    /// Same constraints with a different objective.
    pub fn with_costs(&self, c: Vec<f64>) -> Result<Self> {
        FreInstance::new(self.a.clone(), self.b.clone(), c, self.lambda.get())
    }

    /// `c · x`.
    pub fn objective(&self, x: &[f64]) -> f64 {
        self.c.iter().zip(x).map(|(c, x)| c * x).sum()
    }
}

/// Free-function form of [`FreInstance::new`].
pub fn validate_instance(a: Vec<Vec<f64>>, b: Vec<f64>, c: Vec<f64>, lambda: f64) -> Result<FreInstance> {
    FreInstance::new(a, b, c, lambda)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum IndexKind {
    Original,
    Reduced,
}

/// Per-row column sets `J_i` (original) or `J̄_i` (reduced).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexSets {
    sets: Vec<Vec<usize>>,
    kind: IndexKind,
    /// `false` for rows with `b_i = 0`; those rows do not branch.
    counted: Vec<bool>,
}

impl IndexSets {
    /// `{ j : a_ij >= b_i }` for every row of `a`, exact comparison.
    pub(crate) fn from_matrix(a: &[Vec<f64>], b: &[f64], kind: IndexKind) -> Self {
        let sets = a
            .iter()
            .zip(b)
            .map(|(row, &bi)| row.iter().enumerate().filter(|(_, &v)| v >= bi).map(|(j, _)| j).collect())
            .collect();
        IndexSets { sets, kind, counted: b.iter().map(|&bi| bi != 0.0).collect() }
    }

    pub fn kind(&self) -> IndexKind {
        self.kind
    }

    pub fn rows(&self) -> usize {
        self.sets.len()
    }

    /// 0-based column indices of row `i`, strictly increasing.
    pub fn row(&self, i: usize) -> &[usize] {
        &self.sets[i]
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.sets[i].binary_search(&j).is_ok()
    }

    /// Whether row `i` takes part in assignments (`b_i != 0`).
    pub fn is_counted(&self, i: usize) -> bool {
        self.counted[i]
    }

    pub fn counted_rows(&self) -> impl Iterator<Item = usize> + '_ {
        self.counted.iter().enumerate().filter(|(_, &c)| c).map(|(i, _)| i)
    }

    /// The sets with 1-based column indices.
    pub fn to_one_based(&self) -> Vec<Vec<usize>> {
        self.sets.iter().map(|s| s.iter().map(|j| j + 1).collect()).collect()
    }
}

impl fmt::Display for IndexSets {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self.kind {
            IndexKind::Original => "J",
            IndexKind::Reduced => "J̄",
        };
        for (i, s) in self.to_one_based().iter().enumerate() {
            let cols: Vec<String> = s.iter().map(ToString::to_string).collect();
            writeln!(f, "{name}{} = {{{}}}", i + 1, cols.join(","))?;
        }
        Ok(())
    }
}

/// `J_i = { j : a_ij >= b_i }`.
pub fn compute_index_sets(inst: &FreInstance) -> IndexSets {
    for (i, row) in inst.a.iter().enumerate() {
        let bi = inst.b[i];
        for (j, &aij) in row.iter().enumerate() {
            if aij < bi && bi - aij <= NEAR_TIE_WARNING {
                log::warn!(
                    "a[{},{}] = {aij} is within {NEAR_TIE_WARNING:e} of b[{}] = {bi} but below it; \
                     column excluded from J{}",
                    i + 1,
                    j + 1,
                    i + 1,
                    i + 1
                );
            }
        }
    }
    IndexSets::from_matrix(&inst.a, &inst.b, IndexKind::Original)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Maximum,
    Candidate,
    Optimum,
    Probe,
}

/// A point of `[0,1]^n` tagged with the role it plays.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolutionVector {
    pub x: Vec<f64>,
    pub role: Role,
}

impl SolutionVector {
    pub fn new(x: Vec<f64>, role: Role) -> Result<Self> {
        if let Some(v) = x.iter().find(|v| !is_unit(**v)) {
            return Err(FreError::Domain(format!("solution entry {v} is not in [0,1]")));
        }
        Ok(SolutionVector { x, role })
    }

    pub(crate) fn new_unchecked(x: Vec<f64>, role: Role) -> Self {
        SolutionVector { x, role }
    }

    pub fn probe(x: Vec<f64>) -> Result<Self> {
        Self::new(x, Role::Probe)
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.x
    }
}

impl fmt::Display for SolutionVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.x.iter().map(|v| format!("{v:.4}")).collect();
        write!(f, "[{}]", parts.join(" "))
    }
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn example_instance_is_valid() {
        let inst = example1();
        assert_eq!((inst.m(), inst.n()), (4, 6));
        assert_eq!(inst.lambda().get(), 2.0);
    }

    #[test]
    fn out_of_range_entry_is_reported_with_coordinates() {
        let err = FreInstance::new(vec![vec![0.5, 1.2]], vec![0.3], vec![1.0, 1.0], 2.0).unwrap_err();
        match err {
            FreError::Validation(v) => {
                assert_eq!(v, vec![Violation::MatrixEntry { row: 1, col: 2, value: 1.2 }]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn zero_lambda_is_rejected() {
        let err = FreInstance::new(vec![vec![0.5]], vec![0.3], vec![1.0], 0.0).unwrap_err();
        assert!(matches!(err, FreError::Validation(ref v) if v == &[Violation::Lambda { value: 0.0 }]));
    }

    #[test]
    fn all_violations_collected() {
        let err = FreInstance::new(vec![vec![0.5, 0.2], vec![0.1]], vec![2.0], vec![f64::NAN], -1.0).unwrap_err();
        let FreError::Validation(v) = err else { panic!() };
        assert!(v.len() >= 5, "{v:?}");
    }

    #[test]
    fn example_index_sets() {
        let sets = compute_index_sets(&example1());
        assert_eq!(sets.kind(), IndexKind::Original);
        assert_eq!(sets.to_one_based(), vec![vec![1, 3, 6], vec![1, 5], vec![2, 5], vec![1, 4, 5]]);
    }

    #[test]
    fn zero_rhs_row_takes_every_column() {
        let inst = single(&[0.0, 0.4, 0.0], 0.0, &[1.0; 3], 1.0);
        assert_eq!(compute_index_sets(&inst).row(0), &[0, 1, 2]);
        assert!(!compute_index_sets(&inst).is_counted(0));
    }

    #[test]
    fn unit_rhs_with_no_unit_entry_is_empty() {
        let inst = single(&[0.99, 0.4], 1.0, &[1.0; 2], 1.0);
        assert!(compute_index_sets(&inst).row(0).is_empty());
    }

    #[test]
    fn display_is_one_based() {
        let s = compute_index_sets(&example1()).to_string();
        assert!(s.starts_with("J1 = {1,3,6}"));
    }

    #[test]
    fn solution_vector_rejects_out_of_range() {
        assert!(SolutionVector::probe(vec![0.2, 1.5]).is_err());
        assert!(SolutionVector::probe(vec![0.2, f64::NAN]).is_err());
    }
}
