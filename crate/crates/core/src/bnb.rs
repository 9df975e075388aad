//! Best-first branch-and-bound over row assignments, and the full solve.
//!
//! The objective splits into `c⁺ = max(c, 0)` and `c⁻ = min(c, 0)`. The
//! non-positive part is minimized by the maximum solution `X̄`; the positive
//! part is minimized over the candidates `X(e)` by branching on one row at a
//! time. The two halves recombine coordinate by coordinate on the sign of `c`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;
use std::io::{self, Write};

use num_bigint::BigUint;
use serde::{Serialize, Serializer};

use crate::candidates::{Assignment, ResidualTable};
use crate::error::{FreError, Result};
use crate::feasibility::{check_feasibility, check_membership, DEFAULT_FEAS_TOL};
use crate::model::{FreInstance, IndexSets, Role, SolutionVector};
use crate::reduction::{simplify_matrix_with_tol, ReducedSystem};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostSplit {
    pub c_plus: Vec<f64>,
    pub c_minus: Vec<f64>,
}

pub fn split_costs(c: &[f64]) -> CostSplit {
    CostSplit { c_plus: c.iter().map(|v| v.max(0.0)).collect(), c_minus: c.iter().map(|v| v.min(0.0)).collect() }
}

/// `c⁺ · x` for a partial candidate. Shared columns count once, at their max.
pub fn node_lower_bound(c_plus: &[f64], partial_x: &[f64]) -> f64 {
    c_plus.iter().zip(partial_x).map(|(c, x)| c * x).sum()
}

/// Order in which rows are branched on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BranchOrder {
    /// Rows `1..m` as given.
    #[default]
    Natural,
    /// Fewest reduced columns first; ties keep row order.
    Heuristic,
}

#[derive(Debug, Clone)]
pub struct SearchNode {
    pub id: usize,
    pub parent: Option<usize>,
    pub depth: usize,
    /// Column chosen per row so far; `None` for rows not yet assigned.
    pub partial_e: Vec<Option<usize>>,
    pub partial_x: Vec<f64>,
    pub lower_bound: f64,
    /// The `(row, column)` fixed when this node was created.
    pub branch: Option<(usize, usize)>,
}

// min-heap on (lower_bound, id)
impl Ord for SearchNode {
    fn cmp(&self, other: &Self) -> Ordering {
        other.lower_bound.total_cmp(&self.lower_bound).then_with(|| other.id.cmp(&self.id))
    }
}

impl PartialOrd for SearchNode {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for SearchNode {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for SearchNode {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeStatus {
    Expanded,
    Pruned,
    Candidate,
}

impl fmt::Display for NodeStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NodeStatus::Expanded => "expanded",
            NodeStatus::Pruned => "pruned",
            NodeStatus::Candidate => "candidate",
        })
    }
}

/// One line of the search trace. Rows and columns are 0-based here and
/// 1-based when written.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceEntry {
    pub id: usize,
    pub parent: Option<usize>,
    pub depth: usize,
    pub row: Option<usize>,
    pub col: Option<usize>,
    pub lower_bound: f64,
    pub status: NodeStatus,
    /// Set on candidates that became the incumbent.
    pub incumbent: bool,
}

impl fmt::Display for TraceEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let opt = |v: Option<usize>| v.map_or_else(|| "-".to_string(), |v| (v + 1).to_string());
        write!(
            f,
            "node={} parent={} depth={} row={} col={} bound={:.10} status={}",
            self.id,
            self.parent.map_or_else(|| "-".to_string(), |p| p.to_string()),
            self.depth,
            opt(self.row),
            opt(self.col),
            self.lower_bound,
            self.status
        )?;
        if self.incumbent {
            f.write_str(" incumbent")?;
        }
        Ok(())
    }
}

pub fn write_trace<W: Write>(trace: &[TraceEntry], mut out: W) -> io::Result<()> {
    for t in trace {
        writeln!(out, "{t}")?;
    }
    Ok(())
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SearchStats {
    pub nodes_created: usize,
    pub nodes_expanded: usize,
    pub nodes_pruned: usize,
    pub candidates: usize,
}

#[derive(Debug, Clone)]
pub struct BnbOutcome {
    pub e_star: Assignment,
    pub x_min_star: SolutionVector,
    pub z1_star: f64,
    pub stats: SearchStats,
    pub trace: Vec<TraceEntry>,
}

struct Incumbent {
    z: f64,
    e: Vec<Option<usize>>,
    x: Vec<f64>,
}

/// Can some completion of `partial` be lexicographically smaller than `best`?
fn can_beat(partial: &[Option<usize>], best: &[Option<usize>], j_bar: &IndexSets) -> bool {
    for (i, (p, b)) in partial.iter().zip(best).enumerate() {
        let Some(b) = b else { continue };
        match p {
            Some(p) if p < b => return true,
            Some(p) if p > b => return false,
            Some(_) => {}
            None => {
                if j_bar.row(i).first().is_some_and(|first| first < b) {
                    return true;
                }
            }
        }
    }
    false
}

fn should_prune(lb: f64, partial: &[Option<usize>], inc: &Option<Incumbent>, j_bar: &IndexSets) -> bool {
    match inc {
        None => false,
        Some(inc) => lb > inc.z || (lb == inc.z && !can_beat(partial, &inc.e, j_bar)),
    }
}

fn branch_rows(j_bar: &IndexSets, order: BranchOrder) -> Vec<usize> {
    let mut rows: Vec<usize> = j_bar.counted_rows().collect();
    if order == BranchOrder::Heuristic {
        rows.sort_by_key(|&i| j_bar.row(i).len());
    }
    rows
}

/// Minimizes `c⁺ · X(e)` over the reduced assignments.
///
/// Nodes are expanded smallest bound first, earliest-created first on ties.
/// A node is discarded once its bound reaches the incumbent, unless an equal
/// bound could still produce a lexicographically smaller assignment. The
/// returned candidate is re-checked against the constraints before returning.
pub fn branch_and_bound(
    inst: &FreInstance,
    rs: &ReducedSystem,
    cs: &CostSplit,
    order: BranchOrder,
    tol: f64,
) -> Result<BnbOutcome> {
    let j_bar = &rs.j_bar;
    let rows = branch_rows(j_bar, order);
    if let Some(&i) = rows.iter().find(|&&i| j_bar.row(i).is_empty()) {
        return Err(FreError::TheoryViolation(format!("reduced index set of row {} is empty", i + 1)));
    }
    let table = ResidualTable::new(inst, j_bar)?;
    let depth_goal = rows.len();

    let mut stats = SearchStats::default();
    let mut trace = Vec::new();
    let mut incumbent: Option<Incumbent> = None;
    let mut frontier = BinaryHeap::new();

    let root = SearchNode {
        id: 0,
        parent: None,
        depth: 0,
        partial_e: vec![None; inst.m()],
        partial_x: vec![0.0; inst.n()],
        lower_bound: 0.0,
        branch: None,
    };
    stats.nodes_created = 1;
    frontier.push(root);

    let entry = |node: &SearchNode, status: NodeStatus| TraceEntry {
        id: node.id,
        parent: node.parent,
        depth: node.depth,
        row: node.branch.map(|b| b.0),
        col: node.branch.map(|b| b.1),
        lower_bound: node.lower_bound,
        status,
        incumbent: false,
    };

    while let Some(node) = frontier.pop() {
        if should_prune(node.lower_bound, &node.partial_e, &incumbent, j_bar) {
            stats.nodes_pruned += 1;
            trace.push(entry(&node, NodeStatus::Pruned));
            continue;
        }
        if node.depth == depth_goal {
            // only reachable for the root when no row needs a column
            stats.candidates += 1;
            let mut t = entry(&node, NodeStatus::Candidate);
            t.incumbent = true;
            trace.push(t);
            incumbent = Some(Incumbent { z: node.lower_bound, e: node.partial_e, x: node.partial_x });
            continue;
        }
        stats.nodes_expanded += 1;
        trace.push(entry(&node, NodeStatus::Expanded));
        let row = rows[node.depth];
        for &(col, v) in &table.rows[row] {
            let mut partial_x = node.partial_x.clone();
            partial_x[col] = partial_x[col].max(v);
            let mut partial_e = node.partial_e.clone();
            partial_e[row] = Some(col);
            let child = SearchNode {
                id: stats.nodes_created,
                parent: Some(node.id),
                depth: node.depth + 1,
                lower_bound: node_lower_bound(&cs.c_plus, &partial_x),
                partial_e,
                partial_x,
                branch: Some((row, col)),
            };
            stats.nodes_created += 1;
            if child.depth == depth_goal {
                stats.candidates += 1;
                let mut t = entry(&child, NodeStatus::Candidate);
                let better = match &incumbent {
                    None => true,
                    Some(inc) => child.lower_bound < inc.z || (child.lower_bound == inc.z && child.partial_e < inc.e),
                };
                if better {
                    t.incumbent = true;
                    incumbent = Some(Incumbent { z: child.lower_bound, e: child.partial_e, x: child.partial_x });
                }
                trace.push(t);
            } else if should_prune(child.lower_bound, &child.partial_e, &incumbent, j_bar) {
                stats.nodes_pruned += 1;
                trace.push(entry(&child, NodeStatus::Pruned));
            } else {
                frontier.push(child);
            }
        }
    }

    let inc = incumbent.ok_or_else(|| FreError::TheoryViolation("search finished without a candidate".into()))?;
    let e_star = Assignment(inc.e);
    let guard = check_membership(inst, &inc.x, tol)?;
    if !guard.feasible {
        return Err(FreError::TheoryViolation(format!(
            "optimal candidate {e_star} = {:?} violates the constraints (max residual {:e})",
            inc.x,
            guard.max_residual()
        )));
    }
    Ok(BnbOutcome {
        e_star,
        x_min_star: SolutionVector::new_unchecked(inc.x, Role::Candidate),
        z1_star: inc.z,
        stats,
        trace,
    })
}

/// `x*_j = X̄_j` where `c_j <= 0`, `X(e*)_j` where `c_j > 0`.
pub fn combine_optimum(
    x_max: &SolutionVector,
    x_min_star: &SolutionVector,
    c: &[f64],
) -> Result<(SolutionVector, f64)> {
    let n = c.len();
    for len in [x_max.len(), x_min_star.len()] {
        if len != n {
            return Err(FreError::Dimension { expected: n, found: len });
        }
    }
    let x: Vec<f64> =
        c.iter().enumerate().map(|(j, &cj)| if cj <= 0.0 { x_max.x[j] } else { x_min_star.x[j] }).collect();
    let z = c.iter().zip(&x).map(|(c, x)| c * x).sum();
    Ok((SolutionVector::new_unchecked(x, Role::Optimum), z))
}

#[derive(Debug, Clone, Copy)]
pub struct SolveConfig {
    pub tol: f64,
    pub order: BranchOrder,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig { tol: DEFAULT_FEAS_TOL, order: BranchOrder::Natural }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Optimum {
    pub e_star: Assignment,
    pub x_min_star: SolutionVector,
    pub z1_star: f64,
    pub x_opt: SolutionVector,
    pub z_opt: f64,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct SolveStats {
    #[serde(flatten)]
    pub search: SearchStats,
    #[serde(serialize_with = "big_as_string")]
    pub size_e: Option<BigUint>,
    #[serde(serialize_with = "big_as_string")]
    pub size_e_bar: Option<BigUint>,
}

fn big_as_string<S: Serializer>(v: &Option<BigUint>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(v) => s.serialize_str(&v.to_string()),
        None => s.serialize_none(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub feasible: bool,
    pub lambda: f64,
    pub x_max: SolutionVector,
    pub row_residuals: Vec<f64>,
    /// 1-based index sets, present once the reduction ran.
    pub j: Option<Vec<Vec<usize>>>,
    pub j_bar: Option<Vec<Vec<usize>>>,
    pub optimum: Option<Optimum>,
    pub stats: SolveStats,
    #[serde(skip)]
    pub trace: Vec<TraceEntry>,
}

/// Max solution, feasibility test, reduction, branch-and-bound, recombination.
pub fn solve(inst: &FreInstance, cfg: &SolveConfig) -> Result<SolveReport> {
    let feas = check_feasibility(inst, cfg.tol);
    let mut report = SolveReport {
        feasible: feas.feasible,
        lambda: inst.lambda().get(),
        x_max: feas.x_max,
        row_residuals: feas.row_residuals,
        j: None,
        j_bar: None,
        optimum: None,
        stats: SolveStats::default(),
        trace: Vec::new(),
    };
    if !report.feasible {
        return Ok(report);
    }
    let rs = simplify_matrix_with_tol(inst, cfg.tol);
    report.j = Some(rs.j.to_one_based());
    report.j_bar = Some(rs.j_bar.to_one_based());
    report.stats.size_e = Some(rs.size_e.clone());
    report.stats.size_e_bar = Some(rs.size_e_bar.clone());

    let cs = split_costs(inst.c());
    let out = branch_and_bound(inst, &rs, &cs, cfg.order, cfg.tol)?;
    let (x_opt, z_opt) = combine_optimum(&report.x_max, &out.x_min_star, inst.c())?;
    report.stats.search = out.stats;
    report.trace = out.trace;
    report.optimum =
        Some(Optimum { e_star: out.e_star, x_min_star: out.x_min_star, z1_star: out.z1_star, x_opt, z_opt });
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::candidates::brute_force_optimum;
    use crate::model::fixtures::*;
    use crate::reduction::simplify_matrix;
    use approx::assert_abs_diff_eq;

    const EXAMPLE_TOL: f64 = 5e-4;

    fn cfg() -> SolveConfig {
        SolveConfig { tol: EXAMPLE_TOL, order: BranchOrder::Natural }
    }

    fn e(cols: &[usize]) -> Assignment {
        Assignment::from_one_based(&cols.iter().map(|&c| Some(c)).collect::<Vec<_>>())
    }

    #[test]
    fn cost_split() {
        let cs = split_costs(&EXAMPLE_C);
        assert_eq!(cs.c_plus, vec![6.2944, 8.1158, 0.0, 8.2675, 2.6471, 0.0]);
        assert_eq!(cs.c_minus, vec![0.0, 0.0, -7.4602, 0.0, 0.0, -8.0491]);
        assert_eq!(split_costs(&[-1.0, -2.0]).c_plus, vec![0.0, 0.0]);
        let z = split_costs(&[0.0, 0.0]);
        assert!(z.c_plus.iter().chain(&z.c_minus).all(|v| *v == 0.0));
    }

    #[test]
    fn lower_bounds_of_example_nodes() {
        let cs = split_costs(&EXAMPLE_C);
        let inst = example2();
        let v = |i: usize, j: usize| crate::candidates::candidate_vector(&inst, i, j).unwrap().x;
        let max = |a: Vec<f64>, b: Vec<f64>| a.iter().zip(&b).map(|(x, y)| x.max(*y)).collect::<Vec<_>>();
        assert_abs_diff_eq!(node_lower_bound(&cs.c_plus, &v(0, 0)), 4.5735, epsilon = EXAMPLE_TOL);
        assert_abs_diff_eq!(node_lower_bound(&cs.c_plus, &v(0, 0)), 4.5737467786, epsilon = 1e-9);
        let node4 = max(v(0, 2), v(1, 4));
        assert_abs_diff_eq!(node_lower_bound(&cs.c_plus, &node4), 2.6471, epsilon = EXAMPLE_TOL);
        // 2.6471 + 8.1158 * V(0.6152, 0.8172), V evaluated with 40-digit arithmetic
        assert_abs_diff_eq!(node_lower_bound(&cs.c_plus, &max(node4.clone(), v(2, 1))), 7.7703199044, epsilon = 1e-9);
        assert_abs_diff_eq!(node_lower_bound(&cs.c_plus, &max(node4, v(2, 4))), 2.6471, epsilon = EXAMPLE_TOL);
    }

    #[test]
    fn example_two_search() {
        let inst = example2();
        let rs = simplify_matrix(&inst);
        let out = branch_and_bound(&inst, &rs, &split_costs(inst.c()), BranchOrder::Natural, EXAMPLE_TOL).unwrap();
        assert_eq!(out.e_star, e(&[3, 5, 5, 5]));
        assert_abs_diff_eq!(out.z1_star, 2.6471, epsilon = EXAMPLE_TOL);
        let cands: Vec<_> = out.trace.iter().filter(|t| t.status == NodeStatus::Candidate).collect();
        assert!(cands.iter().any(|t| (t.lower_bound - 10.9146).abs() <= EXAMPLE_TOL));
        // the two nodes with bound 0 come first, and the earlier one is expanded first
        let expanded: Vec<_> = out.trace.iter().filter(|t| t.status == NodeStatus::Expanded).collect();
        assert_eq!(expanded[0].id, 0);
        assert_eq!((expanded[1].row, expanded[1].col), (Some(0), Some(2)));
        assert_eq!((expanded[2].row, expanded[2].col), (Some(0), Some(5)));
        assert_eq!(out.stats.nodes_created, out.trace.len());
    }

    #[test]
    fn single_row_picks_cheapest_column() {
        let inst = single(&[0.9, 0.7, 0.95], 0.6, &[3.0, 1.0, 2.0], 2.0);
        let rs = simplify_matrix(&inst);
        let cs = split_costs(inst.c());
        let out = branch_and_bound(&inst, &rs, &cs, BranchOrder::Natural, 1e-9).unwrap();
        let best = rs
            .j_bar
            .row(0)
            .iter()
            .map(|&j| node_lower_bound(&cs.c_plus, &crate::candidates::candidate_vector(&inst, 0, j).unwrap().x))
            .fold(f64::INFINITY, f64::min);
        assert_eq!(out.z1_star, best);
    }

    #[test]
    fn all_rows_zero_rhs() {
        let inst = FreInstance::new(vec![vec![0.5, 0.0]], vec![0.0], vec![1.0, -1.0], 1.0).unwrap();
        let rep = solve(&inst, &SolveConfig::default()).unwrap();
        let opt = rep.optimum.unwrap();
        assert_eq!(opt.e_star, Assignment(vec![None]));
        assert_eq!(opt.x_opt.x, vec![0.0, 1.0]);
        assert_eq!(opt.z_opt, -1.0);
    }

    #[test]
    fn combine_examples() {
        let inst = example2();
        let x_max = crate::feasibility::max_solution(&inst);
        let x_min = crate::candidates::assemble_min_candidate(&inst, &e(&[3, 5, 5, 5])).unwrap();
        let (x, z) = combine_optimum(&x_max, &x_min, inst.c()).unwrap();
        for (g, w) in x.x.iter().zip([0.0, 0.0, 0.7336, 0.0, 1.0, 0.7675]) {
            assert_abs_diff_eq!(*g, w, epsilon = EXAMPLE_TOL);
        }
        assert_abs_diff_eq!(z, -9.0033, epsilon = 5e-3);
        let (x, _) = combine_optimum(&x_max, &x_min, &[-1.0; 6]).unwrap();
        assert_eq!(x.x, x_max.x);
        let (x, _) = combine_optimum(&x_max, &x_min, &[1.0; 6]).unwrap();
        assert_eq!(x.x, x_min.x);
        assert!(combine_optimum(&x_max, &x_min, &[1.0; 5]).is_err());
    }

    #[test]
    fn solve_example_two() {
        let rep = solve(&example2(), &cfg()).unwrap();
        assert!(rep.feasible);
        let opt = rep.optimum.as_ref().unwrap();
        assert_eq!(opt.e_star, e(&[3, 5, 5, 5]));
        assert_abs_diff_eq!(opt.z_opt, -9.0033, epsilon = 5e-3);
        assert_eq!(rep.stats.size_e_bar, Some(BigUint::from(12u32)));
    }

    #[test]
    fn solve_infeasible_skips_search() {
        let rep = solve(&single(&[0.3], 0.5, &[1.0], 2.0), &SolveConfig::default()).unwrap();
        assert!(!rep.feasible);
        assert!(rep.optimum.is_none() && rep.j_bar.is_none());
        assert_eq!(rep.stats.search, SearchStats::default());
    }

    #[test]
    fn negated_costs_match_oracle() {
        let inst = example2();
        let neg = inst.with_costs(inst.c().iter().map(|c| -c).collect()).unwrap();
        let rep = solve(&neg, &cfg()).unwrap();
        let oracle = brute_force_optimum(&neg, 1000, EXAMPLE_TOL).unwrap();
        let opt = rep.optimum.unwrap();
        assert_eq!(opt.x_opt.x, oracle.x_opt.x);
        assert_ne!(opt.x_opt.x, solve(&inst, &cfg()).unwrap().optimum.unwrap().x_opt.x);
    }

    #[test]
    fn heuristic_order_agrees() {
        let inst = example2();
        let a = solve(&inst, &cfg()).unwrap().optimum.unwrap();
        let b = solve(&inst, &SolveConfig { order: BranchOrder::Heuristic, ..cfg() }).unwrap().optimum.unwrap();
        assert_eq!(a.e_star, b.e_star);
        assert_eq!(a.z1_star, b.z1_star);
    }

    #[test]
    fn trace_lines_are_one_based() {
        let rep = solve(&example2(), &cfg()).unwrap();
        let mut buf = Vec::new();
        write_trace(&rep.trace, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().next().unwrap().starts_with("node=0 parent=- depth=0 row=- col=-"));
        assert!(text.contains("row=1 col=1 bound=4.57"));
    }
}
