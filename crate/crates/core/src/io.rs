//! JSON instance documents and the random instance generator.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{FreError, Result};
use crate::feasibility::{check_feasibility, DEFAULT_FEAS_TOL};
use crate::model::FreInstance;
use crate::tnorm::row_composition_raw;

/// On-disk form of an instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDocument {
    pub lambda: f64,
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl InstanceDocument {
    pub fn from_instance(inst: &FreInstance) -> Self {
        InstanceDocument {
            lambda: inst.lambda().get(),
            a: inst.a().to_vec(),
            b: inst.b().to_vec(),
            c: inst.c().to_vec(),
            name: None,
            seed: None,
        }
    }

    pub fn into_instance(self) -> Result<FreInstance> {
        FreInstance::new(self.a, self.b, self.c, self.lambda)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance documents always serialize")
    }
}

pub fn parse_document(text: &str) -> Result<InstanceDocument> {
    serde_json::from_str(text).map_err(|e| FreError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

/// Parses and validates an instance document.
pub fn parse_instance(text: &str) -> Result<FreInstance> {
    parse_document(text)?.into_instance()
}

pub fn serialize_instance(inst: &FreInstance) -> String {
    InstanceDocument::from_instance(inst).to_json()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub m: usize,
    pub n: usize,
    pub lambda: f64,
    pub seed: u64,
    pub zero_b_rows: usize,
    pub cost_range: (f64, f64),
}

impl GeneratorConfig {
    pub fn new(m: usize, n: usize, lambda: f64, seed: u64) -> Self {
        GeneratorConfig { m, n, lambda, seed, zero_b_rows: 0, cost_range: (-10.0, 10.0) }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 {
            return Err(FreError::Config("m and n must be positive".into()));
        }
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(FreError::Config(format!("lambda = {} must be finite and > 0", self.lambda)));
        }
        if self.zero_b_rows >= self.m {
            return Err(FreError::Config(format!("zero_b_rows = {} must be < m = {}", self.zero_b_rows, self.m)));
        }
        let (lo, hi) = self.cost_range;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(FreError::Config(format!("cost range [{lo}, {hi}] is invalid")));
        }
        Ok(())
    }
}

/// Redraws allowed before the generator gives up.
const MAX_DRAWS: usize = 1000;

/// A random instance that is solvable by construction.
///
/// A hidden point `x0` is drawn first and `b = A ∘ x0`. Rows picked for
/// `b_i = 0` keep a random support of columns where `x0` is forced to 0 and
/// have every other entry zeroed. One column stays outside every such
/// support, so the remaining rows keep a positive right-hand side.
///
/// A row with `a_ij` far below `x0_j` is almost flat in `x_j`, and rounding
/// `b_i` can then move its residual enough that `X̄` misses the default
/// feasibility tolerance. Such draws are discarded and the same stream draws
/// again.
pub fn generate_instance(cfg: &GeneratorConfig) -> Result<FreInstance> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..MAX_DRAWS {
        let inst = draw_instance(cfg, &mut rng)?;
        if check_feasibility(&inst, DEFAULT_FEAS_TOL).feasible {
            return Ok(inst);
        }
    }
    Err(FreError::Config(format!("no feasible instance after {MAX_DRAWS} draws")))
}

fn draw_instance(cfg: &GeneratorConfig, rng: &mut ChaCha8Rng) -> Result<FreInstance> {
    let (m, n) = (cfg.m, cfg.n);
    let mut a: Vec<Vec<f64>> = (0..m).map(|_| (0..n).map(|_| rng.random::<f64>()).collect()).collect();
    let mut x0: Vec<f64> = (0..n).map(|_| 1.0 - rng.random::<f64>()).collect();

    let reserved = rng.random_range(0..n);
    let others: Vec<usize> = (0..n).filter(|&j| j != reserved).collect();
    for i in sample(rng, m, cfg.zero_b_rows) {
        let support: Vec<usize> = if others.is_empty() {
            Vec::new()
        } else {
            let k = rng.random_range(1..=others.len().div_ceil(2));
            sample(rng, others.len(), k).into_iter().map(|p| others[p]).collect()
        };
        for (j, aij) in a[i].iter_mut().enumerate() {
            if support.contains(&j) {
                x0[j] = 0.0;
            } else {
                *aij = 0.0;
            }
        }
    }

    let b: Vec<f64> = a.iter().map(|row| row_composition_raw(row, &x0, cfg.lambda)).collect();
    let (lo, hi) = cfg.cost_range;
    let c: Vec<f64> = (0..n).map(|_| if lo < hi { rng.random_range(lo..hi) } else { lo }).collect();
    FreInstance::new(a, b, c, cfg.lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feasibility::{check_feasibility, DEFAULT_FEAS_TOL};

    const EXAMPLE2: &str = r#"{
        "lambda": 2,
        "A": [[0.9452, 0, 0.8976, 0, 0, 0.8126],
              [0, 0, 0, 0, 0.5271, 0],
              [0, 0.8172, 0, 0, 0.6152, 0],
              [0, 0, 0, 0.8327, 0.8327, 0]],
        "b": [0.7243, 0.5271, 0.6152, 0.8327],
        "c": [6.2944, 8.1158, -7.4602, 8.2675, 2.6471, -8.0491],
        "name": "example 2"
    }"#;

    #[test]
    fn parses_example_document() {
        let inst = parse_instance(EXAMPLE2).unwrap();
        assert_eq!((inst.m(), inst.n(), inst.lambda().get()), (4, 6, 2.0));
    }

    #[test]
    fn missing_field_is_named() {
        let err = parse_instance(r#"{"lambda": 1, "A": [[0.5]], "c": [1]}"#).unwrap_err();
        assert!(matches!(err, FreError::Parse { ref message, .. } if message.contains("`b`")), "{err}");
    }

    #[test]
    fn out_of_range_b_fails_validation() {
        let err = parse_instance(r#"{"lambda": 1, "A": [[0.5]], "b": [1.5], "c": [1]}"#).unwrap_err();
        assert!(matches!(err, FreError::Validation(_)));
    }

    #[test]
    fn malformed_json_has_location() {
        let err = parse_instance("{\n  \"lambda\": ,\n}").unwrap_err();
        assert!(matches!(err, FreError::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn generated_instances_are_feasible_and_deterministic() {
        for seed in 0..50 {
            let cfg = GeneratorConfig { zero_b_rows: (seed % 3) as usize, ..GeneratorConfig::new(4, 5, 1.5, seed) };
            let inst = generate_instance(&cfg).unwrap();
            assert!(check_feasibility(&inst, DEFAULT_FEAS_TOL).feasible, "seed {seed}");
            assert_eq!(inst, generate_instance(&cfg).unwrap());
        }
    }

    #[test]
    fn zero_rows_count() {
        for seed in 0..20 {
            let cfg = GeneratorConfig { zero_b_rows: 4, ..GeneratorConfig::new(5, 3, 2.0, seed) };
            let inst = generate_instance(&cfg).unwrap();
            assert_eq!(inst.b().iter().filter(|&&b| b == 0.0).count(), 4, "seed {seed}");
        }
    }

    #[test]
    fn single_column_with_zero_rows() {
        let cfg = GeneratorConfig { zero_b_rows: 2, ..GeneratorConfig::new(3, 1, 1.0, 9) };
        let inst = generate_instance(&cfg).unwrap();
        assert_eq!(inst.b().iter().filter(|&&b| b == 0.0).count(), 2);
        assert!(check_feasibility(&inst, DEFAULT_FEAS_TOL).feasible);
    }

    #[test]
    fn bad_config() {
        let cfg = GeneratorConfig { zero_b_rows: 3, ..GeneratorConfig::new(3, 2, 1.0, 0) };
        assert!(matches!(generate_instance(&cfg), Err(FreError::Config(_))));
        assert!(generate_instance(&GeneratorConfig::new(2, 2, -1.0, 0)).is_err());
    }
}
