//! Verification report: per-k records, verdicts, and the trivial curvature
//! bound check.

use crate::config::RunConfig;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct KRecord {
    pub k: i64,
    pub degree: f64,
    pub winding: f64,
    pub mapping_torus_index: f64,
    pub spectral_flow: i64,
    pub conjugation_residual: f64,
    pub rounded_degree: i64,
    pub rounded_winding: i64,
    pub rounded_index: i64,
    pub solver: String,
    pub grid: usize,
    pub flow_solves: usize,
    pub flow_refinements: usize,
    pub pass: bool,
    /// Resolution diagnostics, e.g. a failed coarse-grid attempt that was
    /// retried on a finer grid.
    pub diagnostics: Vec<String>,
}

/// The vacuous curvature lower bound on the flat torus, recorded against the
/// actual spectral gap of the untwisted operator.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct FriedrichRecord {
    pub scalar_curvature_min: f64,
    /// `n/(4(n-1)) * S_0` with `S_0 = 0`.
    pub eigenvalue_sq_bound: f64,
    pub observed_gap: f64,
    pub satisfied: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Timings {
    pub total_seconds: f64,
    pub per_k_seconds: Vec<(i64, f64)>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Environment {
    pub crate_version: String,
    pub scalar: String,
    pub os: String,
    pub workers: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Report {
    pub schema_version: u32,
    pub calibration: String,
    pub config: RunConfig,
    pub environment: Environment,
    pub records: Vec<KRecord>,
    pub friedrich: FriedrichRecord,
    pub pairwise_distinct_flows: bool,
    pub all_pass: bool,
    pub timings: Timings,
}

impl Report {
    /// Independent validator for the report invariants: every record's four
    /// integers agree with its `k`, and the flows are pairwise distinct.
    pub fn validate(&self) -> Result<(), String> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(format!("schema version {}", self.schema_version));
        }
        for r in &self.records {
            let ints = [
                r.rounded_degree,
                r.rounded_winding,
                r.rounded_index,
                r.spectral_flow,
            ];
            if r.pass && ints.iter().any(|&i| i != r.k) {
                return Err(format!(
                    "record k={}: integers {:?} disagree with k but record claims pass",
                    r.k, ints
                ));
            }
            if !r.pass && ints.iter().all(|&i| i == r.k) {
                return Err(format!("record k={} has agreeing integers but claims failure", r.k));
            }
        }
        let mut flows: Vec<i64> = self.records.iter().map(|r| r.spectral_flow).collect();
        flows.sort_unstable();
        let distinct = flows.windows(2).all(|p| p[0] != p[1]);
        if distinct != self.pairwise_distinct_flows {
            return Err("pairwise_distinct_flows flag inconsistent with records".into());
        }
        if self.all_pass != self.records.iter().all(|r| r.pass) {
            return Err("all_pass flag inconsistent with records".into());
        }
        if !self.friedrich.satisfied {
            return Err("curvature bound record claims violation".into());
        }
        Ok(())
    }

    /// Equality modulo timings, for reproducibility checks.
    pub fn equivalent_modulo_timings(&self, other: &Report) -> bool {
        self.schema_version == other.schema_version
            && self.calibration == other.calibration
            && self.config == other.config
            && self.records == other.records
            && self.friedrich == other.friedrich
            && self.pairwise_distinct_flows == other.pairwise_distinct_flows
            && self.all_pass == other.all_pass
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(k: i64, flow: i64) -> KRecord {
        KRecord {
            k,
            degree: k as f64 + 1e-6,
            winding: k as f64 - 1e-6,
            mapping_torus_index: k as f64 - 1e-6,
            spectral_flow: flow,
            conjugation_residual: 0.1,
            rounded_degree: k,
            rounded_winding: k,
            rounded_index: k,
            solver: "dense".into(),
            grid: 8,
            flow_solves: 10,
            flow_refinements: 0,
            pass: flow == k,
            diagnostics: vec![],
        }
    }

    fn report(records: Vec<KRecord>) -> Report {
        let distinct = {
            let mut f: Vec<i64> = records.iter().map(|r| r.spectral_flow).collect();
            f.sort_unstable();
            f.windows(2).all(|p| p[0] != p[1])
        };
        let all_pass = records.iter().all(|r| r.pass);
        Report {
            schema_version: SCHEMA_VERSION,
            calibration: "test".into(),
            config: RunConfig::default(),
            environment: Environment {
                crate_version: "0".into(),
                scalar: "f64".into(),
                os: "linux".into(),
                workers: 1,
            },
            records,
            friedrich: FriedrichRecord {
                scalar_curvature_min: 0.0,
                eigenvalue_sq_bound: 0.0,
                observed_gap: 5.44,
                satisfied: true,
            },
            pairwise_distinct_flows: distinct,
            all_pass,
            timings: Timings {
                total_seconds: 0.0,
                per_k_seconds: vec![],
            },
        }
    }

    #[test]
    fn validator_accepts_consistent_report() {
        let r = report(vec![record(-1, -1), record(0, 0), record(1, 1)]);
        r.validate().unwrap();
        assert!(r.pairwise_distinct_flows);
    }

    #[test]
    fn validator_catches_duplicate_flows() {
        let mut r = report(vec![record(0, 0), record(1, 0)]);
        // claims distinct but two records share flow 0
        r.pairwise_distinct_flows = true;
        assert!(r.validate().is_err());
    }

    #[test]
    fn validator_catches_false_pass() {
        let mut rec = record(2, 1);
        rec.pass = true; // inconsistent: flow 1 != k 2
        let r = report(vec![rec]);
        assert!(r.validate().is_err());
    }
}
