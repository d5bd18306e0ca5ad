use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::trial::{run_trial, TrialConfig, TrialMetrics};
use crate::planner::Algorithm;
use crate::scenario::Scenario;

/// Per-algorithm aggregate; one summary CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub algorithm: Algorithm,
    pub scenario: String,
    pub runs: usize,
    pub success_pct: f64,
    /// Means below are over successful runs only; NaN when none succeeded.
    #[serde(rename = "coll_checks")]
    pub collision_checks: f64,
    pub nn_lookups: f64,
    pub sim_time_s: f64,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchResult {
    /// Algorithm-major, then by seed.
    pub trials: Vec<TrialMetrics>,
    pub summaries: Vec<BatchSummary>,
}

/// Aggregates the trials of one algorithm.
pub fn summarize(algorithm: Algorithm, scenario: &str, trials: &[TrialMetrics]) -> BatchSummary {
    let ok: Vec<&TrialMetrics> = trials.iter().filter(|t| t.success).collect();
    let mean = |f: &dyn Fn(&TrialMetrics) -> f64| {
        if ok.is_empty() {
            f64::NAN
        } else {
            ok.iter().map(|t| f(t)).sum::<f64>() / ok.len() as f64
        }
    };
    BatchSummary {
        algorithm,
        scenario: scenario.to_string(),
        runs: trials.len(),
        success_pct: if trials.is_empty() {
            0.0
        } else {
            100.0 * ok.len() as f64 / trials.len() as f64
        },
        collision_checks: mean(&|t| t.collision_checks as f64),
        nn_lookups: mean(&|t| t.nn_lookups as f64),
        sim_time_s: mean(&|t| t.sim_time_s),
        wall_time_s: mean(&|t| t.wall_time_s),
    }
}

/// Runs `runs` paired trials per algorithm; trial `i` uses seed `base_seed + i`
/// for every algorithm. `workers` threads share the work.
pub fn run_batch(
    scenario: &Scenario,
    algorithms: &[Algorithm],
    runs: usize,
    base_seed: u64,
    workers: usize,
    cfg: &TrialConfig,
) -> BatchResult {
    let jobs: Vec<(Algorithm, u64)> = algorithms
        .iter()
        .flat_map(|&a| (0..runs as u64).map(move |i| (a, base_seed.wrapping_add(i))))
        .collect();
    let go = || -> Vec<TrialMetrics> {
        jobs.par_iter()
            .map(|&(a, seed)| run_trial(scenario, a, seed, cfg))
            .collect()
    };
    let trials = match rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build() {
        Ok(pool) => pool.install(go),
        Err(_) => go(),
    };
    let summaries = algorithms
        .iter()
        .enumerate()
        .map(|(k, &a)| summarize(a, &scenario.name, &trials[k * runs..(k + 1) * runs]))
        .collect();
    BatchResult { trials, summaries }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn metrics(success: bool, checks: u64, time: f64) -> TrialMetrics {
        TrialMetrics {
            algorithm: Algorithm::Drrt,
            scenario: "s".into(),
            seed: 0,
            success,
            collision_checks: checks,
            nn_lookups: checks / 2,
            sim_time_s: time,
            wall_time_s: 0.5,
        }
    }

    #[test]
    fn single_run_summary_equals_trial() {
        let t = metrics(true, 100, 3.0);
        let s = summarize(Algorithm::Drrt, "s", std::slice::from_ref(&t));
        assert_eq!(s.runs, 1);
        assert_eq!(s.success_pct, 100.0);
        assert_eq!(s.collision_checks, 100.0);
        assert_eq!(s.nn_lookups, 50.0);
        assert_eq!(s.sim_time_s, 3.0);
    }

    #[test]
    fn means_skip_failures() {
        let ts = [
            metrics(true, 100, 2.0),
            metrics(false, 900, 60.0),
            metrics(true, 300, 4.0),
        ];
        let s = summarize(Algorithm::Drrt, "s", &ts);
        assert!((s.success_pct - 200.0 / 3.0).abs() < 1e-12);
        assert_eq!(s.collision_checks, 200.0);
        assert_eq!(s.sim_time_s, 3.0);
        let none = summarize(Algorithm::Drrt, "s", &[metrics(false, 1, 1.0)]);
        assert!(none.sim_time_s.is_nan());
    }

    #[test]
    fn parallel_matches_serial() {
        let mut s = Scenario::bundled("dynamic").unwrap();
        s.cutoff_s = 3.0;
        let cfg = TrialConfig::default();
        let par = run_batch(&s, &Algorithm::ALL, 3, 10, 3, &cfg);
        let ser = run_batch(&s, &Algorithm::ALL, 3, 10, 1, &cfg);
        let strip = |r: &BatchResult| {
            r.trials
                .iter()
                .map(|t| TrialMetrics {
                    wall_time_s: 0.0,
                    ..t.clone()
                })
                .collect::<Vec<_>>()
        };
        assert_eq!(strip(&par), strip(&ser));
        assert_eq!(par.trials.len(), 9);
        assert_eq!(par.trials[4].seed, 11);
        assert_eq!(par.trials[4].algorithm, Algorithm::Drrt);
    }
}
