use serde::{Deserialize, Serialize};

use super::{EpisodeRecord, HarnessError};
use crate::agent::{Condition, Termination, WallTimes};
use crate::domains::CellParams;

/// Two-sided 95% normal quantile.
pub const DEFAULT_Z: f64 = 1.959964;

/// Wilson score interval for `successes` out of `trials`, clamped to [0, 1].
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> Result<(f64, f64), HarnessError> {
    if trials == 0 || successes > trials {
        return Err(HarnessError::InvalidCounts { successes, trials });
    }
    if !(z > 0.0 && z.is_finite()) {
        return Err(HarnessError::InvalidZ(z));
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // the closed form is exact at the extremes; pin them against rounding
    let lo = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if successes == trials {
        1.0
    } else {
        (center + half).min(1.0)
    };
    Ok((lo, hi))
}

/// Aggregates for one grid cell under one condition. Rates and intervals
/// are absent when no episode finished without an infrastructure error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub cell: CellParams,
    pub condition: Condition,
    /// Episodes that ran to a verdict; infrastructure errors are excluded.
    pub trials: u64,
    pub successes: u64,
    pub timeouts: u64,
    pub infra_errors: u64,
    pub success_rate: Option<f64>,
    pub interval: Option<(f64, f64)>,
    pub mean_iterations: Option<f64>,
    pub mean_wall_times: Option<WallTimes>,
}

fn mean_times<'a>(records: impl Iterator<Item = &'a EpisodeRecord>) -> Option<WallTimes> {
    let mut sum = WallTimes::default();
    let mut count = 0usize;
    for r in records {
        sum.action_llm += r.wall_times.action_llm;
        sum.verify_llm += r.wall_times.verify_llm;
        sum.environment += r.wall_times.environment;
        sum.solver += r.wall_times.solver;
        count += 1;
    }
    (count > 0).then(|| {
        let c = count as f64;
        WallTimes {
            action_llm: sum.action_llm / c,
            verify_llm: sum.verify_llm / c,
            environment: sum.environment / c,
            solver: sum.solver / c,
        }
    })
}

/// Mean per-phase times over every non-infrastructure episode in `records`.
pub fn pooled_wall_times<'a>(records: impl Iterator<Item = &'a EpisodeRecord>) -> Option<WallTimes> {
    mean_times(records.filter(|r| r.termination != Termination::InfrastructureError))
}

/// Pure reduction of episode records into per-cell results, ordered by
/// `cells` then `conditions`.
pub fn aggregate(records: &[EpisodeRecord], cells: &[CellParams], conditions: &[Condition], z: f64) -> Vec<CellResult> {
    let mut out = Vec::with_capacity(cells.len() * conditions.len());
    for cell in cells {
        for &condition in conditions {
            let group: Vec<&EpisodeRecord> = records
                .iter()
                .filter(|r| r.cell == *cell && r.condition == condition)
                .collect();
            let infra_errors = group
                .iter()
                .filter(|r| r.termination == Termination::InfrastructureError)
                .count() as u64;
            let ran: Vec<&EpisodeRecord> = group
                .into_iter()
                .filter(|r| r.termination != Termination::InfrastructureError)
                .collect();
            let trials = ran.len() as u64;
            let successes = ran.iter().filter(|r| r.success).count() as u64;
            let timeouts = ran
                .iter()
                .filter(|r| r.termination == Termination::HorizonExceeded)
                .count() as u64;
            let (success_rate, interval, mean_iterations) = if trials == 0 {
                (None, None, None)
            } else {
                let n = trials as f64;
                (
                    Some(successes as f64 / n),
                    wilson_interval(successes, trials, z).ok(),
                    Some(ran.iter().map(|r| r.iterations as f64).sum::<f64>() / n),
                )
            };
            out.push(CellResult {
                cell: *cell,
                condition,
                trials,
                successes,
                timeouts,
                infra_errors,
                success_rate,
                interval,
                mean_iterations,
                mean_wall_times: mean_times(ran.into_iter()),
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extremes_are_exact() {
        assert_eq!(wilson_interval(0, 10, 1.96).unwrap().0, 0.0);
        assert_eq!(wilson_interval(10, 10, 1.96).unwrap().1, 1.0);
    }

    #[test]
    fn matches_reference_values() {
        // reference values computed independently with the closed form
        let (lo, hi) = wilson_interval(8, 10, 1.96).unwrap();
        assert!((lo - 0.490_156_846_72).abs() < 1e-9, "{lo}");
        assert!((hi - 0.943_319_052_02).abs() < 1e-9, "{hi}");
        let (lo, hi) = wilson_interval(5, 20, DEFAULT_Z).unwrap();
        assert!((lo - 0.11186).abs() < 1e-4 && (hi - 0.46870).abs() < 1e-4, "{lo} {hi}");
    }

    #[test]
    fn invalid_inputs() {
        assert!(wilson_interval(1, 0, 1.96).is_err());
        assert!(wilson_interval(3, 2, 1.96).is_err());
        assert!(wilson_interval(1, 2, 0.0).is_err());
        assert!(wilson_interval(1, 2, f64::NAN).is_err());
    }

    #[test]
    fn empty_records_aggregate_to_none() {
        let cells = [CellParams::Blocksworld { b: 3, h: 3 }];
        let out = aggregate(&[], &cells, &[Condition::NoTn], DEFAULT_Z);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].trials, 0);
        assert_eq!(out[0].success_rate, None);
        assert_eq!(out[0].interval, None);
    }
}
