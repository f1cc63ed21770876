use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::generate::generate;
use super::{check, InequalityId, Ordering};
use crate::error::{Error, Result};

/// Knobs of the random instance generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub tol: f64,
    /// Ordering class for the Chebyshev checks; drawn per trial when absent.
    pub ordering: Option<Ordering>,
    /// Deliberately violate the declared ordering (generator control).
    pub misorder: bool,
    /// Consecutive rejections tolerated before giving up.
    pub max_rejections: usize,
    /// Draw weights of either sign where the hypotheses allow it.
    #[serde(default)]
    pub signed_weights: bool,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig { tol: 1e-8, ordering: None, misorder: false, max_rejections: 1000, signed_weights: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailingTrial {
    pub trial: u64,
    pub seed: u64,
    pub margin: f64,
    pub slack: f64,
    pub replay: String,
}

/// Aggregate of a fuzz campaign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzReport {
    pub inequality: InequalityId,
    pub trials: u64,
    pub seed: u64,
    pub config: GeneratorConfig,
    /// Trials whose check ran to completion.
    pub checked: u64,
    pub min_margin: Option<f64>,
    pub min_margin_trial: Option<u64>,
    pub violations: u64,
    /// Candidates discarded for failing a hypothesis.
    pub rejected: u64,
    /// Trials skipped because an integral did not reach the tolerance.
    pub unconverged: u64,
    pub failing: Vec<FailingTrial>,
}

fn rejectable(e: &Error) -> bool {
    e.is_precondition() || matches!(e.root(), Error::Domain { .. })
}

/// Runs `trials` random instances of `id`. Trial `k` draws from the ChaCha
/// stream `k` of `seed`, so each trial is reproducible on its own.
pub fn fuzz(id: InequalityId, trials: u64, seed: u64, cfg: &GeneratorConfig) -> Result<FuzzReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    if cfg.max_rejections == 0 {
        return Err(Error::InvalidArgument("max_rejections must be at least 1".into()));
    }
    let mut out = FuzzReport {
        inequality: id,
        trials,
        seed,
        config: *cfg,
        checked: 0,
        min_margin: None,
        min_margin_trial: None,
        violations: 0,
        rejected: 0,
        unconverged: 0,
        failing: Vec::new(),
    };
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial);
        let mut streak = 0;
        loop {
            match generate(id, &mut rng, cfg).and_then(|spec| check(id, &spec)) {
                Ok(r) => {
                    out.checked += 1;
                    if out.min_margin.is_none_or(|m| r.margin < m) {
                        out.min_margin = Some(r.margin);
                        out.min_margin_trial = Some(trial);
                    }
                    if !r.passed {
                        out.violations += 1;
                        out.failing.push(FailingTrial {
                            trial,
                            seed: r.instance.seed,
                            margin: r.margin,
                            slack: r.slack,
                            replay: r.replay,
                        });
                    }
                    break;
                }
                Err(e) if rejectable(&e) => {
                    out.rejected += 1;
                    streak += 1;
                    if streak >= cfg.max_rejections {
                        return Err(Error::GeneratorExhausted { attempts: streak, last: Box::new(e) });
                    }
                }
                Err(e) if e.is_no_convergence() => {
                    out.unconverged += 1;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
    }
    Ok(out)
}
