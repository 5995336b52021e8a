//! Bit-distribution experiments on the shared key.
//!
//! With the public matrix sampled at bit probability 1/2 the derived key
//! leans heavily toward zero bits, roughly two thirds of them. Sweeping
//! the sampling probability upward rebalances the key; these experiments
//! measure the zero ratio per probability and locate the balanced point.
//!
//! Every trial runs a complete independent exchange (fresh matrix,
//! permutation and both exponents) and trials are distributed across
//! rayon workers. Each trial seeds its own stream from the base seed and
//! the trial index, so results do not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::protocol::{derive_shared, keygen, ParamSpec, ProtocolParams};

/// Experiment sizes; `p` varies per measurement.
#[derive(Clone, Copy, Debug)]
pub struct ExperimentConfig {
    pub n: usize,
    pub k: usize,
    pub exponent_bits: usize,
    pub trials: u64,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let spec = ParamSpec::default();
        ExperimentConfig {
            n: spec.n,
            k: spec.k,
            exponent_bits: spec.exponent_bits,
            trials: 100,
            seed: 0,
        }
    }
}

/// One measured point of the sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepPoint {
    pub p: f64,
    pub trials: u64,
    /// Mean over trials of (zero bits in the key) / (n*n*k).
    pub mean_zero_ratio: f64,
    /// Sample standard deviation of the per-trial ratios.
    pub std_dev: f64,
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha12Rng {
    let mut bytes = [0u8; 32];
    bytes[..8].copy_from_slice(&seed.to_le_bytes());
    bytes[8..16].copy_from_slice(&trial.to_le_bytes());
    ChaCha12Rng::from_seed(bytes)
}

fn run_trial(config: &ExperimentConfig, p: f64, trial: u64) -> Result<f64> {
    let mut rng = trial_rng(config.seed, trial);
    let spec = ParamSpec {
        n: config.n,
        k: config.k,
        p,
        exponent_bits: config.exponent_bits,
    };
    let params = ProtocolParams::generate(spec, &mut rng)?;
    let alice = keygen(&params, &mut rng)?;
    let bob = keygen(&params, &mut rng)?;
    let ka = derive_shared(&params, &alice, bob.public_value())?;
    let kb = derive_shared(&params, &bob, alice.public_value())?;
    assert_eq!(
        ka.matrix(),
        kb.matrix(),
        "exchange correctness violated in trial {trial}"
    );
    Ok(ka.matrix().zero_bit_ratio())
}

/// Run independent exchanges at bit probability `p` and average the zero
/// ratio of the shared key.
pub fn zero_ratio_experiment(config: &ExperimentConfig, p: f64) -> Result<SweepPoint> {
    if config.trials == 0 {
        return Err(Error::parameter("need at least one trial".to_string()));
    }
    let ratios: Vec<f64> = (0..config.trials)
        .into_par_iter()
        .map(|trial| run_trial(config, p, trial))
        .collect::<Result<_>>()?;
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let std_dev = if ratios.len() > 1 {
        let var = ratios.iter().map(|r| (r - mean).powi(2)).sum::<f64>()
            / (ratios.len() - 1) as f64;
        var.sqrt()
    } else {
        0.0
    };
    Ok(SweepPoint {
        p,
        trials: config.trials,
        mean_zero_ratio: mean,
        std_dev,
    })
}

/// One [`SweepPoint`] per grid probability.
pub fn sweep_p(config: &ExperimentConfig, grid: &[f64]) -> Result<Vec<SweepPoint>> {
    grid.iter()
        .map(|&p| {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::parameter(format!(
                    "grid probability {p} outside [0, 1]"
                )));
            }
            zero_ratio_experiment(config, p)
        })
        .collect()
}

/// Bisection controls for [`find_balanced_p`].
#[derive(Clone, Copy, Debug)]
pub struct BisectionConfig {
    pub lo: f64,
    pub hi: f64,
    /// Stop once the measured ratio is this close to 1/2.
    pub ratio_tolerance: f64,
    pub max_iterations: u32,
}

impl Default for BisectionConfig {
    fn default() -> Self {
        BisectionConfig {
            lo: 0.50,
            hi: 0.60,
            ratio_tolerance: 0.005,
            max_iterations: 25,
        }
    }
}

/// Bisect on the sampling probability until the mean zero ratio of the
/// key is within tolerance of 1/2. The ratio falls as `p` grows, so the
/// bracket must have the low end above and the high end below 1/2.
pub fn find_balanced_p(config: &ExperimentConfig, bisection: &BisectionConfig) -> Result<f64> {
    let config = ExperimentConfig {
        trials: config.trials.max(50),
        ..*config
    };
    let ratio_lo = zero_ratio_experiment(&config, bisection.lo)?.mean_zero_ratio;
    let ratio_hi = zero_ratio_experiment(&config, bisection.hi)?.mean_zero_ratio;
    if ratio_lo < 0.5 || ratio_hi > 0.5 {
        return Err(Error::NonBracketing {
            lo: bisection.lo,
            hi: bisection.hi,
            ratio_lo,
            ratio_hi,
        });
    }
    let (mut lo, mut hi) = (bisection.lo, bisection.hi);
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..bisection.max_iterations {
        mid = 0.5 * (lo + hi);
        let ratio = zero_ratio_experiment(&config, mid)?.mean_zero_ratio;
        if (ratio - 0.5).abs() <= bisection.ratio_tolerance {
            return Ok(mid);
        }
        if ratio > 0.5 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // noise kept every evaluation outside tolerance; the interval itself
    // has still collapsed onto the crossing
    Ok(mid)
}
