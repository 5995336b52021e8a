//! Dynamics of matrix powers: orbit structure of `M, M^2, M^3, ...` and
//! exhaustive searches over single-bit matrices for the slowest ones to
//! saturate to the all-ones matrix `U`.
//!
//! The power sequence of any matrix is eventually periodic because the
//! state space is finite. We count powers from 1 and report the number of
//! pre-periodic powers as the tail `r` and the period as the cycle `s`,
//! so `M^(r+1+s) = M^(r+1)` with both minimal and the orbit holds exactly
//! `r + s` distinct matrices.

use std::collections::{BTreeMap, HashMap};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::BoolMatrix;
use crate::smallmat;

/// Shape of one power orbit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitReport {
    /// Powers (counted from 1) that never recur.
    pub tail: u64,
    /// Length of the recurring part.
    pub cycle: u64,
    /// Whether some power equals the all-ones matrix `U`. Once reached,
    /// every later power stays `U`, so this forces `cycle = 1`.
    pub saturates: bool,
    /// Least `e` with `M^e = U`, when it exists.
    pub saturation_step: Option<u64>,
}

impl OrbitReport {
    /// Size of `{M^e : e >= 1}`.
    pub fn distinct_powers(&self) -> u64 {
        self.tail + self.cycle
    }
}

/// Walk the powers of `m` with a seen-set until one repeats; orbits here
/// are short, so exact minimal tail and cycle are cheap.
pub fn orbit_analysis(m: &BoolMatrix) -> OrbitReport {
    let all_ones = BoolMatrix::all_ones(m.n(), m.k()).expect("shape is valid");
    let mut first_index: HashMap<BoolMatrix, u64> = HashMap::new();
    let mut power = m.clone();
    let mut step = 1u64;
    let mut saturation_step = None;
    loop {
        if saturation_step.is_none() && power == all_ones {
            saturation_step = Some(step);
        }
        if let Some(&first) = first_index.get(&power) {
            return OrbitReport {
                tail: first - 1,
                cycle: step - first,
                saturates: saturation_step.is_some(),
                saturation_step,
            };
        }
        first_index.insert(power.clone(), step);
        power = power.mul_unchecked(m);
        step += 1;
    }
}

/// Outcome of an exhaustive saturation search over all `2^(n*n)`
/// single-bit matrices.
#[derive(Clone, Debug)]
pub struct SaturationResult {
    pub n: usize,
    /// Largest `s` such that `M^s != U` among matrices that do saturate;
    /// every witness has `M^(s_max) != U` and `M^(s_max + 1) = U`.
    pub s_max: u64,
    /// All matrices attaining `s_max`, in canonical counter order.
    pub witnesses: Vec<BoolMatrix>,
}

impl SaturationResult {
    pub fn witness_count(&self) -> usize {
        self.witnesses.len()
    }

    /// CSV with one row per witness: `n,s_max,bits`, bits row-major in
    /// written order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,s_max,bits\n");
        for w in &self.witnesses {
            let mask = smallmat::from_bool_matrix(w).expect("witnesses are single-bit");
            out.push_str(&format!(
                "{},{},{}\n",
                self.n,
                self.s_max,
                smallmat::bits_string(mask, self.n)
            ));
        }
        out
    }
}

/// Search all single-bit `n`x`n` matrices, `n` in `2..=5`. Matrices whose
/// powers never reach `U` are skipped; among the rest the latest
/// saturators win. The range is split across rayon workers.
pub fn saturation_search(n: usize) -> Result<SaturationResult> {
    saturation_search_with_progress(n, None)
}

/// As [`saturation_search`], reporting `(done, total)` matrix counts to
/// `progress` as enumeration blocks finish.
pub fn saturation_search_with_progress(
    n: usize,
    progress: Option<&(dyn Fn(u64, u64) + Sync)>,
) -> Result<SaturationResult> {
    if !(2..=smallmat::MAX_N).contains(&n) {
        return Err(Error::parameter(format!(
            "saturation search supports n in 2..=5, got {n}"
        )));
    }
    let total = 1u64 << (n * n);
    let block = 1u64 << 16;
    let blocks: Vec<u64> = (0..total.div_ceil(block)).collect();
    let done = std::sync::atomic::AtomicU64::new(0);

    let per_block: Vec<(u64, Vec<u32>)> = blocks
        .par_iter()
        .map_init(Vec::new, |orbit_buf, &b| {
            let lo = b * block;
            let hi = (lo + block).min(total);
            let mut best = 0u64;
            let mut witnesses: Vec<u32> = Vec::new();
            for mask in lo..hi {
                if let Some(step) = saturation_step_mask(mask as u32, n, orbit_buf) {
                    let s = step - 1;
                    if s > best {
                        best = s;
                        witnesses.clear();
                    }
                    if s == best {
                        witnesses.push(mask as u32);
                    }
                }
            }
            if let Some(cb) = progress {
                let finished =
                    done.fetch_add(hi - lo, std::sync::atomic::Ordering::Relaxed) + (hi - lo);
                cb(finished, total);
            }
            (best, witnesses)
        })
        .collect();

    let mut s_max = 0u64;
    let mut masks: Vec<u32> = Vec::new();
    for (best, wits) in per_block {
        if best > s_max {
            s_max = best;
            masks.clear();
        }
        if best == s_max {
            masks.extend(wits);
        }
    }
    masks.sort_by_key(|&m| smallmat::counter_from_mask(m, n));
    Ok(SaturationResult {
        n,
        s_max,
        witnesses: masks
            .into_iter()
            .map(|m| smallmat::to_bool_matrix(m, n))
            .collect(),
    })
}

/// Least `e` with `mask^e` all ones, or None if the orbit cycles without
/// reaching it. `orbit` is scratch space reused across calls.
fn saturation_step_mask(mask: u32, n: usize, orbit: &mut Vec<u32>) -> Option<u64> {
    let u = smallmat::all_ones(n);
    // a zero row or zero column persists through every power
    let row_mask = (1u32 << n) - 1;
    for i in 0..n {
        if mask >> (i * n) & row_mask == 0 {
            return None;
        }
    }
    let mut col_union = 0u32;
    for i in 0..n {
        col_union |= mask >> (i * n) & row_mask;
    }
    if col_union != row_mask {
        return None;
    }

    orbit.clear();
    let mut power = mask;
    let mut step = 1u64;
    loop {
        if power == u {
            return Some(step);
        }
        if orbit.contains(&power) {
            return None;
        }
        orbit.push(power);
        power = smallmat::mul(power, mask, n);
        step += 1;
    }
}

/// Frequency of distinct-power counts over `samples` random single-bit
/// matrices with bit probability `p`. An empirical look at how large the
/// orbit `{M^e}` gets.
pub fn distinct_power_histogram(
    n: usize,
    p: f64,
    samples: u64,
    seed: u64,
) -> Result<BTreeMap<u64, u64>> {
    smallmat::check_n(n)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::parameter(format!(
            "bit probability must lie in [0, 1], got {p}"
        )));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut histogram = BTreeMap::new();
    let mut orbit = Vec::new();
    for _ in 0..samples {
        let mut mask = 0u32;
        for idx in 0..n * n {
            if rng.gen_bool(p) {
                mask |= 1 << idx;
            }
        }
        orbit.clear();
        let mut power = mask;
        let distinct = loop {
            if orbit.contains(&power) {
                break orbit.len() as u64;
            }
            orbit.push(power);
            power = smallmat::mul(power, mask, n);
        };
        *histogram.entry(distinct).or_insert(0) += 1;
    }
    Ok(histogram)
}
