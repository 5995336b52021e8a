//! The telescoping attack on a published exchange.
//!
//! Applying `h` to the telescoped product behind a public value `A`
//! shifts it by one step, which cancels into the public relation
//! `h(A) * M = h^a(M) * A`. Everything there is public except
//! `X = h^a(M)`, so an attacker faces the linear equation `X * A = rhs`.
//!
//! Because bit positions are independent, the equation splits into `k`
//! single-bit equations, each solvable by trying all `2^(n*n)` matrices.
//! The catch is multiplicity: the slice solution counts multiply, so with
//! even two solutions per slice there are `2^k` full-width candidates, and
//! recovering the one of the form `sigma(M)` from that haystack is the
//! step this module makes concrete (and demonstrates infeasible beyond
//! toy sizes).

use std::collections::HashSet;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::BoolMatrix;
use crate::perm::Permutation;
use crate::protocol::ProtocolParams;
use crate::smallmat;

/// One linear equation `X * coeff = rhs` over matrices with bit-string
/// entries; the unknown multiplies from the left.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearInstance {
    /// The known right factor (a party's public value).
    pub coeff: BoolMatrix,
    pub rhs: BoolMatrix,
}

/// Form the public relation for a transmitted value: `coeff = A` and
/// `rhs = h(A) * M`. The key holder's `h^a(M)` always solves it.
pub fn telescoping_instance(
    params: &ProtocolParams,
    public_value: &BoolMatrix,
) -> Result<LinearInstance> {
    params.matrix().check_same_shape(public_value)?;
    let rhs = params
        .perm()
        .apply_matrix(public_value)?
        .mul(params.matrix())?;
    Ok(LinearInstance {
        coeff: public_value.clone(),
        rhs,
    })
}

impl LinearInstance {
    pub fn is_solution(&self, x: &BoolMatrix) -> bool {
        x.mul(&self.coeff).map(|prod| prod == self.rhs).unwrap_or(false)
    }
}

/// All single-bit `X` with `X * c = d`, by trying every candidate in
/// canonical counter order.
pub fn solve_single_bit(c: &BoolMatrix, d: &BoolMatrix) -> Result<Vec<BoolMatrix>> {
    c.check_same_shape(d)?;
    let n = c.n();
    let c_mask = smallmat::from_bool_matrix(c)?;
    let d_mask = smallmat::from_bool_matrix(d)?;
    let mut solutions = Vec::new();
    for counter in 0..1u32 << (n * n) {
        let x = smallmat::mask_from_counter(counter, n);
        if smallmat::mul(x, c_mask, n) == d_mask {
            solutions.push(smallmat::to_bool_matrix(x, n));
        }
    }
    Ok(solutions)
}

/// Per-slice solutions of an instance, with the combined count. The full
/// Cartesian product is never materialized; its size is the point.
#[derive(Clone, Debug)]
pub struct SolutionSet {
    /// Slice `j` holds every single-bit solution of the `j`-th layer, in
    /// canonical counter order.
    pub per_slice: Vec<Vec<BoolMatrix>>,
    /// Product of the per-slice counts; zero when any slice is unsolvable.
    pub total_count: BigUint,
}

impl SolutionSet {
    /// Slice-by-slice membership test for a full-width candidate.
    pub fn contains(&self, x: &BoolMatrix) -> bool {
        if x.k() != self.per_slice.len() {
            return false;
        }
        x.slices()
            .iter()
            .zip(&self.per_slice)
            .all(|(slice, solutions)| solutions.contains(slice))
    }
}

/// Split the instance into its `k` single-bit layers and solve each by
/// exhaustion, in parallel across slices.
pub fn solve_slicewise(instance: &LinearInstance) -> Result<SolutionSet> {
    let coeff_slices = instance.coeff.slices();
    let rhs_slices = instance.rhs.slices();
    let per_slice: Vec<Vec<BoolMatrix>> = coeff_slices
        .par_iter()
        .zip(rhs_slices.par_iter())
        .map(|(c, d)| solve_single_bit(c, d))
        .collect::<Result<_>>()?;
    let total_count = per_slice
        .iter()
        .fold(BigUint::one(), |acc, s| acc * BigUint::from(s.len()));
    Ok(SolutionSet {
        per_slice,
        total_count,
    })
}

/// Result of a budgeted scan over candidate permutations.
#[derive(Clone, Debug)]
pub struct FilterReport {
    /// Permutations whose action on `m` solves the instance.
    pub matches: Vec<Permutation>,
    pub examined: u64,
    /// False when the budget ran out before the scan finished; `matches`
    /// is then only a partial answer.
    pub complete: bool,
}

/// Scan permutations of degree `k` in lexicographic order for those with
/// `sigma(M)` solving the instance, examining at most `budget`
/// candidates. Candidates are screened slice by slice against
/// `solutions`, which is exactly the solution membership test. Only toy
/// degrees can be exhausted: the scan space is `k!`.
pub fn conjugate_filter(
    instance: &LinearInstance,
    m: &BoolMatrix,
    solutions: &SolutionSet,
    budget: u64,
) -> Result<FilterReport> {
    m.check_same_shape(&instance.coeff)?;
    if solutions.per_slice.len() != m.k() {
        return Err(Error::dimension(format!(
            "solution set has {} slices, matrix has k = {}",
            solutions.per_slice.len(),
            m.k()
        )));
    }
    let k = m.k();
    let m_slices: Vec<u32> = m
        .slices()
        .iter()
        .map(smallmat::from_bool_matrix)
        .collect::<Result<_>>()?;
    let slice_sets: Vec<HashSet<u32>> = solutions
        .per_slice
        .iter()
        .map(|s| s.iter().map(|x| smallmat::from_bool_matrix(x).unwrap()).collect())
        .collect();

    let mut images: Vec<usize> = (0..k).collect();
    let mut matches = Vec::new();
    let mut examined = 0u64;
    loop {
        if examined == budget {
            return Ok(FilterReport {
                matches,
                examined,
                complete: false,
            });
        }
        examined += 1;
        // slice j of sigma(M) is slice sigma^-1(j) of M; with sigma given
        // by `images` this screens the candidate without materializing it
        let ok = (0..k).all(|i| slice_sets[images[i]].contains(&m_slices[i]));
        if ok {
            matches.push(Permutation::from_images(images.clone()).expect("images is a bijection"));
        }
        if !next_permutation(&mut images) {
            return Ok(FilterReport {
                matches,
                examined,
                complete: true,
            });
        }
    }
}

/// Advance to the lexicographically next arrangement; false after the
/// last one.
fn next_permutation(items: &mut [usize]) -> bool {
    if items.len() < 2 {
        return false;
    }
    let mut pivot = items.len() - 1;
    while pivot > 0 && items[pivot - 1] >= items[pivot] {
        pivot -= 1;
    }
    if pivot == 0 {
        return false;
    }
    let successor = (pivot..items.len())
        .rev()
        .find(|&i| items[i] > items[pivot - 1])
        .expect("suffix is descending with an element above the pivot");
    items.swap(pivot - 1, successor);
    items[pivot..].reverse();
    true
}

/// Full-width brute force over all `2^(n*n*k)` candidates; the oracle the
/// slice-wise counts are checked against at tiny sizes.
pub fn count_solutions_brute_force(instance: &LinearInstance) -> Result<BigUint> {
    let n = instance.coeff.n();
    let k = instance.coeff.k();
    let total_bits = n * n * k;
    if total_bits > 24 {
        return Err(Error::parameter(format!(
            "brute force over 2^{total_bits} candidates is not sensible"
        )));
    }
    let mut count = BigUint::zero();
    for assignment in 0u64..1 << total_bits {
        let mut bit = 0;
        let mut entries = Vec::with_capacity(n * n);
        for _ in 0..n * n {
            let mut s = crate::bits::BitString::zeros(k);
            for j in 0..k {
                if assignment >> bit & 1 == 1 {
                    s.set(j, true);
                }
                bit += 1;
            }
            entries.push(s);
        }
        let candidate = BoolMatrix::from_entries(n, entries)?;
        if instance.is_solution(&candidate) {
            count += BigUint::one();
        }
    }
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::Permutation;
    use crate::protocol::{keygen_with_exponent, ParamSpec, ProtocolParams};
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn single(rows: &[&[u8]]) -> BoolMatrix {
        BoolMatrix::from_single_bits(rows).unwrap()
    }

    #[test]
    fn known_equation_with_two_solutions() {
        let c = single(&[&[1, 0], &[1, 1]]);
        let d = single(&[&[1, 1], &[1, 0]]);
        let solutions = solve_single_bit(&c, &d).unwrap();
        assert_eq!(
            solutions,
            vec![single(&[&[0, 1], &[1, 0]]), single(&[&[1, 1], &[1, 0]])]
        );
    }

    #[test]
    fn known_equation_without_solutions() {
        let c = single(&[&[1, 0], &[1, 1]]);
        let d = single(&[&[0, 1], &[1, 1]]);
        assert!(solve_single_bit(&c, &d).unwrap().is_empty());
    }

    #[test]
    fn known_equation_with_unique_solution() {
        let c = single(&[&[1, 0], &[1, 1]]);
        let d = single(&[&[1, 0], &[0, 0]]);
        assert_eq!(
            solve_single_bit(&c, &d).unwrap(),
            vec![single(&[&[1, 0], &[0, 0]])]
        );
    }

    /// Independent oracle with a different loop structure: rows of `X`
    /// are independent, so solve row by row and combine.
    fn row_wise_solutions(c: &BoolMatrix, d: &BoolMatrix) -> Vec<u32> {
        let n = c.n();
        let cm = smallmat::from_bool_matrix(c).unwrap();
        let dm = smallmat::from_bool_matrix(d).unwrap();
        let row_mask = (1u32 << n) - 1;
        let row_options: Vec<Vec<u32>> = (0..n)
            .map(|i| {
                let want = dm >> (i * n) & row_mask;
                (0..=row_mask)
                    .filter(|&r| {
                        let mut acc = 0u32;
                        for t in 0..n {
                            if r >> t & 1 == 1 {
                                acc |= cm >> (t * n) & row_mask;
                            }
                        }
                        acc == want
                    })
                    .collect()
            })
            .collect();
        let mut out = vec![0u32];
        for (i, options) in row_options.iter().enumerate() {
            out = out
                .into_iter()
                .flat_map(|partial| options.iter().map(move |&r| partial | r << (i * n)))
                .collect();
        }
        out.sort_unstable();
        out
    }

    #[test]
    fn exhaustive_agreement_with_row_oracle_for_n2() {
        for c_mask in 0u32..16 {
            for d_mask in 0u32..16 {
                let c = smallmat::to_bool_matrix(c_mask, 2);
                let d = smallmat::to_bool_matrix(d_mask, 2);
                let mut got: Vec<u32> = solve_single_bit(&c, &d)
                    .unwrap()
                    .iter()
                    .map(|x| smallmat::from_bool_matrix(x).unwrap())
                    .collect();
                got.sort_unstable();
                assert_eq!(got, row_wise_solutions(&c, &d), "c={c_mask} d={d_mask}");
            }
        }
    }

    fn toy_params(n: usize, k: usize, seed: u64) -> ProtocolParams {
        let spec = ParamSpec {
            n,
            k,
            p: 0.5,
            exponent_bits: 16,
        };
        ProtocolParams::generate(spec, &mut ChaCha12Rng::seed_from_u64(seed)).unwrap()
    }

    #[test]
    fn instance_at_exponent_one_is_solved_by_h_of_m() {
        let params = toy_params(2, 3, 40);
        let instance = telescoping_instance(&params, params.matrix()).unwrap();
        let h_of_m = params.perm().apply_matrix(params.matrix()).unwrap();
        assert!(instance.is_solution(&h_of_m));
    }

    #[test]
    fn key_holder_value_solves_the_instance() {
        for seed in 0..10 {
            let params = toy_params(2, 3, seed);
            let a = 4u32;
            let kp = keygen_with_exponent(&params, BigUint::from(a)).unwrap();
            let instance = telescoping_instance(&params, kp.public_value()).unwrap();
            let truth = params
                .perm()
                .pow(&BigUint::from(a))
                .apply_matrix(params.matrix())
                .unwrap();
            assert!(instance.is_solution(&truth));
            let solutions = solve_slicewise(&instance).unwrap();
            assert!(solutions.contains(&truth));
            assert!(solutions.total_count >= BigUint::one());
        }
    }

    #[test]
    fn slice_counts_multiply() {
        // two independent slices, each with the two-solution equation
        let c = BoolMatrix::parse(&[&["11", "00"], &["11", "11"]]).unwrap();
        let d = BoolMatrix::parse(&[&["11", "11"], &["11", "00"]]).unwrap();
        let set = solve_slicewise(&LinearInstance {
            coeff: c,
            rhs: d,
        })
        .unwrap();
        assert_eq!(set.per_slice[0].len(), 2);
        assert_eq!(set.per_slice[1].len(), 2);
        assert_eq!(set.total_count, BigUint::from(4u8));
    }

    #[test]
    fn unsolvable_slice_zeroes_the_count() {
        let c = BoolMatrix::parse(&[&["11", "00"], &["11", "11"]]).unwrap();
        // second slice carries the no-solution right side
        let d = BoolMatrix::parse(&[&["10", "11"], &["11", "01"]]).unwrap();
        let set = solve_slicewise(&LinearInstance {
            coeff: c,
            rhs: d,
        })
        .unwrap();
        assert!(set.per_slice.iter().any(|s| s.is_empty()));
        assert!(set.total_count.is_zero());
    }

    #[test]
    fn slicewise_count_matches_full_brute_force() {
        let mut rng = ChaCha12Rng::seed_from_u64(99);
        for k in 1..=3usize {
            for _ in 0..8 {
                let coeff = BoolMatrix::random(2, k, 0.5, &mut rng).unwrap();
                let x = BoolMatrix::random(2, k, 0.5, &mut rng).unwrap();
                let rhs = x.mul(&coeff).unwrap();
                let instance = LinearInstance { coeff, rhs };
                let slicewise = solve_slicewise(&instance).unwrap();
                assert_eq!(
                    slicewise.total_count,
                    count_solutions_brute_force(&instance).unwrap(),
                    "k={k}"
                );
            }
        }
    }

    #[test]
    fn next_permutation_walks_all_arrangements() {
        let mut items = vec![0usize, 1, 2];
        let mut seen = vec![items.clone()];
        while next_permutation(&mut items) {
            seen.push(items.clone());
        }
        assert_eq!(seen.len(), 6);
        assert_eq!(seen[1], vec![0, 2, 1]);
        assert_eq!(seen[5], vec![2, 1, 0]);
    }

    #[test]
    fn filter_finds_the_acting_permutation_at_toy_scale() {
        let params = toy_params(2, 3, 17);
        let a = 5u32;
        let kp = keygen_with_exponent(&params, BigUint::from(a)).unwrap();
        let instance = telescoping_instance(&params, kp.public_value()).unwrap();
        let solutions = solve_slicewise(&instance).unwrap();
        let report =
            conjugate_filter(&instance, params.matrix(), &solutions, 1000).unwrap();
        assert!(report.complete);
        assert_eq!(report.examined, 6);
        let truth = params
            .perm()
            .pow(&BigUint::from(a))
            .apply_matrix(params.matrix())
            .unwrap();
        assert!(report
            .matches
            .iter()
            .any(|sigma| sigma.apply_matrix(params.matrix()).unwrap() == truth));
        for sigma in &report.matches {
            assert!(instance.is_solution(&sigma.apply_matrix(params.matrix()).unwrap()));
        }
    }

    #[test]
    fn all_ones_matrix_admits_every_permutation() {
        let m = BoolMatrix::all_ones(2, 3).unwrap();
        let spec = ParamSpec {
            n: 2,
            k: 3,
            p: 1.0,
            exponent_bits: 8,
        };
        let params = ProtocolParams::from_parts(
            spec,
            m.clone(),
            Permutation::from_one_based(&[2, 1, 3]).unwrap(),
        )
        .unwrap();
        let instance = telescoping_instance(&params, &m).unwrap();
        let solutions = solve_slicewise(&instance).unwrap();
        let report = conjugate_filter(&instance, &m, &solutions, 100).unwrap();
        assert!(report.complete);
        assert_eq!(report.matches.len(), 6);
    }

    #[test]
    fn exhausted_budget_reports_partial() {
        let params = toy_params(2, 4, 3);
        let kp = keygen_with_exponent(&params, BigUint::from(3u8)).unwrap();
        let instance = telescoping_instance(&params, kp.public_value()).unwrap();
        let solutions = solve_slicewise(&instance).unwrap();
        let report = conjugate_filter(&instance, params.matrix(), &solutions, 5).unwrap();
        assert!(!report.complete);
        assert_eq!(report.examined, 5);
    }
}
