//! Reliability applications of the precedence orders: the SP ratio of a
//! target ordering event against a rival, and the three-component
//! series-parallel allocation comparison under common random numbers.

use serde::{Deserialize, Serialize};

use crate::dist::Distribution;
use crate::error::Error;
use crate::estimate::ProbEstimate;
use crate::rng::Rng;
use crate::Result;

/// `p_target / (p_target + p_rival)`: the probability that the system
/// lifetime built on the target ordering beats the rival's, given that the
/// two coupled lifetimes differ exactly on those two ordering events. At
/// least 0.5 iff the target event is at least as probable.
///
/// The division is taken on the winning side, where the quotient lies in
/// [0.5, 1] and `1 - r` is exact (Sterbenz), so
/// `sp_ratio(p, q) + sp_ratio(q, p)` is exactly 1 in floating point.
pub fn sp_ratio(p_target: f64, p_rival: f64) -> Result<f64> {
    if !(p_target >= 0.0 && p_rival >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "sp ratio needs nonnegative probabilities, got ({p_target}, {p_rival})"
        )));
    }
    if p_target + p_rival == 0.0 {
        return Err(Error::BothZero);
    }
    if p_target >= p_rival {
        Ok(p_target / (p_target + p_rival))
    } else {
        Ok(1.0 - p_rival / (p_target + p_rival))
    }
}

/// Assignment of three component variables to the slots of a
/// series-parallel system: one component in series with a parallel pair.
/// The system lives while the series component and at least one parallel
/// component live: `L = min(t_series, max(t_par))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AllocationSpec {
    /// Zero-based variable index in the series slot.
    pub series: usize,
    /// Zero-based variable indices in the parallel pair.
    pub parallel: [usize; 2],
}

impl AllocationSpec {
    pub fn new(series: usize, parallel: [usize; 2]) -> Result<Self> {
        let mut seen = [false; 3];
        for &i in [series, parallel[0], parallel[1]].iter() {
            if i >= 3 || seen[i] {
                return Err(Error::InvalidParameter(format!(
                    "allocation must assign the three variables to distinct slots, got series={series}, parallel={parallel:?}"
                )));
            }
            seen[i] = true;
        }
        Ok(AllocationSpec { series, parallel })
    }

    /// From one-based slot order `[series, par, par]`, e.g. `[3, 1, 2]`.
    pub fn from_one_based(order: &[usize]) -> Result<Self> {
        if order.len() != 3 {
            return Err(Error::InvalidParameter(format!("allocation needs exactly 3 slots, got {}", order.len())));
        }
        if order.iter().any(|&i| i == 0 || i > 3) {
            return Err(Error::InvalidParameter(format!("allocation indices must be in 1..=3, got {order:?}")));
        }
        AllocationSpec::new(order[0] - 1, [order[1] - 1, order[2] - 1])
    }

    /// All six slot orders (three distinct systems; the parallel pair is
    /// unordered, so each system appears twice).
    pub fn all() -> Vec<AllocationSpec> {
        let mut out = Vec::with_capacity(6);
        for s in 0..3 {
            let others: Vec<usize> = (0..3).filter(|&i| i != s).collect();
            out.push(AllocationSpec { series: s, parallel: [others[0], others[1]] });
            out.push(AllocationSpec { series: s, parallel: [others[1], others[0]] });
        }
        out
    }

    /// System lifetime for one joint realization of the component lifetimes.
    pub fn lifetime(&self, t: &[f64; 3]) -> f64 {
        t[self.series].min(t[self.parallel[0]].max(t[self.parallel[1]]))
    }
}

impl std::fmt::Display for AllocationSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "series={}, parallel={{{},{}}}", self.series + 1, self.parallel[0] + 1, self.parallel[1] + 1)
    }
}

/// Monte Carlo comparison of two allocations under common random numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationComparison {
    pub alloc_a: AllocationSpec,
    pub alloc_b: AllocationSpec,
    /// `P(L_a >= L_b)` (ties included).
    pub weak: ProbEstimate,
    /// `P(L_a > L_b)` (ties excluded).
    pub strict: ProbEstimate,
    pub ties: u64,
    pub samples: u64,
}

/// Estimates `P(L_a >= L_b)` by drawing one joint realization of the three
/// component lifetimes per trial and evaluating both allocations on it.
/// The two system lifetimes are statistically dependent by construction;
/// the common draws preserve exactly that dependence, so swapping the
/// allocations flips every strict comparison trial by trial.
pub fn series_parallel_compare(
    dists: &[Distribution],
    alloc_a: AllocationSpec,
    alloc_b: AllocationSpec,
    rng: &mut Rng,
    samples: u64,
) -> Result<AllocationComparison> {
    if dists.len() != 3 {
        return Err(Error::InvalidParameter(format!(
            "series-parallel comparison needs exactly 3 variables, got {}",
            dists.len()
        )));
    }
    if samples == 0 {
        return Err(Error::InvalidParameter("series-parallel comparison needs samples >= 1".into()));
    }
    let seed = rng.seed();
    let mut weak = 0u64;
    let mut strict = 0u64;
    let mut ties = 0u64;
    for _ in 0..samples {
        let t = [dists[0].sample_one(rng), dists[1].sample_one(rng), dists[2].sample_one(rng)];
        let la = alloc_a.lifetime(&t);
        let lb = alloc_b.lifetime(&t);
        if la >= lb {
            weak += 1;
        }
        if la > lb {
            strict += 1;
        }
        if la == lb {
            ties += 1;
        }
    }
    Ok(AllocationComparison {
        alloc_a,
        alloc_b,
        weak: ProbEstimate::monte_carlo(weak, samples, seed),
        strict: ProbEstimate::monte_carlo(strict, samples, seed),
        ties,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    use crate::rng::Rng;

    #[test]
    fn sp_ratio_known_values() {
        assert_eq!(sp_ratio(1.0 / 3.0, 1.0 / 15.0).unwrap(), 5.0 / 6.0);
        assert_eq!(sp_ratio(0.25, 0.25).unwrap(), 0.5);
        let r = sp_ratio(0.36, 0.24).unwrap();
        assert!((r - 0.6).abs() < 1e-15, "r={r}");
    }

    #[test]
    fn sp_ratio_errors() {
        assert!(matches!(sp_ratio(0.0, 0.0), Err(Error::BothZero)));
        assert!(sp_ratio(-0.1, 0.5).is_err());
        assert!(sp_ratio(f64::NAN, 0.5).is_err());
    }

    proptest! {
        #[test]
        fn sp_ratio_complement_is_exactly_one(p in 0.0f64..1.0, q in 1e-12f64..1.0) {
            let sum = sp_ratio(p, q).unwrap() + sp_ratio(q, p).unwrap();
            prop_assert_eq!(sum, 1.0);
        }

        #[test]
        fn sp_ratio_threshold_matches_comparison(p in 0.0f64..1.0, q in 1e-12f64..1.0) {
            let r = sp_ratio(p, q).unwrap();
            prop_assert_eq!(r >= 0.5, p >= q);
        }
    }

    #[test]
    fn sp_ratio_is_monotone_in_target() {
        let rival = 0.2;
        let mut last = -1.0;
        for i in 0..200 {
            let p = i as f64 / 100.0;
            let r = sp_ratio(p, rival).unwrap();
            assert!(r >= last, "ratio decreased at p={p}");
            last = r;
        }
    }

    #[test]
    fn allocation_validation() {
        assert!(AllocationSpec::new(0, [1, 2]).is_ok());
        assert!(AllocationSpec::new(0, [0, 2]).is_err());
        assert!(AllocationSpec::new(3, [0, 1]).is_err());
        let a = AllocationSpec::from_one_based(&[3, 1, 2]).unwrap();
        assert_eq!(a.series, 2);
        assert_eq!(a.parallel, [0, 1]);
        assert_eq!(AllocationSpec::all().len(), 6);
    }

    #[test]
    fn lifetime_formula() {
        let a = AllocationSpec::new(2, [0, 1]).unwrap();
        // series = t3, parallel = {t1, t2}
        assert_eq!(a.lifetime(&[1.0, 2.0, 3.0]), 2.0);
        assert_eq!(a.lifetime(&[1.0, 2.0, 1.5]), 1.5);
    }

    fn exp3() -> Vec<Distribution> {
        vec![
            Distribution::exponential(3.0).unwrap().with_name("T1"),
            Distribution::exponential(2.0).unwrap().with_name("T2"),
            Distribution::exponential(1.0).unwrap().with_name("T3"),
        ]
    }

    #[test]
    fn identical_allocations_tie_every_trial() {
        let a = AllocationSpec::new(2, [0, 1]).unwrap();
        let out = series_parallel_compare(&exp3(), a, a, &mut Rng::new(0, 0), 1000).unwrap();
        assert_eq!(out.weak.value, 1.0);
        assert_eq!(out.strict.value, 0.0);
        assert_eq!(out.ties, 1000);
    }

    #[test]
    fn parallel_pair_order_is_irrelevant() {
        let a = AllocationSpec::new(2, [0, 1]).unwrap();
        let b = AllocationSpec::new(2, [1, 0]).unwrap();
        let out = series_parallel_compare(&exp3(), a, b, &mut Rng::new(1, 0), 1000).unwrap();
        assert_eq!(out.ties, 1000);
    }

    #[test]
    fn coupling_flips_strict_comparisons() {
        let dists = exp3();
        let a = AllocationSpec::new(2, [0, 1]).unwrap();
        let b = AllocationSpec::new(0, [1, 2]).unwrap();
        let samples = 20_000;
        let ab = series_parallel_compare(&dists, a, b, &mut Rng::new(9, 9), samples).unwrap();
        let ba = series_parallel_compare(&dists, b, a, &mut Rng::new(9, 9), samples).unwrap();
        // weak(a,b) counts exactly the complement of strict(b,a)
        let weak_ab = (ab.weak.value * samples as f64).round() as u64;
        let strict_ba = (ba.strict.value * samples as f64).round() as u64;
        assert_eq!(weak_ab + strict_ba, samples);
    }

    #[test]
    fn largest_in_series_beats_rivals() {
        // T3 is stochastically largest (smallest rate); putting it in
        // series should win every pairwise comparison at this sample size
        let dists = exp3();
        let best = AllocationSpec::new(2, [0, 1]).unwrap();
        for (i, rival) in AllocationSpec::all().into_iter().enumerate() {
            let mut rng = Rng::new(77, i as u64);
            let out = series_parallel_compare(&dists, best, rival, &mut rng, 100_000).unwrap();
            assert!(
                out.weak.value + out.weak.err >= 0.5,
                "rival {rival}: weak {} err {}",
                out.weak.value,
                out.weak.err
            );
        }
    }

    #[test]
    fn iid_components_give_balanced_strict_counts() {
        let dists = vec![
            Distribution::exponential(1.0).unwrap(),
            Distribution::exponential(1.0).unwrap(),
            Distribution::exponential(1.0).unwrap(),
        ];
        let a = AllocationSpec::new(0, [1, 2]).unwrap();
        let b = AllocationSpec::new(1, [0, 2]).unwrap();
        let out = series_parallel_compare(&dists, a, b, &mut Rng::new(4, 0), 200_000).unwrap();
        // exchangeability: strict wins each way are symmetric, so the
        // strict proportion sits below 0.5 and the weak above
        assert!(out.strict.covers(out.strict.value));
        let mid = 0.5 * (out.weak.value + out.strict.value);
        assert!((mid - 0.5).abs() < 0.005, "mid={mid}");
    }
}
