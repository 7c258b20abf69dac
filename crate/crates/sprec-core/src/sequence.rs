//! Permutation-event probabilities and the sequential precedence orders.
//!
//! The central object is `P_sigma = P(T_{s(1)} <= T_{s(2)} <= ... <=
//! T_{s(n)})` for a permutation `s`. Three engines compute it:
//!
//! * exact rational enumeration for all-discrete variables (weak or
//!   strict inequalities per the configured tie convention);
//! * backward-recursion quadrature on a shared grid for all-continuous
//!   variables;
//! * Monte Carlo classification of joint draws (strict ordering; for
//!   continuous variables ties have probability zero).
//!
//! Stream discipline for reproducible Monte Carlo: a standalone
//! permutation estimate draws from the substream indexed by the
//! permutation's lexicographic rank (offset into a dedicated index space),
//! while a full table classifies one joint sample set — every draw lands
//! in exactly one strict ordering event, so the table sums to one by
//! construction and is independent of any evaluation schedule.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::audit::Holds;
use crate::config::{EngineConfig, Method, TieConvention};
use crate::dist::Distribution;
use crate::error::Error;
use crate::estimate::ProbEstimate;
use crate::exact;
use crate::pairwise::{self, Direction, OrderVerdict};
use crate::quad;
use crate::Result;

/// Substream index spaces keeping the Monte Carlo engines independent.
const STREAM_SPACE_PAIR: u64 = 0;
const STREAM_SPACE_PERM: u64 = 1 << 40;
const STREAM_SPACE_JOINT: u64 = 1 << 41;

/// A permutation of n variables, stored by zero-based variable index per
/// event position; rendered and serialized one-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation((0..n).collect())
    }

    /// Builds from one-based indices, e.g. `[3, 1, 2]`.
    pub fn from_one_based(indices: &[usize]) -> Result<Self> {
        let n = indices.len();
        let mut seen = vec![false; n];
        for &i in indices {
            if i == 0 || i > n || seen[i - 1] {
                return Err(Error::InvalidPermutation(format!(
                    "{indices:?} is not a permutation of 1..={n}"
                )));
            }
            seen[i - 1] = true;
        }
        Ok(Permutation(indices.iter().map(|&i| i - 1).collect()))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Zero-based variable index at each event position.
    pub fn vars(&self) -> &[usize] {
        &self.0
    }

    /// Zero-based variable index occupying `position`.
    pub fn var_at(&self, position: usize) -> usize {
        self.0[position]
    }

    /// All permutations of n variables in lexicographic order.
    pub fn all(n: usize) -> Vec<Permutation> {
        let mut out = Vec::with_capacity(factorial(n));
        let mut current = Vec::with_capacity(n);
        let mut used = vec![false; n];
        fn rec(n: usize, current: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Permutation>) {
            if current.len() == n {
                out.push(Permutation(current.clone()));
                return;
            }
            for v in 0..n {
                if !used[v] {
                    used[v] = true;
                    current.push(v);
                    rec(n, current, used, out);
                    current.pop();
                    used[v] = false;
                }
            }
        }
        rec(n, &mut current, &mut used, &mut out);
        out
    }

    /// Position of this permutation in lexicographic order (Lehmer code).
    pub fn lex_rank(&self) -> usize {
        let n = self.0.len();
        let mut rank = 0;
        for i in 0..n {
            let smaller = self.0[i + 1..].iter().filter(|&&x| x < self.0[i]).count();
            rank += smaller * factorial(n - 1 - i);
        }
        rank
    }

    /// Copy with the entries at two positions exchanged.
    pub fn swap_positions(&self, a: usize, b: usize) -> Permutation {
        let mut v = self.0.clone();
        v.swap(a, b);
        Permutation(v)
    }
}

pub(crate) fn factorial(n: usize) -> usize {
    (1..=n).product()
}

impl std::fmt::Display for Permutation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", v + 1)?;
        }
        write!(f, ")")
    }
}

impl Serialize for Permutation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.0.iter().map(|&i| i + 1))
    }
}

impl<'de> Deserialize<'de> for Permutation {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let one_based: Vec<usize> = Vec::deserialize(d)?;
        Permutation::from_one_based(&one_based).map_err(D::Error::custom)
    }
}

/// One row of a permutation table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermEntry {
    pub perm: Permutation,
    pub estimate: ProbEstimate,
}

/// All n! permutation-event probabilities, in lexicographic order.
///
/// `convention` is set for all-discrete variables only; under the strict
/// convention the events are disjoint (values sum to at most 1), under the
/// weak convention shared atoms make them overlap (sums can exceed 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermProbTable {
    pub n: usize,
    pub method: Method,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convention: Option<TieConvention>,
    pub entries: Vec<PermEntry>,
}

impl PermProbTable {
    /// Compensated (Neumaier) sum of the entry values, so exact tables
    /// really report their mass without summation noise.
    pub fn sum(&self) -> f64 {
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        for e in &self.entries {
            let x = e.estimate.value;
            let t = sum + x;
            if sum.abs() >= x.abs() {
                comp += (sum - t) + x;
            } else {
                comp += (x - t) + sum;
            }
            sum = t;
        }
        sum + comp
    }

    pub fn total_err(&self) -> f64 {
        self.entries.iter().map(|e| e.estimate.err).sum()
    }

    /// Entry lookup by lexicographic rank.
    pub fn get(&self, perm: &Permutation) -> &PermEntry {
        &self.entries[perm.lex_rank()]
    }
}

/// Pairwise precedence verdict carried inside sequence reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSpVerdict {
    /// One-based index and name of the variable expected to precede.
    pub first: usize,
    pub first_name: String,
    /// One-based index and name of the variable expected to follow.
    pub second: usize,
    pub second_name: String,
    pub p_second_ge_first: ProbEstimate,
    pub p_first_ge_second: ProbEstimate,
    pub verdict: OrderVerdict,
}

/// Chain-precedence report: the adjacent pairwise verdicts and whether the
/// whole chain holds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CspReport {
    pub holds: Holds,
    pub pairs: Vec<PairSpVerdict>,
}

/// Sequential-precedence report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SspReport {
    pub table: PermProbTable,
    /// Whether the identity ordering event has maximal probability.
    pub ssp_holds: Holds,
    /// Probability gap between the identity event and its best rival
    /// (negative when a rival wins).
    pub margin: f64,
    /// Permutations whose probability is within guard of the maximum.
    pub argmax: Vec<Permutation>,
    /// Chain precedence over adjacent pairs of the given sequence.
    pub csp: CspReport,
}

/// Outcome of comparing a permutation with one transposition of it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranspositionOutcome {
    pub sigma: Permutation,
    pub swapped: Permutation,
    pub p_sigma: ProbEstimate,
    pub p_swapped: ProbEstimate,
    /// `Forward` when the smaller variable index sits at the earlier
    /// position in `sigma` (the canonical orientation); `Reversed` when the
    /// comparison applies with the two roles exchanged.
    pub orientation: Orientation,
    /// Whether the canonically oriented permutation's probability is at
    /// least the other's, within guard.
    pub holds: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Forward,
    Reversed,
}

/// Method used when the caller asked for `auto` on a sequence.
pub fn auto_seq_method(dists: &[Distribution]) -> Method {
    if dists.iter().all(|d| d.is_discrete()) {
        Method::Exact
    } else if dists.iter().all(|d| d.is_continuous()) {
        Method::Quadrature
    } else {
        Method::MonteCarlo
    }
}

fn check_perm_len(dists: &[Distribution], sigma: &Permutation) -> Result<()> {
    if sigma.len() != dists.len() {
        return Err(Error::InvalidPermutation(format!(
            "permutation over {} positions does not fit {} variables",
            sigma.len(),
            dists.len()
        )));
    }
    Ok(())
}

fn strict_ties(cfg: &EngineConfig) -> bool {
    cfg.tie_convention == TieConvention::Strict
}

/// Rejects the one combination with no faithful estimator: weak-convention
/// Monte Carlo over variables that can tie.
fn check_mc_convention(dists: &[Distribution], cfg: &EngineConfig) -> Result<()> {
    if !strict_ties(cfg) && dists.iter().any(|d| d.is_discrete()) {
        return Err(Error::MethodUnsupported(
            "monte-carlo classifies strict orderings; the weak tie convention needs the exact engine".into(),
        ));
    }
    Ok(())
}

/// `P(T_{s(1)} <= ... <= T_{s(n)})` by the requested method (`None` = auto).
pub fn perm_probability(
    dists: &[Distribution],
    sigma: &Permutation,
    method: Option<Method>,
    cfg: &EngineConfig,
) -> Result<ProbEstimate> {
    check_perm_len(dists, sigma)?;
    let method = method.unwrap_or_else(|| auto_seq_method(dists));
    match method {
        Method::Exact => {
            let ordered = ordered_atoms(dists, sigma)?;
            let p = exact::perm_prob_exact(&ordered, strict_ties(cfg));
            Ok(ProbEstimate::exact(exact::rational_to_f64(&p)))
        }
        Method::Quadrature => {
            let ordered = ordered_continuous(dists, sigma)?;
            let (value, err) = quad::ordered_event(&ordered, cfg)?;
            Ok(ProbEstimate::quadrature(value, err))
        }
        Method::MonteCarlo => {
            check_mc_convention(dists, cfg)?;
            let mut rng = cfg
                .mc_rng()
                .substream(STREAM_SPACE_PERM + sigma.lex_rank() as u64);
            let mut hits = 0u64;
            let mut draw = vec![0.0f64; dists.len()];
            for _ in 0..cfg.mc_samples {
                for (i, d) in dists.iter().enumerate() {
                    draw[i] = d.sample_one(&mut rng);
                }
                let ordered = sigma
                    .vars()
                    .windows(2)
                    .all(|w| draw[w[0]] < draw[w[1]]);
                if ordered {
                    hits += 1;
                }
            }
            Ok(ProbEstimate::monte_carlo(hits, cfg.mc_samples, cfg.seed))
        }
    }
}

fn ordered_atoms<'a>(dists: &'a [Distribution], sigma: &Permutation) -> Result<Vec<&'a [crate::dist::Atom]>> {
    sigma
        .vars()
        .iter()
        .map(|&v| {
            dists[v].atoms().ok_or_else(|| {
                Error::MethodUnsupported("exact ordering events need all-discrete variables".into())
            })
        })
        .collect()
}

fn ordered_continuous<'a>(dists: &'a [Distribution], sigma: &Permutation) -> Result<Vec<&'a Distribution>> {
    sigma
        .vars()
        .iter()
        .map(|&v| {
            let d = &dists[v];
            if d.is_continuous() {
                Ok(d)
            } else {
                Err(Error::MethodUnsupported(
                    "quadrature ordering events need all-continuous variables".into(),
                ))
            }
        })
        .collect()
}

/// The full n! permutation table, lexicographically ordered.
pub fn perm_table(
    dists: &[Distribution],
    method: Option<Method>,
    cfg: &EngineConfig,
) -> Result<PermProbTable> {
    let n = dists.len();
    if n == 0 {
        return Err(Error::InvalidParameter("permutation table needs at least one variable".into()));
    }
    if n > cfg.perm_cap {
        return Err(Error::TooManyVariables { n, cap: cfg.perm_cap });
    }
    let method = method.unwrap_or_else(|| auto_seq_method(dists));
    let perms = Permutation::all(n);
    let all_discrete = dists.iter().all(|d| d.is_discrete());
    let convention = all_discrete.then_some(cfg.tie_convention);

    let entries = match method {
        Method::Exact => perms
            .iter()
            .map(|p| {
                let ordered = ordered_atoms(dists, p)?;
                let value = exact::rational_to_f64(&exact::perm_prob_exact(&ordered, strict_ties(cfg)));
                Ok(PermEntry { perm: p.clone(), estimate: ProbEstimate::exact(value) })
            })
            .collect::<Result<Vec<_>>>()?,
        Method::Quadrature => {
            let order_refs: Vec<&Distribution> = dists.iter().collect();
            for d in &order_refs {
                if !d.is_continuous() {
                    return Err(Error::MethodUnsupported(
                        "quadrature ordering events need all-continuous variables".into(),
                    ));
                }
            }
            let results = quad_table(&order_refs, &perms, cfg)?;
            perms
                .iter()
                .zip(results)
                .map(|(p, (value, err))| PermEntry {
                    perm: p.clone(),
                    estimate: ProbEstimate::quadrature(value, err),
                })
                .collect()
        }
        Method::MonteCarlo => {
            check_mc_convention(dists, cfg)?;
            let counts = mc_joint_counts(dists, &perms, cfg);
            perms
                .iter()
                .zip(counts)
                .map(|(p, hits)| PermEntry {
                    perm: p.clone(),
                    estimate: ProbEstimate::monte_carlo(hits, cfg.mc_samples, cfg.seed),
                })
                .collect()
        }
    };

    Ok(PermProbTable { n, method, convention, entries })
}

/// Quadrature for every permutation at once: one density row per variable
/// per grid level, refined together until the worst entry converges.
fn quad_table(
    dists: &[&Distribution],
    perms: &[Permutation],
    cfg: &EngineConfig,
) -> Result<Vec<(f64, f64)>> {
    let (lo, hi) = quad::union_truncated_support(dists, cfg.trunc_quantile);
    let grid = quad::SegmentedGrid::new(lo, hi, &quad::support_breaks(dists), cfg.quad_intervals);
    let extra = 2.0 * cfg.trunc_quantile * dists.len() as f64;

    let eval_all = |mult: usize| -> Vec<f64> {
        let nodes = grid.nodes(mult);
        let rows: Vec<Vec<f64>> =
            dists.iter().map(|d| nodes.iter().map(|&t| d.pdf(t)).collect()).collect();
        perms
            .iter()
            .map(|p| {
                let ordered: Vec<&[f64]> = p.vars().iter().map(|&v| rows[v].as_slice()).collect();
                quad::ordered_event_rows(&ordered, &nodes)
            })
            .collect()
    };

    let base_total = grid.total_intervals(1);
    let mut mult = 1usize;
    let mut coarse = eval_all(mult);
    loop {
        let fine = eval_all(2 * mult);
        let mut results = Vec::with_capacity(perms.len());
        let mut worst = 0.0f64;
        for (c, f) in coarse.iter().zip(&fine) {
            let delta = (f - c).abs() / 3.0;
            let value = (f + (f - c) / 3.0).clamp(0.0, 1.0);
            let err = delta + extra;
            worst = worst.max(err);
            results.push((value, err));
        }
        if worst <= cfg.quad_tol {
            return Ok(results);
        }
        if 2 * mult * base_total >= cfg.quad_max_intervals {
            return Err(Error::Nonconvergence {
                err: worst,
                tol: cfg.quad_tol,
                intervals: 2 * mult * base_total,
            });
        }
        mult *= 2;
        coarse = fine;
    }
}

/// One joint sample pass classified into strict ordering events by
/// lexicographic rank. Draws that tie anywhere match no strict event and
/// are dropped (probability zero for continuous variables).
fn mc_joint_counts(dists: &[Distribution], perms: &[Permutation], cfg: &EngineConfig) -> Vec<u64> {
    let n = dists.len();
    let base = cfg.mc_rng();
    let mut streams: Vec<crate::rng::Rng> =
        (0..n).map(|i| base.substream(STREAM_SPACE_JOINT + i as u64)).collect();
    let mut counts = vec![0u64; perms.len()];
    let mut values = vec![0.0f64; n];
    let mut order: Vec<usize> = (0..n).collect();
    for _ in 0..cfg.mc_samples {
        for i in 0..n {
            values[i] = dists[i].sample_one(&mut streams[i]);
        }
        order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
        let strict = order.windows(2).all(|w| values[w[0]] < values[w[1]]);
        if strict {
            counts[lex_rank_of(&order)] += 1;
        }
    }
    counts
}

fn lex_rank_of(perm0: &[usize]) -> usize {
    let n = perm0.len();
    let mut rank = 0;
    for i in 0..n {
        let smaller = perm0[i + 1..].iter().filter(|&&x| x < perm0[i]).count();
        rank += smaller * factorial(n - 1 - i);
    }
    rank
}

/// Pairwise precedence verdict for variables `i` and `j` (zero-based),
/// drawing Monte Carlo streams from a per-pair index so loops over pairs
/// stay independent.
fn pair_sp_verdict(
    dists: &[Distribution],
    i: usize,
    j: usize,
    method: Option<Method>,
    cfg: &EngineConfig,
) -> Result<PairSpVerdict> {
    let (p21, p12) = pairwise_sp_with_stream(&dists[i], &dists[j], method, cfg, (i * dists.len() + j) as u64)?;
    let verdict = verdict_from_pair(&dists[i], &dists[j], &p21, &p12, cfg);
    Ok(PairSpVerdict {
        first: i + 1,
        first_name: dists[i].name().to_string(),
        second: j + 1,
        second_name: dists[j].name().to_string(),
        p_second_ge_first: p21,
        p_first_ge_second: p12,
        verdict,
    })
}

/// Same decision rule as [`pairwise::check_sp`], reusing already-computed
/// probabilities.
fn verdict_from_pair(
    d1: &Distribution,
    d2: &Distribution,
    p21: &ProbEstimate,
    p12: &ProbEstimate,
    cfg: &EngineConfig,
) -> OrderVerdict {
    if d1.same_law(d2) {
        return OrderVerdict {
            relation: pairwise::Relation::Sp,
            direction: Direction::Equal,
            margin: 0.0,
            diagnostics: vec![],
        };
    }
    let ties_possible = d1.is_discrete() && d2.is_discrete();
    let margin = if ties_possible { (p21.value - p12.value).abs() } else { (p21.value - 0.5).abs() };
    let err = p21.err.max(p12.err);
    let direction = if err == 0.0 && p21.value == p12.value {
        Direction::Equal
    } else if margin < cfg.guard(err) {
        Direction::Indeterminate
    } else if p21.value > p12.value {
        Direction::T1LeT2
    } else {
        Direction::T2LeT1
    };
    OrderVerdict { relation: pairwise::Relation::Sp, direction, margin, diagnostics: vec![] }
}

/// `sp_pair` with Monte Carlo draws taken from the pair's own substream.
fn pairwise_sp_with_stream(
    d1: &Distribution,
    d2: &Distribution,
    method: Option<Method>,
    cfg: &EngineConfig,
    pair_index: u64,
) -> Result<(ProbEstimate, ProbEstimate)> {
    let method = method.unwrap_or_else(|| pairwise::auto_pair_method(d1, d2));
    if method != Method::MonteCarlo {
        return pairwise::sp_pair(d1, d2, Some(method), cfg);
    }
    let mut rng = cfg.mc_rng().substream(STREAM_SPACE_PAIR + 1 + pair_index);
    let mut ge = 0u64;
    let mut le = 0u64;
    for _ in 0..cfg.mc_samples {
        let t1 = d1.sample_one(&mut rng);
        let t2 = d2.sample_one(&mut rng);
        if t2 >= t1 {
            ge += 1;
        }
        if t1 >= t2 {
            le += 1;
        }
    }
    Ok((
        ProbEstimate::monte_carlo(ge, cfg.mc_samples, cfg.seed),
        ProbEstimate::monte_carlo(le, cfg.mc_samples, cfg.seed),
    ))
}

/// Chain precedence: pairwise precedence over each adjacent pair of the
/// sequence as given.
pub fn check_csp(
    dists: &[Distribution],
    method: Option<Method>,
    cfg: &EngineConfig,
) -> Result<CspReport> {
    let mut pairs = Vec::with_capacity(dists.len().saturating_sub(1));
    for i in 0..dists.len().saturating_sub(1) {
        pairs.push(pair_sp_verdict(dists, i, i + 1, method, cfg)?);
    }
    Ok(CspReport { holds: chain_holds(&pairs), pairs })
}

pub(crate) fn chain_holds(pairs: &[PairSpVerdict]) -> Holds {
    let mut indeterminate = false;
    for p in pairs {
        match p.verdict.direction {
            Direction::T1LeT2 | Direction::Equal => {}
            Direction::Indeterminate => indeterminate = true,
            Direction::T2LeT1 | Direction::Incomparable => return Holds::No,
        }
    }
    if indeterminate {
        Holds::Indeterminate
    } else {
        Holds::Yes
    }
}

/// Sequential precedence: does the identity ordering event carry maximal
/// probability among all n! permutation events?
pub fn check_ssp(
    dists: &[Distribution],
    method: Option<Method>,
    cfg: &EngineConfig,
) -> Result<SspReport> {
    let table = perm_table(dists, method, cfg)?;
    let identity = &table.entries[0];
    debug_assert_eq!(identity.perm, Permutation::identity(dists.len()));

    let best_rival = table.entries[1..]
        .iter()
        .max_by(|a, b| a.estimate.value.partial_cmp(&b.estimate.value).unwrap());
    let (margin, ssp_holds) = match best_rival {
        None => (0.0, Holds::Yes),
        Some(rival) => {
            let margin = identity.estimate.value - rival.estimate.value;
            let guard = cfg.guard(identity.estimate.err + rival.estimate.err);
            let holds = if margin >= guard {
                Holds::Yes
            } else if margin <= -guard {
                Holds::No
            } else {
                Holds::Indeterminate
            };
            (margin, holds)
        }
    };

    let max_entry = table
        .entries
        .iter()
        .max_by(|a, b| a.estimate.value.partial_cmp(&b.estimate.value).unwrap())
        .expect("table is nonempty");
    let argmax: Vec<Permutation> = table
        .entries
        .iter()
        .filter(|e| {
            max_entry.estimate.value - e.estimate.value
                <= cfg.guard(e.estimate.err + max_entry.estimate.err)
        })
        .map(|e| e.perm.clone())
        .collect();

    let csp = check_csp(dists, method, cfg)?;
    Ok(SspReport { table, ssp_holds, margin, argmax, csp })
}

/// Compares `P_sigma` with the probability of `sigma` after exchanging the
/// variables at two positions (zero-based). The canonical orientation has
/// the smaller variable index at the earlier position; when the caller
/// passes the reversed arrangement the comparison is applied with the
/// roles exchanged and flagged as such.
pub fn transposition_compare(
    dists: &[Distribution],
    sigma: &Permutation,
    pos_a: usize,
    pos_b: usize,
    method: Option<Method>,
    cfg: &EngineConfig,
) -> Result<TranspositionOutcome> {
    check_perm_len(dists, sigma)?;
    let n = sigma.len();
    if pos_a >= pos_b || pos_b >= n {
        return Err(Error::InvalidParameter(format!(
            "transposition positions must satisfy a < b < n, got ({pos_a}, {pos_b}) with n = {n}"
        )));
    }
    let swapped = sigma.swap_positions(pos_a, pos_b);
    let p_sigma = perm_probability(dists, sigma, method, cfg)?;
    let p_swapped = perm_probability(dists, &swapped, method, cfg)?;

    let orientation = if sigma.var_at(pos_a) < sigma.var_at(pos_b) {
        Orientation::Forward
    } else {
        Orientation::Reversed
    };
    let guard = cfg.guard(p_sigma.err + p_swapped.err);
    let holds = match orientation {
        Orientation::Forward => p_sigma.value >= p_swapped.value - guard,
        Orientation::Reversed => p_swapped.value >= p_sigma.value - guard,
    };
    Ok(TranspositionOutcome { sigma: sigma.clone(), swapped, p_sigma, p_swapped, orientation, holds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::EngineConfig;
    use crate::dist::Distribution;

    fn cfg() -> EngineConfig {
        EngineConfig::default()
    }

    fn exponentials(rates: &[f64]) -> Vec<Distribution> {
        rates
            .iter()
            .enumerate()
            .map(|(i, &r)| Distribution::exponential(r).unwrap().with_name(format!("T{}", i + 1)))
            .collect()
    }

    fn blyth() -> Vec<Distribution> {
        vec![
            Distribution::discrete(vec![(3.0, 1.0)]).unwrap().with_name("T1"),
            Distribution::discrete(vec![(1.0, 0.4), (4.0, 0.6)]).unwrap().with_name("T2"),
            Distribution::discrete(vec![(2.0, 0.6), (5.0, 0.4)]).unwrap().with_name("T3"),
        ]
    }

    /// Closed form for exponential ordering events: the first variable to
    /// fail among the remaining ones has odds proportional to its rate.
    fn exp_event_prob(rates: &[f64], sigma: &Permutation) -> f64 {
        let mut p = 1.0;
        for k in 0..sigma.len() {
            let total: f64 = sigma.vars()[k..].iter().map(|&v| rates[v]).sum();
            p *= rates[sigma.var_at(k)] / total;
        }
        p
    }

    #[test]
    fn permutation_basics() {
        let id = Permutation::identity(3);
        assert_eq!(format!("{id}"), "(1,2,3)");
        assert_eq!(id.lex_rank(), 0);

        let p = Permutation::from_one_based(&[3, 1, 2]).unwrap();
        assert_eq!(p.vars(), &[2, 0, 1]);
        assert_eq!(format!("{p}"), "(3,1,2)");

        assert!(Permutation::from_one_based(&[1, 1, 2]).is_err());
        assert!(Permutation::from_one_based(&[0, 1, 2]).is_err());
        assert!(Permutation::from_one_based(&[1, 2, 4]).is_err());

        let all = Permutation::all(3);
        assert_eq!(all.len(), 6);
        for (i, p) in all.iter().enumerate() {
            assert_eq!(p.lex_rank(), i);
        }
        assert_eq!(format!("{}", all[1]), "(1,3,2)");
    }

    #[test]
    fn permutation_serde_is_one_based() {
        let p = Permutation::from_one_based(&[3, 1, 2]).unwrap();
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(json, "[3,1,2]");
        let back: Permutation = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn exponential_identity_event_is_one_third() {
        let dists = exponentials(&[3.0, 2.0, 1.0]);
        let id = Permutation::identity(3);
        let p = perm_probability(&dists, &id, Some(Method::Quadrature), &cfg()).unwrap();
        assert!((p.value - 1.0 / 3.0).abs() < 1e-6 / 3.0, "p={} err={}", p.value, p.err);
    }

    #[test]
    fn iid_continuous_events_are_uniform() {
        let dists = exponentials(&[1.0, 1.0, 1.0]);
        for sigma in Permutation::all(3) {
            let p = perm_probability(&dists, &sigma, None, &cfg()).unwrap();
            assert!((p.value - 1.0 / 6.0).abs() < 1e-7, "{sigma}: {}", p.value);
        }
    }

    #[test]
    fn blyth_312_event() {
        let dists = blyth();
        let sigma = Permutation::from_one_based(&[3, 1, 2]).unwrap();
        let p = perm_probability(&dists, &sigma, None, &cfg()).unwrap();
        assert_eq!(p.value, 0.36);
        let weak_cfg = EngineConfig { tie_convention: TieConvention::Weak, ..cfg() };
        let pw = perm_probability(&dists, &sigma, None, &weak_cfg).unwrap();
        assert_eq!(pw.value, 0.36);
    }

    #[test]
    fn exponential_table_matches_closed_form() {
        let rates = [3.0, 2.0, 1.0];
        let dists = exponentials(&rates);
        let table = perm_table(&dists, Some(Method::Quadrature), &cfg()).unwrap();
        let expected = [1.0 / 3.0, 1.0 / 6.0, 1.0 / 4.0, 1.0 / 12.0, 1.0 / 10.0, 1.0 / 15.0];
        for (entry, want) in table.entries.iter().zip(expected) {
            let got = entry.estimate.value;
            assert!(
                ((got - want) / want).abs() < 1e-6,
                "{}: got {got}, want {want}",
                entry.perm
            );
            let oracle = exp_event_prob(&rates, &entry.perm);
            assert!((oracle - want).abs() < 1e-15);
        }
        assert!((table.sum() - 1.0).abs() < 1e-6);
        assert_eq!(table.convention, None);
    }

    #[test]
    fn blyth_strict_table() {
        let dists = blyth();
        let table = perm_table(&dists, None, &cfg()).unwrap();
        let by_perm = |s: &[usize]| {
            table.get(&Permutation::from_one_based(s).unwrap()).estimate.value
        };
        assert_eq!(by_perm(&[1, 2, 3]), 0.24);
        assert_eq!(by_perm(&[2, 1, 3]), 0.16);
        assert_eq!(by_perm(&[2, 3, 1]), 0.24);
        assert_eq!(by_perm(&[3, 1, 2]), 0.36);
        assert_eq!(by_perm(&[1, 3, 2]), 0.0);
        assert_eq!(by_perm(&[3, 2, 1]), 0.0);
        assert_eq!(table.sum(), 1.0);
        assert_eq!(table.convention, Some(TieConvention::Strict));

        // pairwise marginals from the table reproduce the pairwise
        // precedence probabilities
        let p_1_before_2: f64 = table
            .entries
            .iter()
            .filter(|e| {
                let pos1 = e.perm.vars().iter().position(|&v| v == 0).unwrap();
                let pos2 = e.perm.vars().iter().position(|&v| v == 1).unwrap();
                pos1 < pos2
            })
            .map(|e| e.estimate.value)
            .sum();
        assert!((p_1_before_2 - 0.6).abs() < 1e-15);
    }

    #[test]
    fn weak_table_can_exceed_one_with_shared_atoms() {
        let dists = vec![
            Distribution::discrete(vec![(1.0, 0.5), (2.0, 0.5)]).unwrap().with_name("A"),
            Distribution::discrete(vec![(1.0, 0.5), (2.0, 0.5)]).unwrap().with_name("B"),
        ];
        let weak_cfg = EngineConfig { tie_convention: TieConvention::Weak, ..cfg() };
        let weak = perm_table(&dists, None, &weak_cfg).unwrap();
        assert!(weak.sum() > 1.0);
        let strict = perm_table(&dists, None, &cfg()).unwrap();
        assert!(strict.sum() < 1.0);
    }

    #[test]
    fn table_cap_is_enforced() {
        let dists = exponentials(&[1.0; 9]);
        assert!(matches!(
            perm_table(&dists, None, &cfg()),
            Err(Error::TooManyVariables { n: 9, cap: 8 })
        ));
    }

    #[test]
    fn mc_table_sums_to_one_for_continuous() {
        let dists = exponentials(&[3.0, 2.0, 1.0]);
        let mc_cfg = EngineConfig { mc_samples: 100_000, seed: 5, ..cfg() };
        let table = perm_table(&dists, Some(Method::MonteCarlo), &mc_cfg).unwrap();
        assert!((table.sum() - 1.0).abs() < 1e-12);
        for entry in &table.entries {
            let want = exp_event_prob(&[3.0, 2.0, 1.0], &entry.perm);
            assert!(entry.estimate.covers(want), "{}: {} vs {want}", entry.perm, entry.estimate.value);
        }
    }

    #[test]
    fn mc_weak_discrete_is_rejected() {
        let dists = blyth();
        let weak_cfg = EngineConfig { tie_convention: TieConvention::Weak, ..cfg() };
        assert!(perm_table(&dists, Some(Method::MonteCarlo), &weak_cfg).is_err());
    }

    #[test]
    fn n2_reduces_to_pairwise_precedence() {
        let d = exponentials(&[2.0, 1.0]);
        let id = Permutation::identity(2);
        let p = perm_probability(&d, &id, Some(Method::Quadrature), &cfg()).unwrap();
        let sp = pairwise::sp_probability(&d[0], &d[1], Some(Method::Quadrature), &cfg()).unwrap();
        assert!((p.value - sp.value).abs() < 1e-9, "perm {} vs sp {}", p.value, sp.value);
    }

    #[test]
    fn ssp_exponential_chain() {
        let dists = exponentials(&[3.0, 2.0, 1.0]);
        let report = check_ssp(&dists, None, &cfg()).unwrap();
        assert_eq!(report.ssp_holds, Holds::Yes);
        assert_eq!(report.argmax, vec![Permutation::identity(3)]);
        assert!((report.margin - (1.0 / 3.0 - 1.0 / 4.0)).abs() < 1e-6);
        assert_eq!(report.csp.holds, Holds::Yes);
    }

    #[test]
    fn ssp_iid_is_indeterminate() {
        let dists = exponentials(&[1.0, 1.0, 1.0]);
        let report = check_ssp(&dists, None, &cfg()).unwrap();
        assert_eq!(report.ssp_holds, Holds::Indeterminate);
        assert_eq!(report.argmax.len(), 6);
    }

    #[test]
    fn ssp_blyth_fails_with_312_argmax() {
        let dists = blyth();
        let report = check_ssp(&dists, None, &cfg()).unwrap();
        assert_eq!(report.ssp_holds, Holds::No);
        assert_eq!(report.argmax, vec![Permutation::from_one_based(&[3, 1, 2]).unwrap()]);
        assert!((report.margin - (0.24 - 0.36)).abs() < 1e-15);
        // the chain holds even though precedence is not transitive here
        assert_eq!(report.csp.holds, Holds::Yes);
    }

    #[test]
    fn transposition_forward_and_reversed() {
        let dists = exponentials(&[3.0, 2.0, 1.0]);
        let id = Permutation::identity(3);
        let out = transposition_compare(&dists, &id, 0, 1, None, &cfg()).unwrap();
        assert_eq!(out.orientation, Orientation::Forward);
        assert!(out.holds);
        assert!((out.p_sigma.value - 1.0 / 3.0).abs() < 1e-6);
        assert!((out.p_swapped.value - 1.0 / 4.0).abs() < 1e-6);

        // sigma = (1,3,2), swapping the last two positions restores the
        // identity; the smaller index sits later, so orientation reverses
        let sigma = Permutation::from_one_based(&[1, 3, 2]).unwrap();
        let out = transposition_compare(&dists, &sigma, 1, 2, None, &cfg()).unwrap();
        assert_eq!(out.orientation, Orientation::Reversed);
        assert!(out.holds);
        assert!((out.p_sigma.value - 1.0 / 6.0).abs() < 1e-6);
        assert!((out.p_swapped.value - 1.0 / 3.0).abs() < 1e-6);

        // i.i.d.: both events carry the same probability
        let iid = exponentials(&[1.0, 1.0, 1.0]);
        let out = transposition_compare(&iid, &id, 0, 2, None, &cfg()).unwrap();
        assert!(out.holds);
        assert!((out.p_sigma.value - out.p_swapped.value).abs() < 1e-7);
    }

    #[test]
    fn exact_table_matches_brute_force_enumeration() {
        // brute force: enumerate the whole product space of atom tuples
        // and accumulate the mass of tuples satisfying the event
        fn brute(dists: &[Distribution], sigma: &Permutation, strict: bool) -> f64 {
            use crate::exact::{decimal_rational, rational_to_f64};
            let atom_lists: Vec<&[crate::dist::Atom]> =
                dists.iter().map(|d| d.atoms().unwrap()).collect();
            let mut total = decimal_rational(0.0);
            let n = dists.len();
            let mut idx = vec![0usize; n];
            'outer: loop {
                let tuple: Vec<f64> = (0..n).map(|i| atom_lists[i][idx[i]].value).collect();
                let ok = sigma.vars().windows(2).all(|w| {
                    if strict {
                        tuple[w[0]] < tuple[w[1]]
                    } else {
                        tuple[w[0]] <= tuple[w[1]]
                    }
                });
                if ok {
                    let mut mass = decimal_rational(1.0);
                    for i in 0..n {
                        mass *= decimal_rational(atom_lists[i][idx[i]].mass);
                    }
                    total += mass;
                }
                for i in 0..n {
                    idx[i] += 1;
                    if idx[i] < atom_lists[i].len() {
                        continue 'outer;
                    }
                    idx[i] = 0;
                }
                break;
            }
            rational_to_f64(&total)
        }

        let dists = vec![
            Distribution::discrete(vec![(1.0, 0.2), (2.0, 0.3), (4.0, 0.5)]).unwrap(),
            Distribution::discrete(vec![(1.0, 0.7), (3.0, 0.3)]).unwrap(),
            Distribution::discrete(vec![(2.0, 0.25), (3.0, 0.25), (5.0, 0.5)]).unwrap(),
        ];
        for convention in [TieConvention::Strict, TieConvention::Weak] {
            let c = EngineConfig { tie_convention: convention, ..cfg() };
            for sigma in Permutation::all(3) {
                let engine = perm_probability(&dists, &sigma, None, &c).unwrap().value;
                let oracle = brute(&dists, &sigma, convention == TieConvention::Strict);
                assert_eq!(engine, oracle, "{sigma} under {convention:?}");
            }
        }
    }
}
