//! Numerical audits of the relations between the orders, and a randomized
//! counterexample search.
//!
//! Each audit takes a concrete instance, certifies the claim's hypothesis
//! where it has one (a likelihood-ratio chain, a hazard-rate relation, an
//! established sequential-precedence target), then tests the claimed
//! conclusion numerically. A `no` verdict always carries witnesses with
//! both probabilities, and the report embeds the variable specs, so every
//! finding can be reproduced from the report alone.

use serde::{Deserialize, Serialize};

use crate::config::{EngineConfig, Method};
use crate::dist::{DistSpec, Distribution};
use crate::error::Error;
use crate::estimate::ProbEstimate;
use crate::pairwise::{check_hr, check_lr, sp_pair, Direction};
use crate::rng::Rng;
use crate::sequence::{check_ssp, factorial, transposition_compare, Permutation};
use crate::Result;

/// Substream index space for the counterexample search.
const STREAM_SPACE_SEARCH: u64 = 1 << 42;
/// Substream index space for transposition sampling inside audits.
const STREAM_SPACE_AUDIT: u64 = 1 << 43;

/// The auditable claims.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClaimId {
    /// A likelihood-ratio chain makes every forward transposition of an
    /// ordering event at least as probable as its swap.
    #[serde(rename = "lemma-2.1")]
    PairSwap,
    /// A likelihood-ratio chain implies sequential precedence.
    #[serde(rename = "theorem-2.1")]
    LrChainImpliesSsp,
    /// Sequential precedence implies pairwise precedence for every pair
    /// along the target ordering.
    #[serde(rename = "theorem-2.2")]
    SspImpliesPairwiseSp,
    /// Sequential precedence implies chain precedence over adjacent pairs.
    #[serde(rename = "corollary-2.1")]
    SspImpliesCsp,
    /// For three variables, a hazard-rate relation between the last two
    /// makes the identity event at least as probable as the final-pair swap.
    #[serde(rename = "example-2.1")]
    FinalPairHr,
    /// Pairwise precedence admits no directed cycle on the instance.
    #[serde(rename = "sp-transitivity")]
    SpTransitivity,
}

impl ClaimId {
    pub const ALL: [ClaimId; 6] = [
        ClaimId::PairSwap,
        ClaimId::LrChainImpliesSsp,
        ClaimId::SspImpliesPairwiseSp,
        ClaimId::SspImpliesCsp,
        ClaimId::FinalPairHr,
        ClaimId::SpTransitivity,
    ];
}

impl std::fmt::Display for ClaimId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ClaimId::PairSwap => "lemma-2.1",
            ClaimId::LrChainImpliesSsp => "theorem-2.1",
            ClaimId::SspImpliesPairwiseSp => "theorem-2.2",
            ClaimId::SspImpliesCsp => "corollary-2.1",
            ClaimId::FinalPairHr => "example-2.1",
            ClaimId::SpTransitivity => "sp-transitivity",
        })
    }
}

impl std::str::FromStr for ClaimId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ClaimId::ALL
            .into_iter()
            .find(|c| c.to_string() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown claim id '{s}'")))
    }
}

/// Three-valued audit outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Holds {
    Yes,
    No,
    Indeterminate,
}

/// A numeric witness attached to a `no` verdict (or a found cycle).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Witness {
    /// Pairwise precedence failed where the claim required it.
    SpViolation {
        first: String,
        second: String,
        p_second_ge_first: ProbEstimate,
        p_first_ge_second: ProbEstimate,
    },
    /// A forward transposition came out less probable than its swap.
    TranspositionViolation {
        sigma: Permutation,
        swapped: Permutation,
        p_sigma: ProbEstimate,
        p_swapped: ProbEstimate,
    },
    /// A rival permutation event beat the claimed target.
    SspViolation {
        target: Permutation,
        rival: Permutation,
        p_target: ProbEstimate,
        p_rival: ProbEstimate,
    },
    /// A directed precedence cycle, edge probabilities included.
    SpCycle { names: Vec<String>, edges: Vec<CycleEdge> },
}

/// One edge of a precedence cycle: `first` precedes `second`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleEdge {
    pub first: String,
    pub second: String,
    pub p_second_ge_first: ProbEstimate,
    pub p_first_ge_second: ProbEstimate,
}

/// Outcome of one audit on one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub claim: ClaimId,
    /// The instance, reproducible as a config `variables` array.
    pub variables: Vec<DistSpec>,
    pub holds: Holds,
    /// How many conclusions were tested (transpositions, pairs, rivals).
    pub checked: u64,
    pub witnesses: Vec<Witness>,
    pub detail: String,
}

/// Runs one claim audit on the given variables.
pub fn audit_claim(
    claim: ClaimId,
    dists: &[Distribution],
    method: Option<Method>,
    cfg: &EngineConfig,
) -> Result<AuditReport> {
    match claim {
        ClaimId::PairSwap => audit_pair_swap(dists, method, cfg),
        ClaimId::LrChainImpliesSsp => audit_lr_chain_ssp(dists, method, cfg),
        ClaimId::SspImpliesPairwiseSp => audit_ssp_implies_sp(dists, method, cfg, false),
        ClaimId::SspImpliesCsp => audit_ssp_implies_sp(dists, method, cfg, true),
        ClaimId::FinalPairHr => audit_final_pair_hr(dists, method, cfg),
        ClaimId::SpTransitivity => audit_sp_transitivity(dists, method, cfg),
    }
}

fn specs(dists: &[Distribution]) -> Vec<DistSpec> {
    dists.iter().map(|d| d.to_spec()).collect()
}

/// Certifies `T1 <=lr T2 <=lr ... <=lr Tn` over adjacent pairs.
fn certify_lr_chain(dists: &[Distribution], cfg: &EngineConfig) -> Result<()> {
    for i in 0..dists.len() - 1 {
        let v = check_lr(&dists[i], &dists[i + 1], cfg)?;
        if !matches!(v.direction, Direction::T1LeT2 | Direction::Equal) {
            return Err(Error::PreconditionNotEstablished(format!(
                "likelihood-ratio chain not certified: {} vs {} came out {:?}",
                dists[i].name(),
                dists[i + 1].name(),
                v.direction
            )));
        }
    }
    Ok(())
}

fn audit_pair_swap(
    dists: &[Distribution],
    method: Option<Method>,
    cfg: &EngineConfig,
) -> Result<AuditReport> {
    let n = dists.len();
    if n < 2 {
        return Err(Error::InvalidParameter("pair-swap audit needs at least two variables".into()));
    }
    certify_lr_chain(dists, cfg)?;

    let pairs_per_perm = n * (n - 1) / 2;
    let total = factorial(n) as u64 * pairs_per_perm as u64;
    let exhaustive = total <= cfg.audit_budget as u64;

    let mut witnesses = Vec::new();
    let mut checked = 0u64;
    let mut run_case = |sigma: &Permutation, a: usize, b: usize| -> Result<()> {
        // canonical orientation: smaller variable index at the earlier slot
        let (sigma, a, b) = if sigma.var_at(a) < sigma.var_at(b) {
            (sigma.clone(), a, b)
        } else {
            (sigma.swap_positions(a, b), a, b)
        };
        let out = transposition_compare(dists, &sigma, a, b, method, cfg)?;
        checked += 1;
        if !out.holds {
            witnesses.push(Witness::TranspositionViolation {
                sigma: out.sigma,
                swapped: out.swapped,
                p_sigma: out.p_sigma,
                p_swapped: out.p_swapped,
            });
        }
        Ok(())
    };

    if exhaustive {
        for sigma in Permutation::all(n) {
            for a in 0..n - 1 {
                for b in a + 1..n {
                    run_case(&sigma, a, b)?;
                }
            }
        }
    } else {
        let mut rng = cfg.mc_rng().substream(STREAM_SPACE_AUDIT);
        let all = Permutation::all(n);
        for _ in 0..cfg.audit_budget {
            let sigma = &all[rng.next_below(all.len() as u64) as usize];
            let a = rng.next_below((n - 1) as u64) as usize;
            let b = a + 1 + rng.next_below((n - a - 1) as u64) as usize;
            run_case(sigma, a, b)?;
        }
    }

    let holds = if witnesses.is_empty() { Holds::Yes } else { Holds::No };
    let detail = format!(
        "{} transposition comparisons ({}), {} violations",
        checked,
        if exhaustive { "exhaustive" } else { "sampled" },
        witnesses.len()
    );
    Ok(AuditReport { claim: ClaimId::PairSwap, variables: specs(dists), holds, checked, witnesses, detail })
}

fn audit_lr_chain_ssp(
    dists: &[Distribution],
    method: Option<Method>,
    cfg: &EngineConfig,
) -> Result<AuditReport> {
    certify_lr_chain(dists, cfg)?;
    let report = check_ssp(dists, method, cfg)?;
    let mut witnesses = Vec::new();
    if report.ssp_holds == Holds::No {
        let identity = Permutation::identity(dists.len());
        let rival = report.argmax[0].clone();
        witnesses.push(Witness::SspViolation {
            p_target: report.table.get(&identity).estimate,
            p_rival: report.table.get(&rival).estimate,
            target: identity,
            rival,
        });
    }
    let detail = format!(
        "lr chain certified; identity event margin over best rival = {:.3e}",
        report.margin
    );
    Ok(AuditReport {
        claim: ClaimId::LrChainImpliesSsp,
        variables: specs(dists),
        holds: report.ssp_holds,
        checked: report.table.entries.len() as u64 - 1,
        witnesses,
        detail,
    })
}

/// Establishes the sequential-precedence target (the argmax permutation),
/// then verifies pairwise precedence along it — every pair for the
/// pairwise-sp claim, adjacent pairs only for the chain claim.
fn audit_ssp_implies_sp(
    dists: &[Distribution],
    method: Option<Method>,
    cfg: &EngineConfig,
    adjacent_only: bool,
) -> Result<AuditReport> {
    let claim = if adjacent_only { ClaimId::SspImpliesCsp } else { ClaimId::SspImpliesPairwiseSp };
    let report = check_ssp(dists, method, cfg)?;
    if report.argmax.len() != 1 {
        return Ok(AuditReport {
            claim,
            variables: specs(dists),
            holds: Holds::Indeterminate,
            checked: 0,
            witnesses: vec![],
            detail: format!(
                "sequential-precedence target not unique ({} permutations tie within guard)",
                report.argmax.len()
            ),
        });
    }
    let target = report.argmax[0].clone();

    let mut witnesses = Vec::new();
    let mut indeterminate = 0u64;
    let mut checked = 0u64;
    let n = dists.len();
    for i in 0..n - 1 {
        let js: Vec<usize> = if adjacent_only { vec![i + 1] } else { (i + 1..n).collect() };
        for j in js {
            let earlier = &dists[target.var_at(i)];
            let later = &dists[target.var_at(j)];
            let (p_le, p_ge) = sp_pair(earlier, later, method, cfg)?;
            checked += 1;
            let margin = (p_le.value - p_ge.value).abs();
            let guard = cfg.guard(p_le.err.max(p_ge.err));
            if margin < guard && !(p_le.err == 0.0 && p_le.value == p_ge.value) {
                indeterminate += 1;
            } else if p_le.value < p_ge.value {
                witnesses.push(Witness::SpViolation {
                    first: earlier.name().to_string(),
                    second: later.name().to_string(),
                    p_second_ge_first: p_le,
                    p_first_ge_second: p_ge,
                });
            }
        }
    }

    let holds = if !witnesses.is_empty() {
        Holds::No
    } else if indeterminate > 0 {
        Holds::Indeterminate
    } else {
        Holds::Yes
    };
    let detail = format!(
        "target {} established; {} {} pairs checked, {} violations, {} indeterminate",
        target,
        checked,
        if adjacent_only { "adjacent" } else { "ordered" },
        witnesses.len(),
        indeterminate
    );
    Ok(AuditReport { claim, variables: specs(dists), holds, checked, witnesses, detail })
}

fn audit_final_pair_hr(
    dists: &[Distribution],
    method: Option<Method>,
    cfg: &EngineConfig,
) -> Result<AuditReport> {
    let n = dists.len();
    if n != 3 && !cfg.hr_swap_any_n {
        return Err(Error::PreconditionNotEstablished(format!(
            "final-pair hazard audit is defined for 3 variables (got {n}); enable the any-n probe to experiment"
        )));
    }
    if n < 2 {
        return Err(Error::InvalidParameter("final-pair audit needs at least two variables".into()));
    }
    let v = check_hr(&dists[n - 2], &dists[n - 1], cfg)?;
    if !matches!(v.direction, Direction::T1LeT2 | Direction::Equal) {
        return Err(Error::PreconditionNotEstablished(format!(
            "hazard-rate relation between {} and {} not certified (came out {:?})",
            dists[n - 2].name(),
            dists[n - 1].name(),
            v.direction
        )));
    }

    let identity = Permutation::identity(n);
    let out = transposition_compare(dists, &identity, n - 2, n - 1, method, cfg)?;
    let mut witnesses = Vec::new();
    if !out.holds {
        witnesses.push(Witness::TranspositionViolation {
            sigma: out.sigma.clone(),
            swapped: out.swapped.clone(),
            p_sigma: out.p_sigma,
            p_swapped: out.p_swapped,
        });
    }
    let detail = format!(
        "hazard relation certified; P{} = {:.6} vs P{} = {:.6}",
        out.sigma, out.p_sigma.value, out.swapped, out.p_swapped.value
    );
    Ok(AuditReport {
        claim: ClaimId::FinalPairHr,
        variables: specs(dists),
        holds: if out.holds { Holds::Yes } else { Holds::No },
        checked: 1,
        witnesses,
        detail,
    })
}

fn audit_sp_transitivity(
    dists: &[Distribution],
    method: Option<Method>,
    cfg: &EngineConfig,
) -> Result<AuditReport> {
    let n = dists.len();
    if n < 3 {
        return Err(Error::InvalidParameter("a precedence cycle needs at least three variables".into()));
    }

    // strict precedence digraph with the probabilities on each edge
    let mut edge_probs = vec![vec![None; n]; n];
    let mut adj = vec![Vec::new(); n];
    let mut indeterminate = 0u64;
    let mut checked = 0u64;
    for i in 0..n {
        for j in i + 1..n {
            let (p_ji, p_ij) = sp_pair(&dists[i], &dists[j], method, cfg)?;
            checked += 1;
            let margin = (p_ji.value - p_ij.value).abs();
            let guard = cfg.guard(p_ji.err.max(p_ij.err));
            if dists[i].same_law(&dists[j]) || (p_ji.err == 0.0 && p_ji.value == p_ij.value) {
                continue;
            }
            if margin < guard {
                indeterminate += 1;
            } else if p_ji.value > p_ij.value {
                adj[i].push(j);
                edge_probs[i][j] = Some((p_ji, p_ij));
            } else {
                adj[j].push(i);
                edge_probs[j][i] = Some((p_ij, p_ji));
            }
        }
    }

    let witnesses = match find_cycle(&adj) {
        Some(cycle) => {
            let names: Vec<String> = cycle
                .iter()
                .chain(std::iter::once(&cycle[0]))
                .map(|&v| dists[v].name().to_string())
                .collect();
            let edges = cycle
                .iter()
                .zip(cycle.iter().cycle().skip(1))
                .map(|(&a, &b)| {
                    let (p_ba, p_ab) = edge_probs[a][b].expect("edge on cycle");
                    CycleEdge {
                        first: dists[a].name().to_string(),
                        second: dists[b].name().to_string(),
                        p_second_ge_first: p_ba,
                        p_first_ge_second: p_ab,
                    }
                })
                .collect();
            vec![Witness::SpCycle { names, edges }]
        }
        None => vec![],
    };

    let holds = if !witnesses.is_empty() {
        Holds::No
    } else if indeterminate > 0 {
        Holds::Indeterminate
    } else {
        Holds::Yes
    };
    let detail = format!(
        "{checked} pairs compared, {indeterminate} indeterminate, cycle {}",
        if holds == Holds::No { "found" } else { "not found" }
    );
    Ok(AuditReport { claim: ClaimId::SpTransitivity, variables: specs(dists), holds, checked, witnesses, detail })
}

/// First directed cycle in a small digraph, as a vertex list.
fn find_cycle(adj: &[Vec<usize>]) -> Option<Vec<usize>> {
    #[derive(Clone, Copy, PartialEq)]
    enum State {
        New,
        Active,
        Done,
    }
    fn dfs(v: usize, adj: &[Vec<usize>], state: &mut [State], stack: &mut Vec<usize>) -> Option<Vec<usize>> {
        state[v] = State::Active;
        stack.push(v);
        for &w in &adj[v] {
            match state[w] {
                State::Active => {
                    let start = stack.iter().position(|&x| x == w).unwrap();
                    return Some(stack[start..].to_vec());
                }
                State::New => {
                    if let Some(c) = dfs(w, adj, state, stack) {
                        return Some(c);
                    }
                }
                State::Done => {}
            }
        }
        stack.pop();
        state[v] = State::Done;
        None
    }

    let mut state = vec![State::New; adj.len()];
    let mut stack = Vec::new();
    for v in 0..adj.len() {
        if state[v] == State::New {
            if let Some(c) = dfs(v, adj, &mut state, &mut stack) {
                return Some(c);
            }
        }
    }
    None
}

/// Random instance families for the counterexample search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InstanceSpace {
    /// Independent discrete variables with up to `max_atoms` atoms on the
    /// integer grid `1..=max_value` and a random mass split.
    DiscreteAtoms { vars: usize, max_atoms: usize, max_value: usize },
    /// Exponential chains with rates sorted decreasing (a likelihood-ratio
    /// chain by construction). Equal bounds give an i.i.d. instance.
    ExponentialChain { vars: usize, rate_min: f64, rate_max: f64 },
    /// Weibull chains with one common shape and scales sorted increasing
    /// (likelihood-ratio ordered for any common shape).
    WeibullChain { vars: usize, shape_min: f64, shape_max: f64, scale_min: f64, scale_max: f64 },
}

impl InstanceSpace {
    pub fn vars(&self) -> usize {
        match *self {
            InstanceSpace::DiscreteAtoms { vars, .. }
            | InstanceSpace::ExponentialChain { vars, .. }
            | InstanceSpace::WeibullChain { vars, .. } => vars,
        }
    }

    pub fn generate(&self, rng: &mut Rng) -> Result<Vec<Distribution>> {
        match *self {
            InstanceSpace::DiscreteAtoms { vars, max_atoms, max_value } => {
                if max_atoms == 0 || max_value < max_atoms {
                    return Err(Error::InvalidParameter(
                        "discrete space needs max_atoms >= 1 and max_value >= max_atoms".into(),
                    ));
                }
                (0..vars)
                    .map(|i| {
                        let k = 1 + rng.next_below(max_atoms as u64) as usize;
                        let mut values: Vec<usize> = (1..=max_value).collect();
                        for pick in 0..k {
                            let j = pick + rng.next_below((max_value - pick) as u64) as usize;
                            values.swap(pick, j);
                        }
                        let mut chosen: Vec<f64> = values[..k].iter().map(|&v| v as f64).collect();
                        chosen.sort_by(|a, b| a.partial_cmp(b).unwrap());

                        let weights: Vec<f64> = (0..k).map(|_| -rng.next_unit().ln()).collect();
                        let total: f64 = weights.iter().sum();
                        let mut masses: Vec<f64> = weights.iter().map(|w| w / total).collect();
                        let head: f64 = masses[..k - 1].iter().sum();
                        masses[k - 1] = 1.0 - head;
                        let atoms = chosen.into_iter().zip(masses).collect();
                        Ok(Distribution::discrete(atoms)?.with_name(format!("T{}", i + 1)))
                    })
                    .collect()
            }
            InstanceSpace::ExponentialChain { vars, rate_min, rate_max } => {
                if !(rate_min > 0.0 && rate_max >= rate_min) {
                    return Err(Error::InvalidParameter("exponential space needs 0 < rate_min <= rate_max".into()));
                }
                let mut rates: Vec<f64> =
                    (0..vars).map(|_| rate_min + (rate_max - rate_min) * rng.next_unit()).collect();
                rates.sort_by(|a, b| b.partial_cmp(a).unwrap());
                rates
                    .into_iter()
                    .enumerate()
                    .map(|(i, r)| Ok(Distribution::exponential(r)?.with_name(format!("T{}", i + 1))))
                    .collect()
            }
            InstanceSpace::WeibullChain { vars, shape_min, shape_max, scale_min, scale_max } => {
                if !(shape_min > 0.0 && shape_max >= shape_min && scale_min > 0.0 && scale_max >= scale_min) {
                    return Err(Error::InvalidParameter("weibull space needs positive ordered bounds".into()));
                }
                let shape = shape_min + (shape_max - shape_min) * rng.next_unit();
                let mut scales: Vec<f64> =
                    (0..vars).map(|_| scale_min + (scale_max - scale_min) * rng.next_unit()).collect();
                scales.sort_by(|a, b| a.partial_cmp(b).unwrap());
                scales
                    .into_iter()
                    .enumerate()
                    .map(|(i, s)| Ok(Distribution::weibull(shape, s)?.with_name(format!("T{}", i + 1))))
                    .collect()
            }
        }
    }
}

/// Result of a counterexample search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub claim: ClaimId,
    pub space: InstanceSpace,
    pub budget: u64,
    pub seed: u64,
    /// Instances actually audited (instances failing the claim's
    /// precondition are generated, skipped and counted separately).
    pub checked: u64,
    pub skipped: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub found: Option<AuditReport>,
}

/// Draws instances from the space and audits each until a violation
/// appears or the budget runs out. Fully reproducible from the seed.
pub fn search_counterexample(
    claim: ClaimId,
    space: &InstanceSpace,
    budget: u64,
    seed: u64,
    cfg: &EngineConfig,
) -> Result<SearchOutcome> {
    let base = Rng::new(seed, 0);
    let mut checked = 0u64;
    let mut skipped = 0u64;
    for iteration in 0..budget {
        let mut rng = base.substream(STREAM_SPACE_SEARCH + iteration);
        let dists = space.generate(&mut rng)?;
        match audit_claim(claim, &dists, None, cfg) {
            Ok(report) => {
                checked += 1;
                if report.holds == Holds::No {
                    return Ok(SearchOutcome {
                        claim,
                        space: space.clone(),
                        budget,
                        seed,
                        checked,
                        skipped,
                        found: Some(report),
                    });
                }
            }
            // instance did not satisfy the claim's hypothesis
            Err(Error::PreconditionNotEstablished(_)) => skipped += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(SearchOutcome { claim, space: space.clone(), budget, seed, checked, skipped, found: None })
}
