//! The four pairwise stochastic orders and the precedence probability.
//!
//! * likelihood ratio (lr): `f2/f1` nondecreasing over the union of
//!   supports;
//! * hazard rate (hr): `sf2/sf1` nondecreasing, equivalently pointwise
//!   hazard dominance for continuous variables (both routes implemented,
//!   verdicts cross-checked);
//! * usual stochastic (st): pointwise survival dominance;
//! * stochastic precedence (sp): `P(T2 >= T1)` versus `P(T1 >= T2)`.
//!
//! Monotonicity and dominance are decided on a grid over the union of the
//! truncated supports, with a small slack absorbing floating-point noise.
//! Ratio comparisons run in log space; points where one density vanishes
//! are tracked symbolically (ratio 0 or +infinity) so a support edge can
//! never be confused with a large finite ratio.

use serde::{Deserialize, Serialize};

use crate::config::{EngineConfig, Method};
use crate::dist::{Distribution, Family, Kind};
use crate::error::Error;
use crate::estimate::ProbEstimate;
use crate::exact;
use crate::quad;
use crate::Result;

/// Which pairwise order a verdict talks about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    Lr,
    Hr,
    St,
    Sp,
}

/// Outcome direction of a pairwise comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    /// The first variable precedes the second (T1 <= T2 in the order).
    #[serde(rename = "t1<=t2")]
    T1LeT2,
    /// The second variable precedes the first.
    #[serde(rename = "t2<=t1")]
    T2LeT1,
    #[serde(rename = "equal")]
    Equal,
    /// Neither direction holds.
    #[serde(rename = "incomparable")]
    Incomparable,
    /// The margin is inside the numerical guard; no call is safe.
    #[serde(rename = "indeterminate")]
    Indeterminate,
}

/// A grid point witnessing a violation, with its magnitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridWitness {
    pub t: f64,
    pub violation: f64,
}

/// Verdict of a pairwise order check.
///
/// `margin` measures how decisively the verdict holds: for directional
/// verdicts it is the largest violation of the opposite direction, for
/// `Equal` the largest deviation from exact equality, for `Incomparable`
/// the smaller of the two directional violations, and for sp the
/// probability gap. lr/hr margins are in log-ratio units, st margins in
/// survival-difference units, sp margins in probability units; violations
/// at a support edge (infinite ratio) are capped at 1e6.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderVerdict {
    pub relation: Relation,
    pub direction: Direction,
    pub margin: f64,
    pub diagnostics: Vec<GridWitness>,
}

/// Cap for violations arising from a zero density or survival (the ratio
/// jumps to 0 or infinity); keeps every reported margin finite.
const EDGE_VIOLATION: f64 = 1e6;

/// Values at or below this floor count as zero in ratio classification.
/// Densities heading into the subnormal range quantize so coarsely that
/// their logarithms jump around; everything below the floor is a dead tail
/// for every family here, so it is treated as off-support.
const ZERO_FLOOR: f64 = 1e-300;

/// Ratio value tracked symbolically around support edges.
#[derive(Debug, Clone, Copy, PartialEq)]
enum ExtLog {
    NegInf,
    Finite(f64),
    PosInf,
}

fn ext_log_ratio(num: f64, den: f64) -> Option<ExtLog> {
    match (num > ZERO_FLOOR, den > ZERO_FLOOR) {
        (false, false) => None,
        (true, false) => Some(ExtLog::PosInf),
        (false, true) => Some(ExtLog::NegInf),
        (true, true) => {
            if num.is_infinite() && den.is_infinite() {
                None
            } else if num.is_infinite() {
                Some(ExtLog::PosInf)
            } else if den.is_infinite() {
                Some(ExtLog::NegInf)
            } else {
                Some(ExtLog::Finite(num.ln() - den.ln()))
            }
        }
    }
}

#[derive(Debug, Default)]
struct ViolationScan {
    /// Worst violation of "nondecreasing" (a step down).
    inc: f64,
    /// Worst violation of "nonincreasing" (a step up).
    dec: f64,
    inc_witness: Option<GridWitness>,
    dec_witness: Option<GridWitness>,
    valid_points: usize,
}

impl ViolationScan {
    fn bump_inc(&mut self, t: f64, magnitude: f64) {
        if magnitude > self.inc {
            self.inc = magnitude;
            self.inc_witness = Some(GridWitness { t, violation: magnitude });
        }
    }

    fn bump_dec(&mut self, t: f64, magnitude: f64) {
        if magnitude > self.dec {
            self.dec = magnitude;
            self.dec_witness = Some(GridWitness { t, violation: magnitude });
        }
    }
}

/// Scans consecutive valid ratio points for monotonicity violations.
fn scan_ratio(points: &[(f64, Option<ExtLog>)]) -> ViolationScan {
    let mut scan = ViolationScan::default();
    let mut prev: Option<(f64, ExtLog)> = None;
    for &(t, value) in points {
        let Some(value) = value else { continue };
        scan.valid_points += 1;
        if let Some((_, p)) = prev {
            use ExtLog::*;
            match (p, value) {
                (Finite(a), Finite(b)) => {
                    if b < a {
                        scan.bump_inc(t, a - b);
                    }
                    if b > a {
                        scan.bump_dec(t, b - a);
                    }
                }
                (PosInf, Finite(_)) | (Finite(_), NegInf) | (PosInf, NegInf) => {
                    scan.bump_inc(t, EDGE_VIOLATION);
                }
                (NegInf, Finite(_)) | (Finite(_), PosInf) | (NegInf, PosInf) => {
                    scan.bump_dec(t, EDGE_VIOLATION);
                }
                (PosInf, PosInf) | (NegInf, NegInf) => {}
            }
        }
        prev = Some((t, value));
    }
    scan
}

/// Scans pointwise values for dominance violations: `inc` collects
/// violations of "v1 <= v2", `dec` of "v2 <= v1", with slack scaled to the
/// local magnitude.
fn scan_dominance(points: &[(f64, Option<(f64, f64)>)], slack: f64) -> ViolationScan {
    let mut scan = ViolationScan::default();
    for &(t, pair) in points {
        let Some((v1, v2)) = pair else { continue };
        scan.valid_points += 1;
        let tol = slack * v1.abs().max(v2.abs()).max(1.0);
        if v1 - v2 > tol {
            scan.bump_inc(t, v1 - v2);
        }
        if v2 - v1 > tol {
            scan.bump_dec(t, v2 - v1);
        }
    }
    scan
}

/// Assembles a verdict from violation magnitudes: `inc_violation` rules out
/// the T1<=T2 reading, `dec_violation` the T2<=T1 reading.
fn verdict_from_scan(relation: Relation, scan: ViolationScan, slack: f64) -> Result<OrderVerdict> {
    if scan.valid_points == 0 {
        return Err(Error::DegenerateSupport);
    }
    let inc_ok = scan.inc <= slack;
    let dec_ok = scan.dec <= slack;
    let (direction, margin, diagnostics) = match (inc_ok, dec_ok) {
        (true, true) => (Direction::Equal, scan.inc.max(scan.dec), vec![]),
        (true, false) => (Direction::T1LeT2, scan.dec, vec![]),
        (false, true) => (Direction::T2LeT1, scan.inc, vec![]),
        (false, false) => {
            let witnesses = [scan.inc_witness, scan.dec_witness].into_iter().flatten().collect();
            (Direction::Incomparable, scan.inc.min(scan.dec), witnesses)
        }
    };
    Ok(OrderVerdict { relation, direction, margin, diagnostics })
}

/// Grid spanning both variables: sorted atom values for a discrete pair,
/// otherwise a uniform grid over the union of truncated supports merged
/// with any atoms. A sentinel node below both supports (when finite)
/// captures the region where both survival functions are still 1.
fn comparison_grid(d1: &Distribution, d2: &Distribution, cfg: &EngineConfig) -> Vec<f64> {
    let mut nodes: Vec<f64> = match (d1.kind(), d2.kind()) {
        (Kind::Discrete(a1), Kind::Discrete(a2)) => {
            a1.iter().chain(a2.iter()).map(|a| a.value).collect()
        }
        _ => {
            let (lo, hi) = quad::union_truncated_support(&[d1, d2], cfg.trunc_quantile);
            let grid =
                quad::SegmentedGrid::new(lo, hi, &quad::support_breaks(&[d1, d2]), cfg.order_grid_points.max(2) - 1);
            let mut nodes = grid.nodes(1);
            for d in [d1, d2] {
                if let Some(atoms) = d.atoms() {
                    nodes.extend(atoms.iter().map(|a| a.value));
                }
            }
            nodes
        }
    };
    let support_lo = d1.support().0.min(d2.support().0);
    if support_lo.is_finite() {
        let span = nodes.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - support_lo;
        nodes.push(support_lo - span.abs().max(1.0) * 0.05);
    }
    nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    nodes.dedup();
    nodes
}

/// Likelihood ratio order: monotonicity of `f2/f1` over the union of
/// supports. Both variables must be of the same kind; a density ratio
/// between a discrete and a continuous variable is not defined.
pub fn check_lr(d1: &Distribution, d2: &Distribution, cfg: &EngineConfig) -> Result<OrderVerdict> {
    if d1.is_discrete() != d2.is_discrete() {
        return Err(Error::MethodUnsupported(
            "likelihood ratio order needs both variables continuous or both discrete".into(),
        ));
    }
    let grid = comparison_grid(d1, d2, cfg);
    let points: Vec<(f64, Option<ExtLog>)> =
        grid.iter().map(|&t| (t, ext_log_ratio(d2.pdf(t), d1.pdf(t)))).collect();
    verdict_from_scan(Relation::Lr, scan_ratio(&points), cfg.slack)
}

/// Hazard rate order via survival-ratio monotonicity; for continuous pairs
/// the pointwise-hazard route is computed as well and a disagreement
/// (a grid artifact) yields `Indeterminate` with both witnesses attached.
pub fn check_hr(d1: &Distribution, d2: &Distribution, cfg: &EngineConfig) -> Result<OrderVerdict> {
    let ratio = hr_ratio_verdict(d1, d2, cfg)?;
    if !(d1.is_continuous() && d2.is_continuous()) {
        return Ok(ratio);
    }
    let hazard = hr_hazard_verdict(d1, d2, cfg)?;
    if ratio.direction == hazard.direction {
        return Ok(ratio);
    }
    let mut diagnostics = ratio.diagnostics;
    diagnostics.extend(hazard.diagnostics);
    Ok(OrderVerdict {
        relation: Relation::Hr,
        direction: Direction::Indeterminate,
        margin: ratio.margin.min(hazard.margin),
        diagnostics,
    })
}

/// Survival-ratio route: `sf2/sf1` nondecreasing below the upper support
/// ends (evaluated where at least one survival is positive). Exposed so
/// the two hazard-rate routes can be cross-checked directly.
pub fn hr_ratio_verdict(
    d1: &Distribution,
    d2: &Distribution,
    cfg: &EngineConfig,
) -> Result<OrderVerdict> {
    let grid = comparison_grid(d1, d2, cfg);
    let points: Vec<(f64, Option<ExtLog>)> =
        grid.iter().map(|&t| (t, ext_log_ratio(d2.sf_precise(t), d1.sf_precise(t)))).collect();
    verdict_from_scan(Relation::Hr, scan_ratio(&points), cfg.slack)
}

/// Pointwise-hazard route for continuous pairs: T1 <= T2 iff
/// `hazard2(t) <= hazard1(t)` wherever both survivals are positive.
pub fn hr_hazard_verdict(
    d1: &Distribution,
    d2: &Distribution,
    cfg: &EngineConfig,
) -> Result<OrderVerdict> {
    let grid = comparison_grid(d1, d2, cfg);
    let points: Vec<(f64, Option<(f64, f64)>)> = grid
        .iter()
        .map(|&t| {
            let s1 = d1.sf_precise(t);
            let s2 = d2.sf_precise(t);
            if s1 > 0.0 && s2 > 0.0 {
                // dominance scan checks v1 <= v2; hazard dominance for
                // T1 <= T2 is hazard2 <= hazard1, so feed (hz2, hz1)
                (t, Some((d2.pdf(t) / s2, d1.pdf(t) / s1)))
            } else {
                (t, None)
            }
        })
        .collect();
    verdict_from_scan(Relation::Hr, scan_dominance(&points, cfg.slack), cfg.slack)
}

/// Usual stochastic order: pointwise survival dominance on a grid
/// spanning both supports.
pub fn check_st(d1: &Distribution, d2: &Distribution, cfg: &EngineConfig) -> Result<OrderVerdict> {
    let grid = comparison_grid(d1, d2, cfg);
    let points: Vec<(f64, Option<(f64, f64)>)> =
        grid.iter().map(|&t| (t, Some((d1.sf_precise(t), d2.sf_precise(t))))).collect();
    verdict_from_scan(Relation::St, scan_dominance(&points, cfg.slack), cfg.slack)
}

fn exponential_rate(d: &Distribution) -> Option<f64> {
    match d.kind() {
        Kind::Continuous(Family::Exponential { rate }) => Some(*rate),
        _ => None,
    }
}

/// Method used when the caller asked for `auto` on a pair.
pub fn auto_pair_method(d1: &Distribution, d2: &Distribution) -> Method {
    let exact_pair = (d1.is_discrete() && d2.is_discrete())
        || (exponential_rate(d1).is_some() && exponential_rate(d2).is_some());
    if exact_pair {
        Method::Exact
    } else {
        Method::Quadrature
    }
}

/// `P(T2 >= T1)` by the requested method (`None` = auto).
pub fn sp_probability(
    d1: &Distribution,
    d2: &Distribution,
    method: Option<Method>,
    cfg: &EngineConfig,
) -> Result<ProbEstimate> {
    Ok(sp_pair(d1, d2, method, cfg)?.0)
}

/// Both precedence probabilities `(P(T2 >= T1), P(T1 >= T2))`; ties
/// contribute to both sides.
pub fn sp_pair(
    d1: &Distribution,
    d2: &Distribution,
    method: Option<Method>,
    cfg: &EngineConfig,
) -> Result<(ProbEstimate, ProbEstimate)> {
    let method = method.unwrap_or_else(|| auto_pair_method(d1, d2));
    match method {
        Method::Exact => sp_exact(d1, d2),
        Method::Quadrature => sp_quadrature(d1, d2, cfg),
        Method::MonteCarlo => Ok(sp_monte_carlo(d1, d2, cfg)),
    }
}

fn sp_exact(d1: &Distribution, d2: &Distribution) -> Result<(ProbEstimate, ProbEstimate)> {
    if let (Some(a1), Some(a2)) = (d1.atoms(), d2.atoms()) {
        let (p21, p12, _) = exact::sp_pair_exact(a1, a2);
        return Ok((
            ProbEstimate::exact(exact::rational_to_f64(&p21)),
            ProbEstimate::exact(exact::rational_to_f64(&p12)),
        ));
    }
    if let (Some(r1), Some(r2)) = (exponential_rate(d1), exponential_rate(d2)) {
        // competing risks: the rate-r1 variable fails first with odds r1 : r2
        let p21 = r1 / (r1 + r2);
        return Ok((ProbEstimate::exact(p21), ProbEstimate::exact(r2 / (r1 + r2))));
    }
    Err(Error::MethodUnsupported(
        "exact precedence needs both variables discrete, or an exponential pair".into(),
    ))
}

fn sp_quadrature(d1: &Distribution, d2: &Distribution, cfg: &EngineConfig) -> Result<(ProbEstimate, ProbEstimate)> {
    match (d1.kind(), d2.kind()) {
        (Kind::Discrete(_), Kind::Discrete(_)) => Err(Error::MethodUnsupported(
            "quadrature precedence needs at least one continuous variable (use exact)".into(),
        )),
        (Kind::Continuous(_), Kind::Continuous(_)) => {
            let p21 = sp_integral(d1, d2, cfg)?;
            let p12 = sp_integral(d2, d1, cfg)?;
            Ok((p21, p12))
        }
        // a discrete factor collapses the integral to a finite sum with no
        // grid error; only cdf evaluation noise remains
        _ => {
            let p21 = sp_mixed_sum(d1, d2);
            let p12 = sp_mixed_sum(d2, d1);
            Ok((p21, p12))
        }
    }
}

/// `P(Tb >= Ta) = integral of f_b(t) F_a(t) dt` over Tb's truncated support.
fn sp_integral(da: &Distribution, db: &Distribution, cfg: &EngineConfig) -> Result<ProbEstimate> {
    let (lo, hi) = db.truncated_support(cfg.trunc_quantile);
    let grid = quad::SegmentedGrid::new(lo, hi, &quad::support_breaks(&[da, db]), cfg.quad_intervals);
    let (value, err) = quad::refine(
        |mult| {
            let nodes = grid.nodes(mult);
            let values: Vec<f64> = nodes.iter().map(|&t| db.pdf(t) * da.cdf(t)).collect();
            quad::trapezoid(&nodes, &values)
        },
        grid.total_intervals(1),
        cfg,
        2.0 * cfg.trunc_quantile,
    )?;
    Ok(ProbEstimate::quadrature(value.clamp(0.0, 1.0), err))
}

/// `P(Tb >= Ta)` when exactly one of the pair is discrete.
fn sp_mixed_sum(da: &Distribution, db: &Distribution) -> ProbEstimate {
    let value = match (da.atoms(), db.atoms()) {
        // Ta discrete: sum over its atoms of P(Tb >= x) = sf_b(x)
        (Some(atoms), None) => atoms.iter().map(|a| a.mass * db.sf_precise(a.value)).sum(),
        // Tb discrete: sum over its atoms of P(Ta <= x) = F_a(x)
        (None, Some(atoms)) => atoms.iter().map(|a| a.mass * da.cdf(a.value)).sum(),
        _ => unreachable!("mixed sum called on a non-mixed pair"),
    };
    ProbEstimate { err: 0.0, ..ProbEstimate::quadrature(value, 0.0) }
}

fn sp_monte_carlo(d1: &Distribution, d2: &Distribution, cfg: &EngineConfig) -> (ProbEstimate, ProbEstimate) {
    let mut rng = cfg.mc_rng();
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
    (
        ProbEstimate::monte_carlo(ge, cfg.mc_samples, cfg.seed),
        ProbEstimate::monte_carlo(le, cfg.mc_samples, cfg.seed),
    )
}

/// Stochastic precedence verdict: compares `P(T2 >= T1)` with
/// `P(T1 >= T2)`. For variables without ties this reduces to the 0.5
/// threshold and the margin is `|P - 0.5|`; for discrete pairs the margin
/// is `|P21 - P12|` with ties counted on both sides. The verdict is
/// `Indeterminate` when the margin is inside the error guard.
pub fn check_sp(
    d1: &Distribution,
    d2: &Distribution,
    method: Option<Method>,
    cfg: &EngineConfig,
) -> Result<OrderVerdict> {
    // identical laws are equal by symmetry, under any method
    if d1.same_law(d2) {
        return Ok(OrderVerdict {
            relation: Relation::Sp,
            direction: Direction::Equal,
            margin: 0.0,
            diagnostics: vec![],
        });
    }
    let (p21, p12) = sp_pair(d1, d2, method, cfg)?;
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
    Ok(OrderVerdict { relation: Relation::Sp, direction, margin, diagnostics: vec![] })
}
