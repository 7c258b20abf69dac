//! The random-variable abstraction: parametric continuous families and
//! finite discrete atom sets.
//!
//! A [`Distribution`] is immutable after construction and every evaluation
//! is pure, so values can be shared freely across concurrent tasks.
//!
//! Conventions:
//!
//! * the discrete cdf is right-continuous, `P(T <= t)`;
//! * `sf(t) = 1 - cdf(t)` by construction, so the pair always sums to 1;
//! * `hazard(t) = pdf(t) / sf(t)` wherever the survival function is
//!   positive (for discrete variables `pdf` means the point mass at `t`);
//! * quantiles are the smallest `t` with `cdf(t) >= p` — closed form where
//!   the family has one, otherwise bisection on a geometrically expanded
//!   bracket to 1e-12 absolute;
//! * sampling is inverse-cdf applied to a deterministic uniform stream.
//!
//! The classical definition of stochastic precedence is stated for
//! nonnegative variables; this toolkit also accepts real-valued supports
//! (normal, uniform with a < 0) since the precedence probabilities remain
//! well defined. Reports flag nothing special about them.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::rng::Rng;
use crate::special;
use crate::Result;

/// Bisection tolerance for quantiles without a closed form.
const QUANTILE_TOL: f64 = 1e-12;

/// Continuous parametric families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    Exponential { rate: f64 },
    Weibull { shape: f64, scale: f64 },
    Gamma { shape: f64, rate: f64 },
    Uniform { a: f64, b: f64 },
    Normal { mean: f64, stddev: f64 },
}

/// One point mass of a discrete distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub value: f64,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Kind {
    Continuous(Family),
    Discrete(Vec<Atom>),
}

/// An independent random variable: a validated family or atom set together
/// with its support `(l, u)` and a label for reports.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    name: String,
    kind: Kind,
    support: (f64, f64),
}

/// Which functional of the distribution to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Functional {
    Pdf,
    Cdf,
    Sf,
    Hazard,
}

/// One atom in the JSON variable config: `{"x": 1.0, "p": 0.4}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomSpec {
    pub x: f64,
    pub p: f64,
}

/// Family parameters as they appear in the JSON variable config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum FamilySpec {
    Exponential { rate: f64 },
    Weibull { shape: f64, scale: f64 },
    Gamma { shape: f64, rate: f64 },
    Uniform { a: f64, b: f64 },
    Normal { mean: f64, stddev: f64 },
    Discrete { atoms: Vec<AtomSpec> },
}

/// One entry of the config's `variables` array, e.g.
/// `{"name":"T2","family":"discrete","atoms":[{"x":1.0,"p":0.4},{"x":4.0,"p":0.6}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(flatten)]
    pub family: FamilySpec,
}

/// Builds a validated [`Distribution`] from a parsed config entry.
pub fn make_distribution(spec: &DistSpec) -> Result<Distribution> {
    let d = match &spec.family {
        FamilySpec::Exponential { rate } => Distribution::exponential(*rate)?,
        FamilySpec::Weibull { shape, scale } => Distribution::weibull(*shape, *scale)?,
        FamilySpec::Gamma { shape, rate } => Distribution::gamma(*shape, *rate)?,
        FamilySpec::Uniform { a, b } => Distribution::uniform(*a, *b)?,
        FamilySpec::Normal { mean, stddev } => Distribution::normal(*mean, *stddev)?,
        FamilySpec::Discrete { atoms } => {
            Distribution::discrete(atoms.iter().map(|a| (a.x, a.p)).collect())?
        }
    };
    Ok(match &spec.name {
        Some(n) => d.with_name(n),
        None => d,
    })
}

fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter(msg()))
    }
}

impl Distribution {
    pub fn exponential(rate: f64) -> Result<Self> {
        require(rate.is_finite() && rate > 0.0, || format!("exponential requires rate > 0, got {rate}"))?;
        Ok(Distribution {
            name: "exponential".into(),
            kind: Kind::Continuous(Family::Exponential { rate }),
            support: (0.0, f64::INFINITY),
        })
    }

    pub fn weibull(shape: f64, scale: f64) -> Result<Self> {
        require(
            shape.is_finite() && scale.is_finite() && shape > 0.0 && scale > 0.0,
            || format!("weibull requires shape > 0 and scale > 0, got shape={shape}, scale={scale}"),
        )?;
        Ok(Distribution {
            name: "weibull".into(),
            kind: Kind::Continuous(Family::Weibull { shape, scale }),
            support: (0.0, f64::INFINITY),
        })
    }

    pub fn gamma(shape: f64, rate: f64) -> Result<Self> {
        require(
            shape.is_finite() && rate.is_finite() && shape > 0.0 && rate > 0.0,
            || format!("gamma requires shape > 0 and rate > 0, got shape={shape}, rate={rate}"),
        )?;
        Ok(Distribution {
            name: "gamma".into(),
            kind: Kind::Continuous(Family::Gamma { shape, rate }),
            support: (0.0, f64::INFINITY),
        })
    }

    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        require(a.is_finite() && b.is_finite() && a < b, || format!("uniform requires a < b, got a={a}, b={b}"))?;
        Ok(Distribution {
            name: "uniform".into(),
            kind: Kind::Continuous(Family::Uniform { a, b }),
            support: (a, b),
        })
    }

    pub fn normal(mean: f64, stddev: f64) -> Result<Self> {
        require(
            mean.is_finite() && stddev.is_finite() && stddev > 0.0,
            || format!("normal requires stddev > 0, got mean={mean}, stddev={stddev}"),
        )?;
        Ok(Distribution {
            name: "normal".into(),
            kind: Kind::Continuous(Family::Normal { mean, stddev }),
            support: (f64::NEG_INFINITY, f64::INFINITY),
        })
    }

    /// Finite discrete distribution from `(value, mass)` pairs. Values must
    /// be strictly increasing, masses in (0, 1] summing to 1 within 1e-12.
    pub fn discrete(atoms: Vec<(f64, f64)>) -> Result<Self> {
        require(!atoms.is_empty(), || "discrete requires at least one atom".into())?;
        let mut total = 0.0;
        for (i, &(x, p)) in atoms.iter().enumerate() {
            require(x.is_finite(), || format!("atom value {x} is not finite"))?;
            require(p.is_finite() && p > 0.0 && p <= 1.0, || format!("atom mass {p} outside (0, 1]"))?;
            if i > 0 {
                require(x > atoms[i - 1].0, || {
                    format!("atom values must be strictly increasing, got {} after {}", x, atoms[i - 1].0)
                })?;
            }
            total += p;
        }
        require((total - 1.0).abs() <= 1e-12, || format!("atom masses sum to {total}, expected 1"))?;
        let support = (atoms[0].0, atoms[atoms.len() - 1].0);
        Ok(Distribution {
            name: "discrete".into(),
            kind: Kind::Discrete(atoms.into_iter().map(|(value, mass)| Atom { value, mass }).collect()),
            support,
        })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> &Kind {
        &self.kind
    }

    /// The support `(l, u)`; either endpoint may be infinite.
    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    pub fn is_continuous(&self) -> bool {
        matches!(self.kind, Kind::Continuous(_))
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self.kind, Kind::Discrete(_))
    }

    pub fn atoms(&self) -> Option<&[Atom]> {
        match &self.kind {
            Kind::Discrete(a) => Some(a),
            Kind::Continuous(_) => None,
        }
    }

    /// Whether two variables follow the same law (name ignored).
    pub fn same_law(&self, other: &Distribution) -> bool {
        self.kind == other.kind
    }

    /// Config-shaped description of this variable.
    pub fn to_spec(&self) -> DistSpec {
        let family = match &self.kind {
            Kind::Continuous(Family::Exponential { rate }) => FamilySpec::Exponential { rate: *rate },
            Kind::Continuous(Family::Weibull { shape, scale }) => FamilySpec::Weibull { shape: *shape, scale: *scale },
            Kind::Continuous(Family::Gamma { shape, rate }) => FamilySpec::Gamma { shape: *shape, rate: *rate },
            Kind::Continuous(Family::Uniform { a, b }) => FamilySpec::Uniform { a: *a, b: *b },
            Kind::Continuous(Family::Normal { mean, stddev }) => FamilySpec::Normal { mean: *mean, stddev: *stddev },
            Kind::Discrete(atoms) => FamilySpec::Discrete {
                atoms: atoms.iter().map(|a| AtomSpec { x: a.value, p: a.mass }).collect(),
            },
        };
        DistSpec { name: Some(self.name.clone()), family }
    }

    /// Density for continuous variables; point mass at `t` for discrete.
    pub fn pdf(&self, t: f64) -> f64 {
        match &self.kind {
            Kind::Continuous(f) => continuous_pdf(f, t),
            Kind::Discrete(atoms) => atoms.iter().find(|a| a.value == t).map_or(0.0, |a| a.mass),
        }
    }

    /// Right-continuous cdf `P(T <= t)`.
    pub fn cdf(&self, t: f64) -> f64 {
        match &self.kind {
            Kind::Continuous(f) => continuous_cdf(f, t),
            Kind::Discrete(atoms) => atoms.iter().take_while(|a| a.value <= t).map(|a| a.mass).sum(),
        }
    }

    /// Survival function, defined as `1 - cdf(t)` so the pair sums to 1.
    pub fn sf(&self, t: f64) -> f64 {
        1.0 - self.cdf(t)
    }

    /// Hazard rate `pdf(t) / sf(t)`; errors where the survival is zero.
    pub fn hazard(&self, t: f64) -> Result<f64> {
        let s = self.sf(t);
        if s <= 0.0 {
            return Err(Error::HazardUndefined { t });
        }
        Ok(self.pdf(t) / s)
    }

    pub fn evaluate(&self, functional: Functional, t: f64) -> Result<f64> {
        match functional {
            Functional::Pdf => Ok(self.pdf(t)),
            Functional::Cdf => Ok(self.cdf(t)),
            Functional::Sf => Ok(self.sf(t)),
            Functional::Hazard => self.hazard(t),
        }
    }

    /// Smallest `t` with `cdf(t) >= p`, for `p` in (0, 1).
    pub fn quantile(&self, p: f64) -> Result<f64> {
        require(p > 0.0 && p < 1.0, || format!("quantile requires p in (0, 1), got {p}"))?;
        Ok(match &self.kind {
            Kind::Continuous(f) => continuous_quantile(f, p),
            Kind::Discrete(atoms) => {
                let mut cum = 0.0;
                for a in atoms {
                    cum += a.mass;
                    if cum >= p {
                        return Ok(a.value);
                    }
                }
                atoms[atoms.len() - 1].value
            }
        })
    }

    /// One inverse-cdf draw from the stream.
    pub fn sample_one(&self, rng: &mut Rng) -> f64 {
        let u = rng.next_unit();
        match &self.kind {
            Kind::Continuous(f) => continuous_quantile(f, u),
            Kind::Discrete(atoms) => {
                let mut cum = 0.0;
                for a in atoms {
                    cum += a.mass;
                    if cum >= u {
                        return a.value;
                    }
                }
                atoms[atoms.len() - 1].value
            }
        }
    }

    /// `count` i.i.d. draws; identical `(seed, stream)` pairs give
    /// identical sequences.
    pub fn sample(&self, rng: &mut Rng, count: usize) -> Vec<f64> {
        (0..count).map(|_| self.sample_one(rng)).collect()
    }

    /// Truncated support `[quantile(q), quantile(1-q)]` used by grids.
    pub(crate) fn truncated_support(&self, q: f64) -> (f64, f64) {
        match &self.kind {
            Kind::Discrete(_) => self.support,
            Kind::Continuous(f) => (continuous_quantile(f, q), continuous_quantile(f, 1.0 - q)),
        }
    }

    /// Survival computed per family, accurate in the far right tail where
    /// `1 - cdf` would be quantized to multiples of an ulp of 1. The order
    /// engines compare survival ratios deep into the tails, so they use
    /// this; the public [`Distribution::sf`] keeps the exact complement
    /// identity instead.
    pub(crate) fn sf_precise(&self, t: f64) -> f64 {
        match &self.kind {
            Kind::Continuous(f) => match *f {
                Family::Exponential { rate } => {
                    if t <= 0.0 {
                        1.0
                    } else {
                        (-rate * t).exp()
                    }
                }
                Family::Weibull { shape, scale } => {
                    if t <= 0.0 {
                        1.0
                    } else {
                        (-(t / scale).powf(shape)).exp()
                    }
                }
                Family::Gamma { shape, rate } => {
                    if t <= 0.0 {
                        1.0
                    } else {
                        special::reg_gamma_upper(shape, rate * t)
                    }
                }
                Family::Uniform { .. } => 1.0 - continuous_cdf(f, t),
                Family::Normal { mean, stddev } => special::std_normal_cdf((mean - t) / stddev),
            },
            Kind::Discrete(atoms) => atoms.iter().skip_while(|a| a.value <= t).map(|a| a.mass).sum(),
        }
    }
}

impl std::fmt::Display for Distribution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} ~ ", self.name)?;
        match &self.kind {
            Kind::Continuous(Family::Exponential { rate }) => write!(f, "exponential(rate={rate})"),
            Kind::Continuous(Family::Weibull { shape, scale }) => write!(f, "weibull(shape={shape}, scale={scale})"),
            Kind::Continuous(Family::Gamma { shape, rate }) => write!(f, "gamma(shape={shape}, rate={rate})"),
            Kind::Continuous(Family::Uniform { a, b }) => write!(f, "uniform({a}, {b})"),
            Kind::Continuous(Family::Normal { mean, stddev }) => write!(f, "normal(mean={mean}, sd={stddev})"),
            Kind::Discrete(atoms) => {
                write!(f, "discrete{{")?;
                for (i, a) in atoms.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "({}, {})", a.value, a.mass)?;
                }
                write!(f, "}}")
            }
        }
    }
}

fn continuous_pdf(f: &Family, t: f64) -> f64 {
    match *f {
        Family::Exponential { rate } => {
            if t < 0.0 {
                0.0
            } else {
                rate * (-rate * t).exp()
            }
        }
        Family::Weibull { shape, scale } => {
            if t < 0.0 {
                0.0
            } else if t == 0.0 {
                // limit of the density at the left edge
                if shape < 1.0 {
                    f64::INFINITY
                } else if shape == 1.0 {
                    1.0 / scale
                } else {
                    0.0
                }
            } else {
                let z = t / scale;
                (shape / scale) * z.powf(shape - 1.0) * (-z.powf(shape)).exp()
            }
        }
        Family::Gamma { shape, rate } => {
            if t < 0.0 {
                0.0
            } else if t == 0.0 {
                if shape < 1.0 {
                    f64::INFINITY
                } else if shape == 1.0 {
                    rate
                } else {
                    0.0
                }
            } else {
                ((shape - 1.0) * t.ln() + shape * rate.ln() - rate * t - special::ln_gamma(shape)).exp()
            }
        }
        Family::Uniform { a, b } => {
            if t >= a && t <= b {
                1.0 / (b - a)
            } else {
                0.0
            }
        }
        Family::Normal { mean, stddev } => special::std_normal_pdf((t - mean) / stddev) / stddev,
    }
}

fn continuous_cdf(f: &Family, t: f64) -> f64 {
    match *f {
        Family::Exponential { rate } => {
            if t <= 0.0 {
                0.0
            } else {
                -(-rate * t).exp_m1()
            }
        }
        Family::Weibull { shape, scale } => {
            if t <= 0.0 {
                0.0
            } else {
                -(-(t / scale).powf(shape)).exp_m1()
            }
        }
        Family::Gamma { shape, rate } => {
            if t <= 0.0 {
                0.0
            } else {
                special::reg_gamma_lower(shape, rate * t)
            }
        }
        Family::Uniform { a, b } => {
            if t <= a {
                0.0
            } else if t >= b {
                1.0
            } else {
                (t - a) / (b - a)
            }
        }
        Family::Normal { mean, stddev } => special::std_normal_cdf((t - mean) / stddev),
    }
}

fn continuous_quantile(f: &Family, p: f64) -> f64 {
    match *f {
        Family::Exponential { rate } => -(-p).ln_1p() / rate,
        Family::Weibull { shape, scale } => scale * (-(-p).ln_1p()).powf(1.0 / shape),
        Family::Uniform { a, b } => a + p * (b - a),
        // no convenient closed form: bisection from the mean outward
        Family::Gamma { .. } | Family::Normal { .. } => bisect_quantile(f, p),
    }
}

/// Finite anchor and step used to bracket quantiles.
fn anchor_and_step(f: &Family) -> (f64, f64) {
    match *f {
        Family::Exponential { rate } => (1.0 / rate, 1.0 / rate),
        Family::Weibull { scale, .. } => (scale, scale),
        Family::Gamma { shape, rate } => (shape / rate, (shape.sqrt() / rate).max(1.0 / rate)),
        Family::Uniform { a, b } => ((a + b) / 2.0, (b - a) / 4.0),
        Family::Normal { mean, stddev } => (mean, stddev),
    }
}

/// Bisection on a geometrically expanded bracket, 1e-12 absolute.
fn bisect_quantile(f: &Family, p: f64) -> f64 {
    let (anchor, step) = anchor_and_step(f);
    let lower_bound = match *f {
        Family::Gamma { .. } | Family::Weibull { .. } | Family::Exponential { .. } => 0.0,
        _ => f64::NEG_INFINITY,
    };

    let (mut lo, mut hi);
    if continuous_cdf(f, anchor) >= p {
        hi = anchor;
        let mut s = step;
        loop {
            lo = anchor - s;
            if lo <= lower_bound {
                lo = lower_bound;
                break;
            }
            if continuous_cdf(f, lo) < p {
                break;
            }
            s *= 2.0;
        }
    } else {
        lo = anchor;
        let mut s = step;
        loop {
            hi = anchor + s;
            if continuous_cdf(f, hi) >= p {
                break;
            }
            s *= 2.0;
        }
    }

    for _ in 0..200 {
        if hi - lo <= QUANTILE_TOL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if continuous_cdf(f, mid) >= p {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}
