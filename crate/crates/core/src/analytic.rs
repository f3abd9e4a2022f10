//! Rigorous evaluation of the explicit squarefreeness inequality
//!
//! ```text
//! 0.9999975 √(p^q n + 1) - 1.0000025 √((p^q - 1) n + 1)
//!     > 21.683 (p^q)^{23/48} n^{23/48} log(256((p^q - 1) n + 1))^{11/4}
//!       + (11/8)(3 log n + 2q log p)
//! ```
//!
//! Both sides are enclosed in intervals of MPFR floats rounded outward, so a
//! verdict is only reported when the enclosures separate. Precision doubles on
//! overlap up to [`MAX_PRECISION`].
//!
//! The base of `log` defaults to 10. The additive constants of the two
//! specialized forms equal `(11/8) · 2q · log10 p` (1.65566 and 2.62417), and
//! with base 10 the general form first holds for `(2, 2)` exactly at `2^1518`.

use std::cmp::Ordering;
use std::fmt;

use rug::float::Round;
use rug::ops::Pow;
use rug::{Float, Integer};
use serde::{Deserialize, Serialize};

use crate::config::MAX_PRECISION;
use crate::digits::PrimePower;
use crate::error::{Error, Result};

/// Lemma hypothesis: `p^q <= 99999`.
pub const MAX_MODULUS: u64 = 99_999;
pub const MIN_PRECISION: u32 = 64;

/// A rational constant `num / den`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Ratio(pub u64, pub u64);

impl Ratio {
    pub fn to_f64(self) -> f64 {
        self.0 as f64 / self.1 as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Constants {
    /// `α`, with `1 - α = 0.9999975` and `1 + α = 1.0000025`.
    pub alpha: Ratio,
    pub c_main: Ratio,
    pub exp_n: Ratio,
    pub exp_log: Ratio,
    pub log_scale: u64,
    pub c_tail: Ratio,
}

pub const CONSTANTS: Constants = Constants {
    alpha: Ratio(1, 400_000),
    c_main: Ratio(21_683, 1_000),
    exp_n: Ratio(23, 48),
    exp_log: Ratio(11, 4),
    log_scale: 256,
    c_tail: Ratio(11, 8),
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    Natural,
    #[default]
    Decimal,
    Binary,
}

impl std::str::FromStr for LogBase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "e" | "ln" | "natural" => Ok(LogBase::Natural),
            "10" | "decimal" => Ok(LogBase::Decimal),
            "2" | "binary" => Ok(LogBase::Binary),
            other => Err(Error::Hypothesis(format!("unknown log base {other:?}"))),
        }
    }
}

impl fmt::Display for LogBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LogBase::Natural => "natural",
            LogBase::Decimal => "decimal",
            LogBase::Binary => "binary",
        })
    }
}

/// Which right-hand side to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Form {
    /// The general inequality with the shared constants.
    #[default]
    General,
    /// The printed `(2, 2)` and `(3, 2)` specializations, constants verbatim.
    Specialized,
}

/// Closed interval `[lo, hi]` of MPFR floats.
#[derive(Clone, Debug, PartialEq)]
pub struct Interval {
    pub lo: Float,
    pub hi: Float,
}

fn down<T>(prec: u32, value: T) -> Float
where
    Float: rug::ops::AssignRound<T, Round = Round, Ordering = Ordering>,
{
    Float::with_val_round(prec, value, Round::Down).0
}

fn up<T>(prec: u32, value: T) -> Float
where
    Float: rug::ops::AssignRound<T, Round = Round, Ordering = Ordering>,
{
    Float::with_val_round(prec, value, Round::Up).0
}

fn min_of(values: [Float; 4]) -> Float {
    values
        .into_iter()
        .reduce(|a, b| if b < a { b } else { a })
        .expect("nonempty")
}

fn max_of(values: [Float; 4]) -> Float {
    values
        .into_iter()
        .reduce(|a, b| if b > a { b } else { a })
        .expect("nonempty")
}

impl Interval {
    pub fn integer(prec: u32, n: &Integer) -> Self {
        Interval {
            lo: down(prec, n),
            hi: up(prec, n),
        }
    }

    pub fn ratio(prec: u32, r: Ratio) -> Self {
        let num = Float::with_val(64.max(prec), r.0);
        let den = Float::with_val(64.max(prec), r.1);
        Interval {
            lo: down(prec, &num / &den),
            hi: up(prec, &num / &den),
        }
    }

    pub fn prec(&self) -> u32 {
        self.lo.prec()
    }

    pub fn add(&self, other: &Interval) -> Interval {
        let prec = self.prec();
        Interval {
            lo: down(prec, &self.lo + &other.lo),
            hi: up(prec, &self.hi + &other.hi),
        }
    }

    pub fn sub(&self, other: &Interval) -> Interval {
        let prec = self.prec();
        Interval {
            lo: down(prec, &self.lo - &other.hi),
            hi: up(prec, &self.hi - &other.lo),
        }
    }

    pub fn mul(&self, other: &Interval) -> Interval {
        let prec = self.prec();
        let pairs = [
            (&self.lo, &other.lo),
            (&self.lo, &other.hi),
            (&self.hi, &other.lo),
            (&self.hi, &other.hi),
        ];
        Interval {
            lo: min_of(pairs.map(|(a, b)| down(prec, a * b))),
            hi: max_of(pairs.map(|(a, b)| up(prec, a * b))),
        }
    }

    /// Division by a strictly positive interval.
    pub fn div_positive(&self, other: &Interval) -> Interval {
        assert!(other.lo > 0, "divisor interval must be positive");
        let prec = self.prec();
        let pairs = [
            (&self.lo, &other.lo),
            (&self.lo, &other.hi),
            (&self.hi, &other.lo),
            (&self.hi, &other.hi),
        ];
        Interval {
            lo: min_of(pairs.map(|(a, b)| down(prec, a / b))),
            hi: max_of(pairs.map(|(a, b)| up(prec, a / b))),
        }
    }

    pub fn sqrt(&self) -> Interval {
        assert!(self.lo >= 0, "sqrt of a negative interval");
        let prec = self.prec();
        Interval {
            lo: down(prec, self.lo.sqrt_ref()),
            hi: up(prec, self.hi.sqrt_ref()),
        }
    }

    pub fn log(&self, base: LogBase) -> Interval {
        assert!(self.lo > 0, "log of a nonpositive interval");
        let prec = self.prec();
        match base {
            LogBase::Natural => Interval {
                lo: down(prec, self.lo.ln_ref()),
                hi: up(prec, self.hi.ln_ref()),
            },
            LogBase::Decimal => Interval {
                lo: down(prec, self.lo.log10_ref()),
                hi: up(prec, self.hi.log10_ref()),
            },
            LogBase::Binary => Interval {
                lo: down(prec, self.lo.log2_ref()),
                hi: up(prec, self.hi.log2_ref()),
            },
        }
    }

    pub fn exp(&self) -> Interval {
        let prec = self.prec();
        Interval {
            lo: down(prec, self.lo.exp_ref()),
            hi: up(prec, self.hi.exp_ref()),
        }
    }

    /// `self^e` for `self >= 1` and `e >= 0`, where the power is increasing in both.
    pub fn pow(&self, e: &Interval) -> Interval {
        assert!(
            self.lo >= 1 && e.lo >= 0,
            "pow needs base >= 1 and exponent >= 0"
        );
        let prec = self.prec();
        Interval {
            lo: down(prec, (&self.lo).pow(&e.lo)),
            hi: up(prec, (&self.hi).pow(&e.hi)),
        }
    }

    /// `Greater` if every point exceeds `other`, `Less` if every point is
    /// below it, `None` if the enclosures overlap.
    pub fn compare(&self, other: &Interval) -> Option<Ordering> {
        if self.lo > other.hi {
            Some(Ordering::Greater)
        } else if self.hi < other.lo {
            Some(Ordering::Less)
        } else {
            None
        }
    }

    pub fn midpoint(&self) -> Float {
        let prec = self.prec();
        Float::with_val(prec, &self.lo + &self.hi) / 2u32
    }

    /// `log2` of the midpoint of a positive interval, for reporting.
    pub fn log2_f64(&self) -> f64 {
        self.midpoint().log2().to_f64()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InequalityInstance {
    pub pp: PrimePower,
    pub form: Form,
    pub log_base: LogBase,
    /// Starting precision in bits; doubled on indeterminacy.
    pub precision: u32,
}

impl InequalityInstance {
    pub fn new(pp: &PrimePower, precision: u32) -> Result<Self> {
        if pp.modulus() > &MAX_MODULUS {
            return Err(Error::Hypothesis(format!(
                "the inequality needs p^q <= {MAX_MODULUS}, got {pp} = {}",
                pp.modulus()
            )));
        }
        if !(MIN_PRECISION..=MAX_PRECISION).contains(&precision) {
            return Err(Error::Hypothesis(format!(
                "precision must lie in {MIN_PRECISION}..={MAX_PRECISION} bits, got {precision}"
            )));
        }
        Ok(InequalityInstance {
            pp: pp.clone(),
            form: Form::General,
            log_base: LogBase::default(),
            precision,
        })
    }

    pub fn with_form(mut self, form: Form) -> Result<Self> {
        if form == Form::Specialized {
            specialized_constants(&self.pp)?;
        }
        self.form = form;
        Ok(self)
    }

    pub fn with_log_base(mut self, base: LogBase) -> Self {
        self.log_base = base;
        self
    }

    fn modulus(&self) -> u64 {
        self.pp.modulus_u64().expect("bounded by MAX_MODULUS")
    }
}

/// The printed specialized constants: main coefficient, additive tail constant
/// and the linear coefficient inside the log.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SpecializedConstants {
    pub c_main: Ratio,
    pub c_tail: Ratio,
    pub log_coefficient: u64,
}

pub fn specialized_constants(pp: &PrimePower) -> Result<SpecializedConstants> {
    match (pp.p(), pp.q()) {
        (2, 2) => Ok(SpecializedConstants {
            c_main: Ratio(421_311, 10_000),
            c_tail: Ratio(165_566, 100_000),
            log_coefficient: 768,
        }),
        (3, 2) => Ok(SpecializedConstants {
            c_main: Ratio(2_604, 100),
            c_tail: Ratio(262_417, 100_000),
            log_coefficient: 2048,
        }),
        _ => Err(Error::Hypothesis(format!("no specialized form for {pp}"))),
    }
}

/// What the general form gives in place of the specialized constants:
/// `21.683 (p^q)^{23/48}` and `(11/8) · 2q · log p`.
pub fn derived_constants(pp: &PrimePower, base: LogBase) -> (f64, f64) {
    let m = pp.modulus().to_f64();
    let log_p = match base {
        LogBase::Natural => (pp.p() as f64).ln(),
        LogBase::Decimal => (pp.p() as f64).log10(),
        LogBase::Binary => (pp.p() as f64).log2(),
    };
    (
        CONSTANTS.c_main.to_f64() * m.powf(CONSTANTS.exp_n.to_f64()),
        CONSTANTS.c_tail.to_f64() * 2.0 * f64::from(pp.q()) * log_p,
    )
}

/// Enclosures of both sides at one precision.
#[derive(Clone, Debug, PartialEq)]
pub struct Sides {
    pub lhs: Interval,
    pub rhs: Interval,
}

impl Sides {
    /// `Some(true)` if `lhs > rhs` is proven, `Some(false)` if `lhs < rhs` is.
    pub fn verdict(&self) -> Option<bool> {
        self.lhs.compare(&self.rhs).map(|o| o == Ordering::Greater)
    }

    pub fn difference(&self) -> Interval {
        self.lhs.sub(&self.rhs)
    }
}

fn lhs_at(inst: &InequalityInstance, n: &Integer, prec: u32) -> Interval {
    let m = inst.modulus();
    let alpha = Interval::ratio(prec, CONSTANTS.alpha);
    let one = Interval::ratio(prec, Ratio(1, 1));
    let a = Interval::integer(prec, &(Integer::from(m * n) + 1u32)).sqrt();
    let b = Interval::integer(prec, &(Integer::from((m - 1) * n) + 1u32)).sqrt();
    one.sub(&alpha).mul(&a).sub(&one.add(&alpha).mul(&b))
}

fn rhs_at(inst: &InequalityInstance, n: &Integer, prec: u32) -> Interval {
    let m = inst.modulus();
    let base = inst.log_base;
    let nn = Interval::integer(prec, n);
    let exp_n = Interval::ratio(prec, CONSTANTS.exp_n);
    let exp_log = Interval::ratio(prec, CONSTANTS.exp_log);
    let log_n = nn.log(base);
    match inst.form {
        Form::General => {
            let inner = Integer::from((m - 1) * n) + 1u32;
            let log_term = Interval::integer(prec, &(inner * CONSTANTS.log_scale))
                .log(base)
                .pow(&exp_log);
            let scale = Interval::integer(prec, &Integer::from(m)).pow(&exp_n);
            let main = Interval::ratio(prec, CONSTANTS.c_main)
                .mul(&scale)
                .mul(&nn.pow(&exp_n))
                .mul(&log_term);
            let log_p = Interval::integer(prec, &Integer::from(inst.pp.p())).log(base);
            let tail = Interval::ratio(prec, Ratio(3, 1))
                .mul(&log_n)
                .add(&Interval::ratio(prec, Ratio(2 * u64::from(inst.pp.q()), 1)).mul(&log_p));
            main.add(&Interval::ratio(prec, CONSTANTS.c_tail).mul(&tail))
        }
        Form::Specialized => {
            let sc = specialized_constants(&inst.pp).expect("checked at construction");
            let inner = Integer::from(sc.log_coefficient * n) + 1u32;
            let log_term = Interval::integer(prec, &inner).log(base).pow(&exp_log);
            let main = Interval::ratio(prec, sc.c_main)
                .mul(&nn.pow(&exp_n))
                .mul(&log_term);
            let slope = Interval::ratio(prec, Ratio(3 * CONSTANTS.c_tail.0, CONSTANTS.c_tail.1));
            main.add(&slope.mul(&log_n))
                .add(&Interval::ratio(prec, sc.c_tail))
        }
    }
}

/// Both sides at exactly `prec` bits, without escalation.
pub fn sides_at_precision(inst: &InequalityInstance, n: &Integer, prec: u32) -> Result<Sides> {
    if *n < 1 {
        return Err(Error::Hypothesis(
            "the inequality is evaluated for n >= 1".into(),
        ));
    }
    Ok(Sides {
        lhs: lhs_at(inst, n, prec),
        rhs: rhs_at(inst, n, prec),
    })
}

/// A decided comparison and the precision it needed.
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub holds: bool,
    pub precision: u32,
    pub sides: Sides,
}

/// Both sides at `n`, doubling precision until the comparison is decided.
pub fn inequality_sides(inst: &InequalityInstance, n: &Integer) -> Result<Evaluation> {
    let mut prec = inst.precision;
    loop {
        let sides = sides_at_precision(inst, n, prec)?;
        if let Some(holds) = sides.verdict() {
            return Ok(Evaluation {
                holds,
                precision: prec,
                sides,
            });
        }
        if prec >= MAX_PRECISION {
            return Err(Error::Indeterminate(MAX_PRECISION));
        }
        prec = (prec * 2).min(MAX_PRECISION);
    }
}

/// Smallest `e` (under a monotonicity assumption) with the inequality holding
/// at `n = 2^e` but not at `2^{e-1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tau0 {
    pub exponent: u64,
    pub tau0: Integer,
    /// Grid exponents above `exponent` confirmed to hold with `lhs - rhs` increasing.
    pub grid: Vec<u64>,
    pub max_precision: u32,
}

pub const DEFAULT_EXPONENT_CAP: u64 = 1 << 16;

pub fn find_tau0(inst: &InequalityInstance, exponent_cap: u64) -> Result<Tau0> {
    let mut max_precision = inst.precision;
    let mut holds_at = |e: u64| -> Result<Evaluation> {
        let eval = inequality_sides(inst, &(Integer::from(1) << e as u32))?;
        max_precision = max_precision.max(eval.precision);
        Ok(eval)
    };
    let mut lo = 0u64;
    let mut hi = 1u64;
    while !holds_at(hi)?.holds {
        if hi >= exponent_cap {
            return Err(Error::NoCrossover(exponent_cap));
        }
        lo = hi;
        hi = (hi * 2).min(exponent_cap);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if holds_at(mid)?.holds {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mut grid: Vec<u64> = (hi..=hi + 64).collect();
    grid.extend([2 * hi, 4 * hi, 8 * hi]);
    let mut previous: Option<Interval> = None;
    for &e in &grid {
        let eval = holds_at(e)?;
        if !eval.holds {
            return Err(Error::Hypothesis(format!(
                "inequality fails again at 2^{e} after first holding at 2^{hi}"
            )));
        }
        let diff = eval.sides.difference();
        if let Some(prev) = &previous {
            if diff.lo <= prev.hi {
                return Err(Error::Hypothesis(format!(
                    "lhs - rhs is not increasing at 2^{e}"
                )));
            }
        }
        previous = Some(diff);
    }
    Ok(Tau0 {
        exponent: hi,
        tau0: Integer::from(1) << hi as u32,
        grid,
        max_precision,
    })
}

/// `ceil((e^60 - 1) / (p^q - 1))`, `5^10 p^{5q}` and their maximum with `τ0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tau1 {
    pub exp_term: Integer,
    pub power_term: Integer,
    pub tau0: Integer,
    pub tau1: Integer,
}

pub fn tau1(pp: &PrimePower, tau0: &Integer) -> Result<Tau1> {
    let denom = Integer::from(pp.modulus() - 1u32);
    let mut prec = 128;
    let exp_term = loop {
        let e60 = Interval::ratio(prec, Ratio(60, 1)).exp();
        let x = e60
            .sub(&Interval::ratio(prec, Ratio(1, 1)))
            .div_positive(&Interval::integer(prec, &denom));
        let lo = x.lo.to_integer_round(Round::Up).map(|(i, _)| i);
        let hi = x.hi.to_integer_round(Round::Up).map(|(i, _)| i);
        match (lo, hi) {
            (Some(a), Some(b)) if a == b => break a,
            _ if prec >= MAX_PRECISION => return Err(Error::Indeterminate(MAX_PRECISION)),
            _ => prec *= 2,
        }
    };
    let power_term = Integer::from(Integer::u_pow_u(5, 10)) * Integer::from(pp.modulus().pow(5u32));
    let tau1 = exp_term.clone().max(power_term.clone()).max(tau0.clone());
    Ok(Tau1 {
        exp_term,
        power_term,
        tau0: tau0.clone(),
        tau1,
    })
}

/// `((1-α)^2/(1+α) - p^q/100000.25) √n / (2 √(p^q))`, a lower bound for the
/// left side.
pub fn crude_lower_bound(pp: &PrimePower, n: &Integer, prec: u32) -> Interval {
    let one = Interval::ratio(prec, Ratio(1, 1));
    let alpha = Interval::ratio(prec, CONSTANTS.alpha);
    let m = Interval::integer(prec, pp.modulus());
    let lead = one
        .sub(&alpha)
        .mul(&one.sub(&alpha))
        .div_positive(&one.add(&alpha));
    let slack = m.div_positive(&Interval::ratio(prec, Ratio(400_001, 4)));
    let root_n = Interval::integer(prec, n).sqrt();
    let denom = Interval::ratio(prec, Ratio(2, 1)).mul(&m.sqrt());
    lead.sub(&slack).mul(&root_n).div_positive(&denom)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(p: u64, q: u32) -> InequalityInstance {
        InequalityInstance::new(&PrimePower::new(p, q).unwrap(), 256).unwrap()
    }

    fn pow(b: u64, e: u32) -> Integer {
        Integer::from(b).pow(e)
    }

    #[test]
    fn interval_encloses_known_values() {
        let x = Interval::ratio(128, Ratio(1, 3));
        assert!(x.lo < x.hi);
        let two = Interval::integer(128, &Integer::from(2));
        let r = two.sqrt();
        let sq = r.mul(&r);
        assert!(sq.lo <= 2 && sq.hi >= 2);
        let l = Interval::integer(128, &Integer::from(1000)).log(LogBase::Decimal);
        assert!(l.lo <= 3 && l.hi >= 3);
        let neg = Interval::ratio(64, Ratio(1, 1)).sub(&Interval::ratio(64, Ratio(3, 1)));
        let prod = neg.mul(&Interval::ratio(64, Ratio(5, 1)));
        assert!(prod.lo <= -10 && prod.hi >= -10);
    }

    #[test]
    fn instance_hypotheses() {
        assert!(InequalityInstance::new(&PrimePower::new(99_991, 1).unwrap(), 256).is_ok());
        assert!(InequalityInstance::new(&PrimePower::new(317, 2).unwrap(), 256).is_err());
        assert!(InequalityInstance::new(&PrimePower::new(2, 2).unwrap(), 32).is_err());
        assert!(inst(5, 2).with_form(Form::Specialized).is_err());
        assert!(inst(2, 2).with_form(Form::Specialized).is_ok());
        assert_eq!("ln".parse::<LogBase>().unwrap(), LogBase::Natural);
        assert!("7".parse::<LogBase>().is_err());
    }

    #[test]
    fn witnesses_two_squared() {
        let i = inst(2, 2);
        assert!(inequality_sides(&i, &pow(2, 1518)).unwrap().holds);
        assert!(!inequality_sides(&i, &pow(2, 1517)).unwrap().holds);
        assert!(!inequality_sides(&i, &pow(2, 100)).unwrap().holds);
        assert!(!inequality_sides(&i, &pow(10, 6)).unwrap().holds);
        assert!(inequality_sides(&i, &Integer::new()).is_err());
    }

    #[test]
    fn specialized_witnesses() {
        for (p, n) in [(2, pow(2, 1518)), (3, pow(3, 956))] {
            let i = inst(p, 2).with_form(Form::Specialized).unwrap();
            assert!(inequality_sides(&i, &n).unwrap().holds);
            assert!(!inequality_sides(&i, &pow(2, 100)).unwrap().holds);
        }
    }

    #[test]
    fn precision_stability() {
        for (p, n) in [
            (2, pow(2, 1518)),
            (3, pow(3, 956)),
            (2, pow(2, 100)),
            (3, pow(2, 100)),
        ] {
            let base = inst(p, 2);
            let doubled = InequalityInstance {
                precision: 512,
                ..base.clone()
            };
            assert_eq!(
                inequality_sides(&base, &n).unwrap().holds,
                inequality_sides(&doubled, &n).unwrap().holds
            );
        }
    }

    /// Independent check in the log2 domain with plain floats: at `n = 2^e`,
    /// `lhs ≈ 2^{e/2} (c1 √M - c2 √(M-1))` and the tail term is negligible.
    fn float_holds(m: f64, q: f64, p: f64, e: f64) -> bool {
        let (c1, c2) = (0.9999975f64, 1.0000025f64);
        let lhs = e / 2.0 + (c1 * m.sqrt() - c2 * (m - 1.0).sqrt()).log2();
        let log_inner = (256.0 * (m - 1.0)).log10() + e * 2f64.log10();
        let main = 21.683f64.log2() + (23.0 / 48.0) * (m.log2() + e) + 2.75 * log_inner.log2();
        let tail = 1.375 * (3.0 * e * 2f64.log10() + 2.0 * q * p.log10());
        let rhs = main + (1.0 + tail / 2f64.powf(main)).log2();
        lhs > rhs
    }

    #[test]
    fn tau0_matches_float_oracle() {
        for (p, q) in [(2u64, 2u32), (3, 2), (2, 1), (5, 2)] {
            let i = inst(p, q);
            let found = find_tau0(&i, DEFAULT_EXPONENT_CAP).unwrap();
            let m = (p as f64).powi(q as i32);
            let oracle = (1..4000u64)
                .find(|&e| float_holds(m, q as f64, p as f64, e as f64))
                .unwrap();
            assert_eq!(found.exponent, oracle, "{p}^{q}");
            assert_eq!(found.tau0, Integer::from(1) << found.exponent as u32);
        }
        assert_eq!(
            find_tau0(&inst(2, 2), DEFAULT_EXPONENT_CAP)
                .unwrap()
                .exponent,
            1518
        );
    }

    #[test]
    fn tau0_precision_stable() {
        let low = InequalityInstance::new(&PrimePower::new(2, 2).unwrap(), 64).unwrap();
        assert_eq!(
            find_tau0(&low, DEFAULT_EXPONENT_CAP).unwrap().exponent,
            find_tau0(&inst(2, 2), DEFAULT_EXPONENT_CAP)
                .unwrap()
                .exponent
        );
        assert!(matches!(
            find_tau0(&inst(2, 2), 512),
            Err(Error::NoCrossover(512))
        ));
    }

    #[test]
    fn tau1_terms() {
        let pp = PrimePower::new(2, 2).unwrap();
        let t = tau1(&pp, &pow(2, 1518)).unwrap();
        // e^60 = 114200738981568428366295718.3...
        assert_eq!(
            t.exp_term,
            Integer::from_str_radix("38066912993856142788765240", 10).unwrap()
        );
        assert_eq!(t.power_term, 10_000_000_000u64);
        assert_eq!(t.tau1, pow(2, 1518));
        let t = tau1(&PrimePower::new(3, 2).unwrap(), &Integer::new()).unwrap();
        assert_eq!(t.power_term, pow(15, 10));
        assert_eq!(t.tau1, t.exp_term);
    }

    #[test]
    fn crude_bound_below_lhs() {
        for (p, q) in [(2u64, 2u32), (3, 2), (7, 3), (99_991, 1)] {
            let pp = PrimePower::new(p, q).unwrap();
            let i = InequalityInstance::new(&pp, 256).unwrap();
            for e in [1u32, 10, 100, 1000] {
                let n = Integer::from(1) << e;
                let lhs = sides_at_precision(&i, &n, 256).unwrap().lhs;
                let bound = crude_lower_bound(&pp, &n, 256);
                assert!(bound.hi <= lhs.lo, "{pp} 2^{e}");
            }
        }
    }

    #[test]
    fn derived_versus_printed_constants() {
        let pp = PrimePower::new(2, 2).unwrap();
        let (c_main, c_tail) = derived_constants(&pp, LogBase::Decimal);
        assert!((c_main - 42.1311).abs() < 1e-3);
        assert!((c_tail - 1.65566).abs() < 1e-5);
        let pp = PrimePower::new(3, 2).unwrap();
        let (c_main, c_tail) = derived_constants(&pp, LogBase::Decimal);
        assert!((c_tail - 2.62417).abs() < 1e-5);
        // The printed 26.04 is not 21.683 * 3^{46/48} (about 62.14).
        assert!((c_main - 62.138).abs() < 1e-2);
        let (_, natural_tail) =
            derived_constants(&PrimePower::new(2, 2).unwrap(), LogBase::Natural);
        assert!((natural_tail - 3.8123).abs() < 1e-3);
    }
}
