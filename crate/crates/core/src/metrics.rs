//! Closed-form subpacketization and DoF of this scheme and of the baselines
//! it is compared against. All counts are exact big integers or rationals.

use std::fmt;

use num_bigint::BigUint;
use num_integer::{binomial, Integer};
use num_rational::{BigRational, Ratio};
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeId {
    /// Circular-shift scheme with linear subpacketization.
    New,
    MultiServer,
    AlphaBeta,
    AntennaGrouping,
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SchemeId::New => "new",
            SchemeId::MultiServer => "multi-server",
            SchemeId::AlphaBeta => "alpha-beta",
            SchemeId::AntennaGrouping => "antenna-grouping",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Applicability {
    pub applicable: bool,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemeMetrics {
    pub scheme: SchemeId,
    pub users: u64,
    pub gain: u64,
    pub antennas: u64,
    pub alpha: Option<u64>,
    pub beta: Option<u64>,
    /// `None` when the scheme does not apply to the parameters.
    pub subpacketization: Option<BigRational>,
    pub dof: Option<u64>,
    /// Worst-case delivery time in normalized file units, where known.
    pub delivery_time: Option<Ratio<u64>>,
    /// `K(1 - t/K) / T*`.
    pub sum_rate: Option<Ratio<u64>>,
    pub applicability: Applicability,
}

impl SchemeMetrics {
    /// Subpacketization as an integer, if defined and integral.
    pub fn subpacketization_integer(&self) -> Option<BigUint> {
        self.subpacketization
            .as_ref()
            .filter(|r| r.is_integer())
            .and_then(|r| r.to_integer().to_biguint())
    }
}

fn big(n: u64) -> BigUint {
    BigUint::from(n)
}

fn choose(n: u64, k: u64) -> BigUint {
    if k > n {
        BigUint::zero()
    } else {
        binomial(big(n), big(k))
    }
}

fn factorial(n: u64) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * big(i))
}

fn as_rational(n: BigUint) -> BigRational {
    BigRational::from_integer(n.into())
}

/// Subpacketization `K(t + L)` and DoF `t + L` of the circular-shift scheme.
pub fn metrics_new(users: u64, gain: u64, antennas: u64) -> Result<SchemeMetrics> {
    if gain < 1 || antennas < 1 {
        return Err(Error::InfeasibleParams("t >= 1 and L >= 1 required".into()));
    }
    if gain > antennas {
        return Err(Error::InfeasibleParams(format!("t <= L violated: t={gain} exceeds L={antennas}")));
    }
    if gain + antennas > users {
        return Err(Error::InfeasibleParams(format!(
            "t + L <= K violated: t+L={} exceeds K={users}",
            gain + antennas
        )));
    }
    let served = gain + antennas;
    // S = K(K - t) intervals of 1/(K(t + L)) file units each
    let delivery_time = Ratio::new(users * (users - gain), users * served);
    let sum_rate = Ratio::from_integer(users - gain) / delivery_time;
    Ok(SchemeMetrics {
        scheme: SchemeId::New,
        users,
        gain,
        antennas,
        alpha: None,
        beta: None,
        subpacketization: Some(as_rational(big(users) * big(served))),
        dof: Some(served),
        delivery_time: Some(delivery_time),
        sum_rate: Some(sum_rate),
        applicability: Applicability {
            applicable: true,
            reason: "L >= t and t + L <= K".into(),
        },
    })
}

/// Multi-server baseline: `C(K, t) C(K - t - 1, L - 1)`.
pub fn metrics_multiserver(users: u64, gain: u64, antennas: u64) -> Result<SchemeMetrics> {
    if users <= gain {
        return Err(Error::InapplicableParams(format!("K > t required (K={users}, t={gain})")));
    }
    if antennas < 1 {
        return Err(Error::InapplicableParams("L >= 1 required".into()));
    }
    let value = choose(users, gain) * choose(users - gain - 1, antennas - 1);
    let applicable = !value.is_zero();
    Ok(SchemeMetrics {
        scheme: SchemeId::MultiServer,
        users,
        gain,
        antennas,
        alpha: None,
        beta: None,
        subpacketization: applicable.then(|| as_rational(value)),
        dof: applicable.then_some(gain + antennas),
        delivery_time: None,
        sum_rate: None,
        applicability: Applicability {
            applicable,
            reason: if applicable {
                "K > t".into()
            } else {
                format!("t + L = {} exceeds K = {users}", gain + antennas)
            },
        },
    })
}

/// The `alpha`/`beta` variant:
/// `(a-1)! / ((d-1)! (b-1)! ((t+b)!)^(d-1)) * C(K, t) C(K - t - 1, L - 1)`
/// with `d = (t + a)/(t + b)`, which must be a positive integer.
pub fn metrics_alpha_beta(users: u64, gain: u64, antennas: u64, alpha: u64, beta: u64) -> Result<SchemeMetrics> {
    if alpha < 1 || beta < 1 {
        return Err(Error::InapplicableParams("alpha >= 1 and beta >= 1 required".into()));
    }
    let (delta, rem) = (gain + alpha).div_rem(&(gain + beta));
    if rem != 0 {
        return Err(Error::InapplicableParams(format!(
            "delta = (t+alpha)/(t+beta) = {}/{} is not an integer",
            gain + alpha,
            gain + beta
        )));
    }
    let base = metrics_multiserver(users, gain, antennas)?;
    let numerator = factorial(alpha - 1);
    let mut denominator = factorial(delta - 1) * factorial(beta - 1);
    let tb = factorial(gain + beta);
    for _ in 1..delta {
        denominator *= &tb;
    }
    let factor = BigRational::new(numerator.into(), denominator.into());
    let subpacketization = base.subpacketization.map(|ms| ms * factor);
    Ok(SchemeMetrics {
        scheme: SchemeId::AlphaBeta,
        alpha: Some(alpha),
        beta: Some(beta),
        subpacketization,
        dof: None,
        applicability: Applicability {
            applicable: base.applicability.applicable,
            reason: format!("delta = {delta}"),
        },
        ..base
    })
}

/// Antenna-grouping baseline, `C(K/L, t/L)` when both ratios are integers.
pub fn metrics_antenna_grouping(users: u64, gain: u64, antennas: u64) -> SchemeMetrics {
    let integral = antennas > 0 && users.is_multiple_of(antennas) && gain.is_multiple_of(antennas) && gain > 0;
    let (subpacketization, dof, reason) = if integral {
        (
            Some(as_rational(choose(users / antennas, gain / antennas))),
            Some(gain + antennas),
            format!("K/L = {} and t/L = {} are integers", users / antennas, gain / antennas),
        )
    } else {
        (
            None,
            None,
            format!(
                "K/L = {users}/{antennas} or t/L = {gain}/{antennas} is not an integer; the grouping scheme loses DoF here"
            ),
        )
    };
    SchemeMetrics {
        scheme: SchemeId::AntennaGrouping,
        users,
        gain,
        antennas,
        alpha: None,
        beta: None,
        subpacketization,
        dof,
        delivery_time: None,
        sum_rate: None,
        applicability: Applicability {
            applicable: integral,
            reason,
        },
    }
}

/// One line of the new-vs-multi-server comparison.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComparisonRow {
    pub users: u64,
    pub gain: u64,
    pub antennas: u64,
    pub subpack_new: BigUint,
    pub subpack_ms: BigUint,
    /// `subpack_ms / subpack_new`
    pub ratio: BigRational,
}

impl ComparisonRow {
    pub fn ratio_floor(&self) -> BigUint {
        self.ratio.floor().to_integer().to_biguint().unwrap_or_default()
    }

    /// Ratio rounded half-up to one fractional digit.
    pub fn ratio_decimal(&self) -> String {
        let tenths = (self.ratio.clone() * BigRational::from_integer(10.into())
            + BigRational::new(1.into(), 2.into()))
        .floor()
        .to_integer();
        let (whole, frac) = tenths.div_rem(&10.into());
        format!("{whole}.{frac}")
    }

    pub fn ratio_f64(&self) -> f64 {
        self.ratio.to_f64().unwrap_or(f64::NAN)
    }
}

pub fn comparison_table(gain: u64, antennas: u64, users: impl IntoIterator<Item = u64>) -> Result<Vec<ComparisonRow>> {
    users
        .into_iter()
        .map(|k| {
            let new = metrics_new(k, gain, antennas)?;
            let ms = metrics_multiserver(k, gain, antennas)?;
            let subpack_new = new.subpacketization_integer().expect("integral");
            let subpack_ms = ms.subpacketization_integer().unwrap_or_default();
            let ratio = BigRational::new(subpack_ms.clone().into(), subpack_new.clone().into());
            Ok(ComparisonRow {
                users: k,
                gain,
                antennas,
                subpack_new,
                subpack_ms,
                ratio,
            })
        })
        .collect()
}

pub const CSV_HEADER: &str = "K,t,L,subpack_new,subpack_ms,ratio";

/// CSV with header [`CSV_HEADER`].
pub fn to_csv(rows: &[ComparisonRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.users,
            r.gain,
            r.antennas,
            r.subpack_new,
            r.subpack_ms,
            r.ratio_decimal()
        ));
    }
    out
}
