use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::function::beta::{checked_beta_reg, ln_beta};

use crate::error::{Error, Result};

/// Values of s this close outside [0, 1] are clamped instead of rejected.
const EDGE_SLACK: f64 = 1e-12;

/// Interpolation θ(s) from 0 to 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Schedule {
    Linear,
    /// Regularized incomplete beta function with `k` vanishing boundary derivatives.
    Beta { k: u32 },
}

pub(crate) fn check_s(s: f64) -> Result<f64> {
    if !(s >= -EDGE_SLACK && s <= 1.0 + EDGE_SLACK) {
        return Err(Error::Domain { what: "s", value: s });
    }
    Ok(s.clamp(0.0, 1.0))
}

/// θ_k(s) = B_s(1+k, 1+k) / B_1(1+k, 1+k).
pub fn beta_schedule(k: u32, s: f64) -> Result<f64> {
    let s = check_s(s)?;
    if k == 0 {
        return Ok(s);
    }
    let a = 1.0 + k as f64;
    checked_beta_reg(a, a, s).map_err(|e| Error::InvalidParameter(format!("incomplete beta: {e}")))
}

/// dθ_k/ds = s^k (1-s)^k / B(1+k, 1+k).
pub fn beta_schedule_derivative(k: u32, s: f64) -> Result<f64> {
    let s = check_s(s)?;
    if k == 0 {
        return Ok(1.0);
    }
    if s == 0.0 || s == 1.0 {
        return Ok(0.0);
    }
    let kf = k as f64;
    Ok((kf * (s.ln() + (1.0 - s).ln()) - ln_beta(1.0 + kf, 1.0 + kf)).exp())
}

impl Schedule {
    pub fn theta(&self, s: f64) -> Result<f64> {
        match *self {
            Schedule::Linear => check_s(s),
            Schedule::Beta { k } => beta_schedule(k, s),
        }
    }

    pub fn derivative(&self, s: f64) -> Result<f64> {
        match *self {
            Schedule::Linear => check_s(s).map(|_| 1.0),
            Schedule::Beta { k } => beta_schedule_derivative(k, s),
        }
    }

    /// Smallest s with θ(s) ≥ target, by bisection on the monotone schedule.
    pub fn inverse(&self, target: f64) -> Result<f64> {
        let target = check_s(target)?;
        if let Schedule::Linear | Schedule::Beta { k: 0 } = self {
            return Ok(target);
        }
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.theta(mid)? < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Schedule::Linear => write!(f, "linear"),
            Schedule::Beta { k } => write!(f, "beta:{k}"),
        }
    }
}

impl FromStr for Schedule {
    type Err = Error;

    /// Accepts `linear` or `beta:k`.
    fn from_str(text: &str) -> Result<Self> {
        let t = text.trim();
        if t == "linear" {
            return Ok(Schedule::Linear);
        }
        if let Some(k) = t.strip_prefix("beta:") {
            let k = k
                .trim()
                .parse::<u32>()
                .map_err(|_| Error::Parse(format!("bad beta order in schedule `{text}`")))?;
            return Ok(Schedule::Beta { k });
        }
        Err(Error::Parse(format!("unknown schedule `{text}` (expected `linear` or `beta:k`)")))
    }
}

impl TryFrom<String> for Schedule {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Schedule> for String {
    fn from(s: Schedule) -> String {
        s.to_string()
    }
}
