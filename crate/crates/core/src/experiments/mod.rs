//! Growth tables and the bound-verification suite.

mod suite;

pub use suite::{bound_suite, calibration_fixture, check_hard, check_regression, run_bound, Bound, BoundReport, Grid};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::config::Limits;
use crate::error::{Error, Result};
use crate::surface;
use crate::torsor;

/// Printed with every growth table and torsor comparison.
pub const ASYMPTOTIC_NOTE: &str = "the growth order B(log B)^6 and the torsor constant 1/4 are not \
verifiable at this scale; only exact agreement of the enumerators is asserted, and the measured \
torsor/surface ratio is recorded instead of the constant 1/4";

/// Formats `x` with 12 significant digits, in the style of C's `%.12g`.
pub fn fmt12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    let sci = format!("{:.11e}", x);
    // Rounding can carry into the next decade, so take the exponent back from
    // the formatted mantissa.
    let (mant, e) = sci.split_once('e').unwrap_or((&sci, "0"));
    let e: i32 = e.parse().unwrap_or(exp);
    if (-4..12).contains(&e) {
        let decimals = (11 - e).max(0) as usize;
        let s = format!("{:.*}", decimals, x);
        trim_zeros(&s)
    } else {
        let m = trim_zeros(mant);
        format!("{m}e{}{:02}", if e < 0 { '-' } else { '+' }, e.abs())
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

/// `x` rounded to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    fmt12(x).parse().unwrap_or(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Direct,
    Torsor,
    Both,
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(Method::Direct),
            "torsor" => Ok(Method::Torsor),
            "both" => Ok(Method::Both),
            _ => Err(Error::invalid(format!("unknown method {s:?}"))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Direct => "direct",
            Method::Torsor => "torsor",
            Method::Both => "both",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthRow {
    #[serde(rename = "B")]
    pub b: u64,
    pub n_direct: Option<u64>,
    /// Number of distinct surface points hit by the torsor enumeration.
    pub n_torsor: Option<u64>,
    /// `n / (B (log B)^6)`, only for `B >= 3`.
    pub ratio6: Option<f64>,
}

/// Counts at each height, ascending. With [`Method::Both`] the two counts
/// must agree exactly.
pub fn growth_table(bs: &[u64], method: Method, limits: &Limits) -> Result<Vec<GrowthRow>> {
    let mut bs = bs.to_vec();
    bs.sort_unstable();
    bs.dedup();
    let mut rows = Vec::with_capacity(bs.len());
    for b in bs {
        let n_direct = match method {
            Method::Direct | Method::Both => Some(surface::count_n(b, limits)?),
            Method::Torsor => None,
        };
        let n_torsor = match method {
            Method::Torsor | Method::Both => {
                let mut images = torsor::enumerate_torsor(b, limits)?
                    .iter()
                    .map(torsor::to_surface)
                    .collect::<Result<Vec<_>>>()?;
                images.sort_unstable();
                images.dedup();
                Some(images.len() as u64)
            }
            Method::Direct => None,
        };
        if let (Some(d), Some(t)) = (n_direct, n_torsor) {
            if d != t {
                return Err(Error::Invariant(format!(
                    "at B = {b} the direct search finds {d} points but the torsor images number {t}"
                )));
            }
        }
        let n = n_direct.or(n_torsor).unwrap_or(0);
        let ratio6 = (b >= 3).then(|| {
            let bf = b as f64;
            round12(n as f64 / (bf * bf.ln().powi(6)))
        });
        rows.push(GrowthRow {
            b,
            n_direct,
            n_torsor,
            ratio6,
        });
    }
    Ok(rows)
}

pub const GROWTH_HEADER: &str = "B,n_direct,n_torsor,ratio6";

pub fn growth_csv(rows: &[GrowthRow]) -> String {
    let opt = |v: Option<u64>| v.map(|x| x.to_string()).unwrap_or_default();
    let mut out = String::from(GROWTH_HEADER);
    out.push('\n');
    for r in rows {
        let ratio = r.ratio6.map(fmt12).unwrap_or_default();
        out.push_str(&format!("{},{},{},{}\n", r.b, opt(r.n_direct), opt(r.n_torsor), ratio));
    }
    out
}
