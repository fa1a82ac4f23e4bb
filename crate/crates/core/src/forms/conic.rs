//! Diagonal conics `a1 x1^2 + a2 x2^2 + a3 x3^2 = 0`: Legendre's criterion on
//! the squarefree pairwise-coprime normal form and a Holzer-box search.

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use super::centered;
use crate::arith::{factor, isqrt, symbol};
use crate::config::Limits;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConicCoefficients {
    pub a: [i64; 3],
}

impl ConicCoefficients {
    pub fn new(a: [i64; 3]) -> Result<Self> {
        if a.contains(&0) {
            return Err(Error::invalid("conic coefficients must be nonzero"));
        }
        Ok(ConicCoefficients { a })
    }
}

/// Squarefree, pairwise coprime coefficients together with the change of
/// variables back to the original form: `x_i = X_i num_i / den_i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalForm {
    pub coef: [i64; 3],
    pub num: [i64; 3],
    pub den: [i64; 3],
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConicPoint {
    pub x: [i64; 3],
    /// `gcd(x1, x2)`, `gcd(x1, x3)`, `gcd(x2, x3)`.
    pub pair_gcds: [i64; 3],
}

impl ConicPoint {
    fn new(x: [i64; 3]) -> Self {
        ConicPoint {
            x,
            pair_gcds: [x[0].gcd(&x[1]), x[0].gcd(&x[2]), x[1].gcd(&x[2])],
        }
    }
}

pub fn normalize(c: &ConicCoefficients) -> Result<NormalForm> {
    let mut coef = c.a;
    let mut num = [1i64; 3];
    let mut den = [1i64; 3];
    for i in 0..3 {
        let f = factor(coef[i])?;
        let square_root: i64 = f.factors().iter().map(|&(p, e)| (p as i64).pow(e / 2)).product();
        coef[i] /= square_root * square_root;
        den[i] = square_root;
    }
    loop {
        let common = coef[0].gcd(&coef[1]).gcd(&coef[2]);
        if common > 1 {
            for a in &mut coef {
                *a /= common;
            }
            continue;
        }
        let pair = [(0, 1, 2), (0, 2, 1), (1, 2, 0)]
            .into_iter()
            .map(|(i, j, k)| (i, j, k, coef[i].gcd(&coef[j])))
            .find(|t| t.3 > 1);
        let Some((i, j, k, g)) = pair else { break };
        // g | x_k, so x_k = g X_k.
        coef[i] /= g;
        coef[j] /= g;
        coef[k] = coef[k].checked_mul(g).ok_or(Error::Overflow("conic normalization"))?;
        num[k] = num[k].checked_mul(g).ok_or(Error::Overflow("conic normalization"))?;
    }
    Ok(NormalForm { coef, num, den })
}

fn legendre(nf: &NormalForm) -> Result<bool> {
    let a = nf.coef;
    if a.iter().all(|&x| x > 0) || a.iter().all(|&x| x < 0) {
        return Ok(false);
    }
    for (i, j, k) in [(0, 1, 2), (1, 0, 2), (2, 0, 1)] {
        for p in factor(a[i])?.primes() {
            if p == 2 {
                continue;
            }
            let r = (-(a[j] as i128) * a[k] as i128).rem_euclid(p as i128) as i64;
            if symbol(r, p) != 1 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Whether the conic has a nonzero integer point.
pub fn conic_solvable(c: &ConicCoefficients) -> Result<bool> {
    legendre(&normalize(c)?)
}

fn map_back(nf: &NormalForm, x: [i64; 3]) -> Result<[i64; 3]> {
    let l = nf.den.iter().fold(1i128, |l, &d| l.lcm(&(d as i128)));
    let y: [i128; 3] = [0, 1, 2].map(|i| x[i] as i128 * nf.num[i] as i128 * (l / nf.den[i] as i128));
    let g = y[0].gcd(&y[1]).gcd(&y[2]);
    let mut out = [0i64; 3];
    for i in 0..3 {
        out[i] = i64::try_from(y[i] / g).map_err(|_| Error::Overflow("conic point"))?;
    }
    Ok(out)
}

/// Walks the nonzero points of the normal form in the Holzer box
/// `|X_i| <= sqrt|a_j a_k|`, maps each back to a primitive point of the
/// original conic and returns the first one accepted by `accept`.
pub fn holzer_search(
    nf: &NormalForm,
    limits: &Limits,
    mut accept: impl FnMut(&[i64; 3]) -> bool,
) -> Result<Option<[i64; 3]>> {
    let mut mapped = None;
    let mut err = None;
    box_search(nf.coef, limits, |x| match map_back(nf, *x) {
        Ok(orig) if accept(&orig) => {
            mapped = Some(orig);
            true
        }
        Ok(_) => false,
        Err(e) => {
            err = Some(e);
            true
        }
    })?;
    match err {
        Some(e) => Err(e),
        None => Ok(mapped),
    }
}

/// Nonzero points of `a1 x1^2 + a2 x2^2 + a3 x3^2 = 0` with
/// `|x_i| <= sqrt|a_j a_k|` for the coefficients as given, in a fixed order;
/// returns the first one accepted by `accept`.
pub fn box_search(a: [i64; 3], limits: &Limits, mut accept: impl FnMut(&[i64; 3]) -> bool) -> Result<Option<[i64; 3]>> {
    let a = a.map(|x| x as i128);
    let bound = [0, 1, 2].map(|i| {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        isqrt((a[j] * a[k]).unsigned_abs()) as i64
    });
    let k = (0..3).max_by_key(|&k| (bound[k], k)).unwrap_or(2);
    let (i, j) = match k {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    limits.check_box(
        "Holzer box",
        ((2 * bound[i] + 1) as u128) * ((2 * bound[j] + 1) as u128),
    )?;
    for xj in centered(bound[j]) {
        for xi in centered(bound[i]) {
            let rest = -(a[i] * (xi as i128).pow(2) + a[j] * (xj as i128).pow(2));
            if rest % a[k] != 0 {
                continue;
            }
            let sq = rest / a[k];
            if sq < 0 {
                continue;
            }
            let Some(r) = crate::arith::exact_sqrt(sq as u128) else {
                continue;
            };
            if r > bound[k] as u128 || (xi == 0 && xj == 0 && r == 0) {
                continue;
            }
            let mut x = [0i64; 3];
            x[i] = xi;
            x[j] = xj;
            for xk in [r as i64, -(r as i64)] {
                x[k] = xk;
                if accept(&x) {
                    return Ok(Some(x));
                }
                if r == 0 {
                    break;
                }
            }
        }
    }
    Ok(None)
}

/// A primitive point of the conic found in the Holzer box of its normal form.
///
/// Fails with an invariant error if the search disagrees with Legendre's
/// criterion.
pub fn find_conic_point(c: &ConicCoefficients, limits: &Limits) -> Result<Option<ConicPoint>> {
    let nf = normalize(c)?;
    let solvable = legendre(&nf)?;
    let found = holzer_search(&nf, limits, |_| true)?;
    match (solvable, found) {
        (true, Some(x)) => Ok(Some(ConicPoint::new(x))),
        (false, None) => Ok(None),
        (true, None) => Err(Error::Invariant(format!(
            "{:?} is soluble but its Holzer box is empty",
            c.a
        ))),
        (false, Some(x)) => Err(Error::Invariant(format!(
            "{:?} has the point {x:?} against Legendre",
            c.a
        ))),
    }
}
