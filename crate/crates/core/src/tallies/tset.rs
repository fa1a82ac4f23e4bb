use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{factor, small_omega, theta};
use crate::config::Limits;
use crate::error::{Error, Result};
use crate::forms::{box_search, conic_solvable, holzer_search, normalize, ConicCoefficients};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TSetQuery {
    pub y: [f64; 3],
    pub a: [i64; 3],
    pub h: u64,
}

impl TSetQuery {
    pub fn new(y: [f64; 3], a: [i64; 3], h: u64) -> Result<Self> {
        if y.iter().any(|v| !v.is_finite() || *v <= 0.0) {
            return Err(Error::invalid("Y must be positive"));
        }
        if !(y[0] <= y[1] && y[1] <= y[2]) {
            return Err(Error::invalid("Y must satisfy Y1 <= Y2 <= Y3"));
        }
        if a.contains(&0) {
            return Err(Error::invalid("a must have nonzero entries"));
        }
        if h == 0 {
            return Err(Error::invalid("H must be positive"));
        }
        Ok(TSetQuery { y, a, h })
    }
}

fn pairwise_coprime(x: &[i64; 3]) -> bool {
    x[0].gcd(&x[1]) == 1 && x[0].gcd(&x[2]) == 1 && x[1].gcd(&x[2]) == 1
}

fn member(q: &TSetQuery, y: [i64; 3], limits: &Limits) -> Result<bool> {
    if !pairwise_coprime(&y) {
        return Ok(false);
    }
    let c = [0, 1, 2].map(|i| q.a[i] as i128 * y[i] as i128);
    let h = q.h as i128;
    if [(0, 1), (0, 2), (1, 2)].iter().any(|&(i, j)| h % c[i].gcd(&c[j]) != 0) {
        return Ok(false);
    }
    let mut coef = [0i64; 3];
    for i in 0..3 {
        coef[i] = i64::try_from(c[i]).map_err(|_| Error::Overflow("a_i y_i"))?;
    }
    let conic = ConicCoefficients::new(coef)?;
    if !conic_solvable(&conic)? {
        return Ok(false);
    }
    let nf = normalize(&conic)?;
    if holzer_search(&nf, limits, pairwise_coprime)?.is_some() {
        return Ok(true);
    }
    // Normalizing can push a pairwise coprime point outside the box, so the
    // box of the coefficients as given is searched as well.
    Ok(box_search(coef, limits, |x| x[0].gcd(&x[1]).gcd(&x[2]) == 1 && pairwise_coprime(x))?.is_some())
}

/// The set `T(Y; a, H)`, sorted.
pub fn build_t(q: &TSetQuery, limits: &Limits) -> Result<Vec<[i64; 3]>> {
    let yb = q.y.map(|v| v.floor() as i64);
    let cells = yb.iter().map(|&v| (2 * v + 1) as u128).product();
    limits.check_box("T box", cells)?;
    let rows: Vec<Vec<[i64; 3]>> = (-yb[0]..=yb[0])
        .into_par_iter()
        .filter(|&y1| y1 != 0)
        .map(|y1| {
            let mut out = Vec::new();
            for y2 in (-yb[1]..=yb[1]).filter(|&v| v != 0) {
                for y3 in (-yb[2]..=yb[2]).filter(|&v| v != 0) {
                    if member(q, [y1, y2, y3], limits)? {
                        out.push([y1, y2, y3]);
                    }
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let mut out: Vec<_> = rows.into_iter().flatten().collect();
    out.sort_unstable();
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalT {
    pub value: u64,
    pub ratio: f64,
}

/// `sum_{y in T} 2^{omega(y1 y2 y3)}` and its ratio to
/// `theta(a1 a2) (Y1 Y2 Y3 + sqrt(Y1 Y2) Y3 m)`, where
/// `m = min(|a1 a2|, Y3)^eps + log Y3`.
pub fn cal_t(q: &TSetQuery, limits: &Limits) -> Result<CalT> {
    let mut value = 0u64;
    for y in build_t(q, limits)? {
        let w: u32 = y
            .iter()
            .map(|&v| factor(v).map(|f| small_omega(&f)))
            .sum::<Result<u32>>()?;
        value += 1 << w;
    }
    let a12 = q.a[0].checked_mul(q.a[1]).ok_or(Error::Overflow("a1 a2"))?;
    let th = theta(&factor(a12)?);
    let th = *th.numer() as f64 / *th.denom() as f64;
    let [y1, y2, y3] = q.y;
    let m = (a12.unsigned_abs() as f64).min(y3).powf(limits.eps) + y3.ln();
    let denom = th * (y1 * y2 * y3 + (y1 * y2).sqrt() * y3 * m);
    Ok(CalT {
        value,
        ratio: value as f64 / denom,
    })
}
