use std::f64::consts::PI;

use num_integer::Integer;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use super::{box_int, ratio_f64};
use crate::config::Limits;
use crate::error::{Error, Result};

/// Primitive solutions of `h . w = 0` in the box `|w_i| <= W_i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearInstance {
    pub h: [i64; 3],
    pub w: [Ratio<i64>; 3],
}

impl LinearInstance {
    pub fn new(h: [i64; 3], w: [Ratio<i64>; 3]) -> Result<Self> {
        if h[0].gcd(&h[1]).gcd(&h[2]) != 1 {
            return Err(Error::invalid(format!("h = {h:?} is not primitive")));
        }
        if w.iter().any(|x| *x <= Ratio::from_integer(0)) {
            return Err(Error::invalid("box bounds must be positive"));
        }
        Ok(LinearInstance { h, w })
    }
}

/// Number of primitive `w` with `h1 w1 + h2 w2 + h3 w3 = 0` and
/// `|w_i| <= W_i`. `w` and `-w` are counted separately.
pub fn count_linear(inst: &LinearInstance, limits: &Limits) -> Result<u64> {
    let wb = inst.w.map(box_int);
    // Solve for a coordinate with nonzero coefficient, looping the other two;
    // pick the one leaving the smallest loop.
    let k = (0..3)
        .filter(|&k| inst.h[k] != 0)
        .min_by_key(|&k| {
            let (i, j) = others(k);
            (2 * wb[i] + 1) * (2 * wb[j] + 1)
        })
        .ok_or_else(|| Error::invalid("h is zero"))?;
    let (i, j) = others(k);
    limits.check_box("linear box", ((2 * wb[i] + 1) * (2 * wb[j] + 1)) as u128)?;
    let mut count = 0u64;
    for wi in -wb[i]..=wb[i] {
        for wj in -wb[j]..=wb[j] {
            let rest = -(inst.h[i] * wi + inst.h[j] * wj);
            if rest % inst.h[k] != 0 {
                continue;
            }
            let wk = rest / inst.h[k];
            if wk.abs() > wb[k] {
                continue;
            }
            if wi.gcd(&wj).gcd(&wk) == 1 {
                count += 1;
            }
        }
    }
    Ok(count)
}

fn others(k: usize) -> (usize, usize) {
    match k {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    }
}

/// `4 + 12 pi W1 W2 W3 / max_i |h_i| W_i`.
pub fn linear_bound(inst: &LinearInstance) -> f64 {
    let w = inst.w.map(ratio_f64);
    let denom = (0..3)
        .map(|i| inst.h[i].unsigned_abs() as f64 * w[i])
        .fold(0.0, f64::max);
    4.0 + 12.0 * PI * w[0] * w[1] * w[2] / denom
}
