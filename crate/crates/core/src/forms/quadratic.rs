use num_integer::Integer;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use super::{box_int, ratio_f64};
use crate::arith::{exact_sqrt, factor, mobius, small_omega};
use crate::config::Limits;
use crate::error::{Error, Result};

/// Primitive solutions of `sum g_i h_i w_i^2 = 0` in the box `|w_i| <= W_i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagQuadInstance {
    pub g: [i64; 3],
    pub h: [i64; 3],
    pub w: [Ratio<i64>; 3],
}

impl DiagQuadInstance {
    pub fn new(g: [i64; 3], h: [i64; 3], w: [Ratio<i64>; 3]) -> Result<Self> {
        if g.iter().chain(h.iter()).any(|&x| x == 0) {
            return Err(Error::invalid("coefficients must be nonzero"));
        }
        let gprod = g.iter().try_fold(1i64, |acc, &x| acc.checked_mul(x));
        let gprod = gprod.ok_or(Error::Overflow("g1 g2 g3"))?;
        if mobius(&factor(gprod)?) == 0 {
            return Err(Error::invalid(format!("g1 g2 g3 = {gprod} is not squarefree")));
        }
        if h[0].gcd(&h[1]).gcd(&h[2]) != 1 {
            return Err(Error::invalid(format!("h = {h:?} is not primitive")));
        }
        if w.iter().any(|x| *x <= Ratio::from_integer(0)) {
            return Err(Error::invalid("box bounds must be positive"));
        }
        Ok(DiagQuadInstance { g, h, w })
    }

    fn coef(&self) -> [i128; 3] {
        [0, 1, 2].map(|i| self.g[i] as i128 * self.h[i] as i128)
    }
}

/// Number of primitive `w` in the box with `sum g_i h_i w_i^2 = 0`.
pub fn count_diag_quad(inst: &DiagQuadInstance, limits: &Limits) -> Result<u64> {
    let wb = inst.w.map(box_int);
    let k = (0..3).max_by_key(|&k| (wb[k], k)).unwrap_or(2);
    let (i, j) = match k {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    limits.check_box("quadratic box", ((2 * wb[i] + 1) * (2 * wb[j] + 1)) as u128)?;
    let c = inst.coef();
    let mut count = 0u64;
    for wi in -wb[i]..=wb[i] {
        for wj in -wb[j]..=wb[j] {
            let rest = -(c[i] * (wi as i128).pow(2) + c[j] * (wj as i128).pow(2));
            if rest % c[k] != 0 {
                continue;
            }
            let sq = rest / c[k];
            if sq < 0 {
                continue;
            }
            let Some(r) = exact_sqrt(sq as u128) else { continue };
            if r > wb[k] as u128 {
                continue;
            }
            let wk = r as i64;
            if wi.gcd(&wj).gcd(&wk) != 1 {
                continue;
            }
            count += if wk == 0 { 1 } else { 2 };
        }
    }
    Ok(count)
}

/// `gcd(h1h2, h1h3, h2h3) gcd(g1, h2h3) gcd(g2, h1h3) gcd(g3, h1h2)`.
pub fn d_gh(inst: &DiagQuadInstance) -> u64 {
    let [g1, g2, g3] = inst.g.map(|x| x as i128);
    let [h1, h2, h3] = inst.h.map(|x| x as i128);
    let d = (h1 * h2).gcd(&(h1 * h3)).gcd(&(h2 * h3)) * g1.gcd(&(h2 * h3)) * g2.gcd(&(h1 * h3)) * g3.gcd(&(h1 * h2));
    d as u64
}

/// `(1 + sqrt(W1 W2 W3 D^{3/2} / |h1 h2 h3|)) 2^{omega(h1 h2 h3)}`, the
/// shape of the quadratic bound without its constant.
pub fn diag_quad_shape(inst: &DiagQuadInstance) -> Result<f64> {
    let w = inst.w.map(ratio_f64);
    let hprod = inst.h.iter().map(|x| x.unsigned_abs() as u128).product::<u128>();
    let hprod = i64::try_from(hprod).map_err(|_| Error::Overflow("h1 h2 h3"))?;
    let omega = small_omega(&factor(hprod)?);
    let d = d_gh(inst) as f64;
    let inner = w[0] * w[1] * w[2] * d.powf(1.5) / hprod as f64;
    Ok((1.0 + inner.sqrt()) * 2f64.powi(omega as i32))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(w: [i64; 3]) -> [Ratio<i64>; 3] {
        w.map(Ratio::from_integer)
    }

    fn brute(inst: &DiagQuadInstance) -> u64 {
        let wb = inst.w.map(box_int);
        let c = inst.coef();
        let mut n = 0;
        for a in -wb[0]..=wb[0] {
            for b in -wb[1]..=wb[1] {
                for d in -wb[2]..=wb[2] {
                    let v = c[0] * (a * a) as i128 + c[1] * (b * b) as i128 + c[2] * (d * d) as i128;
                    if v == 0 && a.gcd(&b).gcd(&d) == 1 {
                        n += 1;
                    }
                }
            }
        }
        n
    }

    #[test]
    fn examples() {
        let l = Limits::default();
        let inst = DiagQuadInstance::new([1, 1, 1], [1, 1, -1], ints([5, 5, 5])).unwrap();
        assert_eq!(count_diag_quad(&inst, &l).unwrap(), 24);
        assert_eq!(d_gh(&inst), 1);

        let inst = DiagQuadInstance::new([1, 1, 1], [1, 1, 1], ints([7, 3, 9])).unwrap();
        assert_eq!(count_diag_quad(&inst, &l).unwrap(), 0);

        let inst = DiagQuadInstance::new([1, 1, 1], [1, 2, -3], ints([1, 1, 1])).unwrap();
        assert_eq!(count_diag_quad(&inst, &l).unwrap(), 8);
        assert_eq!(d_gh(&inst), 1);
    }

    #[test]
    fn d_gh_products() {
        let inst = DiagQuadInstance::new([2, 3, 5], [6, 10, 15], ints([1, 1, 1])).unwrap();
        // gcd(60, 90, 150) = 30; gcd(2,150)=2, gcd(3,90)=3, gcd(5,60)=5.
        assert_eq!(d_gh(&inst), 30 * 2 * 3 * 5);
    }

    #[test]
    fn rejects_bad_instances() {
        assert!(DiagQuadInstance::new([2, 2, 1], [1, 1, 1], ints([1, 1, 1])).is_err());
        assert!(DiagQuadInstance::new([1, 1, 1], [2, 2, 4], ints([1, 1, 1])).is_err());
        assert!(DiagQuadInstance::new([1, 0, 1], [1, 1, 1], ints([1, 1, 1])).is_err());
    }

    #[test]
    fn matches_full_box_scan() {
        let l = Limits::default();
        for (g, h) in [
            ([1, 1, 1], [1, 1, -2]),
            ([1, 2, 3], [1, 1, -1]),
            ([-1, 5, 1], [3, 1, 2]),
            ([1, 1, -7], [2, 3, 1]),
            ([1, 1, 1], [1, 4, -5]),
        ] {
            for w in [[6, 6, 6], [3, 9, 2], [10, 1, 7]] {
                let inst = DiagQuadInstance::new(g, h, ints(w)).unwrap();
                assert_eq!(
                    count_diag_quad(&inst, &l).unwrap(),
                    brute(&inst),
                    "g={g:?} h={h:?} w={w:?}"
                );
            }
        }
    }

    #[test]
    fn shape_value() {
        let inst = DiagQuadInstance::new([1, 1, 1], [1, 1, -1], ints([5, 5, 5])).unwrap();
        assert!((diag_quad_shape(&inst).unwrap() - (1.0 + 125f64.sqrt())).abs() < 1e-12);
    }
}
