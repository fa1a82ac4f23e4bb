use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{exact_sqrt, factor, mobius};
use crate::config::Limits;
use crate::error::{Error, Result};

/// Boxes `|a_i| <= A_i`, `|b_i| <= B_i`, `|c_i| <= C_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MBoxQuery {
    pub a: [f64; 3],
    pub b: [f64; 3],
    pub c: [f64; 3],
}

impl MBoxQuery {
    pub fn new(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> Result<Self> {
        if a.iter().chain(&b).chain(&c).any(|v| !v.is_finite() || *v < 1.0) {
            return Err(Error::invalid("every box bound must be at least 1"));
        }
        Ok(MBoxQuery { a, b, c })
    }

    fn products(&self) -> (f64, f64, f64) {
        let p = |v: &[f64; 3]| v.iter().product::<f64>();
        (p(&self.a), p(&self.b), p(&self.c))
    }
}

fn nonzero_range(bound: i64) -> impl Iterator<Item = i64> + Clone {
    (-bound..=bound).filter(|&v| v != 0)
}

fn primitive(v: &[i64; 3]) -> bool {
    v[0].gcd(&v[1]).gcd(&v[2]) == 1
}

/// Number of `(a, b, c)`, each a primitive triple of nonzero integers in
/// its box, with `a1 b1 c1^2 + a2 b2 c2^2 + a3 b3 c3^2 = 0`,
/// `gcd(a_i, c_j) = gcd(c_i, c_j) = 1` for `i != j`, `a1 a2 a3` squarefree
/// and `gcd(a_i, b_j, b_k) = 1`.
pub fn count_m(q: &MBoxQuery, limits: &Limits) -> Result<u64> {
    let ab = q.a.map(|v| v.floor() as i64);
    let bb = q.b.map(|v| v.floor() as i64);
    let cb = q.c.map(|v| v.floor() as i64);
    let cells: u128 = ab.iter().chain(&bb).chain(&cb[..2]).map(|&v| 2 * v as u128).product();
    limits.check_box("M boxes", cells)?;

    let mut avecs = Vec::new();
    for a1 in nonzero_range(ab[0]) {
        for a2 in nonzero_range(ab[1]) {
            for a3 in nonzero_range(ab[2]) {
                let a = [a1, a2, a3];
                if primitive(&a) && mobius(&factor(a1 * a2 * a3)?) != 0 {
                    avecs.push(a);
                }
            }
        }
    }
    let mut bvecs = Vec::new();
    for b1 in nonzero_range(bb[0]) {
        for b2 in nonzero_range(bb[1]) {
            for b3 in nonzero_range(bb[2]) {
                let b = [b1, b2, b3];
                if primitive(&b) {
                    bvecs.push(b);
                }
            }
        }
    }
    let counts: Vec<u64> = avecs
        .par_iter()
        .map(|a| {
            let mut n = 0u64;
            for b in &bvecs {
                if (0..3).any(|i| a[i].gcd(&b[(i + 1) % 3]).gcd(&b[(i + 2) % 3]) != 1) {
                    continue;
                }
                n += count_c(a, b, &cb);
            }
            n
        })
        .collect();
    Ok(counts.iter().sum())
}

fn count_c(a: &[i64; 3], b: &[i64; 3], cb: &[i64; 3]) -> u64 {
    let k = [0, 1, 2].map(|i| a[i] as i128 * b[i] as i128);
    let mut n = 0;
    for c1 in nonzero_range(cb[0]) {
        if c1.gcd(&a[1]) != 1 || c1.gcd(&a[2]) != 1 {
            continue;
        }
        for c2 in nonzero_range(cb[1]) {
            if c2.gcd(&c1) != 1 || c2.gcd(&a[0]) != 1 || c2.gcd(&a[2]) != 1 {
                continue;
            }
            let rest = -(k[0] * (c1 * c1) as i128 + k[1] * (c2 * c2) as i128);
            if rest % k[2] != 0 {
                continue;
            }
            let sq = rest / k[2];
            if sq <= 0 {
                continue;
            }
            let Some(c3) = exact_sqrt(sq as u128) else { continue };
            if c3 > cb[2] as u128 {
                continue;
            }
            let c3 = c3 as i64;
            if c3.gcd(&c1) == 1 && c3.gcd(&c2) == 1 && c3.gcd(&a[0]) == 1 && c3.gcd(&a[1]) == 1 {
                n += 2;
            }
        }
    }
    n
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MBounds {
    pub m1: f64,
    /// Entry `k` is the bound for the permutation with `C_k` in front.
    pub m2: [f64; 3],
}

/// The two upper-bound shapes for `M`, without their constants. Logarithms
/// are floored at 1 so unit boxes give a nonzero bound.
pub fn bounds_m(q: &MBoxQuery, eps: f64) -> MBounds {
    let (a, b, c) = q.products();
    let bij = [q.b[0] * q.b[1], q.b[0] * q.b[2], q.b[1] * q.b[2]];
    let min_bb = bij.iter().copied().fold(f64::INFINITY, f64::min);
    let damp = min_bb.powf(1.0 / 16.0);
    let sigma = 1.0 + a.min(b).powf(eps) / damp;
    let tau = 1.0 + b.ln().max(1.0) / damp;
    let m1 = a.powf(2.0 / 3.0) * b.powf(2.0 / 3.0) * c.powf(1.0 / 3.0) + sigma * tau * a * b.sqrt() * c.sqrt();
    let log2 = (a * c).ln().max(1.0).powi(2);
    let m2 = [0, 1, 2].map(|k| {
        let (i, j) = ((k + 1) % 3, (k + 2) % 3);
        a * q.b[i] * q.b[j] * (q.c[k] + q.c[i] * q.c[j] / q.a[k]) * log2
    });
    MBounds { m1, m2 }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn query(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> MBoxQuery {
        MBoxQuery::new(a, b, c).unwrap()
    }

    /// Scans all nine coordinates.
    fn brute(q: &MBoxQuery) -> u64 {
        let f = |v: [f64; 3]| v.map(|x| x.floor() as i64);
        let (ab, bb, cb) = (f(q.a), f(q.b), f(q.c));
        let trip = |b: [i64; 3]| {
            let mut v = Vec::new();
            for x in nonzero_range(b[0]) {
                for y in nonzero_range(b[1]) {
                    for z in nonzero_range(b[2]) {
                        if primitive(&[x, y, z]) {
                            v.push([x, y, z]);
                        }
                    }
                }
            }
            v
        };
        let mut n = 0;
        for a in trip(ab) {
            let sqf = (2..=a.iter().map(|x| x.abs()).product::<i64>()).all(|d| (a[0] * a[1] * a[2]) % (d * d) != 0);
            if !sqf {
                continue;
            }
            for b in trip(bb) {
                for c in trip(cb) {
                    let eq: i64 = (0..3).map(|i| a[i] * b[i] * c[i] * c[i]).sum();
                    if eq != 0 {
                        continue;
                    }
                    let mut ok = true;
                    for i in 0..3 {
                        for j in 0..3 {
                            if i != j && (a[i].gcd(&c[j]) != 1 || c[i].gcd(&c[j]) != 1) {
                                ok = false;
                            }
                        }
                        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
                        if a[i].gcd(&b[j]).gcd(&b[k]) != 1 {
                            ok = false;
                        }
                    }
                    if ok {
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
        assert_eq!(count_m(&query([1.0; 3], [1.0; 3], [1.0; 3]), &l).unwrap(), 0);
        assert_eq!(count_m(&query([1.0, 1.0, 2.0], [1.0; 3], [1.0; 3]), &l).unwrap(), 128);
        assert_eq!(count_m(&query([1.0; 3], [1.0, 1.0, 2.0], [1.0; 3]), &l).unwrap(), 128);
    }

    #[test]
    fn matches_nine_variable_scan() {
        let l = Limits::default();
        for (a, b, c) in [
            ([2.0, 2.0, 3.0], [2.0, 1.0, 2.0], [2.0, 2.0, 2.0]),
            ([3.0, 1.0, 2.0], [1.0, 3.0, 2.0], [3.0, 1.0, 3.0]),
            ([1.0, 2.0, 5.0], [2.0, 2.0, 1.0], [1.0, 3.0, 2.0]),
            ([2.0, 3.0, 3.0], [3.0, 2.0, 2.0], [2.0, 2.0, 3.0]),
        ] {
            let q = query(a, b, c);
            assert_eq!(count_m(&q, &l).unwrap(), brute(&q), "{q:?}");
        }
    }

    #[test]
    fn bound_examples() {
        let unit = query([1.0; 3], [1.0; 3], [1.0; 3]);
        let b = bounds_m(&unit, 0.1);
        assert!((b.m1 - 5.0).abs() < 1e-12);
        assert!(b.m2.iter().all(|v| (v - 2.0).abs() < 1e-12));
    }

    #[test]
    fn m1_monotone() {
        let base = [2.0, 3.0, 4.0];
        let m = bounds_m(&query(base, base, base), 0.1).m1;
        for i in 0..3 {
            let mut big = base;
            big[i] *= 2.0;
            assert!(bounds_m(&query(big, base, base), 0.1).m1 >= m);
            assert!(bounds_m(&query(base, big, base), 0.1).m1 >= m);
            assert!(bounds_m(&query(base, base, big), 0.1).m1 >= m);
        }
    }

    #[test]
    fn rejects_small_boxes() {
        assert!(MBoxQuery::new([0.5, 1.0, 1.0], [1.0; 3], [1.0; 3]).is_err());
    }
}
