use serde::{Deserialize, Serialize};

use crate::arith::{exact_sqrt, factor, squarefree_divisors, symbol};
use crate::config::Limits;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RhoCheck {
    pub rho: u64,
    pub bound: i64,
    pub holds: bool,
}

/// `rho(q; a, b) = #{t mod q : a t^2 + b = 0 (mod q)}` against
/// `sum_{d | q} |mu(d)| (-ab / d)`.
pub fn rho_check(q: u64, a: i64, b: i64) -> Result<RhoCheck> {
    if q == 0 {
        return Err(Error::invalid("q must be positive"));
    }
    let qi = q as i128;
    let (a, b) = (a as i128, b as i128);
    let rho = (0..qi).filter(|&t| (a * t * t + b).rem_euclid(qi) == 0).count() as u64;
    let ab = -(a * b);
    let bound = squarefree_divisors(&factor(q as i64)?)
        .into_iter()
        .map(|(d, _)| symbol(ab.rem_euclid(d as i128) as i64, d) as i64)
        .sum::<i64>();
    Ok(RhoCheck {
        rho,
        bound,
        holds: rho as i64 <= bound,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharSum {
    pub sum: i64,
    pub pv_ratio: f64,
}

/// `sum_{M <= n <= N} (n / q)` and its size relative to `sqrt(q) log q`.
pub fn char_sum(q: u64, m: i64, n: i64, limits: &Limits) -> Result<CharSum> {
    if q < 3 || q.is_multiple_of(2) {
        return Err(Error::invalid(format!("q = {q} must be odd and at least 3")));
    }
    if exact_sqrt(q as u128).is_some() {
        return Err(Error::invalid(format!(
            "q = {q} is a square, so the character is principal"
        )));
    }
    let len = if n >= m { (n as i128 - m as i128 + 1) as u128 } else { 0 };
    limits.check_box("character sum length", len)?;
    let sum: i64 = if n >= m {
        (m..=n).map(|k| symbol(k, q) as i64).sum()
    } else {
        0
    };
    let qf = q as f64;
    Ok(CharSum {
        sum,
        pv_ratio: sum.unsigned_abs() as f64 / (qf.sqrt() * qf.ln()),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoubleCharSum {
    pub value: i64,
    pub ratio: f64,
}

/// `sum_{m <= M odd} sum_{n <= N} (n / m)` with unit weights, against
/// `M^{1/2} N + M N^{1/2}`.
pub fn double_char_sum(m: u64, n: u64, limits: &Limits) -> Result<DoubleCharSum> {
    if m == 0 || n == 0 {
        return Err(Error::invalid("M and N must be positive"));
    }
    limits.check_box("double character sum", m as u128 * n as u128)?;
    let value: i64 = (1..=m)
        .step_by(2)
        .map(|mm| (1..=n as i64).map(|k| symbol(k, mm) as i64).sum::<i64>())
        .sum();
    let (mf, nf) = (m as f64, n as f64);
    Ok(DoubleCharSum {
        value,
        ratio: value.unsigned_abs() as f64 / (mf.sqrt() * nf + mf * nf.sqrt()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Legendre symbol by Euler's criterion, extended over the factorization.
    fn euler_symbol(a: i64, n: u64) -> i64 {
        let mut out = 1i64;
        for &(p, e) in factor(n as i64).unwrap().factors() {
            let s: i64 = if p == 2 {
                0
            } else {
                let r = a.rem_euclid(p as i64) as u128;
                let mut acc = 1u128;
                for _ in 0..(p - 1) / 2 {
                    acc = acc * r % p as u128;
                }
                match acc {
                    0 => 0,
                    1 => 1,
                    _ => -1,
                }
            };
            out *= s.pow(e);
        }
        out
    }

    #[test]
    fn rho_examples() {
        assert_eq!(
            rho_check(3, 1, 1).unwrap(),
            RhoCheck {
                rho: 0,
                bound: 0,
                holds: true
            }
        );
        assert_eq!(
            rho_check(5, 1, -1).unwrap(),
            RhoCheck {
                rho: 2,
                bound: 2,
                holds: true
            }
        );
        assert_eq!(
            rho_check(15, 1, -1).unwrap(),
            RhoCheck {
                rho: 4,
                bound: 4,
                holds: true
            }
        );
        assert_eq!(
            rho_check(1, 7, 3).unwrap(),
            RhoCheck {
                rho: 1,
                bound: 1,
                holds: true
            }
        );
    }

    #[test]
    fn rho_fails_at_even_modulus() {
        let r = rho_check(4, 1, -1).unwrap();
        assert_eq!((r.rho, r.bound, r.holds), (2, 1, false));
    }

    #[test]
    fn rho_bound_matches_independent_symbol() {
        for q in 1..200u64 {
            for (a, b) in [(1, 1), (2, -3), (-5, 7), (3, 0), (11, -13)] {
                let f = factor(q as i64).unwrap();
                let expected: i64 = squarefree_divisors(&f)
                    .iter()
                    .map(|&(d, _)| euler_symbol(-a * b, d))
                    .sum();
                assert_eq!(rho_check(q, a, b).unwrap().bound, expected, "q={q} a={a} b={b}");
            }
        }
    }

    #[test]
    fn char_sum_examples() {
        let l = Limits::default();
        assert_eq!(char_sum(3, 1, 3, &l).unwrap().sum, 0);
        assert_eq!(char_sum(5, 1, 2, &l).unwrap().sum, 0);
        assert_eq!(char_sum(7, 1, 3, &l).unwrap().sum, 1);
        for q in [3, 5, 7, 15, 21, 45, 99] {
            assert_eq!(char_sum(q, 1, q as i64, &l).unwrap().sum, 0, "q={q}");
        }
        assert!(char_sum(9, 1, 9, &l).is_err());
        assert!(char_sum(4, 1, 9, &l).is_err());
        assert_eq!(char_sum(7, 5, 4, &l).unwrap().sum, 0);
    }

    #[test]
    fn double_sum_examples() {
        let l = Limits::default();
        assert_eq!(double_char_sum(1, 5, &l).unwrap().value, 5);
        assert_eq!(double_char_sum(3, 3, &l).unwrap().value, 3);
        let mut direct = 0i64;
        for m in (1..=100u64).step_by(2) {
            for n in 1..=100i64 {
                direct += euler_symbol(n, m);
            }
        }
        assert_eq!(double_char_sum(100, 100, &l).unwrap().value, direct);
    }
}
