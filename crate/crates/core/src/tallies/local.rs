use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::arith::Factorizer;
use crate::error::{Error, Result};

/// Where `p` sits relative to the square-free moduli `P1` (from the `u_i`)
/// and `P2` (from the `s_i`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpCase {
    Generic,
    DividesP1,
    DividesP2,
}

impl EpCase {
    pub const ALL: [EpCase; 3] = [EpCase::Generic, EpCase::DividesP1, EpCase::DividesP2];

    pub fn tag(self) -> &'static str {
        match self {
            EpCase::Generic => "generic",
            EpCase::DividesP1 => "p_divides_P1",
            EpCase::DividesP2 => "p_divides_P2",
        }
    }

    /// `p`-adic valuations of `A0, A1, A2, A3`.
    fn valuations(self) -> [u32; 4] {
        match self {
            EpCase::Generic => [0, 0, 0, 0],
            EpCase::DividesP1 => [1, 1, 0, 0],
            EpCase::DividesP2 => [1, 2, 0, 0],
        }
    }
}

impl FromStr for EpCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EpCase::ALL.into_iter().find(|c| c.tag() == s).ok_or_else(|| {
            Error::invalid(format!(
                "unknown case {s:?}; expected generic, p_divides_P1 or p_divides_P2"
            ))
        })
    }
}

impl fmt::Display for EpCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpReport {
    pub p: u64,
    pub case: EpCase,
    pub brute: BigRational,
    pub closed: BigRational,
    pub equal: bool,
}

fn pow(p: u64, e: u32) -> BigRational {
    BigRational::from_integer(BigInt::from(p).pow(e))
}

/// The local factor at `p` two ways: the finite Möbius sum over
/// `d_i, e_i in {1, p}` of
/// `gcd(A0 h0, A1 h1, A2 h2, A3 h3) / (A0 h0 A1 h1 A2 h2 A3 h3)` with
/// `h0 = lcm(e1, e2, e3)`, `h_i = lcm(d_i, e_i)`, and the closed form.
/// In the generic case the `d_i` are all 1.
pub fn ep(p: u64, case: EpCase) -> Result<EpReport> {
    if !Factorizer::global().is_prime(p) {
        return Err(Error::invalid(format!("{p} is not prime")));
    }
    let v = case.valuations();
    let d_range: &[u32] = if case == EpCase::Generic { &[0] } else { &[0, 1] };
    let mut brute = BigRational::zero();
    for &d1 in d_range {
        for &d2 in d_range {
            for &d3 in d_range {
                for e in 0..8u32 {
                    let e = [e & 1, (e >> 1) & 1, (e >> 2) & 1];
                    let d = [d1, d2, d3];
                    let sign = if (d.iter().sum::<u32>() + e.iter().sum::<u32>()) % 2 == 0 {
                        1
                    } else {
                        -1
                    };
                    let h0 = *e.iter().max().unwrap_or(&0);
                    let k = [
                        v[0] + h0,
                        v[1] + d[0].max(e[0]),
                        v[2] + d[1].max(e[1]),
                        v[3] + d[2].max(e[2]),
                    ];
                    let g = *k.iter().min().unwrap_or(&0);
                    let total: u32 = k.iter().sum();
                    let term = pow(p, g) / pow(p, total);
                    if sign > 0 {
                        brute += term;
                    } else {
                        brute -= term;
                    }
                }
            }
        }
    }
    let one = BigRational::one();
    let inv = |e: u32| one.clone() / pow(p, e);
    let closed = match case {
        EpCase::Generic => {
            &one - inv(2) * BigRational::from_integer(3.into()) + inv(3) * BigRational::from_integer(2.into())
        }
        EpCase::DividesP1 => inv(2) * (&one - inv(1) - inv(2) + inv(3)),
        EpCase::DividesP2 => inv(3) * (&one - inv(1) - inv(2) + inv(3)),
    };
    let equal = brute == closed;
    Ok(EpReport {
        p,
        case,
        brute,
        closed,
        equal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn generic_case_agrees() {
        let e = ep(3, EpCase::Generic).unwrap();
        assert_eq!(e.brute, r(20, 27));
        assert_eq!(e.closed, r(20, 27));
        assert!(e.equal);
        for p in [2, 5, 7, 11, 97] {
            assert!(ep(p, EpCase::Generic).unwrap().equal, "p={p}");
        }
    }

    #[test]
    fn closed_forms() {
        assert_eq!(ep(2, EpCase::DividesP1).unwrap().closed, r(3, 32));
        assert_eq!(ep(2, EpCase::DividesP2).unwrap().closed, r(3, 64));
        assert_eq!(ep(3, EpCase::DividesP1).unwrap().closed, r(16, 243));
    }

    #[test]
    fn full_sums_in_the_special_cases() {
        // Six-variable Möbius sums, from an independent scripted evaluation.
        assert_eq!(ep(2, EpCase::DividesP1).unwrap().brute, r(1, 16));
        assert_eq!(ep(2, EpCase::DividesP2).unwrap().brute, r(1, 32));
        assert_eq!(ep(3, EpCase::DividesP1).unwrap().brute, r(4, 81));
        assert_eq!(ep(3, EpCase::DividesP2).unwrap().brute, r(4, 243));
        for p in [2, 3, 5, 7, 101] {
            let pr = r(p, 1);
            let one = r(1, 1);
            let shape = (&one - &one / &pr) * (&one - &one / &pr);
            assert_eq!(ep(p as u64, EpCase::DividesP1).unwrap().brute, &shape / (&pr * &pr));
            assert_eq!(
                ep(p as u64, EpCase::DividesP2).unwrap().brute,
                &shape / (&pr * &pr * &pr)
            );
            assert!(!ep(p as u64, EpCase::DividesP1).unwrap().equal);
        }
    }

    #[test]
    fn case_tags() {
        for c in EpCase::ALL {
            assert_eq!(c.tag().parse::<EpCase>().unwrap(), c);
        }
        assert!("p1".parse::<EpCase>().is_err());
        assert!(ep(4, EpCase::Generic).is_err());
    }
}
