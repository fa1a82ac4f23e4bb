//! The cubic surface `x1 x2 x3 = x4 (x1 + x2 + x3)^2`, its anticanonical
//! height, its six lines and the direct point search used as ground truth.

use std::fmt;

use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::Limits;
use crate::error::{Error, Result};

/// A point of projective 3-space given by its primitive integer
/// representative with the first nonzero coordinate positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "[i64; 4]", into = "[i64; 4]")]
pub struct ProjPoint([i64; 4]);

impl ProjPoint {
    /// Normalizes any nonzero integer vector to the canonical representative.
    pub fn new(x: [i64; 4]) -> Result<Self> {
        let g = x.iter().fold(0i64, |g, &c| g.gcd(&c));
        if g == 0 {
            return Err(Error::invalid("the zero vector is not a projective point"));
        }
        let sign = x.iter().find(|&&c| c != 0).map_or(1, |c| c.signum());
        Ok(ProjPoint(x.map(|c| c / g * sign)))
    }

    pub fn coords(&self) -> [i64; 4] {
        self.0
    }

    pub fn height(&self) -> u64 {
        self.0.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0)
    }

    pub fn to_csv(&self) -> String {
        let [a, b, c, d] = self.0;
        format!("{a},{b},{c},{d}")
    }
}

impl TryFrom<[i64; 4]> for ProjPoint {
    type Error = Error;

    fn try_from(x: [i64; 4]) -> Result<Self> {
        let p = ProjPoint::new(x)?;
        if p.0 != x {
            return Err(Error::invalid("coordinates are not in canonical form"));
        }
        Ok(p)
    }
}

impl From<ProjPoint> for [i64; 4] {
    fn from(p: ProjPoint) -> Self {
        p.0
    }
}

impl fmt::Display for ProjPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = self.0;
        write!(f, "[{a}, {b}, {c}, {d}]")
    }
}

/// `F(x) = x1 x2 x3 - x4 (x1 + x2 + x3)^2`, exactly.
pub fn eval_f(x: [i64; 4]) -> Result<i128> {
    let [a, b, c, d] = x.map(|v| v as i128);
    let over = || Error::Overflow("F(x)");
    let prod = a.checked_mul(b).and_then(|t| t.checked_mul(c)).ok_or_else(over)?;
    let s = a.checked_add(b).and_then(|t| t.checked_add(c)).ok_or_else(over)?;
    let rhs = s.checked_mul(s).and_then(|t| t.checked_mul(d)).ok_or_else(over)?;
    prod.checked_sub(rhs).ok_or_else(over)
}

/// The six lines of the surface, in the fixed order used by [`classify`]:
/// `x1 = x4 = 0`, `x2 = x4 = 0`, `x3 = x4 = 0`, then `x1 = x2 + x3 = 0`,
/// `x2 = x1 + x3 = 0`, `x3 = x1 + x2 = 0`.
pub const LINES: [&str; 6] = [
    "x1 = x4 = 0",
    "x2 = x4 = 0",
    "x3 = x4 = 0",
    "x1 = x2 + x3 = 0",
    "x2 = x1 + x3 = 0",
    "x3 = x1 + x2 = 0",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Class {
    NotOnSurface,
    /// Line index in `1..=6`, see [`LINES`].
    OnLine(u8),
    InU,
}

/// Index (1-based) of the first line containing `x`, if any.
pub fn line_of(x: [i64; 4]) -> Option<u8> {
    let [a, b, c, d] = x;
    let hits = [
        a == 0 && d == 0,
        b == 0 && d == 0,
        c == 0 && d == 0,
        a == 0 && b + c == 0,
        b == 0 && a + c == 0,
        c == 0 && a + b == 0,
    ];
    hits.iter().position(|&h| h).map(|i| i as u8 + 1)
}

pub fn classify(p: &ProjPoint) -> Class {
    match eval_f(p.0) {
        Ok(0) => match line_of(p.0) {
            Some(l) => Class::OnLine(l),
            None => Class::InU,
        },
        _ => Class::NotOnSurface,
    }
}

/// All points of the open set U with height at most `b`, sorted.
///
/// Only `x1 > 0` is scanned: off the lines every coordinate is nonzero, so
/// the canonical representative is the one with positive `x1`.
pub fn enumerate_points(b: u64, limits: &Limits) -> Result<Vec<ProjPoint>> {
    if b == 0 {
        return Err(Error::invalid("height bound must be positive"));
    }
    if b > limits.direct_limit {
        return Err(Error::limit("direct search height", b, limits.direct_limit));
    }
    let bi = b as i64;
    let mut pts: Vec<ProjPoint> = (1..=bi)
        .into_par_iter()
        .flat_map_iter(|x1| {
            let mut out = Vec::new();
            for x2 in -bi..=bi {
                if x2 == 0 {
                    continue;
                }
                for x3 in -bi..=bi {
                    if x3 == 0 {
                        continue;
                    }
                    let s = x1 + x2 + x3;
                    if s == 0 {
                        continue;
                    }
                    let prod = x1 * x2 * x3;
                    let d = s * s;
                    if prod % d != 0 {
                        continue;
                    }
                    let x4 = prod / d;
                    if x4 == 0 || x4.abs() > bi {
                        continue;
                    }
                    if x1.gcd(&x2).gcd(&x3).gcd(&x4) != 1 {
                        continue;
                    }
                    out.push(ProjPoint([x1, x2, x3, x4]));
                }
            }
            out
        })
        .collect();
    pts.sort_unstable();
    pts.dedup();
    Ok(pts)
}

/// `N_{U,H}(b)`.
pub fn count_n(b: u64, limits: &Limits) -> Result<u64> {
    Ok(enumerate_points(b, limits)?.len() as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn pt(x: [i64; 4]) -> ProjPoint {
        ProjPoint::new(x).unwrap()
    }

    /// Scans the whole box in all four coordinates.
    fn brute_points(b: i64) -> BTreeSet<ProjPoint> {
        let mut out = BTreeSet::new();
        for x1 in -b..=b {
            for x2 in -b..=b {
                for x3 in -b..=b {
                    for x4 in -b..=b {
                        let x = [x1, x2, x3, x4];
                        if x.contains(&0) || eval_f(x).unwrap() != 0 {
                            continue;
                        }
                        if x.iter().fold(0, |g, &c| c.gcd(&g)) != 1 || line_of(x).is_some() {
                            continue;
                        }
                        out.insert(pt(x));
                    }
                }
            }
        }
        out
    }

    #[test]
    fn eval_f_examples() {
        assert_eq!(eval_f([1, 1, -1, -1]).unwrap(), 0);
        assert_eq!(eval_f([9, 9, 9, 1]).unwrap(), 0);
        assert_eq!(eval_f([1, 1, 1, 1]).unwrap(), -8);
        let m = 1_000_000;
        assert!(eval_f([m, m, m, m]).is_ok());
        assert!(eval_f([i64::MAX, i64::MAX, i64::MAX, 1]).is_err());
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify(&pt([1, 1, -1, -1])), Class::InU);
        assert_eq!(classify(&pt([0, 1, -1, 5])), Class::OnLine(4));
        assert_eq!(classify(&pt([1, 1, 1, 1])), Class::NotOnSurface);
        assert_eq!(classify(&pt([1, 0, 0, 0])), Class::OnLine(2));
    }

    #[test]
    fn canonical_representative() {
        assert_eq!(pt([-2, 4, 0, -6]).coords(), [1, -2, 0, 3]);
        assert_eq!(pt([0, 0, -3, 6]).coords(), [0, 0, 1, -2]);
        assert!(ProjPoint::new([0; 4]).is_err());
        assert!(ProjPoint::try_from([-1, 1, 1, 1]).is_err());
    }

    #[test]
    fn height_one_points() {
        let pts = enumerate_points(1, &Limits::default()).unwrap();
        let expected = vec![pt([1, 1, -1, -1]), pt([1, -1, 1, -1]), pt([-1, 1, 1, -1])];
        let mut expected = expected;
        expected.sort();
        assert_eq!(pts, expected);
        assert!(pts.iter().all(|p| p.coords().iter().all(|&c| c != 0)));
        assert_eq!(count_n(1, &Limits::default()).unwrap(), 3);
    }

    #[test]
    fn direct_matches_four_coordinate_scan() {
        for b in [1, 2, 3, 5, 8, 12] {
            let fast: BTreeSet<_> = enumerate_points(b, &Limits::default()).unwrap().into_iter().collect();
            assert_eq!(fast, brute_points(b as i64), "B={b}");
        }
    }

    #[test]
    fn frozen_counts() {
        // Frozen from an independent scripted run of the same O(B^3) search.
        let l = Limits::default();
        assert_eq!(count_n(10, &l).unwrap(), brute_points(10).len() as u64);
        assert_eq!(count_n(5, &l).unwrap(), 33);
        assert_eq!(count_n(10, &l).unwrap(), 127);
        assert_eq!(count_n(25, &l).unwrap(), 619);
        assert_eq!(count_n(50, &l).unwrap(), 1714);
        assert_eq!(count_n(100, &l).unwrap(), 5209);
    }

    #[test]
    fn count_is_monotone() {
        let l = Limits::default();
        let counts: Vec<u64> = (1..=30).map(|b| count_n(b, &l).unwrap()).collect();
        assert!(counts.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn enumerated_points_are_valid_and_symmetric() {
        let pts = enumerate_points(40, &Limits::default()).unwrap();
        let set: BTreeSet<_> = pts.iter().copied().collect();
        for p in &pts {
            let x = p.coords();
            assert_eq!(eval_f(x).unwrap(), 0);
            assert_eq!(classify(p), Class::InU);
            assert_eq!(ProjPoint::new(x).unwrap(), *p);
            for perm in [[1, 0, 2], [0, 2, 1], [2, 1, 0], [1, 2, 0], [2, 0, 1]] {
                let q = pt([x[perm[0]], x[perm[1]], x[perm[2]], x[3]]);
                assert!(set.contains(&q), "{p} permuted to {q} is missing");
            }
        }
    }

    #[test]
    fn limit_enforced() {
        let l = Limits {
            direct_limit: 10,
            ..Limits::default()
        };
        assert!(matches!(enumerate_points(11, &l), Err(Error::LimitExceeded { .. })));
        assert!(enumerate_points(0, &l).is_err());
    }

    #[test]
    fn serialization() {
        let p = pt([1, 1, -1, -1]);
        assert_eq!(p.to_csv(), "1,1,-1,-1");
        assert_eq!(serde_json::to_string(&p).unwrap(), "[1,1,-1,-1]");
        let back: ProjPoint = serde_json::from_str("[1,1,-1,-1]").unwrap();
        assert_eq!(back, p);
        assert!(serde_json::from_str::<ProjPoint>("[-1,-1,1,1]").is_err());
    }

    proptest! {
        #[test]
        fn f_vanishes_on_every_line(s in -1000i64..1000, t in -1000i64..1000) {
            let lines = [
                [0, s, t, 0],
                [s, 0, t, 0],
                [s, t, 0, 0],
                [0, s, -s, t],
                [s, 0, -s, t],
                [s, -s, 0, t],
            ];
            for (i, x) in lines.iter().enumerate() {
                prop_assert_eq!(eval_f(*x).unwrap(), 0);
                if x.iter().any(|&c| c != 0) {
                    prop_assert!(line_of(*x).is_some(), "line {} parametrization", i + 1);
                }
            }
        }
    }
}
