use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{fmt12, round12};
use crate::arith::{exact_sqrt, factor, mobius, symbol, Factorizer};
use crate::config::Limits;
use crate::error::{Error, Result};
use crate::forms::{
    box_search, char_sum, conic_solvable, count_diag_quad, count_linear, diag_quad_shape, double_char_sum,
    linear_bound, rho_check, sublattice_cover, ConicCoefficients, DiagQuadInstance, LinearInstance,
};
use crate::tallies::{bounds_m, cal_t, count_m, ep, s_sum_ratios, EpCase, MBoxQuery, TSetQuery};

const SEED: u64 = 0x0d4c_0b1c;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Bound {
    Line,
    Quad,
    Rho,
    CalT,
    M1,
    M2,
    Ep,
    Theta,
    Pv,
    Bilinear,
    Cover,
    Conic,
    SLower,
}

impl Bound {
    pub const ALL: [Bound; 13] = [
        Bound::Line,
        Bound::Quad,
        Bound::Rho,
        Bound::CalT,
        Bound::M1,
        Bound::M2,
        Bound::Ep,
        Bound::Theta,
        Bound::Pv,
        Bound::Bilinear,
        Bound::Cover,
        Bound::Conic,
        Bound::SLower,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Bound::Line => "line",
            Bound::Quad => "quad",
            Bound::Rho => "rho",
            Bound::CalT => "calt",
            Bound::M1 => "m1",
            Bound::M2 => "m2",
            Bound::Ep => "ep",
            Bound::Theta => "theta",
            Bound::Pv => "pv",
            Bound::Bilinear => "bilinear",
            Bound::Cover => "cover",
            Bound::Conic => "conic",
            Bound::SLower => "s-lower",
        }
    }

    /// Hard bounds carry no constant; their `max_ratio` is informational and
    /// any violation is a failure. The others are regressed against the
    /// stored calibration.
    pub fn is_hard(self) -> bool {
        matches!(self, Bound::Line | Bound::Rho | Bound::Ep | Bound::Cover | Bound::Conic)
    }
}

impl FromStr for Bound {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Bound::ALL.into_iter().find(|b| b.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Bound::ALL.iter().map(|b| b.name()).collect();
            Error::invalid(format!("unknown bound {s:?}; expected one of {}", names.join(", ")))
        })
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Grid {
    Default,
    Small,
}

impl Grid {
    pub fn name(self) -> &'static str {
        match self {
            Grid::Default => "default",
            Grid::Small => "small",
        }
    }

    fn pick<T>(self, default: T, small: T) -> T {
        match self {
            Grid::Default => default,
            Grid::Small => small,
        }
    }
}

impl FromStr for Grid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "default" => Ok(Grid::Default),
            "small" => Ok(Grid::Small),
            _ => Err(Error::invalid(format!("unknown grid {s:?}; expected default or small"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub hard: bool,
    pub instances: u64,
    pub violations: u64,
    /// Rounded to 12 significant digits.
    pub max_ratio: f64,
    /// The first violating instance, or else the one attaining `max_ratio`.
    pub witness: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl BoundReport {
    pub fn fuzz_json(&self) -> Value {
        json!({
            "lemma": self.name,
            "n_instances": self.instances,
            "violations": self.violations,
            "max_ratio": self.max_ratio,
            "witness_instance": self.witness,
        })
    }
}

struct Outcome {
    ratio: f64,
    violated: bool,
    witness: Value,
}

impl Outcome {
    fn new(ratio: f64, violated: bool, witness: Value) -> Self {
        Outcome {
            ratio,
            violated,
            witness,
        }
    }
}

fn summarize(bound: Bound, outcomes: Vec<Outcome>, note: Option<String>) -> BoundReport {
    let violations = outcomes.iter().filter(|o| o.violated).count() as u64;
    let mut best: Option<&Outcome> = None;
    for o in &outcomes {
        if best.is_none_or(|b| o.ratio > b.ratio) {
            best = Some(o);
        }
    }
    let witness = outcomes.iter().find(|o| o.violated).or(best).map(|o| o.witness.clone());
    BoundReport {
        name: bound.name().to_string(),
        hard: bound.is_hard(),
        instances: outcomes.len() as u64,
        violations,
        max_ratio: round12(best.map_or(0.0, |o| o.ratio)),
        witness,
        note,
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Evaluates every instance in parallel; results keep instance order.
fn evaluate<T: Sync>(items: &[T], f: impl Fn(&T) -> Result<Outcome> + Sync + Send) -> Result<Vec<Outcome>> {
    items.par_iter().map(f).collect()
}

pub fn run_bound(bound: Bound, grid: Grid, limits: &Limits) -> Result<BoundReport> {
    match bound {
        Bound::Line => line(grid, limits),
        Bound::Quad => quad(grid, limits),
        Bound::Rho => rho(grid),
        Bound::CalT => calt(grid, limits),
        Bound::M1 | Bound::M2 => mbox(bound, grid, limits),
        Bound::Ep => ep_report(grid),
        Bound::Theta => theta(grid, limits),
        Bound::Pv => pv(grid, limits),
        Bound::Bilinear => bilinear(grid, limits),
        Bound::Cover => cover(grid),
        Bound::Conic => conic(grid, limits),
        Bound::SLower => s_lower(grid, limits),
    }
}

/// Every report, in the order of [`Bound::ALL`].
pub fn bound_suite(grid: Grid, limits: &Limits) -> Result<Vec<BoundReport>> {
    Bound::ALL.iter().map(|&b| run_bound(b, grid, limits)).collect()
}

/// Fails on the first report with a violation, carrying its witness.
pub fn check_hard(reports: &[BoundReport]) -> Result<()> {
    match reports.iter().find(|r| r.violations > 0) {
        None => Ok(()),
        Some(r) => Err(Error::Invariant(format!(
            "{}: {} of {} instances violate the bound; witness {}",
            r.name,
            r.violations,
            r.instances,
            r.witness.as_ref().map_or("none".to_string(), Value::to_string)
        ))),
    }
}

const CALIBRATION: &str = include_str!("../../fixtures/calibration.json");

/// Stored `max_ratio` values, formatted to 12 significant digits, for the
/// calibrated bounds on `grid`.
pub fn calibration_fixture(grid: Grid) -> Result<BTreeMap<String, String>> {
    let mut all: BTreeMap<String, BTreeMap<String, String>> =
        serde_json::from_str(CALIBRATION).map_err(|e| Error::Invariant(format!("calibration fixture: {e}")))?;
    Ok(all.remove(grid.name()).unwrap_or_default())
}

/// Compares every calibrated report with its fixture; the formatted strings
/// must match exactly.
pub fn check_regression(reports: &[BoundReport], grid: Grid) -> Result<()> {
    let fixture = calibration_fixture(grid)?;
    for r in reports.iter().filter(|r| !r.hard) {
        let got = fmt12(r.max_ratio);
        match fixture.get(&r.name) {
            Some(want) if *want == got => {}
            Some(want) => {
                return Err(Error::Invariant(format!(
                    "{}: max_ratio {got} differs from the fixture {want}",
                    r.name
                )))
            }
            None => {
                return Err(Error::Invariant(format!(
                    "{}: no calibration stored for grid {}",
                    r.name,
                    grid.name()
                )))
            }
        }
    }
    Ok(())
}

fn random_primitive(rng: &mut ChaCha8Rng, bound: i64, nonzero: bool) -> [i64; 3] {
    loop {
        let h = [0; 3].map(|_| rng.gen_range(-bound..=bound));
        if nonzero && h.contains(&0) {
            continue;
        }
        if h[0].gcd(&h[1]).gcd(&h[2]) == 1 {
            return h;
        }
    }
}

fn random_box(rng: &mut ChaCha8Rng, max: i64, max_den: i64) -> [Ratio<i64>; 3] {
    [0; 3].map(|_| {
        let den = rng.gen_range(1..=max_den);
        Ratio::new(rng.gen_range(1..=max * den), den)
    })
}

fn line(grid: Grid, limits: &Limits) -> Result<BoundReport> {
    let n = grid.pick(10_000, 500);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let insts: Vec<LinearInstance> = (0..n)
        .map(|_| {
            let h = random_primitive(&mut rng, 50, false);
            LinearInstance::new(h, random_box(&mut rng, 20, 4))
        })
        .collect::<Result<_>>()?;
    let out = evaluate(&insts, |inst| {
        let count = count_linear(inst, limits)? as f64;
        let bound = linear_bound(inst);
        Ok(Outcome::new(count / bound, count > bound, json!(inst)))
    })?;
    Ok(summarize(Bound::Line, out, None))
}

fn quad(grid: Grid, limits: &Limits) -> Result<BoundReport> {
    let n = grid.pick(2_000, 200);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    let mut insts = Vec::with_capacity(n);
    while insts.len() < n {
        let g = [0; 3].map(|_| rng.gen_range(-10i64..=10));
        if g.contains(&0) || mobius(&factor(g[0] * g[1] * g[2])?) == 0 {
            continue;
        }
        let h = random_primitive(&mut rng, 10, true);
        insts.push(DiagQuadInstance::new(g, h, random_box(&mut rng, 30, 3))?);
    }
    let out = evaluate(&insts, |inst| {
        let count = count_diag_quad(inst, limits)? as f64;
        Ok(Outcome::new(ratio(count, diag_quad_shape(inst)?), false, json!(inst)))
    })?;
    Ok(summarize(Bound::Quad, out, None))
}

fn rho(grid: Grid) -> Result<BoundReport> {
    let qmax: u64 = grid.pick(1000, 99);
    let qs: Vec<u64> = (1..=qmax).step_by(2).collect();
    let per_q: Vec<Vec<Outcome>> = qs
        .par_iter()
        .map(|&q| {
            let mut out = Vec::new();
            for a in -20i64..=20 {
                for b in -20i64..=20 {
                    if (a * b).gcd(&(q as i64)) != 1 {
                        continue;
                    }
                    let r = rho_check(q, a, b)?;
                    let ratio = ratio(r.rho as f64, r.bound.max(1) as f64);
                    out.push(Outcome::new(
                        ratio,
                        !r.holds,
                        json!({"q": q, "a": a, "b": b, "rho": r.rho, "bound": r.bound}),
                    ));
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let even = rho_check(4, 1, -1)?;
    let note = format!(
        "odd q only; q = 4, a = 1, b = -1 gives rho = {} against the divisor sum {}",
        even.rho, even.bound
    );
    Ok(summarize(Bound::Rho, per_q.into_iter().flatten().collect(), Some(note)))
}

fn calt(grid: Grid, limits: &Limits) -> Result<BoundReport> {
    let sides: &[f64] = grid.pick(&[3.0, 6.0, 12.0], &[2.0, 4.0]);
    let coefs: &[[i64; 3]] = grid.pick(
        &[[1, 1, -1], [1, 2, -3], [-1, 3, 5], [2, -5, 3], [1, -1, -1]],
        &[[1, 1, -1], [1, 2, -3]],
    );
    let hs: &[u64] = grid.pick(&[1, 2, 4], &[1, 2]);
    let mut queries = Vec::new();
    for (i, &y1) in sides.iter().enumerate() {
        for (j, &y2) in sides.iter().enumerate().skip(i) {
            for &y3 in &sides[j..] {
                for &a in coefs {
                    for &h in hs {
                        queries.push(TSetQuery::new([y1, y2, y3], a, h)?);
                    }
                }
            }
        }
    }
    // build_t already runs in parallel, so the queries go one by one.
    let out = queries
        .iter()
        .map(|q| {
            let c = cal_t(q, limits)?;
            Ok(Outcome::new(c.ratio, false, json!({"query": q, "value": c.value})))
        })
        .collect::<Result<_>>()?;
    Ok(summarize(Bound::CalT, out, None))
}

fn mbox(bound: Bound, grid: Grid, limits: &Limits) -> Result<BoundReport> {
    let ab: &[[f64; 3]] = grid.pick(
        &[[1.0, 1.0, 1.0], [2.0, 2.0, 2.0], [4.0, 4.0, 4.0], [1.0, 2.0, 4.0]],
        &[[1.0, 1.0, 1.0], [2.0, 2.0, 2.0]],
    );
    let cs: &[[f64; 3]] = grid.pick(
        &[[1.0, 1.0, 1.0], [3.0, 3.0, 3.0], [6.0, 6.0, 6.0], [2.0, 4.0, 8.0]],
        &[[1.0, 1.0, 1.0], [3.0, 3.0, 3.0]],
    );
    let mut out = Vec::new();
    for &a in ab {
        for &b in ab {
            for &c in cs {
                let q = MBoxQuery::new(a, b, c)?;
                let count = count_m(&q, limits)?;
                let bounds = bounds_m(&q, limits.eps);
                let shape = match bound {
                    Bound::M1 => bounds.m1,
                    _ => bounds.m2.iter().copied().fold(f64::INFINITY, f64::min),
                };
                out.push(Outcome::new(
                    ratio(count as f64, shape),
                    false,
                    json!({"query": q, "count": count}),
                ));
            }
        }
    }
    Ok(summarize(bound, out, None))
}

fn ep_report(grid: Grid) -> Result<BoundReport> {
    let pmax: u64 = grid.pick(100, 20);
    let fz = Factorizer::global();
    let mut out = Vec::new();
    for p in (2..=pmax).filter(|&p| fz.is_prime(p)) {
        for case in EpCase::ALL {
            let e = ep(p, case)?;
            let r = (e.brute.clone() / e.closed.clone()).to_f64().unwrap_or(f64::NAN);
            let w = json!({"p": p, "case": case.tag(), "brute": e.brute.to_string(), "closed": e.closed.to_string()});
            out.push(Outcome::new(r, !e.equal, w));
        }
    }
    Ok(summarize(Bound::Ep, out, None))
}

fn theta(grid: Grid, limits: &Limits) -> Result<BoundReport> {
    let zmax: u64 = grid.pick(1_000_000, 10_000);
    if zmax > limits.factor_limit {
        return Err(Error::limit("theta sum range", zmax, limits.factor_limit));
    }
    let fz = Factorizer::global();
    let mut acc = 0.0f64;
    let mut out = Vec::new();
    for z in 1..=zmax {
        let f = fz.factor(z as i64)?;
        acc += f.primes().map(|p| (1.0 + 1.0 / p as f64).powi(2)).product::<f64>();
        // Checkpoints at 1, 2, 5, 10, 20, 50, ...
        let lead = z / 10u64.pow(z.ilog10());
        if z % 10u64.pow(z.ilog10()) == 0 && matches!(lead, 1 | 2 | 5) {
            out.push(Outcome::new(
                acc / z as f64,
                false,
                json!({"z": z, "sum": round12(acc)}),
            ));
        }
    }
    Ok(summarize(Bound::Theta, out, None))
}

fn pv(grid: Grid, limits: &Limits) -> Result<BoundReport> {
    let qmax: u64 = grid.pick(2000, 300);
    let qs: Vec<u64> = (3..=qmax)
        .step_by(2)
        .filter(|&q| exact_sqrt(q as u128).is_none())
        .collect();
    let out = evaluate(&qs, |&q| {
        let period = char_sum(q, 1, q as i64, limits)?.sum;
        let mut acc = 0i64;
        let mut best = (0i64, 0u64);
        for n in 1..=q {
            acc += symbol(n as i64, q) as i64;
            if acc.abs() > best.0 {
                best = (acc.abs(), n);
            }
        }
        let qf = q as f64;
        let w = json!({"q": q, "N": best.1, "max_prefix": best.0, "period_sum": period});
        Ok(Outcome::new(best.0 as f64 / (qf.sqrt() * qf.ln()), period != 0, w))
    })?;
    let note = "violations count moduli whose full-period sum is nonzero".to_string();
    Ok(summarize(Bound::Pv, out, Some(note)))
}

fn bilinear(grid: Grid, limits: &Limits) -> Result<BoundReport> {
    let sizes: &[u64] = grid.pick(&[10, 30, 100, 300], &[10, 30]);
    let pairs: Vec<(u64, u64)> = sizes.iter().flat_map(|&m| sizes.iter().map(move |&n| (m, n))).collect();
    let out = evaluate(&pairs, |&(m, n)| {
        let d = double_char_sum(m, n, limits)?;
        Ok(Outcome::new(
            d.ratio,
            false,
            json!({"M": m, "N": n, "value": d.value}),
        ))
    })?;
    Ok(summarize(Bound::Bilinear, out, None))
}

fn cover(grid: Grid) -> Result<BoundReport> {
    let (primes, smax, tmax, cmax, m): (&[u64], u32, u32, i64, u32) =
        grid.pick((&[3, 5, 7], 3, 4, 5, 20), (&[3], 2, 3, 2, 10));
    let mut cases = Vec::new();
    for &p in primes {
        let coefs: Vec<i64> = (-cmax..=cmax).filter(|&x| x != 0 && x % p as i64 != 0).collect();
        for sigma in 0..=smax {
            for tau in sigma..=tmax {
                for &a in &coefs {
                    for &b in &coefs {
                        for &c in &coefs {
                            cases.push((p, [a, b, c], sigma, tau));
                        }
                    }
                }
            }
        }
    }
    let out = evaluate(&cases, |&(p, abc, sigma, tau)| {
        let r = sublattice_cover(p, abc, sigma, tau, m)?;
        let frac = ratio(r.uncovered as f64, r.solutions as f64);
        let w = json!({
            "p": p, "abc": abc, "sigma": sigma, "tau": tau, "M": m,
            "determinants": r.determinants, "expected_determinant": r.expected_determinant,
            "uncovered": r.uncovered, "solutions": r.solutions, "point": r.witness,
        });
        Ok(Outcome::new(frac, !(r.covered && r.determinants_ok), w))
    })?;
    let note = "max_ratio is the largest uncovered fraction of box solutions".to_string();
    Ok(summarize(Bound::Cover, out, Some(note)))
}

fn conic(grid: Grid, limits: &Limits) -> Result<BoundReport> {
    let amax: i64 = grid.pick(30, 10);
    let mut sf = Vec::new();
    for n in 1..=amax {
        if mobius(&factor(n)?) != 0 {
            sf.push(n);
        }
    }
    let mut triples = Vec::new();
    for (i, &x) in sf.iter().enumerate() {
        for (j, &y) in sf.iter().enumerate().skip(i) {
            for &z in &sf[j..] {
                if x.gcd(&y) != 1 || x.gcd(&z) != 1 || y.gcd(&z) != 1 {
                    continue;
                }
                for signs in [
                    [1, 1, -1],
                    [1, -1, 1],
                    [-1, 1, 1],
                    [1, -1, -1],
                    [-1, 1, -1],
                    [-1, -1, 1],
                ] {
                    triples.push([x * signs[0], y * signs[1], z * signs[2]]);
                }
            }
        }
    }
    let out = evaluate(&triples, |&a| {
        let verdict = conic_solvable(&ConicCoefficients::new(a)?)?;
        let found = box_search(a, limits, |_| true)?;
        let w = json!({"a": a, "legendre": verdict, "point": found});
        Ok(Outcome::new(
            if verdict == found.is_some() { 0.0 } else { 1.0 },
            verdict != found.is_some(),
            w,
        ))
    })?;
    let note = "max_ratio is 1 exactly when some verdict disagrees with the box search".to_string();
    Ok(summarize(Bound::Conic, out, Some(note)))
}

fn s_lower(grid: Grid, limits: &Limits) -> Result<BoundReport> {
    let top: u32 = grid.pick(6, 4);
    let xs: Vec<u64> = (1..=top).map(|e| 10u64.pow(e)).collect();
    let out = s_sum_ratios(&xs, limits)?
        .into_iter()
        .map(|(x, s, r)| Outcome::new(1.0 / r, false, json!({"x": x, "S": round12(s)})))
        .collect();
    let note = "ratio is x (log x)^5 / S(x), so a bounded max_ratio is the lower bound".to_string();
    Ok(summarize(Bound::SLower, out, Some(note)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for b in Bound::ALL {
            assert_eq!(b.name().parse::<Bound>().unwrap(), b);
        }
        assert!("lemma1".parse::<Bound>().is_err());
        assert_eq!("small".parse::<Grid>().unwrap(), Grid::Small);
    }

    #[test]
    fn summary_prefers_violations_for_the_witness() {
        let out = vec![
            Outcome::new(0.5, false, json!(1)),
            Outcome::new(2.0, false, json!(2)),
            Outcome::new(0.1, true, json!(3)),
            Outcome::new(2.0, false, json!(4)),
        ];
        let r = summarize(Bound::Line, out, None);
        assert_eq!((r.instances, r.violations, r.max_ratio), (4, 1, 2.0));
        assert_eq!(r.witness, Some(json!(3)));
        assert!(check_hard(&[r]).is_err());
        let r = summarize(
            Bound::Quad,
            vec![Outcome::new(0.5, false, json!(1)), Outcome::new(2.0, false, json!(2))],
            None,
        );
        assert_eq!(r.witness, Some(json!(2)));
        assert!(check_hard(&[r]).is_ok());
    }

    #[test]
    fn small_grid_hard_bounds() {
        let l = Limits::default();
        for b in [Bound::Line, Bound::Rho, Bound::Conic] {
            let r = run_bound(b, Grid::Small, &l).unwrap();
            assert!(r.instances > 0 && r.violations == 0, "{r:?}");
        }
        let r = run_bound(Bound::Ep, Grid::Small, &l).unwrap();
        // Only the generic case is an identity.
        assert_eq!(r.violations, 2 * 8);
        assert_eq!(r.max_ratio, 1.0);
    }

    #[test]
    fn rho_note_reports_even_counterexample() {
        let r = run_bound(Bound::Rho, Grid::Small, &Limits::default()).unwrap();
        assert!(r.note.unwrap().contains("rho = 2 against the divisor sum 1"));
    }

    #[test]
    fn reports_are_thread_count_independent() {
        let l = Limits::default();
        let run = |threads| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| [Bound::Line, Bound::Quad, Bound::Pv].map(|b| run_bound(b, Grid::Small, &l).unwrap()))
        };
        let one = run(1);
        let four = run(4);
        for (a, b) in one.iter().zip(&four) {
            assert_eq!(serde_json::to_string(a).unwrap(), serde_json::to_string(b).unwrap());
        }
    }

    #[test]
    fn small_grid_matches_calibration() {
        let reports = bound_suite(Grid::Small, &Limits::default()).unwrap();
        check_regression(&reports, Grid::Small).unwrap();
    }

    /// Prints the calibration fixture for both grids.
    #[test]
    #[ignore]
    fn print_calibration() {
        let l = Limits::default();
        let mut all = BTreeMap::new();
        for grid in [Grid::Default, Grid::Small] {
            let table: BTreeMap<String, String> = bound_suite(grid, &l)
                .unwrap()
                .into_iter()
                .filter(|r| !r.hard)
                .map(|r| (r.name, fmt12(r.max_ratio)))
                .collect();
            all.insert(grid.name(), table);
        }
        println!("{}", serde_json::to_string_pretty(&all).unwrap());
    }
}
