//! The `d4count` command line: argument parsing, dispatch and exit codes.
//!
//! Exit codes: 0 success, 1 invariant violation, 2 usage or invalid input,
//! 3 resource limit exceeded.

use std::collections::BTreeSet;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::builder::PossibleValuesParser;
use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::Serialize;
use serde_json::json;

use crate::arith::Factorizer;
use crate::config::Limits;
use crate::error::Error;
use crate::experiments::{
    check_hard, check_regression, fmt12, growth_csv, growth_table, run_bound, Bound, BoundReport, Grid, GrowthRow,
    Method, ASYMPTOTIC_NOTE,
};
use crate::forms::{find_conic_point, ConicCoefficients};
use crate::surface::ProjPoint;
use crate::tallies::{cal_t, ep, lower_sum, s_sum, theta_sum, EpCase, EpReport, TSetQuery};
use crate::torsor::{compare, enumerate_torsor, preimages, Comparison, TorsorPoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Plain,
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "d4count",
    version,
    about = "Rational points of bounded height on x1 x2 x3 = x4 (x1 + x2 + x3)^2"
)]
pub struct Invocation {
    #[command(subcommand)]
    pub command: Command,

    #[arg(long, global = true, value_enum, default_value_t = Format::Plain)]
    pub format: Format,

    /// Limits file with `key = value` lines.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Diagnostics and a line counter on stderr.
    #[arg(long, global = true)]
    pub verbose: bool,

    #[arg(long, global = true)]
    pub eps: Option<f64>,

    #[arg(long, global = true)]
    pub factor_limit: Option<u64>,

    #[arg(long, global = true)]
    pub sum_limit: Option<u64>,

    #[arg(long, global = true)]
    pub direct_limit: Option<u64>,

    #[arg(long, global = true)]
    pub torsor_limit: Option<u64>,

    #[arg(long, global = true)]
    pub box_limit: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Number of points of height at most B off the lines.
    Count {
        #[arg(long)]
        height: u64,
        #[arg(long, default_value = "direct")]
        method: Method,
    },
    /// Integral points of the torsor.
    Torsor {
        #[command(subcommand)]
        action: TorsorCommand,
    },
    /// Whether a1 x1^2 + a2 x2^2 + a3 x3^2 = 0 has a nonzero integer point.
    #[command(allow_negative_numbers = true)]
    Solubility { a1: i64, a2: i64, a3: i64 },
    /// One report of the bound-verification suite, or all of them.
    Lemma {
        #[arg(value_parser = PossibleValuesParser::new(lemma_choices()))]
        which: String,
        #[arg(long, default_value = "default")]
        grid: Grid,
    },
    /// Point counts over a list of heights.
    Growth {
        #[arg(long, value_delimiter = ',', required = true)]
        heights: Vec<u64>,
        #[arg(long, default_value = "both")]
        method: Method,
    },
    /// The local factor at p: Möbius sum against closed form.
    Ep {
        #[arg(long)]
        p: u64,
        #[arg(long, default_value = "all", value_parser = PossibleValuesParser::new(["all", "generic", "p_divides_P1", "p_divides_P2"]))]
        case: String,
    },
    /// Exact arithmetic sums.
    Sums {
        #[command(subcommand)]
        which: SumsCommand,
    },
}

#[derive(Debug, Subcommand)]
pub enum TorsorCommand {
    /// Every torsor point of height at most B.
    Enumerate {
        #[arg(long)]
        height: u64,
    },
    /// Torsor points above a surface point.
    #[command(allow_negative_numbers = true)]
    Preimages { x1: i64, x2: i64, x3: i64, x4: i64 },
    /// Both enumerators side by side at each height.
    Compare {
        #[arg(long, value_delimiter = ',', required = true)]
        height: Vec<u64>,
    },
}

#[derive(Debug, Subcommand)]
pub enum SumsCommand {
    /// `S(x) = sum_{n <= x} |mu(n)| d_6(n) phi(n) / n`.
    S {
        #[arg(long)]
        x: u64,
    },
    /// `sum_{n <= z} theta(n)^2`.
    Theta {
        #[arg(long)]
        z: u64,
    },
    /// `sum_{P <= B^{2/201}} |mu(P)| d_6(P) (B / P) (phi(P) / P)`; B may be arbitrarily large.
    Lower {
        #[arg(long)]
        b: BigUint,
    },
    /// The weighted count of the set T(Y; a, H).
    Calt {
        #[arg(long, value_delimiter = ',', required = true)]
        y: Vec<u64>,
        #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
        a: Vec<i64>,
        #[arg(long)]
        h: u64,
    },
}

fn lemma_choices() -> Vec<&'static str> {
    let mut names: Vec<&'static str> = Bound::ALL.iter().map(|b| b.name()).collect();
    names.push("all");
    names
}

pub fn parse<I, T>(args: I) -> Result<Invocation, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    Invocation::try_parse_from(args)
}

enum Failure {
    Core(Error),
    Io(io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

type Outcome = std::result::Result<(), Failure>;

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Invariant(_) => 1,
        Error::LimitExceeded { .. } | Error::Overflow(_) => 3,
        Error::Zero | Error::InvalidInput(_) | Error::NotOnSurface | Error::OnLine(_) => 2,
    }
}

fn limits(inv: &Invocation) -> Result<Limits, Error> {
    let mut l = match &inv.config {
        Some(path) => Limits::load(path)?,
        None => Limits::default(),
    };
    let overrides = [
        (&mut l.factor_limit, inv.factor_limit),
        (&mut l.sum_limit, inv.sum_limit),
        (&mut l.direct_limit, inv.direct_limit),
        (&mut l.torsor_limit, inv.torsor_limit),
        (&mut l.box_limit, inv.box_limit),
    ];
    for (slot, value) in overrides {
        if let Some(v) = value {
            *slot = v;
        }
    }
    if let Some(eps) = inv.eps {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::invalid(format!("eps = {eps} must lie strictly between 0 and 1")));
        }
        l.eps = eps;
    }
    Ok(l)
}

/// Runs the invocation, writing data to `out` and diagnostics to `err`, and
/// returns the exit code.
pub fn run(inv: &Invocation, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let (mut data, mut diag) = (Vec::new(), Vec::new());
    let result = limits(inv).map_err(Failure::from).and_then(|l| {
        if !Factorizer::install_global(l.factor_limit) && Factorizer::global().limit() != l.factor_limit && inv.verbose
        {
            let _ = writeln!(
                diag,
                "factorizer already built with limit {}",
                Factorizer::global().limit()
            );
        }
        match inv.threads {
            Some(n) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build()
                    .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
                pool.install(|| dispatch(inv, &l, &mut data, &mut diag))
            }
            None => dispatch(inv, &l, &mut data, &mut diag),
        }
    });
    if inv.verbose {
        let lines = data.iter().filter(|&&b| b == b'\n').count();
        let _ = writeln!(diag, "{lines} lines written");
    }
    let written = out.write_all(&data).and_then(|_| out.flush());
    let _ = err.write_all(&diag);
    match (result, written) {
        (Ok(()), Ok(())) => 0,
        (Err(Failure::Core(e)), _) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
        (Err(Failure::Io(e)), _) | (Ok(()), Err(e)) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}

fn write_json(out: &mut dyn Write, value: &impl Serialize) -> Outcome {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Invariant(format!("serialization: {e}")))?;
    writeln!(out, "{text}")?;
    Ok(())
}

fn dispatch(inv: &Invocation, l: &Limits, out: &mut Vec<u8>, err: &mut Vec<u8>) -> Outcome {
    let fmt = inv.format;
    match &inv.command {
        Command::Count { height, method } => count(*height, *method, fmt, l, out),
        Command::Torsor { action } => match action {
            TorsorCommand::Enumerate { height } => {
                let pts = enumerate_torsor(*height, l)?;
                torsor_points(&pts, fmt, out)
            }
            TorsorCommand::Preimages { x1, x2, x3, x4 } => {
                let p = ProjPoint::new([*x1, *x2, *x3, *x4])?;
                torsor_points(&preimages(&p)?, fmt, out)
            }
            TorsorCommand::Compare { height } => torsor_compare(height, fmt, l, out, err),
        },
        Command::Solubility { a1, a2, a3 } => solubility([*a1, *a2, *a3], fmt, l, out),
        Command::Lemma { which, grid } => lemma(which, *grid, fmt, l, out, err),
        Command::Growth { heights, method } => growth(heights, *method, fmt, l, out, err),
        Command::Ep { p, case } => ep_command(*p, case, fmt, out),
        Command::Sums { which } => sums(which, fmt, l, out),
    }
}

fn count(height: u64, method: Method, fmt: Format, l: &Limits, out: &mut dyn Write) -> Outcome {
    let row = growth_table(&[height], method, l)?.remove(0);
    let n = row.n_direct.or(row.n_torsor).unwrap_or(0);
    match fmt {
        Format::Plain => writeln!(out, "{n}")?,
        Format::Csv => writeln!(out, "B,method,count\n{height},{method},{n}")?,
        Format::Json => write_json(out, &json!({"B": height, "method": method, "count": n}))?,
    }
    Ok(())
}

const TORSOR_HEADER: &str = "s0,s1,s2,s3,u1,u2,u3,y1,y2,y3";

fn torsor_points(pts: &[TorsorPoint], fmt: Format, out: &mut dyn Write) -> Outcome {
    match fmt {
        Format::Json => write_json(out, &pts)?,
        Format::Csv | Format::Plain => {
            if fmt == Format::Csv {
                writeln!(out, "{TORSOR_HEADER}")?;
            }
            for t in pts {
                writeln!(out, "{}", t.to_csv())?;
            }
        }
    }
    Ok(())
}

fn histogram(c: &Comparison) -> String {
    c.multiplicity_histogram
        .iter()
        .map(|(m, n)| format!("{m}:{n}"))
        .collect::<Vec<_>>()
        .join(";")
}

fn compare_note(rows: &[(u64, Comparison)]) -> String {
    let ratios: BTreeSet<&str> = rows.iter().map(|(_, c)| c.ratio.as_str()).collect();
    let ratios: Vec<&str> = ratios.into_iter().collect();
    format!(
        "measured torsor/surface ratio {} against the asymptotic constant 1/4; {ASYMPTOTIC_NOTE}",
        ratios.join(", ")
    )
}

fn torsor_compare(heights: &[u64], fmt: Format, l: &Limits, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let mut heights = heights.to_vec();
    heights.sort_unstable();
    heights.dedup();
    let rows = heights
        .iter()
        .map(|&b| Ok((b, compare(b, l)?)))
        .collect::<Result<Vec<_>, Error>>()?;
    let note = compare_note(&rows);
    match fmt {
        Format::Json => {
            let table: Vec<_> = rows.iter().map(|(b, c)| json!({"B": b, "comparison": c})).collect();
            write_json(out, &json!({"rows": table, "notes": note}))?;
        }
        Format::Csv => {
            writeln!(out, "B,n_surface,n_torsor,ratio,sets_equal,multiplicities")?;
            for (b, c) in &rows {
                writeln!(
                    out,
                    "{b},{},{},{},{},{}",
                    c.n_surface,
                    c.n_torsor,
                    c.ratio,
                    c.sets_equal,
                    histogram(c)
                )?;
            }
            writeln!(err, "note: {note}")?;
        }
        Format::Plain => {
            writeln!(
                out,
                "{:>6} {:>10} {:>10} {:>10} {:>10}  multiplicities",
                "B", "n_surface", "n_torsor", "ratio", "sets_equal"
            )?;
            for (b, c) in &rows {
                writeln!(
                    out,
                    "{b:>6} {:>10} {:>10} {:>10} {:>10}  {}",
                    c.n_surface,
                    c.n_torsor,
                    c.ratio,
                    c.sets_equal,
                    histogram(c)
                )?;
            }
            writeln!(err, "note: {note}")?;
        }
    }
    if let Some((b, _)) = rows.iter().find(|(_, c)| !c.sets_equal) {
        return Err(Error::Invariant(format!("the torsor images differ from the direct search at B = {b}")).into());
    }
    Ok(())
}

fn solubility(a: [i64; 3], fmt: Format, l: &Limits, out: &mut dyn Write) -> Outcome {
    let point = find_conic_point(&ConicCoefficients::new(a)?, l)?;
    match fmt {
        Format::Plain => match &point {
            Some(p) => writeln!(out, "soluble {} {} {}", p.x[0], p.x[1], p.x[2])?,
            None => writeln!(out, "insoluble")?,
        },
        Format::Csv => {
            writeln!(out, "a1,a2,a3,soluble,x1,x2,x3,g12,g13,g23")?;
            let tail = match &point {
                Some(p) => {
                    let v: Vec<String> = p.x.iter().chain(&p.pair_gcds).map(i64::to_string).collect();
                    v.join(",")
                }
                None => ",,,,,".to_string(),
            };
            writeln!(out, "{},{},{},{},{tail}", a[0], a[1], a[2], point.is_some())?;
        }
        Format::Json => write_json(
            out,
            &json!({
                "a": a,
                "soluble": point.is_some(),
                "point": point.as_ref().map(|p| p.x),
                "pair_gcds": point.as_ref().map(|p| p.pair_gcds),
            }),
        )?,
    }
    Ok(())
}

fn lemma(which: &str, grid: Grid, fmt: Format, l: &Limits, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let bounds: Vec<Bound> = if which == "all" {
        Bound::ALL.to_vec()
    } else {
        vec![which.parse()?]
    };
    let reports = bounds
        .iter()
        .map(|&b| run_bound(b, grid, l))
        .collect::<Result<Vec<BoundReport>, Error>>()?;
    match fmt {
        Format::Json => write_json(out, &reports)?,
        Format::Csv => {
            writeln!(out, "name,hard,instances,violations,max_ratio")?;
            for r in &reports {
                writeln!(
                    out,
                    "{},{},{},{},{}",
                    r.name,
                    r.hard,
                    r.instances,
                    r.violations,
                    fmt12(r.max_ratio)
                )?;
            }
        }
        Format::Plain => {
            for r in &reports {
                let kind = if r.hard { "hard" } else { "calibrated" };
                writeln!(
                    out,
                    "{:<9} {kind:<10} instances {:>6} violations {:>5} max_ratio {}",
                    r.name,
                    r.instances,
                    r.violations,
                    fmt12(r.max_ratio)
                )?;
            }
        }
    }
    for r in &reports {
        if let Some(note) = &r.note {
            writeln!(err, "note: {}: {note}", r.name)?;
        }
    }
    check_hard(&reports)?;
    if *l == Limits::default() {
        check_regression(&reports, grid)?;
    } else {
        writeln!(
            err,
            "note: calibration fixtures are not compared under non-default limits"
        )?;
    }
    Ok(())
}

fn growth(
    heights: &[u64],
    method: Method,
    fmt: Format,
    l: &Limits,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Outcome {
    let rows: Vec<GrowthRow> = growth_table(heights, method, l)?;
    match fmt {
        Format::Csv => {
            write!(out, "{}", growth_csv(&rows))?;
            writeln!(err, "note: {ASYMPTOTIC_NOTE}")?;
        }
        Format::Json => write_json(out, &json!({"rows": rows, "notes": ASYMPTOTIC_NOTE}))?,
        Format::Plain => {
            let opt = |v: Option<u64>| v.map_or("-".to_string(), |x| x.to_string());
            writeln!(out, "{:>8} {:>10} {:>10} {:>16}", "B", "n_direct", "n_torsor", "ratio6")?;
            for r in &rows {
                let ratio = r.ratio6.map_or("-".to_string(), fmt12);
                writeln!(
                    out,
                    "{:>8} {:>10} {:>10} {:>16}",
                    r.b,
                    opt(r.n_direct),
                    opt(r.n_torsor),
                    ratio
                )?;
            }
            writeln!(err, "note: {ASYMPTOTIC_NOTE}")?;
        }
    }
    Ok(())
}

fn ep_command(p: u64, case: &str, fmt: Format, out: &mut dyn Write) -> Outcome {
    let cases: Vec<EpCase> = if case == "all" {
        EpCase::ALL.to_vec()
    } else {
        vec![case.parse()?]
    };
    let reports = cases
        .iter()
        .map(|&c| ep(p, c))
        .collect::<Result<Vec<EpReport>, Error>>()?;
    match fmt {
        Format::Json => {
            let v: Vec<_> = reports
                .iter()
                .map(|r| {
                    json!({"p": r.p, "case": r.case.tag(), "brute": r.brute.to_string(), "closed": r.closed.to_string(), "equal": r.equal})
                })
                .collect();
            write_json(out, &v)?;
        }
        Format::Csv | Format::Plain => {
            if fmt == Format::Csv {
                writeln!(out, "p,case,brute,closed,equal")?;
            }
            let sep = if fmt == Format::Csv { "," } else { " " };
            for r in &reports {
                let fields = [
                    r.p.to_string(),
                    r.case.tag().to_string(),
                    r.brute.to_string(),
                    r.closed.to_string(),
                    r.equal.to_string(),
                ];
                writeln!(out, "{}", fields.join(sep))?;
            }
        }
    }
    if let Some(r) = reports.iter().find(|r| !r.equal) {
        return Err(Error::Invariant(format!(
            "at p = {} in case {} the Möbius sum is {} but the closed form is {}",
            r.p,
            r.case.tag(),
            r.brute,
            r.closed
        ))
        .into());
    }
    Ok(())
}

fn sums(which: &SumsCommand, fmt: Format, l: &Limits, out: &mut dyn Write) -> Outcome {
    let (name, arg, value, ratio): (&str, String, String, Option<f64>) = match which {
        SumsCommand::S { x } => {
            let s = s_sum(*x as f64, l)?;
            let xf = *x as f64;
            let r = (*x >= 2).then(|| s.to_f64().unwrap_or(f64::NAN) / (xf * xf.ln().powi(5)));
            ("S", x.to_string(), s.to_string(), r)
        }
        SumsCommand::Theta { z } => {
            let t = theta_sum(*z, l)?;
            ("theta", z.to_string(), t.sum.to_string(), Some(t.ratio))
        }
        SumsCommand::Lower { b } => {
            let s = lower_sum(b, l)?;
            let r = s.to_f64().zip(b.to_f64()).map(|(s, b)| s / b);
            ("lower", b.to_string(), s.to_string(), r)
        }
        SumsCommand::Calt { y, a, h } => {
            if y.len() != 3 || a.len() != 3 {
                return Err(Error::invalid("--y and --a each take three comma-separated values").into());
            }
            let mut ys = [y[0] as f64, y[1] as f64, y[2] as f64];
            ys.sort_by(f64::total_cmp);
            let q = TSetQuery::new(ys, [a[0], a[1], a[2]], *h)?;
            let c = cal_t(&q, l)?;
            let arg = format!("Y={};a={};H={h}", join(y), join(a));
            ("calT", arg, c.value.to_string(), Some(c.ratio))
        }
    };
    let ratio_text = ratio.map_or(String::new(), fmt12);
    match fmt {
        Format::Plain => {
            if ratio.is_some() {
                writeln!(out, "{value} {ratio_text}")?;
            } else {
                writeln!(out, "{value}")?;
            }
        }
        Format::Csv => writeln!(out, "sum,argument,value,ratio\n{name},{arg},{value},{ratio_text}")?,
        Format::Json => write_json(
            out,
            &json!({"sum": name, "argument": arg, "value": value, "ratio": ratio.map(crate::experiments::round12)}),
        )?,
    }
    Ok(())
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}
