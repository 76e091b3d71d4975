use num_bigint::Sign;
use num_rational::BigRational;
use num_traits::{One, Signed};

use lazybits::analysis::{
    bin_probabilities, chi_square_gof, empirical_bits, empirical_threshold_bits, fit_exponent, format_significant,
    lower_bound, slack1_bound, slack2_bound, theorem1_bound, verify_floor, verify_prop1, BenchResult, BoundReport,
};
use lazybits::analysis::bounds::epsilon_from_f64;
use lazybits::engine::{sample_many, shipped_strategies, strategy_by_name, trial_sources, Limits, Strategy};
use lazybits::monofn::{check_monotone, parse_rational, to_f64};
use lazybits::{decide, BitSource, Builtin, Error, MonotoneOracle, TapeBitSource};

use crate::args::*;
use crate::output::{Chart, Report, Series};

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_BUDGET: u8 = 3;
pub const EXIT_VIOLATION: u8 = 4;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if e.is_budget() { EXIT_BUDGET } else { EXIT_USAGE };
        let message = match &e {
            Error::CutBudgetExceeded { state, .. } | Error::BitCapExceeded { state, .. } => {
                format!("{e}\npartial state: {state}")
            }
            _ => e.to_string(),
        };
        Self { code, message }
    }
}

/// A finished command: the report plus the exit status it warrants.
pub struct Done {
    pub report: Report,
    pub code: u8,
}

impl From<Report> for Done {
    fn from(report: Report) -> Self {
        Self { report, code: 0 }
    }
}

type CmdResult = Result<Done, Failure>;

fn kv(k: &str, v: impl ToString) -> (String, String) {
    (k.to_string(), v.to_string())
}

fn common_config(c: &Common, format: &str) -> Vec<(String, String)> {
    vec![kv("seed", c.seed), kv("cut_cap", c.cut_cap), kv("format", format)]
}

fn limits(c: &Common) -> Result<Limits, Failure> {
    if c.cut_cap == 0 {
        return Err(Failure::usage("--cut-cap must be at least 1"));
    }
    Ok(Limits::with_cut_cap(c.cut_cap))
}

/// `a..b` (inclusive) or a single value.
pub fn parse_range(s: &str) -> Result<Vec<usize>, Failure> {
    let bad = || Failure::usage(format!("invalid n range `{s}`; expected N or A..B with 1 <= A <= B"));
    let (a, b) = match s.split_once("..") {
        Some((a, b)) => (a.trim(), b.trim().trim_start_matches('=')),
        None => (s.trim(), s.trim()),
    };
    let a: usize = a.parse().map_err(|_| bad())?;
    let b: usize = b.parse().map_err(|_| bad())?;
    if a == 0 || a > b {
        return Err(bad());
    }
    Ok((a..=b).collect())
}

fn parse_dims(s: &str) -> Result<Vec<u64>, Failure> {
    let dims: Vec<u64> = s
        .split(',')
        .map(|d| d.trim().parse::<u64>())
        .collect::<Result<_, _>>()
        .map_err(|_| Failure::usage(format!("invalid dims `{s}`")))?;
    if dims.len() < 2 || dims.contains(&0) {
        return Err(Failure::usage("dims need at least two positive sizes"));
    }
    Ok(dims)
}

fn eps(v: f64) -> Result<BigRational, Failure> {
    epsilon_from_f64(v).ok_or_else(|| Failure::usage("--eps must be positive and finite"))
}

fn strategy(name: &str) -> Result<Box<dyn Strategy>, Failure> {
    Ok(strategy_by_name(name)?)
}

fn float(v: f64) -> String {
    format!("{v:.6}")
}

pub fn bounds(c: &Common, a: &BoundsArgs, format: &str) -> CmdResult {
    let ns = parse_range(&a.n)?;
    let e = eps(a.eps)?;
    let mut cfg = vec![kv("n", &a.n), kv("eps", a.eps)];
    cfg.extend(common_config(c, format));
    let mut report = Report::new("bounds", cfg, &["n", "lower", "theorem1", "slack1", "slack2", "epsilon"]);
    let mut series: Vec<Series> = ["lower n+1", "alternating series", "relaxed series", "2(n+1)^2"]
        .iter()
        .map(|l| Series {
            label: l.to_string(),
            points: Vec::new(),
        })
        .collect();
    for n in ns {
        let b = BoundReport::compute(n, &e);
        let row = b.row();
        report.push(vec![
            row.n.to_string(),
            row.lower,
            row.theorem1,
            row.slack1,
            row.slack2,
            row.epsilon,
        ]);
        let x = n as f64;
        series[0].points.push((x, (n + 1) as f64));
        series[1].points.push((x, b.theorem1.to_f64()));
        series[2].points.push((x, b.slack1.to_f64()));
        series[3].points.push((x, 2.0 * ((n + 1) as f64).powi(2)));
    }
    report.chart = Some(Chart {
        title: "Bounds on expected bits per decision".into(),
        x_label: "n".into(),
        y_label: "bits".into(),
        log_log: true,
        series,
    });
    Ok(report.into())
}

fn tape_sources(spec: &str, n: usize) -> Result<Vec<Box<dyn BitSource>>, Failure> {
    let values: Vec<BigRational> = spec.split(',').map(parse_rational).collect::<Result<_, _>>()?;
    if values.len() != n + 1 {
        return Err(Failure::usage(format!("--tapes needs {} values, got {}", n + 1, values.len())));
    }
    values
        .into_iter()
        .map(|v| {
            if v.is_negative() || v >= BigRational::one() {
                return Err(Failure::usage(format!("tape {v} is outside [0, 1)")));
            }
            let (p, q) = (v.numer().clone(), v.denom().clone());
            let p = p.to_biguint().unwrap_or_default();
            let q = match q.sign() {
                Sign::Plus => q.to_biguint().expect("positive"),
                _ => return Err(Failure::usage(format!("bad tape {v}"))),
            };
            let tape: Box<dyn BitSource> = Box::new(TapeBitSource::new(p, q)?);
            Ok(tape)
        })
        .collect()
}

pub fn decide_cmd(c: &Common, a: &DecideArgs, format: &str) -> CmdResult {
    let f = Builtin::parse(&a.function, a.n)?;
    let s = strategy(&a.strategy)?;
    let lim = limits(c)?;
    let mut cfg = vec![
        kv("fn", &a.function),
        kv("n", a.n),
        kv("tapes", a.tapes.as_deref().unwrap_or("seeded")),
        kv("strategy", s.name()),
    ];
    cfg.extend(common_config(c, format));
    let mut sources: Vec<Box<dyn BitSource>> = match &a.tapes {
        Some(t) => tape_sources(t, a.n)?,
        None => trial_sources(c.seed, a.n + 1)
            .into_iter()
            .map(|s| Box::new(s) as Box<dyn BitSource>)
            .collect(),
    };
    let out = decide(&f, s.as_ref(), &mut sources, lim)?;
    let mut report = Report::new("decide", cfg, &["verdict", "cut_count", "cuts", "bits_per_coord", "box"]);
    report.push(vec![
        out.verdict.to_string(),
        out.cuts.len().to_string(),
        out.cuts.to_string(),
        out.cuts.counts().iter().map(|k| k.to_string()).collect::<Vec<_>>().join(";"),
        out.bx.describe(),
    ]);
    Ok(report.into())
}

pub fn sample(c: &Common, a: &SampleArgs, format: &str) -> CmdResult {
    let f = Builtin::parse(&a.function, a.n)?;
    let s = strategy(&a.strategy)?;
    let lim = limits(c)?;
    if a.precision == 0 || a.precision > lim.bit_cap {
        return Err(Failure::usage(format!("--precision must be in 1..={}", lim.bit_cap)));
    }
    let mut cfg = vec![
        kv("fn", &a.function),
        kv("n", a.n),
        kv("count", a.count),
        kv("precision", a.precision),
        kv("strategy", s.name()),
        kv("attempt_cap", a.attempt_cap),
    ];
    cfg.extend(common_config(c, format));
    let samples = sample_many(&f, s.as_ref(), c.seed, a.count, a.precision, lim, a.attempt_cap)?;
    let mut cols = vec!["sample_index".to_string()];
    cols.extend((1..=a.n).map(|j| format!("x_{j}")));
    cols.extend(["attempts".to_string(), "bits".to_string()]);
    let col_refs: Vec<&str> = cols.iter().map(String::as_str).collect();
    let mut report = Report::new("sample", cfg, &col_refs);
    let (mut attempts, mut bits) = (0u64, 0u64);
    for (i, acc) in samples.iter().enumerate() {
        let mut row = vec![i.to_string()];
        row.extend(acc.bx.prefixes().iter().map(|p| p.to_dyadic_string()));
        row.extend([acc.attempts.to_string(), acc.bits.to_string()]);
        report.push(row);
        attempts += acc.attempts;
        bits += acc.bits;
    }
    if a.count > 0 {
        report.summarize("mean_attempts", float(attempts as f64 / a.count as f64));
        report.summarize("mean_bits", float(bits as f64 / a.count as f64));
        report.summarize("acceptance_rate", float(a.count as f64 / attempts as f64));
    }
    Ok(report.into())
}

fn bench_row(r: &BenchResult) -> Vec<String> {
    vec![
        r.n.to_string(),
        r.function.clone(),
        r.strategy.clone(),
        r.trials.to_string(),
        r.seed.to_string(),
        float(r.mean),
        float(r.stderr),
        float(r.ci95),
        r.overflows.to_string(),
        r.min_bits.to_string(),
        r.max_bits.to_string(),
    ]
}

const BENCH_COLUMNS: [&str; 11] = [
    "n", "function", "strategy", "trials", "seed", "mean", "stderr", "ci95", "overflows", "min_bits", "max_bits",
];

pub fn bench(c: &Common, a: &BenchArgs, format: &str) -> CmdResult {
    if a.trials == 0 {
        return Err(Failure::usage("--trials must be at least 1"));
    }
    let lim = limits(c)?;
    let result = if let Some(t) = a.function.strip_prefix("threshold:") {
        let v = parse_rational(t)?;
        if v.is_negative() || v >= BigRational::one() {
            return Err(Failure::usage("threshold must lie in [0, 1)"));
        }
        empirical_threshold_bits(&v, a.trials, c.seed, lim.cut_cap)
    } else {
        let f = Builtin::parse(&a.function, a.n)?;
        let s = strategy(&a.strategy)?;
        empirical_bits(&f, s.as_ref(), a.trials, c.seed, lim)
    };
    let mut cfg = vec![
        kv("fn", &a.function),
        kv("n", a.n),
        kv("strategy", &a.strategy),
        kv("trials", a.trials),
    ];
    cfg.extend(common_config(c, format));
    let mut report = Report::new("bench", cfg, &BENCH_COLUMNS);
    report.push(bench_row(&result));
    Ok(report.into())
}

pub fn verify_prop1_cmd(c: &Common, a: &VerifyProp1Args, format: &str) -> CmdResult {
    let dims = parse_dims(&a.dims)?;
    let mut cfg = vec![kv("dims", &a.dims), kv("cases", a.cases)];
    cfg.extend(common_config(c, format));
    let mut report = Report::new(
        "verify-prop1",
        cfg,
        &["dims", "cases", "bound", "max_crossed", "tight_cases", "status"],
    );
    let shown = dims.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("x");
    match verify_prop1(&dims, a.cases, c.seed) {
        Ok(s) => {
            report.push(vec![
                shown,
                s.cases.to_string(),
                s.bound.to_string(),
                s.max_crossed.to_string(),
                s.tight_cases.to_string(),
                "ok".into(),
            ]);
            Ok(report.into())
        }
        Err(v) => {
            eprintln!("property violated: {v}");
            report.push(vec![
                shown,
                a.cases.to_string(),
                v.bound.to_string(),
                v.crossed.to_string(),
                "0".into(),
                "VIOLATION".into(),
            ]);
            report.summarize("counterexample", v.to_string());
            Ok(Done {
                report,
                code: EXIT_VIOLATION,
            })
        }
    }
}

pub fn verify_lb(c: &Common, a: &VerifyLbArgs, format: &str) -> CmdResult {
    let ns = parse_range(&a.n)?;
    let lim = limits(c)?;
    let strategies = if a.strategy == "all" {
        shipped_strategies()
    } else {
        vec![strategy(&a.strategy)?]
    };
    let mut cfg = vec![kv("n", &a.n), kv("trials", a.trials), kv("strategy", &a.strategy)];
    cfg.extend(common_config(c, format));
    let mut report = Report::new(
        "verify-lb",
        cfg,
        &["n", "strategy", "trials", "floor", "min_cuts", "at_floor", "overflows", "status"],
    );
    let mut code = 0;
    for n in ns {
        let h = Builtin::Hard { n };
        for s in &strategies {
            let r = verify_floor(&h, s.as_ref(), a.trials, c.seed, lim);
            let status = match r.violation {
                Some(i) => {
                    code = EXIT_VIOLATION;
                    eprintln!("property violated: n={n} strategy={} trial={i} seed={}", r.strategy, c.seed);
                    format!("VIOLATION trial {i}")
                }
                None => "ok".to_string(),
            };
            report.push(vec![
                n.to_string(),
                r.strategy.clone(),
                r.trials.to_string(),
                (n + 1).to_string(),
                r.min_cuts.to_string(),
                r.at_floor.to_string(),
                r.overflows.to_string(),
                status,
            ]);
        }
    }
    Ok(Done { report, code })
}

pub fn gof(c: &Common, a: &GofArgs, format: &str) -> CmdResult {
    let f = Builtin::parse(&a.function, 1)?;
    let s = strategy(&a.strategy)?;
    let lim = limits(c)?;
    // Fail on sparse bins before spending time on sampling.
    let probs = bin_probabilities(&f, a.bins)?;
    let samples = sample_many(&f, s.as_ref(), c.seed, a.count, 64, lim, lazybits::engine::DEFAULT_ATTEMPT_CAP)?;
    let points: Vec<BigRational> = samples.iter().map(|acc| acc.bx.lower(1)).collect();
    let g = chi_square_gof(&points, &f, a.bins)?;
    let mut cfg = vec![
        kv("fn", &a.function),
        kv("count", a.count),
        kv("bins", a.bins),
        kv("strategy", s.name()),
        kv("alpha", a.alpha),
    ];
    cfg.extend(common_config(c, format));
    let mut report = Report::new("gof", cfg, &["bin", "lower", "upper", "probability", "observed", "expected"]);
    for (i, p) in probs.iter().enumerate() {
        report.push(vec![
            i.to_string(),
            format!("{i}/{}", a.bins),
            format!("{}/{}", i + 1, a.bins),
            format_significant(p, 12),
            g.observed[i].to_string(),
            float(g.expected[i]),
        ]);
    }
    let attempts: u64 = samples.iter().map(|s| s.attempts).sum();
    report.summarize("statistic", float(g.statistic));
    report.summarize("dof", g.dof);
    report.summarize("p_value", format!("{:.6e}", g.p_value));
    report.summarize("acceptance_rate", float(a.count as f64 / attempts.max(1) as f64));
    let code = if g.p_value < a.alpha { EXIT_VIOLATION } else { 0 };
    Ok(Done { report, code })
}

pub fn fit(c: &Common, a: &FitArgs, format: &str) -> CmdResult {
    let ns = parse_range(&a.n)?;
    let e = eps(a.eps)?;
    let value = |n: usize| -> Result<BigRational, Failure> {
        Ok(match a.curve.as_str() {
            "theorem1" => theorem1_bound(n, &e).value,
            "slack1" => slack1_bound(n, &e).value,
            "slack2" => BigRational::from_integer(slack2_bound(n)),
            "lower" => BigRational::from_integer(lower_bound(n)),
            other => {
                return Err(Failure::usage(format!(
                    "unknown curve `{other}`; expected theorem1, slack1, slack2 or lower"
                )))
            }
        })
    };
    let mut cfg = vec![kv("curve", &a.curve), kv("n", &a.n), kv("eps", a.eps)];
    cfg.extend(common_config(c, format));
    let mut report = Report::new("fit", cfg, &["n", "value"]);
    let mut pairs = Vec::with_capacity(ns.len());
    for n in ns {
        let v = value(n)?;
        report.push(vec![n.to_string(), format_significant(&v, 12)]);
        pairs.push((n as f64, to_f64(&v)));
    }
    let slope = fit_exponent(&pairs)?;
    report.summarize("slope", format!("{slope:.6}"));
    report.chart = Some(Chart {
        title: format!("{} (slope {slope:.4})", a.curve),
        x_label: "n".into(),
        y_label: "bits".into(),
        log_log: true,
        series: vec![Series {
            label: a.curve.clone(),
            points: pairs,
        }],
    });
    Ok(report.into())
}

pub fn check_monotone_cmd(c: &Common, a: &CheckMonotoneArgs, format: &str) -> CmdResult {
    let f = Builtin::parse(&a.function, a.n)?;
    let mut cfg = vec![kv("fn", &a.function), kv("n", a.n), kv("trials", a.trials)];
    cfg.extend(common_config(c, format));
    let mut report = Report::new("check-monotone", cfg, &["fn", "n", "trials", "status", "witness"]);
    let (status, witness, code) = match check_monotone(&f, c.seed, a.trials) {
        Ok(()) => ("ok".to_string(), String::new(), 0),
        Err(v) => ("VIOLATION".to_string(), v.to_string(), EXIT_VIOLATION),
    };
    report.push(vec![f.name(), a.n.to_string(), a.trials.to_string(), status, witness]);
    Ok(Done { report, code })
}
