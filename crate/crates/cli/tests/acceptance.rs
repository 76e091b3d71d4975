//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::process::Command;
use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;

use lazybits::analysis::{
    chi_square_gof, empirical_bits, empirical_threshold_bits, fit_exponent, slack2_bound, theorem1_bound,
    verify_floor, verify_prop1, BoundReport,
};
use lazybits::bitsource::Xoshiro256StarStar;
use lazybits::engine::{sample_many, shipped_strategies, DEFAULT_ATTEMPT_CAP};
use lazybits::monofn::{exact_integral, to_f64};
use lazybits::{
    decide, derive_trial_seed, AltStrategy, Builtin, Limits, MonotoneOracle, TapeBitSource, Verdict,
};

const SEED: u64 = 20_240_601;

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn eps9() -> BigRational {
    q(1, 1_000_000_000)
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn within(elapsed: Duration, limit_s: u64) -> bool {
    elapsed <= Duration::from_secs(limit_s)
}

fn threshold_two_bits() -> Outcome {
    let t = Instant::now();
    let r = empirical_threshold_bits(&q(1, 3), 1_000_000, SEED, 10_000);
    let el = t.elapsed();
    check(
        (1.99..=2.01).contains(&r.mean) && r.overflows == 0 && within(el, 10),
        format!("mean={:.5} overflows={} time={:.2?}", r.mean, r.overflows, el),
    )
}

fn pairwise_four_bits() -> Outcome {
    let t = Instant::now();
    let r = empirical_bits(&Builtin::Identity, &AltStrategy, 1_000_000, SEED, Limits::default());
    let el = t.elapsed();
    check(
        (3.98..=4.02).contains(&r.mean) && r.overflows == 0 && within(el, 30),
        format!("mean={:.5} overflows={} time={:.2?}", r.mean, r.overflows, el),
    )
}

fn series_at_one() -> Outcome {
    let e = eps9();
    let b = theorem1_bound(1, &e);
    // Independent oracle: the n = 1 term is 3.5 * 2^-k - 1.5 * 4^-k.
    let mut oracle = BigRational::zero();
    for k in 0..=b.last_term {
        let two_k = BigRational::from_integer(BigInt::one() << k as usize);
        oracle += q(7, 2) / &two_k - q(3, 2) / (&two_k * &two_k);
    }
    let five = q(5, 1);
    let dev = |v: &BigRational| {
        let d = v - &five;
        if d < BigRational::zero() {
            -d
        } else {
            d
        }
    };
    let pass = b.value == oracle && dev(&b.value) <= e && dev(&b.upper()) <= e;
    check(
        pass,
        format!(
            "value={:.12} oracle_match={} |value-5|={:.3e} terms={}",
            to_f64(&b.value),
            b.value == oracle,
            to_f64(&dev(&b.value)),
            b.last_term + 1
        ),
    )
}

fn bound_chain() -> Outcome {
    let t = Instant::now();
    let e = eps9();
    let bad: Vec<usize> = (1..=50usize)
        .into_par_iter()
        .filter(|&n| {
            let r = BoundReport::compute(n, &e);
            let lower = BigRational::from_integer(r.lower.clone());
            let slack2 = BigRational::from_integer(r.slack2.clone());
            let explicit = lower <= r.theorem1.upper()
                && r.theorem1.value <= r.slack1.upper()
                && r.slack1.value <= slack2;
            !(explicit && r.chain_holds())
        })
        .collect();
    let el = t.elapsed();
    check(
        bad.is_empty() && within(el, 10),
        format!("n=1..50 failures={bad:?} time={el:.2?}"),
    )
}

fn crossing_bound() -> Outcome {
    let t = Instant::now();
    let mut parts = Vec::new();
    let mut pass = true;
    for dims in [vec![6u64, 6], vec![5, 5, 5], vec![4, 4, 4, 4]] {
        match verify_prop1(&dims, 1000, SEED) {
            Ok(s) => parts.push(format!("{dims:?}: max {} of {}", s.max_crossed, s.bound)),
            Err(v) => {
                pass = false;
                parts.push(format!("{dims:?}: {v}"));
            }
        }
    }
    let el = t.elapsed();
    check(pass && within(el, 60), format!("{} time={el:.2?}", parts.join("; ")))
}

fn hard_floor() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for n in 1..=4usize {
        let h = Builtin::Hard { n };
        for s in shipped_strategies() {
            let r = verify_floor(&h, s.as_ref(), 10_000, SEED, Limits::default());
            let ok = r.violation.is_none() && r.overflows == 0 && r.min_cuts == n as u64 + 1;
            pass &= ok;
            parts.push(format!("n={n} {} min={} at_floor={}", r.strategy, r.min_cuts, r.at_floor));
        }
    }
    check(pass, parts.join("; "))
}

fn exponents() -> Outcome {
    let e = eps9();
    let t1: Vec<(f64, f64)> = (10..=200usize)
        .into_par_iter()
        .map(|n| (n as f64, theorem1_bound(n, &e).to_f64()))
        .collect();
    let s2: Vec<(f64, f64)> = (10..=200usize)
        .map(|n| (n as f64, to_f64(&BigRational::from_integer(slack2_bound(n)))))
        .collect();
    match (fit_exponent(&t1), fit_exponent(&s2)) {
        (Ok(a), Ok(b)) => check(
            (1.10..=1.25).contains(&a) && (1.95..=2.05).contains(&b),
            format!("series slope={a:.4} quadratic slope={b:.4}"),
        ),
        (a, b) => check(false, format!("fit failed: {a:?} {b:?}")),
    }
}

fn sampler_distribution() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    let h1 = Builtin::Hard { n: 1 };
    for f in [&Builtin::Identity, &h1] {
        let samples = match sample_many(f, &AltStrategy, SEED, 100_000, 64, Limits::default(), DEFAULT_ATTEMPT_CAP) {
            Ok(s) => s,
            Err(e) => return check(false, format!("{}: {e}", f.name())),
        };
        let points: Vec<BigRational> = samples.iter().map(|a| a.bx.lower(1)).collect();
        let attempts: u64 = samples.iter().map(|a| a.attempts).sum();
        let rate = samples.len() as f64 / attempts as f64;
        match chi_square_gof(&points, f, 10) {
            Ok(g) => {
                pass &= g.p_value > 1e-3;
                parts.push(format!("{} p={:.4} rate={rate:.4}", f.name(), g.p_value));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("{}: {e}", f.name()));
            }
        }
        if *f == h1 {
            // Analytic integral of h_1 over [0, 1).
            let integral = exact_integral(f, &BigRational::zero(), &BigRational::one()).unwrap();
            let target = 21.0 / 32.0;
            pass &= integral == q(21, 32) && (rate - target).abs() <= 0.01;
        }
    }
    check(pass, parts.join("; "))
}

/// `x = p / q` with `q` up to 2^16, sometimes a short dyadic.
fn random_tape(rng: &mut Xoshiro256StarStar) -> (BigRational, TapeBitSource) {
    let qd = if rng.next_below(4) == 0 {
        1u64 << rng.next_below(9)
    } else {
        1 + rng.next_below(1 << 16)
    };
    let p = rng.next_below(qd);
    let v = BigRational::new(BigInt::from(p), BigInt::from(qd));
    (v, TapeBitSource::new(BigUint::from(p), BigUint::from(qd)).unwrap())
}

/// A staircase jump sits exactly at the input, so neither corner test can
/// ever fire when x_{n+1} falls inside the jump.
fn on_jump(f: &Builtin, x: &[BigRational]) -> bool {
    match f {
        Builtin::Staircase { n, levels } => {
            let s: BigRational = x.iter().sum();
            (s * BigRational::from_integer((*levels).into()) / BigRational::from_integer((*n).into())).is_integer()
        }
        _ => false,
    }
}

fn soundness() -> Outcome {
    const CASES: u64 = 100_000;
    let limits = Limits::with_cut_cap(2_000);
    let mut parts = Vec::new();
    let mut pass = true;
    for n in 1..=2usize {
        for (fi, f) in Builtin::catalogue(n).into_iter().enumerate() {
            let stats = (0..CASES)
                .into_par_iter()
                .map(|i| {
                    let mut rng =
                        Xoshiro256StarStar::seed_from_u64(derive_trial_seed(SEED ^ ((n as u64) << 8 | fi as u64), i));
                    let (values, mut tapes): (Vec<_>, Vec<_>) = (0..=n).map(|_| random_tape(&mut rng)).unzip();
                    let fx = f.eval(&values[..n]);
                    if fx == values[n] {
                        return (0u64, 0u64, 1u64, 0u64);
                    }
                    let truth = if fx < values[n] { Verdict::Lt } else { Verdict::Gt };
                    match decide(&f, &AltStrategy, &mut tapes, limits) {
                        Ok(out) if out.verdict == truth => (0, 0, 0, 0),
                        Ok(_) => (1, 0, 0, 0),
                        Err(e) if e.is_budget() && on_jump(&f, &values[..n]) => (0, 1, 0, 0),
                        Err(_) => (0, 0, 0, 1),
                    }
                })
                .reduce(|| (0, 0, 0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2, a.3 + b.3));
            let (mismatch, jumps, ties, other) = stats;
            pass &= mismatch == 0 && other == 0;
            parts.push(format!(
                "n={n} {f}: mismatches={mismatch} ties={ties} undecidable_jumps={jumps} errors={other}"
            ));
        }
    }
    check(pass, parts.join("; "))
}

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_lazybits")
}

fn run_cli(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(bin())
        .args(args)
        .env_remove("LAZYBITS_SEED")
        .output()
        .map_err(|e| e.to_string())?;
    match out.status.code() {
        Some(0) => Ok(out.stdout),
        code => Err(format!(
            "{args:?} exited {code:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        )),
    }
}

fn reproducibility() -> Outcome {
    let runs: &[&[&str]] = &[
        &["bounds", "--n", "1..12"],
        &["bounds", "--n", "1..12", "--format", "json"],
        &["bounds", "--n", "1..12", "--format", "svg"],
        &["decide", "--fn", "hard", "--n", "2", "--seed", "7"],
        &["decide", "--fn", "identity", "--tapes", "1/4,3/4"],
        &["sample", "--fn", "identity", "--count", "2000", "--precision", "16"],
        &["sample", "--fn", "product", "--n", "3", "--count", "500", "--format", "json"],
        &["bench", "--fn", "mean", "--n", "3", "--trials", "20000", "--strategy", "greedy"],
        &["bench", "--fn", "threshold:1/3", "--trials", "20000"],
        &["verify-prop1", "--dims", "4,4,4", "--cases", "200"],
        &["verify-lb", "--n", "1..3", "--trials", "2000"],
        &["gof", "--fn", "hard", "--count", "20000"],
        &["fit", "--curve", "theorem1", "--n", "10..60"],
        &["fit", "--curve", "slack1", "--n", "10..40", "--format", "svg"],
        &["check-monotone", "--fn", "staircase:8", "--n", "2", "--trials", "5000"],
    ];
    let mut bad = Vec::new();
    for args in runs {
        let with = |threads: &str| {
            let mut v = args.to_vec();
            v.extend(["--threads", threads]);
            run_cli(&v)
        };
        let (a, b, c, d) = (run_cli(args), run_cli(args), with("1"), with("8"));
        match (a, b, c, d) {
            (Ok(a), Ok(b), Ok(c), Ok(d)) if a == b && b == c && c == d && !a.is_empty() => {}
            (Ok(_), Ok(_), Ok(_), Ok(_)) => bad.push(format!("{} differs", args.join(" "))),
            (a, b, c, d) => {
                for r in [a, b, c, d] {
                    if let Err(e) = r {
                        bad.push(e);
                        break;
                    }
                }
            }
        }
    }
    check(
        bad.is_empty(),
        if bad.is_empty() {
            format!("{} commands x 4 runs identical", runs.len())
        } else {
            bad.join("; ")
        },
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("threshold 1/3 mean bits", threshold_two_bits),
        ("pairwise identity mean bits", pairwise_four_bits),
        ("series bound at n=1 equals 5", series_at_one),
        ("bound chain n=1..50", bound_chain),
        ("grid crossing bound", crossing_bound),
        ("hard function cut floor", hard_floor),
        ("growth exponents", exponents),
        ("sampler distribution", sampler_distribution),
        ("decision soundness on rational tapes", soundness),
        ("cli reproducibility", reproducibility),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = run();
        let status = if o.pass { "PASS" } else { "FAIL" };
        if !o.pass {
            failed += 1;
        }
        println!("[{status}] {:>2}. {name}: {} ({:.1?})", i + 1, o.detail, t.elapsed());
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
