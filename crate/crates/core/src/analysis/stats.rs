//! Regression, goodness of fit, and the exact tail inequality.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use statrs::function::gamma::gamma_ur;

use crate::error::{Error, Result};
use crate::monofn::{exact_integral, MonotoneOracle};

/// Least-squares slope of `ln(value)` against `ln(n)`.
pub fn fit_exponent(pairs: &[(f64, f64)]) -> Result<f64> {
    if pairs.len() < 2 {
        return Err(Error::DegenerateFit("need at least two points".into()));
    }
    if pairs.iter().any(|&(n, v)| !(n > 0.0 && v > 0.0)) {
        return Err(Error::DegenerateFit("all coordinates must be positive".into()));
    }
    let xs: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit("all n are equal".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GofResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    pub observed: Vec<u64>,
    pub expected: Vec<f64>,
}

/// Probability of each of `bins` equal-width bins of `[0, 1)` under the
/// density proportional to the one-dimensional oracle `f`.
pub fn bin_probabilities(f: &dyn MonotoneOracle, bins: usize) -> Result<Vec<BigRational>> {
    if f.arity() != 1 {
        return Err(Error::InvalidArgument("goodness of fit needs n = 1".into()));
    }
    if bins < 2 {
        return Err(Error::InvalidArgument("need at least two bins".into()));
    }
    let no_integral = || Error::InvalidArgument(format!("{} has no exact integral", f.name()));
    let edge = |i: usize| BigRational::new(BigInt::from(i), BigInt::from(bins));
    let total = exact_integral(f, &BigRational::zero(), &BigRational::one()).ok_or_else(no_integral)?;
    if !total.is_positive() {
        return Err(Error::InvalidArgument(format!("{} integrates to zero", f.name())));
    }
    (0..bins)
        .map(|i| {
            exact_integral(f, &edge(i), &edge(i + 1))
                .map(|v| v / &total)
                .ok_or_else(no_integral)
        })
        .collect()
}

/// Chi-square test of one-dimensional accepted points against the density
/// proportional to `f`, over `bins` equal-width bins.
pub fn chi_square_gof(points: &[BigRational], f: &dyn MonotoneOracle, bins: usize) -> Result<GofResult> {
    let probs = bin_probabilities(f, bins)?;
    let mut observed = vec![0u64; bins];
    let scale = BigRational::from_integer(BigInt::from(bins));
    for x in points {
        let b = (x * &scale).floor().to_integer().to_usize().unwrap_or(bins);
        if b >= bins || x.is_negative() {
            return Err(Error::InvalidArgument(format!("sample {x} outside [0, 1)")));
        }
        observed[b] += 1;
    }
    let total = points.len() as f64;
    let expected: Vec<f64> = probs.iter().map(|p| p.to_f64().unwrap_or(0.0) * total).collect();
    if let Some((bin, &e)) = expected.iter().enumerate().find(|(_, &e)| e < 5.0) {
        return Err(Error::SparseBin { bin, expected: e });
    }
    let statistic: f64 = observed
        .iter()
        .zip(&expected)
        .map(|(&o, &e)| (o as f64 - e).powi(2) / e)
        .sum();
    let dof = bins - 1;
    let p_value = if statistic > 0.0 {
        gamma_ur(dof as f64 / 2.0, statistic / 2.0)
    } else {
        1.0
    };
    Ok(GofResult {
        statistic,
        dof,
        p_value,
        observed,
        expected,
    })
}

/// Exact check of `1 - (1 - x)^k <= kx`, with equality only at `x = 0`.
///
/// Returns whether that statement holds for this `(x, k)`. It does for all
/// `x` in `[0, 1]`; it can fail for large `x` and odd `k` (e.g. `x = 4,
/// k = 3`).
pub fn verify_tail_inequality(x: &BigRational, k: u32) -> bool {
    assert!(!x.is_negative() && k >= 1);
    let one = BigRational::one();
    let lhs = &one - num_traits::pow(&one - x, k as usize);
    let rhs = x * BigRational::from_integer(BigInt::from(k));
    if x.is_zero() {
        lhs == rhs
    } else {
        lhs < rhs || (k == 1 && lhs == rhs)
    }
}
