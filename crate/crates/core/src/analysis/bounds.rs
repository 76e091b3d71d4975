//! Upper and lower bounds on the expected bit cost of the alternating
//! strategy, evaluated as certified enclosures in exact arithmetic.
//!
//! Both series are sums over `k >= 0` whose `k`-th term is at most
//! `(n+1)^2 2^-k`, so truncating after `k = K` leaves a tail of at most
//! `(n+1)^2 2^-K`.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

/// A truncated series: the true value lies in `[value, value + error]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Enclosure {
    pub value: BigRational,
    pub error: BigRational,
    /// Highest `k` included in the partial sum.
    pub last_term: u32,
}

impl Enclosure {
    pub fn upper(&self) -> BigRational {
        &self.value + &self.error
    }

    /// Centre of the enclosure; within `error / 2` of the true value.
    pub fn midpoint(&self) -> BigRational {
        &self.value + &self.error / BigRational::from_integer(2.into())
    }

    pub fn to_f64(&self) -> f64 {
        self.value.to_f64().unwrap_or(f64::NAN)
    }
}

fn pow2(e: u64) -> BigUint {
    BigUint::one() << e as usize
}

/// Smallest `K` with `(n+1)^2 2^-K <= eps`.
fn truncation_point(n: usize, eps: &BigRational) -> u32 {
    assert!(eps.is_positive(), "epsilon must be positive");
    let sq = BigRational::from_integer(BigInt::from((n as u64 + 1).pow(2)));
    let mut k = 0u32;
    let mut tail = sq;
    while tail > *eps {
        tail /= BigRational::from_integer(2.into());
        k += 1;
    }
    k
}

fn tail_bound(n: usize, last: u32) -> BigRational {
    BigRational::new(
        BigInt::from((n as u64 + 1).pow(2)),
        BigInt::from(pow2(last as u64)),
    )
}

/// Sums `sum_{k=0}^{K} numerator(k) / 2^{(k+1)(n+1)}` exactly, where the
/// closure returns the numerator over that power of two.
fn dyadic_series(n: usize, last: u32, numerator: impl Fn(u32) -> BigUint) -> BigRational {
    let d = n as u64 + 1;
    let top = (last as u64 + 1) * d;
    let mut acc = BigUint::zero();
    for k in 0..=last {
        let shift = top - (k as u64 + 1) * d;
        acc += numerator(k) << shift as usize;
    }
    BigRational::new(BigInt::from(acc), BigInt::from(pow2(top)))
}

/// The alternating-strategy bound
/// `sum_k sum_{i=0}^{n} (1 - (2^{k+1}-1)^i (2^k-1)^{n+1-i} / 2^{k(n+1)+i})`.
pub fn theorem1_bound(n: usize, eps: &BigRational) -> Enclosure {
    assert!(n >= 1);
    let last = truncation_point(n, eps);
    let d = n as u32 + 1;
    // Over the common denominator 2^{(k+1)(n+1)} the subtracted part is
    // sum_i a^i c^{n+1-i} with a = 2^{k+1} - 1 and c = 2^{k+1} - 2 = a - 1,
    // which telescopes to c (a^{n+1} - c^{n+1}).
    let value = dyadic_series(n, last, |k| {
        let full = pow2((k as u64 + 1) * d as u64);
        let a = pow2(k as u64 + 1) - 1u32;
        let c = &a - 1u32;
        let sub = &c * (a.pow(d) - c.pow(d));
        full * d - sub
    });
    Enclosure {
        value,
        error: tail_bound(n, last),
        last_term: last,
    }
}

/// The relaxed bound `sum_k (n+1) (1 - (1 - 2^-k)^{n+1})`.
pub fn slack1_bound(n: usize, eps: &BigRational) -> Enclosure {
    assert!(n >= 1);
    let last = truncation_point(n, eps);
    let d = n as u32 + 1;
    let value = dyadic_series(n, last, |k| {
        // (n+1)(2^{k(n+1)} - (2^k - 1)^{n+1}) scaled by 2^{n+1}.
        let b = pow2(k as u64) - 1u32;
        let diff = pow2(k as u64 * d as u64) - b.pow(d);
        (diff << d as usize) * d
    });
    Enclosure {
        value,
        error: tail_bound(n, last),
        last_term: last,
    }
}

/// `2 (n+1)^2`.
pub fn slack2_bound(n: usize) -> BigInt {
    BigInt::from(2 * (n as u64 + 1).pow(2))
}

/// `n + 1`.
pub fn lower_bound(n: usize) -> BigInt {
    BigInt::from(n as u64 + 1)
}

/// All four bounds for one `n`.
#[derive(Clone, Debug)]
pub struct BoundReport {
    pub n: usize,
    pub lower: BigInt,
    pub theorem1: Enclosure,
    pub slack1: Enclosure,
    pub slack2: BigInt,
    pub epsilon: BigRational,
}

impl BoundReport {
    pub fn compute(n: usize, eps: &BigRational) -> Self {
        Self {
            n,
            lower: lower_bound(n),
            theorem1: theorem1_bound(n, eps),
            slack1: slack1_bound(n, eps),
            slack2: slack2_bound(n),
            epsilon: eps.clone(),
        }
    }

    /// `lower <= theorem1 <= slack1 <= slack2`, each step allowing the
    /// truncation error of the enclosures involved.
    pub fn chain_holds(&self) -> bool {
        let lower = BigRational::from_integer(self.lower.clone());
        let slack2 = BigRational::from_integer(self.slack2.clone());
        lower <= self.theorem1.upper()
            && self.theorem1.value <= self.slack1.upper()
            && self.slack1.value <= slack2
    }

    /// Series values are printed as enclosure midpoints with as many decimals
    /// as epsilon resolves, so the printed figure is within epsilon of the
    /// true sum.
    pub fn row(&self) -> BoundRow {
        let d = decimals_for(&self.epsilon);
        BoundRow {
            n: self.n,
            lower: self.lower.to_string(),
            theorem1: format_fixed(&self.theorem1.midpoint(), d),
            slack1: format_fixed(&self.slack1.midpoint(), d),
            slack2: self.slack2.to_string(),
            epsilon: format_significant(&self.epsilon, 3),
        }
    }
}

/// Printable form of a [`BoundReport`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundRow {
    pub n: usize,
    pub lower: String,
    pub theorem1: String,
    pub slack1: String,
    pub slack2: String,
    pub epsilon: String,
}

/// Rounds a nonnegative rational to `sig` significant digits (half up) and
/// prints it in positional notation.
pub fn format_significant(v: &BigRational, sig: usize) -> String {
    assert!(sig >= 1);
    if v.is_zero() {
        return format!("{:.*}", sig - 1, 0.0);
    }
    let neg = v.is_negative();
    let v = v.abs();
    // Decimal exponent e with 10^e <= v < 10^{e+1}.
    let mut e = v.to_f64().map(|x| x.log10().floor() as i64).unwrap_or(0);
    let pow10 = |e: i64| -> BigRational {
        if e >= 0 {
            BigRational::from_integer(num_traits::pow(BigInt::from(10), e as usize))
        } else {
            BigRational::new(BigInt::one(), num_traits::pow(BigInt::from(10), (-e) as usize))
        }
    };
    while pow10(e) > v {
        e -= 1;
    }
    while pow10(e + 1) <= v {
        e += 1;
    }
    let shift = sig as i64 - 1 - e;
    let scaled = &v * pow10(shift);
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let mut digits = (scaled + half).floor().to_integer();
    let mut shift = shift;
    if digits >= num_traits::pow(BigInt::from(10), sig) {
        digits /= 10;
        shift -= 1;
    }
    let s = digits.to_string();
    let body = if shift <= 0 {
        let zeros = "0".repeat((-shift) as usize);
        format!("{s}{zeros}")
    } else {
        let shift = shift as usize;
        if s.len() > shift {
            let (int, frac) = s.split_at(s.len() - shift);
            format!("{int}.{frac}")
        } else {
            format!("0.{}{s}", "0".repeat(shift - s.len()))
        }
    };
    if neg {
        format!("-{body}")
    } else {
        body
    }
}

/// Smallest `d` with `10^-d <= eps`.
pub fn decimals_for(eps: &BigRational) -> usize {
    assert!(eps.is_positive());
    let mut d = 0;
    let mut step = BigRational::one();
    while step > *eps {
        step /= BigRational::from_integer(10.into());
        d += 1;
    }
    d
}

/// Rounds a nonnegative rational half up to `decimals` places.
pub fn format_fixed(v: &BigRational, decimals: usize) -> String {
    assert!(!v.is_negative());
    let scale = num_traits::pow(BigInt::from(10), decimals);
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let digits = (v * BigRational::from_integer(scale.clone()) + half).floor().to_integer();
    if decimals == 0 {
        return digits.to_string();
    }
    let int = &digits / &scale;
    let frac = (&digits % &scale).to_string();
    format!("{int}.{}{frac}", "0".repeat(decimals - frac.len()))
}

/// Converts a positive `f64` tolerance to an exact rational.
pub fn epsilon_from_f64(eps: f64) -> Option<BigRational> {
    if eps.is_finite() && eps > 0.0 {
        BigRational::from_float(eps)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn eps9() -> BigRational {
        q(1, 1_000_000_000)
    }

    /// Term-by-term double sum straight from the definition.
    fn theorem1_naive(n: usize, last: u32) -> BigRational {
        let one = BigRational::one();
        let mut s = BigRational::zero();
        for k in 0..=last {
            for i in 0..=n as u32 {
                let a = BigInt::from(pow2(k as u64 + 1)) - 1;
                let b = BigInt::from(pow2(k as u64)) - 1;
                let num = num_traits::pow(a, i as usize) * num_traits::pow(b, n + 1 - i as usize);
                let den = BigInt::from(pow2(k as u64 * (n as u64 + 1) + i as u64));
                s += &one - BigRational::new(num, den);
            }
        }
        s
    }

    fn slack1_naive(n: usize, last: u32) -> BigRational {
        let one = BigRational::one();
        let mut s = BigRational::zero();
        for k in 0..=last {
            let r = &one - BigRational::new(BigInt::one(), BigInt::from(pow2(k as u64)));
            s += BigRational::from_integer(BigInt::from(n + 1))
                * (&one - num_traits::pow(r, n + 1));
        }
        s
    }

    #[test]
    fn theorem1_matches_definition() {
        for n in 1..=6 {
            let e = theorem1_bound(n, &q(1, 1000));
            assert_eq!(e.value, theorem1_naive(n, e.last_term), "n={n}");
            let s = slack1_bound(n, &q(1, 1000));
            assert_eq!(s.value, slack1_naive(n, s.last_term), "n={n}");
        }
    }

    #[test]
    fn n1_closed_forms() {
        // k-th term 3.5 * 2^-k - 1.5 * 4^-k, summing to 5.
        let t = theorem1_bound(1, &eps9());
        let mut oracle = BigRational::zero();
        for k in 0..=t.last_term {
            let u = q(1, 1 << k);
            oracle += q(7, 2) * &u - q(3, 2) * &u * &u;
        }
        assert_eq!(t.value, oracle);
        assert!((q(5, 1) - &t.value).abs() <= eps9());
        assert!(t.upper() >= q(5, 1));

        let s = slack1_bound(1, &eps9());
        assert!((q(16, 3) - &s.value).abs() <= eps9());
        assert!(s.upper() >= q(16, 3));
    }

    #[test]
    fn first_terms() {
        // k = 0 contributes n + 1 to both series.
        for n in 1..5 {
            let eps = BigRational::from_integer(BigInt::from((n as i64 + 1).pow(2)));
            let t = theorem1_bound(n, &eps);
            assert_eq!(t.last_term, 0);
            assert_eq!(t.value, BigRational::from_integer(BigInt::from(n as i64 + 1)));
            assert_eq!(slack1_bound(n, &eps).value, t.value);
        }
    }

    #[test]
    fn small_closed_values() {
        assert_eq!(slack2_bound(1), BigInt::from(8));
        assert_eq!(slack2_bound(2), BigInt::from(18));
        assert_eq!(slack2_bound(10), BigInt::from(242));
        assert_eq!(lower_bound(1), BigInt::from(2));
        assert_eq!(lower_bound(9), BigInt::from(10));
    }

    #[test]
    fn chain_for_small_n() {
        for n in 1..=12 {
            assert!(BoundReport::compute(n, &eps9()).chain_holds(), "n={n}");
        }
    }

    #[test]
    fn significant_digits() {
        assert_eq!(format_significant(&q(5, 1), 12), "5.00000000000");
        assert_eq!(format_significant(&q(16, 3), 12), "5.33333333333");
        assert_eq!(format_significant(&q(242, 1), 12), "242.000000000");
        assert_eq!(format_significant(&q(2, 3), 3), "0.667");
        assert_eq!(format_significant(&q(1, 1000), 3), "0.00100");
        assert_eq!(format_significant(&q(9999, 1000), 3), "10.0");
        assert_eq!(format_significant(&q(123456, 1), 2), "120000");
        assert_eq!(format_significant(&q(0, 1), 3), "0.00");
        assert_eq!(format_fixed(&q(5, 1), 9), "5.000000000");
        assert_eq!(format_fixed(&q(16, 3), 4), "5.3333");
        assert_eq!(format_fixed(&q(1, 400), 2), "0.00");
        assert_eq!(format_fixed(&q(7, 2), 0), "4");
        assert_eq!(format_fixed(&q(1, 20), 3), "0.050");
        assert_eq!(decimals_for(&epsilon_from_f64(1e-9).unwrap()), 9);
        assert_eq!(decimals_for(&q(1, 1)), 0);
        assert_eq!(decimals_for(&q(1, 8)), 1);
    }
}
