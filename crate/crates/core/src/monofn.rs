//! Increasing function oracles on `[0, 1]^n` with exact rational evaluation.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::bitsource::Xoshiro256StarStar;
use crate::error::{Error, Result};

/// An increasing map `[0, 1)^n -> [0, 1)`, extended to the closed cube.
///
/// Implementations must be monotone in every coordinate and evaluate
/// exactly; the engine compares their values against dyadic corners. Upper
/// corners may have coordinates equal to 1, and there the value may reach 1
/// (as the identity does).
pub trait MonotoneOracle: Send + Sync {
    fn arity(&self) -> usize;

    fn eval(&self, x: &[BigRational]) -> BigRational;

    fn name(&self) -> String {
        "custom".to_string()
    }

    /// For one-dimensional oracles that are affine between consecutive
    /// breakpoints: the sorted breakpoints, including 0 and 1.
    fn breakpoints(&self) -> Option<Vec<BigRational>> {
        None
    }
}

impl<T: MonotoneOracle + ?Sized> MonotoneOracle for Box<T> {
    fn arity(&self) -> usize {
        (**self).arity()
    }
    fn eval(&self, x: &[BigRational]) -> BigRational {
        (**self).eval(x)
    }
    fn name(&self) -> String {
        (**self).name()
    }
    fn breakpoints(&self) -> Option<Vec<BigRational>> {
        (**self).breakpoints()
    }
}

/// Wraps a closure as an oracle. Monotonicity is the caller's promise; use
/// [`check_monotone`] to test it.
pub struct FnOracle<F> {
    arity: usize,
    name: String,
    f: F,
}

impl<F> FnOracle<F>
where
    F: Fn(&[BigRational]) -> BigRational + Send + Sync,
{
    pub fn new(arity: usize, name: impl Into<String>, f: F) -> Self {
        Self {
            arity,
            name: name.into(),
            f,
        }
    }
}

impl<F> MonotoneOracle for FnOracle<F>
where
    F: Fn(&[BigRational]) -> BigRational + Send + Sync,
{
    fn arity(&self) -> usize {
        self.arity
    }
    fn eval(&self, x: &[BigRational]) -> BigRational {
        (self.f)(x)
    }
    fn name(&self) -> String {
        self.name.clone()
    }
}

fn pow2(k: u32) -> BigInt {
    BigInt::one() << k as usize
}

/// `1 - 2^-(n+1)`, the plateau of `h_n`.
pub fn hard_cap(n: usize) -> BigRational {
    let d = pow2(n as u32 + 1);
    BigRational::new(&d - 1, d)
}

/// `h_n(x) = min(1 - 2^-(n+1), (2^(n+1) - 1) * min_i x_i)`.
pub fn eval_h(n: usize, x: &[BigRational]) -> BigRational {
    assert_eq!(x.len(), n, "h_{n} takes {n} inputs");
    let slope = BigRational::from_integer(pow2(n as u32 + 1) - 1);
    let m = x.iter().min().expect("n >= 1").clone();
    let ramp = slope * m;
    let cap = hard_cap(n);
    if ramp < cap {
        ramp
    } else {
        cap
    }
}

/// Parses `p/q`, an integer, or a finite decimal such as `0.25`.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::InvalidRational(s.to_string());
    let t = s.trim();
    if let Some((p, q)) = t.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(p, q));
    }
    if let Some((int, frac)) = t.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let neg = int.starts_with('-');
        let int: BigInt = if int.is_empty() || int == "-" {
            BigInt::zero()
        } else {
            int.parse().map_err(|_| bad())?
        };
        let frac_digits: BigInt = frac.parse().map_err(|_| bad())?;
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let mut v = BigRational::from_integer(int.abs()) + BigRational::new(frac_digits, scale);
        if neg {
            v = -v;
        }
        return Ok(v);
    }
    let p: BigInt = t.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(p))
}

/// The built-in test functions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Builtin {
    /// `c` everywhere.
    Constant { n: usize, c: BigRational },
    /// `x` (one input only).
    Identity,
    /// `(x_1 + ... + x_n) / (n + 1)`.
    Mean { n: usize },
    /// `min_i x_i`.
    MinCoord { n: usize },
    /// `min(prod_i x_i, 1 - 2^-62)`.
    Product { n: usize },
    /// `h_n`.
    Hard { n: usize },
    /// `floor(L * mean_i x_i) / (L + 1)` for `L = levels`, a power of two.
    Staircase { n: usize, levels: u32 },
}

/// Upper clamp for built-ins whose raw formula reaches 1 at `(1, ..., 1)`.
pub fn product_cap() -> BigRational {
    let d = pow2(62);
    BigRational::new(&d - 1, d)
}

const BUILTIN_NAMES: &str = "constant:c, identity, mean, min, product, hard, staircase:L";

impl Builtin {
    /// Parses `name[:param]` for arity `n`.
    pub fn parse(spec: &str, n: usize) -> Result<Self> {
        let invalid = |reason: &str| Error::InvalidFunction {
            spec: spec.to_string(),
            reason: reason.to_string(),
        };
        if n == 0 {
            return Err(invalid("arity must be at least 1"));
        }
        let (name, param) = match spec.split_once(':') {
            Some((a, b)) => (a.trim(), Some(b.trim())),
            None => (spec.trim(), None),
        };
        let no_param = |b: Builtin| match param {
            None => Ok(b),
            Some(_) => Err(invalid("takes no parameter")),
        };
        match name {
            "constant" | "const" => {
                let c = parse_rational(param.ok_or_else(|| invalid("missing value"))?)?;
                if c.is_negative() || c >= BigRational::one() {
                    return Err(invalid("constant must lie in [0, 1)"));
                }
                Ok(Builtin::Constant { n, c })
            }
            "identity" | "id" => {
                if n != 1 {
                    return Err(invalid("identity needs n = 1"));
                }
                no_param(Builtin::Identity)
            }
            "mean" => no_param(Builtin::Mean { n }),
            "min" | "min_coord" => no_param(Builtin::MinCoord { n }),
            "product" | "prod" => no_param(Builtin::Product { n }),
            "hard" | "h" => no_param(Builtin::Hard { n }),
            "staircase" | "dyadic_staircase" => {
                let levels: u32 = param
                    .ok_or_else(|| invalid("missing level count"))?
                    .parse()
                    .map_err(|_| invalid("level count must be a positive integer"))?;
                if levels == 0 || !levels.is_power_of_two() {
                    return Err(invalid("level count must be a power of two"));
                }
                Ok(Builtin::Staircase { n, levels })
            }
            _ => Err(invalid(&format!("unknown function; expected one of {BUILTIN_NAMES}"))),
        }
    }

    /// Every built-in at arity `n`, with representative parameters.
    pub fn catalogue(n: usize) -> Vec<Builtin> {
        let mut out = vec![
            Builtin::Constant {
                n,
                c: BigRational::new(1.into(), 3.into()),
            },
            Builtin::Constant {
                n,
                c: BigRational::new(1.into(), 2.into()),
            },
        ];
        if n == 1 {
            out.push(Builtin::Identity);
        }
        out.extend([
            Builtin::Mean { n },
            Builtin::MinCoord { n },
            Builtin::Product { n },
            Builtin::Hard { n },
            Builtin::Staircase { n, levels: 8 },
        ]);
        out
    }

    fn n(&self) -> usize {
        match self {
            Builtin::Identity => 1,
            Builtin::Constant { n, .. }
            | Builtin::Mean { n }
            | Builtin::MinCoord { n }
            | Builtin::Product { n }
            | Builtin::Hard { n }
            | Builtin::Staircase { n, .. } => *n,
        }
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Builtin::Constant { c, .. } => write!(f, "constant:{c}"),
            Builtin::Identity => f.write_str("identity"),
            Builtin::Mean { .. } => f.write_str("mean"),
            Builtin::MinCoord { .. } => f.write_str("min"),
            Builtin::Product { .. } => f.write_str("product"),
            Builtin::Hard { .. } => f.write_str("hard"),
            Builtin::Staircase { levels, .. } => write!(f, "staircase:{levels}"),
        }
    }
}

fn clamp_below(v: BigRational, cap: BigRational) -> BigRational {
    if v < cap {
        v
    } else {
        cap
    }
}

impl MonotoneOracle for Builtin {
    fn arity(&self) -> usize {
        self.n()
    }

    fn eval(&self, x: &[BigRational]) -> BigRational {
        debug_assert_eq!(x.len(), self.n());
        match self {
            Builtin::Constant { c, .. } => c.clone(),
            Builtin::Identity => x[0].clone(),
            Builtin::Mean { n } => {
                let sum: BigRational = x.iter().sum();
                sum / BigRational::from_integer(BigInt::from(*n as u64 + 1))
            }
            Builtin::MinCoord { .. } => x.iter().min().expect("n >= 1").clone(),
            Builtin::Product { .. } => {
                let p: BigRational = x.iter().product();
                clamp_below(p, product_cap())
            }
            Builtin::Hard { n } => eval_h(*n, x),
            Builtin::Staircase { n, levels } => {
                let sum: BigRational = x.iter().sum();
                let scaled = sum * BigRational::from_integer(BigInt::from(*levels))
                    / BigRational::from_integer(BigInt::from(*n as u64));
                BigRational::new(scaled.floor().to_integer(), BigInt::from(*levels as u64 + 1))
            }
        }
    }

    fn name(&self) -> String {
        self.to_string()
    }

    fn breakpoints(&self) -> Option<Vec<BigRational>> {
        if self.n() != 1 {
            return None;
        }
        let zero = BigRational::zero();
        let one = BigRational::one();
        Some(match self {
            Builtin::Product { .. } => vec![zero, product_cap(), one],
            Builtin::Hard { .. } => vec![zero, BigRational::new(1.into(), 4.into()), one],
            Builtin::Staircase { levels, .. } => (0..=*levels)
                .map(|j| BigRational::new(j.into(), (*levels).into()))
                .collect(),
            _ => vec![zero, one],
        })
    }
}

/// `integral_a^b f(x) dx` for a one-dimensional oracle exposing breakpoints.
///
/// Between breakpoints the oracle is affine, so the midpoint rule is exact on
/// each piece.
pub fn exact_integral(f: &dyn MonotoneOracle, a: &BigRational, b: &BigRational) -> Option<BigRational> {
    if f.arity() != 1 {
        return None;
    }
    let bps = f.breakpoints()?;
    let mut knots: Vec<BigRational> = vec![a.clone()];
    knots.extend(bps.into_iter().filter(|p| p > a && p < b));
    knots.push(b.clone());
    let two = BigRational::from_integer(2.into());
    let mut total = BigRational::zero();
    for w in knots.windows(2) {
        let mid = (&w[0] + &w[1]) / &two;
        total += (&w[1] - &w[0]) * f.eval(&[mid]);
    }
    Some(total)
}

/// A monotonicity violation: `lower <= upper` componentwise but
/// `f(lower) > f(upper)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MonotoneViolation {
    pub trial: u64,
    pub lower: Vec<BigRational>,
    pub upper: Vec<BigRational>,
    pub f_lower: BigRational,
    pub f_upper: BigRational,
}

impl fmt::Display for MonotoneViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |v: &[BigRational]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        write!(
            f,
            "trial {}: f({}) = {} > f({}) = {}",
            self.trial,
            show(&self.lower),
            self.f_lower,
            show(&self.upper),
            self.f_upper
        )
    }
}

fn random_unit_rational(rng: &mut Xoshiro256StarStar) -> BigRational {
    match rng.next_below(8) {
        0 => BigRational::zero(),
        1 => BigRational::one(),
        2 | 3 => BigRational::new(BigInt::from(rng.next_below(1 << 32)), pow2(32)),
        _ => {
            let q = rng.next_below(1 << 20) + 1;
            let p = rng.next_below(q + 1);
            BigRational::new(p.into(), q.into())
        }
    }
}

/// Samples `trials` ordered pairs `x' <= x` and checks `f(x') <= f(x)`, also
/// checking the range at both points: below 1 inside the half-open cube, at
/// most 1 where some coordinate equals 1. Returns the first violation.
pub fn check_monotone(
    f: &dyn MonotoneOracle,
    seed: u64,
    trials: u64,
) -> std::result::Result<(), MonotoneViolation> {
    let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
    let n = f.arity();
    let zero = BigRational::zero();
    let one = BigRational::one();
    for trial in 0..trials {
        let upper: Vec<BigRational> = (0..n).map(|_| random_unit_rational(&mut rng)).collect();
        let lower: Vec<BigRational> = upper
            .iter()
            .map(|x| {
                if rng.next_below(2) == 0 {
                    x.clone()
                } else {
                    x * random_unit_rational(&mut rng)
                }
            })
            .collect();
        let f_lower = f.eval(&lower);
        let f_upper = f.eval(&upper);
        let in_range = |v: &BigRational, x: &[BigRational]| {
            *v >= zero && (*v < one || (*v == one && x.iter().any(|c| *c == one)))
        };
        if f_lower > f_upper || !in_range(&f_lower, &lower) || !in_range(&f_upper, &upper) {
            return Err(MonotoneViolation {
                trial,
                lower,
                upper,
                f_lower,
                f_upper,
            });
        }
    }
    Ok(())
}

/// An increasing integer-valued function on a lattice.
///
/// `dims` holds `M_1, ..., M_{n+1}`; `values` is indexed row-major over
/// `{0..M_1-1} x ... x {0..M_n-1}` with entries in `[0, M_{n+1}]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridFunction {
    dims: Vec<u64>,
    values: Vec<u64>,
}

impl GridFunction {
    pub fn new(dims: Vec<u64>, values: Vec<u64>) -> Result<Self> {
        if dims.len() < 2 || dims.iter().any(|&m| m == 0) {
            return Err(Error::InvalidArgument(format!(
                "grid needs at least two positive dimensions, got {dims:?}"
            )));
        }
        let cells: u64 = dims[..dims.len() - 1].iter().product();
        if values.len() as u64 != cells {
            return Err(Error::InvalidArgument(format!(
                "grid has {} values, dims {dims:?} need {cells}",
                values.len()
            )));
        }
        let top = *dims.last().unwrap();
        if values.iter().any(|&v| v > top) {
            return Err(Error::InvalidArgument(format!("grid value exceeds {top}")));
        }
        let g = Self { dims, values };
        if !g.is_monotone() {
            return Err(Error::InvalidArgument("grid values are not monotone".into()));
        }
        Ok(g)
    }

    /// Input dimensions `M_1..M_n` followed by the output dimension.
    pub fn dims(&self) -> &[u64] {
        &self.dims
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn input_dims(&self) -> &[u64] {
        &self.dims[..self.dims.len() - 1]
    }

    pub fn top(&self) -> u64 {
        *self.dims.last().unwrap()
    }

    fn index(&self, point: &[u64]) -> usize {
        point
            .iter()
            .zip(self.input_dims())
            .fold(0u64, |acc, (&p, &m)| acc * m + p) as usize
    }

    /// Value at a lattice point of `{0..M_1} x ... x {0..M_n}`.
    ///
    /// Points on the far boundary (some `p_i = M_i`) lie outside the stored
    /// grid and take the supremum `M_{n+1}`, which keeps the extension
    /// increasing.
    pub fn at(&self, point: &[u64]) -> u64 {
        if point.iter().zip(self.input_dims()).any(|(&p, &m)| p >= m) {
            self.top()
        } else {
            self.values[self.index(point)]
        }
    }

    fn is_monotone(&self) -> bool {
        let dims = self.input_dims();
        let mut point = vec![0u64; dims.len()];
        for cell in 0..self.values.len() {
            unflatten(cell as u64, dims, &mut point);
            let v = self.values[cell];
            for axis in 0..dims.len() {
                if point[axis] + 1 < dims[axis] {
                    point[axis] += 1;
                    let w = self.values[self.index(&point)];
                    point[axis] -= 1;
                    if w < v {
                        return false;
                    }
                }
            }
        }
        true
    }
}

pub(crate) fn unflatten(mut idx: u64, dims: &[u64], out: &mut [u64]) {
    for axis in (0..dims.len()).rev() {
        out[axis] = idx % dims[axis];
        idx /= dims[axis];
    }
}

/// Random monotone grid: i.i.d. uniform values in `[0, M_{n+1}]`, then a
/// running maximum along every input axis.
pub fn random_staircase(seed: u64, dims: &[u64]) -> GridFunction {
    assert!(dims.len() >= 2 && dims.iter().all(|&m| m >= 1), "bad dims {dims:?}");
    let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
    let input = &dims[..dims.len() - 1];
    let top = dims[dims.len() - 1];
    let cells: u64 = input.iter().product();
    let mut values: Vec<u64> = (0..cells).map(|_| rng.next_below(top + 1)).collect();
    // Row-major strides; a running max along each axis in turn yields the
    // maximum over the whole lower orthant.
    let mut stride = 1u64;
    for axis in (0..input.len()).rev() {
        let m = input[axis];
        for idx in 0..cells {
            if (idx / stride) % m != 0 {
                let prev = values[(idx - stride) as usize];
                let cur = &mut values[idx as usize];
                *cur = (*cur).max(prev);
            }
        }
        stride *= m;
    }
    GridFunction {
        dims: dims.to_vec(),
        values,
    }
}

/// Converts a small exact rational to `f64` for reporting.
pub fn to_f64(v: &BigRational) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

/// `m / 2^k` as an exact rational.
pub fn dyadic(m: u64, k: u32) -> BigRational {
    BigRational::new(BigInt::from(BigUint::from(m)), pow2(k))
}
