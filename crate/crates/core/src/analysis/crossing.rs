//! Brute-force crossing counts on integer grids.
//!
//! An increasing `g` on `[0, M_1) x ... x [0, M_n)` with values in
//! `[0, M_{n+1}]` is tested against every unit box
//! `I_z = [z_1 - 1, z_1) x ... x [z_{n+1} - 1, z_{n+1})`. A box is crossed
//! when neither of the engine's corner tests decides it:
//! `g(z_1, ..., z_n) <= z_{n+1} - 1` fails and
//! `g(z_1 - 1, ..., z_n - 1) >= z_{n+1}` fails.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::One;
use rayon::prelude::*;

use crate::bitsource::derive_trial_seed;
use crate::monofn::{random_staircase, unflatten, GridFunction, MonotoneOracle};

/// Upper limit on crossed boxes: `prod M_j - prod (M_j - 1)`.
pub fn prop1_bound(dims: &[u64]) -> BigUint {
    assert!(dims.iter().all(|&m| m >= 1), "dims must be positive");
    let all: BigUint = dims.iter().map(|&m| BigUint::from(m)).product();
    let inner: BigUint = dims.iter().map(|&m| BigUint::from(m - 1)).product();
    all - inner
}

fn count_with<V>(input_dims: &[u64], top: u64, value_at: V) -> u64
where
    V: Fn(&[u64]) -> BigRational + Sync,
{
    let cells: u64 = input_dims.iter().product();
    (0..cells)
        .into_par_iter()
        .map(|cell| {
            let mut lo = vec![0u64; input_dims.len()];
            unflatten(cell, input_dims, &mut lo);
            let hi: Vec<u64> = lo.iter().map(|&p| p + 1).collect();
            let g_lo = value_at(&lo);
            let g_hi = value_at(&hi);
            (1..=top)
                .filter(|&z| {
                    let z_hi = BigRational::from_integer(BigInt::from(z));
                    let z_lo = &z_hi - BigRational::one();
                    !(g_hi <= z_lo) && !(g_lo >= z_hi)
                })
                .count() as u64
        })
        .sum()
}

/// Crossed boxes for a grid function.
pub fn count_crossed(g: &GridFunction) -> u64 {
    count_with(g.input_dims(), g.top(), |p| {
        BigRational::from_integer(BigInt::from(g.at(p)))
    })
}

/// Crossed boxes for `f` rescaled to the grid: `g(p) = M_{n+1} f(p_1/M_1, ...)`.
pub fn count_crossed_oracle(f: &dyn MonotoneOracle, dims: &[u64]) -> u64 {
    assert_eq!(dims.len(), f.arity() + 1, "dims must list n + 1 sizes");
    let input = &dims[..dims.len() - 1];
    let top = dims[dims.len() - 1];
    let scale = BigRational::from_integer(BigInt::from(top));
    count_with(input, top, |p| {
        let x: Vec<BigRational> = p
            .iter()
            .zip(input)
            .map(|(&pi, &m)| BigRational::new(BigInt::from(pi), BigInt::from(m)))
            .collect();
        &scale * f.eval(&x)
    })
}

/// A grid whose crossing count exceeds the bound.
#[derive(Clone, Debug)]
pub struct Prop1Violation {
    pub case: u64,
    pub seed: u64,
    pub grid: GridFunction,
    pub crossed: u64,
    pub bound: BigUint,
}

impl fmt::Display for Prop1Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "case {} (seed {}): dims {:?} values {:?} crossed {} > bound {}",
            self.case,
            self.seed,
            self.grid.dims(),
            self.grid.values(),
            self.crossed,
            self.bound
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Prop1Summary {
    pub cases: u64,
    pub bound: BigUint,
    pub max_crossed: u64,
    /// Cases whose count met the bound exactly.
    pub tight_cases: u64,
}

/// Checks `count_crossed <= prop1_bound` on `cases` random staircases; case
/// `i` uses seed `derive_trial_seed(seed, i)`.
pub fn verify_prop1(dims: &[u64], cases: u64, seed: u64) -> Result<Prop1Summary, Prop1Violation> {
    let bound = prop1_bound(dims);
    let counts: Vec<(u64, u64)> = (0..cases)
        .into_par_iter()
        .map(|case| {
            let s = derive_trial_seed(seed, case);
            (s, count_crossed(&random_staircase(s, dims)))
        })
        .collect();
    let mut max_crossed = 0;
    let mut tight_cases = 0;
    for (case, &(s, crossed)) in counts.iter().enumerate() {
        if BigUint::from(crossed) > bound {
            return Err(Prop1Violation {
                case: case as u64,
                seed: s,
                grid: random_staircase(s, dims),
                crossed,
                bound,
            });
        }
        if BigUint::from(crossed) == bound {
            tight_cases += 1;
        }
        max_crossed = max_crossed.max(crossed);
    }
    Ok(Prop1Summary {
        cases,
        bound,
        max_crossed,
        tight_cases,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monofn::Builtin;

    #[test]
    fn bound_examples() {
        assert_eq!(prop1_bound(&[2, 2]), BigUint::from(3u32));
        assert_eq!(prop1_bound(&[3, 3, 3]), BigUint::from(19u32));
        assert_eq!(prop1_bound(&[1, 7]), BigUint::from(7u32));
    }

    #[test]
    fn identity_crosses_diagonal() {
        assert_eq!(count_crossed_oracle(&Builtin::Identity, &[2, 2]), 2);
        let g = GridFunction::new(vec![2, 2], vec![0, 1]).unwrap();
        // The far boundary takes the top value, so the last column is open.
        assert_eq!(count_crossed(&g), 2);
    }

    #[test]
    fn constant_one_crosses_nothing() {
        let g = GridFunction::new(vec![2, 2], vec![1, 1]).unwrap();
        let lattice_constant = count_with(&[2], 2, |_| BigRational::one());
        assert_eq!(lattice_constant, 0);
        // Boundary value 2 on the grid lets the top box cross in column 2.
        assert_eq!(count_crossed(&g), 1);
    }

    #[test]
    fn hard_function_rescaled() {
        let h = Builtin::Hard { n: 1 };
        for m in 1..8 {
            let dims = [m, m];
            let c = count_crossed_oracle(&h, &dims);
            assert!(BigUint::from(c) <= prop1_bound(&dims), "m={m} c={c}");
        }
    }

    #[test]
    fn staircases_respect_bound() {
        for dims in [vec![3, 5], vec![4, 4, 4], vec![2, 3, 2, 3]] {
            let s = verify_prop1(&dims, 200, 5).unwrap();
            assert!(BigUint::from(s.max_crossed) <= s.bound);
        }
    }
}
