//! Exact counts of reduced and cyclically reduced words, and the
//! omission-probability bound.
//!
//! Everything here is exact integer arithmetic on [`BigUint`]; `(2m-1)^l`
//! overflows fixed-width types immediately at the lengths we sweep, and the
//! downstream samplers need the counts exactly, not approximately.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CountError {
    #[error("generator count must be at least 2, got {0}")]
    GeneratorCount(u32),
    #[error("length parameter must be at least 1, got {0}")]
    Length(u64),
    #[error("omission bound hypothesis violated: {0}")]
    OmissionHypothesis(String),
}

/// Counts of reduced words of length `n + 2` with both endpoints fixed.
///
/// `p` counts words of the form `x u x`, `q` the form `x u x^{-1}`, and `r`
/// the form `x u y` for a fixed second generator `y`.  By symmetry the counts
/// do not depend on which generators are chosen.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EndpointCounts {
    pub n: u64,
    pub p: BigUint,
    pub q: BigUint,
    pub r: BigUint,
}

/// Tables of `p_k`, `q_k`, `r_k` for `k = 0..=n_max`, plus powers of `2m-1`.
///
/// Index 0 is the length-2 base case (`p_0 = 1`, `q_0 = 0`, `r_0 = 1`), which
/// the published recurrences extend downward consistently: applying them at
/// `k = 1` reproduces `p_1 = 2m-1`, `q_1 = r_1 = 2m-2`.
#[derive(Debug, Clone)]
pub(crate) struct EndpointTable {
    pub m: u32,
    pub p: Vec<BigUint>,
    pub q: Vec<BigUint>,
    pub r: Vec<BigUint>,
    /// `pow[k] = (2m-1)^k`
    pub pow: Vec<BigUint>,
}

impl EndpointTable {
    pub fn new(m: u32, n_max: u64) -> Result<EndpointTable, CountError> {
        if m < 2 {
            return Err(CountError::GeneratorCount(m));
        }
        let n_max = n_max as usize;
        let base = BigUint::from(2 * m - 1);
        let twom2 = BigUint::from(2 * m - 2);
        let twom3 = BigUint::from(2 * m - 3);
        let mut p = Vec::with_capacity(n_max + 1);
        let mut q = Vec::with_capacity(n_max + 1);
        let mut r = Vec::with_capacity(n_max + 1);
        let mut pow = Vec::with_capacity(n_max + 1);
        p.push(BigUint::one());
        q.push(BigUint::zero());
        r.push(BigUint::one());
        pow.push(BigUint::one());
        for k in 1..=n_max {
            p.push(&p[k - 1] + &twom2 * &r[k - 1]);
            q.push(&q[k - 1] + &twom2 * &r[k - 1]);
            r.push(&p[k - 1] + &q[k - 1] + &twom3 * &r[k - 1]);
            pow.push(&pow[k - 1] * &base);
        }
        Ok(EndpointTable { m, p, q, r, pow })
    }
}

/// Exact `p_n`, `q_n`, `r_n` via the transfer recurrences
/// `p_n = p_{n-1} + (2m-2) r_{n-1}`,
/// `q_n = q_{n-1} + (2m-2) r_{n-1}`,
/// `r_n = p_{n-1} + q_{n-1} + (2m-3) r_{n-1}`,
/// from `p_1 = 2m-1`, `q_1 = r_1 = 2m-2`.
pub fn endpoint_counts(m: u32, n: u64) -> Result<EndpointCounts, CountError> {
    if n < 1 {
        return Err(CountError::Length(n));
    }
    let table = EndpointTable::new(m, n)?;
    let counts = EndpointCounts {
        n,
        p: table.p[n as usize].clone(),
        q: table.q[n as usize].clone(),
        r: table.r[n as usize].clone(),
    };
    debug_assert_eq!(counts.q, closed_form_q(m, n).expect("same preconditions"));
    Ok(counts)
}

/// Closed form for `q_n`:
/// `((2m-1)^{n+1} - 1) / 2m` for odd `n`,
/// `((2m-1)^{n+1} - (2m-1)) / 2m` for even `n`.
/// Both divisions are exact; this is the independent cross-check for the
/// recurrences.
pub fn closed_form_q(m: u32, n: u64) -> Result<BigUint, CountError> {
    if m < 2 {
        return Err(CountError::GeneratorCount(m));
    }
    if n < 1 {
        return Err(CountError::Length(n));
    }
    let base = BigUint::from(2 * m - 1);
    let power = base.pow(n as u32 + 1);
    let numerator = if n % 2 == 1 {
        power - BigUint::one()
    } else {
        power - &base
    };
    let (quot, rem) = num_integer::Integer::div_rem(&numerator, &BigUint::from(2 * m));
    debug_assert!(rem.is_zero(), "closed form division must be exact");
    Ok(quot)
}

/// `N_l`: the number of cyclically reduced words of length `l` over `m`
/// generators, via `N_l = 2m * p_{l-1}`.  For `l = 1` this is `2m`.
pub fn count_cyclically_reduced(m: u32, l: u64) -> Result<BigUint, CountError> {
    if l < 1 {
        return Err(CountError::Length(l));
    }
    let table = EndpointTable::new(m, l - 1)?;
    Ok(BigUint::from(2 * m) * &table.p[(l - 1) as usize])
}

/// `N_{<=l}`: cyclically reduced words of length between 1 and `l`.
pub fn count_cyclically_reduced_upto(m: u32, l: u64) -> Result<BigUint, CountError> {
    if l < 1 {
        return Err(CountError::Length(l));
    }
    let table = EndpointTable::new(m, l - 1)?;
    let twom = BigUint::from(2 * m);
    let mut total = BigUint::zero();
    for k in 1..=l {
        total += &twom * &table.p[(k - 1) as usize];
    }
    Ok(total)
}

/// Input for [`omission_bound`]: relator length `l`, forbidden-word length
/// `g`, with the hypotheses `4 < g < l/4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OmissionBoundInput {
    pub m: u32,
    pub l: u64,
    pub g: u64,
}

/// Upper bound on the proportion of cyclically reduced words of length `l`
/// that omit a fixed reduced word of length `g`:
///
/// `exp( 2/(2m-1)^{l/2 - 1}  -  l / (9 g (2m-1)^g) )`,
///
/// clamped to at most 1.  Both exponent terms are evaluated in log space so
/// that lengths up to 10^6 neither overflow nor underflow.
pub fn omission_bound(input: OmissionBoundInput) -> Result<f64, CountError> {
    let OmissionBoundInput { m, l, g } = input;
    if m < 2 {
        return Err(CountError::GeneratorCount(m));
    }
    if g <= 4 {
        return Err(CountError::OmissionHypothesis(format!(
            "need g > 4, got g = {g}"
        )));
    }
    if 4 * g >= l {
        return Err(CountError::OmissionHypothesis(format!(
            "need g < l/4, got g = {g}, l = {l}"
        )));
    }
    let ln_base = (2.0 * m as f64 - 1.0).ln();
    // 2 (2m-1)^{-(l/2 - 1)}
    let t1 = (std::f64::consts::LN_2 - (l as f64 / 2.0 - 1.0) * ln_base).exp();
    // l / (9 g (2m-1)^g)
    let t2 = ((l as f64).ln() - (9.0 * g as f64).ln() - g as f64 * ln_base).exp();
    Ok((t1 - t2).exp().min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use num_traits::ToPrimitive;

    /// Brute-force oracle: enumerate every reduced word of length `l` over
    /// `m` generators and count the cyclically reduced ones.
    fn brute_force_cyclically_reduced(m: u32, l: u64) -> u64 {
        fn go(m: u32, remaining: u64, first: i64, last: i64, count: &mut u64) {
            if remaining == 0 {
                if first != -last {
                    *count += 1;
                }
                return;
            }
            for g in 1..=m as i64 {
                for c in [g, -g] {
                    if c == -last {
                        continue;
                    }
                    let first = if first == 0 { c } else { first };
                    go(m, remaining - 1, first, c, count);
                }
            }
        }
        let mut count = 0;
        go(m, l, 0, 0, &mut count);
        count
    }

    #[test]
    fn endpoint_base_cases() {
        let c = endpoint_counts(2, 1).unwrap();
        assert_eq!(c.p, BigUint::from(3u32));
        assert_eq!(c.q, BigUint::from(2u32));
        assert_eq!(c.r, BigUint::from(2u32));
        // hand-unrolled n = 2 (spec example, verified by enumeration below)
        let c = endpoint_counts(2, 2).unwrap();
        assert_eq!(c.p, BigUint::from(7u32));
        assert_eq!(c.q, BigUint::from(6u32));
        assert_eq!(c.r, BigUint::from(7u32));
        // closed form at n = 3: (3^4 - 1)/4 = 20
        assert_eq!(endpoint_counts(2, 3).unwrap().q, BigUint::from(20u32));
        assert!(endpoint_counts(2, 0).is_err());
        assert!(endpoint_counts(1, 3).is_err());
    }

    /// Enumeration oracle for p_2, q_2, r_2 at m = 2: reduced 4-letter words
    /// with fixed endpoints.
    #[test]
    fn endpoint_n2_matches_enumeration() {
        let mut p = 0u32;
        let mut q = 0u32;
        let mut r = 0u32;
        // words a x y z over {a,A,b,B}, counting by final letter
        let letters = [1i64, -1, 2, -2];
        for &x in &letters {
            if x == -1 {
                continue;
            }
            for &y in &letters {
                if y == -x {
                    continue;
                }
                for &z in &letters {
                    if z == -y {
                        continue;
                    }
                    match z {
                        1 => p += 1,
                        -1 => q += 1,
                        2 => r += 1,
                        _ => {}
                    }
                }
            }
        }
        let c = endpoint_counts(2, 2).unwrap();
        assert_eq!(c.p.to_u32(), Some(p));
        assert_eq!(c.q.to_u32(), Some(q));
        assert_eq!(c.r.to_u32(), Some(r));
    }

    #[test]
    fn parity_relations_hold() {
        for m in [2u32, 3, 5] {
            let table = EndpointTable::new(m, 40).unwrap();
            for n in 1..=40usize {
                let one = BigUint::one();
                if n % 2 == 1 {
                    assert_eq!(table.p[n], &table.q[n] + &one, "m={m} n={n}");
                    assert_eq!(table.r[n], table.q[n], "m={m} n={n}");
                } else {
                    assert_eq!(table.p[n], &table.q[n] + &one, "m={m} n={n}");
                    assert_eq!(table.p[n], table.r[n], "m={m} n={n}");
                }
            }
        }
    }

    #[test]
    fn closed_form_matches_recurrence_to_200() {
        for m in [2u32, 3] {
            let table = EndpointTable::new(m, 200).unwrap();
            for n in 1..=200u64 {
                assert_eq!(
                    table.q[n as usize],
                    closed_form_q(m, n).unwrap(),
                    "m={m} n={n}"
                );
            }
        }
    }

    /// max/min <= 1 + 2/(2m-1)^n, checked in exact rational arithmetic.
    #[test]
    fn ratio_bound_exact_to_200() {
        for m in [2u32, 3] {
            let table = EndpointTable::new(m, 200).unwrap();
            for n in 1..=200usize {
                let vals = [&table.p[n], &table.q[n], &table.r[n]];
                let max = BigInt::from((*vals.iter().max().unwrap()).clone());
                let min = BigInt::from((*vals.iter().min().unwrap()).clone());
                let ratio = BigRational::new(max, min);
                let bound = BigRational::from_integer(1.into())
                    + BigRational::new(2.into(), BigInt::from(table.pow[n].clone()));
                assert!(ratio <= bound, "m={m} n={n}");
            }
        }
    }

    #[test]
    fn cyclically_reduced_counts_small() {
        assert_eq!(count_cyclically_reduced(2, 1).unwrap(), BigUint::from(4u32));
        assert_eq!(count_cyclically_reduced(2, 2).unwrap(), BigUint::from(12u32));
        assert_eq!(count_cyclically_reduced(2, 3).unwrap(), BigUint::from(28u32));
        assert_eq!(
            count_cyclically_reduced_upto(2, 2).unwrap(),
            BigUint::from(16u32)
        );
        assert_eq!(
            count_cyclically_reduced_upto(2, 3).unwrap(),
            BigUint::from(44u32)
        );
        assert!(count_cyclically_reduced(2, 0).is_err());
    }

    #[test]
    fn counts_match_brute_force() {
        for m in [2u32, 3] {
            for l in 1..=8u64 {
                let expected = brute_force_cyclically_reduced(m, l);
                assert_eq!(
                    count_cyclically_reduced(m, l).unwrap().to_u64(),
                    Some(expected),
                    "m={m} l={l}"
                );
            }
        }
    }

    /// N_l stays within the multiplicative corridor [3/4, 4/3] of (2m-1)^l.
    #[test]
    fn n_l_within_four_thirds() {
        for m in [2u32, 3, 5] {
            let table = EndpointTable::new(m, 60).unwrap();
            for l in 1..=60u64 {
                let n_l = BigUint::from(2 * m) * &table.p[(l - 1) as usize];
                let power = table.pow[l as usize].clone();
                assert!(
                    BigUint::from(3u32) * &n_l <= BigUint::from(4u32) * &power,
                    "upper m={m} l={l}"
                );
                assert!(
                    BigUint::from(4u32) * &n_l >= BigUint::from(3u32) * &power,
                    "lower m={m} l={l}"
                );
            }
        }
    }

    #[test]
    fn omission_bound_examples() {
        let b = omission_bound(OmissionBoundInput { m: 2, l: 1000, g: 5 }).unwrap();
        assert!((b - 0.9126).abs() < 5e-4, "got {b}");
        let b = omission_bound(OmissionBoundInput { m: 2, l: 100_000, g: 5 }).unwrap();
        assert!((b - 1.07e-4).abs() < 2e-6, "got {b}");
        // enormous l: tiny but well-formed, never NaN
        let b = omission_bound(OmissionBoundInput { m: 2, l: 1_000_000, g: 5 }).unwrap();
        assert!(b > 0.0 && b < 1e-30, "got {b}");
        // clamp: tiny pressure term, bound capped at 1
        let b = omission_bound(OmissionBoundInput { m: 2, l: 1_000_000, g: 200_000 }).unwrap();
        assert!(b <= 1.0);
        assert!(omission_bound(OmissionBoundInput { m: 2, l: 100, g: 25 }).is_err());
        assert!(omission_bound(OmissionBoundInput { m: 2, l: 100, g: 4 }).is_err());
    }

    /// Recompute the l=1000 example with arbitrary-precision rationals for
    /// the inner term, as an independent route to the same number.
    #[test]
    fn omission_bound_against_rational_recompute() {
        // t2 = 1000 / (9 * 5 * 3^5) exactly
        let t2 = BigRational::new(1000.into(), BigInt::from(9 * 5 * 243));
        let t2_f = t2.to_f64().unwrap();
        // t1 = 2/3^499 is far below f64 resolution of the sum
        let expected = (-t2_f).exp();
        let b = omission_bound(OmissionBoundInput { m: 2, l: 1000, g: 5 }).unwrap();
        assert!((b - expected).abs() < 1e-12, "b={b} expected={expected}");
    }
}
