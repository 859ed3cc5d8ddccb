//! q-analog counting on arbitrary-precision naturals.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QError {
    #[error("q must be at least 2, got {0}")]
    SmallQ(u64),
    #[error("inexact division: {0}")]
    Inexact(&'static str),
    #[error("value too large to materialize (about 2^{0} )")]
    TooLarge(u64),
}

/// Running product is used below this `k`, the product tree at or above.
pub const PRODUCT_TREE_THRESHOLD: usize = 8;

fn check_q(q: u64) -> Result<(), QError> {
    if q < 2 {
        Err(QError::SmallQ(q))
    } else {
        Ok(())
    }
}

pub fn q_pow(q: u64, e: usize) -> BigUint {
    if q.is_power_of_two() {
        return BigUint::one() << (q.trailing_zeros() as usize * e);
    }
    num_traits::pow(BigUint::from(q), e)
}

/// `q^e - 1`
fn q_pow_minus_one(q: u64, e: usize) -> BigUint {
    q_pow(q, e) - 1u32
}

/// `[k]_q = 1 + q + ... + q^(k-1)`.
pub fn q_number(k: usize, q: u64) -> Result<BigUint, QError> {
    check_q(q)?;
    Ok(q_pow_minus_one(q, k) / BigUint::from(q - 1))
}

/// Number of k-dimensional subspaces of GF(q)^n.
pub fn gaussian(n: usize, k: usize, q: u64) -> Result<BigUint, QError> {
    check_q(q)?;
    if k > n {
        return Ok(BigUint::zero());
    }
    let k = k.min(n - k);
    if k >= PRODUCT_TREE_THRESHOLD {
        gaussian_product_tree(n, k, q)
    } else {
        Ok(gaussian_running(n, k, q))
    }
}

/// Builds `[n-k+i, i]_q` for `i = 1..=k`; every intermediate is an integer.
fn gaussian_running(n: usize, k: usize, q: u64) -> BigUint {
    let mut g = BigUint::one();
    for i in 1..=k {
        g *= q_pow_minus_one(q, n - k + i);
        let (quot, rem) = g.div_rem(&q_pow_minus_one(q, i));
        debug_assert!(rem.is_zero());
        g = quot;
    }
    g
}

/// Product of all factors by pairwise multiplication.
pub fn product_tree(mut layer: Vec<BigUint>) -> BigUint {
    if layer.is_empty() {
        return BigUint::one();
    }
    while layer.len() > 1 {
        let mut next = Vec::with_capacity(layer.len().div_ceil(2));
        let mut it = layer.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(a * b),
                None => next.push(a),
            }
        }
        layer = next;
    }
    layer.pop().unwrap()
}

/// Gaussian coefficient from separate numerator and denominator product
/// trees followed by one exact division.
pub fn gaussian_product_tree(n: usize, k: usize, q: u64) -> Result<BigUint, QError> {
    check_q(q)?;
    if k > n {
        return Ok(BigUint::zero());
    }
    let num = product_tree((n - k + 1..=n).map(|e| q_pow_minus_one(q, e)).collect());
    let den = product_tree((1..=k).map(|e| q_pow_minus_one(q, e)).collect());
    let (quot, rem) = num.div_rem(&den);
    assert!(rem.is_zero(), "Gaussian coefficient division left a remainder");
    Ok(quot)
}

/// From `g = [n, k]_q` derive `([n-1, k-1]_q, [n-1, k]_q)`.
pub fn gaussian_step_down(g: &BigUint, n: usize, k: usize, q: u64) -> Result<(BigUint, BigUint), QError> {
    check_q(q)?;
    if k == 0 || k >= n {
        return Err(QError::Inexact("step down needs 1 <= k <= n-1"));
    }
    let top = q_pow_minus_one(q, n);
    let (a, ra) = (g * q_pow_minus_one(q, k)).div_rem(&top);
    let (b, rb) = (g * q_pow_minus_one(q, n - k)).div_rem(&top);
    if !ra.is_zero() || !rb.is_zero() {
        return Err(QError::Inexact("input is not [n, k]_q"));
    }
    Ok((a, b))
}

/// Ordinary binomial coefficient.
pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut r = BigUint::one();
    for i in 0..k {
        r *= n - i;
        r /= i + 1;
    }
    r
}

pub fn factorial(n: u64) -> BigUint {
    product_tree((2..=n).map(BigUint::from).collect())
}

/// Upper limit on the bit length materialized by [`count_lower_bound`].
pub const LOWER_BOUND_MAX_BITS: f64 = (1u64 << 26) as f64;

struct BoundTerm {
    base: BigUint,
    inner_exp: BigUint,
    outer_exp: BigUint,
    i: usize,
}

fn bound_terms(n: usize, k: usize, q: u64) -> Result<Vec<BoundTerm>, QError> {
    check_q(q)?;
    let mut out = Vec::new();
    if k == 0 || k >= n {
        return Ok(out);
    }
    for i in 1..=n - k {
        for j in 1..=k {
            let outer_exp = binomial(n - i - j, n - k - i);
            if outer_exp.is_zero() {
                continue;
            }
            let qi = q.checked_pow(i as u32).ok_or(QError::TooLarge(u64::MAX))?;
            let base = factorial(qi - 1) * q;
            let inner_exp = gaussian(i + j - 1, j - 1, q)?;
            out.push(BoundTerm { base, inner_exp, outer_exp, i });
        }
    }
    Ok(out)
}

/// Approximate base-2 logarithm of [`count_lower_bound`].
pub fn count_lower_bound_log2(n: usize, k: usize, q: u64) -> Result<f64, QError> {
    let mut total = 0.0;
    for t in bound_terms(n, k, q)? {
        let lg_base = log2_big(&t.base);
        let lg_front = ((q - 1) as f64).log2() + (t.i - 1) as f64 * (q as f64).log2();
        let term = lg_front + big_to_f64(&t.inner_exp) * lg_base;
        total += term * big_to_f64(&t.outer_exp);
    }
    Ok(total)
}

/// Approximate number of decimal digits of [`count_lower_bound`].
pub fn count_lower_bound_digits(n: usize, k: usize, q: u64) -> Result<f64, QError> {
    Ok((count_lower_bound_log2(n, k, q)? * std::f64::consts::LOG10_2).floor() + 1.0)
}

/// Lower bound on the number of distinct codes produced by the recursive
/// construction:
/// `prod_{i=1}^{n-k} prod_{j=1}^{k} ((q-1) q^(i-1) ((q^i-1)! q)^[i+j-1, j-1]_q)^C(n-i-j, n-k-i)`.
pub fn count_lower_bound(n: usize, k: usize, q: u64) -> Result<BigUint, QError> {
    let bits = count_lower_bound_log2(n, k, q)?;
    if bits > LOWER_BOUND_MAX_BITS {
        return Err(QError::TooLarge(bits as u64));
    }
    let mut factors = Vec::new();
    for t in bound_terms(n, k, q)? {
        let inner = t
            .inner_exp
            .to_u32()
            .ok_or(QError::TooLarge(bits as u64))?;
        let outer = t.outer_exp.to_u32().ok_or(QError::TooLarge(bits as u64))?;
        let front = BigUint::from(q - 1) * q_pow(q, t.i - 1);
        let term = front * num_traits::pow(t.base, inner as usize);
        factors.push(num_traits::pow(term, outer as usize));
    }
    Ok(product_tree(factors))
}

fn big_to_f64(x: &BigUint) -> f64 {
    x.to_f64().unwrap_or(f64::INFINITY)
}

fn log2_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return big_to_f64(x).log2();
    }
    let shifted = x >> (bits - 64);
    big_to_f64(&shifted).log2() + (bits - 64) as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(x: u64) -> BigUint {
        BigUint::from(x)
    }

    #[test]
    fn q_numbers() {
        assert_eq!(q_number(0, 5).unwrap(), b(0));
        assert_eq!(q_number(1, 7).unwrap(), b(1));
        assert_eq!(q_number(3, 2).unwrap(), b(7));
        assert_eq!(q_number(3, 1).unwrap_err(), QError::SmallQ(1));
    }

    #[test]
    fn gaussian_values() {
        assert_eq!(gaussian(4, 2, 2).unwrap(), b(35));
        assert_eq!(gaussian(2, 1, 3).unwrap(), b(4));
        assert_eq!(gaussian(5, 2, 2).unwrap(), b(155));
        assert_eq!(gaussian(7, 0, 3).unwrap(), b(1));
        assert_eq!(gaussian(7, 7, 3).unwrap(), b(1));
        assert_eq!(gaussian(3, 4, 3).unwrap(), b(0));
        assert_eq!(gaussian(3, 1, 0).unwrap_err(), QError::SmallQ(0));
    }

    #[test]
    fn product_tree_agrees() {
        assert_eq!(gaussian_product_tree(4, 2, 2).unwrap(), b(35));
        assert_eq!(gaussian_product_tree(1, 1, 5).unwrap(), b(1));
        assert_eq!(gaussian_product_tree(8, 4, 3).unwrap(), gaussian_running(8, 4, 3));
        for n in 0..=20 {
            for k in 0..=n {
                for q in [2, 3, 4, 7] {
                    assert_eq!(gaussian_product_tree(n, k, q).unwrap(), gaussian_running(n, k, q));
                }
            }
        }
    }

    #[test]
    fn step_down() {
        assert_eq!(gaussian_step_down(&b(35), 4, 2, 2).unwrap(), (b(7), b(7)));
        assert_eq!(gaussian_step_down(&b(4), 2, 1, 3).unwrap(), (b(1), b(1)));
        assert_eq!(gaussian_step_down(&b(155), 5, 2, 2).unwrap(), (b(15), b(35)));
        assert!(matches!(gaussian_step_down(&b(36), 4, 2, 2), Err(QError::Inexact(_))));
    }

    #[test]
    fn lower_bound_small() {
        assert_eq!(count_lower_bound(3, 3, 7).unwrap(), b(1));
        assert_eq!(count_lower_bound(5, 0, 2).unwrap(), b(1));
        // single term i = j = 1: ((2-1) 2^0 ((2^1-1)! 2)^[1,0]_2)^C(0,0) = 2
        assert_eq!(count_lower_bound(2, 1, 2).unwrap(), b(2));
        // (i,j) = (1,1): (1 * 1 * (1! * 2)^1)^C(1,1) = 2
        // (i,j) = (2,1): (1 * 2 * (3! * 2)^1)^C(0,0) = 24
        assert_eq!(count_lower_bound(3, 1, 2).unwrap(), b(48));
    }

    #[test]
    fn lower_bound_log_matches_exact() {
        for (n, k, q) in [(3, 1, 2), (4, 2, 2), (5, 2, 2), (4, 1, 3)] {
            let exact = count_lower_bound(n, k, q).unwrap();
            let approx = count_lower_bound_log2(n, k, q).unwrap();
            assert!((log2_big(&exact) - approx).abs() < 1e-6 * approx.max(1.0));
        }
        assert!(matches!(count_lower_bound(30, 15, 2), Err(QError::TooLarge(_))));
        assert!(count_lower_bound_digits(30, 15, 2).unwrap() > 1e6);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), b(10));
        assert_eq!(binomial(0, 0), b(1));
        assert_eq!(binomial(2, 3), b(0));
        assert_eq!(factorial(5), b(120));
        assert_eq!(factorial(0), b(1));
    }
}
