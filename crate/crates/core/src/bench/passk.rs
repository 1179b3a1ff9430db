/// Unbiased pass@k for `c` correct among `n` samples.
///
/// With `n < k` no `k`-subset exists; the estimate is then 1 if any sample is
/// correct and 0 otherwise. For `n ≥ k` it is `1 − C(n−c, k)/C(n, k)`,
/// evaluated as a running product.
pub fn pass_at_k(n: u64, c: u64, k: u64) -> Result<f64, PassAtKError> {
    check(n, c, k)?;
    if n < k {
        return Ok(if c > 0 { 1.0 } else { 0.0 });
    }
    if n - c < k {
        return Ok(1.0);
    }
    let mut miss = 1.0;
    for i in 0..k {
        miss *= (n - c - i) as f64 / (n - i) as f64;
    }
    Ok(1.0 - miss)
}

/// Exact rational value of [`pass_at_k`] as a reduced `(numerator, denominator)`.
/// Returns `None` if an intermediate product overflows.
pub fn pass_at_k_exact(n: u64, c: u64, k: u64) -> Result<Option<(u128, u128)>, PassAtKError> {
    check(n, c, k)?;
    if n < k {
        return Ok(Some((u128::from(c > 0), 1)));
    }
    if n - c < k {
        return Ok(Some((1, 1)));
    }
    let (mut num, mut den) = (1u128, 1u128);
    for i in 0..k {
        let (a, b) = (u128::from(n - c - i), u128::from(n - i));
        let (Some(x), Some(y)) = (num.checked_mul(a), den.checked_mul(b)) else {
            return Ok(None);
        };
        let g = gcd(x, y);
        num = x / g;
        den = y / g;
    }
    Ok(Some((den - num, den)))
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

fn check(n: u64, c: u64, k: u64) -> Result<(), PassAtKError> {
    if c > n {
        return Err(PassAtKError::Domain { n, c });
    }
    if k == 0 {
        return Err(PassAtKError::ZeroK);
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PassAtKError {
    #[error("c = {c} exceeds n = {n}")]
    Domain { n: u64, c: u64 },
    #[error("k must be at least 1")]
    ZeroK,
}
