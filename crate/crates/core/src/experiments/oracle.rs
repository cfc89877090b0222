//! Exact connectivity probability of `G(n, p)` for small `n`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub const ORACLE_MAX_N: usize = 12;

fn binomial(n: usize, k: usize) -> BigInt {
    (0..k).fold(BigInt::one(), |acc, i| acc * (n - i) / (i + 1))
}

/// `P(G(n, p) connected)` in exact rational arithmetic via
/// `P_n = 1 - sum_{k=1}^{n-1} C(n-1, k-1) P_k (1-p)^{k(n-k)}`.
pub fn er_connectivity_exact(n: usize, p: &BigRational) -> Result<BigRational> {
    if !(2..=ORACLE_MAX_N).contains(&n) {
        return Err(Error::Domain(format!(
            "exact oracle supports 2 <= n <= {ORACLE_MAX_N}, got {n}"
        )));
    }
    if *p < BigRational::zero() || *p > BigRational::one() {
        return Err(Error::Domain("edge probability must lie in [0, 1]".into()));
    }
    let q = BigRational::one() - p;
    let mut connected = vec![BigRational::zero(), BigRational::one()];
    for m in 2..=n {
        let mut acc = BigRational::one();
        for (k, p_k) in connected.iter().enumerate().take(m).skip(1) {
            let weight = BigRational::from_integer(binomial(m - 1, k - 1));
            let miss = num_traits::pow(q.clone(), k * (m - k));
            acc -= weight * p_k * miss;
        }
        connected.push(acc);
    }
    Ok(connected.swap_remove(n))
}

/// Floating-point view of [`er_connectivity_exact`]; `p` is converted exactly.
pub fn er_connectivity_oracle(n: usize, p: f64) -> Result<f64> {
    let exact_p = BigRational::from_float(p)
        .ok_or_else(|| Error::Domain(format!("edge probability must be finite, got {p}")))?;
    let value = er_connectivity_exact(n, &exact_p)?;
    value
        .to_f64()
        .ok_or_else(|| Error::Domain("oracle value not representable".into()))
}
