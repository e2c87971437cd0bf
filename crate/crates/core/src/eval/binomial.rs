//! Expected absolute deviation of a binomial count from a fixed integer.

use crate::error::{Error, Result};

/// Below this, `(1 - p)^k` is too close to the subnormal range for the
/// multiplicative recurrence.
const LINEAR_FLOOR: f64 = 1e-280;

/// Probability mass function of `Binomial(k, p)` for `s = 0..=k`.
pub fn binomial_pmf(k: usize, p: f64) -> Vec<f64> {
    let mut pmf = vec![0.0; k + 1];
    if p <= 0.0 {
        pmf[0] = 1.0;
        return pmf;
    }
    if p >= 1.0 {
        pmf[k] = 1.0;
        return pmf;
    }
    let ratio = p / (1.0 - p);
    let log_first = k as f64 * (-p).ln_1p();
    let first = log_first.exp();
    if first > LINEAR_FLOOR {
        pmf[0] = first;
        for s in 0..k {
            pmf[s + 1] = pmf[s] * ((k - s) as f64 / (s + 1) as f64) * ratio;
        }
    } else {
        let log_ratio = ratio.ln();
        let mut lp = log_first;
        pmf[0] = lp.exp();
        for s in 0..k {
            lp += ((k - s) as f64 / (s + 1) as f64).ln() + log_ratio;
            pmf[s + 1] = lp.exp();
        }
    }
    pmf
}

fn check(t: usize, p: f64, k: usize) -> Result<()> {
    if t > k {
        return Err(Error::OutOfRange(format!("t = {t} exceeds k = {k}")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::OutOfRange(format!("p = {p} outside [0, 1]")));
    }
    Ok(())
}

/// `E|t - S|` for `S ~ Binomial(k, p)`, by direct summation in `O(k)`.
pub fn binom_abs_dev(t: usize, p: f64, k: usize) -> Result<f64> {
    check(t, p, k)?;
    if p <= 0.0 {
        return Ok(t as f64);
    }
    if p >= 1.0 {
        return Ok((k - t) as f64);
    }
    let pmf = binomial_pmf(k, p);
    Ok(abs_dev_from_pmf(t, &pmf))
}

pub(crate) fn abs_dev_from_pmf(t: usize, pmf: &[f64]) -> f64 {
    pmf.iter()
        .enumerate()
        .map(|(s, &w)| (t as f64 - s as f64).abs() * w)
        .sum()
}

/// `E|t - S|` for every `t = 0..=k`.
///
/// Uses `B(0) = E[S]` and `B(t + 1) = B(t) + 2 P(S <= t) - 1`, so the whole
/// table costs `O(k)` after the pmf.
pub fn binom_abs_dev_table(p: f64, k: usize) -> Result<Vec<f64>> {
    check(0, p, k)?;
    if p <= 0.0 {
        return Ok((0..=k).map(|t| t as f64).collect());
    }
    if p >= 1.0 {
        return Ok((0..=k).map(|t| (k - t) as f64).collect());
    }
    let pmf = binomial_pmf(k, p);
    let mean: f64 = pmf.iter().enumerate().map(|(s, &w)| s as f64 * w).sum();
    let mut out = Vec::with_capacity(k + 1);
    let mut b = mean;
    let mut cdf = 0.0;
    out.push(b);
    for &w in pmf.iter().take(k) {
        cdf += w;
        b += 2.0 * cdf.min(1.0) - 1.0;
        out.push(b.max(0.0));
    }
    Ok(out)
}
