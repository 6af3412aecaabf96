use super::gamma::{ln_gamma, regularized_gamma};
use super::normal::norm_inv;
use crate::error::{check_probability, Error, Result};

/// Below this mean the Poisson scan starts at zero.
const DIRECT_SCAN_MEAN: f64 = 30.0;

/// Poisson distribution function `P(N <= n)`.
pub fn poisson_cdf(mean: f64, n: u64) -> f64 {
    if mean <= 0.0 {
        return 1.0;
    }
    regularized_gamma(n as f64 + 1.0, mean).1
}

/// Smallest `n` with `P(N <= n) >= p` for `N ~ Poisson(mean)`.
pub fn poisson_quantile(mean: f64, p: f64) -> Result<u64> {
    check_probability(p)?;
    if !(mean >= 0.0 && mean.is_finite()) {
        return Err(Error::Domain(format!("Poisson mean {mean} must be finite and >= 0")));
    }
    if mean == 0.0 {
        return Ok(0);
    }
    if mean < DIRECT_SCAN_MEAN {
        let mut pmf = (-mean).exp();
        let mut cdf = pmf;
        let mut n = 0u64;
        while cdf < p {
            n += 1;
            pmf *= mean / n as f64;
            cdf += pmf;
            if pmf < 1e-300 && pmf < 1e-17 * cdf {
                // Rounding left the sum short of p; the remaining mass is nil.
                break;
            }
        }
        return Ok(n);
    }
    // Start near the quantile from a Cornish-Fisher guess and scan both ways
    // from an exact CDF anchor.
    let z = norm_inv(p);
    let guess = mean + mean.sqrt() * z + (z * z - 1.0) / 6.0;
    let mut n = guess.max(0.0).floor() as u64;
    let log_pmf = |k: u64| -mean + k as f64 * mean.ln() - ln_gamma(k as f64 + 1.0);
    let mut cdf = poisson_cdf(mean, n);
    if cdf >= p {
        // step down while the previous value still reaches p
        let mut pmf = log_pmf(n).exp();
        while n > 0 && cdf - pmf >= p {
            cdf -= pmf;
            pmf *= n as f64 / mean;
            n -= 1;
        }
    } else {
        let mut pmf = log_pmf(n).exp();
        while cdf < p {
            n += 1;
            pmf *= mean / n as f64;
            cdf += pmf;
            if pmf == 0.0 {
                break;
            }
        }
    }
    Ok(n)
}

/// Smallest `k` with `P(K <= k) >= p` for `K ~ Binomial(trials, prob)`.
pub fn binomial_quantile(trials: u64, prob: f64, p: f64) -> Result<u64> {
    check_probability(p)?;
    if !(0.0..=1.0).contains(&prob) {
        return Err(Error::Domain(format!("binomial probability {prob} outside [0, 1]")));
    }
    if trials == 0 || prob == 0.0 {
        return Ok(0);
    }
    if prob == 1.0 {
        return Ok(trials);
    }
    let n = trials as f64;
    let log_q = (-prob).ln_1p();
    let ratio = prob / (1.0 - prob);
    let log_p0 = n * log_q;
    if log_p0 > -700.0 {
        let mut pmf = log_p0.exp();
        let mut cdf = pmf;
        let mut k = 0u64;
        while cdf < p && k < trials {
            pmf *= (n - k as f64) / (k as f64 + 1.0) * ratio;
            k += 1;
            cdf += pmf;
        }
        return Ok(k);
    }
    // Large trial counts: normalise log-masses explicitly.
    let log_choose = |k: f64| ln_gamma(n + 1.0) - ln_gamma(k + 1.0) - ln_gamma(n - k + 1.0);
    let log_pmf: Vec<f64> = (0..=trials)
        .map(|k| {
            let k = k as f64;
            log_choose(k) + k * prob.ln() + (n - k) * log_q
        })
        .collect();
    let peak = log_pmf.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let total: f64 = log_pmf.iter().map(|l| (l - peak).exp()).sum();
    let mut cdf = 0.0;
    for (k, l) in log_pmf.iter().enumerate() {
        cdf += (l - peak).exp() / total;
        if cdf >= p {
            return Ok(k as u64);
        }
    }
    Ok(trials)
}
