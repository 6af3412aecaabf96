use super::bessel::BesselSeries;
use super::gamma::ln_gamma;
use crate::error::{check_probability, Error, Result};

/// Discrete law on `{0, 1, 2, ...}` with masses
/// `b_n = (z/2)^{2n+nu} / (I_nu(z) n! Gamma(n + nu + 1))`.
///
/// It is the mixing law of the dimension parameter in squared Bessel bridges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselDistribution {
    order: f64,
    argument: f64,
}

const NORMALIZATION_TOL: f64 = 1e-12;

impl BesselDistribution {
    pub fn new(order: f64, argument: f64) -> Result<Self> {
        if !(order > -1.0 && order.is_finite()) {
            return Err(Error::Domain(format!("Bessel law order {order} must exceed -1")));
        }
        if !(argument >= 0.0 && argument.is_finite()) {
            return Err(Error::Domain(format!("Bessel law argument {argument} must be >= 0")));
        }
        Ok(BesselDistribution { order, argument })
    }

    /// Probability masses, truncated once the tail is below double precision.
    /// The total is checked against an independent evaluation of `I_nu(z)`.
    pub fn pmf(&self) -> Result<Vec<f64>> {
        self.pmf_with(&BesselSeries::new(self.order)?)
    }

    pub(crate) fn pmf_with(&self, series: &BesselSeries) -> Result<Vec<f64>> {
        let (nu, z) = (self.order, self.argument);
        if z == 0.0 {
            return Ok(vec![1.0]);
        }
        let log_half = (0.5 * z).ln();
        let log_i = nu * log_half + series.log_reduced_real(z);
        let w = 0.25 * z * z;
        // Recurse outwards from the mode so that no mass underflows.
        let mode = (0.5 * ((z * z + nu * nu).sqrt() - nu)).floor().max(0.0);
        let parts = [
            (2.0 * mode + nu) * log_half,
            log_i,
            ln_gamma(mode + 1.0),
            ln_gamma(mode + nu + 1.0),
        ];
        let log_mode = parts[0] - parts[1] - parts[2] - parts[3];
        // the check can only be as precise as the cancelling log terms
        let tol = NORMALIZATION_TOL.max(8.0 * f64::EPSILON * parts.iter().map(|x| x.abs()).sum::<f64>());
        let peak = log_mode.exp();
        let m = mode as usize;
        let mut below = Vec::new();
        let mut b = peak;
        let mut n = mode;
        while n > 0.0 {
            // b_{n-1} = b_n n (n + nu) / w
            b *= n * (n + nu) / w;
            n -= 1.0;
            if b < 1e-18 * peak {
                break;
            }
            below.push(b);
        }
        let mut masses = vec![0.0; m - below.len()];
        masses.extend(below.iter().rev());
        masses.push(peak);
        let mut b = peak;
        let mut n = mode;
        loop {
            b *= w / ((n + 1.0) * (n + 1.0 + nu));
            n += 1.0;
            if b < 1e-18 * peak {
                break;
            }
            masses.push(b);
            if masses.len() > 10_000_000 {
                return Err(Error::Numerical(format!("Bessel law ({nu}, {z}) did not truncate")));
            }
        }
        let total: f64 = masses.iter().sum();
        if (total - 1.0).abs() > tol {
            return Err(Error::Numerical(format!(
                "Bessel law ({nu}, {z}) masses sum to {total}"
            )));
        }
        masses.iter_mut().for_each(|m| *m /= total);
        Ok(masses)
    }

    /// Smallest `n` whose cumulative mass reaches `p`.
    pub fn quantile(&self, p: f64) -> Result<u64> {
        check_probability(p)?;
        self.quantile_with(&BesselSeries::new(self.order)?, p)
    }

    pub(crate) fn quantile_with(&self, series: &BesselSeries, p: f64) -> Result<u64> {
        if self.argument == 0.0 {
            return Ok(0);
        }
        let masses = self.pmf_with(series)?;
        let mut cdf = 0.0;
        for (n, m) in masses.iter().enumerate() {
            cdf += m;
            if cdf >= p {
                return Ok(n as u64);
            }
        }
        Ok(masses.len() as u64 - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn very_large_argument() {
        let d = BesselDistribution::new(-0.366, 2000.0).unwrap();
        let pmf = d.pmf().unwrap();
        let mean: f64 = pmf.iter().enumerate().map(|(n, b)| n as f64 * b).sum();
        // Mean is (z/2) I_{nu+1}(z) / I_nu(z), close to z/2 - (2 nu + 1)/4 for large z.
        assert!((mean - (1000.0 - (2.0 * -0.366 + 1.0) / 4.0)).abs() < 0.05, "{mean}");
        let q = d.quantile(0.5).unwrap();
        assert!((q as f64 - mean).abs() < 3.0);
    }

    fn brute_masses(nu: f64, z: f64, count: usize) -> Vec<f64> {
        // unnormalised terms from scratch, normalised by their own sum
        let raw: Vec<f64> = (0..count)
            .map(|n| {
                let n = n as f64;
                ((2.0 * n + nu) * (z / 2.0).ln() - ln_gamma(n + 1.0) - ln_gamma(n + nu + 1.0)).exp()
            })
            .collect();
        let s: f64 = raw.iter().sum();
        raw.iter().map(|r| r / s).collect()
    }

    #[test]
    fn degenerate_argument() {
        let d = BesselDistribution::new(-0.37, 0.0).unwrap();
        for &p in &[1e-9, 0.5, 0.999] {
            assert_eq!(d.quantile(p).unwrap(), 0);
        }
    }

    #[test]
    fn normalization_half_order() {
        let d = BesselDistribution::new(0.5, 2.0).unwrap();
        let total: f64 = d.pmf().unwrap().iter().sum();
        assert!((1.0 - 1e-12..=1.0 + 1e-12).contains(&total));
    }

    #[test]
    fn quantile_against_summation_oracle() {
        let (nu, z) = (-0.37, 1.5);
        let masses = brute_masses(nu, z, 200);
        let d = BesselDistribution::new(nu, z).unwrap();
        for &p in &[0.01, 0.3, 0.5, 0.8, 0.97, 0.9999] {
            let mut cdf = 0.0;
            let mut want = 0;
            for (n, m) in masses.iter().enumerate() {
                cdf += m;
                if cdf >= p {
                    want = n as u64;
                    break;
                }
            }
            assert_eq!(d.quantile(p).unwrap(), want, "p={p}");
        }
    }

    #[test]
    fn large_argument_masses() {
        let d = BesselDistribution::new(0.63418, 400.0).unwrap();
        let masses = d.pmf().unwrap();
        let mode = masses
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0 as f64;
        // mode near (sqrt(z^2 + nu^2) - nu) / 2
        assert!((mode - (400.0 - 0.63418) / 2.0).abs() < 2.0);
    }

    #[test]
    fn rejects_invalid() {
        assert!(BesselDistribution::new(-1.0, 1.0).is_err());
        assert!(BesselDistribution::new(0.5, -1.0).is_err());
    }
}
