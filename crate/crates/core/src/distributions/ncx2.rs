use super::gamma::{ln_gamma, regularized_gamma};
use super::normal::norm_inv;
use super::solve::Inversion;
use crate::error::{check_probability, Error, Result};

/// Noncentral chi-squared law with `dof` degrees of freedom and
/// noncentrality `noncentrality`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoncentralChiSq {
    dof: f64,
    noncentrality: f64,
}

const WEIGHT_CUTOFF: f64 = 1e-18;

impl NoncentralChiSq {
    pub fn new(dof: f64, noncentrality: f64) -> Result<Self> {
        if !(dof > 0.0 && dof.is_finite()) {
            return Err(Error::Domain(format!("degrees of freedom {dof} must be positive")));
        }
        if !(noncentrality >= 0.0 && noncentrality.is_finite()) {
            return Err(Error::Domain(format!("noncentrality {noncentrality} must be >= 0")));
        }
        Ok(NoncentralChiSq { dof, noncentrality })
    }

    pub fn dof(&self) -> f64 {
        self.dof
    }

    pub fn noncentrality(&self) -> f64 {
        self.noncentrality
    }

    pub fn mean(&self) -> f64 {
        self.dof + self.noncentrality
    }

    pub fn variance(&self) -> f64 {
        2.0 * (self.dof + 2.0 * self.noncentrality)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.cdf_pdf(x).0
    }

    /// Distribution function and density at `x`, from the Poisson mixture of
    /// central laws summed outward from the Poisson mode.
    pub fn cdf_pdf(&self, x: f64) -> (f64, f64) {
        let a = 0.5 * self.dof;
        let mu = 0.5 * self.noncentrality;
        if x <= 0.0 {
            let pdf = if self.dof < 2.0 {
                f64::INFINITY
            } else if self.dof == 2.0 {
                0.5 * (-mu).exp()
            } else {
                0.0
            };
            return (0.0, pdf);
        }
        let y = 0.5 * x;
        let ly = y.ln();
        // g(b) = y^b e^{-y} / Gamma(b + 1); the central chi-squared density
        // with 2(b + 1) degrees of freedom at x equals g(b) / 2.
        let g = |b: f64| (b * ly - y - ln_gamma(b + 1.0)).exp();

        let j0 = mu.floor();
        let w0 = if mu > 0.0 {
            (-mu + j0 * mu.ln() - ln_gamma(j0 + 1.0)).exp()
        } else {
            1.0
        };
        let p0 = regularized_gamma(a + j0, y).0;
        let g0 = g(a + j0 - 1.0);

        let mut cdf = w0 * p0;
        let mut pdf = w0 * g0;

        // upward
        let (mut w, mut p, mut gm1) = (w0, p0, g0);
        let mut j = j0;
        if mu > 0.0 {
            loop {
                let gj = gm1 * y / (a + j);
                p = (p - gj).max(0.0);
                w *= mu / (j + 1.0);
                j += 1.0;
                gm1 = gj;
                cdf += w * p;
                pdf += w * gm1;
                if w < WEIGHT_CUTOFF || (p == 0.0 && gm1 == 0.0) {
                    break;
                }
            }
        }

        // downward
        let (mut w, mut p, mut gm1) = (w0, p0, g0);
        let mut j = j0;
        while j > 0.0 {
            p = (p + gm1).min(1.0);
            w *= j / mu;
            j -= 1.0;
            gm1 *= (a + j) / y;
            cdf += w * p;
            pdf += w * gm1;
            if w < WEIGHT_CUTOFF {
                break;
            }
        }
        (cdf.clamp(0.0, 1.0), 0.5 * pdf)
    }

    /// Quantile by safeguarded Newton on the distribution function, seeded
    /// with a two-moment central approximation and Wilson-Hilferty.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        check_probability(p)?;
        let guess = self.initial_guess(p);
        let solver = Inversion {
            tol: 1e-12,
            max_iter: 300,
        };
        solver.solve(p, guess, |x| self.cdf_pdf(x)).map_err(|e| match e {
            Error::Numerical(msg) => Error::Numerical(format!(
                "noncentral chi-squared (dof={}, nc={}): {msg}",
                self.dof, self.noncentrality
            )),
            other => other,
        })
    }

    fn initial_guess(&self, p: f64) -> f64 {
        let (nu, lam) = (self.dof, self.noncentrality);
        let c = (nu + 2.0 * lam) / (nu + lam);
        let f = (nu + lam) * (nu + lam) / (nu + 2.0 * lam);
        let z = norm_inv(p);
        let k = 2.0 / (9.0 * f);
        let wh = f * (1.0 - k + z * k.sqrt()).powi(3);
        if wh > 1e-3 * f {
            c * wh
        } else {
            // Lower tail of a central law: F(x) ~ (x/2)^{f/2} / Gamma(f/2 + 1).
            let a = 0.5 * f;
            c * 2.0 * ((p.ln() + ln_gamma(a + 1.0)) / a).exp()
        }
    }
}
