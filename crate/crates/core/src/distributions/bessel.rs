//! Modified Bessel function of the first kind, `I_nu`, for real order
//! `nu > -1` and real or complex argument.
//!
//! The function is split as `I_nu(z) = (z/2)^nu * R_nu(z^2)` where the
//! reduced part `R_nu` is entire in `z^2`. Callers that need an analytic
//! continuation along a path (the integrated-variance characteristic
//! function) track the `(z/2)^nu` factor themselves and only ask for
//! `log R_nu`.

use super::gamma::ln_gamma;
use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

/// `|z|` at which evaluation switches from the ascending series to the
/// large-argument expansion.
const SERIES_RADIUS: f64 = 17.0;
const MAX_TERMS: usize = 400;

/// Coefficients `1 / (k! Gamma(k + nu + 1))` of the ascending series,
/// computed once per order.
#[derive(Debug, Clone)]
pub struct BesselSeries {
    nu: f64,
    coeffs: Vec<f64>,
}

impl BesselSeries {
    pub fn new(nu: f64) -> Result<Self> {
        if !(nu > -1.0 && nu.is_finite()) {
            return Err(Error::Domain(format!("Bessel order {nu} must exceed -1")));
        }
        let mut coeffs = Vec::with_capacity(MAX_TERMS);
        let mut c = (-ln_gamma(nu + 1.0)).exp();
        coeffs.push(c);
        for k in 1..MAX_TERMS {
            c /= k as f64 * (k as f64 + nu);
            coeffs.push(c);
            if c == 0.0 {
                break;
            }
        }
        Ok(BesselSeries { nu, coeffs })
    }

    pub fn order(&self) -> f64 {
        self.nu
    }

    /// `log R_nu(z)` given `z^2`.
    pub fn log_reduced(&self, z_sq: Complex64) -> Complex64 {
        if Self::in_series_range(z_sq) {
            self.series(z_sq)
        } else {
            self.expansion(z_sq)
        }
    }

    /// Whether [`Self::reduced_series`] is accurate at `z^2`.
    #[inline]
    pub fn in_series_range(z_sq: Complex64) -> bool {
        z_sq.norm_sqr() <= SERIES_RADIUS.powi(4)
    }

    /// `R_nu(z)` by the ascending series; see [`Self::in_series_range`].
    pub fn reduced_series(&self, z_sq: Complex64) -> Complex64 {
        self.series_sum(z_sq)
    }

    fn series(&self, z_sq: Complex64) -> Complex64 {
        self.series_sum(z_sq).ln()
    }

    fn series_sum(&self, z_sq: Complex64) -> Complex64 {
        let w = 0.25 * z_sq;
        let mut sum = Complex64::new(self.coeffs[0], 0.0);
        let mut pow = Complex64::new(1.0, 0.0);
        // Terms grow until k is about sqrt(|w|).
        let peak = w.norm_sqr().sqrt().sqrt();
        for (k, &c) in self.coeffs.iter().enumerate().skip(1) {
            pow *= w;
            let term = pow * c;
            sum += term;
            if (k as f64) > peak && term.norm_sqr() <= 1e-34 * sum.norm_sqr() {
                break;
            }
        }
        sum
    }

    fn expansion(&self, z_sq: Complex64) -> Complex64 {
        let (exponent, factor) = self.expansion_parts(z_sq);
        exponent + factor.ln()
    }

    /// `(e, f)` with `R_nu = exp(e) * f`, from the large-argument expansion
    /// when it converges and from order recurrence otherwise.
    fn expansion_parts(&self, z_sq: Complex64) -> (Complex64, Complex64) {
        let z = csqrt(z_sq);
        match asymptotic_bracket(self.nu, z) {
            (bracket, error) if error < 1e-14 => {
                // R = e^z (2 pi)^{-1/2} 2^nu z^{-(nu + 1/2)} * bracket
                let constant = self.nu * std::f64::consts::LN_2 - 0.5 * (2.0 * PI).ln();
                (z - (self.nu + 0.5) * z.ln() + constant, bracket)
            }
            _ => (
                log_bessel_by_ratios(self.nu, z) - self.nu * (0.5 * z).ln(),
                Complex64::new(1.0, 0.0),
            ),
        }
    }

    /// `(e, f)` with `R_nu(z) = exp(e) * f`, avoiding overflow for large `z`.
    pub fn reduced_parts(&self, z_sq: Complex64) -> (Complex64, Complex64) {
        if Self::in_series_range(z_sq) {
            (Complex64::new(0.0, 0.0), self.series_sum(z_sq))
        } else {
            self.expansion_parts(z_sq)
        }
    }

    /// Real-argument version of [`Self::log_reduced`] for `x >= 0`.
    pub fn log_reduced_real(&self, x: f64) -> f64 {
        if x <= SERIES_RADIUS {
            let w = 0.25 * x * x;
            let mut sum = self.coeffs[0];
            let mut pow = 1.0;
            for (k, &c) in self.coeffs.iter().enumerate().skip(1) {
                pow *= w;
                let term = pow * c;
                sum += term;
                if (k as f64) > w && term <= 1e-17 * sum {
                    break;
                }
            }
            sum.ln()
        } else {
            self.expansion(Complex64::new(x * x, 0.0)).re
        }
    }
}

/// Principal square root without the polar form.
#[inline]
pub(crate) fn csqrt(z: Complex64) -> Complex64 {
    let m = z.norm();
    if m == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    if z.re >= 0.0 {
        let t = (0.5 * (m + z.re)).sqrt();
        Complex64::new(t, 0.5 * z.im / t)
    } else {
        let t = (0.5 * (m - z.re)).sqrt();
        Complex64::new(0.5 * z.im.abs() / t, t.copysign(z.im))
    }
}

/// Large-argument expansion `I_nu(z) = e^z / sqrt(2 pi z) * bracket` for
/// `Re z >= 0`; returns `bracket`, which includes the exponentially small
/// companion term off the real axis, and the size of the smallest term used,
/// which bounds the error of the divergent series.
fn asymptotic_bracket(nu: f64, z: Complex64) -> (Complex64, f64) {
    let mu = 4.0 * nu * nu;
    let inv = z.inv();
    let mut a = 1.0;
    let mut pow = Complex64::new(1.0, 0.0);
    let mut alt = Complex64::new(1.0, 0.0);
    let mut plain = Complex64::new(1.0, 0.0);
    let mut last = f64::INFINITY;
    for k in 1..200 {
        let kf = k as f64;
        a *= (mu - (2.0 * kf - 1.0).powi(2)) / (8.0 * kf);
        pow *= inv;
        let term = pow * a;
        let size = term.norm_sqr();
        if size > last {
            break;
        }
        last = size;
        plain += term;
        if k % 2 == 1 {
            alt -= term;
        } else {
            alt += term;
        }
        if size < 1e-34 {
            break;
        }
    }
    let mut bracket = alt;
    // e^{-2z} relative to the leading term; negligible once 2 Re z > 80.
    if z.im != 0.0 && z.re < 40.0 {
        let s = z.im.signum();
        let phase = Complex64::new(0.0, s) * Complex64::from_polar(1.0, s * nu * PI);
        bracket += phase * (-2.0 * z).exp() * plain;
    }
    (bracket, last.sqrt())
}

/// `log I_nu(z)` for `|z| >= SERIES_RADIUS`, `Re z >= 0`: the expansion at the
/// fractional order `nu0 = nu - floor(nu)` times the ratios
/// `I_{nu0+k} / I_{nu0+k-1}`, which follow from the backward recurrence
/// `1 / r_k = 2 (nu0 + k) / z + r_{k+1}`.
fn log_bessel_by_ratios(nu: f64, z: Complex64) -> Complex64 {
    let steps = if nu > 0.0 { nu.floor() as usize } else { 0 };
    let nu0 = nu - steps as f64;
    let (bracket, _) = asymptotic_bracket(nu0, z);
    let mut log_i = z - 0.5 * (2.0 * PI * z).ln() + bracket.ln();
    let top = steps + z.norm().ceil() as usize + 60;
    let mut r = Complex64::new(0.0, 0.0);
    for k in (1..=top).rev() {
        r = (2.0 * (nu0 + k as f64) / z + r).inv();
        if k <= steps {
            log_i += r.ln();
        }
    }
    log_i
}

/// `log R_nu(z) = log(I_nu(z) / (z/2)^nu)` given `z^2`.
pub fn log_bessel_i_reduced(nu: f64, z_sq: Complex64) -> Result<Complex64> {
    Ok(BesselSeries::new(nu)?.log_reduced(z_sq))
}

/// `I_nu(z)` on the principal branch, or `log I_nu(z)` when `log_scaled`.
pub fn bessel_i(nu: f64, z: Complex64, log_scaled: bool) -> Result<Complex64> {
    let series = BesselSeries::new(nu)?;
    if z == Complex64::new(0.0, 0.0) {
        return if nu == 0.0 {
            Ok(if log_scaled {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(1.0, 0.0)
            })
        } else if nu > 0.0 {
            Ok(if log_scaled {
                Complex64::new(f64::NEG_INFINITY, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            })
        } else {
            Err(Error::Range(format!("I_{nu}(0) is infinite")))
        };
    }
    let log_value = nu * (0.5 * z).ln() + series.log_reduced(z * z);
    if log_scaled {
        Ok(log_value)
    } else if log_value.re > 709.0 {
        Err(Error::Range(format!(
            "I_{nu}({z}) overflows; request the log-scaled value instead"
        )))
    } else {
        Ok(log_value.exp())
    }
}

/// `I_nu(x)` for real `x >= 0`, or its logarithm when `log_scaled`.
pub fn bessel_i_real(nu: f64, x: f64, log_scaled: bool) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::Domain(format!("real Bessel argument {x} must be >= 0")));
    }
    let series = BesselSeries::new(nu)?;
    let log_value = if x == 0.0 {
        if nu == 0.0 {
            0.0
        } else if nu > 0.0 {
            f64::NEG_INFINITY
        } else {
            return Err(Error::Range(format!("I_{nu}(0) is infinite")));
        }
    } else {
        nu * (0.5 * x).ln() + series.log_reduced_real(x)
    };
    if log_scaled {
        Ok(log_value)
    } else if log_value > 709.0 {
        Err(Error::Range(format!(
            "I_{nu}({x}) overflows; request the log-scaled value instead"
        )))
    } else {
        Ok(log_value.exp())
    }
}
