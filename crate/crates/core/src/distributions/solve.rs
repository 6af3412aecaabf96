//! Safeguarded Newton iteration for inverting a continuous distribution
//! function on `[0, inf)`.

use crate::error::{Error, Result};

pub(crate) struct Inversion {
    /// Absolute tolerance on `F(x) - p`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for Inversion {
    fn default() -> Self {
        Inversion {
            tol: 1e-12,
            max_iter: 200,
        }
    }
}

impl Inversion {
    /// Finds `x >= 0` with `F(x) = p`. `eval` returns `(F(x), f(x))`.
    ///
    /// The bracket `[0, hi)` is grown geometrically from `guess` until it
    /// contains the root; Newton steps that leave the bracket are replaced by
    /// bisection (geometric when the bracket spans several decades).
    pub fn solve<E>(&self, p: f64, guess: f64, mut eval: E) -> Result<f64>
    where
        E: FnMut(f64) -> (f64, f64),
    {
        let tol = self.tol.min(1e-3 * p.min(1.0 - p));
        let mut x = if guess.is_finite() && guess > 0.0 { guess } else { 1.0 };
        let mut lo = 0.0_f64;
        let mut hi = f64::INFINITY;
        for _ in 0..self.max_iter {
            let (cdf, pdf) = eval(x);
            let resid = cdf - p;
            if resid.abs() <= tol {
                return Ok(x);
            }
            if resid < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            if hi.is_finite() && (hi - lo) <= 4.0 * f64::EPSILON * hi {
                return Ok(0.5 * (lo + hi));
            }
            let newton = if pdf > 0.0 && pdf.is_finite() {
                x - resid / pdf
            } else {
                f64::NAN
            };
            x = if newton.is_finite() && newton > lo && newton < hi {
                newton
            } else if !hi.is_finite() {
                2.0 * x.max(f64::MIN_POSITIVE)
            } else if lo > 0.0 && hi / lo < 8.0 {
                0.5 * (lo + hi)
            } else {
                let floor = if lo > 0.0 { lo } else { hi * 1e-8 };
                (floor * hi).sqrt()
            };
            if x == 0.0 && lo == 0.0 {
                // The root lies below the smallest positive double.
                return Ok(0.0);
            }
            if x == 0.0 || !x.is_finite() {
                return Err(Error::Numerical(format!("inversion diverged for p={p}")));
            }
        }
        Err(Error::Numerical(format!(
            "inversion did not converge for p={p}: bracket [{lo}, {hi}]"
        )))
    }
}
