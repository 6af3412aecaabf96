//! Law of `int_u^t V ds` given both endpoints of a square-root process,
//! sampled by inverting its characteristic function.

use super::params::SquareRootProcess;
use crate::distributions::{norm_inv, BesselSeries};
use crate::error::{check_probability, Error, Result};
use num_complex::Complex64;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

/// Target truncation error of the Fourier series.
pub const TRUNCATION_EPS: f64 = 1e-6;
/// Hard cap on the number of Fourier terms.
pub const MAX_TERMS: usize = 1_000_000;
/// Width multiplier `q` in the mesh rule `h = 2 pi / (x + m1 + q sd)`.
pub const MESH_WIDTH: f64 = 5.0;
/// Standard deviations above the mean covered by the initial CDF grid.
pub const UPPER_SDS: f64 = 20.0;
/// Residual tolerance on `F(x) - p` for the quantile.
pub const QUANTILE_TOL: f64 = 1e-9;

/// `log((1 - e^{-w}) / w)` for `Re w >= 0`.
fn log_expm1_ratio(w: Complex64) -> Complex64 {
    if w.norm() < 0.5 {
        // (1 - e^{-w}) / w = sum_k (-w)^k / (k+1)!
        let mut sum = Complex64::new(1.0, 0.0);
        let mut term = Complex64::new(1.0, 0.0);
        for k in 1..18 {
            term *= -w / (k as f64 + 1.0);
            sum += term;
        }
        sum.ln()
    } else {
        (1.0 - (-w).exp()).ln() - w.ln()
    }
}

/// `w coth(w) - 1` for `Re w >= 0`.
fn wcoth_m1(w: Complex64) -> Complex64 {
    if w.norm() < 0.5 {
        let w2 = w * w;
        // Bernoulli series: 2^{2k} B_{2k} w^{2k} / (2k)!
        const C: [f64; 8] = [
            1.0 / 3.0,
            -1.0 / 45.0,
            2.0 / 945.0,
            -1.0 / 4725.0,
            2.0 / 93555.0,
            -1382.0 / 638_512_875.0,
            4.0 / 18_243_225.0,
            -3617.0 / 162_820_783_125.0,
        ];
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in C.iter().rev() {
            acc = acc * w2 + c;
        }
        acc * w2
    } else {
        let e = (-2.0 * w).exp();
        w * (1.0 + e) / (1.0 - e) - 1.0
    }
}

/// Principal square root of `re + i im` for `re > 0`, without polar form.
#[inline]
fn sqrt_right_half(re: f64, im: f64) -> Complex64 {
    let t = (0.5 * (re.hypot(im) + re)).sqrt();
    Complex64::new(t, 0.5 * im / t)
}

fn real_c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Quantities that depend only on the process and the step length.
#[derive(Debug)]
struct StepKernel {
    kappa: f64,
    sigma2: f64,
    dt: f64,
    nu: f64,
    series: BesselSeries,
    ell_kappa: f64,
    wcoth_kappa: f64,
    /// Per mesh bucket, the `a`-dependent pieces of `log Phi(h j)`.
    tables: Mutex<HashMap<i32, Arc<Vec<MeshTerm>>>>,
}

/// Pieces of `log Phi(h j)` that do not depend on the endpoints:
/// `log Phi = shape + c * coth_part - log R(0) + log R(z_sq_coeff * bessel_arg)`.
#[derive(Debug, Clone, Copy)]
struct MeshTerm {
    shape: Complex64,
    coth_part: Complex64,
    bessel_arg: Complex64,
}

/// Mesh buckets per octave; the rule's mesh is rounded down to `2^(k/8)`.
const BUCKETS_PER_OCTAVE: f64 = 8.0;
/// Longest cached table; beyond this, terms are computed per law.
const TABLE_CAP: usize = 1 << 16;
const KERNEL_CACHE_CAP: usize = 1024;

impl StepKernel {
    fn shared(process: &SquareRootProcess, dt: f64) -> Result<Arc<Self>> {
        type Key = (u64, u64, u64, u64);
        static CACHE: OnceLock<Mutex<HashMap<Key, Arc<StepKernel>>>> = OnceLock::new();
        let key = (
            process.kappa.to_bits(),
            process.theta.to_bits(),
            process.sigma.to_bits(),
            dt.to_bits(),
        );
        let cache = CACHE.get_or_init(Default::default);
        let mut map = cache.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(k) = map.get(&key) {
            return Ok(Arc::clone(k));
        }
        if map.len() >= KERNEL_CACHE_CAP {
            map.clear();
        }
        let kernel = Arc::new(Self::new(process, dt)?);
        map.insert(key, Arc::clone(&kernel));
        Ok(kernel)
    }

    fn new(process: &SquareRootProcess, dt: f64) -> Result<Self> {
        let SquareRootProcess { kappa, sigma, .. } = *process;
        let kd = kappa * dt;
        Ok(Self {
            kappa,
            sigma2: sigma * sigma,
            dt,
            nu: 0.5 * process.dimension() - 1.0,
            series: BesselSeries::new(0.5 * process.dimension() - 1.0)?,
            ell_kappa: -0.5 * kd - log_expm1_ratio(real_c(kd)).re,
            wcoth_kappa: wcoth_m1(real_c(0.5 * kd)).re,
            tables: Mutex::new(HashMap::new()),
        })
    }

    fn term(&self, a: f64) -> MeshTerm {
        let gamma = sqrt_right_half(self.kappa * self.kappa, -2.0 * self.sigma2 * a);
        let w = gamma * self.dt;
        let ell = -0.5 * w - log_expm1_ratio(w);
        MeshTerm {
            shape: (1.0 + self.nu) * (ell - self.ell_kappa),
            coth_part: self.wcoth_kappa - wcoth_m1(0.5 * w),
            bessel_arg: (2.0 * ell).exp(),
        }
    }

    /// Terms `j = 1..=len` (at least) for mesh `2^(bucket / 8)`.
    fn table(&self, bucket: i32, len: usize) -> Arc<Vec<MeshTerm>> {
        let mut tables = self.tables.lock().unwrap_or_else(|e| e.into_inner());
        let entry = tables.entry(bucket).or_insert_with(|| Arc::new(Vec::new()));
        if entry.len() < len {
            let h = bucket_mesh(bucket);
            let target = len.max(2 * entry.len()).min(TABLE_CAP);
            let mut terms = Vec::with_capacity(target);
            terms.extend_from_slice(entry);
            for j in terms.len() + 1..=target {
                terms.push(self.term(h * j as f64));
            }
            *entry = Arc::new(terms);
        }
        Arc::clone(entry)
    }
}

fn bucket_mesh(bucket: i32) -> f64 {
    (bucket as f64 / BUCKETS_PER_OCTAVE).exp2()
}

/// Conditional law of `int_u^{u+dt} V ds` given `V_u = x`, `V_{u+dt} = y`.
///
/// The Fourier mesh follows `h = 2 pi / (x + m1 + 5 sd)` evaluated at the
/// top of the search range, rounded down to a power of `2^(1/8)` so that the
/// endpoint-free parts of the characteristic function can be shared between
/// laws with the same step length.
#[derive(Debug, Clone)]
pub struct IntegratedVarianceLaw {
    kernel: Arc<StepKernel>,
    x: f64,
    y: f64,
    /// `16 x y / (sigma^4 dt^2)`.
    z_sq_coeff: f64,
    /// `2 (x + y) / (sigma^2 dt)`.
    c_coeff: f64,
    /// `log R_nu` at `a = 0`; does not depend on `a`.
    log_r0: f64,
    mean: f64,
    variance: f64,
    grid: FourierGrid,
}

/// Mesh and cached `Re Phi(h j)`, `j = 1..N`.
#[derive(Debug, Clone)]
struct FourierGrid {
    h: f64,
    upper: f64,
    re_phi: Vec<f64>,
}

impl IntegratedVarianceLaw {
    pub fn new(process: &SquareRootProcess, x: f64, y: f64, dt: f64) -> Result<Self> {
        process.validate()?;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Domain(format!("time step {dt} must be positive")));
        }
        if !(x >= 0.0 && y >= 0.0 && x.is_finite() && y.is_finite()) {
            return Err(Error::Domain(format!("endpoints ({x}, {y}) must be nonnegative")));
        }
        let kernel = StepKernel::shared(process, dt)?;
        let sigma2 = kernel.sigma2;
        let z_sq_coeff = 16.0 * x * y / (sigma2 * sigma2 * dt * dt);
        let log_r0 = if z_sq_coeff > 0.0 {
            kernel
                .series
                .log_reduced_real((z_sq_coeff * (2.0 * kernel.ell_kappa).exp()).sqrt())
        } else {
            0.0
        };
        let mut law = Self {
            kernel,
            x,
            y,
            z_sq_coeff,
            c_coeff: 2.0 * (x + y) / (sigma2 * dt),
            log_r0,
            mean: 0.0,
            variance: 0.0,
            grid: FourierGrid {
                h: 0.0,
                upper: 0.0,
                re_phi: Vec::new(),
            },
        };
        let (mean, variance) = law.compute_moments()?;
        law.mean = mean;
        law.variance = variance;
        law.grid = law.build_grid(UPPER_SDS)?;
        Ok(law)
    }

    pub fn endpoints(&self) -> (f64, f64) {
        (self.x, self.y)
    }

    pub fn dt(&self) -> f64 {
        self.kernel.dt
    }

    /// `log Phi(a)` on the branch continuous from `a = 0`.
    pub fn log_char_fn(&self, a: f64) -> Complex64 {
        if a == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let t = self.kernel.term(a);
        let mut psi = t.shape + self.c_coeff * t.coth_part;
        if self.z_sq_coeff > 0.0 {
            psi += self.kernel.series.log_reduced(self.z_sq_coeff * t.bessel_arg) - self.log_r0;
        }
        psi
    }

    /// `Phi(a) = E[exp(i a int V ds) | endpoints]`.
    pub fn char_fn(&self, a: f64) -> Complex64 {
        if a == 0.0 {
            return Complex64::new(1.0, 0.0);
        }
        self.char_fn_from(&self.kernel.term(a))
    }

    #[inline]
    fn char_fn_from(&self, t: &MeshTerm) -> Complex64 {
        let log_part = t.shape + self.c_coeff * t.coth_part;
        if self.z_sq_coeff > 0.0 {
            let (exponent, factor) = self.kernel.series.reduced_parts(self.z_sq_coeff * t.bessel_arg);
            (log_part - self.log_r0 + exponent).exp() * factor
        } else {
            log_part.exp()
        }
    }

    /// First moment and variance from fourth-order central differences of
    /// `log Phi`, Richardson-extrapolated over two step sizes.
    fn compute_moments(&self) -> Result<(f64, f64)> {
        // Mean of the most likely path plus the 0-to-0 bridge contribution.
        let (x, y, dt) = (self.x, self.y, self.dt());
        let rough = dt * (x + (x * y).sqrt() + y) / 3.0 + (1.0 + self.kernel.nu) * self.kernel.sigma2 * dt * dt / 12.0;
        let mut step = 0.1 / rough.max(f64::MIN_POSITIVE);
        for _ in 0..4 {
            let (m, v) = self.moments_with_step(step);
            if m > 0.0 && v > 0.0 && m.is_finite() && v.is_finite() {
                return Ok((m, v));
            }
            step *= 4.0;
        }
        Err(Error::Numerical(format!(
            "nonpositive integrated-variance moments for endpoints ({x}, {y}), dt {dt}"
        )))
    }

    /// Raw (mean, variance) estimates from `Im/Re log Phi` at `s/2, s, 2s`.
    fn moments_with_step(&self, s: f64) -> (f64, f64) {
        let p_half = self.log_char_fn(0.5 * s);
        let p1 = self.log_char_fn(s);
        let p2 = self.log_char_fn(2.0 * s);
        let d1 = |a: Complex64, b: Complex64, h: f64| (8.0 * a.im - b.im) / (6.0 * h);
        let d2 = |a: Complex64, b: Complex64, h: f64| (2.0 * b.re - 32.0 * a.re) / (12.0 * h * h);
        let mean = (16.0 * d1(p_half, p1, 0.5 * s) - d1(p1, p2, s)) / 15.0;
        let var = (16.0 * d2(p_half, p1, 0.5 * s) - d2(p1, p2, s)) / 15.0;
        (mean, var)
    }

    /// `(E[int V], Var[int V])`.
    pub fn moments(&self) -> (f64, f64) {
        (self.mean, self.variance)
    }

    /// `(m1, m2)`: first and second raw moments.
    pub fn raw_moments(&self) -> (f64, f64) {
        (self.mean, self.variance + self.mean * self.mean)
    }

    fn build_grid(&self, sds: f64) -> Result<FourierGrid> {
        let sd = self.variance.sqrt();
        let upper = self.mean + sds * sd;
        let h_rule = 2.0 * PI / (upper + self.mean.abs() + MESH_WIDTH * sd);
        let bucket = (BUCKETS_PER_OCTAVE * h_rule.log2()).floor();
        if !bucket.is_finite() || bucket.abs() > 8000.0 {
            return Err(Error::Numerical(format!("degenerate Fourier mesh {h_rule}")));
        }
        let bucket = bucket as i32;
        let h = bucket_mesh(bucket);
        let threshold = PI * TRUNCATION_EPS / 2.0;
        let mut re_phi = Vec::new();
        let mut table = self.kernel.table(bucket, 128);
        for j in 1..=MAX_TERMS {
            let phi = if j <= table.len() {
                self.char_fn_from(&table[j - 1])
            } else if j <= TABLE_CAP {
                table = self.kernel.table(bucket, j);
                self.char_fn_from(&table[j - 1])
            } else {
                self.char_fn(h * j as f64)
            };
            re_phi.push(phi.re);
            if phi.norm_sqr() < (threshold * j as f64).powi(2) {
                return Ok(FourierGrid { h, upper, re_phi });
            }
        }
        Err(Error::Numerical(format!(
            "characteristic function inversion needs more than {MAX_TERMS} terms \
             (endpoints ({}, {}), dt {}, h {h})",
            self.x,
            self.y,
            self.dt()
        )))
    }

    /// Mesh `h` of the trapezoidal rule.
    pub fn mesh(&self) -> f64 {
        self.grid.h
    }

    /// Number of Fourier terms `N`.
    pub fn terms(&self) -> usize {
        self.grid.re_phi.len()
    }

    /// Truncated Fourier-series CDF, clamped to `[0, 1]`.
    pub fn cdf(&self, x: f64) -> f64 {
        cdf_pdf(&self.grid, x).0.clamp(0.0, 1.0)
    }

    /// Unclamped series value of the CDF and of its derivative.
    pub fn cdf_pdf(&self, x: f64) -> (f64, f64) {
        cdf_pdf(&self.grid, x)
    }

    /// Quantile of the integrated variance.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        check_probability(p)?;
        let mut grid_store;
        let mut grid = &self.grid;
        let mut sds = UPPER_SDS;
        let mut top = cdf_pdf(grid, grid.upper).0;
        while top < p && sds < 8.0 * UPPER_SDS {
            sds *= 2.0;
            grid_store = self.build_grid(sds)?;
            grid = &grid_store;
            top = cdf_pdf(grid, grid.upper).0;
            if top >= p {
                return solve(grid, p, self.initial_guess(p));
            }
        }
        if top < p {
            if p - top <= 2.0 * TRUNCATION_EPS {
                return Ok(grid.upper);
            }
            return Err(Error::Numerical(format!(
                "no bracket for integrated-variance quantile p={p}: F({}) = {top}",
                grid.upper
            )));
        }
        solve(grid, p, self.initial_guess(p))
    }

    /// Lognormal approximation with matching mean and variance.
    fn initial_guess(&self, p: f64) -> f64 {
        let s2 = (1.0 + self.variance / (self.mean * self.mean)).ln();
        let mu = self.mean.ln() - 0.5 * s2;
        (mu + s2.sqrt() * norm_inv(p)).exp()
    }
}

fn cdf_pdf(grid: &FourierGrid, x: f64) -> (f64, f64) {
    let hx = grid.h * x;
    let step = Complex64::new(hx.cos(), hx.sin());
    let mut rot = step;
    let (mut s, mut c) = (0.0, 0.0);
    for (k, &re) in grid.re_phi.iter().enumerate() {
        let j = (k + 1) as f64;
        if k % 256 == 255 {
            let a = hx * j;
            rot = Complex64::new(a.cos(), a.sin());
        }
        s += rot.im / j * re;
        c += rot.re * re;
        rot *= step;
    }
    let cdf = hx / PI + 2.0 / PI * s;
    let pdf = grid.h / PI * (1.0 + 2.0 * c);
    (cdf, pdf)
}

/// Safeguarded Newton iteration on `[0, upper]`, where `F(0) = 0 < p <= F(upper)`.
fn solve(grid: &FourierGrid, p: f64, guess: f64) -> Result<f64> {
    let (mut lo, mut hi) = (0.0, grid.upper);
    let mut x = if guess > 0.0 && guess < hi { guess } else { 0.5 * hi };
    for _ in 0..200 {
        let (f, d) = cdf_pdf(grid, x);
        let resid = f - p;
        if resid.abs() <= QUANTILE_TOL {
            return Ok(x);
        }
        if resid < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        if hi - lo <= 1e-15 * hi {
            return Ok(x);
        }
        let newton = x - resid / d;
        x = if d > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    Err(Error::Numerical(format!(
        "integrated-variance quantile did not converge for p={p}"
    )))
}
