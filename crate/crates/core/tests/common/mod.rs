#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use svqmc::qmc::clamp_unit;

/// Independent uniform points in `(0, 1)^d`.
pub struct Uniforms {
    rng: ChaCha8Rng,
}

impl Uniforms {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn point(&mut self, d: usize) -> Vec<f64> {
        (0..d).map(|_| clamp_unit(self.rng.gen::<f64>())).collect()
    }

    pub fn next(&mut self) -> f64 {
        clamp_unit(self.rng.gen::<f64>())
    }
}

/// Asymptotic p-value of the Kolmogorov distribution at `lambda`.
pub fn kolmogorov_p(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..200 {
        let k = k as f64;
        let term = 2.0 * (-1f64).powf(k - 1.0) * (-2.0 * k * k * lambda * lambda).exp();
        sum += term;
        if term.abs() < 1e-16 {
            break;
        }
    }
    sum.clamp(0.0, 1.0)
}

/// Two-sample Kolmogorov-Smirnov statistic and asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(|x, y| x.partial_cmp(y).unwrap());
    b.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    let en = (n * m / (n + m)).sqrt();
    (d, kolmogorov_p((en + 0.12 + 0.11 / en) * d))
}

/// One-sample KS against a continuous CDF.
pub fn ks_one_sample(sample: &[f64], cdf: impl Fn(f64) -> f64) -> (f64, f64) {
    let mut s = sample.to_vec();
    s.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let n = s.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in s.iter().enumerate() {
        let f = cdf(x);
        d = d.max((f - i as f64 / n).abs()).max(((i + 1) as f64 / n - f).abs());
    }
    let en = n.sqrt();
    (d, kolmogorov_p((en + 0.12 + 0.11 / en) * d))
}

pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

pub fn sample_variance(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
}

/// Pearson chi-square statistic over cells with expected count >= 5, and
/// the number of such cells.
pub fn chi_square(observed: &[f64], expected: &[f64]) -> (f64, usize) {
    let mut stat = 0.0;
    let mut cells = 0;
    let (mut obs_rest, mut exp_rest) = (0.0, 0.0);
    for (o, e) in observed.iter().zip(expected) {
        if *e >= 5.0 {
            stat += (o - e).powi(2) / e;
            cells += 1;
        } else {
            obs_rest += o;
            exp_rest += e;
        }
    }
    if exp_rest >= 5.0 {
        stat += (obs_rest - exp_rest).powi(2) / exp_rest;
        cells += 1;
    }
    (stat, cells)
}

/// Upper 1% point of the chi-square law with `k` degrees of freedom
/// (Wilson-Hilferty).
pub fn chi_square_critical_1pct(k: usize) -> f64 {
    let k = k as f64;
    let z = 2.326_347_874_040_840_8;
    let a = 2.0 / (9.0 * k);
    k * (1.0 - a + z * a.sqrt()).powi(3)
}

use rand_distr::{Distribution, Gamma, Poisson};
use svqmc::heston::SquareRootProcess;
use svqmc::paths::{uniform_times, Scheme, VarianceBridge};

/// Exact square-root transition drawn as a Poisson mixture of chi-squares.
pub fn transition_oracle(process: &SquareRootProcess, v: f64, dt: f64, rng: &mut Uniforms) -> f64 {
    let scale = process.transition_scale(dt);
    let lambda = v * (-process.kappa * dt).exp() / scale;
    let n = if lambda > 0.0 {
        Poisson::new(0.5 * lambda).unwrap().sample(&mut rng.rng)
    } else {
        0.0
    };
    let dof = process.dimension() + 2.0 * n;
    scale * Gamma::new(0.5 * dof, 2.0).unwrap().sample(&mut rng.rng)
}

/// Integrated variance over `[0, dt]` given both endpoints: the squared
/// Bessel bridge is sampled at `substeps` dates and integrated by the
/// trapezoid rule.
pub fn pinned_bridge_oracle(
    process: &SquareRootProcess,
    (x, y): (f64, f64),
    dt: f64,
    substeps: usize,
    paths: usize,
    seed: u64,
) -> Vec<f64> {
    let bridge = VarianceBridge::new(*process, x, uniform_times(substeps, dt), Scheme::Bridge).unwrap();
    let mut rng = Uniforms::new(seed);
    let h = dt / substeps as f64;
    (0..paths)
        .map(|_| {
            let (a, b, c) = (rng.point(substeps), rng.point(substeps), rng.point(substeps));
            let v = bridge.sample_pinned(y, &a, &b, &c).unwrap();
            let mut prev = x;
            let mut acc = 0.0;
            for &vk in &v {
                acc += 0.5 * h * (prev + vk);
                prev = vk;
            }
            acc
        })
        .collect()
}
