use super::schedule::BridgeSchedule;

/// Conditional log-price moments given the variance path:
/// `log S_{t_k} ~ N(mu_k, var_k)` with
/// `mu_k = log S_0 + drift t_k - (1/2) sum iv + rho sum z` and
/// `var_k = (1 - rho^2) sum iv`. Index 0 is the start date.
#[derive(Debug, Clone, PartialEq)]
pub struct LogPriceBridgeCoeffs {
    pub mu: Vec<f64>,
    pub var: Vec<f64>,
}

impl LogPriceBridgeCoeffs {
    pub fn new(s0: f64, drift: f64, rho: f64, times: &[f64], iv: &[f64], z: &[f64]) -> Self {
        let h = times.len();
        let mut mu = Vec::with_capacity(h + 1);
        let mut var = Vec::with_capacity(h + 1);
        mu.push(s0.ln());
        var.push(0.0);
        let (mut sum_iv, mut sum_z) = (0.0, 0.0);
        for k in 0..h {
            sum_iv += iv[k];
            sum_z += z[k];
            mu.push(s0.ln() + drift * times[k] - 0.5 * sum_iv + rho * sum_z);
            var.push((1.0 - rho * rho) * sum_iv);
        }
        Self { mu, var }
    }

    pub fn dates(&self) -> usize {
        self.mu.len() - 1
    }
}

/// Prices at dates `1..=h` following `schedule`, with `normals[p]` used at
/// visiting position `p`. Given the variance path the log-price is a
/// Brownian motion with drift in the clock `var`, so bridge steps are
/// Gaussian with variance `b_l b_r / (b_l + b_r)`.
pub fn stock_bridge_path(coeffs: &LogPriceBridgeCoeffs, schedule: &BridgeSchedule, normals: &[f64]) -> Vec<f64> {
    let (mu, var) = (&coeffs.mu, &coeffs.var);
    let mut logs = vec![0.0; mu.len()];
    logs[0] = mu[0];
    for p in 0..schedule.len() {
        let k = schedule.date(p);
        let (l, r) = schedule.neighbours(p);
        let b_l = (var[k] - var[l]).max(0.0);
        let (mean, b) = match r {
            None => (logs[l] + mu[k] - mu[l], b_l),
            Some(r) => {
                let total = var[r] - var[l];
                let frac = if total > 0.0 { (b_l / total).min(1.0) } else { 0.0 };
                let mean = logs[l] + mu[k] - mu[l] + frac * (logs[r] - logs[l] - (mu[r] - mu[l]));
                (mean, b_l * (1.0 - frac))
            }
        };
        logs[k] = mean + b.sqrt() * normals[p];
    }
    logs[1..].iter().map(|x| x.exp()).collect()
}
