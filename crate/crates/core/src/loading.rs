//! Single-atom loading: the mean-number rate equation and the birth-death Markov model.

use nalgebra::{DMatrix, DVector};

use crate::error::{ensure_nonneg, ensure_positive, invalid, Error, Result};
use crate::ode::{dopri5, OdeOptions};

/// β in cm³/s, the geometric middle of 3e-10 .. 1e-9.
pub const BETA_DEFAULT_CM3: f64 = 5e-10;
pub const GAMMA_DEFAULT: f64 = 0.2;

/// Loading rate, one-body loss, two-body loss coefficient and trap volume.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoadingParams {
    /// Loading rate, atoms/s.
    pub r: f64,
    /// One-body loss rate, 1/s.
    pub gamma: f64,
    /// Two-body loss coefficient, m³/s.
    pub beta: f64,
    /// Trap volume, m³.
    pub volume: f64,
    pub n_max: usize,
}

impl LoadingParams {
    pub fn new(r: f64, gamma: f64, beta: f64, volume: f64, n_max: usize) -> Result<Self> {
        let p = Self { r, gamma, beta, volume, n_max };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_nonneg("R", self.r)?;
        ensure_nonneg("gamma", self.gamma)?;
        ensure_nonneg("beta", self.beta)?;
        ensure_positive("volume", self.volume)?;
        if self.n_max < 1 {
            return Err(invalid("n_max", "must be at least 1"));
        }
        Ok(())
    }

    /// β' = β/V in 1/s.
    pub fn beta_prime(&self) -> f64 {
        self.beta / self.volume
    }

    fn out_rate(&self, n: usize) -> f64 {
        let nf = n as f64;
        let load = if n < self.n_max { self.r } else { 0.0 };
        load + nf * self.gamma + nf * (nf - 1.0) * self.beta_prime() / 2.0
    }
}

/// Probabilities p_0 ..= p_{N_max}.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomNumberDist {
    pub p: Vec<f64>,
}

impl AtomNumberDist {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        let s: f64 = p.iter().sum();
        if p.is_empty() || (s - 1.0).abs() > 1e-10 || p.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
            return Err(invalid("p", "probabilities must lie in [0, 1] and sum to 1"));
        }
        Ok(Self { p })
    }

    /// Σ_{N >= n} p_N.
    pub fn tail(&self, n: usize) -> f64 {
        self.p.iter().skip(n).sum()
    }
}

/// Mean atom number along `t_grid` for dN/dt = R − γN − β'N(N−1).
pub fn mean_number_ode(params: &LoadingParams, n0: f64, t_grid: &[f64]) -> Result<Vec<f64>> {
    params.validate()?;
    ensure_nonneg("N0", n0)?;
    let (r, g, bp) = (params.r, params.gamma, params.beta_prime());
    let out = dopri5(
        |_, y, d| d[0] = r - g * y[0] - bp * y[0] * (y[0] - 1.0),
        0.0,
        &[n0],
        t_grid,
        &OdeOptions::default(),
    )?;
    Ok(out.into_iter().map(|y| y[0]).collect())
}

/// Steady state of the mean-number equation.
pub fn mean_number_steady(params: &LoadingParams) -> Result<f64> {
    params.validate()?;
    let (r, g, bp) = (params.r, params.gamma, params.beta_prime());
    if bp == 0.0 {
        if g == 0.0 {
            return Err(Error::Numerical("no loss channel: mean number grows without bound".into()));
        }
        return Ok(r / g);
    }
    // β'N² + (γ − β')N − R = 0, positive root.
    let b = g - bp;
    Ok((-b + (b * b + 4.0 * bp * r).sqrt()) / (2.0 * bp))
}

/// Column-stochastic single-step transfer matrix; column N holds the fate of state N.
pub fn transfer_matrix(params: &LoadingParams, dt: f64) -> Result<DMatrix<f64>> {
    params.validate()?;
    ensure_positive("dt", dt)?;
    let n = params.n_max;
    let bp = params.beta_prime();
    let mut m = DMatrix::zeros(n + 1, n + 1);
    for col in 0..=n {
        let diag = 1.0 - params.out_rate(col) * dt;
        if diag < 0.0 {
            return Err(invalid("dt", format!("dt = {dt:e} s makes the stay probability of N = {col} negative")));
        }
        m[(col, col)] = diag;
        if col < n {
            m[(col + 1, col)] = params.r * dt;
        }
        if col >= 1 {
            m[(col - 1, col)] = col as f64 * params.gamma * dt;
        }
        if col >= 2 {
            let c = col as f64;
            m[(col - 2, col)] = c * (c - 1.0) / 2.0 * bp * dt;
        }
    }
    Ok(m)
}

/// Rate matrix Q with dp/dt = Q p.
pub fn generator(params: &LoadingParams) -> Result<DMatrix<f64>> {
    params.validate()?;
    let n = params.n_max;
    let bp = params.beta_prime();
    let mut q = DMatrix::zeros(n + 1, n + 1);
    for col in 0..=n {
        q[(col, col)] = -params.out_rate(col);
        if col < n {
            q[(col + 1, col)] = params.r;
        }
        if col >= 1 {
            q[(col - 1, col)] = col as f64 * params.gamma;
        }
        if col >= 2 {
            let c = col as f64;
            q[(col - 2, col)] = c * (c - 1.0) / 2.0 * bp;
        }
    }
    Ok(q)
}

/// Stationary distribution solving (M − E) p = 0 with Σp = 1.
pub fn stationary_distribution(params: &LoadingParams) -> Result<AtomNumberDist> {
    params.validate()?;
    if params.r == 0.0 && params.gamma == 0.0 && params.beta_prime() == 0.0 {
        return Err(invalid("rates", "all rates are zero; every distribution is stationary"));
    }
    let n = params.n_max + 1;
    let mut a = generator(params)?;
    // The last balance equation is redundant; replace it with normalization.
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut b = DVector::zeros(n);
    b[n - 1] = 1.0;
    let x = a.lu().solve(&b).ok_or_else(|| Error::Numerical("stationary distribution is not unique".into()))?;
    let p: Vec<f64> = x.iter().map(|&v| v.clamp(0.0, 1.0)).collect();
    let s: f64 = p.iter().sum();
    AtomNumberDist::new(p.into_iter().map(|v| v / s).collect())
}

/// Mean atom number and single-atom probability.
pub fn mean_and_p_single(dist: &AtomNumberDist) -> (f64, f64) {
    let mean = dist.p.iter().enumerate().map(|(n, p)| n as f64 * p).sum();
    (mean, dist.p.get(1).copied().unwrap_or(0.0))
}

/// Poisson probabilities for N = 0 ..= n_max.
pub fn poisson(mean: f64, n_max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut term = (-mean).exp();
    for n in 0..=n_max {
        if n > 0 {
            term *= mean / n as f64;
        }
        out.push(term);
    }
    out
}

/// Total-variation distance ½Σ|p − q| on the common support, with the missing mass of the shorter
/// vector counted in full.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    let n = p.len().max(q.len());
    let mut s = 0.0;
    for i in 0..n {
        s += (p.get(i).copied().unwrap_or(0.0) - q.get(i).copied().unwrap_or(0.0)).abs();
    }
    let missing = (1.0 - p.iter().sum::<f64>()).abs() + (1.0 - q.iter().sum::<f64>()).abs();
    0.5 * (s + missing)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(r: f64, volume: f64, n_max: usize) -> LoadingParams {
        LoadingParams::new(r, 0.2, 5e-16, volume, n_max).unwrap()
    }

    #[test]
    fn columns_sum_to_one() {
        let p = params(1.0, 6e-17, 8);
        let m = transfer_matrix(&p, 1e-3).unwrap();
        for j in 0..m.ncols() {
            assert!((m.column(j).sum() - 1.0).abs() < 1e-12);
        }
        assert_eq!(m[(0, 1)], 0.2e-3);
        assert!(transfer_matrix(&p, 1.0).is_err());
    }

    #[test]
    fn printed_pattern() {
        let p = LoadingParams::new(0.01, 0.01, 1e-3, 1.0, 5).unwrap();
        let m = transfer_matrix(&p, 1.0).unwrap();
        let bp = p.beta_prime();
        assert_eq!(m[(0, 2)], bp);
        assert_eq!(m[(1, 3)], 3.0 * bp);
        assert_eq!(m[(2, 4)], 6.0 * bp);
        assert_eq!(m[(3, 5)], 10.0 * bp);
        assert_eq!(m[(2, 3)], 3.0 * 0.01);
        assert_eq!(m[(5, 4)], 0.01);
    }

    #[test]
    fn empty_trap_without_loading() {
        let d = stationary_distribution(&params(0.0, 6e-17, 5)).unwrap();
        assert!((d.p[0] - 1.0).abs() < 1e-14);
        assert!(stationary_distribution(&LoadingParams::new(0.0, 0.0, 0.0, 1.0, 3).unwrap()).is_err());
    }

    #[test]
    fn stationary_is_fixed_point_of_transfer() {
        let p = params(1.0, 6e-17, 10);
        let d = stationary_distribution(&p).unwrap();
        for dt in [1e-4, 1e-3] {
            let m = transfer_matrix(&p, dt).unwrap();
            let v = DVector::from_vec(d.p.clone());
            assert!((&m * &v - &v).amax() < 1e-14);
        }
    }

    #[test]
    fn ode_limits() {
        let p = LoadingParams::new(1.0, 0.2, 0.0, 1.0, 5).unwrap();
        let n = mean_number_ode(&p, 0.0, &[200.0]).unwrap();
        assert!((n[0] - 5.0).abs() < 1e-6);
        let ts: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let free = LoadingParams::new(0.0, 0.2, 0.0, 6e-17, 5).unwrap();
        for (t, n) in ts.iter().zip(mean_number_ode(&free, 1.0, &ts).unwrap()) {
            assert!((n - (-0.2 * t).exp()).abs() < 1e-9);
        }
        // Below N = 1 the mean-field pair term −β'N(N−1) is a gain, so the decay is slower.
        let q = LoadingParams::new(0.0, 0.2, 5e-16, 6e-17, 5).unwrap();
        for (t, n) in ts.iter().zip(mean_number_ode(&q, 1.0, &ts).unwrap()) {
            assert!(n >= (-0.2 * t).exp() - 1e-9 && n <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn mean_and_single() {
        let e = AtomNumberDist::new(vec![1.0, 0.0, 0.0]).unwrap();
        assert_eq!(mean_and_p_single(&e), (0.0, 0.0));
        let one = AtomNumberDist::new(vec![0.0, 1.0, 0.0]).unwrap();
        assert_eq!(mean_and_p_single(&one), (1.0, 1.0));
    }

    #[test]
    fn poisson_sums_to_one() {
        assert!((poisson(5.0, 60).iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(total_variation(&[1.0, 0.0], &[1.0]), 0.0);
    }
}
