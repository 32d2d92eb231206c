use atomtrap::analysis::*;
use atomtrap::constants::{RB87_D2_LAMBDA, RB87_MASS};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};

const FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949;

/// Lorentzian (FWHM `l`) convolved with a unit-area Gaussian of width `s`, by direct quadrature.
fn voigt(f: f64, l: f64, s: f64) -> f64 {
    let h = 0.5 * l;
    if s == 0.0 {
        return h * h / (f * f + h * h);
    }
    let n = 4000;
    let (lo, hi) = (-8.0 * s, 8.0 * s);
    let dx = (hi - lo) / n as f64;
    let norm = 1.0 / (s * (2.0 * std::f64::consts::PI).sqrt());
    (0..=n)
        .map(|k| {
            let x = lo + k as f64 * dx;
            let w = if k == 0 || k == n { 0.5 } else { 1.0 };
            w * norm * (-0.5 * (x / s).powi(2)).exp() * h * h / ((f - x).powi(2) + h * h)
        })
        .sum::<f64>()
        * dx
}

fn profile(grid: &[f64], l: f64, s: f64) -> SpectrumProfile {
    let v: Vec<f64> = grid.iter().map(|&f| voigt(f, l, s)).collect();
    SpectrumProfile::new(grid.to_vec(), v).unwrap().normalized().unwrap()
}

#[test]
fn poisson_counts_normalize_to_one() {
    let (r1, r2, dt, t) = (2.0e4, 1.5e4, 1e-9, 600.0);
    let mean = r1 * r2 * dt * t;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let dist = Poisson::new(mean).unwrap();
    let counts: Vec<u64> = (0..4000).map(|_| dist.sample(&mut rng) as u64).collect();
    let hist = CoincidenceHistogram::new(dt, counts, r1, r2, t).unwrap();
    let g = normalize_g2(&hist).unwrap();
    let avg = g.iter().sum::<f64>() / g.len() as f64;
    let sigma = 1.0 / (mean * g.len() as f64).sqrt();
    assert!((avg - 1.0).abs() < 3.0 * sigma, "mean {avg}, σ {sigma}");
}

#[test]
fn dark_floor_is_linear_for_small_rates() {
    let s = (700.0, 900.0);
    let f1 = dark_count_floor(1.0, s).unwrap();
    let f2 = dark_count_floor(2.0, s).unwrap();
    assert!((f2 / f1 - 2.0).abs() < 5e-3);
    assert!((f1 - (1.0 / 700.0 + 1.0 / 900.0)).abs() < 1e-5);
}

#[test]
fn delta_is_identity() {
    let grid = uniform_grid(-2e6, 2e6, 401);
    let f = SpectrumProfile::lorentzian(&grid, 0.0, 0.5e6).unwrap();
    let mut d = vec![0.0; 401];
    d[200] = 1.0;
    let delta = SpectrumProfile::new(grid.clone(), d).unwrap();
    let c = convolve_profiles(&delta, &f).unwrap();
    for (x, y) in grid.iter().zip(f.amp()) {
        assert!((c.value_at(*x) - y).abs() < 1e-12);
    }
}

#[test]
fn cavity_and_laser_give_reference_width() {
    let grid = uniform_grid(-20e6, 20e6, 8001);
    let cavity = SpectrumProfile::lorentzian(&grid, 0.0, 0.45e6).unwrap();
    let laser = SpectrumProfile::gaussian(&grid, 0.0, 0.6e6).unwrap();
    let w = convolve_profiles(&cavity, &laser).unwrap().fwhm().unwrap();
    assert!((w / 0.94e6 - 1.0).abs() < 0.10, "{w}");
}

#[test]
fn fit_recovers_sigma_noiseless() {
    let sigma_laser: f64 = 0.30e6;
    let sigma_d: f64 = 107.3e3;
    let ref_grid = uniform_grid(-6e6, 6e6, 1201);
    let flu_grid = uniform_grid(-4e6, 4e6, 401);
    let reference = profile(&ref_grid, 0.45e6, sigma_laser);
    let fluor = profile(&flu_grid, 0.45e6, (sigma_laser.powi(2) + sigma_d.powi(2)).sqrt());
    let fit = fit_doppler_sigma(&reference, &fluor).unwrap();
    assert!((fit.sigma_nu / sigma_d - 1.0).abs() < 5e-3, "{}", fit.sigma_nu);
}

#[test]
fn fit_recovers_sigma_with_noise() {
    let sigma_d: f64 = 150e3;
    let ref_grid = uniform_grid(-6e6, 6e6, 1201);
    let flu_grid = uniform_grid(-4e6, 4e6, 401);
    let reference = profile(&ref_grid, 0.45e6, 0.3e6);
    let clean = profile(&flu_grid, 0.45e6, (0.09e12f64 + sigma_d * sigma_d).sqrt());
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let noise = Normal::new(0.0, 0.01).unwrap();
    let noisy: Vec<f64> = clean.amp().iter().map(|a| (a + noise.sample(&mut rng)).max(0.0)).collect();
    let fluor = SpectrumProfile::new(flu_grid, noisy).unwrap();
    let fit = fit_doppler_sigma(&reference, &fluor).unwrap();
    assert!((fit.sigma_nu / sigma_d - 1.0).abs() < 0.05, "{} ± {}", fit.sigma_nu, fit.stderr);
    assert!(fit.stderr > 0.0 && fit.stderr < 0.05 * sigma_d);
    assert_eq!(fit.residuals.len(), 401);
}

#[test]
fn quadrature_widths_for_pure_gaussians() {
    let ref_grid = uniform_grid(-6e6, 6e6, 2401);
    let flu_grid = uniform_grid(-5e6, 5e6, 1001);
    let reference = SpectrumProfile::gaussian(&ref_grid, 0.0, 0.94e6).unwrap();
    let fluor = SpectrumProfile::gaussian(&flu_grid, 0.0, 1.04e6).unwrap();
    let fit = fit_doppler_sigma(&reference, &fluor).unwrap();
    let want = (1.04f64.powi(2) - 0.94f64.powi(2)).sqrt() / FWHM_PER_SIGMA * 1e6;
    assert!((fit.sigma_nu / want - 1.0).abs() < 5e-3, "{} vs {want}", fit.sigma_nu);
    let t = kinetic_energy_from_sigma(fit.sigma_nu, RB87_D2_LAMBDA, RB87_MASS).unwrap();
    assert!(t > 0.0);
}

#[test]
fn fit_rejects_disjoint_grids() {
    let a = SpectrumProfile::gaussian(&uniform_grid(0.0, 1e6, 11), 5e5, 1e5).unwrap();
    let b = SpectrumProfile::gaussian(&uniform_grid(2e6, 3e6, 11), 2.5e6, 1e5).unwrap();
    assert!(fit_doppler_sigma(&a, &b).is_err());
}

proptest! {
    #[test]
    fn normalization_scaling(counts in prop::collection::vec(0u64..1000, 1..20), k in 1u64..5,
                             r1 in 1.0f64..1e5, r2 in 1.0f64..1e5, dt in 1e-10f64..1e-8, t in 1.0f64..1e4) {
        let base = normalize_g2(&CoincidenceHistogram::new(dt, counts.clone(), r1, r2, t).unwrap()).unwrap();
        let scaled: Vec<u64> = counts.iter().map(|c| c * k).collect();
        let lin = normalize_g2(&CoincidenceHistogram::new(dt, scaled, r1, r2, t).unwrap()).unwrap();
        let kf = k as f64;
        let inv = [
            normalize_g2(&CoincidenceHistogram::new(dt, counts.clone(), kf * r1, r2, t).unwrap()).unwrap(),
            normalize_g2(&CoincidenceHistogram::new(dt, counts.clone(), r1, kf * r2, t).unwrap()).unwrap(),
            normalize_g2(&CoincidenceHistogram::new(kf * dt, counts.clone(), r1, r2, t).unwrap()).unwrap(),
            normalize_g2(&CoincidenceHistogram::new(dt, counts.clone(), r1, r2, kf * t).unwrap()).unwrap(),
        ];
        for i in 0..base.len() {
            prop_assert!((lin[i] - kf * base[i]).abs() <= 1e-12 * lin[i].abs().max(1.0));
            for v in &inv {
                prop_assert!((v[i] * kf - base[i]).abs() <= 1e-12 * base[i].abs().max(1.0));
            }
        }
    }

    #[test]
    fn convolution_preserves_area(wa in 0.1e6f64..1e6, wb in 0.1e6f64..1e6, ca in -1e6f64..1e6, na in 101usize..400, nb in 101usize..400) {
        let a = SpectrumProfile::gaussian(&uniform_grid(-8e6, 8e6, na), ca, wa).unwrap();
        let b = SpectrumProfile::lorentzian(&uniform_grid(-5e6, 5e6, nb), 0.0, wb).unwrap();
        let raw = convolve_profiles_raw(&a, &b).unwrap();
        let min_step = |p: &SpectrumProfile| p.freq().windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        let step = min_step(&a).min(min_step(&b));
        let sum_raw: f64 = raw.amp().iter().sum::<f64>() * step;
        // areas of the inputs resampled on the common step
        let rs = |p: &SpectrumProfile| {
            let n = ((p.freq()[p.len() - 1] - p.freq()[0]) / step).floor() as usize + 1;
            (0..n).map(|k| p.value_at(p.freq()[0] + k as f64 * step)).sum::<f64>() * step
        };
        let want = rs(&a) * rs(&b);
        prop_assert!((sum_raw / want - 1.0).abs() < 1e-6, "{} vs {}", sum_raw, want);
    }

    #[test]
    fn energy_quadratic(s in 0.0f64..1e6) {
        let e1 = kinetic_energy_from_sigma(s, RB87_D2_LAMBDA, RB87_MASS).unwrap();
        let e2 = kinetic_energy_from_sigma(2.0 * s, RB87_D2_LAMBDA, RB87_MASS).unwrap();
        prop_assert!((e2 - 4.0 * e1).abs() <= 1e-12 * e2.max(1e-300));
    }
}
