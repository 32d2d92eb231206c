use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use atomtrap::entanglement::*;
use nalgebra::{Matrix2, Matrix4, Vector2};
use num_complex::Complex64 as C64;
use proptest::prelude::*;

fn random_state(v: &[f64]) -> TwoQubitState {
    let g = Matrix4::from_fn(|i, j| C64::new(v[2 * (4 * i + j)], v[2 * (4 * i + j) + 1]));
    let rho = g * g.adjoint();
    let tr = rho.trace();
    TwoQubitState::new(rho / tr).unwrap()
}

fn entries() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, 32).prop_filter("non-degenerate", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-3)
}

fn settings() -> impl Strategy<Value = [f64; 3]> {
    (0.0..PI, 0.0..2.0 * PI).prop_map(|(t, p)| [t.sin() * p.cos(), t.sin() * p.sin(), t.cos()])
}

fn global_phase_overlap(a: &Vector2<C64>, b: &Vector2<C64>) -> f64 {
    (a.adjoint() * b)[(0, 0)].norm()
}

#[test]
fn bell_basis_complete_and_orthonormal() {
    let mut sum = Matrix4::<C64>::zeros();
    for x in BellLabel::ALL {
        for y in BellLabel::ALL {
            let o = (x.vector().adjoint() * y.vector())[(0, 0)];
            let want = if x == y { 1.0 } else { 0.0 };
            assert!((o - C64::new(want, 0.0)).norm() < 1e-15);
        }
        sum += bell_state(x).matrix();
    }
    assert!((sum - Matrix4::identity()).norm() < 1e-15);
}

#[test]
fn singlet_canonical_chsh() {
    let s = chsh(
        &bell_state(BellLabel::PsiMinus),
        MeasurementSetting::Equatorial(0.0),
        MeasurementSetting::Equatorial(FRAC_PI_2),
        MeasurementSetting::Equatorial(PI / 4.0),
        MeasurementSetting::Equatorial(3.0 * PI / 4.0),
    )
    .unwrap();
    assert!((s - 2.0 * SQRT_2).abs() < 1e-12);
}

#[test]
fn clauser_horne_violated_by_singlet() {
    let (a, ap, b, bp) = (3.0 * PI / 4.0, -3.0 * PI / 4.0, 0.0, -3.0 * PI / 2.0);
    let p = singlet_joint_probability;
    let counts = ChCounts { coincidences: [p(a, b), p(a, bp), p(ap, b), p(ap, bp)], singles_a_prime: 0.5, singles_b: 0.5 };
    let r = clauser_horne(&counts).unwrap();
    assert!((r - (1.0 + SQRT_2) / 2.0).abs() < 1e-12, "{r}");
    assert!(r > 1.0);
}

#[test]
fn teleportation_identities() {
    for (a, b) in [(1.0, 0.0), (0.6, 0.8), (0.0, 1.0), (0.3, 0.2)] {
        let n = (a * a + b * b as f64).sqrt();
        let alpha = C64::new(a / n, 0.0);
        let beta = C64::from_polar(b / n, 0.7);
        let input = Vector2::new(alpha, beta);
        let branches = teleport_decompose(alpha, beta).unwrap();
        assert_eq!(branches.len(), 4);
        let total: f64 = branches.iter().map(|b| b.probability).sum();
        assert!((total - 1.0).abs() < 1e-12);
        for br in &branches {
            assert!((br.probability - 0.25).abs() < 1e-12);
            let fixed = br.correction * br.state;
            assert!((global_phase_overlap(&fixed, &input) - 1.0).abs() < 1e-12, "{:?}", br.label);
            let u: Matrix2<C64> = br.correction * br.correction.adjoint();
            assert!((u - Matrix2::identity()).norm() < 1e-12);
        }
    }
}

#[test]
fn swap_identities() {
    let coeffs = swap_decompose();
    assert_eq!(coeffs.len(), 16);
    let norm: f64 = coeffs.iter().map(|(_, _, c)| c.norm_sqr()).sum();
    assert!((norm - 1.0).abs() < 1e-12);
    for (x, y, c) in &coeffs {
        let want = if x == y { 0.5 } else { 0.0 };
        assert!((c.norm() - want).abs() < 1e-12, "{} {}", x.name(), y.name());
    }
    // reassemble Ψ⁻_AB ⊗ Ψ⁻_CD from the expansion
    let psi = BellLabel::PsiMinus.vector();
    for bits in 0..16usize {
        let (a, b, cc, d) = (bits >> 3 & 1, bits >> 2 & 1, bits >> 1 & 1, bits & 1);
        let want = psi[2 * a + b] * psi[2 * cc + d];
        let got: C64 = coeffs.iter().map(|(x, y, k)| k * x.vector()[2 * a + d] * y.vector()[2 * b + cc]).sum();
        assert!((got - want).norm() < 1e-12);
    }
}

#[test]
fn noisy_threshold_and_visibility() {
    let psi = bell_state(BellLabel::PsiMinus);
    let p = noisy_violation_threshold(&psi).unwrap();
    assert!((p - 1.0 / SQRT_2).abs() < 1e-9);
    let f = fidelity(&noisy_channel(&psi, p).unwrap(), &psi).unwrap();
    assert!((f - (3.0 * p + 1.0) / 4.0).abs() < 1e-12);
    assert!((visibility_to_fidelity(0.81, 0.70).unwrap() - 0.81625).abs() < 1e-12);
}

#[test]
fn aperture_state_closed_form() {
    let theta = na_to_theta(0.29).unwrap();
    let s = aperture_state(0.29).unwrap();
    let cm = theta.cos();
    let exact = 0.5 * ((1.0 - cm) + (1.0 - cm.powi(3)) / 3.0) / (1.0 - cm);
    assert!((s.fidelity - exact).abs() < 1e-6, "{} vs {exact}", s.fidelity);
    assert!((s.root_fidelity - s.fidelity.sqrt()).abs() < 1e-12);
    assert!(s.fidelity < 1.0 && s.fidelity > 0.97);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn lower_bound_never_exceeds_fidelity(v in entries()) {
        let rho = random_state(&v);
        let lb = fidelity_lower_bound(rho.diagonal(), rho.rotated_diagonal(FRAC_PI_2, -FRAC_PI_2)).unwrap();
        let f = fidelity(&rho, &bell_state(BellLabel::PsiPlus)).unwrap();
        prop_assert!(lb <= f + 1e-12, "bound {} > fidelity {}", lb, f);
    }

    #[test]
    fn correlations_bounded(v in entries(), a in settings(), b in settings(), ap in settings(), bp in settings()) {
        let rho = random_state(&v);
        let d = MeasurementSetting::Direction;
        let e = correlation(&rho, d(a), d(b)).unwrap();
        prop_assert!(e.abs() <= 1.0 + 1e-12);
        let s = chsh(&rho, d(a), d(ap), d(b), d(bp)).unwrap();
        prop_assert!(s <= 2.0 * SQRT_2 + 1e-12);
        prop_assert!(s <= chsh_optimal(&rho) + 1e-9);
    }

    #[test]
    fn singlet_rotation_invariant(theta in 0.0..PI, phi in 0.0..2.0 * PI, psi in 0.0..2.0 * PI) {
        let u = Matrix2::new(
            C64::from_polar((theta / 2.0).cos(), -(phi + psi) / 2.0),
            -C64::from_polar((theta / 2.0).sin(), (psi - phi) / 2.0),
            C64::from_polar((theta / 2.0).sin(), (phi - psi) / 2.0),
            C64::from_polar((theta / 2.0).cos(), (phi + psi) / 2.0),
        );
        let s = bell_state(BellLabel::PsiMinus);
        let r = s.transform(&u, &u);
        prop_assert!((r.matrix() - s.matrix()).norm() < 1e-12);
    }

    #[test]
    fn singlet_correlation_law(pa in -PI..PI, pb in -PI..PI) {
        let s = bell_state(BellLabel::PsiMinus);
        let e = correlation(&s, MeasurementSetting::Equatorial(pa), MeasurementSetting::Equatorial(pb)).unwrap();
        prop_assert!((e + (pa - pb).cos()).abs() < 1e-12);
        let pj = singlet_joint_probability(pa, pb);
        prop_assert!((pj - 0.25 * (1.0 - (pa - pb).cos())).abs() < 1e-12);
    }
}
