//! Library values against independent references: special functions,
//! brute-force suprema, finite differences and closed-form transforms.

use std::f64::consts::PI;

use num_complex::Complex64;
use statrs::function::gamma::ln_gamma;

use ultranorm::hermite::{shipped_family, GaussianTerm, HermiteGaussian};
use ultranorm::numeric::{logspace, simpson};
use ultranorm::sequence::WeightSequence;
use ultranorm::stft::{stft_direct, stft_grid, PhaseSpaceGrid};

fn ln_factorial(p: usize) -> f64 {
    ln_gamma(p as f64 + 1.0)
}

#[test]
fn gevrey_logs_match_ln_gamma() {
    for s in [0.5, 1.0, 2.0, 1.7] {
        let seq = WeightSequence::gevrey(s).unwrap();
        for p in (0..=600).step_by(7) {
            let want = s * ln_factorial(p);
            let got = seq.log_value(p).unwrap();
            assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0), "s={s} p={p}: {got} vs {want}");
        }
    }
}

/// `sup_p (p log t - s log p!)` by scanning far past the maximizer
/// `p ≈ t^{1/s}`.
fn brute_assoc(s: f64, t: f64) -> f64 {
    let end = (3.0 * t.powf(1.0 / s)) as usize + 50;
    (0..end)
        .map(|p| p as f64 * t.ln() - s * ln_factorial(p))
        .fold(f64::NEG_INFINITY, f64::max)
        .max(0.0)
}

#[test]
fn associated_function_matches_independent_sup() {
    for s in [0.5, 1.0, 2.0] {
        let seq = WeightSequence::gevrey(s).unwrap();
        for t in logspace(-2.0, 3.0, 97) {
            let want = brute_assoc(s, t);
            let got = seq.associated_function(t).unwrap();
            assert!(
                (got - want).abs() <= 1e-11 * want.abs().max(1.0),
                "s={s} t={t}: {got} vs {want}"
            );
        }
    }
}

#[test]
fn factorial_associated_function_known_values() {
    let seq = WeightSequence::gevrey(1.0).unwrap();
    assert_eq!(seq.associated_function(0.5).unwrap(), 0.0);
    assert_eq!(seq.associated_function(1.0).unwrap(), 0.0);
    assert!((seq.associated_function(2.0).unwrap() - 2f64.ln()).abs() < 1e-15);
    // t = 3: max(log 3, log 9/2, log 27/6) = log 4.5
    assert!((seq.associated_function(3.0).unwrap() - 4.5f64.ln()).abs() < 1e-14);
}

/// Richardson-extrapolated central difference of `g` at `x`.
fn richardson(g: impl Fn(f64) -> Complex64, x: f64, h: f64) -> Complex64 {
    let d = |h: f64| (g(x + h) - g(x - h)) / (2.0 * h);
    (d(h / 2.0) * 4.0 - d(h)) / 3.0
}

#[test]
fn derivatives_match_finite_differences() {
    for (name, f) in shipped_family(1) {
        for &x in &[-1.3, -0.2, 0.0, 0.7, 1.9] {
            for k in 0..6 {
                let lower = f.derivative(&[k]).unwrap();
                let upper = f.derivative(&[k + 1]).unwrap();
                let fd = richardson(|u| lower.eval(&[u]).unwrap(), x, 1e-3);
                let exact = upper.eval(&[x]).unwrap();
                let scale = exact.norm().max(1.0) * (k as f64 + 1.0).powi(2);
                assert!(
                    (fd - exact).norm() <= 1e-7 * scale,
                    "{name} k={k} x={x}: fd {fd} exact {exact}"
                );
            }
        }
    }
}

#[test]
fn mixed_derivatives_in_two_dimensions() {
    let (_, f) = shipped_family(2).into_iter().find(|(n, _)| n == "mod_diag").unwrap();
    let x = [0.3, -0.4];
    for a in 0..3 {
        for b in 0..3 {
            let base = f.derivative(&[a, b]).unwrap();
            let next = f.derivative(&[a + 1, b]).unwrap();
            let fd = richardson(|u| base.eval(&[u, x[1]]).unwrap(), x[0], 1e-3);
            let exact = next.eval(&x).unwrap();
            assert!((fd - exact).norm() <= 1e-7 * exact.norm().max(1.0) * 9.0, "a={a} b={b}");
        }
    }
}

/// `∫ e^{-a t²} e^{-b (t-x)²} e^{-2πiξt} dt` in closed form.
fn gaussian_stft(a: f64, b: f64, x: f64, xi: f64) -> Complex64 {
    let s = a + b;
    let lin = Complex64::new(2.0 * b * x, -2.0 * PI * xi);
    (PI / s).sqrt() * (lin * lin / (4.0 * s) - b * x * x).exp()
}

#[test]
fn direct_stft_matches_closed_form() {
    for (a, b) in [(PI, PI), (PI / 2.0, PI), (2.0 * PI, PI / 2.0), (1.0, 3.0)] {
        let f = HermiteGaussian::gaussian(1, a).unwrap();
        let psi = HermiteGaussian::gaussian(1, b).unwrap();
        for &(x, xi) in &[(0.0, 0.0), (0.5, -1.25), (-2.0, 0.75), (1.5, 2.0)] {
            let got = stft_direct(&f, &psi, &[x], &[xi]).unwrap();
            let want = gaussian_stft(a, b, x, xi);
            assert!((got - want).norm() <= 1e-12, "a={a} b={b} ({x},{xi}): {got} vs {want}");
        }
    }
}

#[test]
fn grid_stft_matches_closed_form() {
    let (a, b) = (PI / 2.0, PI);
    let f = HermiteGaussian::gaussian(1, a).unwrap();
    let psi = HermiteGaussian::gaussian(1, b).unwrap();
    let grid = PhaseSpaceGrid::default_for(1);
    let v = stft_grid(&f, &psi, &grid).unwrap();
    let xs = grid.x_nodes();
    let xis = grid.xi_nodes();
    let mut worst: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate().step_by(5) {
        for (k, &xi) in xis.iter().enumerate().step_by(3) {
            worst = worst.max((v.get(i, k) - gaussian_stft(a, b, x, xi)).norm());
        }
    }
    assert!(worst <= 1e-9, "max error {worst:e}");
}

#[test]
fn covariance_identity() {
    let psi = HermiteGaussian::gaussian(1, PI).unwrap();
    let (u, eta) = (0.8, -0.6);
    for (name, f) in shipped_family(1).into_iter().take(6) {
        let g = f.shift_modulate(&[u], &[eta]).unwrap();
        // g(t) = e^{2πiηt} f(t - u)
        let t = 0.37;
        let direct = Complex64::from_polar(1.0, 2.0 * PI * eta * t) * f.eval(&[t - u]).unwrap();
        assert!((g.eval(&[t]).unwrap() - direct).norm() < 1e-14);
        for &(x, xi) in &[(0.0, 0.0), (1.1, 0.4), (-0.7, -1.3)] {
            let lhs = stft_direct(&g, &psi, &[x], &[xi]).unwrap();
            let phase = Complex64::from_polar(1.0, -2.0 * PI * (xi - eta) * u);
            let rhs = phase * stft_direct(&f, &psi, &[x - u], &[xi - eta]).unwrap();
            assert!((lhs - rhs).norm() <= 1e-9, "{name} ({x},{xi}): {lhs} vs {rhs}");
        }
    }
}

#[test]
fn inner_product_matches_quadrature() {
    let fam = shipped_family(1);
    for (na, fa) in fam.iter().take(8) {
        for (nb, fb) in fam.iter().skip(4) {
            let exact = fa.inner_product(fb).unwrap();
            let re = simpson(|t| (fa.eval(&[t]).unwrap() * fb.eval(&[t]).unwrap().conj()).re, -12.0, 12.0, 4000);
            let im = simpson(|t| (fa.eval(&[t]).unwrap() * fb.eval(&[t]).unwrap().conj()).im, -12.0, 12.0, 4000);
            assert!(
                (exact - Complex64::new(re, im)).norm() <= 1e-10,
                "({na},{nb}): {exact} vs {re}+{im}i"
            );
        }
    }
}

#[test]
fn l2_norm_of_gaussian() {
    // ∫ e^{-2a t²} dt = sqrt(π / 2a)
    for a in [0.5, PI, 7.0] {
        let f = HermiteGaussian::new(1, vec![GaussianTerm::new(Complex64::new(1.0, 0.0), vec![0.3], vec![1.0], a)])
            .unwrap();
        let want = (PI / (2.0 * a)).sqrt().sqrt();
        assert!((f.l2_norm() - want).abs() <= 1e-14 * want);
    }
}
