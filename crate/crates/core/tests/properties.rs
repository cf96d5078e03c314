//! Invariants over randomized inputs.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use proptest::prelude::*;

use ultranorm::config::Tolerances;
use ultranorm::hermite::{GaussianTerm, HermiteGaussian};
use ultranorm::komatsu::{certify_regularization, product_sequence, regularize, RSequence};
use ultranorm::numeric::{logspace, rel_diff};
use ultranorm::report::{CheckRecord, Status, Summary};
use ultranorm::seminorm::seminorm_h;
use ultranorm::sequence::{check_m1, check_m2prime_decay, fit_m2prime, WeightSequence};
use ultranorm::stft::stft_direct;
use ultranorm::weights::{PointGrid, WeightFunction};

fn term() -> impl Strategy<Value = GaussianTerm> {
    (-1.0..1.0f64, -1.0..1.0f64, -1.5..1.5f64, -1.0..1.0f64, 0.5..6.0f64)
        .prop_map(|(re, im, c, m, w)| GaussianTerm::new(Complex64::new(re, im), vec![c], vec![m], w))
}

fn function() -> impl Strategy<Value = HermiteGaussian> {
    prop::collection::vec(term(), 1..4).prop_map(|t| HermiteGaussian::new(1, t).unwrap())
}

fn increasing_table() -> impl Strategy<Value = Vec<f64>> {
    (0.05..4.0f64, prop::collection::vec((0.0..0.4f64, prop::bool::weighted(0.1), 1.0..40.0f64), 210))
        .prop_map(|(start, steps)| {
            let mut cur = start;
            let mut out = Vec::with_capacity(steps.len());
            for (small, jump, big) in steps {
                out.push(cur);
                cur *= if jump { big } else { 1.0 + small };
            }
            out
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn fast_and_brute_associated_function_agree(s in 0.5..3.0f64, e in -2.0..3.0f64) {
        let seq = WeightSequence::gevrey(s).unwrap();
        let t = 10f64.powf(e);
        let fast = seq.associated_function_fast(t).unwrap();
        let brute = seq.associated_function_brute(t).unwrap();
        prop_assert!(rel_diff(fast, brute) <= 1e-12);
    }

    #[test]
    fn associated_function_is_monotone(s in 0.5..3.0f64, a in 0.0..500.0f64, b in 0.0..500.0f64) {
        let seq = WeightSequence::gevrey(s).unwrap();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(seq.associated_function(lo).unwrap() <= seq.associated_function(hi).unwrap());
    }

    #[test]
    // below s = 1/2 the maximizer near t^{1/s} leaves the extension limit for t ~ 300
    fn gevrey_sequences_are_log_convex_with_verified_witness(s in 0.5..3.0f64) {
        let seq = WeightSequence::gevrey(s).unwrap();
        prop_assert!(check_m1(&seq, 300).unwrap().holds);
        let w = fit_m2prime(&seq, 150).unwrap();
        prop_assert!(w.verify(&seq).unwrap());
        let r = check_m2prime_decay(&seq, &w, 1, &logspace(-2.0, 2.5, 40), 1e-12).unwrap();
        prop_assert!(r.passed);
    }

    #[test]
    fn regularization_properties(values in increasing_table()) {
        let r = RSequence::from_table("random", &values, true).unwrap();
        let reg = regularize(&r, 200).unwrap();
        let m = Arc::new(WeightSequence::gevrey(1.0).unwrap());
        let cert = certify_regularization(&m, &r, &reg, 200).unwrap();
        prop_assert!(cert.below_original);
        prop_assert!(cert.monotone);
        prop_assert!(cert.geometric_step);
        prop_assert!(cert.doubling_bound);
        prop_assert!(cert.product_witness_verified);
        // idempotent
        let again = regularize(&reg, 200).unwrap();
        for j in 0..=200 {
            prop_assert_eq!(again.log_value(j).unwrap(), reg.log_value(j).unwrap());
        }
    }

    #[test]
    fn product_sequence_is_log_sum(values in increasing_table(), p in 0usize..200) {
        let r = RSequence::from_table("random", &values, true).unwrap();
        let m = Arc::new(WeightSequence::gevrey(1.5).unwrap());
        let prod = product_sequence(&m, &r).unwrap();
        let want = m.log_value(p).unwrap() + r.running_product(p).unwrap();
        prop_assert!((prod.log_value(p).unwrap() - want).abs() <= 1e-9 * want.abs().max(1.0));
    }

    #[test]
    fn stft_is_linear(f in function(), g in function(), a in -2.0..2.0f64, b in -2.0..2.0f64,
                      x in -2.0..2.0f64, xi in -2.0..2.0f64) {
        let psi = HermiteGaussian::gaussian(1, PI).unwrap();
        let (ca, cb) = (Complex64::new(a, 0.5), Complex64::new(-0.25, b));
        let combo = f.scale(ca).add(&g.scale(cb)).unwrap();
        let lhs = stft_direct(&combo, &psi, &[x], &[xi]).unwrap();
        let rhs = ca * stft_direct(&f, &psi, &[x], &[xi]).unwrap() + cb * stft_direct(&g, &psi, &[x], &[xi]).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-10 * (1.0 + rhs.norm()));
    }

    #[test]
    fn covariance_under_time_frequency_shifts(f in function(), u in -1.5..1.5f64, eta in -1.5..1.5f64,
                                              x in -2.0..2.0f64, xi in -2.0..2.0f64) {
        let psi = HermiteGaussian::gaussian(1, PI).unwrap();
        let g = f.shift_modulate(&[u], &[eta]).unwrap();
        let lhs = stft_direct(&g, &psi, &[x], &[xi]).unwrap();
        let rhs = Complex64::from_polar(1.0, -2.0 * PI * (xi - eta) * u)
            * stft_direct(&f, &psi, &[x - u], &[xi - eta]).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-9);
    }

    #[test]
    fn stft_bounded_by_norms(f in function(), x in -3.0..3.0f64, xi in -3.0..3.0f64) {
        let psi = HermiteGaussian::gaussian(1, PI).unwrap();
        let v = stft_direct(&f, &psi, &[x], &[xi]).unwrap();
        prop_assert!(v.norm() <= f.l2_norm() * psi.l2_norm() * (1.0 + 1e-12));
    }

    #[test]
    fn seminorm_is_absolutely_homogeneous(f in function(), re in -3.0..3.0f64, im in -3.0..3.0f64) {
        prop_assume!(re.abs() + im.abs() > 1e-3);
        let c = Complex64::new(re, im);
        let m = WeightSequence::gevrey(1.0).unwrap();
        let grid = PointGrid::new(1, 6.0, 241).unwrap();
        let base = seminorm_h(&f, &m, 0.5, &WeightFunction::Unit, &grid, 20).unwrap();
        let scaled = seminorm_h(&f.scale(c), &m, 0.5, &WeightFunction::Unit, &grid, 20).unwrap();
        prop_assert!(rel_diff(scaled.value, c.norm() * base.value) <= 1e-12);
    }

    #[test]
    fn seminorm_grows_with_h(f in function(), h in 0.1..1.0f64) {
        let m = WeightSequence::gevrey(1.0).unwrap();
        let grid = PointGrid::new(1, 6.0, 121).unwrap();
        let small = seminorm_h(&f, &m, h, &WeightFunction::Unit, &grid, 20).unwrap();
        let large = seminorm_h(&f, &m, 2.0 * h, &WeightFunction::Unit, &grid, 20).unwrap();
        prop_assert!(small.value <= large.value * (1.0 + 1e-12));
    }

    #[test]
    fn tolerance_overrides_round_trip(v in 1e-15..1.0f64) {
        let mut t = Tolerances::default();
        t.set(&format!("isometry={v:e}")).unwrap();
        prop_assert_eq!(t.isometry, v);
        prop_assert!(t.set("no_such_tolerance=1").is_err());
    }

    #[test]
    fn summary_counts_partition_records(statuses in prop::collection::vec(0u8..3, 0..30)) {
        let records: Vec<CheckRecord> = statuses
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let st = match s { 0 => Status::Pass, 1 => Status::Fail, _ => Status::Inconclusive };
                CheckRecord::new(format!("c{i}"), "a", st)
            })
            .collect();
        let s = Summary::of(&records);
        prop_assert_eq!(s.pass + s.fail + s.inconclusive, records.len());
        let expect = if s.fail > 0 { Status::Fail } else if s.inconclusive > 0 { Status::Inconclusive } else { Status::Pass };
        prop_assert_eq!(s.status, expect);
    }
}
