//! Acceptance run: one line per criterion, non-zero exit if any fails.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ultranorm::config::{Experiment, ExperimentConfig, SuiteKind};
use ultranorm::hermite::{shipped_family, HermiteGaussian};
use ultranorm::komatsu::{certify_regularization, regularize, RSequence};
use ultranorm::numeric::{linspace, logspace, rel_diff};
use ultranorm::report::Status;
use ultranorm::sequence::{check_m2prime_decay, fit_m2prime, WeightSequence};
use ultranorm::stft::{adjoint_bound_refinement, decay_bound_check, isometry_check, reconstruction_check, PhaseSpaceGrid};
use ultranorm::verify::{run_suite, verify_report};
use ultranorm::weights::{build_vbar, measure_chain, vbar_inequality_check, NachbinWeight, PointGrid, WeightSystem};
use ultranorm::Result;

struct Outcome {
    passed: bool,
    detail: String,
}

fn ok(passed: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome {
        passed,
        detail: detail.into(),
    })
}

fn gevrey_triple() -> Result<Vec<WeightSequence>> {
    [0.5, 1.0, 2.0].iter().map(|&s| WeightSequence::gevrey(s)).collect()
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn c1_associated_function() -> Result<Outcome> {
    let ts = logspace(-2.0, 3.0, 400);
    let mut worst: f64 = 0.0;
    for seq in gevrey_triple()? {
        for &t in &ts {
            let fast = seq.associated_function_fast(t)?;
            let brute = seq.associated_function_brute(t)?;
            worst = worst.max(rel_diff(fast, brute));
        }
    }
    let fact = WeightSequence::gevrey(1.0)?;
    let m1 = fact.associated_function(1.0)?;
    let m2 = fact.associated_function(2.0)?;
    let exact = m1.abs() <= 1e-12 && (m2 - 2f64.ln()).abs() <= 1e-12;
    ok(
        worst <= 1e-12 && exact,
        format!("max rel diff {worst:.2e}, M(1) = {m1}, M(2) - log 2 = {:.1e}", m2 - 2f64.ln()),
    )
}

fn c2_decay_inequality() -> Result<Outcome> {
    let ts = logspace(-2.0, 3.0, 400);
    let mut worst = f64::NEG_INFINITY;
    let mut all = true;
    for seq in gevrey_triple()? {
        let w = fit_m2prime(&seq, 200)?;
        for d in [1, 2] {
            let r = check_m2prime_decay(&seq, &w, d, &ts, 1e-12)?;
            all &= r.passed;
            worst = worst.max(r.max_ratio);
        }
    }
    ok(all, format!("max lhs/rhs {worst:.4}"))
}

fn c3_isometry() -> Result<Outcome> {
    let fam = shipped_family(1);
    let get = |name: &str| fam.iter().find(|(n, _)| n == name).map(|(_, f)| f.clone()).unwrap();
    let pairs = [
        (get("gauss_w1"), HermiteGaussian::gaussian(1, PI)?),
        (get("gauss_w0.5"), HermiteGaussian::gaussian(1, PI)?),
        (get("gauss_w2"), HermiteGaussian::gaussian(1, PI / 2.0)?),
        (get("shift_1"), HermiteGaussian::gaussian(1, 2.0 * PI)?),
        (get("mod_1"), HermiteGaussian::gaussian(1, PI)?),
    ];
    let grid = PhaseSpaceGrid::default_for(1);
    let mut worst: f64 = 0.0;
    let mut clean = true;
    for (f, psi) in &pairs {
        let r = isometry_check(f, psi, &grid)?;
        worst = worst.max((r.ratio - 1.0).abs());
        clean &= !r.inconclusive;
    }
    ok(worst <= 1e-6 && clean, format!("max |ratio - 1| {worst:.2e}"))
}

fn c4_reconstruction() -> Result<Outcome> {
    // width pi/2: truncation on [-4,4] sits above round-off, so the extent doubling is observable
    let g = HermiteGaussian::gaussian(1, PI / 2.0)?;
    let t: Vec<Vec<f64>> = linspace(-4.0, 4.0, 161).into_iter().map(|x| vec![x]).collect();
    let grid = PhaseSpaceGrid::symmetric(1, 4.0, 128, 4.0, 128);
    let coarse = reconstruction_check(&g, &g, &g, &grid, &t, 1e-6)?;
    let wide = reconstruction_check(&g, &g, &g, &grid.extended(), &t, 1e-6)?;
    ok(
        coarse.max_rel_error <= 1e-6 && wide.max_rel_error < coarse.max_rel_error,
        format!(
            "error {:.2e} on [-4,4], {:.2e} on [-8,8]",
            coarse.max_rel_error, wide.max_rel_error
        ),
    )
}

struct Lemma32Setup {
    phi: HermiteGaussian,
    m: Arc<WeightSequence>,
    v: ultranorm::weights::WeightFunction,
    w: ultranorm::weights::WeightFunction,
    grid: PhaseSpaceGrid,
}

fn lemma32_setup() -> Result<Lemma32Setup> {
    let m = Arc::new(WeightSequence::gevrey(1.0)?);
    let system = WeightSystem::AssocExp {
        seq: Arc::clone(&m),
        scale: 1.0,
    };
    Ok(Lemma32Setup {
        phi: HermiteGaussian::gaussian(1, PI)?,
        v: system.member(2)?,
        w: system.member(1)?,
        m,
        grid: PhaseSpaceGrid::default_for(1),
    })
}

fn c5_decay_certificate() -> Result<Outcome> {
    let s = lemma32_setup()?;
    let r = decay_bound_check(
        &s.phi,
        &s.phi,
        &s.m,
        1.0,
        &s.v,
        &s.w,
        &s.grid,
        &PointGrid::default_for(1),
        40,
        10,
        0.05,
    )?;
    let passed = r.status == Status::Pass
        && r.coarse.profile_interior
        && r.drift <= 0.05
        && r.moments_consistent
        && r.coarse.log_moments.len() == 11;
    ok(
        passed,
        format!(
            "C {:.4e}, drift {:.2e}, argmax xi {:.3}, status {}",
            r.c_meas, r.drift, r.coarse.argmax_xi, r.status
        ),
    )
}

fn c6_adjoint_certificate() -> Result<Outcome> {
    let s = lemma32_setup()?;
    let witness = fit_m2prime(&s.m, 200)?;
    let r = adjoint_bound_refinement(&s.phi, &s.phi, &s.m, 1.0, &s.v, &s.w, &witness, &s.grid, 20, 0.05)?;
    ok(
        r.ratio.is_finite() && r.drift <= 0.05 && r.status == Status::Pass,
        format!("ratio {:.4e}, drift {:.2e}, status {}", r.ratio, r.drift, r.status),
    )
}

fn random_r(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    let mut v = Vec::with_capacity(len);
    let mut cur: f64 = rng.gen_range(0.05..5.0);
    for _ in 0..len {
        v.push(cur);
        // mostly small steps, occasional large jumps
        cur *= if rng.gen_bool(0.1) {
            rng.gen_range(2.0..50.0)
        } else {
            1.0 + rng.gen_range(0.0..0.3)
        };
        cur = cur.min(1e250);
    }
    v
}

fn c7_regularization() -> Result<Outcome> {
    let j = 200;
    let m = Arc::new(WeightSequence::gevrey(1.0)?);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut passed = 0;
    for k in 0..10 {
        let table = random_r(&mut rng, j + 2);
        let r = RSequence::from_table(format!("random{k}"), &table, true)?;
        let reg = regularize(&r, j)?;
        let cert = certify_regularization(&m, &r, &reg, j)?;
        if cert.below_original && cert.monotone && cert.geometric_step && cert.product_witness_verified {
            passed += 1;
        }
    }
    ok(passed == 10, format!("{passed}/10 tables certified"))
}

fn c8_vbar() -> Result<Outcome> {
    let a = Arc::new(WeightSequence::gevrey(1.0)?);
    let system = WeightSystem::AssocExp {
        seq: Arc::clone(&a),
        scale: 1.0,
    };
    let lambdas: Vec<f64> = (1..=16).map(|j| (j + 1) as f64).collect();
    let v = NachbinWeight::from_system(&system, &lambdas)?;
    let grid = PointGrid::new(1, 20.0, 201)?;
    let chain = measure_chain(&system, &v, &a, 1.0, &[1, 2, 4, 8], &grid)?;
    let vbar = build_vbar(&system, &chain)?;
    let r = vbar_inequality_check(&v, &vbar, &a, 1.0, &grid)?;
    ok(
        chain.len() == 4 && r.passed && r.nodes == 201 * 201,
        format!("max log ratio {:.3e} over {} nodes", r.log_max_ratio, r.nodes),
    )
}

fn report_json(exp: &Experiment, threads: usize) -> Result<String> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool");
    let report = pool.install(|| verify_report(exp))?;
    Ok(report.to_json()?)
}

fn c9_diagram_suite() -> Result<Outcome> {
    let mut details = Vec::new();
    let mut passed = true;
    for name in ["thm37_gevrey.json", "thm39_constant.json"] {
        let path = configs_dir().join(name);
        let exp = Experiment::build(ExperimentConfig::from_path(&path)?, &configs_dir())?;
        let one = report_json(&exp, 1)?;
        let eight = report_json(&exp, 8)?;
        let report = verify_report(&exp)?;
        let s = report.summary;
        let clean = s.fail == 0 && s.inconclusive == 0 && s.pass > 0;
        passed &= clean && one == eight;
        details.push(format!(
            "{name}: {} pass {} fail {} inconclusive, identical across threads: {}",
            s.pass,
            s.fail,
            s.inconclusive,
            one == eight
        ));
    }
    ok(passed, details.join("; "))
}

fn c10_lemma31() -> Result<Outcome> {
    let exp = Experiment::build(ExperimentConfig::default(), Path::new("."))?;
    let records = run_suite(&exp, SuiteKind::Lemma31)?;
    let rows: Vec<_> = records.iter().filter(|r| r.name.starts_with("lemma31[")).collect();
    let agree = rows.iter().filter(|r| r.status == Status::Pass).count();
    ok(
        rows.len() == 12 && agree == 12 && exp.r_list().len() == 3,
        format!("{agree}/{} functions agree over {} r-sequences", rows.len(), exp.r_list().len()),
    )
}

type Criterion = (u32, &'static str, Duration, fn() -> Result<Outcome>);

fn main() {
    let criteria: [Criterion; 10] = [
        (1, "associated function fast vs brute", Duration::from_secs(1), c1_associated_function),
        (2, "(M.2)' decay inequality", Duration::from_secs(1), c2_decay_inequality),
        (3, "STFT isometry", Duration::from_secs(10), c3_isometry),
        (4, "reconstruction", Duration::from_secs(30), c4_reconstruction),
        (5, "decay certificate", Duration::from_secs(60), c5_decay_certificate),
        (6, "adjoint certificate", Duration::from_secs(60), c6_adjoint_certificate),
        (7, "regularization certificate", Duration::from_secs(1), c7_regularization),
        (8, "v-bar construction", Duration::from_secs(10), c8_vbar),
        (9, "diagram suite", Duration::from_secs(300), c9_diagram_suite),
        (10, "inductive vs projective finiteness", Duration::from_secs(60), c10_lemma31),
    ];
    let mut failures = 0;
    for (id, label, budget, run) in criteria {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let (passed, detail) = match result {
            Ok(o) => (o.passed, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let in_time = elapsed <= budget;
        let verdict = if passed && in_time { "PASS" } else { "FAIL" };
        if verdict == "FAIL" {
            failures += 1;
        }
        println!(
            "criterion {id:>2} {verdict} {label}: {detail} ({:.3} s, budget {} s)",
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
}
