//! Verification suites. Each suite turns an [`Experiment`] into check
//! records; [`verify_report`] wraps them into a report.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::config::{Experiment, SuiteKind, SuiteSpec, Tolerances};
use crate::error::{Error, Result};
use crate::hermite::HermiteGaussian;
use crate::komatsu::{certify_regularization, product_sequence, regularize, RSequence};
use crate::numeric::par_map;
use crate::report::{CheckRecord, Status, VerificationReport};
use crate::seminorm::{log_den_rj_scaled, seminorm_h, seminorm_with, SeminormResult};
use crate::sequence::{check_m1, fit_m2prime, precedes_log_growth, M2PrimeWitness, WeightSequence};
use crate::stft::{
    adjoint_bound_refinement, decay_bound_check, isometry_check, reconstruction_check, stft_grid, window_pairing,
    PhaseSpaceGrid, SampledStft, NOISE_FLOOR,
};
use crate::weights::{
    admissibility_check, build_vbar, condition_s_check, log_ratio_band, measure_chain, mollify_weight,
    vbar_inequality_check, Bump, NachbinWeight, PointGrid, StepTable, WeightFunction, WeightSystem,
};

/// Orders used when fitting sequence constants.
pub const SEQUENCE_CHECK_LEN: usize = 200;

/// Minimal increase of `(log M_p - log p!^{1/2}) / p` between `P/2` and `P`.
pub const GAUSSIAN_GROWTH_MARGIN: f64 = 0.05;

const GAUSSIAN_CHECK_LEN: usize = 400;

/// Shared state for the suites of one experiment.
pub struct Context<'a> {
    pub exp: &'a Experiment,
    pub m: Arc<WeightSequence>,
    pub a: Arc<WeightSequence>,
    pub system: &'a WeightSystem,
    pub window: HermiteGaussian,
    pub witness: M2PrimeWitness,
    pub spec: SuiteSpec,
    pub tol: Tolerances,
}

impl<'a> Context<'a> {
    pub fn new(exp: &'a Experiment) -> Result<Self> {
        let spec = exp.config.suite.clone();
        let m = exp.sequence(&spec.m)?;
        let a = exp.sequence(&spec.a)?;
        let system = exp.system(&spec.system)?;
        if spec.n_list.is_empty() || spec.n_list.contains(&0) {
            return Err(Error::Config("suite.n_list needs positive entries".into()));
        }
        let witness = fit_m2prime(&m, SEQUENCE_CHECK_LEN)?;
        Ok(Self {
            exp,
            m,
            a,
            system,
            window: exp.window()?,
            witness,
            tol: exp.config.tolerances.clone(),
            spec,
        })
    }

    fn is_constant_system(&self) -> bool {
        matches!(self.system, WeightSystem::Constant { .. })
    }

    fn pairs(&self) -> Vec<(usize, usize)> {
        self.spec.n_list.iter().map(|&n| (n, 2 * n)).collect()
    }

    /// `v ∈ V̄`: the single weight of a constant system, otherwise
    /// `inf_{j ≤ K} (j+1) v_j`.
    pub fn nachbin_weight(&self) -> Result<NachbinWeight> {
        match self.system {
            WeightSystem::Constant { omega } => Ok(NachbinWeight::single(omega.clone())),
            sys => {
                let lambdas: Vec<f64> = (1..=self.spec.vbar_terms.max(1)).map(|j| (j + 1) as f64).collect();
                NachbinWeight::from_system(sys, &lambdas)
            }
        }
    }
}

fn grid_meta_point(rec: CheckRecord, g: &PointGrid, prefix: &str) -> CheckRecord {
    rec.grid_meta(&format!("{prefix}extent"), g.extent)
        .grid_meta(&format!("{prefix}per_axis"), g.per_axis as f64)
}

fn grid_meta_phase(rec: CheckRecord, g: &PhaseSpaceGrid) -> CheckRecord {
    rec.grid_meta("x_min", g.x_min)
        .grid_meta("x_max", g.x_max)
        .grid_meta("nx", g.nx as f64)
        .grid_meta("xi_min", g.xi_min)
        .grid_meta("xi_max", g.xi_max)
        .grid_meta("nxi", g.nxi as f64)
}

/// Records of a failed computation: unsupported cases are inconclusive,
/// everything else propagates.
fn unsupported(name: String, anchor: &str, err: Error) -> Result<CheckRecord> {
    match err {
        Error::Unsupported(msg) => Ok(CheckRecord::new(name, anchor, Status::Inconclusive).note(msg)),
        other => Err(other),
    }
}

/// `(log M_p - log p!^{1/2}) / p` grows: Gaussians belong to the space.
pub fn gaussian_window_record(m: &WeightSequence) -> Result<CheckRecord> {
    let half = WeightSequence::gevrey(0.5)?;
    let lm = m.log_values(GAUSSIAN_CHECK_LEN + 1)?;
    let lh = half.log_values(GAUSSIAN_CHECK_LEN + 1)?;
    let q: Vec<f64> = (1..=GAUSSIAN_CHECK_LEN)
        .map(|p| (lm[p] - lh[p]) / p as f64)
        .collect();
    let n = q.len();
    let tail_increasing = q[3 * n / 4..].windows(2).all(|w| w[1] > w[0]);
    let growth = q[n - 1] - q[n / 2 - 1];
    let holds = tail_increasing && growth > GAUSSIAN_GROWTH_MARGIN;
    let mut rec = CheckRecord::new(
        format!("hypothesis.gaussian_window[{}]", m.label()),
        "p!^{1/2} < M_p",
        Status::from_bool(holds),
    )
    .measure("growth", growth)
    .measure("last", q[n - 1])
    .tol("growth_margin", GAUSSIAN_GROWTH_MARGIN)
    .grid_meta("orders", GAUSSIAN_CHECK_LEN as f64);
    if !holds {
        rec = rec.note("Gaussian test functions are not in the space for this sequence");
    }
    Ok(rec)
}

/// Hypotheses shared by the suites.
pub fn hypotheses(ctx: &Context) -> Result<Vec<CheckRecord>> {
    let mut out = Vec::new();
    for (role, seq) in [("M", &ctx.m), ("A", &ctx.a)] {
        let c = check_m1(seq, SEQUENCE_CHECK_LEN)?;
        let mut rec = CheckRecord::new(
            format!("hypothesis.m1[{role}]"),
            "M_p^2 <= M_{p-1} M_{p+1}",
            Status::from_bool(c.holds),
        )
        .grid_meta("orders", c.checked_up_to as f64);
        if let Some(p) = c.first_violation {
            rec = rec.measure("first_violation", p as f64);
        }
        out.push(rec);
    }
    let w = &ctx.witness;
    out.push(
        CheckRecord::new(
            "hypothesis.m2prime[M]",
            "M_{p+1} <= C0 H^{p+1} M_p",
            Status::from_bool(w.verify(&ctx.m)?),
        )
        .measure("c0", w.c0)
        .measure("h", w.h)
        .grid_meta("orders", w.verified_up_to as f64),
    );
    let prec = precedes_log_growth(&ctx.m, SEQUENCE_CHECK_LEN, ctx.tol.precedes_threshold)?;
    out.push(
        CheckRecord::new(
            "hypothesis.precedes_log[M]",
            "(log p)^p < M_p",
            Status::from_bool(prec.verdict),
        )
        .measure("last_ratio", prec.last)
        .tol("threshold", prec.threshold)
        .grid_meta("orders", SEQUENCE_CHECK_LEN as f64),
    );
    out.push(gaussian_window_record(&ctx.m)?);

    let pairs = ctx.pairs();
    let adm = admissibility_check(
        ctx.system,
        &ctx.a,
        ctx.spec.tau,
        &pairs,
        ctx.spec.c_adm,
        &ctx.exp.product,
        &ctx.exp.product,
    )?;
    let mut rec = CheckRecord::new(
        "hypothesis.admissibility",
        "v_m(x+y) <= C v_n(x) e^{A(tau|y|)}, m = 2n",
        Status::from_bool(adm.passed),
    )
    .tol("c", adm.c)
    .tol("tau", adm.tau);
    for row in &adm.rows {
        rec = rec.measure(&format!("log_ratio[{},{}]", row.n, row.m), row.log_max_ratio);
    }
    out.push(grid_meta_point(rec, &ctx.exp.product, ""));

    if !ctx.is_constant_system() {
        let mut ok = true;
        let mut rec = CheckRecord::new(
            "hypothesis.condition_s",
            "v_m / v_n decreasing along rays and below threshold at the radius",
            Status::Pass,
        )
        .tol("threshold", ctx.exp.rays.threshold)
        .grid_meta("radius", ctx.exp.rays.radius)
        .grid_meta("samples", ctx.exp.rays.samples as f64);
        for &(n, m) in &pairs {
            let s = condition_s_check(ctx.system, n, m, &ctx.exp.rays)?;
            ok &= s.holds;
            rec = rec.measure(&format!("log_ratio_at_radius[{n},{m}]"), s.log_ratio_at_radius);
        }
        out.push(rec.with_status(Status::from_bool(ok)));
    }
    Ok(out)
}

/// Smallest `n` in the list whose seminorm `‖φ‖` with `h/n` and `v_n` is
/// attained inside the truncation; falls back to the last entry.
pub fn inductive_norm(ctx: &Context, phi: &HermiteGaussian) -> Result<(usize, f64, SeminormResult)> {
    let mut last = None;
    for &n in &ctx.spec.n_list {
        let h = ctx.spec.h / n as f64;
        let s = seminorm_h(phi, &ctx.m, h, &ctx.system.member(n)?, &ctx.exp.spatial, ctx.spec.alpha_max)?;
        if s.is_interior() && s.log_value.is_finite() || s.value == 0.0 {
            return Ok((n, h, s));
        }
        last = Some((n, h, s));
    }
    Ok(last.expect("n_list is non-empty"))
}

/// `log sup |V(x,ξ)| e^{lw(x)} e^{lm(ξ)}` over resolved samples, with the maximizing cell and
/// whether it lies on the frame of the grid.
pub fn weighted_sup(v: &SampledStft, lw: &[f64], lm: &[f64]) -> (f64, usize, usize, bool) {
    let cols = v.grid.cols();
    let floor = NOISE_FLOOR * v.max_abs();
    let mut best = (f64::NEG_INFINITY, 0, 0);
    for (row, w) in lw.iter().enumerate() {
        for (col, m) in lm.iter().enumerate() {
            let a = v.values[row * cols + col].norm();
            if a <= floor {
                continue;
            }
            let t = a.ln() + w + m;
            if t > best.0 {
                best = (t, row, col);
            }
        }
    }
    let edge = best.0 > f64::NEG_INFINITY && v.grid.is_edge(best.1, best.2);
    (best.0, best.1, best.2, edge)
}

fn row_weights(grid: &PhaseSpaceGrid, w: &WeightFunction) -> Result<Vec<f64>> {
    par_map(grid.rows(), |r| w.log_eval(&grid.x_point(r)))
}

fn col_assoc(grid: &PhaseSpaceGrid, m: &WeightSequence, scale: f64) -> Result<Vec<f64>> {
    par_map(grid.cols(), |c| {
        let xi = grid.xi_point(c);
        m.associated_function(scale * crate::numeric::euclidean_norm(&xi))
    })
}

/// Decay, adjoint, reconstruction and isometry records for one function.
pub fn stft_records(ctx: &Context, name: &str, phi: &HermiteGaussian) -> Result<Vec<CheckRecord>> {
    let exp = ctx.exp;
    let grid = &exp.phase;
    let (n, h, _) = inductive_norm(ctx, phi)?;
    let m_idx = 2 * n;
    let vm = ctx.system.member(m_idx)?;
    let vn = ctx.system.member(n)?;
    let mut out = Vec::new();

    let anchor = "|V_psi phi(x,xi)| v_m(x) <= C ||phi||_{h,v_n} e^{-M(pi h |xi|)}";
    let rec_name = format!("decay[{name}]");
    out.push(
        match decay_bound_check(
            phi,
            &ctx.window,
            &ctx.m,
            h,
            &vm,
            &vn,
            grid,
            &exp.spatial,
            ctx.spec.alpha_max,
            ctx.spec.moment_max,
            ctx.tol.drift,
        ) {
            Ok(r) => {
                let rec = CheckRecord::new(rec_name, anchor, r.status)
                    .measure("c_meas", r.c_meas)
                    .measure("drift", r.drift)
                    .measure("log_norm", r.norm.log_value)
                    .measure("argmax_x", r.coarse.argmax_x)
                    .measure("argmax_xi", r.coarse.argmax_xi)
                    .measure("moments_consistent", f64::from(u8::from(r.moments_consistent)))
                    .measure("n", n as f64)
                    .measure("h", h)
                    .tol("drift", ctx.tol.drift);
                grid_meta_phase(rec, grid)
            }
            Err(e) => unsupported(rec_name, anchor, e)?,
        },
    );

    let anchor = "||V*_psi F||_{k,v_m} <= C sup |F| (v_n (x) e^{M(h|xi|)}), k = h/(4 H^2 pi)";
    let rec_name = format!("adjoint[{name}]");
    out.push(
        match adjoint_bound_refinement(
            phi,
            &ctx.window,
            &ctx.m,
            h,
            &vm,
            &vn,
            &ctx.witness,
            grid,
            ctx.spec.adjoint_alpha_max,
            ctx.tol.drift,
        ) {
            Ok(r) => {
                let rec = CheckRecord::new(rec_name, anchor, r.status)
                    .measure("ratio", r.ratio)
                    .measure("drift", r.drift)
                    .measure("argmax_order", r.coarse.argmax_order as f64)
                    .measure("argmax_t", r.coarse.argmax_t)
                    .measure("k", h / (4.0 * ctx.witness.h.powi(2) * PI))
                    .tol("drift", ctx.tol.drift)
                    .grid_meta("alpha_max", ctx.spec.adjoint_alpha_max as f64);
                grid_meta_phase(rec, grid)
            }
            Err(e) => unsupported(rec_name, anchor, e)?,
        },
    );

    let t_points = exp.t_points();
    let rec = reconstruction_check(phi, &ctx.window, &ctx.window, grid, &t_points, ctx.tol.reconstruction)?;
    out.push(grid_meta_phase(
        CheckRecord::new(
            format!("reconstruction[{name}]"),
            "(gamma,psi)^{-1} V*_gamma V_psi phi = phi",
            rec.status,
        )
        .measure("max_rel_error", rec.max_rel_error)
        .measure("edge_fraction", rec.edge_fraction)
        .tol("rel", ctx.tol.reconstruction)
        .grid_meta("t_points", t_points.len() as f64),
        grid,
    ));

    let iso = isometry_check(phi, &ctx.window, grid)?;
    let dev = (iso.ratio - 1.0).abs();
    let status = if iso.expected == 0.0 && iso.measured == 0.0 {
        Status::Pass
    } else if iso.inconclusive {
        Status::Inconclusive
    } else {
        Status::from_bool(dev <= ctx.tol.isometry)
    };
    out.push(grid_meta_phase(
        CheckRecord::new(format!("isometry[{name}]"), "||V_psi phi||_2 = ||psi||_2 ||phi||_2", status)
            .measure("ratio", iso.ratio)
            .measure("edge_fraction", iso.edge_fraction)
            .tol("abs", ctx.tol.isometry),
        grid,
    ));
    Ok(out)
}

/// Regularized sequences, their certificates and the projective weight
/// `v̄` built from the measured chain.
pub struct ProjectiveSetup {
    pub records: Vec<CheckRecord>,
    pub r_prime: Vec<(String, RSequence)>,
    pub v: NachbinWeight,
    pub vbar: NachbinWeight,
}

pub fn projective_setup(ctx: &Context) -> Result<ProjectiveSetup> {
    let mut records = Vec::new();
    let mut r_prime = Vec::new();
    let j_max = ctx.spec.j_max;
    for (name, r) in ctx.exp.r_list() {
        let reg = regularize(&r, j_max)?;
        let cert = certify_regularization(&ctx.m, &r, &reg, j_max)?;
        let mut rec = CheckRecord::new(
            format!("regularize[{name}]"),
            "r'_j <= r_j, r'_j increasing, r'_{j+1} <= 2^{j+1} r'_j, M_p prod r'_j satisfies (M.2)'",
            Status::from_bool(cert.passed),
        )
        .measure("c", cert.c)
        .measure("below_original", f64::from(u8::from(cert.below_original)))
        .measure("monotone", f64::from(u8::from(cert.monotone)))
        .measure("geometric_step", f64::from(u8::from(cert.geometric_step)))
        .measure("doubling_bound", f64::from(u8::from(cert.doubling_bound)))
        .grid_meta("j_max", j_max as f64);
        if let Some(w) = cert.product_witness {
            rec = rec.measure("product_c0", w.c0).measure("product_h", w.h);
        }
        records.push(rec);
        r_prime.push((name, reg));
    }

    let v = ctx.nachbin_weight()?;
    let chain = measure_chain(ctx.system, &v, &ctx.a, ctx.spec.tau, &ctx.spec.n_list, &ctx.exp.product)?;
    let vbar = build_vbar(ctx.system, &chain)?;
    let check = vbar_inequality_check(&v, &vbar, &ctx.a, ctx.spec.tau, &ctx.exp.product)?;
    let mut rec = CheckRecord::new(
        "vbar",
        "v(x+y) <= vbar(x) e^{A(tau|y|)}, vbar = inf_j C_j C'_j v_{n_j}",
        Status::from_bool(check.passed),
    )
    .measure("log_max_ratio", check.log_max_ratio)
    .tol("tau", ctx.spec.tau)
    .note(format!(
        "chain certifies membership in the closure only up to n = {}",
        chain.last().map(|l| l.n).unwrap_or(0)
    ));
    for l in &chain {
        rec = rec
            .measure(&format!("c_adm[{}]", l.n), l.c_adm)
            .measure(&format!("c_member[{}]", l.n), l.c_member);
    }
    records.push(grid_meta_point(rec, &ctx.exp.product, ""));
    Ok(ProjectiveSetup {
        records,
        r_prime,
        v,
        vbar,
    })
}

/// `log` of the projective seminorm with `r̃ = (π/√d) r'` and weight `v̄`.
fn projective_seminorm(
    ctx: &Context,
    phi: &HermiteGaussian,
    r: &RSequence,
    vbar: &WeightFunction,
) -> Result<SeminormResult> {
    let scale = PI / (ctx.exp.dim() as f64).sqrt();
    let den = log_den_rj_scaled(&ctx.m, r, scale, ctx.spec.alpha_max)?;
    seminorm_with(phi, &den, vbar, &ctx.exp.spatial, ctx.spec.alpha_max)
}

/// `sup |V_ψ φ| (v ⊗ e^{M_{r'}}) ≤ C ‖φ‖_{r̃, v̄}` for every regularized
/// `r'`. Returns the records and, per function, the largest projective
/// seminorm in log form.
pub fn projective_records(
    ctx: &Context,
    setup: &ProjectiveSetup,
    name: &str,
    phi: &HermiteGaussian,
) -> Result<(Vec<CheckRecord>, f64)> {
    let grid = &ctx.exp.phase;
    let fine = grid.refined();
    let v_w = setup.v.as_weight_function();
    let vbar_w = setup.vbar.as_weight_function();
    let coarse_v = stft_grid(phi, &ctx.window, grid)?;
    let fine_v = stft_grid(phi, &ctx.window, &fine)?;
    let lw_c = row_weights(grid, &v_w)?;
    let lw_f = row_weights(&fine, &v_w)?;
    let mut out = Vec::new();
    let mut best_rhs = f64::NEG_INFINITY;
    for (rname, r) in &setup.r_prime {
        let prod = product_sequence(&ctx.m, r)?;
        let lhs_c = weighted_sup(&coarse_v, &lw_c, &col_assoc(grid, &prod, 1.0)?);
        let lhs_f = weighted_sup(&fine_v, &lw_f, &col_assoc(&fine, &prod, 1.0)?);
        let rhs = projective_seminorm(ctx, phi, r, &vbar_w)?;
        best_rhs = best_rhs.max(rhs.log_value);
        let anchor = "sup |V_psi phi| v(x) e^{M_{r'}(|xi|)} <= C ||phi||_{pi r'/sqrt(d), vbar}";
        let rec_name = format!("projective[{name},{rname}]");
        let rec = if lhs_c.0 == f64::NEG_INFINITY {
            CheckRecord::new(rec_name, anchor, Status::from_bool(rhs.value == 0.0 || rhs.log_value.is_finite()))
                .measure("c_meas", 0.0)
        } else {
            let log_c = lhs_c.0 - rhs.log_value;
            let drift = ((lhs_f.0 - lhs_c.0).exp() - 1.0).abs();
            let status = if !log_c.is_finite() || drift > ctx.tol.drift {
                Status::Fail
            } else if lhs_c.3 || !rhs.is_interior() {
                Status::Inconclusive
            } else {
                Status::Pass
            };
            CheckRecord::new(rec_name, anchor, status)
                .measure("c_meas", log_c.exp())
                .measure("log_lhs", lhs_c.0)
                .measure("log_rhs", rhs.log_value)
                .measure("drift", drift)
                .tol("drift", ctx.tol.drift)
        };
        out.push(grid_meta_phase(rec, grid));
    }
    Ok((out, best_rhs))
}

/// Relative deviation of a smooth mollification of `ω` from `ω`.
pub fn mollify_record(ctx: &Context) -> Result<Option<CheckRecord>> {
    let WeightSystem::Constant { omega } = ctx.system else {
        return Ok(None);
    };
    if ctx.exp.dim() != 1 {
        return Ok(Some(
            CheckRecord::new("mollify", "e^{-b} omega <= omega~ <= e^{b} omega", Status::Inconclusive)
                .note("mollification is implemented for d = 1"),
        ));
    }
    let g = &ctx.exp.spatial;
    let knots = g.axis();
    let spacing = 2.0 * g.extent / (g.per_axis - 1) as f64;
    let table = StepTable::sample(omega, knots)?;
    let radius = ctx.spec.mollify_radius;
    let smooth = mollify_weight(&table, &Bump::new(radius)?)?;
    let inner = PointGrid::new(1, g.extent - 1.0, 4 * g.per_axis - 3)?;
    let (lo, hi) = log_ratio_band(&smooth, omega, &inner)?;
    let band = lo.abs().max(hi.abs());
    Ok(Some(
        CheckRecord::new(
            "mollify",
            "e^{-b} omega <= omega~ <= e^{b} omega",
            Status::from_bool(band <= ctx.tol.mollify_band),
        )
        .measure("log_band", band)
        .tol("b", ctx.tol.mollify_band)
        .grid_meta("bump_radius", radius)
        .grid_meta("knot_spacing", spacing)
        .grid_meta("extent", inner.extent),
    ))
}

/// Continuity constants through the STFT and reconstruction with the
/// normalized synthesis window.
pub fn diagram_records(
    ctx: &Context,
    name: &str,
    phi: &HermiteGaussian,
    log_proj: f64,
) -> Result<Vec<CheckRecord>> {
    let grid = &ctx.exp.phase;
    let (n, h, ind) = inductive_norm(ctx, phi)?;
    let v = stft_grid(phi, &ctx.window, grid)?;
    let lw = row_weights(grid, &ctx.system.member(2 * n)?)?;
    let lm = col_assoc(grid, &ctx.m, PI * h / (ctx.exp.dim() as f64).sqrt())?;
    let (log_cont, _, _, edge) = weighted_sup(&v, &lw, &lm);
    let c1 = (ind.log_value - log_cont).exp();
    let c2 = (log_cont - log_proj).exp();
    let zero = ind.value == 0.0 && log_cont == f64::NEG_INFINITY;
    let finite = zero || (c1.is_finite() && c2.is_finite() && c1 > 0.0 && c2 > 0.0);
    let status = if !finite {
        Status::Fail
    } else if !zero && (edge || !ind.is_interior()) {
        Status::Inconclusive
    } else {
        Status::Pass
    };
    let mut out = vec![grid_meta_phase(
        CheckRecord::new(
            format!("diagram.chain[{name}]"),
            "||phi||_{h,v_n} <= C1 sup |V_psi phi| (v_m (x) e^{M(pi h|xi|)}) <= C1 C2 sup_{r,vbar} ||phi||_{r,vbar}",
            status,
        )
        .measure("c1", if zero { 0.0 } else { c1 })
        .measure("c2", if zero { 0.0 } else { c2 })
        .measure("log_inductive", ind.log_value)
        .measure("log_stft", log_cont)
        .measure("log_projective", log_proj)
        .measure("n", n as f64),
        grid,
    )];

    let norm2 = ctx.window.l2_norm().powi(2);
    let gamma = ctx.window.scale(num_complex::Complex64::new(1.0 / norm2, 0.0));
    let pairing = window_pairing(&gamma, &ctx.window)?;
    let pairing_err = (pairing - 1.0).norm();
    let t_points = ctx.exp.t_points();
    let rec = reconstruction_check(phi, &ctx.window, &gamma, grid, &t_points, ctx.tol.diagram)?;
    let status = rec.status.and(Status::from_bool(pairing_err <= ctx.tol.pairing));
    out.push(grid_meta_phase(
        CheckRecord::new(
            format!("diagram.commutes[{name}]"),
            "V*_gamma V_psi phi = phi, gamma = psi / ||psi||^2",
            status,
        )
        .measure("max_rel_error", rec.max_rel_error)
        .measure("pairing_error", pairing_err)
        .tol("rel", ctx.tol.diagram)
        .tol("pairing", ctx.tol.pairing),
        grid,
    ));
    Ok(out)
}

/// Finiteness of the inductive seminorms for some `(h, n)` against
/// finiteness of all projective ones.
pub fn lemma31_record(
    ctx: &Context,
    setup: &ProjectiveSetup,
    name: &str,
    phi: &HermiteGaussian,
) -> Result<CheckRecord> {
    let log_bound = ctx.tol.roumieu_bound.ln();
    let mut inductive_finite = false;
    let mut inductive_rows = 0usize;
    for &h in &ctx.spec.h_grid {
        for &n in &ctx.spec.n_list {
            let s = seminorm_h(phi, &ctx.m, h, &ctx.system.member(n)?, &ctx.exp.spatial, ctx.spec.alpha_max)?;
            inductive_rows += 1;
            if s.value == 0.0 || (s.is_interior() && s.log_value < log_bound) {
                inductive_finite = true;
            }
        }
    }
    let weights = [setup.v.as_weight_function(), setup.vbar.as_weight_function()];
    let mut projective_finite = true;
    let mut projective_open = false;
    let mut worst = f64::NEG_INFINITY;
    for (_, r) in &setup.r_prime {
        for w in &weights {
            let s = projective_seminorm(ctx, phi, r, w)?;
            worst = worst.max(s.log_value);
            if s.value == 0.0 {
                continue;
            }
            if s.log_value >= log_bound {
                projective_finite = false;
            } else if !s.is_interior() {
                projective_open = true;
            }
        }
    }
    let agree = inductive_finite == projective_finite;
    let status = if !agree {
        Status::Fail
    } else if projective_open {
        Status::Inconclusive
    } else {
        Status::Pass
    };
    Ok(CheckRecord::new(
        format!("lemma31[{name}]"),
        "(exists h, n) ||phi||_{h,v_n} < inf  <=>  (all r, vbar) ||phi||_{r,vbar} < inf",
        status,
    )
    .measure("inductive_finite", f64::from(u8::from(inductive_finite)))
    .measure("projective_finite", f64::from(u8::from(projective_finite)))
    .measure("worst_log_projective", worst)
    .tol("bound", ctx.tol.roumieu_bound)
    .grid_meta("inductive_rows", inductive_rows as f64)
    .grid_meta("projective_rows", (setup.r_prime.len() * weights.len()) as f64)
    .grid_meta("alpha_max", ctx.spec.alpha_max as f64))
}

fn gaussian_ok(records: &[CheckRecord]) -> bool {
    records
        .iter()
        .filter(|r| r.name.starts_with("hypothesis.gaussian_window"))
        .all(|r| r.status == Status::Pass)
}

/// Runs the configured suite.
pub fn run_suite(exp: &Experiment, kind: SuiteKind) -> Result<Vec<CheckRecord>> {
    let ctx = Context::new(exp)?;
    let mut out = hypotheses(&ctx)?;
    if !gaussian_ok(&out) {
        return Ok(out);
    }
    let want_gg = matches!(kind, SuiteKind::PropStftGg | SuiteKind::TheoremDiagram | SuiteKind::All);
    let want_proj = !matches!(kind, SuiteKind::PropStftGg);
    let want_diagram = matches!(kind, SuiteKind::TheoremDiagram | SuiteKind::All);
    let want_lemma = matches!(kind, SuiteKind::Lemma31 | SuiteKind::All);
    let want_proj_records = matches!(
        kind,
        SuiteKind::PropStftProjective | SuiteKind::TheoremDiagram | SuiteKind::All
    );

    let setup = if want_proj { Some(projective_setup(&ctx)?) } else { None };
    if let Some(s) = &setup {
        if want_proj_records {
            out.extend(s.records.iter().cloned());
        }
    }
    if want_diagram {
        if let Some(rec) = mollify_record(&ctx)? {
            out.push(rec);
        }
    }
    for (name, phi) in &exp.family {
        if want_gg {
            out.extend(stft_records(&ctx, name, phi)?);
        }
        let mut log_proj = f64::NEG_INFINITY;
        if let (Some(s), true) = (&setup, want_proj_records) {
            let (recs, best) = projective_records(&ctx, s, name, phi)?;
            out.extend(recs);
            log_proj = best;
        }
        if want_diagram {
            out.extend(diagram_records(&ctx, name, phi, log_proj)?);
        }
        if want_lemma {
            out.push(lemma31_record(&ctx, setup.as_ref().expect("projective setup"), name, phi)?);
        }
    }
    Ok(out)
}

/// The report for `verify`.
pub fn verify_report(exp: &Experiment) -> Result<VerificationReport> {
    let checks = run_suite(exp, exp.config.suite.kind)?;
    Ok(VerificationReport::new(
        "verify",
        exp.config.to_value(),
        exp.family_names(),
        checks,
    ))
}
