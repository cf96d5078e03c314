//! The computations behind each CLI subcommand. Every command yields a
//! report plus optional tables and plots.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::Experiment;
use crate::error::Result;
use crate::export::{heatmap, line_plot, num, Table};
use crate::komatsu::{certify_regularization, product_sequence, regularize};
use crate::numeric::{logspace, rel_diff};
use crate::report::{CheckRecord, Status, VerificationReport};
use crate::seminorm::seminorm_rj;
use crate::sequence::{check_m1, check_m2prime_decay, fit_m2prime, precedes_log_growth};
use crate::stft::{isometry_check, reconstruction_check, stft_direct, stft_grid};
use crate::verify::{self, Context};
use crate::weights::{
    check_decreasing, condition_v_witness_check, nachbin_membership, v_witness_from_chain, Membership,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Assoc,
    CheckSeq,
    Regularize,
    Weights,
    Seminorm,
    Stft,
    Verify,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Assoc => "assoc",
            CommandKind::CheckSeq => "check-seq",
            CommandKind::Regularize => "regularize",
            CommandKind::Weights => "weights",
            CommandKind::Seminorm => "seminorm",
            CommandKind::Stft => "stft",
            CommandKind::Verify => "verify",
        }
    }
}

/// Everything a command produces.
#[derive(Debug, Clone)]
pub struct Output {
    pub report: VerificationReport,
    /// `(file stem, table)`; the first one is the primary table.
    pub tables: Vec<(String, Table)>,
    /// `(file stem, svg)`.
    pub plots: Vec<(String, String)>,
}

pub fn run(kind: CommandKind, exp: &Experiment, plot: bool) -> Result<Output> {
    let (checks, tables, plots) = match kind {
        CommandKind::Assoc => assoc(exp, plot)?,
        CommandKind::CheckSeq => check_seq(exp)?,
        CommandKind::Regularize => regularize_cmd(exp, plot)?,
        CommandKind::Weights => weights(exp, plot)?,
        CommandKind::Seminorm => seminorm(exp)?,
        CommandKind::Stft => stft(exp, plot)?,
        CommandKind::Verify => {
            let checks = verify::run_suite(exp, exp.config.suite.kind)?;
            let table = checks_table(&checks);
            (checks, vec![("checks".to_string(), table)], Vec::new())
        }
    };
    Ok(Output {
        report: VerificationReport::new(kind.name(), exp.config.to_value(), exp.family_names(), checks),
        tables,
        plots,
    })
}

type Parts = (Vec<CheckRecord>, Vec<(String, Table)>, Vec<(String, String)>);

/// `name,status,anchor` for every record.
pub fn checks_table(checks: &[CheckRecord]) -> Table {
    let mut t = Table::new(["name", "status", "anchor"]);
    for c in checks {
        t.push(vec![c.name.clone(), c.status.to_string(), c.anchor.clone()]);
    }
    t
}

fn assoc(exp: &Experiment, plot: bool) -> Result<Parts> {
    let g = exp.config.grids.assoc.clone().expect("resolved");
    let mut ts = logspace(g.lo, g.hi, g.n);
    // integer anchors where M is known in closed form for p!
    if let (Some(&lo), Some(&hi)) = (ts.first(), ts.last()) {
        ts.extend([1.0, 2.0].into_iter().filter(|&t| t >= lo && t <= hi));
    }
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    let mut headers = vec!["t".to_string()];
    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut checks = Vec::new();
    for (name, seq) in &exp.sequences {
        let fast: Vec<f64> = ts.iter().map(|&t| seq.associated_function(t)).collect::<Result<_>>()?;
        let brute: Vec<f64> = ts
            .iter()
            .map(|&t| seq.associated_function_brute(t))
            .collect::<Result<_>>()?;
        let worst = fast
            .iter()
            .zip(&brute)
            .map(|(a, b)| if a == b { 0.0 } else { rel_diff(*a, *b) })
            .fold(0.0, f64::max);
        let monotone = fast.windows(2).all(|w| w[1] >= w[0]);
        let ok = worst <= exp.config.tolerances.assoc_rel && monotone && fast.iter().all(|v| *v >= 0.0);
        checks.push(
            CheckRecord::new(
                format!("assoc[{name}]"),
                "M(t) = sup_p log(t^p M_0 / M_p), fast = brute, non-decreasing",
                Status::from_bool(ok),
            )
            .measure("max_rel_diff", worst)
            .measure("monotone", f64::from(u8::from(monotone)))
            .tol("rel", exp.config.tolerances.assoc_rel)
            .grid_meta("t_lo", ts[0])
            .grid_meta("t_hi", *ts.last().expect("non-empty grid"))
            .grid_meta("points", ts.len() as f64),
        );
        headers.push(format!("M[{name}]"));
        columns.push(fast);
    }
    let m = exp.sequence(&exp.config.suite.m)?;
    for (name, r) in exp.r_list() {
        let prod = product_sequence(&m, &r)?;
        headers.push(format!("M_r[{name}]"));
        columns.push(ts.iter().map(|&t| prod.associated_function(t)).collect::<Result<_>>()?);
    }
    let mut table = Table::new(headers.clone());
    for (i, t) in ts.iter().enumerate() {
        let mut row = vec![*t];
        row.extend(columns.iter().map(|c| c[i]));
        table.push_numbers(&row);
    }
    let mut plots = Vec::new();
    if plot {
        let series: Vec<(String, Vec<(f64, f64)>)> = headers[1..]
            .iter()
            .zip(&columns)
            .map(|(h, c)| (h.clone(), ts.iter().zip(c).map(|(t, v)| (t.log10(), *v)).collect()))
            .collect();
        plots.push(("assoc".to_string(), line_plot("associated functions", "log10 t", "M(t)", &series)));
    }
    Ok((checks, vec![("assoc".to_string(), table)], plots))
}

fn check_seq(exp: &Experiment) -> Result<Parts> {
    const LEN: usize = verify::SEQUENCE_CHECK_LEN;
    let mut checks = Vec::new();
    let mut table = Table::new(["sequence", "p", "log_M_p", "log_ratio"]);
    let ts = logspace(-2.0, 3.0, 101);
    for (name, seq) in &exp.sequences {
        let m1 = check_m1(seq, LEN)?;
        checks.push(
            CheckRecord::new(format!("m1[{name}]"), "M_p^2 <= M_{p-1} M_{p+1}", Status::from_bool(m1.holds))
                .grid_meta("orders", LEN as f64),
        );
        let w = fit_m2prime(seq, LEN)?;
        checks.push(
            CheckRecord::new(
                format!("m2prime[{name}]"),
                "M_{p+1} <= C0 H^{p+1} M_p",
                Status::from_bool(w.verify(seq)?),
            )
            .measure("c0", w.c0)
            .measure("h", w.h)
            .grid_meta("orders", LEN as f64),
        );
        for d in 1..=2 {
            let rep = check_m2prime_decay(seq, &w, d, &ts, 1e-12)?;
            checks.push(
                CheckRecord::new(
                    format!("m2prime_decay[{name},d={d}]"),
                    "e^{M(t) - M(H^{d+1} t)} <= (2 C0)^{d+1} / (1 + t^{d+1})",
                    Status::from_bool(rep.passed),
                )
                .measure("max_ratio", rep.max_ratio)
                .tol("rel", rep.tolerance)
                .grid_meta("points", ts.len() as f64),
            );
        }
        let prec = precedes_log_growth(seq, LEN, exp.config.tolerances.precedes_threshold)?;
        checks.push(
            CheckRecord::new(
                format!("precedes_log[{name}]"),
                "(log p)^p < M_p",
                Status::from_bool(prec.verdict),
            )
            .measure("last_ratio", prec.last)
            .tol("threshold", prec.threshold),
        );
        checks.push(verify::gaussian_window_record(seq)?);
        let logs = seq.log_values(LEN + 1)?;
        for p in 0..=LEN {
            let ratio = if p == 0 { f64::NAN } else { logs[p] - logs[p - 1] };
            table.push(vec![name.clone(), p.to_string(), num(logs[p]), num(ratio)]);
        }
    }
    Ok((checks, vec![("sequences".to_string(), table)], Vec::new()))
}

fn regularize_cmd(exp: &Experiment, plot: bool) -> Result<Parts> {
    let ctx = Context::new(exp)?;
    let j_max = ctx.spec.j_max;
    let mut checks = Vec::new();
    let mut table = Table::new(["r", "j", "r_j", "r_prime_j"]);
    let mut series = Vec::new();
    for (name, r) in exp.r_list() {
        let reg = regularize(&r, j_max)?;
        let cert = certify_regularization(&ctx.m, &r, &reg, j_max)?;
        checks.push(
            CheckRecord::new(
                format!("regularize[{name}]"),
                "r'_j <= r_j, r'_j increasing, r'_{j+1} <= 2^{j+1} r'_j",
                Status::from_bool(cert.passed),
            )
            .measure("c", cert.c)
            .grid_meta("j_max", j_max as f64),
        );
        let orig = r.log_values(j_max + 1)?;
        let new = reg.log_values(j_max + 1)?;
        for j in 0..=j_max {
            table.push(vec![name.clone(), j.to_string(), num(orig[j].exp()), num(new[j].exp())]);
        }
        series.push((format!("log r'[{name}]"), new.iter().enumerate().map(|(j, v)| (j as f64, *v)).collect()));
    }
    let plots = if plot {
        vec![("regularize".to_string(), line_plot("regularized sequences", "j", "log r'_j", &series))]
    } else {
        Vec::new()
    };
    Ok((checks, vec![("regularize".to_string(), table)], plots))
}

fn weights(exp: &Experiment, plot: bool) -> Result<Parts> {
    let ctx = Context::new(exp)?;
    let sys = ctx.system;
    let ns = ctx.spec.n_list.clone();
    let n_top = *ns.iter().max().expect("non-empty");
    let mut checks = verify::hypotheses(&ctx)?
        .into_iter()
        .filter(|r| r.name == "hypothesis.admissibility" || r.name == "hypothesis.condition_s")
        .collect::<Vec<_>>();
    let dec = check_decreasing(sys, 2 * n_top, &exp.spatial)?;
    let mut rec = CheckRecord::new("decreasing", "v_{n+1} <= v_n", Status::from_bool(dec.holds))
        .grid_meta("n_max", dec.n_max as f64)
        .grid_meta("extent", exp.spatial.extent)
        .grid_meta("per_axis", exp.spatial.per_axis as f64);
    if let Some(v) = &dec.violation {
        rec = rec.measure("violation_n", v.n as f64).measure("log_excess", v.log_excess);
    }
    checks.push(rec);

    let lambdas: Vec<f64> = (1..=ctx.spec.vbar_terms.max(1)).map(|j| (j + 1) as f64).collect();
    let (v, n_of_n) = v_witness_from_chain(sys, &lambdas, &ns)?;
    let vw = condition_v_witness_check(sys, &lambdas, &v, &n_of_n, &exp.spatial)?;
    let mut rec = CheckRecord::new(
        "condition_v_witness",
        "inf_{j <= N} lambda_j v_j <= max(v_n / n, v)",
        Status::from_bool(vw.holds),
    );
    for row in &vw.rows {
        rec = rec.measure(&format!("log_excess[{}]", row.n), row.max_log_excess);
    }
    checks.push(rec);

    let setup = verify::projective_setup(&ctx)?;
    checks.extend(setup.records.iter().filter(|r| r.name == "vbar").cloned());
    let mem = nachbin_membership(&setup.vbar, sys, n_top, &exp.spatial)?;
    let status = match mem.verdict {
        Membership::Member => Status::Pass,
        Membership::NonMember => Status::Fail,
        Membership::Inconclusive => Status::Inconclusive,
    };
    checks.push(
        CheckRecord::new("vbar_membership", "sup vbar / v_n < inf for n <= max chain index", status)
            .measure("max_log_ratio", mem.max_log_ratio())
            .grid_meta("n_max", n_top as f64),
    );
    if let Some(rec) = verify::mollify_record(&ctx)? {
        checks.push(rec);
    }

    let mut headers = vec!["x".to_string()];
    headers.extend(ns.iter().map(|n| format!("log_v[{n}]")));
    headers.push("log_v".into());
    headers.push("log_vbar".into());
    let mut table = Table::new(headers.clone());
    let members = ns.iter().map(|&n| sys.member(n)).collect::<Result<Vec<_>>>()?;
    let axis = exp.spatial.axis();
    let mut cols: Vec<Vec<(f64, f64)>> = vec![Vec::new(); members.len() + 2];
    for &x in &axis {
        let mut p = vec![0.0; exp.dim()];
        p[0] = x;
        let mut row = vec![x];
        for w in &members {
            row.push(w.log_eval(&p)?);
        }
        row.push(v.log_eval(&p)?);
        row.push(setup.vbar.log_eval(&p)?);
        for (k, c) in cols.iter_mut().enumerate() {
            c.push((x, row[k + 1]));
        }
        table.push_numbers(&row);
    }
    let plots = if plot {
        let series = headers[1..].iter().cloned().zip(cols).collect::<Vec<_>>();
        vec![("weights".to_string(), line_plot("weights along the first axis", "x", "log weight", &series))]
    } else {
        Vec::new()
    };
    Ok((checks, vec![("weights".to_string(), table)], plots))
}

fn seminorm(exp: &Experiment) -> Result<Parts> {
    let ctx = Context::new(exp)?;
    let v = ctx.nachbin_weight()?.as_weight_function();
    let mut checks = Vec::new();
    let mut table = Table::new(["function", "order", "log_term"]);
    for (name, phi) in &exp.family {
        let (n, h, s) = verify::inductive_norm(&ctx, phi)?;
        let status = if s.value == 0.0 || s.is_interior() {
            Status::Pass
        } else {
            Status::Inconclusive
        };
        checks.push(
            CheckRecord::new(
                format!("seminorm[{name}]"),
                "sup_{alpha,x} h^{|alpha|} |d^alpha phi(x)| v_n(x) / M_alpha attained inside the truncation",
                status,
            )
            .measure("value", s.value)
            .measure("log_value", s.log_value)
            .measure("n", n as f64)
            .measure("h", h)
            .measure("argmax_order", s.argmax_alpha.iter().sum::<usize>() as f64)
            .grid_meta("alpha_max", s.alpha_max as f64)
            .grid_meta("extent", exp.spatial.extent)
            .grid_meta("per_axis", exp.spatial.per_axis as f64),
        );
        for (k, t) in s.order_terms.iter().enumerate() {
            table.push(vec![name.clone(), k.to_string(), num(*t)]);
        }
        for (rname, r) in exp.r_list() {
            let p = seminorm_rj(phi, &ctx.m, &r, &v, &exp.spatial, ctx.spec.alpha_max)?;
            let status = if p.value == 0.0 || p.is_interior() {
                Status::Pass
            } else {
                Status::Inconclusive
            };
            checks.push(
                CheckRecord::new(
                    format!("seminorm[{name},{rname}]"),
                    "sup_{alpha,x} |d^alpha phi(x)| v(x) / (M_alpha prod_{j<=|alpha|} r_j) attained inside the truncation",
                    status,
                )
                .measure("value", p.value)
                .measure("log_value", p.log_value)
                .grid_meta("alpha_max", p.alpha_max as f64),
            );
        }
    }
    Ok((checks, vec![("seminorm".to_string(), table)], Vec::new()))
}

fn stft(exp: &Experiment, plot: bool) -> Result<Parts> {
    let psi = exp.window()?;
    let grid = &exp.phase;
    let tol = &exp.config.tolerances;
    let s_samples = exp.config.suite.direct_samples;
    let t_points = exp.t_points();
    let mut rng = ChaCha8Rng::seed_from_u64(exp.config.seed);
    let mut checks = Vec::new();
    let mut tables = Vec::new();
    let mut plots = Vec::new();
    let d = exp.dim();
    for (name, phi) in &exp.family {
        let v = stft_grid(phi, &psi, grid)?;
        let peak = v.max_abs();
        let mut worst: f64 = 0.0;
        for _ in 0..s_samples {
            let row = rng.gen_range(0..grid.rows());
            let col = rng.gen_range(0..grid.cols());
            let direct = stft_direct(phi, &psi, &grid.x_point(row), &grid.xi_point(col))?;
            worst = worst.max((direct - v.get(row, col)).norm());
        }
        let rel = if peak == 0.0 { worst } else { worst / peak };
        checks.push(
            CheckRecord::new(
                format!("stft_grid[{name}]"),
                "grid samples of V_psi phi = direct quadrature",
                Status::from_bool(rel <= tol.direct_vs_grid),
            )
            .measure("max_rel_diff", rel)
            .tol("rel", tol.direct_vs_grid)
            .grid_meta("samples", s_samples as f64)
            .grid_meta("seed", exp.config.seed as f64),
        );
        let iso = isometry_check(phi, &psi, grid)?;
        let iso_status = if iso.expected == 0.0 && iso.measured == 0.0 {
            Status::Pass
        } else if iso.inconclusive {
            Status::Inconclusive
        } else {
            Status::from_bool((iso.ratio - 1.0).abs() <= tol.isometry)
        };
        checks.push(
            CheckRecord::new(format!("isometry[{name}]"), "||V_psi phi||_2 = ||psi||_2 ||phi||_2", iso_status)
                .measure("ratio", iso.ratio)
                .tol("abs", tol.isometry),
        );
        let rec = reconstruction_check(phi, &psi, &psi, grid, &t_points, tol.reconstruction)?;
        checks.push(
            CheckRecord::new(
                format!("reconstruction[{name}]"),
                "(gamma,psi)^{-1} V*_gamma V_psi phi = phi",
                rec.status,
            )
            .measure("max_rel_error", rec.max_rel_error)
            .tol("rel", tol.reconstruction),
        );

        let mut headers: Vec<String> = (0..d).map(|k| format!("x{k}")).collect();
        headers.extend((0..d).map(|k| format!("xi{k}")));
        headers.push("re".into());
        headers.push("im".into());
        let mut table = Table::new(headers);
        for row in 0..grid.rows() {
            let x = grid.x_point(row);
            for col in 0..grid.cols() {
                let mut cells = x.clone();
                cells.extend(grid.xi_point(col));
                let z = v.get(row, col);
                cells.push(z.re);
                cells.push(z.im);
                table.push_numbers(&cells);
            }
        }
        tables.push((format!("stft_{name}"), table));
        if plot && d == 1 {
            let mags: Vec<f64> = v.values.iter().map(|z| z.norm()).collect();
            plots.push((
                format!("stft_{name}"),
                heatmap(
                    &format!("|V_psi {name}|"),
                    &mags,
                    grid.rows(),
                    grid.cols(),
                    (grid.xi_min, grid.xi_max),
                    (grid.x_min, grid.x_max),
                    128,
                ),
            ));
        }
    }
    Ok((checks, tables, plots))
}
