//! Short-time Fourier transform `V_ψ f(x, ξ) = ∫ f(t) conj(ψ(t - x)) e^{-2πiξ·t} dt`
//! of Hermite–Gaussian functions, its adjoint, and the grid certificates
//! built on them.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::hermite::{AxisGaussian, HermiteGaussian};
use crate::numeric::{adaptive_trapezoid, par_map};
use crate::report::Status;
use crate::seminorm::{seminorm_h, SeminormResult};
use crate::sequence::{M2PrimeWitness, WeightSequence};
use crate::weights::{PointGrid, WeightFunction};

/// `u²` at the truncation radius, in units of the pair's Gaussian rate:
/// the discarded mass is below `e^{-40} / √(40π)` of the pair's own mass.
const TRUNCATION_EXPONENT: f64 = 40.0;

/// Largest accepted ratio of outer-frame to peak magnitude.
pub const EDGE_TOL: f64 = 1e-10;

/// Relative drift allowed under grid refinement.
pub const DRIFT_TOL: f64 = 0.05;

/// Samples below this fraction of the peak are quadrature noise and are
/// left out of weighted suprema.
pub const NOISE_FLOOR: f64 = 1e-13;

/// Uniform phase-space grid. Each axis is half-open: `x_min + k Δx` for
/// `k < nx`, with `Δx = (x_max - x_min) / nx`; likewise for `ξ`. The same
/// axis is used for every coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseSpaceGrid {
    pub dim: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    pub xi_min: f64,
    pub xi_max: f64,
    pub nxi: usize,
    /// Time samples per x step in the FFT path.
    #[serde(default = "default_oversample")]
    pub oversample: usize,
}

fn default_oversample() -> usize {
    2
}

impl PhaseSpaceGrid {
    pub fn symmetric(dim: usize, x_extent: f64, nx: usize, xi_extent: f64, nxi: usize) -> Self {
        Self {
            dim,
            x_min: -x_extent,
            x_max: x_extent,
            nx,
            xi_min: -xi_extent,
            xi_max: xi_extent,
            nxi,
            oversample: default_oversample(),
        }
    }

    /// `[-8, 8)²` with 256 nodes per axis in one dimension; `[-3, 3)^4` with
    /// 36 nodes per axis in two.
    pub fn default_for(dim: usize) -> Self {
        match dim {
            1 => Self::symmetric(1, 8.0, 256, 8.0, 256),
            _ => Self::symmetric(dim, 3.0, 36, 3.0, 36),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=2).contains(&self.dim) {
            return Err(Error::Unsupported(format!("phase space dimension {} (only 1 and 2)", self.dim)));
        }
        let ok = self.nx >= 2
            && self.nxi >= 2
            && self.oversample >= 1
            && self.x_max > self.x_min
            && self.xi_max > self.xi_min
            && [self.x_min, self.x_max, self.xi_min, self.xi_max].iter().all(|v| v.is_finite());
        if !ok {
            return Err(invalid("phase-space grid needs increasing finite extents and two nodes per axis"));
        }
        Ok(())
    }

    pub fn x_step(&self) -> f64 {
        (self.x_max - self.x_min) / self.nx as f64
    }

    pub fn xi_step(&self) -> f64 {
        (self.xi_max - self.xi_min) / self.nxi as f64
    }

    pub fn x_nodes(&self) -> Vec<f64> {
        (0..self.nx).map(|k| self.x_min + k as f64 * self.x_step()).collect()
    }

    pub fn xi_nodes(&self) -> Vec<f64> {
        (0..self.nxi).map(|k| self.xi_min + k as f64 * self.xi_step()).collect()
    }

    /// `max |ξ| · Δx ≤ 1/2` on every axis.
    pub fn check_nyquist(&self) -> Result<()> {
        let xi_extent = self.xi_min.abs().max(self.xi_max.abs());
        if xi_extent * self.x_step() > 0.5 + 1e-12 {
            return Err(Error::Nyquist {
                axis: 0,
                xi_extent,
                x_step: self.x_step(),
            });
        }
        Ok(())
    }

    /// Same extents, twice the nodes per axis.
    pub fn refined(&self) -> Self {
        Self {
            nx: 2 * self.nx,
            nxi: 2 * self.nxi,
            ..self.clone()
        }
    }

    /// Twice the extents at the same steps.
    pub fn extended(&self) -> Self {
        Self {
            x_min: 2.0 * self.x_min,
            x_max: 2.0 * self.x_max,
            nx: 2 * self.nx,
            xi_min: 2.0 * self.xi_min,
            xi_max: 2.0 * self.xi_max,
            nxi: 2 * self.nxi,
            ..self.clone()
        }
    }

    pub fn rows(&self) -> usize {
        self.nx.pow(self.dim as u32)
    }

    pub fn cols(&self) -> usize {
        self.nxi.pow(self.dim as u32)
    }

    fn split(index: usize, n: usize, dim: usize) -> Vec<usize> {
        let mut out = vec![0; dim];
        let mut i = index;
        for slot in out.iter_mut().rev() {
            *slot = i % n;
            i /= n;
        }
        out
    }

    pub fn x_point(&self, row: usize) -> Vec<f64> {
        Self::split(row, self.nx, self.dim)
            .into_iter()
            .map(|k| self.x_min + k as f64 * self.x_step())
            .collect()
    }

    pub fn xi_point(&self, col: usize) -> Vec<f64> {
        Self::split(col, self.nxi, self.dim)
            .into_iter()
            .map(|k| self.xi_min + k as f64 * self.xi_step())
            .collect()
    }

    pub fn is_edge(&self, row: usize, col: usize) -> bool {
        Self::split(row, self.nx, self.dim)
            .into_iter()
            .any(|k| k == 0 || k + 1 == self.nx)
            || Self::split(col, self.nxi, self.dim)
                .into_iter()
                .any(|k| k == 0 || k + 1 == self.nxi)
    }

    /// `(Δx Δξ)^d`.
    pub fn cell(&self) -> f64 {
        (self.x_step() * self.xi_step()).powi(self.dim as i32)
    }
}

/// Samples of `V_ψ f` on a phase-space grid, rows indexed by `x`, columns
/// by `ξ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampledStft {
    pub grid: PhaseSpaceGrid,
    pub window: String,
    pub truncation_radius: f64,
    pub tail_bound: f64,
    #[serde(skip)]
    pub values: Vec<Complex64>,
}

impl SampledStft {
    pub fn zeros(grid: PhaseSpaceGrid, window: impl Into<String>) -> Self {
        let n = grid.rows() * grid.cols();
        Self {
            grid,
            window: window.into(),
            truncation_radius: 0.0,
            tail_bound: 0.0,
            values: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.values[row * self.grid.cols() + col]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `(Σ |V|² (Δx Δξ)^d)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        let rows: Vec<f64> = self
            .values
            .par_chunks(self.grid.cols())
            .map(|r| r.iter().map(|v| v.norm_sqr()).sum::<f64>())
            .collect();
        (crate::numeric::pairwise_sum(&rows) * self.grid.cell()).sqrt()
    }

    /// Largest magnitude on the outer frame divided by the largest overall.
    pub fn edge_fraction(&self) -> f64 {
        let peak = self.max_abs();
        if peak == 0.0 {
            return 0.0;
        }
        let cols = self.grid.cols();
        let edge = (0..self.values.len())
            .filter(|&i| self.grid.is_edge(i / cols, i % cols))
            .map(|i| self.values[i].norm())
            .fold(0.0, f64::max);
        edge / peak
    }
}

/// Geometry of the product `g(t) conj(h(t - x))` for unit axis factors.
struct PairGeometry {
    rate: f64,
    center: f64,
    log_peak: f64,
}

fn pair_geometry(g: &AxisGaussian, h: &AxisGaussian, x: f64) -> PairGeometry {
    let (a, p) = (g.width, g.center);
    let (b, q) = (h.width, h.center + x);
    let s = a + b;
    PairGeometry {
        rate: s,
        center: (a * p + b * q) / s,
        log_peak: -a * b / s * (p - q) * (p - q),
    }
}

fn truncation_radius(rate: f64) -> f64 {
    (TRUNCATION_EXPONENT / rate).sqrt()
}

/// Tail fraction of a Gaussian of any rate truncated at [`truncation_radius`].
fn relative_tail() -> f64 {
    (-TRUNCATION_EXPONENT).exp() / (TRUNCATION_EXPONENT * PI).sqrt()
}

/// Integrand `g(t) conj(h(t - x)) e^{-2πiξt}`.
fn pair_integrand(g: &AxisGaussian, h: &AxisGaussian, x: f64, xi: f64, t: f64) -> Complex64 {
    g.eval(t) * h.eval(t - x).conj() * Complex64::from_polar(1.0, -2.0 * PI * xi * t)
}

/// Quadrature value with its truncation metadata.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DirectValue {
    pub value: Complex64,
    pub truncation_radius: f64,
    pub tail_bound: f64,
    pub converged: bool,
}

/// `V_ψ f(x, ξ)` by adaptive trapezoid quadrature on truncated intervals,
/// factorized over term pairs and coordinates.
pub fn stft_direct_detailed(f: &HermiteGaussian, psi: &HermiteGaussian, x: &[f64], xi: &[f64]) -> Result<DirectValue> {
    let d = f.dim();
    if psi.dim() != d || x.len() != d || xi.len() != d {
        return Err(Error::Dimension {
            expected: d,
            got: if psi.dim() != d { psi.dim() } else { x.len().min(xi.len()) },
        });
    }
    let mut value = Complex64::new(0.0, 0.0);
    let mut scale = 0.0;
    let mut radius: f64 = 0.0;
    let mut converged = true;
    for ft in f.terms() {
        for pt in psi.terms() {
            let mut v = ft.amplitude * pt.amplitude.conj();
            let mut mass = ft.amplitude.norm() * pt.amplitude.norm();
            for i in 0..d {
                let (g, h) = (ft.axis(i), pt.axis(i));
                let geo = pair_geometry(&g, &h, x[i]);
                let r = truncation_radius(geo.rate);
                radius = radius.max(r);
                let axis_mass = geo.log_peak.exp() * (PI / geo.rate).sqrt();
                mass *= axis_mass;
                if axis_mass == 0.0 {
                    v = Complex64::new(0.0, 0.0);
                    continue;
                }
                let res = adaptive_trapezoid(
                    |t| pair_integrand(&g, &h, x[i], xi[i], t),
                    geo.center - r,
                    geo.center + r,
                    32,
                    1e-16 * axis_mass,
                    16,
                );
                converged &= res.converged;
                v *= res.value;
            }
            value += v;
            scale += mass;
        }
    }
    Ok(DirectValue {
        value,
        truncation_radius: radius,
        tail_bound: scale * d as f64 * relative_tail(),
        converged,
    })
}

pub fn stft_direct(f: &HermiteGaussian, psi: &HermiteGaussian, x: &[f64], xi: &[f64]) -> Result<Complex64> {
    Ok(stft_direct_detailed(f, psi, x, xi)?.value)
}

/// Per-axis table `∫ g(t) conj(h(t - x_i)) e^{-2πiξ_k t} dt` for all grid
/// nodes, computed by folding lattice samples into one FFT per row.
fn axis_table(g: &AxisGaussian, h: &AxisGaussian, grid: &PhaseSpaceGrid, fft: Option<&Arc<dyn Fft<f64>>>) -> Vec<Complex64> {
    let dx = grid.x_step();
    let dt = dx / grid.oversample as f64;
    let dxi = grid.xi_step();
    let nxi = grid.nxi;
    let xi_nodes = grid.xi_nodes();
    let rows: Vec<Vec<Complex64>> = (0..grid.nx)
        .into_par_iter()
        .map(|ix| {
            let x = grid.x_min + ix as f64 * dx;
            let geo = pair_geometry(g, h, x);
            let mut row = vec![Complex64::new(0.0, 0.0); nxi];
            if geo.log_peak.exp() == 0.0 {
                return row;
            }
            let r = truncation_radius(geo.rate);
            let j0 = ((geo.center - r - grid.x_min) / dt).ceil() as i64;
            let j1 = ((geo.center + r - grid.x_min) / dt).floor() as i64;
            match fft {
                Some(plan) => {
                    let len = plan.len();
                    let mut buf = vec![Complex64::new(0.0, 0.0); len];
                    for j in j0..=j1 {
                        let t = grid.x_min + j as f64 * dt;
                        let v = g.eval(t) * h.eval(t - x).conj() * Complex64::from_polar(dt, -2.0 * PI * grid.xi_min * t);
                        buf[j.rem_euclid(len as i64) as usize] += v;
                    }
                    plan.process(&mut buf);
                    for (k, slot) in row.iter_mut().enumerate() {
                        *slot = buf[k] * Complex64::from_polar(1.0, -2.0 * PI * k as f64 * dxi * grid.x_min);
                    }
                }
                None => {
                    let samples: Vec<(f64, Complex64)> = (j0..=j1)
                        .map(|j| {
                            let t = grid.x_min + j as f64 * dt;
                            (t, g.eval(t) * h.eval(t - x).conj() * dt)
                        })
                        .collect();
                    for (k, slot) in row.iter_mut().enumerate() {
                        let xi = xi_nodes[k];
                        *slot = samples
                            .iter()
                            .map(|(t, v)| v * Complex64::from_polar(1.0, -2.0 * PI * xi * t))
                            .sum();
                    }
                }
            }
            row
        })
        .collect();
    rows.into_iter().flatten().collect()
}

/// FFT length `1/(Δt Δξ)` when it is an integer no smaller than the
/// number of frequency nodes.
fn fft_length(grid: &PhaseSpaceGrid, dt: f64, n_needed: usize) -> Option<usize> {
    let l = 1.0 / (dt * grid.xi_step());
    let r = l.round();
    ((l - r).abs() <= 1e-9 * l && r >= n_needed as f64).then_some(r as usize)
}

/// `V_ψ f` on every grid node.
pub fn stft_grid(f: &HermiteGaussian, psi: &HermiteGaussian, grid: &PhaseSpaceGrid) -> Result<SampledStft> {
    grid.validate()?;
    grid.check_nyquist()?;
    let d = grid.dim;
    if f.dim() != d || psi.dim() != d {
        return Err(Error::Dimension {
            expected: d,
            got: if f.dim() != d { f.dim() } else { psi.dim() },
        });
    }
    let mut out = SampledStft::zeros(grid.clone(), window_label(psi));
    let dt = grid.x_step() / grid.oversample as f64;
    let plan = fft_length(grid, dt, grid.nxi).map(|len| FftPlanner::new().plan_fft_forward(len));
    let nx = grid.nx;
    let nxi = grid.nxi;
    let mut scale = 0.0;
    for ft in f.terms() {
        for pt in psi.terms() {
            let c = ft.amplitude * pt.amplitude.conj();
            let tables: Vec<Vec<Complex64>> = (0..d)
                .map(|i| axis_table(&ft.axis(i), &pt.axis(i), grid, plan.as_ref()))
                .collect();
            let rate = ft.width + pt.width;
            out.truncation_radius = out.truncation_radius.max(truncation_radius(rate));
            scale += ft.amplitude.norm() * pt.amplitude.norm() * (PI / rate).sqrt().powi(d as i32);
            let cols = grid.cols();
            out.values.par_chunks_mut(cols).enumerate().for_each(|(row, slot)| {
                let ix = PhaseSpaceGrid::split(row, nx, d);
                for (col, v) in slot.iter_mut().enumerate() {
                    let ik = PhaseSpaceGrid::split(col, nxi, d);
                    let mut p = c;
                    for i in 0..d {
                        p *= tables[i][ix[i] * nxi + ik[i]];
                    }
                    *v += p;
                }
            });
        }
    }
    out.tail_bound = scale * d as f64 * relative_tail();
    Ok(out)
}

fn window_label(psi: &HermiteGaussian) -> String {
    format!("hermite_gaussian[{} terms, d={}]", psi.terms().len(), psi.dim())
}

/// Samples of `V*_γ F` with the outer-frame diagnostic of `F`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdjointSamples {
    #[serde(skip)]
    pub values: Vec<Complex64>,
    pub edge_fraction: f64,
    pub inconclusive: bool,
}

/// `V*_γ F(t) = ∫∫ F(x, ξ) e^{2πiξ·t} γ(t - x) dx dξ` as a Riemann sum over
/// the grid of `F`.
pub fn adjoint_vstar(f: &SampledStft, gamma: &HermiteGaussian, t_points: &[Vec<f64>]) -> Result<AdjointSamples> {
    let grid = &f.grid;
    if gamma.dim() != grid.dim {
        return Err(Error::Dimension {
            expected: grid.dim,
            got: gamma.dim(),
        });
    }
    if let Some(t) = t_points.iter().find(|t| t.len() != grid.dim) {
        return Err(Error::Dimension {
            expected: grid.dim,
            got: t.len(),
        });
    }
    let rows = grid.rows();
    let cols = grid.cols();
    let xs: Vec<Vec<f64>> = (0..rows).map(|r| grid.x_point(r)).collect();
    let xis: Vec<Vec<f64>> = (0..cols).map(|c| grid.xi_point(c)).collect();
    let cell = grid.cell();
    let values = par_map(t_points.len(), |k| {
        let t = &t_points[k];
        let phase: Vec<Complex64> = xis
            .iter()
            .map(|xi| {
                let dot: f64 = xi.iter().zip(t).map(|(a, b)| a * b).sum();
                Complex64::from_polar(1.0, 2.0 * PI * dot)
            })
            .collect();
        let mut acc = Complex64::new(0.0, 0.0);
        let mut shifted = vec![0.0; grid.dim];
        for (r, x) in xs.iter().enumerate() {
            for i in 0..grid.dim {
                shifted[i] = t[i] - x[i];
            }
            let g = gamma.eval_unchecked(&shifted);
            if g == Complex64::new(0.0, 0.0) {
                continue;
            }
            let row = &f.values[r * cols..(r + 1) * cols];
            let s: Complex64 = row.iter().zip(&phase).map(|(v, p)| v * p).sum();
            acc += s * g;
        }
        Ok(acc * cell)
    })?;
    let edge_fraction = f.edge_fraction();
    Ok(AdjointSamples {
        values,
        edge_fraction,
        inconclusive: edge_fraction > EDGE_TOL,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IsometryReport {
    pub measured: f64,
    pub expected: f64,
    pub ratio: f64,
    pub edge_fraction: f64,
    pub inconclusive: bool,
}

/// `‖V_ψ f‖₂ / (‖ψ‖₂ ‖f‖₂)` with the numerator by grid quadrature and the
/// denominator in closed form.
pub fn isometry_check(f: &HermiteGaussian, psi: &HermiteGaussian, grid: &PhaseSpaceGrid) -> Result<IsometryReport> {
    let v = stft_grid(f, psi, grid)?;
    let measured = v.l2_norm();
    let expected = f.l2_norm() * psi.l2_norm();
    let ratio = if expected == 0.0 {
        if measured == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        measured / expected
    };
    let edge_fraction = v.edge_fraction();
    Ok(IsometryReport {
        measured,
        expected,
        ratio,
        edge_fraction,
        inconclusive: edge_fraction > EDGE_TOL,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReconstructionReport {
    pub gamma_psi: Complex64,
    pub max_rel_error: f64,
    pub edge_fraction: f64,
    pub tolerance: f64,
    pub status: Status,
}

/// Relative size of `(γ, ψ)` below which the pair counts as orthogonal.
pub const ORTHOGONALITY_TOL: f64 = 1e-8;

/// `(γ, ψ)` by quadrature, rejected when numerically zero.
pub fn window_pairing(gamma: &HermiteGaussian, psi: &HermiteGaussian) -> Result<Complex64> {
    let zero = vec![0.0; gamma.dim()];
    let gp = stft_direct(gamma, psi, &zero, &zero)?;
    if gp.norm() <= ORTHOGONALITY_TOL * gamma.l2_norm() * psi.l2_norm() {
        return Err(Error::OrthogonalWindows(gp.norm()));
    }
    Ok(gp)
}

/// `max_t |(γ, ψ)^{-1} V*_γ V_ψ φ(t) - φ(t)| / max_t |φ(t)|`.
pub fn reconstruction_check(
    phi: &HermiteGaussian,
    psi: &HermiteGaussian,
    gamma: &HermiteGaussian,
    grid: &PhaseSpaceGrid,
    t_points: &[Vec<f64>],
    tolerance: f64,
) -> Result<ReconstructionReport> {
    let gp = window_pairing(gamma, psi)?;
    let v = stft_grid(phi, psi, grid)?;
    let rec = adjoint_vstar(&v, gamma, t_points)?;
    let mut err: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for (t, r) in t_points.iter().zip(&rec.values) {
        let exact = phi.eval(t)?;
        err = err.max((r / gp - exact).norm());
        scale = scale.max(exact.norm());
    }
    let max_rel_error = if scale == 0.0 { err } else { err / scale };
    let status = if rec.inconclusive {
        Status::Inconclusive
    } else if max_rel_error <= tolerance {
        Status::Pass
    } else {
        Status::Fail
    };
    Ok(ReconstructionReport {
        gamma_psi: gp,
        max_rel_error,
        edge_fraction: rec.edge_fraction,
        tolerance,
        status,
    })
}

fn require_1d(grid: &PhaseSpaceGrid, what: &str) -> Result<()> {
    if grid.dim != 1 {
        return Err(Error::Unsupported(format!("{what} is implemented for d = 1")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayMeasurement {
    pub log_c_meas: f64,
    pub argmax_x: f64,
    pub argmax_xi: f64,
    pub profile_interior: bool,
    pub boundary_non_increasing: bool,
    /// `log max |ξ|^n |V| v / (‖φ‖ (πh)^{-n} M_n)` for `n = 0..=moment_max`.
    pub log_moments: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayBoundReport {
    pub norm: SeminormResult,
    pub coarse: DecayMeasurement,
    pub refined: DecayMeasurement,
    pub c_meas: f64,
    pub drift: f64,
    pub moments_consistent: bool,
    pub status: Status,
}

fn measure_decay(
    v: &SampledStft,
    m: &WeightSequence,
    h: f64,
    weight: &WeightFunction,
    log_norm: f64,
    moment_max: usize,
) -> Result<DecayMeasurement> {
    let grid = &v.grid;
    let xs = grid.x_nodes();
    let xis = grid.xi_nodes();
    let lw = par_map(xs.len(), |i| weight.log_eval(&[xs[i]]))?;
    let lm_xi = par_map(xis.len(), |k| m.associated_function(PI * h * xis[k].abs()))?;
    let lm = m.log_values(moment_max + 1)?;
    let ln_pih = (PI * h).ln();
    // profile over ξ: max over x
    let mut profile = vec![(f64::NEG_INFINITY, 0usize); xis.len()];
    let mut moments = vec![f64::NEG_INFINITY; moment_max + 1];
    let floor = NOISE_FLOOR * v.max_abs();
    for (i, &w) in lw.iter().enumerate() {
        for (k, slot) in profile.iter_mut().enumerate() {
            let a = v.get(i, k).norm();
            if a <= floor {
                continue;
            }
            let lv = a.ln() + w;
            let term = lv + lm_xi[k];
            if term > slot.0 {
                *slot = (term, i);
            }
            let la = xis[k].abs().ln();
            for (n, mom) in moments.iter_mut().enumerate() {
                let t = if n == 0 { lv } else { n as f64 * la + lv };
                let t = t - (lm[n] - n as f64 * ln_pih);
                if t > *mom {
                    *mom = t;
                }
            }
        }
    }
    let (kbest, _) = profile
        .iter()
        .enumerate()
        .fold((0usize, f64::NEG_INFINITY), |acc, (k, p)| if p.0 > acc.1 { (k, p.0) } else { acc });
    let n = profile.len();
    let log_c = profile[kbest].0 - log_norm;
    let boundary_non_increasing = profile[0].0 <= profile[1].0 && profile[n - 1].0 <= profile[n - 2].0;
    Ok(DecayMeasurement {
        log_c_meas: log_c,
        argmax_x: xs[profile[kbest].1],
        argmax_xi: xis[kbest],
        profile_interior: kbest != 0 && kbest != n - 1,
        boundary_non_increasing,
        log_moments: moments.into_iter().map(|m| m - log_norm).collect(),
    })
}

/// Measured constant in `|V_ψ φ(x,ξ)| v(x) ≤ C ‖φ‖ e^{-M(πh|ξ|)}` (d = 1),
/// with refinement drift and the moment readings for `|α| ≤ moment_max`.
#[allow(clippy::too_many_arguments)]
pub fn decay_bound_check(
    phi: &HermiteGaussian,
    psi: &HermiteGaussian,
    m: &WeightSequence,
    h: f64,
    v: &WeightFunction,
    w: &WeightFunction,
    grid: &PhaseSpaceGrid,
    spatial: &PointGrid,
    alpha_max: usize,
    moment_max: usize,
    drift_tol: f64,
) -> Result<DecayBoundReport> {
    require_1d(grid, "decay_bound_check")?;
    let norm = seminorm_h(phi, m, h, w, spatial, alpha_max)?;
    let coarse_v = stft_grid(phi, psi, grid)?;
    let fine_v = stft_grid(phi, psi, &grid.refined())?;
    if norm.value == 0.0 {
        let empty = DecayMeasurement {
            log_c_meas: f64::NEG_INFINITY,
            argmax_x: 0.0,
            argmax_xi: 0.0,
            profile_interior: true,
            boundary_non_increasing: true,
            log_moments: vec![f64::NEG_INFINITY; moment_max + 1],
        };
        let status = if coarse_v.max_abs() == 0.0 {
            Status::Pass
        } else {
            Status::Fail
        };
        return Ok(DecayBoundReport {
            norm,
            coarse: empty.clone(),
            refined: empty,
            c_meas: 0.0,
            drift: 0.0,
            moments_consistent: true,
            status,
        });
    }
    let coarse = measure_decay(&coarse_v, m, h, v, norm.log_value, moment_max)?;
    let refined = measure_decay(&fine_v, m, h, v, norm.log_value, moment_max)?;
    let drift = ((refined.log_c_meas - coarse.log_c_meas).exp() - 1.0).abs();
    let lm0 = m.log_value(0)?;
    let moments_consistent = coarse
        .log_moments
        .iter()
        .all(|&lc| lc <= coarse.log_c_meas - lm0 + 1e-9);
    let finite = coarse.log_c_meas.is_finite() && refined.log_c_meas.is_finite();
    let status = if !finite || drift > drift_tol || !moments_consistent {
        Status::Fail
    } else if norm.lower_bound_only
        || !coarse.profile_interior
        || !coarse.boundary_non_increasing
        || !refined.boundary_non_increasing
    {
        Status::Inconclusive
    } else {
        Status::Pass
    };
    Ok(DecayBoundReport {
        c_meas: coarse.log_c_meas.exp(),
        norm,
        coarse,
        refined,
        drift,
        moments_consistent,
        status,
    })
}

/// Derivatives `∂^n V*_ψ F(t_m)` for `n = 0..=n_max` on the lattice
/// `t_m = x_m`, as `out[n][m]` (d = 1).
pub fn adjoint_derivatives(f: &SampledStft, psi: &HermiteGaussian, n_max: usize) -> Result<Vec<Vec<Complex64>>> {
    let grid = &f.grid;
    require_1d(grid, "adjoint derivatives")?;
    if psi.dim() != 1 {
        return Err(Error::Dimension {
            expected: 1,
            got: psi.dim(),
        });
    }
    let nx = grid.nx;
    let nxi = grid.nxi;
    let dx = grid.x_step();
    let xis = grid.xi_nodes();
    let cell = grid.cell();

    // ψ^{(k)}((m - i) Δx), indexed by k and m - i + nx - 1
    let span = 2 * nx - 1;
    let mut psi_tab = vec![vec![Complex64::new(0.0, 0.0); span]; n_max + 1];
    let mut buf = Vec::new();
    for dpos in 0..span {
        let s = (dpos as f64 - (nx - 1) as f64) * dx;
        for t in psi.terms() {
            t.axis(0).derivatives(s, n_max, &mut buf);
            for k in 0..=n_max {
                psi_tab[k][dpos] += t.amplitude * buf[k];
            }
        }
    }
    let peak: Vec<f64> = psi_tab
        .iter()
        .map(|row| row.iter().map(|v| v.norm()).fold(0.0, f64::max))
        .collect();
    let support: Vec<usize> = (0..span)
        .filter(|&dp| (0..=n_max).any(|k| psi_tab[k][dp].norm() > 1e-25 * peak[k]))
        .collect();
    let (lo, hi) = match (support.first(), support.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => return Ok(vec![vec![Complex64::new(0.0, 0.0); nx]; n_max + 1]),
    };

    let ifft = fft_length(grid, dx, nx.max(nxi)).map(|len| FftPlanner::new().plan_fft_inverse(len));
    let binom = binomials(n_max);
    let mut out = vec![vec![Complex64::new(0.0, 0.0); nx]; n_max + 1];
    for j in 0..=n_max {
        // G_j(i, t_m) = Σ_k F_ik (2πiξ_k)^j e^{2πiξ_k t_m} ΔxΔξ
        let gj: Vec<Vec<Complex64>> = (0..nx)
            .into_par_iter()
            .map(|i| {
                let coeff: Vec<Complex64> = (0..nxi)
                    .map(|k| f.get(i, k) * Complex64::new(0.0, 2.0 * PI * xis[k]).powi(j as i32))
                    .collect();
                match &ifft {
                    Some(plan) => {
                        let len = plan.len();
                        let mut b = vec![Complex64::new(0.0, 0.0); len];
                        for (k, c) in coeff.iter().enumerate() {
                            b[k] = c * Complex64::from_polar(1.0, 2.0 * PI * k as f64 * grid.xi_step() * grid.x_min);
                        }
                        plan.process(&mut b);
                        (0..nx)
                            .map(|mm| {
                                let t = grid.x_min + mm as f64 * dx;
                                b[mm] * Complex64::from_polar(cell, 2.0 * PI * grid.xi_min * t)
                            })
                            .collect()
                    }
                    None => (0..nx)
                        .map(|mm| {
                            let t = grid.x_min + mm as f64 * dx;
                            coeff
                                .iter()
                                .zip(&xis)
                                .map(|(c, xi)| c * Complex64::from_polar(cell, 2.0 * PI * xi * t))
                                .sum()
                        })
                        .collect(),
                }
            })
            .collect();
        let cols: Vec<Vec<Complex64>> = (0..nx)
            .into_par_iter()
            .map(|mm| {
                let top = mm + nx - 1;
                if top < lo {
                    return vec![Complex64::new(0.0, 0.0); n_max + 1 - j];
                }
                let i_lo = top.saturating_sub(hi);
                let i_hi = (top - lo).min(nx - 1);
                (j..=n_max)
                    .map(|n| {
                        let k = n - j;
                        let mut s = Complex64::new(0.0, 0.0);
                        for i in i_lo..=i_hi {
                            s += psi_tab[k][top - i] * gj[i][mm];
                        }
                        s * binom[n][j]
                    })
                    .collect()
            })
            .collect();
        for (mm, col) in cols.into_iter().enumerate() {
            for (off, v) in col.into_iter().enumerate() {
                out[j + off][mm] += v;
            }
        }
    }
    Ok(out)
}

fn binomials(n: usize) -> Vec<Vec<f64>> {
    let mut b = vec![vec![0.0; n + 1]; n + 1];
    for i in 0..=n {
        b[i][0] = 1.0;
        for j in 1..=i {
            b[i][j] = b[i - 1][j - 1] + if j < i { b[i - 1][j] } else { 0.0 };
        }
    }
    b
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdjointMeasurement {
    pub log_f_norm: f64,
    pub log_seminorm: f64,
    pub log_ratio: f64,
    pub argmax_order: usize,
    pub argmax_t: f64,
    pub interior: bool,
}

/// `seminorm_k(V*_ψ F; v) / sup |F| (w ⊗ e^{M(h·)})` with
/// `k = h / (4 H² π)` (d = 1).
#[allow(clippy::too_many_arguments)]
pub fn adjoint_bound_check(
    f: &SampledStft,
    psi: &HermiteGaussian,
    m: &WeightSequence,
    h: f64,
    v: &WeightFunction,
    w: &WeightFunction,
    witness: &M2PrimeWitness,
    alpha_max: usize,
) -> Result<AdjointMeasurement> {
    let grid = &f.grid;
    require_1d(grid, "adjoint_bound_check")?;
    let xs = grid.x_nodes();
    let xis = grid.xi_nodes();
    let lw = par_map(xs.len(), |i| w.log_eval(&[xs[i]]))?;
    let lm_xi = par_map(xis.len(), |k| m.associated_function(h * xis[k].abs()))?;
    let mut log_f_norm = f64::NEG_INFINITY;
    let floor = NOISE_FLOOR * f.max_abs();
    for i in 0..xs.len() {
        for k in 0..xis.len() {
            let a = f.get(i, k).norm();
            if a > floor {
                log_f_norm = log_f_norm.max(a.ln() + lw[i] + lm_xi[k]);
            }
        }
    }
    let k_scale = h / (4.0 * witness.h.powi(2) * PI);
    let ders = adjoint_derivatives(f, psi, alpha_max)?;
    let lv = par_map(xs.len(), |i| v.log_eval(&[xs[i]]))?;
    let lm = m.log_values(alpha_max + 1)?;
    let mut best = (f64::NEG_INFINITY, 0usize, 0usize);
    for (n, row) in ders.iter().enumerate() {
        for (i, d) in row.iter().enumerate() {
            let t = d.norm().ln() + n as f64 * k_scale.ln() + lv[i] - lm[n];
            if t > best.0 {
                best = (t, n, i);
            }
        }
    }
    let interior = best.1 < alpha_max && best.2 != 0 && best.2 + 1 != xs.len();
    Ok(AdjointMeasurement {
        log_f_norm,
        log_seminorm: best.0,
        log_ratio: best.0 - log_f_norm,
        argmax_order: best.1,
        argmax_t: xs[best.2],
        interior,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdjointBoundReport {
    pub coarse: AdjointMeasurement,
    pub refined: AdjointMeasurement,
    pub ratio: f64,
    pub drift: f64,
    pub status: Status,
}

/// [`adjoint_bound_check`] for `F = V_ψ φ` on a grid and on its refinement.
#[allow(clippy::too_many_arguments)]
pub fn adjoint_bound_refinement(
    phi: &HermiteGaussian,
    psi: &HermiteGaussian,
    m: &WeightSequence,
    h: f64,
    v: &WeightFunction,
    w: &WeightFunction,
    witness: &M2PrimeWitness,
    grid: &PhaseSpaceGrid,
    alpha_max: usize,
    drift_tol: f64,
) -> Result<AdjointBoundReport> {
    let coarse_f = stft_grid(phi, psi, grid)?;
    let fine_f = stft_grid(phi, psi, &grid.refined())?;
    let coarse = adjoint_bound_check(&coarse_f, psi, m, h, v, w, witness, alpha_max)?;
    let refined = adjoint_bound_check(&fine_f, psi, m, h, v, w, witness, alpha_max)?;
    if coarse.log_f_norm == f64::NEG_INFINITY {
        return Ok(AdjointBoundReport {
            coarse,
            refined,
            ratio: 0.0,
            drift: 0.0,
            status: Status::Pass,
        });
    }
    let drift = ((refined.log_ratio - coarse.log_ratio).exp() - 1.0).abs();
    let status = if !coarse.log_ratio.is_finite() || drift > drift_tol {
        Status::Fail
    } else if !coarse.interior || !refined.interior {
        Status::Inconclusive
    } else {
        Status::Pass
    };
    Ok(AdjointBoundReport {
        ratio: coarse.log_ratio.exp(),
        coarse,
        refined,
        drift,
        status,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gauss() -> HermiteGaussian {
        HermiteGaussian::gaussian(1, PI).unwrap()
    }

    #[test]
    fn direct_gaussian_pair() {
        let v = stft_direct_detailed(&gauss(), &gauss(), &[0.0], &[0.0]).unwrap();
        assert!((v.value.re - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(v.value.im.abs() < 1e-15);
        assert!(v.converged);
        assert!(v.tail_bound < 1e-12 * 0.7);
        assert_eq!(stft_direct(&HermiteGaussian::zero(1), &gauss(), &[1.0], &[2.0]).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn grid_matches_direct() {
        let f = crate::hermite::shipped_family(1).remove(10).1;
        let grid = PhaseSpaceGrid::default_for(1);
        let v = stft_grid(&f, &gauss(), &grid).unwrap();
        let scale = v.max_abs();
        for &(i, k) in &[(128, 128), (100, 140), (150, 90), (3, 250), (200, 7)] {
            let d = stft_direct(&f, &gauss(), &grid.x_point(i), &grid.xi_point(k)).unwrap();
            assert!((v.get(i, k) - d).norm() <= 1e-8 * scale.max(d.norm()));
        }
    }

    #[test]
    fn non_integer_fft_length_falls_back() {
        let grid = PhaseSpaceGrid::symmetric(1, 4.0, 64, 3.0, 35);
        assert!(fft_length(&grid, grid.x_step() / 2.0, grid.nxi).is_none());
        let v = stft_grid(&gauss(), &gauss(), &grid).unwrap();
        let d = stft_direct(&gauss(), &gauss(), &grid.x_point(17), &grid.xi_point(11)).unwrap();
        assert!((v.get(17, 11) - d).norm() < 1e-12);
    }

    #[test]
    fn nyquist_guard() {
        let grid = PhaseSpaceGrid::symmetric(1, 8.0, 64, 8.0, 64);
        assert!(matches!(stft_grid(&gauss(), &gauss(), &grid), Err(Error::Nyquist { .. })));
    }

    #[test]
    fn isometry_for_gaussian() {
        let r = isometry_check(&gauss(), &gauss(), &PhaseSpaceGrid::default_for(1)).unwrap();
        assert!((r.expected - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((r.ratio - 1.0).abs() < 1e-6, "{}", r.ratio);
        assert!(!r.inconclusive);
    }

    #[test]
    fn adjoint_of_zero() {
        let grid = PhaseSpaceGrid::symmetric(1, 4.0, 64, 4.0, 128);
        let z = SampledStft::zeros(grid, "w");
        let r = adjoint_vstar(&z, &gauss(), &[vec![0.5]]).unwrap();
        assert_eq!(r.values[0], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn adjoint_derivative_zero_order_matches_adjoint() {
        let grid = PhaseSpaceGrid::symmetric(1, 4.0, 128, 4.0, 128);
        let f = stft_grid(&gauss(), &gauss(), &grid).unwrap();
        let ders = adjoint_derivatives(&f, &gauss(), 3).unwrap();
        let ts: Vec<Vec<f64>> = [10usize, 64, 90].iter().map(|&m| grid.x_point(m)).collect();
        let direct = adjoint_vstar(&f, &gauss(), &ts).unwrap();
        for (k, &m) in [10usize, 64, 90].iter().enumerate() {
            assert!((ders[0][m] - direct.values[k]).norm() < 1e-12);
        }
        // V*V φ = ‖ψ‖² φ, so the first derivative follows φ'
        let norm2 = 0.5f64.sqrt();
        let x = grid.x_point(70)[0];
        let expect = -2.0 * PI * x * (-PI * x * x).exp() * norm2;
        assert!((ders[1][70].re - expect).abs() < 1e-9);
    }

    #[test]
    fn binomial_table() {
        let b = binomials(6);
        assert_eq!(b[6][3], 20.0);
        assert_eq!(b[5][0], 1.0);
        assert_eq!(b[5][5], 1.0);
    }
}
