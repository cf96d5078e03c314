//! Weight functions on `ℝ^d`, decreasing weight systems, Nachbin weights
//! given as finite infima, and the grid checks built on them.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numeric::{euclidean_norm, linspace, par_argmax, par_map, simpson};
use crate::sequence::WeightSequence;

/// Relative slack used by pointwise inequality checks.
pub const POINTWISE_SLACK: f64 = 1e-12;

/// An edge ratio this large (with an increasing trend) is read as divergence.
pub const DIVERGENCE_RATIO: f64 = 1e8;

/// A positive weight, evaluated in log space.
#[derive(Debug, Clone)]
pub enum WeightFunction {
    Unit,
    Constant { log_value: f64 },
    /// `exp(M(|x| / scale))`.
    AssocExp { seq: Arc<WeightSequence>, scale: f64 },
    /// `exp(rate |x|)`.
    ExpNorm { rate: f64 },
    /// `exp(-a |x|²)`.
    Gaussian { a: f64 },
    /// `(1 + |x|)^(-k)`.
    PolyDecay { k: f64 },
    Scaled { log_lambda: f64, inner: Box<WeightFunction> },
    Translated { shift: Vec<f64>, inner: Box<WeightFunction> },
    /// `inner^exponent`; exponent `-1` gives the reciprocal.
    Power { exponent: f64, inner: Box<WeightFunction> },
    Product(Vec<WeightFunction>),
    Infimum(Vec<WeightFunction>),
    /// `left(x_{..split}) · right(x_{split..})`.
    Tensor {
        left: Box<WeightFunction>,
        right: Box<WeightFunction>,
        split: usize,
    },
    Table(Arc<StepTable>),
    Mollified(Arc<Mollified>),
}

impl WeightFunction {
    pub fn scaled(self, lambda: f64) -> Self {
        WeightFunction::Scaled {
            log_lambda: lambda.ln(),
            inner: Box::new(self),
        }
    }

    pub fn reciprocal(self) -> Self {
        WeightFunction::Power {
            exponent: -1.0,
            inner: Box::new(self),
        }
    }

    pub fn log_eval(&self, x: &[f64]) -> Result<f64> {
        use WeightFunction::*;
        Ok(match self {
            Unit => 0.0,
            Constant { log_value } => *log_value,
            AssocExp { seq, scale } => seq.associated_function(euclidean_norm(x) / scale)?,
            ExpNorm { rate } => rate * euclidean_norm(x),
            Gaussian { a } => {
                let r = euclidean_norm(x);
                -a * r * r
            }
            PolyDecay { k } => -k * euclidean_norm(x).ln_1p(),
            Scaled { log_lambda, inner } => log_lambda + inner.log_eval(x)?,
            Translated { shift, inner } => {
                if shift.len() != x.len() {
                    return Err(Error::Dimension {
                        expected: shift.len(),
                        got: x.len(),
                    });
                }
                let y: Vec<f64> = x.iter().zip(shift).map(|(a, b)| a - b).collect();
                inner.log_eval(&y)?
            }
            Power { exponent, inner } => exponent * inner.log_eval(x)?,
            Product(fs) => {
                let mut acc = 0.0;
                for f in fs {
                    acc += f.log_eval(x)?;
                }
                acc
            }
            Infimum(fs) => {
                let mut acc = f64::INFINITY;
                for f in fs {
                    acc = acc.min(f.log_eval(x)?);
                }
                acc
            }
            Tensor { left, right, split } => {
                if *split > x.len() {
                    return Err(Error::Dimension {
                        expected: *split,
                        got: x.len(),
                    });
                }
                left.log_eval(&x[..*split])? + right.log_eval(&x[*split..])?
            }
            Table(t) => t.log_eval(one_dim(x)?),
            Mollified(m) => m.log_eval(one_dim(x)?),
        })
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        Ok(self.log_eval(x)?.exp())
    }
}

fn one_dim(x: &[f64]) -> Result<f64> {
    match x {
        [v] => Ok(*v),
        _ => Err(Error::Dimension {
            expected: 1,
            got: x.len(),
        }),
    }
}

/// Piecewise-constant one-dimensional table: value `i` holds on
/// `[knot_i, knot_{i+1})`, the first value extends to `-∞` and the last
/// to `+∞`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepTable {
    knots: Vec<f64>,
    log_values: Vec<f64>,
}

impl StepTable {
    pub fn new(knots: Vec<f64>, values: &[f64]) -> Result<Self> {
        if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(invalid("weight table values must be finite and positive"));
        }
        Self::from_log(knots, values.iter().map(|v| v.ln()).collect())
    }

    pub fn from_log(knots: Vec<f64>, log_values: Vec<f64>) -> Result<Self> {
        if knots.is_empty() || knots.len() != log_values.len() {
            return Err(invalid("weight table needs matching, non-empty knots and values"));
        }
        if knots.windows(2).any(|w| !(w[0] < w[1])) || knots.iter().any(|k| !k.is_finite()) {
            return Err(invalid("weight table knots must be finite and strictly increasing"));
        }
        if log_values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("weight table values must be finite and positive"));
        }
        Ok(Self { knots, log_values })
    }

    /// Samples `omega` at the given knots.
    pub fn sample(omega: &WeightFunction, knots: Vec<f64>) -> Result<Self> {
        let log_values = knots
            .iter()
            .map(|&k| omega.log_eval(&[k]))
            .collect::<Result<Vec<_>>>()?;
        Self::from_log(knots, log_values)
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn log_values(&self) -> &[f64] {
        &self.log_values
    }

    /// Index of the cell containing `x`; cell 0 also covers `(-∞, knot_0)`.
    fn cell(&self, x: f64) -> usize {
        self.knots.partition_point(|&k| k <= x).saturating_sub(1)
    }

    pub fn log_eval(&self, x: f64) -> f64 {
        self.log_values[self.cell(x)]
    }
}

const BUMP_CDF_NODES: usize = 2001;
const BUMP_QUADRATURE_PANELS: usize = 4000;

/// Smooth compactly supported bump `scale · C e^{-1/(1-(t/r)²)}` on `(-r, r)`,
/// with `C` chosen so that `scale = 1` has unit integral.
#[derive(Debug, Clone)]
pub struct Bump {
    radius: f64,
    log_amp: f64,
    cdf_nodes: Vec<f64>,
    cdf: Vec<f64>,
    density: Vec<f64>,
}

fn bump_shape(t: f64, r: f64) -> f64 {
    let u = t / r;
    if u.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - u * u)).exp()
    }
}

impl Bump {
    pub fn new(radius: f64) -> Result<Self> {
        Self::with_scale(radius, 1.0)
    }

    pub fn with_scale(radius: f64, scale: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) || !(scale > 0.0 && scale.is_finite()) {
            return Err(invalid("bump radius and scale must be positive"));
        }
        let raw = simpson(|t| bump_shape(t, radius), -radius, radius, BUMP_QUADRATURE_PANELS);
        let log_amp = scale.ln() - raw.ln();
        let amp = log_amp.exp();
        let cdf_nodes = linspace(-radius, radius, BUMP_CDF_NODES);
        let density: Vec<f64> = cdf_nodes.iter().map(|&t| amp * bump_shape(t, radius)).collect();
        let mut cdf = Vec::with_capacity(BUMP_CDF_NODES);
        let mut acc = 0.0;
        cdf.push(0.0);
        for w in cdf_nodes.windows(2) {
            acc += simpson(|t| amp * bump_shape(t, radius), w[0], w[1], 2);
            cdf.push(acc);
        }
        Ok(Self {
            radius,
            log_amp,
            cdf_nodes,
            cdf,
            density,
        })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn density(&self, t: f64) -> f64 {
        self.log_amp.exp() * bump_shape(t, self.radius)
    }

    /// Integral of the density by composite Simpson.
    pub fn integral(&self) -> f64 {
        simpson(|t| self.density(t), -self.radius, self.radius, BUMP_QUADRATURE_PANELS)
    }

    /// `Φ(u) = ∫_{-∞}^{u} φ`, cubic Hermite interpolation of the tabulated
    /// cumulative integral using the exact density as slope.
    pub fn cdf(&self, u: f64) -> f64 {
        let n = self.cdf_nodes.len();
        if u <= self.cdf_nodes[0] {
            return 0.0;
        }
        if u >= self.cdf_nodes[n - 1] {
            return self.cdf[n - 1];
        }
        let h = self.cdf_nodes[1] - self.cdf_nodes[0];
        let i = (((u - self.cdf_nodes[0]) / h) as usize).min(n - 2);
        let s = (u - self.cdf_nodes[i]) / h;
        let (y0, y1) = (self.cdf[i], self.cdf[i + 1]);
        let (d0, d1) = (self.density[i] * h, self.density[i + 1] * h);
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * y0
            + (s3 - 2.0 * s2 + s) * d0
            + (-2.0 * s3 + 3.0 * s2) * y1
            + (s3 - s2) * d1
    }
}

/// `ω̃ = ω * φ` for a step table `ω` and a bump `φ`, evaluated exactly
/// cell by cell through the bump's cumulative integral.
#[derive(Debug, Clone)]
pub struct Mollified {
    table: Arc<StepTable>,
    bump: Bump,
}

impl Mollified {
    pub fn table(&self) -> &StepTable {
        &self.table
    }

    pub fn bump(&self) -> &Bump {
        &self.bump
    }

    pub fn log_eval(&self, x: f64) -> f64 {
        let t = &self.table;
        let r = self.bump.radius;
        let lo = t.cell(x - r);
        let hi = t.cell(x + r);
        let top = t.log_values[lo..=hi]
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        let n = t.knots.len();
        let mut acc = 0.0;
        for i in lo..=hi {
            // cell i spans [k_i, k_{i+1}); the first cell is open to the left
            let upper = if i == 0 { 1.0 } else { self.bump.cdf(x - t.knots[i]) };
            let lower = if i + 1 >= n {
                0.0
            } else {
                self.bump.cdf(x - t.knots[i + 1])
            };
            acc += (upper - lower).max(0.0) * (t.log_values[i] - top).exp();
        }
        top + acc.ln()
    }
}

/// Tolerance on the bump integral accepted by [`mollify_weight`].
pub const BUMP_NORMALIZATION_TOL: f64 = 1e-8;

/// Convolves a sampled weight with a normalized bump (one dimension).
pub fn mollify_weight(omega: &StepTable, bump: &Bump) -> Result<WeightFunction> {
    let integral = bump.integral();
    if (integral - 1.0).abs() > BUMP_NORMALIZATION_TOL {
        return Err(Error::BumpNotNormalized { integral });
    }
    Ok(WeightFunction::Mollified(Arc::new(Mollified {
        table: Arc::new(omega.clone()),
        bump: bump.clone(),
    })))
}

/// Decreasing family `n ↦ v_n`, `n ≥ 1`.
#[derive(Debug, Clone)]
pub enum WeightSystem {
    /// `v_n = exp(M(|x| / (scale n)))`.
    AssocExp { seq: Arc<WeightSequence>, scale: f64 },
    /// `v_n = ω` for every `n`.
    Constant { omega: WeightFunction },
    /// `v_n = (1 + |x|)^(-k n)`.
    PolyDecay { k: f64 },
    /// `v_1, ..., v_N` listed explicitly.
    Explicit { members: Vec<WeightFunction> },
    /// `v_n ⊗ w_n` on `ℝ^{d1} × ℝ^{d2}`, split after `split` coordinates.
    Tensor {
        left: Box<WeightSystem>,
        right: Box<WeightSystem>,
        split: usize,
    },
}

impl WeightSystem {
    pub fn member(&self, n: usize) -> Result<WeightFunction> {
        if n == 0 {
            return Err(invalid("weight systems are indexed from n = 1"));
        }
        Ok(match self {
            WeightSystem::AssocExp { seq, scale } => WeightFunction::AssocExp {
                seq: Arc::clone(seq),
                scale: scale * n as f64,
            },
            WeightSystem::Constant { omega } => omega.clone(),
            WeightSystem::PolyDecay { k } => WeightFunction::PolyDecay { k: k * n as f64 },
            WeightSystem::Explicit { members } => members
                .get(n - 1)
                .cloned()
                .ok_or_else(|| invalid(format!("explicit system has {} members, asked for {n}", members.len())))?,
            WeightSystem::Tensor { left, right, split } => WeightFunction::Tensor {
                left: Box::new(left.member(n)?),
                right: Box::new(right.member(n)?),
                split: *split,
            },
        })
    }

    /// Largest available index, if the system is finite.
    pub fn len_hint(&self) -> Option<usize> {
        match self {
            WeightSystem::Explicit { members } => Some(members.len()),
            WeightSystem::Tensor { left, right, .. } => match (left.len_hint(), right.len_hint()) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, b) => a.or(b),
            },
            _ => None,
        }
    }
}

/// `V ⊗ W`: the product system on the product space.
pub fn tensor_system(v: &WeightSystem, w: &WeightSystem, split: usize) -> WeightSystem {
    WeightSystem::Tensor {
        left: Box::new(v.clone()),
        right: Box::new(w.clone()),
        split,
    }
}

/// `inf_j λ_j w_j` over a finite term list.
#[derive(Debug, Clone)]
pub struct NachbinWeight {
    terms: Vec<(f64, WeightFunction)>,
}

impl NachbinWeight {
    /// Terms given as `(λ_j, w_j)` with `λ_j > 0`.
    pub fn new(terms: Vec<(f64, WeightFunction)>) -> Result<Self> {
        if terms.is_empty() {
            return Err(invalid("Nachbin weight needs at least one term"));
        }
        if terms.iter().any(|(l, _)| !(*l > 0.0 && l.is_finite())) {
            return Err(invalid("infimum coefficients must be positive and finite"));
        }
        Ok(Self {
            terms: terms.into_iter().map(|(l, w)| (l.ln(), w)).collect(),
        })
    }

    pub fn single(w: WeightFunction) -> Self {
        Self {
            terms: vec![(0.0, w)],
        }
    }

    /// `inf_{j ≤ count} λ_j v_j` for a system.
    pub fn from_system(system: &WeightSystem, lambdas: &[f64]) -> Result<Self> {
        let terms = lambdas
            .iter()
            .enumerate()
            .map(|(j, &l)| Ok((l, system.member(j + 1)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(terms)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficients `λ_j`.
    pub fn lambdas(&self) -> Vec<f64> {
        self.terms.iter().map(|(l, _)| l.exp()).collect()
    }

    pub fn log_eval(&self, x: &[f64]) -> Result<f64> {
        self.log_eval_prefix(x, self.terms.len())
    }

    /// Infimum over the first `k` terms.
    pub fn log_eval_prefix(&self, x: &[f64], k: usize) -> Result<f64> {
        let mut acc = f64::INFINITY;
        for (l, w) in self.terms.iter().take(k.max(1)) {
            acc = acc.min(l + w.log_eval(x)?);
        }
        Ok(acc)
    }

    pub fn as_weight_function(&self) -> WeightFunction {
        WeightFunction::Infimum(
            self.terms
                .iter()
                .map(|(l, w)| WeightFunction::Scaled {
                    log_lambda: *l,
                    inner: Box::new(w.clone()),
                })
                .collect(),
        )
    }
}

/// Uniform grid `[-extent, extent]^dim` with `per_axis` nodes per axis,
/// flattened in row-major order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointGrid {
    pub dim: usize,
    pub extent: f64,
    pub per_axis: usize,
}

impl PointGrid {
    pub fn new(dim: usize, extent: f64, per_axis: usize) -> Result<Self> {
        if dim == 0 || per_axis == 0 || !(extent > 0.0 && extent.is_finite()) {
            return Err(invalid("grid needs dim >= 1, a positive extent and nodes"));
        }
        Ok(Self {
            dim,
            extent,
            per_axis,
        })
    }

    /// `[-20, 20]` with 2001 nodes in one dimension, `[-10, 10]²` with 201²
    /// nodes in two.
    pub fn default_for(dim: usize) -> Self {
        match dim {
            1 => Self {
                dim,
                extent: 20.0,
                per_axis: 2001,
            },
            _ => Self {
                dim,
                extent: 10.0,
                per_axis: 201,
            },
        }
    }

    pub fn len(&self) -> usize {
        self.per_axis.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn axis(&self) -> Vec<f64> {
        linspace(-self.extent, self.extent, self.per_axis)
    }

    fn axis_value(&self, k: usize) -> f64 {
        if self.per_axis == 1 {
            return 0.0;
        }
        let step = 2.0 * self.extent / (self.per_axis - 1) as f64;
        if k == self.per_axis - 1 {
            self.extent
        } else {
            -self.extent + step * k as f64
        }
    }

    pub fn multi_index(&self, mut i: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim];
        for slot in idx.iter_mut().rev() {
            *slot = i % self.per_axis;
            i /= self.per_axis;
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &k| acc * self.per_axis + k)
    }

    pub fn point(&self, i: usize) -> Vec<f64> {
        self.multi_index(i).into_iter().map(|k| self.axis_value(k)).collect()
    }

    pub fn is_edge(&self, i: usize) -> bool {
        self.multi_index(i)
            .into_iter()
            .any(|k| k == 0 || k + 1 == self.per_axis)
    }

    /// Node indices along the `2·dim` coordinate half-axes, from the centre
    /// outwards. Needs an odd node count so that the centre is a node.
    pub fn rays(&self) -> Result<Vec<Vec<usize>>> {
        if self.per_axis.is_multiple_of(2) {
            return Err(invalid("ray extraction needs an odd number of nodes per axis"));
        }
        let c = self.per_axis / 2;
        let mut out = Vec::with_capacity(2 * self.dim);
        for axis in 0..self.dim {
            for dir in [1isize, -1] {
                let ray = (0..=c)
                    .map(|s| {
                        let mut idx = vec![c; self.dim];
                        idx[axis] = (c as isize + dir * s as isize) as usize;
                        self.flat_index(&idx)
                    })
                    .collect();
                out.push(ray);
            }
        }
        Ok(out)
    }

    /// Grid of pairwise sums `x + y` for two copies of this grid.
    pub fn sum_grid(&self) -> Self {
        Self {
            dim: self.dim,
            extent: 2.0 * self.extent,
            per_axis: 2 * self.per_axis - 1,
        }
    }

    fn log_values(&self, w: &WeightFunction) -> Result<Vec<f64>> {
        par_map(self.len(), |i| w.log_eval(&self.point(i)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecreasingViolation {
    pub n: usize,
    pub point: Vec<f64>,
    pub log_excess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecreasingReport {
    pub holds: bool,
    pub n_max: usize,
    pub violation: Option<DecreasingViolation>,
}

/// Pointwise `v_{n+1} ≤ v_n (1 + 1e-12)` for `n < n_max`.
pub fn check_decreasing(system: &WeightSystem, n_max: usize, grid: &PointGrid) -> Result<DecreasingReport> {
    if grid.is_empty() {
        return Err(invalid("grid is empty"));
    }
    let slack = POINTWISE_SLACK.ln_1p();
    let mut prev = grid.log_values(&system.member(1)?)?;
    for n in 1..n_max {
        let next = grid.log_values(&system.member(n + 1)?)?;
        let hit = par_argmax(grid.len(), |i| Ok(next[i] - prev[i]))?;
        if let Some((i, excess)) = hit {
            if excess > slack {
                return Ok(DecreasingReport {
                    holds: false,
                    n_max,
                    violation: Some(DecreasingViolation {
                        n,
                        point: grid.point(i),
                        log_excess: excess,
                    }),
                });
            }
        }
        prev = next;
    }
    Ok(DecreasingReport {
        holds: true,
        n_max,
        violation: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    Member,
    NonMember,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MembershipRow {
    pub n: usize,
    pub log_sup_ratio: f64,
    pub argmax: Vec<f64>,
    pub edge_increasing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MembershipReport {
    pub rows: Vec<MembershipRow>,
    pub verdict: Membership,
}

impl MembershipReport {
    /// Largest measured `sup v / v_n` across rows.
    pub fn max_log_ratio(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.log_sup_ratio)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// `sup_x v(x) / v_n(x)` for `n = 1..=n_max`, with a trend test at the
/// outer end of every coordinate ray.
pub fn nachbin_membership(
    v: &NachbinWeight,
    system: &WeightSystem,
    n_max: usize,
    grid: &PointGrid,
) -> Result<MembershipReport> {
    let rays = grid.rays()?;
    let lv = par_map(grid.len(), |i| v.log_eval(&grid.point(i)))?;
    let mut rows = Vec::with_capacity(n_max);
    let mut any_edge = false;
    let mut diverging = false;
    for n in 1..=n_max {
        let lvn = grid.log_values(&system.member(n)?)?;
        let ratio: Vec<f64> = lv.iter().zip(&lvn).map(|(a, b)| a - b).collect();
        let (i, sup) = par_argmax(ratio.len(), |i| Ok(ratio[i]))?.expect("grid is non-empty");
        let edge_increasing = rays.iter().any(|ray| {
            let k = ray.len();
            k >= 2 && {
                let (a, b) = (ratio[ray[k - 2]], ratio[ray[k - 1]]);
                b > a + POINTWISE_SLACK * (1.0 + a.abs())
            }
        });
        if edge_increasing {
            any_edge = true;
            if sup >= DIVERGENCE_RATIO.ln() {
                diverging = true;
            }
        }
        rows.push(MembershipRow {
            n,
            log_sup_ratio: sup,
            argmax: grid.point(i),
            edge_increasing,
        });
    }
    let verdict = if diverging {
        Membership::NonMember
    } else if any_edge {
        Membership::Inconclusive
    } else {
        Membership::Member
    };
    Ok(MembershipReport { rows, verdict })
}

/// Ray sampling used to operationalize "vanishes at infinity".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RaySpec {
    pub dim: usize,
    pub radius: f64,
    pub samples: usize,
    /// Monotone decay is required from this radius outwards.
    pub monotone_from: f64,
    pub threshold: f64,
}

impl RaySpec {
    pub fn new(dim: usize, radius: f64) -> Self {
        Self {
            dim,
            radius,
            samples: 1001,
            monotone_from: 0.0,
            threshold: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SCheckReport {
    pub n: usize,
    pub m: usize,
    pub holds: bool,
    pub monotone: bool,
    /// Largest `log(v_m / v_n)` at the outer radius over all rays.
    pub log_ratio_at_radius: f64,
    pub log_threshold: f64,
}

/// `v_m / v_n` along the `2d` coordinate rays: non-increasing beyond
/// `monotone_from` and below `threshold` at the outer radius.
pub fn condition_s_check(system: &WeightSystem, n: usize, m: usize, rays: &RaySpec) -> Result<SCheckReport> {
    if m <= n {
        return Err(invalid("condition (S) check needs m > n"));
    }
    if rays.samples < 2 || !(rays.radius > 0.0) || !(rays.threshold > 0.0) {
        return Err(invalid("ray spec needs two samples, a positive radius and threshold"));
    }
    let vn = system.member(n)?;
    let vm = system.member(m)?;
    let radii = linspace(0.0, rays.radius, rays.samples);
    let mut monotone = true;
    let mut at_radius = f64::NEG_INFINITY;
    for axis in 0..rays.dim {
        for dir in [1.0, -1.0] {
            let ratios = par_map(radii.len(), |k| {
                let mut x = vec![0.0; rays.dim];
                x[axis] = dir * radii[k];
                Ok(vm.log_eval(&x)? - vn.log_eval(&x)?)
            })?;
            for k in 1..radii.len() {
                if radii[k - 1] >= rays.monotone_from
                    && ratios[k] > ratios[k - 1] + POINTWISE_SLACK * (1.0 + ratios[k - 1].abs())
                {
                    monotone = false;
                }
            }
            at_radius = at_radius.max(*ratios.last().expect("two samples"));
        }
    }
    let log_threshold = rays.threshold.ln();
    Ok(SCheckReport {
        n,
        m,
        holds: monotone && at_radius < log_threshold,
        monotone,
        log_ratio_at_radius: at_radius,
        log_threshold,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VWitnessRow {
    pub n: usize,
    pub big_n: usize,
    /// `max_x log(inf_{j≤N} λ_j v_j / max(v_n / n, v))`; must be `≤ 0`.
    pub max_log_excess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VWitnessReport {
    pub rows: Vec<VWitnessRow>,
    pub holds: bool,
}

/// Pointwise `inf{λ_1 v_1, ..., λ_N v_N} ≤ max{v_n / n, v}` for each
/// `(n, N)` pair.
pub fn condition_v_witness_check(
    system: &WeightSystem,
    lambdas: &[f64],
    v: &NachbinWeight,
    n_of_n: &[(usize, usize)],
    grid: &PointGrid,
) -> Result<VWitnessReport> {
    if lambdas.iter().any(|l| !(*l > 0.0)) {
        return Err(invalid("lambdas must be positive"));
    }
    let lv = par_map(grid.len(), |i| v.log_eval(&grid.point(i)))?;
    let mut rows = Vec::new();
    let mut holds = true;
    for &(n, big_n) in n_of_n {
        if big_n == 0 || big_n > lambdas.len() {
            return Err(invalid(format!("N = {big_n} outside the lambda list")));
        }
        let inf = NachbinWeight::new(
            (1..=big_n)
                .map(|j| Ok((lambdas[j - 1], system.member(j)?)))
                .collect::<Result<Vec<_>>>()?,
        )?;
        let vn = system.member(n)?;
        let ln_n = (n as f64).ln();
        let (_, excess) = par_argmax(grid.len(), |i| {
            let x = grid.point(i);
            let rhs = (vn.log_eval(&x)? - ln_n).max(lv[i]);
            Ok(inf.log_eval(&x)? - rhs)
        })?
        .expect("grid is non-empty");
        if excess > POINTWISE_SLACK.ln_1p() {
            holds = false;
        }
        rows.push(VWitnessRow {
            n,
            big_n,
            max_log_excess: excess,
        });
    }
    Ok(VWitnessReport { rows, holds })
}

/// Witness for (V) along a chain of system indices: `v = inf_k λ_k v_k`
/// with `N(n) = len` for every tested `n`.
pub fn v_witness_from_chain(
    system: &WeightSystem,
    lambdas: &[f64],
    ns: &[usize],
) -> Result<(NachbinWeight, Vec<(usize, usize)>)> {
    let v = NachbinWeight::from_system(system, lambdas)?;
    Ok((v, ns.iter().map(|&n| (n, lambdas.len())).collect()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibilityRow {
    pub n: usize,
    pub m: usize,
    pub log_max_ratio: f64,
    pub argmax_x: Vec<f64>,
    pub argmax_y: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub tau: f64,
    pub c: f64,
    pub rows: Vec<AdmissibilityRow>,
    pub passed: bool,
}

impl AdmissibilityReport {
    pub fn row(&self, n: usize, m: usize) -> Option<&AdmissibilityRow> {
        self.rows.iter().find(|r| r.n == n && r.m == m)
    }
}

/// Pairs `(x, y)` over two grids together with a table of `log w(x + y)`.
struct SumTable {
    values: Vec<f64>,
    sum_grid: Option<PointGrid>,
}

impl SumTable {
    fn build(w: &WeightFunction, gx: &PointGrid, gy: &PointGrid) -> Result<Self> {
        if gx == gy {
            let sg = gx.sum_grid();
            Ok(Self {
                values: sg.log_values(w)?,
                sum_grid: Some(sg),
            })
        } else {
            Ok(Self {
                values: Vec::new(),
                sum_grid: None,
            })
        }
    }

    fn get(&self, w: &WeightFunction, gx: &PointGrid, gy: &PointGrid, i: usize, j: usize) -> Result<f64> {
        match &self.sum_grid {
            Some(sg) => {
                let n = gx.per_axis;
                let (mut i, mut j, mut idx, mut mul) = (i, j, 0, 1);
                for _ in 0..gx.dim {
                    idx += (i % n + j % n) * mul;
                    mul *= sg.per_axis;
                    i /= n;
                    j /= n;
                }
                Ok(self.values[idx])
            }
            None => {
                let x = gx.point(i);
                let y = gy.point(j);
                let s: Vec<f64> = x.iter().zip(&y).map(|(p, q)| p + q).collect();
                w.log_eval(&s)
            }
        }
    }
}

fn check_dims(gx: &PointGrid, gy: &PointGrid) -> Result<()> {
    if gx.dim != gy.dim {
        return Err(Error::Dimension {
            expected: gx.dim,
            got: gy.dim,
        });
    }
    Ok(())
}

/// Largest `log(lhs(x+y) / (rhs(x) e^{A(τ|y|)}))` over the product grid.
fn max_translation_ratio(
    lhs: &WeightFunction,
    rhs_log: &[f64],
    a: &WeightSequence,
    tau: f64,
    gx: &PointGrid,
    gy: &PointGrid,
) -> Result<(f64, usize, usize)> {
    let ay = par_map(gy.len(), |j| a.associated_function(tau * euclidean_norm(&gy.point(j))))?;
    let sums = SumTable::build(lhs, gx, gy)?;
    let per_x = par_map(gx.len(), |i| {
        let mut best = (f64::NEG_INFINITY, 0usize);
        for j in 0..gy.len() {
            let v = sums.get(lhs, gx, gy, i, j)? - rhs_log[i] - ay[j];
            if v > best.0 || (v.is_nan() && !best.0.is_nan()) {
                best = (v, j);
            }
        }
        Ok(best)
    })?;
    let (i, _) = par_argmax(per_x.len(), |i| Ok(per_x[i].0))?.expect("grid is non-empty");
    Ok((per_x[i].0, i, per_x[i].1))
}

/// `max v_m(x+y) / (v_n(x) e^{A(τ|y|)})` over `grid_x × grid_y` for each
/// pair; passes iff every maximum is at most `c`.
pub fn admissibility_check(
    system: &WeightSystem,
    a: &WeightSequence,
    tau: f64,
    pairs: &[(usize, usize)],
    c: f64,
    grid_x: &PointGrid,
    grid_y: &PointGrid,
) -> Result<AdmissibilityReport> {
    if !(tau > 0.0) || !(c > 0.0) {
        return Err(invalid("admissibility needs tau > 0 and C > 0"));
    }
    check_dims(grid_x, grid_y)?;
    let mut rows = Vec::with_capacity(pairs.len());
    let mut passed = true;
    for &(n, m) in pairs {
        if m < n {
            return Err(invalid(format!("admissibility pair needs m >= n, got ({n}, {m})")));
        }
        let vn = grid_x.log_values(&system.member(n)?)?;
        let vm = system.member(m)?;
        let (lr, i, j) = max_translation_ratio(&vm, &vn, a, tau, grid_x, grid_y)?;
        if lr > c.ln() + POINTWISE_SLACK.ln_1p() {
            passed = false;
        }
        rows.push(AdmissibilityRow {
            n,
            m,
            log_max_ratio: lr,
            argmax_x: grid_x.point(i),
            argmax_y: grid_y.point(j),
        });
    }
    Ok(AdmissibilityReport {
        tau,
        c,
        rows,
        passed,
    })
}

/// One link of the construction `v̄ = inf_j C_j C'_{j+1} v_{n_j}`:
/// `v_m(x+y) ≤ c_adm v_n(x) e^{A(τ|y|)}` and `v ≤ c_member v_m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainLink {
    pub n: usize,
    pub m: usize,
    pub c_adm: f64,
    pub c_member: f64,
}

/// `v̄ = inf_j c_adm_j c_member_j v_{n_j}`.
pub fn build_vbar(system: &WeightSystem, chain: &[ChainLink]) -> Result<NachbinWeight> {
    if chain.is_empty() {
        return Err(invalid("v-bar construction needs a non-empty chain"));
    }
    NachbinWeight::new(
        chain
            .iter()
            .map(|l| Ok((l.c_adm * l.c_member, system.member(l.n)?)))
            .collect::<Result<Vec<_>>>()?,
    )
}

/// Safety factor applied to measured chain constants.
pub const CHAIN_SAFETY: f64 = 1.0 + 1e-9;

/// Measures the chain constants for `n_j` with partner `m_j = 2 n_j`: the
/// admissibility maximum over `grid × grid` and `sup v / v_m` over the
/// grid of sums `x + y`.
pub fn measure_chain(
    system: &WeightSystem,
    v: &NachbinWeight,
    a: &WeightSequence,
    tau: f64,
    ns: &[usize],
    grid: &PointGrid,
) -> Result<Vec<ChainLink>> {
    let sums = grid.sum_grid();
    let lv = par_map(sums.len(), |i| v.log_eval(&sums.point(i)))?;
    let mut chain = Vec::with_capacity(ns.len());
    for &n in ns {
        let m = 2 * n;
        let adm = admissibility_check(system, a, tau, &[(n, m)], f64::MAX, grid, grid)?;
        let c_adm = adm.rows[0].log_max_ratio.exp().max(f64::MIN_POSITIVE) * CHAIN_SAFETY;
        let vm = sums.log_values(&system.member(m)?)?;
        let (_, sup) = par_argmax(lv.len(), |i| Ok(lv[i] - vm[i]))?.expect("grid is non-empty");
        chain.push(ChainLink {
            n,
            m,
            c_adm,
            c_member: sup.exp() * CHAIN_SAFETY,
        });
    }
    Ok(chain)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VbarReport {
    /// `max log(v(x+y) / (v̄(x) e^{A(τ|y|)}))`; must be `≤ 0`.
    pub log_max_ratio: f64,
    pub argmax_x: Vec<f64>,
    pub argmax_y: Vec<f64>,
    pub nodes: usize,
    pub passed: bool,
}

/// `v(x+y) ≤ v̄(x) e^{A(τ|y|)}` on `grid × grid`.
pub fn vbar_inequality_check(
    v: &NachbinWeight,
    vbar: &NachbinWeight,
    a: &WeightSequence,
    tau: f64,
    grid: &PointGrid,
) -> Result<VbarReport> {
    let lhs = v.as_weight_function();
    let rhs = par_map(grid.len(), |i| vbar.log_eval(&grid.point(i)))?;
    let (lr, i, j) = max_translation_ratio(&lhs, &rhs, a, tau, grid, grid)?;
    Ok(VbarReport {
        log_max_ratio: lr,
        argmax_x: grid.point(i),
        argmax_y: grid.point(j),
        nodes: grid.len() * grid.len(),
        passed: lr <= POINTWISE_SLACK.ln_1p(),
    })
}

/// `(min, max)` of `log(a / b)` over the grid.
pub fn log_ratio_band(a: &WeightFunction, b: &WeightFunction, grid: &PointGrid) -> Result<(f64, f64)> {
    let r = par_map(grid.len(), |i| {
        let x = grid.point(i);
        Ok(a.log_eval(&x)? - b.log_eval(&x)?)
    })?;
    Ok(r.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
        (lo.min(v), hi.max(v))
    }))
}

/// Largest gap `|w(x_{k+1}) - w(x_k)|` between neighbouring nodes of a
/// one-dimensional grid on `[lo, hi]`.
pub fn max_neighbour_gap(w: &WeightFunction, lo: f64, hi: f64, nodes: usize) -> Result<f64> {
    let xs = linspace(lo, hi, nodes);
    let vals = par_map(xs.len(), |i| w.eval(&[xs[i]]))?;
    Ok(vals
        .windows(2)
        .map(|p| (p[1] - p[0]).abs())
        .fold(0.0, f64::max))
}
