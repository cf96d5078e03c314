//! Weighted derivative sup-seminorms of Hermite–Gaussian functions and the
//! sequence-level comparison of the two Roumieu conditions.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::hermite::{HermiteGaussian, DERIVATIVE_BUDGET};
use crate::komatsu::RSequence;
use crate::numeric::{par_map, PAR_CHUNK};
use crate::sequence::WeightSequence;
use crate::weights::{PointGrid, WeightFunction};

pub const DEFAULT_ALPHA_MAX: usize = 40;

/// Outcome of a seminorm evaluation. All magnitudes are also kept in log
/// space; `value` may overflow to infinity where `log_value` does not.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeminormResult {
    pub value: f64,
    pub log_value: f64,
    pub argmax_alpha: Vec<usize>,
    pub argmax_point: Vec<f64>,
    /// Supremum attained at `|α| = alpha_max`.
    pub alpha_boundary: bool,
    /// Supremum attained on the outer frame of the grid.
    pub grid_edge: bool,
    /// Set when either flag is set and the value is non-zero.
    pub lower_bound_only: bool,
    pub alpha_max: usize,
    /// `log sup_{|α| = n, x}` of the term, for `n = 0..=alpha_max`.
    pub order_terms: Vec<f64>,
}

impl SeminormResult {
    pub fn is_interior(&self) -> bool {
        !self.lower_bound_only
    }
}

/// Multi-indices with `|α| ≤ max` in lexicographic order.
pub fn multi_indices(dim: usize, max: usize) -> Vec<Vec<usize>> {
    fn rec(dim: usize, left: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == dim {
            out.push(prefix.clone());
            return;
        }
        for k in 0..=left {
            prefix.push(k);
            rec(dim, left - k, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(dim, max, &mut Vec::with_capacity(dim), &mut out);
    out
}

/// `log |∂^α f(x)|` for every multi-index in `alphas`, at one point.
fn log_derivatives(f: &HermiteGaussian, x: &[f64], alphas: &[Vec<usize>], amax: usize) -> Vec<f64> {
    let d = f.dim();
    let mut tables: Vec<Vec<Vec<Complex64>>> = Vec::with_capacity(f.terms().len());
    let mut buf = Vec::new();
    for t in f.terms() {
        let mut per_axis = Vec::with_capacity(d);
        for (i, &xi) in x.iter().enumerate() {
            t.axis(i).derivatives(xi, amax, &mut buf);
            per_axis.push(buf.clone());
        }
        tables.push(per_axis);
    }
    alphas
        .iter()
        .map(|alpha| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (t, tab) in f.terms().iter().zip(&tables) {
                let mut v = t.amplitude;
                for (axis, &k) in alpha.iter().enumerate() {
                    v *= tab[axis][k];
                }
                acc += v;
            }
            acc.norm().ln()
        })
        .collect()
}

/// `sup_{|α| ≤ alpha_max} sup_{x ∈ grid} |∂^α f(x)| v(x) e^{-log_den[|α|]}`.
pub fn seminorm_with(
    f: &HermiteGaussian,
    log_den: &[f64],
    v: &WeightFunction,
    grid: &PointGrid,
    alpha_max: usize,
) -> Result<SeminormResult> {
    if alpha_max > DERIVATIVE_BUDGET {
        return Err(Error::DerivativeBudget {
            order: alpha_max,
            budget: DERIVATIVE_BUDGET,
        });
    }
    if grid.dim != f.dim() {
        return Err(Error::Dimension {
            expected: f.dim(),
            got: grid.dim,
        });
    }
    if log_den.len() <= alpha_max {
        return Err(invalid("denominator table shorter than alpha_max + 1"));
    }
    let alphas = multi_indices(f.dim(), alpha_max);
    let lv = par_map(grid.len(), |i| v.log_eval(&grid.point(i)))?;
    let chunks = grid.len().div_ceil(PAR_CHUNK);
    let partial: Vec<Vec<(f64, usize)>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut best = vec![(f64::NEG_INFINITY, usize::MAX); alphas.len()];
            for i in c * PAR_CHUNK..((c + 1) * PAR_CHUNK).min(grid.len()) {
                if lv[i] == f64::NEG_INFINITY {
                    continue;
                }
                let logs = log_derivatives(f, &grid.point(i), &alphas, alpha_max);
                for (k, alpha) in alphas.iter().enumerate() {
                    let n: usize = alpha.iter().sum();
                    let term = logs[k] + lv[i] - log_den[n];
                    if term > best[k].0 || best[k].1 == usize::MAX {
                        best[k] = (term, i);
                    }
                }
            }
            best
        })
        .collect();
    let mut per_alpha = vec![(f64::NEG_INFINITY, usize::MAX); alphas.len()];
    for chunk in partial {
        for (slot, cand) in per_alpha.iter_mut().zip(chunk) {
            if cand.1 != usize::MAX && (cand.0 > slot.0 || slot.1 == usize::MAX) {
                *slot = cand;
            }
        }
    }
    let mut order_terms = vec![f64::NEG_INFINITY; alpha_max + 1];
    let mut best_k = 0;
    for (k, alpha) in alphas.iter().enumerate() {
        let n: usize = alpha.iter().sum();
        order_terms[n] = order_terms[n].max(per_alpha[k].0);
        if per_alpha[k].0 > per_alpha[best_k].0 {
            best_k = k;
        }
    }
    let (log_value, idx) = per_alpha[best_k];
    let idx = if idx == usize::MAX { 0 } else { idx };
    let argmax_alpha = alphas[best_k].clone();
    let alpha_boundary = argmax_alpha.iter().sum::<usize>() == alpha_max;
    let grid_edge = grid.is_edge(idx);
    let value = log_value.exp();
    Ok(SeminormResult {
        value,
        log_value,
        argmax_alpha,
        argmax_point: grid.point(idx),
        alpha_boundary,
        grid_edge,
        lower_bound_only: value > 0.0 && (alpha_boundary || grid_edge),
        alpha_max,
        order_terms,
    })
}

/// `log(M_n / h^n)` for `n = 0..=alpha_max`.
pub fn log_den_h(m: &WeightSequence, h: f64, alpha_max: usize) -> Result<Vec<f64>> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(invalid("h must be positive"));
    }
    let lm = m.log_values(alpha_max + 1)?;
    Ok(lm
        .iter()
        .enumerate()
        .map(|(n, l)| l - n as f64 * h.ln())
        .collect())
}

/// `log(M_n ∏_{j ≤ n} r_j)` for `n = 0..=alpha_max`.
pub fn log_den_rj(m: &WeightSequence, r: &RSequence, alpha_max: usize) -> Result<Vec<f64>> {
    let lm = m.log_values(alpha_max + 1)?;
    lm.iter()
        .enumerate()
        .map(|(n, l)| Ok(l + r.running_product(n)?))
        .collect()
}

/// `log(M_n ∏_{j ≤ n} c r_j)` for `n = 0..=alpha_max`.
pub fn log_den_rj_scaled(m: &WeightSequence, r: &RSequence, c: f64, alpha_max: usize) -> Result<Vec<f64>> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(invalid("scale must be positive"));
    }
    Ok(log_den_rj(m, r, alpha_max)?
        .into_iter()
        .enumerate()
        .map(|(n, l)| l + (n + 1) as f64 * c.ln())
        .collect())
}

/// `sup_α sup_x h^{|α|} |∂^α f(x)| v(x) / M_α`.
pub fn seminorm_h(
    f: &HermiteGaussian,
    m: &WeightSequence,
    h: f64,
    v: &WeightFunction,
    grid: &PointGrid,
    alpha_max: usize,
) -> Result<SeminormResult> {
    seminorm_with(f, &log_den_h(m, h, alpha_max)?, v, grid, alpha_max)
}

/// `sup_α sup_x |∂^α f(x)| v(x) / (M_α ∏_{j ≤ |α|} r_j)`.
pub fn seminorm_rj(
    f: &HermiteGaussian,
    m: &WeightSequence,
    r: &RSequence,
    v: &WeightFunction,
    grid: &PointGrid,
    alpha_max: usize,
) -> Result<SeminormResult> {
    seminorm_with(f, &log_den_rj(m, r, alpha_max)?, v, grid, alpha_max)
}

/// A single term `log(|∂^α f(x)| v(x)) - log_den[|α|]`, for recomputation.
pub fn seminorm_term(
    f: &HermiteGaussian,
    log_den: &[f64],
    v: &WeightFunction,
    alpha: &[usize],
    x: &[f64],
) -> Result<f64> {
    let n: usize = alpha.iter().sum();
    let d = f.derivative(alpha)?.eval(x)?;
    Ok(d.norm().ln() + v.log_eval(x)? - log_den[n])
}

/// Orders kept free at the top of the range before a supremum counts as
/// attained.
pub const TAIL_MARGIN: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyRow {
    pub label: String,
    pub log_sup: f64,
    pub argmax_order: usize,
    pub finite: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoumieuReport {
    pub alpha_max: usize,
    pub log_bound: f64,
    pub inductive: Vec<FamilyRow>,
    pub projective: Vec<FamilyRow>,
    /// Some `h` gives a finite supremum.
    pub inductive_finite: bool,
    /// Every `r` gives a finite supremum.
    pub projective_finite: bool,
    pub agree: bool,
}

/// Truncated finiteness of `sup_n (log_a[n] - log_den[n])`: below the
/// bound and attained at least [`TAIL_MARGIN`] orders before the end.
pub fn truncated_sup(log_terms: &[f64], log_bound: f64) -> (f64, usize, bool) {
    let mut best = (f64::NEG_INFINITY, 0usize);
    for (n, &t) in log_terms.iter().enumerate() {
        if t > best.0 {
            best = (t, n);
        }
    }
    let last = log_terms.len().saturating_sub(1);
    let finite = best.0 == f64::NEG_INFINITY || (best.0 < log_bound && best.1 + TAIL_MARGIN <= last);
    (best.0, best.1, finite)
}

/// Compares `(∃h) sup_α a_α h^{|α|} / M_α < B` with
/// `(∀r) sup_α a_α / (M_α ∏ r_j) < B` on `|α| ≤ alpha_max`.
///
/// `log_a` gives `log a_α` for a multi-index (`-∞` for zero entries).
pub fn roumieu_sequence_equivalence(
    log_a: &dyn Fn(&[usize]) -> f64,
    dim: usize,
    m: &WeightSequence,
    h_grid: &[f64],
    r_list: &[RSequence],
    alpha_max: usize,
    bound: f64,
) -> Result<RoumieuReport> {
    if h_grid.is_empty() || r_list.is_empty() {
        return Err(invalid("need at least one h and one r"));
    }
    // a_α enters only through the largest entry of each order
    let mut by_order = vec![f64::NEG_INFINITY; alpha_max + 1];
    for alpha in multi_indices(dim, alpha_max) {
        let n: usize = alpha.iter().sum();
        by_order[n] = by_order[n].max(log_a(&alpha));
    }
    let log_bound = bound.ln();
    let row = |label: String, den: Vec<f64>| {
        let terms: Vec<f64> = by_order.iter().zip(&den).map(|(a, d)| a - d).collect();
        let (log_sup, argmax_order, finite) = truncated_sup(&terms, log_bound);
        FamilyRow {
            label,
            log_sup,
            argmax_order,
            finite,
        }
    };
    let inductive = h_grid
        .iter()
        .map(|&h| Ok(row(format!("h={h}"), log_den_h(m, h, alpha_max)?)))
        .collect::<Result<Vec<_>>>()?;
    let projective = r_list
        .iter()
        .map(|r| Ok(row(format!("r={}", r.label()), log_den_rj(m, r, alpha_max)?)))
        .collect::<Result<Vec<_>>>()?;
    let inductive_finite = inductive.iter().any(|r| r.finite);
    let projective_finite = projective.iter().all(|r| r.finite);
    Ok(RoumieuReport {
        alpha_max,
        log_bound,
        inductive,
        projective,
        inductive_finite,
        projective_finite,
        agree: inductive_finite == projective_finite,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn setup() -> (HermiteGaussian, WeightSequence, PointGrid) {
        (
            HermiteGaussian::gaussian(1, PI).unwrap(),
            WeightSequence::gevrey(1.0).unwrap(),
            PointGrid::default_for(1),
        )
    }

    #[test]
    fn order_zero_is_sup_of_gaussian() {
        let (f, m, g) = setup();
        let r = seminorm_h(&f, &m, 1.0, &WeightFunction::Unit, &g, 0).unwrap();
        assert!((r.value - 1.0).abs() < 1e-15);
        assert_eq!(r.argmax_alpha, vec![0]);
        assert_eq!(r.argmax_point, vec![0.0]);
        assert!(r.lower_bound_only);
    }

    #[test]
    fn order_one() {
        let (f, m, _) = setup();
        // fine grid so that 1/sqrt(2π) is resolved
        let g = PointGrid::new(1, 2.0, 400_001).unwrap();
        let r = seminorm_h(&f, &m, 1.0, &WeightFunction::Unit, &g, 1).unwrap();
        let expect = (2.0 * PI).sqrt() * (-0.5f64).exp();
        assert!((r.value - expect).abs() < 1e-9, "{}", r.value);
        assert_eq!(r.argmax_alpha, vec![1]);
        assert!((r.argmax_point[0].abs() - 1.0 / (2.0 * PI).sqrt()).abs() < 1e-4);
    }

    #[test]
    fn alpha_forty_is_interior() {
        let (f, m, g) = setup();
        let r = seminorm_h(&f, &m, 1.0, &WeightFunction::Unit, &g, 40).unwrap();
        assert!(r.is_interior());
        assert!(r.order_terms[40] < r.order_terms[10]);
    }

    #[test]
    fn rj_relations() {
        let (f, m, g) = setup();
        let r = RSequence::linear(1.0, 1.0).unwrap();
        let a = seminorm_h(&f, &m, 1.0, &WeightFunction::Unit, &g, 20).unwrap();
        let b = seminorm_rj(&f, &m, &r, &WeightFunction::Unit, &g, 20).unwrap();
        assert!(b.value <= a.value);
        assert!((b.order_terms[0] - a.order_terms[0]).abs() < 1e-15);
        let half = WeightSequence::gevrey(0.5).unwrap();
        let c = seminorm_rj(&f, &half, &r, &WeightFunction::Unit, &g, 40).unwrap();
        assert!(c.is_interior() && c.value.is_finite());
    }

    #[test]
    fn multi_index_order() {
        let idx = multi_indices(2, 2);
        assert_eq!(
            idx,
            vec![
                vec![0, 0],
                vec![0, 1],
                vec![0, 2],
                vec![1, 0],
                vec![1, 1],
                vec![2, 0]
            ]
        );
        assert_eq!(multi_indices(2, 40).len(), 41 * 42 / 2);
    }

    #[test]
    fn zero_function() {
        let (_, m, g) = setup();
        let r = seminorm_h(&HermiteGaussian::zero(1), &m, 1.0, &WeightFunction::Unit, &g, 5).unwrap();
        assert_eq!(r.value, 0.0);
        assert!(!r.lower_bound_only);
    }

    #[test]
    fn sequence_equivalence_examples() {
        let m = WeightSequence::gevrey(1.0).unwrap();
        let hs = [1.0, 0.5, 0.25, 0.125];
        let rs = vec![
            RSequence::linear(1.0, 1.0).unwrap(),
            RSequence::from_generator(crate::komatsu::RGenerator::Power {
                coef: 1.0,
                exponent: 0.5,
            })
            .unwrap(),
        ];
        let lm = m.log_values(201).unwrap();
        let geometric = |a: &[usize]| lm[a[0]] - a[0] as f64 * 2f64.ln();
        let r = roumieu_sequence_equivalence(&geometric, 1, &m, &hs, &rs, 200, 1e100).unwrap();
        assert!(r.inductive_finite && r.projective_finite && r.agree);
        let fact = |a: &[usize]| 2.0 * lm[a[0]];
        let r = roumieu_sequence_equivalence(&fact, 1, &m, &hs, &rs, 200, 1e100).unwrap();
        assert!(!r.inductive_finite && !r.projective_finite && r.agree);
        let zero = |_: &[usize]| f64::NEG_INFINITY;
        let r = roumieu_sequence_equivalence(&zero, 1, &m, &hs, &rs, 200, 1e100).unwrap();
        assert!(r.inductive_finite && r.projective_finite);
    }
}
