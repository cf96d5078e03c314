//! Small numeric helpers shared by every module: compensated and pairwise
//! summation, grids, and composite quadrature rules.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::Result;

/// Neumaier (improved Kahan) running sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

const PAIRWISE_BLOCK: usize = 32;

/// Pairwise summation with a fixed split rule. The result depends only on
/// the input order, never on thread count.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= PAIRWISE_BLOCK {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

pub fn pairwise_sum_complex(xs: &[Complex64]) -> Complex64 {
    if xs.len() <= PAIRWISE_BLOCK {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum_complex(&xs[..mid]) + pairwise_sum_complex(&xs[mid..])
}

/// `n` points from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => {
            let step = (b - a) / (n - 1) as f64;
            (0..n)
                .map(|i| if i == n - 1 { b } else { a + step * i as f64 })
                .collect()
        }
    }
}

/// `n` points logarithmically spaced from `10^lo` to `10^hi` inclusive.
pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    linspace(lo, hi, n)
        .into_iter()
        .map(|e| 10f64.powf(e))
        .collect()
}

/// Composite Simpson rule on `[a, b]` with `n` (rounded up to even) panels.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let n = (n.max(2) + 1) & !1;
    let h = (b - a) / n as f64;
    let vals: Vec<f64> = (0..=n)
        .map(|i| {
            let w = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            w * f(a + h * i as f64)
        })
        .collect();
    pairwise_sum(&vals) * h / 3.0
}

/// Result of [`adaptive_trapezoid`].
#[derive(Debug, Clone, Copy)]
pub struct TrapezoidResult {
    pub value: Complex64,
    pub step: f64,
    pub last_change: f64,
    pub converged: bool,
}

/// Trapezoid rule on `[a, b]`, halving the step until two successive
/// estimates agree to `abs_tol`. Intended for rapidly decaying analytic
/// integrands, where the rule converges geometrically.
pub fn adaptive_trapezoid<F: Fn(f64) -> Complex64>(
    f: F,
    a: f64,
    b: f64,
    initial_panels: usize,
    abs_tol: f64,
    max_levels: usize,
) -> TrapezoidResult {
    let mut n = initial_panels.max(2);
    let mut h = (b - a) / n as f64;
    let ends = (f(a) + f(b)) * 0.5;
    let interior: Vec<Complex64> = (1..n).map(|i| f(a + h * i as f64)).collect();
    let mut total = ends + pairwise_sum_complex(&interior);
    let mut estimate = total * h;
    let mut last_change = f64::INFINITY;
    for _ in 0..max_levels {
        let mids: Vec<Complex64> = (0..n).map(|i| f(a + h * (i as f64 + 0.5))).collect();
        total += pairwise_sum_complex(&mids);
        n *= 2;
        h *= 0.5;
        let next = total * h;
        last_change = (next - estimate).norm();
        estimate = next;
        if last_change <= abs_tol {
            return TrapezoidResult {
                value: estimate,
                step: h,
                last_change,
                converged: true,
            };
        }
    }
    TrapezoidResult {
        value: estimate,
        step: h,
        last_change,
        converged: false,
    }
}

/// `ln(exp(a) + exp(b))` without overflow.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

pub fn euclidean_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Relative difference `|a - b| / max(|a|, |b|)`, zero when both vanish.
pub fn rel_diff(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Fixed work-unit size for parallel reductions. Chunk boundaries never
/// depend on the thread count, so merged results are bit-identical.
pub const PAR_CHUNK: usize = 256;

/// Arg-max of `f` over `0..len`, ties resolved to the smallest index.
pub fn par_argmax<F>(len: usize, f: F) -> Result<Option<(usize, f64)>>
where
    F: Fn(usize) -> Result<f64> + Sync,
{
    let chunks = len.div_ceil(PAR_CHUNK);
    let partial: Vec<Option<(usize, f64)>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut best: Option<(usize, f64)> = None;
            for i in c * PAR_CHUNK..((c + 1) * PAR_CHUNK).min(len) {
                let v = f(i)?;
                if beats(v, best) {
                    best = Some((i, v));
                }
            }
            Ok(best)
        })
        .collect::<Result<_>>()?;
    let mut best = None;
    for (i, v) in partial.into_iter().flatten() {
        if beats(v, best) {
            best = Some((i, v));
        }
    }
    Ok(best)
}

/// NaN beats everything so that it surfaces in reports.
fn beats(v: f64, best: Option<(usize, f64)>) -> bool {
    match best {
        None => true,
        Some((_, b)) => (v > b) || (v.is_nan() && !b.is_nan()),
    }
}

/// `f` over `0..len` in parallel, collected in index order.
pub fn par_map<T, F>(len: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    (0..len).into_par_iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neumaier_recovers_cancellation() {
        let mut acc = Neumaier::new();
        for x in [1.0, 1e100, 1.0, -1e100] {
            acc.add(x);
        }
        assert_eq!(acc.value(), 2.0);
    }

    #[test]
    fn simpson_integrates_cubic_exactly() {
        let v = simpson(|x| x * x * x - x, 0.0, 2.0, 4);
        assert!((v - 2.0).abs() < 1e-14);
    }

    #[test]
    fn trapezoid_gaussian() {
        let r = adaptive_trapezoid(
            |t| Complex64::new((-std::f64::consts::PI * t * t).exp(), 0.0),
            -8.0,
            8.0,
            16,
            1e-15,
            20,
        );
        assert!(r.converged);
        assert!((r.value.re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn grids() {
        let g = logspace(-2.0, 3.0, 6);
        assert_eq!(g.len(), 6);
        assert!((g[0] - 0.01).abs() < 1e-16);
        assert!((g[5] - 1000.0).abs() < 1e-10);
        assert_eq!(linspace(0.0, 1.0, 1), vec![0.0]);
    }

    #[test]
    fn argmax_prefers_first() {
        let v: Vec<f64> = (0..1000).map(|i| if i % 300 == 7 { 5.0 } else { 0.0 }).collect();
        let (i, m) = par_argmax(v.len(), |i| Ok(v[i])).unwrap().unwrap();
        assert_eq!((i, m), (7, 5.0));
        assert!(par_argmax(0, |_| Ok(0.0)).unwrap().is_none());
    }

    #[test]
    fn log_add() {
        assert!((log_add_exp(0.0, 0.0) - 2f64.ln()).abs() < 1e-15);
        assert_eq!(log_add_exp(f64::NEG_INFINITY, 3.0), 3.0);
    }
}
