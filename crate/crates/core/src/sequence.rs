//! Weight sequences `M_p`, their standing conditions, and the associated
//! function `M(t) = sup_p log(t^p M_0 / M_p)`.
//!
//! Values are held in log space. Sequences with a generator are extended on
//! demand (under a lock, deterministically) up to a hard budget; table
//! sequences are limited to what was supplied.

use std::fmt;
use std::sync::{Arc, RwLock};

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::komatsu::RSequence;
use crate::numeric::{euclidean_norm, Neumaier};

/// Values eagerly materialized for generated sequences.
pub const DEFAULT_STORED: usize = 512;
/// Hard cap on lazily extended table length.
pub const DEFAULT_MAX_LEN: usize = 1 << 24;
/// Consecutive decreasing terms required before the brute-force supremum is
/// declared localized.
pub const LOCALIZATION_RUN: usize = 8;

/// Closed forms that can extend a sequence indefinitely.
#[derive(Clone)]
pub enum SequenceGenerator {
    /// `M_p = p!^s`.
    Gevrey { s: f64 },
    /// `M_p = (log(p + 2))^p`.
    LogPower,
    /// `M_p = c` for all `p`.
    Constant { value: f64 },
    /// `M_p * prod_{j=0}^{p} r_j`.
    KomatsuProduct {
        base: Arc<WeightSequence>,
        r: RSequence,
    },
}

impl fmt::Debug for SequenceGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Gevrey { s } => write!(f, "Gevrey(s={s})"),
            Self::LogPower => write!(f, "LogPower"),
            Self::Constant { value } => write!(f, "Constant({value})"),
            Self::KomatsuProduct { base, r } => {
                write!(f, "KomatsuProduct({} * prod {})", base.label(), r.label())
            }
        }
    }
}

enum Step {
    Ratio(f64),
    Value(f64),
}

impl SequenceGenerator {
    fn log_first(&self) -> Result<f64> {
        match self {
            Self::Gevrey { .. } | Self::LogPower => Ok(0.0),
            Self::Constant { value } => Ok(value.ln()),
            Self::KomatsuProduct { base, r } => Ok(base.log_value(0)? + r.log_value(0)?),
        }
    }

    fn step(&self, p: usize) -> Result<Step> {
        Ok(match self {
            Self::Gevrey { s } => Step::Ratio(s * (p as f64).ln()),
            Self::LogPower => {
                let pf = p as f64;
                Step::Value(pf * (pf + 2.0).ln().ln())
            }
            Self::Constant { .. } => Step::Ratio(0.0),
            Self::KomatsuProduct { base, r } => Step::Ratio(base.log_ratio(p)? + r.log_value(p)?),
        })
    }

    /// Largest table length the generator can serve.
    fn capacity(&self) -> usize {
        match self {
            Self::KomatsuProduct { base, r } => base.max_len().min(r.capacity()),
            _ => usize::MAX,
        }
    }

    fn log_convex(&self) -> bool {
        match self {
            Self::Gevrey { s } => *s >= 0.0,
            Self::LogPower => false,
            Self::Constant { .. } => true,
            // ratios m_p r_p are non-decreasing when both factors are
            Self::KomatsuProduct { base, .. } => base.is_log_convex(),
        }
    }
}

struct SeqTable {
    log_value: Vec<f64>,
    /// `log m_p = log M_p - log M_{p-1}`; entry 0 is unused.
    log_ratio: Vec<f64>,
    acc: Neumaier,
}

/// A positive sequence `M_0, M_1, ...` stored in log space.
pub struct WeightSequence {
    label: String,
    generator: Option<SequenceGenerator>,
    table: RwLock<SeqTable>,
    max_len: usize,
    log_convex: bool,
}

impl fmt::Debug for WeightSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeightSequence")
            .field("label", &self.label)
            .field("generator", &self.generator)
            .field("stored", &self.stored_len())
            .field("log_convex", &self.log_convex)
            .finish()
    }
}

impl Clone for WeightSequence {
    fn clone(&self) -> Self {
        let t = self.table.read().unwrap();
        Self {
            label: self.label.clone(),
            generator: self.generator.clone(),
            table: RwLock::new(SeqTable {
                log_value: t.log_value.clone(),
                log_ratio: t.log_ratio.clone(),
                acc: t.acc,
            }),
            max_len: self.max_len,
            log_convex: self.log_convex,
        }
    }
}

impl WeightSequence {
    pub fn from_generator(label: impl Into<String>, generator: SequenceGenerator) -> Result<Self> {
        if let SequenceGenerator::Gevrey { s } = generator {
            if !(s.is_finite() && s >= 0.0) {
                return Err(invalid(format!("Gevrey index must be finite and >= 0, got {s}")));
            }
        }
        if let SequenceGenerator::Constant { value } = generator {
            if !(value.is_finite() && value > 0.0) {
                return Err(invalid("constant sequence value must be positive"));
            }
        }
        let first = generator.log_first()?;
        let mut acc = Neumaier::new();
        acc.add(first);
        let max_len = DEFAULT_MAX_LEN.min(generator.capacity());
        let seq = Self {
            label: label.into(),
            log_convex: generator.log_convex(),
            generator: Some(generator),
            table: RwLock::new(SeqTable {
                log_value: vec![first],
                log_ratio: vec![f64::NAN],
                acc,
            }),
            max_len,
        };
        seq.ensure(DEFAULT_STORED.min(max_len))?;
        Ok(seq)
    }

    /// `M_p = p!^s`.
    pub fn gevrey(s: f64) -> Result<Self> {
        Self::from_generator(format!("gevrey({s})"), SequenceGenerator::Gevrey { s })
    }

    pub fn log_power() -> Self {
        Self::from_generator("log_power", SequenceGenerator::LogPower)
            .expect("log-power generator is total")
    }

    pub fn constant(value: f64) -> Result<Self> {
        Self::from_generator(format!("constant({value})"), SequenceGenerator::Constant { value })
    }

    /// Finite table of strictly positive values. Log-convexity is checked
    /// over the whole table and selects the fast associated-function path.
    pub fn from_values(label: impl Into<String>, values: &[f64]) -> Result<Self> {
        if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(invalid("weight sequence values must be finite and strictly positive"));
        }
        Self::from_log_values(label, values.iter().map(|v| v.ln()).collect())
    }

    pub fn from_log_values(label: impl Into<String>, log_values: Vec<f64>) -> Result<Self> {
        if log_values.is_empty() {
            return Err(invalid("weight sequence table is empty"));
        }
        if log_values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("weight sequence log-values must be finite"));
        }
        let mut log_ratio = vec![f64::NAN];
        log_ratio.extend(log_values.windows(2).map(|w| w[1] - w[0]));
        let log_convex = log_ratio
            .iter()
            .skip(1)
            .zip(log_ratio.iter().skip(2))
            .all(|(a, b)| *b >= *a - 1e-13 * (1.0 + a.abs()));
        let mut acc = Neumaier::new();
        acc.add(*log_values.last().unwrap());
        Ok(Self {
            label: label.into(),
            generator: None,
            max_len: log_values.len(),
            table: RwLock::new(SeqTable {
                log_value: log_values,
                log_ratio,
                acc,
            }),
            log_convex,
        })
    }

    /// Overrides the extension budget (never below what is already stored).
    pub fn with_max_len(mut self, max_len: usize) -> Self {
        if self.generator.is_some() {
            let cap = self.generator.as_ref().map_or(usize::MAX, |g| g.capacity());
            self.max_len = max_len.min(cap).max(self.stored_len());
        }
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn generator(&self) -> Option<&SequenceGenerator> {
        self.generator.as_ref()
    }

    pub fn is_log_convex(&self) -> bool {
        self.log_convex
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn stored_len(&self) -> usize {
        self.table.read().unwrap().log_value.len()
    }

    /// Materializes at least `len` values.
    pub fn ensure(&self, len: usize) -> Result<()> {
        if len <= self.stored_len() {
            return Ok(());
        }
        let Some(generator) = &self.generator else {
            return Err(Error::Extension {
                requested: len - 1,
                available: self.stored_len(),
            });
        };
        if len > self.max_len {
            return Err(Error::Extension {
                requested: len - 1,
                available: self.max_len,
            });
        }
        let mut t = self.table.write().unwrap();
        let current = t.log_value.len();
        if len <= current {
            return Ok(());
        }
        let target = len.max(current.saturating_mul(2)).min(self.max_len);
        t.log_value.reserve(target - current);
        t.log_ratio.reserve(target - current);
        for p in current..target {
            let prev = t.log_value[p - 1];
            let (value, ratio) = match generator.step(p)? {
                Step::Ratio(r) => {
                    t.acc.add(r);
                    (t.acc.value(), r)
                }
                Step::Value(v) => {
                    t.acc = Neumaier::new();
                    t.acc.add(v);
                    (v, v - prev)
                }
            };
            t.log_value.push(value);
            t.log_ratio.push(ratio);
        }
        Ok(())
    }

    /// `log M_p`.
    pub fn log_value(&self, p: usize) -> Result<f64> {
        self.ensure(p + 1)?;
        Ok(self.table.read().unwrap().log_value[p])
    }

    pub fn value(&self, p: usize) -> Result<f64> {
        Ok(self.log_value(p)?.exp())
    }

    /// `log m_p = log(M_p / M_{p-1})` for `p >= 1`.
    pub fn log_ratio(&self, p: usize) -> Result<f64> {
        if p == 0 {
            return Err(invalid("ratio m_p is defined for p >= 1"));
        }
        self.ensure(p + 1)?;
        Ok(self.table.read().unwrap().log_ratio[p])
    }

    /// Copy of `log M_0 .. log M_{len-1}`.
    pub fn log_values(&self, len: usize) -> Result<Vec<f64>> {
        self.ensure(len)?;
        Ok(self.table.read().unwrap().log_value[..len].to_vec())
    }

    /// Associated function, dispatching to the fast path for log-convex
    /// sequences and to the brute-force supremum otherwise.
    pub fn associated_function(&self, t: f64) -> Result<f64> {
        if self.log_convex {
            self.associated_function_fast(t)
        } else {
            self.associated_function_brute(t)
        }
    }

    /// `M(t) = sum_{p >= 1, m_p <= t} log(t / m_p)`, evaluated as
    /// `p* log t + log M_0 - log M_{p*}` with `p* = #{p >= 1 : m_p <= t}`.
    /// Only valid when `m_p` is non-decreasing.
    pub fn associated_function_fast(&self, t: f64) -> Result<f64> {
        check_t(t)?;
        if t == 0.0 {
            return Ok(0.0);
        }
        let lt = t.ln();
        loop {
            {
                let tab = self.table.read().unwrap();
                let n = tab.log_ratio.len();
                if n >= 2 && tab.log_ratio[n - 1] > lt {
                    let p_star = tab.log_ratio[1..].partition_point(|r| *r <= lt);
                    if p_star == 0 {
                        return Ok(0.0);
                    }
                    let m = p_star as f64 * lt + tab.log_value[0] - tab.log_value[p_star];
                    return Ok(m.max(0.0));
                }
            }
            let stored = self.stored_len();
            if self.ensure(stored + 1).is_err() {
                return Err(Error::NotLocalized { t, evaluated: stored });
            }
        }
    }

    /// Direct maximization of `log(t^p M_0 / M_p)` over `p`, extending the
    /// table until [`LOCALIZATION_RUN`] consecutive terms have decreased
    /// past the running maximum.
    pub fn associated_function_brute(&self, t: f64) -> Result<f64> {
        check_t(t)?;
        if t == 0.0 {
            return Ok(0.0);
        }
        let lt = t.ln();
        let mut best = 0.0f64;
        let mut prev = 0.0f64;
        let mut run = 0usize;
        let mut p = 1usize;
        loop {
            {
                let tab = self.table.read().unwrap();
                let lm0 = tab.log_value[0];
                while p < tab.log_value.len() {
                    let term = p as f64 * lt + lm0 - tab.log_value[p];
                    if term > best {
                        best = term;
                        run = 0;
                    } else if term < prev {
                        run += 1;
                        if run >= LOCALIZATION_RUN {
                            return Ok(best);
                        }
                    } else {
                        run = 0;
                    }
                    prev = term;
                    p += 1;
                }
            }
            if self.ensure(p + 1).is_err() {
                return Err(Error::NotLocalized { t, evaluated: p });
            }
        }
    }

    /// `M(|x|)` with the Euclidean norm.
    pub fn radial(&self, x: &[f64]) -> Result<f64> {
        self.associated_function(euclidean_norm(x))
    }
}

fn check_t(t: f64) -> Result<()> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(invalid(format!("associated function needs finite t >= 0, got {t}")));
    }
    Ok(())
}

/// Outcome of the log-convexity check.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct M1Check {
    pub holds: bool,
    pub first_violation: Option<usize>,
    pub checked_up_to: usize,
}

/// `M_p^2 <= M_{p-1} M_{p+1}` for `1 <= p <= up_to`.
pub fn check_m1(seq: &WeightSequence, up_to: usize) -> Result<M1Check> {
    let logs = seq.log_values(up_to + 2)?;
    for p in 1..=up_to {
        let lhs = 2.0 * logs[p];
        let rhs = logs[p - 1] + logs[p + 1];
        let slack = 1e-13 * (1.0 + logs[p - 1].abs() + logs[p + 1].abs());
        if lhs > rhs + slack {
            return Ok(M1Check {
                holds: false,
                first_violation: Some(p),
                checked_up_to: up_to,
            });
        }
    }
    Ok(M1Check {
        holds: true,
        first_violation: None,
        checked_up_to: up_to,
    })
}

/// Constants with `M_{p+1} <= C0 H^p M_p` for every `p <= verified_up_to`.
#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct M2PrimeWitness {
    pub c0: f64,
    pub h: f64,
    pub verified_up_to: usize,
}

impl M2PrimeWitness {
    /// Re-checks the witness against `seq` on its verified range.
    pub fn verify(&self, seq: &WeightSequence) -> Result<bool> {
        let logs = seq.log_values(self.verified_up_to + 2)?;
        let (lc, lh) = (self.c0.ln(), self.h.ln());
        Ok((0..=self.verified_up_to).all(|p| {
            let rhs = lc + p as f64 * lh + logs[p];
            logs[p + 1] <= rhs + 1e-12 * (1.0 + rhs.abs())
        }))
    }
}

/// Pins `C0 = max(1, M_1/M_0)` and returns the smallest `H >= 1` making the
/// inequality hold for `0 <= p <= up_to`. A certificate for the truncation
/// only.
pub fn fit_m2prime(seq: &WeightSequence, up_to: usize) -> Result<M2PrimeWitness> {
    if up_to < 1 {
        return Err(invalid("fit_m2prime needs up_to >= 1"));
    }
    let logs = seq.log_values(up_to + 2)?;
    let log_c0 = (logs[1] - logs[0]).max(0.0);
    let log_h = (1..=up_to)
        .map(|p| (logs[p + 1] - logs[p] - log_c0) / p as f64)
        .fold(0.0f64, f64::max);
    Ok(M2PrimeWitness {
        c0: log_c0.exp(),
        h: log_h.exp(),
        verified_up_to: up_to,
    })
}

/// One grid point of [`check_m2prime_decay`], all in log form.
#[derive(Debug, Clone, Serialize)]
pub struct DecayPoint {
    pub t: f64,
    /// `M(t) - M(H^{d+1} t) - log((2C0)^{d+1} / (1 + t^{d+1}))`; must be `<= 0`.
    pub log_ratio_decay: f64,
    /// `max_k [k log(t/C0) - (M(H^k t) - M(t))]` over `1 <= k <= d+1`; must be `<= 0`.
    pub log_ratio_growth: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayReport {
    pub dimension: usize,
    pub witness: M2PrimeWitness,
    pub points: Vec<DecayPoint>,
    /// Largest measured `lhs / rhs` over both inequalities and all points.
    pub max_ratio: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Evaluates `e^{M(t) - M(H^{d+1} t)} <= (2C0)^{d+1} (1 + t^{d+1})^{-1}` and
/// `M(H^k t) - M(t) >= k log(t / C0)` on `t_grid`.
pub fn check_m2prime_decay(
    seq: &WeightSequence,
    witness: &M2PrimeWitness,
    d: usize,
    t_grid: &[f64],
    tolerance: f64,
) -> Result<DecayReport> {
    if d == 0 {
        return Err(invalid("dimension must be >= 1"));
    }
    let k_max = d + 1;
    let kf = k_max as f64;
    let log_2c0 = (2.0 * witness.c0).ln();
    let mut points = Vec::with_capacity(t_grid.len());
    let mut max_log = f64::NEG_INFINITY;
    for &t in t_grid {
        let m_t = seq.associated_function(t)?;
        let mut growth = f64::NEG_INFINITY;
        let mut m_top = m_t;
        for k in 1..=k_max {
            let m_k = seq.associated_function(witness.h.powi(k as i32) * t)?;
            let lower = if t == 0.0 {
                f64::NEG_INFINITY
            } else {
                k as f64 * (t / witness.c0).ln()
            };
            growth = growth.max(lower - (m_k - m_t));
            m_top = m_k;
        }
        let log_rhs = kf * log_2c0 - (t.powf(kf)).ln_1p();
        let decay = m_t - m_top - log_rhs;
        max_log = max_log.max(decay).max(growth);
        points.push(DecayPoint {
            t,
            log_ratio_decay: decay,
            log_ratio_growth: growth,
        });
    }
    let max_ratio = max_log.exp();
    Ok(DecayReport {
        dimension: d,
        witness: *witness,
        points,
        max_ratio,
        tolerance,
        passed: max_ratio <= 1.0 + tolerance,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PrecedesReport {
    /// `(p, M_p^{1/p} / log p)` for `2 <= p <= up_to`.
    pub ratios: Vec<(usize, f64)>,
    pub increasing_tail: bool,
    pub last: f64,
    pub threshold: f64,
    /// Truncated heuristic for `M_p^{1/p} / log p -> infinity`.
    pub verdict: bool,
}

/// Trend test for `(log p)^p ≺ M_p`. The tail is the upper half of the
/// index range; it must be strictly increasing and end above `threshold`.
pub fn precedes_log_growth(seq: &WeightSequence, up_to: usize, threshold: f64) -> Result<PrecedesReport> {
    if up_to < 10 {
        return Err(invalid("precedes_log_growth needs up_to >= 10"));
    }
    let logs = seq.log_values(up_to + 1)?;
    let ratios: Vec<(usize, f64)> = (2..=up_to)
        .map(|p| {
            let pf = p as f64;
            (p, (logs[p] / pf - pf.ln().ln()).exp())
        })
        .collect();
    let tail_start = ratios.len() / 2;
    let increasing_tail = ratios[tail_start..].windows(2).all(|w| w[1].1 > w[0].1);
    let last = ratios.last().unwrap().1;
    Ok(PrecedesReport {
        verdict: increasing_tail && last > threshold,
        ratios,
        increasing_tail,
        last,
        threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    fn factorial() -> WeightSequence {
        WeightSequence::gevrey(1.0).unwrap()
    }

    #[test]
    fn assoc_factorial_small_values() {
        let m = factorial();
        assert_eq!(m.associated_function(0.0).unwrap(), 0.0);
        assert_eq!(m.associated_function(1.0).unwrap(), 0.0);
        assert!((m.associated_function(2.0).unwrap() - LN_2).abs() < 1e-15);
        assert!((m.associated_function_brute(2.0).unwrap() - LN_2).abs() < 1e-15);
        // M(4) = log(4^4 / 4!) = log(32/3)
        let m4 = m.associated_function(4.0).unwrap();
        assert!((m4 - (32.0f64 / 3.0).ln()).abs() < 1e-13);
    }

    #[test]
    fn radial_is_norm_based() {
        let m = factorial();
        let s = 2f64.sqrt();
        assert!((m.radial(&[s, s]).unwrap() - LN_2).abs() < 1e-12);
        assert!((m.radial(&[-2.0]).unwrap() - LN_2).abs() < 1e-15);
        assert_eq!(m.radial(&[0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn negative_t_rejected() {
        assert!(factorial().associated_function(-1.0).is_err());
        assert!(factorial().associated_function(f64::NAN).is_err());
    }

    #[test]
    fn table_without_generator_cannot_extend() {
        let m = WeightSequence::from_values("t", &[1.0, 1.0, 2.0]).unwrap();
        assert!(matches!(m.log_value(5), Err(Error::Extension { .. })));
        assert!(matches!(check_m1(&m, 3), Err(Error::Extension { .. })));
    }

    #[test]
    fn constant_sequence_is_not_localized() {
        let m = WeightSequence::constant(1.0).unwrap().with_max_len(4096);
        assert!(matches!(
            m.associated_function(2.0),
            Err(Error::NotLocalized { .. })
        ));
        assert!(matches!(
            m.associated_function_brute(2.0),
            Err(Error::NotLocalized { .. })
        ));
        assert_eq!(m.associated_function(0.5).unwrap(), 0.0);
    }

    #[test]
    fn m1_examples() {
        assert!(check_m1(&factorial(), 50).unwrap().holds);
        assert!(check_m1(&WeightSequence::gevrey(2.0).unwrap(), 50).unwrap().holds);
        let bad = WeightSequence::from_values("bad", &[1.0, 1.0, 4.0, 5.0, 30.0]).unwrap();
        let r = check_m1(&bad, 3).unwrap();
        assert!(!r.holds);
        assert_eq!(r.first_violation, Some(2));
        assert!(!bad.is_log_convex());
    }

    #[test]
    fn m2prime_examples() {
        let w = fit_m2prime(&factorial(), 100).unwrap();
        assert_eq!(w.c0, 1.0);
        assert!((w.h - 2.0).abs() < 1e-12);
        assert!(w.verify(&factorial()).unwrap());

        let c = WeightSequence::constant(3.0).unwrap();
        let w = fit_m2prime(&c, 100).unwrap();
        assert_eq!((w.c0, w.h), (1.0, 1.0));

        let g2 = WeightSequence::gevrey(2.0).unwrap();
        let w = fit_m2prime(&g2, 100).unwrap();
        let expected = (1..=100)
            .map(|p| ((p + 1) as f64).powf(2.0 / p as f64))
            .fold(0.0, f64::max);
        assert!((w.h - expected).abs() < 1e-12 * expected);
        assert!(fit_m2prime(&g2, 0).is_err());
    }

    #[test]
    fn decay_check_factorial_at_one() {
        let m = factorial();
        let w = M2PrimeWitness {
            c0: 1.0,
            h: 2.0,
            verified_up_to: 100,
        };
        let r = check_m2prime_decay(&m, &w, 1, &[0.0, 1.0], 1e-12).unwrap();
        assert!(r.passed);
        // e^{M(1) - M(4)} = 3/32 against 4/2
        let expected = (3.0f64 / 32.0 / 2.0).ln();
        assert!((r.points[1].log_ratio_decay - expected).abs() < 1e-12);
        // t = 0: 1 <= (2 C0)^2
        assert!((r.points[0].log_ratio_decay + 4f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn precedes_examples() {
        assert!(precedes_log_growth(&factorial(), 200, 1.0).unwrap().verdict);
        assert!(!precedes_log_growth(&WeightSequence::log_power(), 200, 1.0).unwrap().verdict);
        assert!(!precedes_log_growth(&WeightSequence::constant(1.0).unwrap(), 200, 1.0).unwrap().verdict);
        assert!(precedes_log_growth(&factorial(), 5, 1.0).is_err());
    }

    #[test]
    fn concurrent_extension_is_consistent() {
        let m = Arc::new(WeightSequence::gevrey(0.5).unwrap());
        let handles: Vec<_> = (0..4)
            .map(|i| {
                let m = Arc::clone(&m);
                std::thread::spawn(move || m.associated_function(50.0 + i as f64).unwrap())
            })
            .collect();
        let par: Vec<f64> = handles.into_iter().map(|h| h.join().unwrap()).collect();
        let fresh = WeightSequence::gevrey(0.5).unwrap();
        for (i, v) in par.iter().enumerate() {
            assert_eq!(*v, fresh.associated_function(50.0 + i as f64).unwrap());
        }
    }
}
