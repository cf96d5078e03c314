//! Komatsu's family: positive non-decreasing sequences `r_j -> infinity`,
//! the product sequences `M_p prod_{j<=p} r_j`, their associated functions,
//! and the geometric regularization `r'_j = min(r_j, c 2^j)`.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::numeric::Neumaier;
use crate::sequence::{fit_m2prime, M2PrimeWitness, SequenceGenerator, WeightSequence};

/// Closed forms for members of the family. Each variant diverges by
/// construction once its parameters pass validation.
#[derive(Debug, Clone, PartialEq)]
pub enum RGenerator {
    /// `a j + b`.
    Linear { a: f64, b: f64 },
    /// `coef (j + 1)^exponent`.
    Power { coef: f64, exponent: f64 },
    /// `scale base^j`.
    Geometric { scale: f64, base: f64 },
    /// `exp(j^exponent)`.
    ExpPower { exponent: f64 },
    /// `log(j + shift)`.
    Log { shift: f64 },
    /// `min(r_j, c 2^j)`.
    Regularized { base: Box<RSequence>, log_c: f64 },
}

impl RGenerator {
    fn validate(&self) -> Result<()> {
        let ok = match self {
            Self::Linear { a, b } => *a > 0.0 && *b > 0.0 && a.is_finite() && b.is_finite(),
            Self::Power { coef, exponent } => *coef > 0.0 && *exponent > 0.0 && coef.is_finite() && exponent.is_finite(),
            Self::Geometric { scale, base } => *scale > 0.0 && *base > 1.0 && scale.is_finite() && base.is_finite(),
            Self::ExpPower { exponent } => *exponent > 0.0 && exponent.is_finite(),
            Self::Log { shift } => *shift > 1.0 && shift.is_finite(),
            Self::Regularized { log_c, .. } => log_c.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(invalid(format!(
                "{self:?} is not a positive non-decreasing sequence tending to infinity"
            )))
        }
    }

    fn log_value(&self, j: usize) -> Result<f64> {
        let jf = j as f64;
        Ok(match self {
            Self::Linear { a, b } => (a * jf + b).ln(),
            Self::Power { coef, exponent } => coef.ln() + exponent * (jf + 1.0).ln(),
            Self::Geometric { scale, base } => scale.ln() + jf * base.ln(),
            Self::ExpPower { exponent } => jf.powf(*exponent),
            Self::Log { shift } => (jf + shift).ln().ln(),
            Self::Regularized { base, log_c } => base.log_value(j)?.min(log_c + jf * std::f64::consts::LN_2),
        })
    }

    fn label(&self) -> String {
        match self {
            Self::Linear { a, b } => format!("linear({a},{b})"),
            Self::Power { coef, exponent } => format!("power({coef},{exponent})"),
            Self::Geometric { scale, base } => format!("geometric({scale},{base})"),
            Self::ExpPower { exponent } => format!("exp_power({exponent})"),
            Self::Log { shift } => format!("log({shift})"),
            Self::Regularized { base, .. } => format!("regularized({})", base.label()),
        }
    }
}

/// A member of Komatsu's family, in log space.
#[derive(Clone, PartialEq)]
pub struct RSequence {
    label: String,
    generator: Option<RGenerator>,
    table: Option<Arc<Vec<f64>>>,
}

impl fmt::Debug for RSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RSequence({})", self.label)
    }
}

impl RSequence {
    pub fn from_generator(generator: RGenerator) -> Result<Self> {
        generator.validate()?;
        Ok(Self {
            label: generator.label(),
            generator: Some(generator),
            table: None,
        })
    }

    /// `r_j = a j + b`.
    pub fn linear(a: f64, b: f64) -> Result<Self> {
        Self::from_generator(RGenerator::Linear { a, b })
    }

    /// A finite table. Unboundedness cannot be verified from finitely many
    /// values, so the caller must attest to it via `diverges`.
    pub fn from_table(label: impl Into<String>, values: &[f64], diverges: bool) -> Result<Self> {
        if !diverges {
            return Err(invalid("table r-sequences must carry a divergence attestation"));
        }
        if values.is_empty() {
            return Err(invalid("r-sequence table is empty"));
        }
        if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(invalid("r-sequence values must be finite and positive"));
        }
        if let Some(j) = values.windows(2).position(|w| w[1] < w[0]) {
            return Err(invalid(format!("r-sequence decreases at j = {}", j + 1)));
        }
        if values.len() > 1 && values[0] == values[values.len() - 1] {
            return Err(invalid("r-sequence table is constant and cannot tend to infinity"));
        }
        Ok(Self {
            label: label.into(),
            generator: None,
            table: Some(Arc::new(values.iter().map(|v| v.ln()).collect())),
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn generator(&self) -> Option<&RGenerator> {
        self.generator.as_ref()
    }

    /// Number of values this sequence can serve.
    pub fn capacity(&self) -> usize {
        match (&self.generator, &self.table) {
            (Some(RGenerator::Regularized { base, .. }), _) => base.capacity(),
            (Some(_), _) => usize::MAX,
            (None, Some(t)) => t.len(),
            (None, None) => 0,
        }
    }

    pub fn log_value(&self, j: usize) -> Result<f64> {
        if let Some(g) = &self.generator {
            return g.log_value(j);
        }
        let t = self.table.as_ref().expect("table or generator");
        t.get(j).copied().ok_or(Error::Extension {
            requested: j,
            available: t.len(),
        })
    }

    pub fn value(&self, j: usize) -> Result<f64> {
        Ok(self.log_value(j)?.exp())
    }

    /// `log prod_{j=0}^{p} r_j`.
    pub fn running_product(&self, p: usize) -> Result<f64> {
        let mut acc = Neumaier::new();
        for j in 0..=p {
            acc.add(self.log_value(j)?);
        }
        Ok(acc.value())
    }

    /// `log r_0, ..., log r_{len-1}`.
    pub fn log_values(&self, len: usize) -> Result<Vec<f64>> {
        (0..len).map(|j| self.log_value(j)).collect()
    }
}

/// The weight sequence `M_p prod_{j=0}^{p} r_j`.
pub fn product_sequence(m: &Arc<WeightSequence>, r: &RSequence) -> Result<WeightSequence> {
    WeightSequence::from_generator(
        format!("{}*prod[{}]", m.label(), r.label()),
        SequenceGenerator::KomatsuProduct {
            base: Arc::clone(m),
            r: r.clone(),
        },
    )
}

/// `M_{r_j}(t)`: associated function of `M_p prod r_j`. Builds the product
/// table on every call; hold a [`product_sequence`] for repeated use.
pub fn shifted_associated_function(m: &Arc<WeightSequence>, r: &RSequence, t: f64) -> Result<f64> {
    product_sequence(m, r)?.associated_function(t)
}

/// `r'_j = min(r_j, c 2^j)` with `c = min(1, r_0)`. The result stays in the
/// family and satisfies `r'_{j+1} <= 2^{j+1} r'_j` for every `j`.
pub fn regularize(r: &RSequence, j_max: usize) -> Result<RSequence> {
    if j_max < 1 {
        return Err(invalid("regularize needs J >= 1"));
    }
    // fail early if the input cannot cover the certified range
    r.log_value(j_max)?;
    let log_c = r.log_value(0)?.min(0.0);
    let base = match &r.generator {
        // min(min(r, c 2^j), c 2^j) = min(r, c 2^j): skip the extra layer
        Some(RGenerator::Regularized { base, log_c: lc }) if *lc <= log_c => return Ok(RSequence {
            label: r.label.clone(),
            generator: Some(RGenerator::Regularized { base: base.clone(), log_c: *lc }),
            table: None,
        }),
        _ => r.clone(),
    };
    RSequence::from_generator(RGenerator::Regularized {
        base: Box::new(base),
        log_c,
    })
}

/// Checks of the regularization properties on `0 <= j <= j_max`.
#[derive(Debug, Clone, Serialize)]
pub struct RegularizationCertificate {
    pub j_max: usize,
    pub c: f64,
    /// `r'_j <= r_j`.
    pub below_original: bool,
    /// `r'_j <= r'_{j+1}`.
    pub monotone: bool,
    /// `r'_{j+1} <= 2^{j+1} r'_j`.
    pub geometric_step: bool,
    /// `r'_{j+1} <= 2 max(r'_j, c 2^j)`.
    pub doubling_bound: bool,
    /// Fitted witness of the product sequence `M_p prod r'_j`.
    pub product_witness: Option<M2PrimeWitness>,
    pub product_witness_verified: bool,
    pub passed: bool,
}

pub fn certify_regularization(
    m: &Arc<WeightSequence>,
    r: &RSequence,
    regularized: &RSequence,
    j_max: usize,
) -> Result<RegularizationCertificate> {
    let orig = r.log_values(j_max + 1)?;
    let reg = regularized.log_values(j_max + 1)?;
    let log_c = reg[0].min(0.0);
    let eps = 1e-12;
    let ln2 = std::f64::consts::LN_2;
    let below_original = orig.iter().zip(&reg).all(|(o, g)| *g <= o + eps);
    let monotone = reg.windows(2).all(|w| w[1] >= w[0] - eps);
    let geometric_step = reg
        .windows(2)
        .enumerate()
        .all(|(j, w)| w[1] <= w[0] + (j + 1) as f64 * ln2 + eps * (1.0 + w[1].abs()));
    let doubling_bound = reg
        .windows(2)
        .enumerate()
        .all(|(j, w)| w[1] <= ln2 + w[0].max(log_c + j as f64 * ln2) + eps * (1.0 + w[1].abs()));
    let (product_witness, product_witness_verified) = if j_max >= 2 {
        let prod = product_sequence(m, regularized)?;
        let w = fit_m2prime(&prod, j_max - 1)?;
        let ok = w.verify(&prod)?;
        (Some(w), ok)
    } else {
        (None, false)
    };
    let passed = below_original && monotone && geometric_step && doubling_bound && product_witness_verified;
    Ok(RegularizationCertificate {
        j_max,
        c: log_c.exp(),
        below_original,
        monotone,
        geometric_step,
        doubling_bound,
        product_witness,
        product_witness_verified,
        passed,
    })
}

/// Sampled `exp(M_{r_j}(t) - M(t/n))` against the system weight `e^{M(./n)}`.
#[derive(Debug, Clone, Serialize)]
pub struct DominationReport {
    pub n: usize,
    /// `(t, M_{r_j}(t) - M(t/n))`.
    pub log_ratios: Vec<(f64, f64)>,
    pub max_ratio: f64,
    pub tail_non_increasing: bool,
    pub passed: bool,
}

/// Empirical check that `e^{M_{r_j}}` is dominated by `e^{M(./n)}` up to a
/// constant: bounded on the grid and non-increasing over its last quarter.
pub fn nachbin_domination_check(
    m: &Arc<WeightSequence>,
    r: &RSequence,
    n: usize,
    t_grid: &[f64],
) -> Result<DominationReport> {
    if n == 0 {
        return Err(invalid("system index n starts at 1"));
    }
    if t_grid.is_empty() {
        return Err(invalid("t grid is empty"));
    }
    let prod = product_sequence(m, r)?;
    let log_ratios = t_grid
        .iter()
        .map(|&t| Ok((t, prod.associated_function(t)? - m.associated_function(t / n as f64)?)))
        .collect::<Result<Vec<_>>>()?;
    let max_log = log_ratios.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let tail = &log_ratios[log_ratios.len() - log_ratios.len().div_ceil(4)..];
    let tail_non_increasing = tail
        .windows(2)
        .all(|w| w[1].1 <= w[0].1 + 1e-12 * (1.0 + w[0].1.abs()));
    let max_ratio = max_log.exp();
    Ok(DominationReport {
        n,
        passed: max_ratio.is_finite() && tail_non_increasing,
        log_ratios,
        max_ratio,
        tail_non_increasing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::logspace;

    #[test]
    fn running_products() {
        let r = RSequence::linear(1.0, 1.0).unwrap();
        assert!((r.running_product(3).unwrap() - 24f64.ln()).abs() < 1e-14);
        let g = RSequence::from_generator(RGenerator::Geometric { scale: 1.0, base: 2.0 }).unwrap();
        assert!((g.running_product(4).unwrap().exp() - 1024.0).abs() < 1e-9);
        let big = g.running_product(60).unwrap();
        assert!(big > 700.0 && big.is_finite());
    }

    #[test]
    fn invalid_members_rejected() {
        assert!(RSequence::linear(0.0, 1.0).is_err());
        assert!(RSequence::from_table("ones", &[1.0, 1.0, 1.0], true).is_err());
        let slow: Vec<f64> = (0..20).map(|j| 1.0 + 1.0 / (j as f64 + 1.0)).collect();
        assert!(RSequence::from_table("slow", &slow, true).is_err());
        assert!(RSequence::from_table("unattested", &[1.0, 2.0, 3.0], false).is_err());
        assert!(RSequence::from_generator(RGenerator::Log { shift: 1.0 }).is_err());
        assert!(RSequence::from_generator(RGenerator::Geometric { scale: 1.0, base: 1.0 }).is_err());
    }

    #[test]
    fn regularize_linear_is_identity() {
        let r = RSequence::linear(1.0, 1.0).unwrap();
        let rr = regularize(&r, 50).unwrap();
        for j in 0..=50 {
            assert!((rr.value(j).unwrap() - (j as f64 + 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn regularize_fast_growth_becomes_geometric() {
        let r = RSequence::from_generator(RGenerator::ExpPower { exponent: 2.0 }).unwrap();
        let rr = regularize(&r, 30).unwrap();
        for j in 1..=30 {
            assert!((rr.log_value(j).unwrap() - j as f64 * std::f64::consts::LN_2).abs() < 1e-12);
        }
    }

    #[test]
    fn regularize_is_idempotent() {
        let r = RSequence::from_table("t", &[0.5, 0.7, 3.0, 50.0, 51.0, 2000.0, 2001.0], true).unwrap();
        let once = regularize(&r, 6).unwrap();
        let twice = regularize(&once, 6).unwrap();
        for j in 0..=6 {
            assert_eq!(once.log_value(j).unwrap(), twice.log_value(j).unwrap());
        }
        let m = Arc::new(WeightSequence::gevrey(1.0).unwrap());
        assert!(certify_regularization(&m, &r, &once, 5).unwrap().passed);
    }

    #[test]
    fn regularize_rejects_short_tables() {
        let r = RSequence::from_table("t", &[1.0, 2.0, 3.0], true).unwrap();
        assert!(regularize(&r, 10).is_err());
        assert!(regularize(&r, 0).is_err());
    }

    #[test]
    fn shifted_assoc_zero_and_small() {
        let m = Arc::new(WeightSequence::gevrey(1.0).unwrap());
        let r = RSequence::linear(1.0, 1.0).unwrap();
        assert_eq!(shifted_associated_function(&m, &r, 0.0).unwrap(), 0.0);
        // product p!(p+1)!: terms log(2^p / (p!(p+1)!)) are all <= 0
        assert_eq!(shifted_associated_function(&m, &r, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn domination_bounded_for_linear_r() {
        let m = Arc::new(WeightSequence::gevrey(1.0).unwrap());
        let r = RSequence::linear(1.0, 1.0).unwrap();
        let rep = nachbin_domination_check(&m, &r, 1, &logspace(-1.0, 3.0, 200)).unwrap();
        assert!(rep.passed);
        assert!(rep.max_ratio <= 1.0 + 1e-12);
        let rep0 = nachbin_domination_check(&m, &r, 1, &[0.0]).unwrap();
        assert_eq!(rep0.max_ratio, 1.0);
    }
}
