//! Hermite–Gaussian test functions: finite sums of translated, modulated
//! Gaussians `c e^{2πiξ0·x} e^{-a|x-x0|²}` with exact derivatives.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Highest total derivative order evaluated exactly.
pub const DERIVATIVE_BUDGET: usize = 60;

const RESCALE_AT: f64 = 1e150;

/// One term `amplitude · e^{2πi modulation·x} · e^{-width |x - center|²}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianTerm {
    pub amplitude: Complex64,
    pub center: Vec<f64>,
    pub modulation: Vec<f64>,
    pub width: f64,
}

impl GaussianTerm {
    pub fn new(amplitude: Complex64, center: Vec<f64>, modulation: Vec<f64>, width: f64) -> Self {
        Self {
            amplitude,
            center,
            modulation,
            width,
        }
    }

    /// Unit-amplitude factor along one axis.
    pub(crate) fn axis(&self, i: usize) -> AxisGaussian {
        AxisGaussian {
            center: self.center[i],
            modulation: self.modulation[i],
            width: self.width,
        }
    }
}

/// One-dimensional unit factor `e^{2πiηu} e^{-a(u-p)²}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct AxisGaussian {
    pub center: f64,
    pub modulation: f64,
    pub width: f64,
}

impl AxisGaussian {
    pub fn eval(&self, u: f64) -> Complex64 {
        let s = u - self.center;
        Complex64::from_polar((-self.width * s * s).exp(), 2.0 * PI * self.modulation * u)
    }

    /// All derivatives of orders `0..=n_max` at `u`.
    ///
    /// With `s = u - p` and `z = √a s - iπη/√a` the n-th derivative is
    /// `(-√a)^n H_n(z) e^{-a s²} e^{2πiηu}`. The Hermite recursion runs on a
    /// rescaled pair so that no intermediate overflows; the scale is folded
    /// back in log space.
    pub fn derivatives(&self, u: f64, n_max: usize, out: &mut Vec<Complex64>) {
        out.clear();
        let a = self.width;
        let sa = a.sqrt();
        let s = u - self.center;
        let z = Complex64::new(sa * s, -PI * self.modulation / sa);
        let base_log = -a * s * s;
        let phase = 2.0 * PI * self.modulation * u;
        let log_sa = sa.ln();

        let emit = |h: Complex64, log_scale: f64, k: usize, out: &mut Vec<Complex64>| {
            let r = h.norm();
            if r == 0.0 {
                out.push(Complex64::new(0.0, 0.0));
                return;
            }
            let log_mag = r.ln() + log_scale + k as f64 * log_sa + base_log;
            let sign = if k % 2 == 1 { PI } else { 0.0 };
            out.push(Complex64::from_polar(log_mag.exp(), h.arg() + phase + sign));
        };

        let mut prev = Complex64::new(1.0, 0.0);
        let mut log_scale = 0.0;
        emit(prev, log_scale, 0, out);
        if n_max == 0 {
            return;
        }
        let mut cur = z * 2.0;
        emit(cur, log_scale, 1, out);
        for k in 1..n_max {
            let next = z * cur * 2.0 - prev * (2.0 * k as f64);
            prev = cur;
            cur = next;
            let m = cur.norm().max(prev.norm());
            if m > RESCALE_AT {
                prev /= m;
                cur /= m;
                log_scale += m.ln();
            }
            emit(cur, log_scale, k + 1, out);
        }
    }
}

/// Finite linear combination of Gaussian terms on `ℝ^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HermiteGaussian {
    dim: usize,
    terms: Vec<GaussianTerm>,
}

impl HermiteGaussian {
    pub fn new(dim: usize, terms: Vec<GaussianTerm>) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dimension must be at least 1"));
        }
        for t in &terms {
            if t.center.len() != dim {
                return Err(Error::Dimension {
                    expected: dim,
                    got: t.center.len(),
                });
            }
            if t.modulation.len() != dim {
                return Err(Error::Dimension {
                    expected: dim,
                    got: t.modulation.len(),
                });
            }
            if !(t.width > 0.0 && t.width.is_finite()) {
                return Err(invalid(format!("term width must be positive, got {}", t.width)));
            }
            if !(t.amplitude.re.is_finite() && t.amplitude.im.is_finite())
                || t.center.iter().chain(&t.modulation).any(|v| !v.is_finite())
            {
                return Err(invalid("term parameters must be finite"));
            }
        }
        Ok(Self { dim, terms })
    }

    /// The zero function.
    pub fn zero(dim: usize) -> Self {
        Self {
            dim: dim.max(1),
            terms: Vec::new(),
        }
    }

    /// `e^{-a|x|²}`.
    pub fn gaussian(dim: usize, width: f64) -> Result<Self> {
        Self::new(
            dim,
            vec![GaussianTerm::new(
                Complex64::new(1.0, 0.0),
                vec![0.0; dim],
                vec![0.0; dim],
                width,
            )],
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[GaussianTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.amplitude == Complex64::new(0.0, 0.0))
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(())
    }

    pub fn eval(&self, x: &[f64]) -> Result<Complex64> {
        self.check_point(x)?;
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for t in &self.terms {
            let mut v = t.amplitude;
            for (i, &xi) in x.iter().enumerate() {
                v *= t.axis(i).eval(xi);
            }
            acc += v;
        }
        acc
    }

    /// Derivative `∂^α f`, evaluable pointwise.
    pub fn derivative(&self, alpha: &[usize]) -> Result<Derivative<'_>> {
        if alpha.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                got: alpha.len(),
            });
        }
        let order: usize = alpha.iter().sum();
        if order > DERIVATIVE_BUDGET {
            return Err(Error::DerivativeBudget {
                order,
                budget: DERIVATIVE_BUDGET,
            });
        }
        Ok(Derivative {
            f: self,
            alpha: alpha.to_vec(),
        })
    }

    /// `c · f`.
    pub fn scale(&self, c: Complex64) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| GaussianTerm {
                amplitude: t.amplitude * c,
                ..t.clone()
            })
            .collect();
        Self {
            dim: self.dim,
            terms,
        }
    }

    /// `f + g`.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if other.dim != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                got: other.dim,
            });
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(Self {
            dim: self.dim,
            terms,
        })
    }

    /// `M_ξ T_x f`, i.e. `t ↦ e^{2πiξ·t} f(t - x)`.
    pub fn shift_modulate(&self, x: &[f64], xi: &[f64]) -> Result<Self> {
        self.check_point(x)?;
        self.check_point(xi)?;
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let dot: f64 = t.modulation.iter().zip(x).map(|(m, s)| m * s).sum();
                GaussianTerm {
                    amplitude: t.amplitude * Complex64::from_polar(1.0, -2.0 * PI * dot),
                    center: t.center.iter().zip(x).map(|(c, s)| c + s).collect(),
                    modulation: t.modulation.iter().zip(xi).map(|(m, w)| m + w).collect(),
                    width: t.width,
                }
            })
            .collect();
        Ok(Self {
            dim: self.dim,
            terms,
        })
    }

    /// `T_u f`.
    pub fn translate(&self, u: &[f64]) -> Result<Self> {
        self.shift_modulate(u, &vec![0.0; self.dim])
    }

    /// `M_η f`.
    pub fn modulate(&self, eta: &[f64]) -> Result<Self> {
        self.shift_modulate(&vec![0.0; self.dim], eta)
    }

    /// Exact `L²` inner product `(f, g) = ∫ f ḡ`.
    pub fn inner_product(&self, other: &Self) -> Result<Complex64> {
        if other.dim != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                got: other.dim,
            });
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for f in &self.terms {
            for g in &other.terms {
                let mut v = f.amplitude * g.amplitude.conj();
                for i in 0..self.dim {
                    v *= axis_pair_integral(f.axis(i), g.axis(i), 0.0);
                }
                acc += v;
            }
        }
        Ok(acc)
    }

    pub fn l2_norm(&self) -> f64 {
        self.inner_product(self)
            .map(|v| v.re.max(0.0).sqrt())
            .unwrap_or(0.0)
    }
}

/// `∫ g(u) conj(h(u)) e^{-2πiξu} du` for two unit axis factors, in closed form.
pub(crate) fn axis_pair_integral(g: AxisGaussian, h: AxisGaussian, xi: f64) -> Complex64 {
    // exponent: -a(u-p)² - b(u-q)² + 2πi(η - ζ - ξ)u
    let (a, p) = (g.width, g.center);
    let (b, q) = (h.width, h.center);
    let s = a + b;
    let w = 2.0 * PI * (g.modulation - h.modulation - xi);
    let m = (a * p + b * q) / s;
    let real = -a * b / s * (p - q) * (p - q) - w * w / (4.0 * s);
    Complex64::from_polar((PI / s).sqrt() * real.exp(), w * m)
}

/// Pointwise-evaluable derivative `∂^α f`.
#[derive(Debug, Clone)]
pub struct Derivative<'a> {
    f: &'a HermiteGaussian,
    alpha: Vec<usize>,
}

impl Derivative<'_> {
    pub fn alpha(&self) -> &[usize] {
        &self.alpha
    }

    pub fn eval(&self, x: &[f64]) -> Result<Complex64> {
        self.f.check_point(x)?;
        let mut buf = Vec::new();
        let mut acc = Complex64::new(0.0, 0.0);
        for t in &self.f.terms {
            let mut v = t.amplitude;
            for (i, (&xi, &k)) in x.iter().zip(&self.alpha).enumerate() {
                t.axis(i).derivatives(xi, k, &mut buf);
                v *= buf[k];
            }
            acc += v;
        }
        Ok(acc)
    }
}

/// The shipped twelve-function family on `ℝ^d`, widths `π·{1/2, 1, 2}`.
pub fn shipped_family(dim: usize) -> Vec<(String, HermiteGaussian)> {
    let one = Complex64::new(1.0, 0.0);
    let e = |k: usize, v: f64| -> Vec<f64> {
        let mut out = vec![0.0; dim];
        out[k.min(dim - 1)] = v;
        out
    };
    let z = || vec![0.0; dim];
    let term = |c: Complex64, x: Vec<f64>, xi: Vec<f64>, w: f64| GaussianTerm::new(c, x, xi, w);
    let specs: Vec<(&str, Vec<GaussianTerm>)> = vec![
        ("gauss_w1", vec![term(one, z(), z(), PI)]),
        ("gauss_w0.5", vec![term(one, z(), z(), PI / 2.0)]),
        ("gauss_w2", vec![term(one, z(), z(), 2.0 * PI)]),
        ("shift_1", vec![term(one, e(0, 1.0), z(), PI)]),
        ("shift_-1.5_w2", vec![term(one, e(0, -1.5), z(), 2.0 * PI)]),
        ("mod_1", vec![term(one, z(), e(0, 1.0), PI)]),
        ("mod_-0.5_w0.5", vec![term(one, z(), e(0, -0.5), PI / 2.0)]),
        (
            "shift_mod",
            vec![term(Complex64::new(0.0, 1.0), e(0, 0.5), e(0, 0.75), PI)],
        ),
        (
            "pair_sym",
            vec![term(one, e(0, -1.0), z(), PI), term(one, e(0, 1.0), z(), PI)],
        ),
        (
            "pair_mixed",
            vec![
                term(Complex64::new(0.5, -0.5), e(0, 0.5), z(), PI / 2.0),
                term(Complex64::new(-1.0, 0.25), e(0, -0.5), e(0, 0.5), 2.0 * PI),
            ],
        ),
        (
            "triple",
            vec![
                term(one, z(), z(), PI),
                term(Complex64::new(0.3, 0.0), e(0, 2.0), e(0, -1.0), 2.0 * PI),
                term(Complex64::new(0.0, -0.7), e(0, -2.0), e(0, 1.0), PI / 2.0),
            ],
        ),
        (
            "mod_diag",
            vec![term(
                Complex64::new(2.0, 0.0),
                vec![0.25; dim],
                vec![0.5; dim],
                PI,
            )],
        ),
    ];
    specs
        .into_iter()
        .map(|(name, terms)| {
            let f = HermiteGaussian::new(dim, terms).expect("shipped family is valid");
            (name.to_string(), f)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g() -> HermiteGaussian {
        HermiteGaussian::gaussian(1, PI).unwrap()
    }

    #[test]
    fn first_and_second_derivative() {
        let f = g();
        for &x in &[-1.2, 0.0, 0.3, 2.0] {
            let e = (-PI * x * x).exp();
            let d1 = f.derivative(&[1]).unwrap().eval(&[x]).unwrap();
            let d2 = f.derivative(&[2]).unwrap().eval(&[x]).unwrap();
            assert!((d1.re + 2.0 * PI * x * e).abs() < 1e-14);
            assert!((d2.re - (4.0 * PI * PI * x * x - 2.0 * PI) * e).abs() < 1e-13);
            assert!(d1.im.abs() < 1e-15 && d2.im.abs() < 1e-15);
        }
    }

    #[test]
    fn modulation_factor() {
        let f = HermiteGaussian::new(
            1,
            vec![GaussianTerm::new(Complex64::new(1.0, 0.0), vec![0.0], vec![0.7], 1e-30)],
        )
        .unwrap();
        let d = f.derivative(&[3]).unwrap().eval(&[0.4]).unwrap();
        let expect = Complex64::new(0.0, 2.0 * PI * 0.7).powi(3) * f.eval(&[0.4]).unwrap();
        assert!((d - expect).norm() < 1e-9 * expect.norm());
    }

    #[test]
    fn budget_enforced() {
        assert!(matches!(
            g().derivative(&[61]),
            Err(Error::DerivativeBudget { order: 61, .. })
        ));
        assert!(g().derivative(&[60]).is_ok());
    }

    #[test]
    fn high_order_finite() {
        let f = g();
        let v = f.derivative(&[60]).unwrap().eval(&[0.5]).unwrap();
        assert!(v.norm().is_finite() && v.norm() > 0.0);
    }

    #[test]
    fn gaussian_norms() {
        let f = g();
        assert!((f.l2_norm() - 2f64.powf(-0.25)).abs() < 1e-15);
        let f2 = HermiteGaussian::gaussian(2, PI).unwrap();
        assert!((f2.l2_norm() - 2f64.powf(-0.5)).abs() < 1e-15);
    }

    #[test]
    fn shift_modulate_evaluates() {
        let f = shipped_family(1).remove(10).1;
        let x = [0.3];
        let xi = [-1.1];
        let h = f.shift_modulate(&x, &xi).unwrap();
        for &t in &[-0.5, 0.2, 1.7] {
            let lhs = h.eval(&[t]).unwrap();
            let rhs = Complex64::from_polar(1.0, 2.0 * PI * xi[0] * t) * f.eval(&[t - x[0]]).unwrap();
            assert!((lhs - rhs).norm() < 1e-14);
        }
    }

    #[test]
    fn family_has_twelve_members() {
        assert_eq!(shipped_family(1).len(), 12);
        assert_eq!(shipped_family(2).len(), 12);
    }

    #[test]
    fn rejects_bad_terms() {
        let bad = GaussianTerm::new(Complex64::new(1.0, 0.0), vec![0.0], vec![0.0], -1.0);
        assert!(HermiteGaussian::new(1, vec![bad]).is_err());
        let bad = GaussianTerm::new(Complex64::new(1.0, 0.0), vec![0.0, 1.0], vec![0.0], 1.0);
        assert!(HermiteGaussian::new(1, vec![bad]).is_err());
    }
}
