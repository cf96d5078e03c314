//! Experiment configuration: JSON schema, defaults, and construction of the
//! numeric objects it names.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermite::{shipped_family, GaussianTerm, HermiteGaussian};
use crate::komatsu::{RGenerator, RSequence};
use crate::sequence::WeightSequence;
use crate::stft::PhaseSpaceGrid;
use crate::weights::{PointGrid, RaySpec, StepTable, WeightFunction, WeightSystem};

fn cfg(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SequenceSpec {
    /// `p!^s`.
    Gevrey(f64),
    Table(Vec<f64>),
    LogTable(Vec<f64>),
    /// `"factorial_power"` (`p!`), `"log_power"` (`log(p+2)^p`) or
    /// `"constant"` (`1`).
    Expr(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearSpec {
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerSpec {
    pub coef: f64,
    pub exponent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometricSpec {
    pub scale: f64,
    pub base: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpPowerSpec {
    pub exponent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogSpec {
    pub shift: f64,
}

/// Exactly one generator key; `diverges` accompanies `table` only.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linear: Option<LinearSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power: Option<PowerSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometric: Option<GeometricSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exp_power: Option<ExpPowerSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log: Option<LogSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diverges: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightSpec {
    Unit,
    /// `e^{rate |x|}`.
    ExpNorm(f64),
    /// `e^{M(|x| / scale)}`.
    AssocExp { seq: String, scale: f64 },
    /// `(1 + |x|)^{-k}`.
    PolyDecay(f64),
    /// `e^{-a |x|²}`.
    Gaussian(f64),
    /// CSV file with columns `x,value` (one dimension, piecewise constant).
    Table(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemSpec {
    /// `v_n = e^{M(|x| / (scale n))}`.
    AssocExp { seq: String, scale: f64 },
    /// `v_n = ω`.
    Constant(WeightSpec),
    /// `v_n = (1 + |x|)^{-k n}`.
    PolyDecay(f64),
    /// CSV file with columns `x,v1,v2,...` (one dimension, piecewise constant).
    Table(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    #[serde(default = "unit_amplitude")]
    pub amplitude: [f64; 2],
    pub center: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulation: Option<Vec<f64>>,
    pub width: f64,
}

fn unit_amplitude() -> [f64; 2] {
    [1.0, 0.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionSpec {
    pub name: String,
    pub terms: Vec<TermSpec>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionsSpec {
    /// The twelve shipped functions.
    #[default]
    Shipped,
    /// Named members of the shipped family.
    Subset(Vec<String>),
    List(Vec<FunctionSpec>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogGrid {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineGrid {
    pub extent: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridsSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spatial: Option<PointGrid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase: Option<PhaseSpaceGrid>,
    /// Grid for `x` and `y` in translation inequalities.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub product: Option<PointGrid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rays: Option<RaySpec>,
    /// `t` grid (powers of ten) for associated-function tables.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assoc: Option<LogGrid>,
    /// Reconstruction points on `[-extent, extent]^d`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_points: Option<LineGrid>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub assoc_rel: f64,
    pub isometry: f64,
    pub reconstruction: f64,
    pub diagram: f64,
    pub pairing: f64,
    pub drift: f64,
    pub edge: f64,
    pub direct_vs_grid: f64,
    pub s_threshold: f64,
    pub precedes_threshold: f64,
    pub roumieu_bound: f64,
    pub mollify_band: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            assoc_rel: 1e-12,
            isometry: 1e-6,
            reconstruction: 1e-6,
            diagram: 1e-6,
            pairing: 1e-8,
            drift: 0.05,
            edge: 1e-10,
            direct_vs_grid: 1e-8,
            s_threshold: 1e-3,
            precedes_threshold: 1.0,
            roumieu_bound: 1e100,
            mollify_band: 0.15,
        }
    }
}

impl Tolerances {
    /// Applies a `name=value` override.
    pub fn set(&mut self, assignment: &str) -> Result<()> {
        let (name, value) = assignment
            .split_once('=')
            .ok_or_else(|| cfg(format!("tolerance override `{assignment}` is not name=value")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| cfg(format!("tolerance `{name}` needs a number, got `{value}`")))?;
        let mut map = serde_json::to_value(&*self)?;
        let slot = map
            .get_mut(name.trim())
            .ok_or_else(|| cfg(format!("unknown tolerance `{name}`")))?;
        *slot = serde_json::json!(value);
        *self = serde_json::from_value(map)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuiteKind {
    #[default]
    TheoremDiagram,
    PropStftGg,
    PropStftProjective,
    Lemma31,
    All,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SuiteSpec {
    pub kind: SuiteKind,
    /// Derivative-side sequence.
    pub m: String,
    /// Decay-side sequence.
    pub a: String,
    pub system: String,
    pub tau: f64,
    /// Admissibility constant.
    pub c_adm: f64,
    /// System indices used for chains and inductive seminorms.
    pub n_list: Vec<usize>,
    pub h_grid: Vec<f64>,
    pub h: f64,
    pub alpha_max: usize,
    pub adjoint_alpha_max: usize,
    pub moment_max: usize,
    pub j_max: usize,
    /// Width `a` of the Gaussian window `e^{-a|x|²}`.
    pub window_width: f64,
    /// Number of terms in `v = inf_j (j+1) v_j`.
    pub vbar_terms: usize,
    pub direct_samples: usize,
    pub mollify_radius: f64,
    /// Sequence-level truncation for the Lemma-3.1-type comparison.
    pub sequence_alpha_max: usize,
}

impl Default for SuiteSpec {
    fn default() -> Self {
        Self {
            kind: SuiteKind::TheoremDiagram,
            m: "M".into(),
            a: "A".into(),
            system: "V".into(),
            tau: 1.0,
            c_adm: 1.0,
            n_list: vec![1, 2, 4, 8],
            h_grid: vec![1.0, 0.5, 0.25, 0.125],
            h: 1.0,
            alpha_max: 40,
            adjoint_alpha_max: 20,
            moment_max: 10,
            j_max: 200,
            window_width: PI,
            vbar_terms: 16,
            direct_samples: 50,
            mollify_radius: 0.1,
            sequence_alpha_max: 200,
        }
    }
}

fn default_dim() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_dim")]
    pub dim: usize,
    #[serde(default)]
    pub sequences: BTreeMap<String, SequenceSpec>,
    #[serde(default)]
    pub r_sequences: BTreeMap<String, RSpec>,
    #[serde(default)]
    pub weight_systems: BTreeMap<String, SystemSpec>,
    #[serde(default)]
    pub functions: FunctionsSpec,
    #[serde(default)]
    pub grids: GridsSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub suite: SuiteSpec,
    #[serde(default)]
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dim: 1,
            sequences: BTreeMap::new(),
            r_sequences: BTreeMap::new(),
            weight_systems: BTreeMap::new(),
            functions: FunctionsSpec::Shipped,
            grids: GridsSpec::default(),
            tolerances: Tolerances::default(),
            suite: SuiteSpec::default(),
            seed: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| cfg(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| cfg(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Fills every omitted section with its default so that the emitted
    /// report records the full configuration.
    pub fn resolved(mut self) -> Result<Self> {
        if !(1..=2).contains(&self.dim) {
            return Err(cfg(format!("dim must be 1 or 2, got {}", self.dim)));
        }
        if self.sequences.is_empty() {
            self.sequences.insert("M".into(), SequenceSpec::Gevrey(1.0));
            self.sequences.insert("A".into(), SequenceSpec::Gevrey(1.0));
        }
        if self.r_sequences.is_empty() {
            self.r_sequences.insert(
                "lin".into(),
                RSpec {
                    linear: Some(LinearSpec { a: 1.0, b: 1.0 }),
                    ..RSpec::default()
                },
            );
            self.r_sequences.insert(
                "sqrt".into(),
                RSpec {
                    power: Some(PowerSpec {
                        coef: 1.0,
                        exponent: 0.5,
                    }),
                    ..RSpec::default()
                },
            );
            self.r_sequences.insert(
                "log".into(),
                RSpec {
                    log: Some(LogSpec {
                        shift: std::f64::consts::E,
                    }),
                    ..RSpec::default()
                },
            );
        }
        if self.weight_systems.is_empty() {
            let seq = if self.sequences.contains_key(&self.suite.a) {
                self.suite.a.clone()
            } else {
                self.sequences.keys().next().cloned().unwrap_or_default()
            };
            self.weight_systems
                .insert("V".into(), SystemSpec::AssocExp { seq, scale: 1.0 });
        }
        let d = self.dim;
        let g = &mut self.grids;
        g.spatial.get_or_insert_with(|| PointGrid::default_for(d));
        g.phase.get_or_insert_with(|| PhaseSpaceGrid::default_for(d));
        g.product.get_or_insert_with(|| match d {
            1 => PointGrid::default_for(1),
            _ => PointGrid {
                dim: d,
                extent: 10.0,
                per_axis: 41,
            },
        });
        g.rays.get_or_insert_with(|| RaySpec::new(d, 1e3));
        g.assoc.get_or_insert(LogGrid {
            lo: -2.0,
            hi: 3.0,
            n: 200,
        });
        g.t_points.get_or_insert(LineGrid { extent: 4.0, n: 161 });
        let a = g.assoc.as_ref().expect("set above");
        if a.n < 2 || !(a.lo < a.hi) {
            return Err(cfg("grids.assoc needs n >= 2 and lo < hi"));
        }
        let t = g.t_points.as_ref().expect("set above");
        if t.n == 0 || !(t.extent > 0.0) {
            return Err(cfg("grids.t_points needs n >= 1 and a positive extent"));
        }
        Ok(self)
    }

    pub fn to_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("configuration always serializes")
    }
}

/// Numeric objects built from a resolved configuration.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub sequences: BTreeMap<String, Arc<WeightSequence>>,
    pub r_sequences: BTreeMap<String, RSequence>,
    pub systems: BTreeMap<String, WeightSystem>,
    pub family: Vec<(String, HermiteGaussian)>,
    pub spatial: PointGrid,
    pub phase: PhaseSpaceGrid,
    pub product: PointGrid,
    pub rays: RaySpec,
}

impl Experiment {
    /// Builds everything; relative table paths resolve against `base_dir`.
    pub fn build(config: ExperimentConfig, base_dir: &Path) -> Result<Self> {
        let config = config.resolved()?;
        let d = config.dim;
        let mut sequences = BTreeMap::new();
        for (name, spec) in &config.sequences {
            sequences.insert(name.clone(), Arc::new(build_sequence(name, spec)?));
        }
        let mut r_sequences = BTreeMap::new();
        for (name, spec) in &config.r_sequences {
            r_sequences.insert(name.clone(), build_r(name, spec)?);
        }
        let mut systems = BTreeMap::new();
        for (name, spec) in &config.weight_systems {
            systems.insert(name.clone(), build_system(spec, &sequences, base_dir, d)?);
        }
        let family = build_family(&config.functions, d)?;
        let g = &config.grids;
        let spatial = g.spatial.clone().expect("resolved");
        let phase = g.phase.clone().expect("resolved");
        let product = g.product.clone().expect("resolved");
        let rays = g.rays.clone().expect("resolved");
        for (what, gd) in [("spatial", spatial.dim), ("phase", phase.dim), ("product", product.dim), ("rays", rays.dim)] {
            if gd != d {
                return Err(cfg(format!("{what} grid has dimension {gd}, config has {d}")));
            }
        }
        phase.validate()?;
        Ok(Self {
            config,
            sequences,
            r_sequences,
            systems,
            family,
            spatial,
            phase,
            product,
            rays,
        })
    }

    pub fn dim(&self) -> usize {
        self.config.dim
    }

    pub fn sequence(&self, name: &str) -> Result<Arc<WeightSequence>> {
        self.sequences
            .get(name)
            .cloned()
            .ok_or_else(|| cfg(format!("unknown sequence `{name}`")))
    }

    pub fn system(&self, name: &str) -> Result<&WeightSystem> {
        self.systems
            .get(name)
            .ok_or_else(|| cfg(format!("unknown weight system `{name}`")))
    }

    pub fn r_list(&self) -> Vec<(String, RSequence)> {
        self.r_sequences
            .iter()
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect()
    }

    pub fn family_names(&self) -> Vec<String> {
        self.family.iter().map(|(n, _)| n.clone()).collect()
    }

    /// Gaussian analysis window `e^{-a|x|²}`.
    pub fn window(&self) -> Result<HermiteGaussian> {
        HermiteGaussian::gaussian(self.dim(), self.config.suite.window_width)
    }

    /// Reconstruction points on the configured line (one dimension) or its
    /// diagonal and axis copies (two dimensions).
    pub fn t_points(&self) -> Vec<Vec<f64>> {
        let tp = self.config.grids.t_points.clone().expect("resolved");
        let xs = crate::numeric::linspace(-tp.extent, tp.extent, tp.n);
        match self.dim() {
            1 => xs.into_iter().map(|x| vec![x]).collect(),
            _ => xs
                .iter()
                .flat_map(|&x| [vec![x, 0.0], vec![0.0, x], vec![x, x]])
                .collect(),
        }
    }
}

pub fn build_sequence(name: &str, spec: &SequenceSpec) -> Result<WeightSequence> {
    let seq = match spec {
        SequenceSpec::Gevrey(s) => WeightSequence::gevrey(*s)?,
        SequenceSpec::Table(v) => WeightSequence::from_values(name, v)?,
        SequenceSpec::LogTable(v) => WeightSequence::from_log_values(name, v.clone())?,
        SequenceSpec::Expr(e) => match e.as_str() {
            "factorial_power" => WeightSequence::gevrey(1.0)?,
            "log_power" => WeightSequence::log_power(),
            "constant" => WeightSequence::constant(1.0)?,
            other => return Err(cfg(format!("unknown sequence expression `{other}`"))),
        },
    };
    Ok(seq)
}

pub fn build_r(name: &str, spec: &RSpec) -> Result<RSequence> {
    let mut gens = Vec::new();
    if let Some(p) = &spec.linear {
        gens.push(RGenerator::Linear { a: p.a, b: p.b });
    }
    if let Some(p) = &spec.power {
        gens.push(RGenerator::Power {
            coef: p.coef,
            exponent: p.exponent,
        });
    }
    if let Some(p) = &spec.geometric {
        gens.push(RGenerator::Geometric {
            scale: p.scale,
            base: p.base,
        });
    }
    if let Some(p) = &spec.exp_power {
        gens.push(RGenerator::ExpPower { exponent: p.exponent });
    }
    if let Some(p) = &spec.log {
        gens.push(RGenerator::Log { shift: p.shift });
    }
    let count = gens.len() + usize::from(spec.table.is_some());
    if count != 1 {
        return Err(cfg(format!("r-sequence `{name}` needs exactly one generator, found {count}")));
    }
    if let Some(t) = &spec.table {
        return RSequence::from_table(name, t, spec.diverges.unwrap_or(false));
    }
    if spec.diverges.is_some() {
        return Err(cfg(format!("r-sequence `{name}`: `diverges` applies to tables only")));
    }
    RSequence::from_generator(gens.pop().expect("one generator"))
}

fn resolve_path(base: &Path, p: &str) -> PathBuf {
    let path = Path::new(p);
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base.join(path)
    }
}

/// Reads a CSV with a header row; first column `x`, further columns values.
fn read_columns(path: &Path) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| cfg(format!("{}: {e}", path.display())))?;
    let width = rdr.headers()?.len();
    if width < 2 {
        return Err(cfg(format!("{}: need an x column and at least one value column", path.display())));
    }
    let mut xs = Vec::new();
    let mut cols = vec![Vec::new(); width - 1];
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let parse = |i: usize| -> Result<f64> {
            rec.get(i)
                .unwrap_or("")
                .trim()
                .parse()
                .map_err(|_| cfg(format!("{}: bad number in row {}", path.display(), row + 1)))
        };
        xs.push(parse(0)?);
        for (k, col) in cols.iter_mut().enumerate() {
            col.push(parse(k + 1)?);
        }
    }
    Ok((xs, cols))
}

fn build_weight(
    spec: &WeightSpec,
    seqs: &BTreeMap<String, Arc<WeightSequence>>,
    base: &Path,
    dim: usize,
) -> Result<WeightFunction> {
    Ok(match spec {
        WeightSpec::Unit => WeightFunction::Unit,
        WeightSpec::ExpNorm(rate) => WeightFunction::ExpNorm { rate: *rate },
        WeightSpec::AssocExp { seq, scale } => {
            if !(*scale > 0.0) {
                return Err(cfg("assoc_exp scale must be positive"));
            }
            WeightFunction::AssocExp {
                seq: seqs
                    .get(seq)
                    .cloned()
                    .ok_or_else(|| cfg(format!("unknown sequence `{seq}`")))?,
                scale: *scale,
            }
        }
        WeightSpec::PolyDecay(k) => WeightFunction::PolyDecay { k: *k },
        WeightSpec::Gaussian(a) => WeightFunction::Gaussian { a: *a },
        WeightSpec::Table(p) => {
            if dim != 1 {
                return Err(cfg("table weights are one-dimensional"));
            }
            let (xs, cols) = read_columns(&resolve_path(base, p))?;
            WeightFunction::Table(Arc::new(StepTable::new(xs, &cols[0])?))
        }
    })
}

fn build_system(
    spec: &SystemSpec,
    seqs: &BTreeMap<String, Arc<WeightSequence>>,
    base: &Path,
    dim: usize,
) -> Result<WeightSystem> {
    Ok(match spec {
        SystemSpec::AssocExp { seq, scale } => {
            if !(*scale > 0.0) {
                return Err(cfg("assoc_exp scale must be positive"));
            }
            WeightSystem::AssocExp {
                seq: seqs
                    .get(seq)
                    .cloned()
                    .ok_or_else(|| cfg(format!("unknown sequence `{seq}`")))?,
                scale: *scale,
            }
        }
        SystemSpec::Constant(w) => WeightSystem::Constant {
            omega: build_weight(w, seqs, base, dim)?,
        },
        SystemSpec::PolyDecay(k) => WeightSystem::PolyDecay { k: *k },
        SystemSpec::Table(p) => {
            if dim != 1 {
                return Err(cfg("table weight systems are one-dimensional"));
            }
            let (xs, cols) = read_columns(&resolve_path(base, p))?;
            let members = cols
                .iter()
                .map(|c| Ok(WeightFunction::Table(Arc::new(StepTable::new(xs.clone(), c)?))))
                .collect::<Result<Vec<_>>>()?;
            WeightSystem::Explicit { members }
        }
    })
}

fn build_family(spec: &FunctionsSpec, dim: usize) -> Result<Vec<(String, HermiteGaussian)>> {
    match spec {
        FunctionsSpec::Shipped => Ok(shipped_family(dim)),
        FunctionsSpec::Subset(names) => {
            let all = shipped_family(dim);
            names
                .iter()
                .map(|n| {
                    all.iter()
                        .find(|(k, _)| k == n)
                        .cloned()
                        .ok_or_else(|| cfg(format!("no shipped function named `{n}`")))
                })
                .collect()
        }
        FunctionsSpec::List(list) => list
            .iter()
            .map(|f| {
                let terms = f
                    .terms
                    .iter()
                    .map(|t| {
                        GaussianTerm::new(
                            Complex64::new(t.amplitude[0], t.amplitude[1]),
                            t.center.clone(),
                            t.modulation.clone().unwrap_or_else(|| vec![0.0; dim]),
                            t.width,
                        )
                    })
                    .collect();
                Ok((f.name.clone(), HermiteGaussian::new(dim, terms)?))
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_resolves() {
        let c = ExperimentConfig::from_json("{}").unwrap().resolved().unwrap();
        assert_eq!(c.sequences.len(), 2);
        assert_eq!(c.r_sequences.len(), 3);
        assert!(c.grids.phase.is_some());
        let e = Experiment::build(c, Path::new(".")).unwrap();
        assert_eq!(e.family.len(), 12);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(ExperimentConfig::from_json(r#"{"bogus": 1}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"sequences": {"M": {"gevrey": 1, "table": [1]}}}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"tolerances": {"nope": 1}}"#).is_err());
    }

    #[test]
    fn r_spec_requires_one_generator() {
        let two = RSpec {
            linear: Some(LinearSpec { a: 1.0, b: 1.0 }),
            log: Some(LogSpec { shift: 3.0 }),
            ..RSpec::default()
        };
        assert!(build_r("x", &two).is_err());
        let table = RSpec {
            table: Some(vec![1.0, 2.0, 3.0]),
            diverges: Some(true),
            ..RSpec::default()
        };
        assert!(build_r("t", &table).is_ok());
        let unattested = RSpec {
            table: Some(vec![1.0, 2.0, 3.0]),
            ..RSpec::default()
        };
        assert!(build_r("t", &unattested).is_err());
    }

    #[test]
    fn tolerance_override() {
        let mut t = Tolerances::default();
        t.set("drift=0.1").unwrap();
        assert_eq!(t.drift, 0.1);
        assert!(t.set("unknown=1").is_err());
        assert!(t.set("drift").is_err());
    }

    #[test]
    fn resolved_config_round_trips() {
        let c = ExperimentConfig::default().resolved().unwrap();
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(ExperimentConfig::from_json(&text).unwrap(), c);
    }
}
