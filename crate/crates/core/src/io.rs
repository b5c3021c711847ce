//! JSON documents for algebras, modules, cohomology rings, resolutions and
//! charts.
//!
//! Every top-level document carries `"format": 1` and a `"kind"` string.
//! Documents embedded in other documents may omit `format`. Wherever a
//! module, algebra or cohomology ring is expected, a string names a preset.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::algebra::milnor::{build_milnor_subalgebra, MilnorProfile};
use crate::algebra::presented::{build_presented_algebra, AlgebraPresentation};
use crate::algebra::{AlgebraError, AlgebraRef, FiniteAlgebra, RawAlgebra};
use crate::cohomology::{CohomologyError, CohomologyPresentation, PolynomialPresentation};
use crate::fp::{FpMatrix, Prime};
use crate::module::{cyclic_module, GradedModule, ModuleError, ModuleMap, ModuleRef};
use crate::resolution::{ExtChart, FreeResolution, ResolutionError};
use crate::resolution::chart::ProductData;
use crate::twist::{build_twisted_module, thom_module_from_sw, SwClassData, TwistData, TwistError, TwistTarget};

pub const FORMAT: u32 = 1;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("invalid JSON: {0}")]
    Json(String),
    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("{path}: unsupported format {got:?}, expected {FORMAT}")]
    Format { path: String, got: Option<u64> },
    #[error("{path}: expected a document of kind {expected}, found `{got}`")]
    Kind { path: String, expected: String, got: String },
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("saved resolution belongs to different data (stored hash {stored}, current {current})")]
    HashMismatch { stored: String, current: String },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Module(#[from] ModuleError),
    #[error(transparent)]
    Cohomology(#[from] CohomologyError),
    #[error(transparent)]
    Twist(#[from] TwistError),
    #[error(transparent)]
    Resolution(#[from] ResolutionError),
    #[error(transparent)]
    File(#[from] std::io::Error),
}

fn invalid(path: &str, message: impl std::fmt::Display) -> IoError {
    IoError::Invalid { path: path.to_string(), message: message.to_string() }
}

/// Parse JSON text.
pub fn parse_json(text: &str) -> Result<Value, IoError> {
    serde_json::from_str(text).map_err(|e| IoError::Json(e.to_string()))
}

pub fn to_json_string(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

/// Deserialize `v`, reporting failures with a JSON path rooted at `path`.
pub fn decode<T: DeserializeOwned>(v: &Value, path: &str) -> Result<T, IoError> {
    serde_path_to_error::deserialize(v).map_err(|e| {
        let inner = e.path().to_string();
        let full = if inner == "." {
            path.to_string()
        } else if inner.starts_with('[') {
            format!("{path}{inner}")
        } else {
            format!("{path}.{inner}")
        };
        IoError::Schema { path: full, message: e.into_inner().to_string() }
    })
}

fn join(path: &str, field: &str) -> String {
    format!("{path}.{field}")
}

/// The `kind` of a document; `format` is required when `top_level`.
pub fn document_kind(v: &Value, path: &str, top_level: bool) -> Result<String, IoError> {
    let obj = v.as_object().ok_or_else(|| IoError::Schema { path: path.into(), message: "expected an object".into() })?;
    match obj.get("format") {
        None if !top_level => {}
        None => {
            return Err(IoError::Schema { path: path.into(), message: "missing field `format`".into() });
        }
        Some(f) if f.as_u64() == Some(FORMAT as u64) => {}
        Some(f) => return Err(IoError::Format { path: join(path, "format"), got: f.as_u64() }),
    }
    match obj.get("kind").and_then(Value::as_str) {
        Some(k) => Ok(k.to_string()),
        None => Err(IoError::Schema { path: path.into(), message: "missing field `kind`".into() }),
    }
}

fn expect_kind(v: &Value, path: &str, top_level: bool, expected: &str) -> Result<(), IoError> {
    let got = document_kind(v, path, top_level)?;
    if got != expected {
        return Err(IoError::Kind { path: path.into(), expected: expected.into(), got });
    }
    Ok(())
}

fn with_header(kind: &str, body: Value) -> Value {
    let mut out = serde_json::Map::new();
    out.insert("format".into(), Value::from(FORMAT));
    out.insert("kind".into(), Value::from(kind));
    if let Value::Object(m) = body {
        out.extend(m);
    }
    Value::Object(out)
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("document types always serialize")
}

/// A matrix as its nonzero entries.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SparseMatrix {
    pub rows: usize,
    pub cols: usize,
    /// `(row, col, coefficient)`.
    #[serde(default)]
    pub entries: Vec<(usize, usize, u8)>,
}

impl SparseMatrix {
    pub fn from_matrix(m: &FpMatrix) -> Self {
        let mut entries = Vec::new();
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                let c = m.get(i, j);
                if c != 0 {
                    entries.push((i, j, c));
                }
            }
        }
        SparseMatrix { rows: m.rows(), cols: m.cols(), entries }
    }

    pub fn to_matrix(&self, p: Prime, path: &str) -> Result<FpMatrix, IoError> {
        let mut m = FpMatrix::zeros(p, self.rows, self.cols);
        for &(i, j, c) in &self.entries {
            if i >= self.rows || j >= self.cols {
                return Err(invalid(path, format!("entry ({i}, {j}) outside a {}x{} matrix", self.rows, self.cols)));
            }
            m.set(i, j, p.reduce(c as i64));
        }
        Ok(m)
    }
}

// ---------------------------------------------------------------- algebras

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlgebraDoc {
    pub name: String,
    pub prime: Prime,
    /// `(label, degree)`, unit first.
    pub basis: Vec<(String, i32)>,
    pub generators: Vec<usize>,
    pub generator_names: Vec<String>,
    /// Nonzero products `e_i e_j = Σ c e_k` as `(i, j, [(k, c)])`.
    pub products: Vec<(usize, usize, Vec<(usize, u8)>)>,
    pub coproducts: Vec<Vec<(usize, usize, u8)>>,
    #[serde(default)]
    pub truncated: bool,
}

impl AlgebraDoc {
    pub fn from_algebra(a: &FiniteAlgebra) -> Self {
        let raw = a.raw();
        let n = raw.basis.len();
        let mut products = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let terms = &raw.products[i * n + j];
                if !terms.is_empty() {
                    products.push((i, j, terms.clone()));
                }
            }
        }
        AlgebraDoc {
            name: raw.name.clone(),
            prime: raw.prime,
            basis: raw.basis.clone(),
            generators: raw.generators.clone(),
            generator_names: raw.generator_names.clone(),
            products,
            coproducts: raw.coproducts.clone(),
            truncated: raw.truncated,
        }
    }

    pub fn to_algebra(&self, path: &str) -> Result<FiniteAlgebra, IoError> {
        let n = self.basis.len();
        let mut products = vec![Vec::new(); n * n];
        for (idx, (i, j, terms)) in self.products.iter().enumerate() {
            if *i >= n || *j >= n || terms.iter().any(|&(k, _)| k >= n) {
                return Err(invalid(&format!("{path}.products[{idx}]"), "basis index out of range"));
            }
            products[i * n + j] = terms.clone();
        }
        let raw = RawAlgebra {
            name: self.name.clone(),
            prime: self.prime,
            basis: self.basis.clone(),
            generators: self.generators.clone(),
            generator_names: self.generator_names.clone(),
            products,
            coproducts: self.coproducts.clone(),
            truncated: self.truncated,
        };
        Ok(FiniteAlgebra::from_raw(raw)?)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PresentationDoc {
    pub name: String,
    pub prime: Prime,
    pub generators: Vec<(String, i32)>,
    #[serde(default)]
    pub relations: Vec<String>,
    pub max_degree: i32,
}

/// A recipe rather than a table: a Milnor profile or a presentation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraSpecDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<u32>,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub milnor_profile: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub presentation: Option<PresentationDoc>,
}

pub fn algebra_to_json(a: &FiniteAlgebra) -> Value {
    with_header("algebra", to_value(&AlgebraDoc::from_algebra(a)))
}

/// Accepts a preset name, an `algebra` table or an `algebra-spec` recipe.
pub fn algebra_from_json(v: &Value, path: &str, top_level: bool) -> Result<AlgebraRef, IoError> {
    if let Some(name) = v.as_str() {
        return crate::algebra::by_name(name).ok_or_else(|| IoError::UnknownPreset(name.to_string()));
    }
    match document_kind(v, path, top_level)?.as_str() {
        "algebra" => Ok(Arc::new(decode::<AlgebraDoc>(v, path)?.to_algebra(path)?)),
        "algebra-spec" => {
            let spec: AlgebraSpecDoc = decode(v, path)?;
            match (spec.milnor_profile, spec.presentation) {
                (Some(bounds), None) => Ok(Arc::new(build_milnor_subalgebra(&MilnorProfile::new(bounds)?)?)),
                (None, Some(p)) => {
                    let gens: Vec<(&str, i32)> = p.generators.iter().map(|(n, d)| (n.as_str(), *d)).collect();
                    let mut pres = AlgebraPresentation::new(&p.name, p.prime, &gens, p.max_degree);
                    for r in &p.relations {
                        pres = pres.relation(r)?;
                    }
                    Ok(Arc::new(build_presented_algebra(&pres)?))
                }
                _ => Err(invalid(path, "give exactly one of `milnor_profile` and `presentation`")),
            }
        }
        other => Err(IoError::Kind { path: path.into(), expected: "algebra or algebra-spec".into(), got: other.into() }),
    }
}

/// A shipped algebra by name when it matches one, otherwise the full table.
fn algebra_reference(a: &AlgebraRef) -> Value {
    match crate::algebra::by_name(a.name()) {
        Some(b) if *b == **a => Value::from(a.name()),
        _ => with_header("algebra", to_value(&AlgebraDoc::from_algebra(a))),
    }
}

// ----------------------------------------------------------------- modules

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionDoc {
    pub generator: String,
    pub source: String,
    /// `(label, coefficient)`.
    pub target: Vec<(String, i64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModuleDoc {
    pub name: String,
    pub algebra: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_degree: Option<i32>,
    #[serde(default)]
    pub truncation: Option<i32>,
    /// `(label, degree)`.
    pub basis: Vec<(String, i32)>,
    #[serde(default)]
    pub actions: Vec<ActionDoc>,
}

impl ModuleDoc {
    pub fn from_module(m: &GradedModule) -> Self {
        let alg = m.algebra();
        let mut basis = Vec::new();
        let mut actions = Vec::new();
        for (d, labels) in m.labels_by_degree() {
            for l in &labels {
                basis.push((l.clone(), d));
            }
        }
        for d in m.min_degree()..=m.top_degree() {
            for slot in 0..alg.num_generators() {
                let mat = m.action(slot, d);
                let targets = m.labels(d + alg.generator_degree(slot));
                for (i, l) in m.labels(d).iter().enumerate() {
                    let target: Vec<(String, i64)> = (0..mat.cols())
                        .filter(|&j| mat.get(i, j) != 0)
                        .map(|j| (targets[j].clone(), mat.get(i, j) as i64))
                        .collect();
                    if !target.is_empty() {
                        actions.push(ActionDoc { generator: alg.generator_name(slot).to_string(), source: l.clone(), target });
                    }
                }
            }
        }
        ModuleDoc {
            name: m.name().to_string(),
            algebra: algebra_reference(alg),
            min_degree: Some(m.min_degree()),
            truncation: m.truncation(),
            basis,
            actions,
        }
    }

    pub fn to_module(&self, path: &str) -> Result<GradedModule, IoError> {
        let alg = algebra_from_json(&self.algebra, &join(path, "algebra"), false)?;
        let p = alg.prime();
        let lo = self.min_degree.or_else(|| self.basis.iter().map(|b| b.1).min()).unwrap_or(0);
        let hi = self.basis.iter().map(|b| b.1).max().unwrap_or(lo - 1).max(self.truncation.unwrap_or(i32::MIN));
        let width = (hi - lo + 1).max(0) as usize;
        let mut labels: Vec<Vec<String>> = vec![Vec::new(); width];
        let mut where_is = BTreeMap::new();
        for (idx, (l, d)) in self.basis.iter().enumerate() {
            if *d < lo {
                return Err(invalid(&format!("{path}.basis[{idx}]"), format!("degree {d} below min_degree {lo}")));
            }
            let slot = &mut labels[(d - lo) as usize];
            if where_is.insert(l.clone(), (*d, slot.len())).is_some() {
                return Err(invalid(&format!("{path}.basis[{idx}]"), format!("duplicate label `{l}`")));
            }
            slot.push(l.clone());
        }
        let dim = |d: i32| if d < lo || d > hi { 0 } else { labels[(d - lo) as usize].len() };
        let mut actions: Vec<Vec<FpMatrix>> = (0..alg.num_generators())
            .map(|slot| {
                let gd = alg.generator_degree(slot);
                (lo..=hi).map(|d| FpMatrix::zeros(p, dim(d), dim(d + gd))).collect()
            })
            .collect();
        for (idx, a) in self.actions.iter().enumerate() {
            let here = format!("{path}.actions[{idx}]");
            let slot = alg
                .generator_slot(&a.generator)
                .ok_or_else(|| invalid(&here, format!("`{}` is not a generator of {}", a.generator, alg.name())))?;
            let (d, i) = *where_is.get(&a.source).ok_or_else(|| invalid(&here, format!("unknown label `{}`", a.source)))?;
            let gd = alg.generator_degree(slot);
            for (l, c) in &a.target {
                let (d2, j) = *where_is.get(l).ok_or_else(|| invalid(&here, format!("unknown label `{l}`")))?;
                if d2 != d + gd {
                    return Err(invalid(&here, format!("`{l}` has degree {d2}, expected {}", d + gd)));
                }
                let m = &mut actions[slot][(d - lo) as usize];
                let v = p.add(m.get(i, j), p.reduce(*c));
                m.set(i, j, v);
            }
        }
        Ok(GradedModule::from_parts(alg, self.name.clone(), lo, labels, self.truncation, actions)?)
    }
}

pub fn module_to_json(m: &GradedModule) -> Value {
    with_header("module", to_value(&ModuleDoc::from_module(m)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CyclicModuleDoc {
    #[serde(default)]
    pub name: Option<String>,
    pub algebra: Value,
    pub annihilators: Vec<String>,
    #[serde(default)]
    pub d_max: Option<i32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwistedModuleDoc {
    #[serde(default)]
    pub name: Option<String>,
    pub cohomology: Value,
    pub target: TwistTarget,
    #[serde(default)]
    pub twist: TwistData,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThomModuleDoc {
    #[serde(default)]
    pub name: Option<String>,
    pub cohomology: Value,
    pub algebra: Value,
    pub sw: SwClassData,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct GroundDoc {
    algebra: Value,
    #[serde(default)]
    degree: i32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct SuspensionDoc {
    module: Value,
    by: i32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct SumDoc {
    #[serde(default)]
    name: Option<String>,
    summands: Vec<Value>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct TensorDoc {
    #[serde(default)]
    name: Option<String>,
    factors: Vec<Value>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct TruncateDoc {
    module: Value,
    degree: i32,
}

/// Build a module from any module-valued document: `module`,
/// `cyclic-module`, `twisted-module`, `thom-module`, `ground-module`,
/// `suspension`, `direct-sum`, `tensor`, `truncation`, or a preset name.
pub fn module_from_json(v: &Value, path: &str, top_level: bool) -> Result<GradedModule, IoError> {
    if let Some(name) = v.as_str() {
        return crate::presets::module(name);
    }
    let kind = document_kind(v, path, top_level)?;
    let sub = |field: &str, v: &Value| module_from_json(v, &join(path, field), false);
    match kind.as_str() {
        "module" => decode::<ModuleDoc>(v, path)?.to_module(path),
        "cyclic-module" => {
            let doc: CyclicModuleDoc = decode(v, path)?;
            let alg = algebra_from_json(&doc.algebra, &join(path, "algebra"), false)?;
            let ann = doc
                .annihilators
                .iter()
                .map(|a| alg.parse_element(a))
                .collect::<Result<Vec<_>, _>>()?;
            let m = cyclic_module(&alg, &ann, doc.d_max)?;
            Ok(match doc.name {
                Some(n) => m.with_name(n),
                None => m,
            })
        }
        "twisted-module" => {
            let doc: TwistedModuleDoc = decode(v, path)?;
            let h = cohomology_from_json(&doc.cohomology, &join(path, "cohomology"), false)?;
            let m = build_twisted_module(&h, doc.target, &doc.twist)?;
            Ok(match doc.name {
                Some(n) => m.with_name(n),
                None => m,
            })
        }
        "thom-module" => {
            let doc: ThomModuleDoc = decode(v, path)?;
            let h = cohomology_from_json(&doc.cohomology, &join(path, "cohomology"), false)?;
            let alg = algebra_from_json(&doc.algebra, &join(path, "algebra"), false)?;
            let m = thom_module_from_sw(&h, &doc.sw, alg)?;
            Ok(match doc.name {
                Some(n) => m.with_name(n),
                None => m,
            })
        }
        "ground-module" => {
            let doc: GroundDoc = decode(v, path)?;
            let alg = algebra_from_json(&doc.algebra, &join(path, "algebra"), false)?;
            Ok(GradedModule::ground(alg, doc.degree))
        }
        "suspension" => {
            let doc: SuspensionDoc = decode(v, path)?;
            Ok(sub("module", &doc.module)?.suspend(doc.by))
        }
        "truncation" => {
            let doc: TruncateDoc = decode(v, path)?;
            Ok(sub("module", &doc.module)?.truncate(doc.degree))
        }
        "direct-sum" => {
            let doc: SumDoc = decode(v, path)?;
            let mut acc: Option<GradedModule> = None;
            for (i, s) in doc.summands.iter().enumerate() {
                let m = sub(&format!("summands[{i}]"), s)?;
                acc = Some(match acc {
                    None => m,
                    Some(a) => a.direct_sum(&m)?,
                });
            }
            let m = acc.ok_or_else(|| invalid(path, "empty direct sum"))?;
            Ok(match doc.name {
                Some(n) => m.with_name(n),
                None => m,
            })
        }
        "tensor" => {
            let doc: TensorDoc = decode(v, path)?;
            let mut acc: Option<GradedModule> = None;
            for (i, s) in doc.factors.iter().enumerate() {
                let m = sub(&format!("factors[{i}]"), s)?;
                acc = Some(match acc {
                    None => m,
                    Some(a) => a.tensor_product(&m)?,
                });
            }
            let m = acc.ok_or_else(|| invalid(path, "empty tensor product"))?;
            Ok(match doc.name {
                Some(n) => m.with_name(n),
                None => m,
            })
        }
        other => Err(IoError::Kind { path: path.into(), expected: "a module document".into(), got: other.into() }),
    }
}

/// A degree-preserving map given on basis labels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModuleMapDoc {
    #[serde(default)]
    pub shift: i32,
    /// `(source label, [(target label, coefficient)])`; unlisted labels map
    /// to zero.
    pub assignments: Vec<(String, Vec<(String, i64)>)>,
}

impl ModuleMapDoc {
    pub fn to_map(&self, source: ModuleRef, target: ModuleRef, path: &str) -> Result<ModuleMap, IoError> {
        if self.shift != 0 {
            return Err(invalid(path, "only degree-preserving maps are supported"));
        }
        let owned: Vec<(&str, Vec<(&str, i64)>)> = self
            .assignments
            .iter()
            .map(|(s, ts)| (s.as_str(), ts.iter().map(|(l, c)| (l.as_str(), *c)).collect()))
            .collect();
        let borrowed: Vec<(&str, &[(&str, i64)])> = owned.iter().map(|(s, ts)| (*s, ts.as_slice())).collect();
        Ok(ModuleMap::from_labels(source, target, &borrowed)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SesDoc {
    #[serde(default)]
    pub name: Option<String>,
    pub sub: Value,
    pub mid: Value,
    pub quot: Value,
    pub i: ModuleMapDoc,
    pub q: ModuleMapDoc,
}

/// `0 -> A -i-> B -q-> C -> 0`.
#[derive(Clone, Debug)]
pub struct ShortExactSequence {
    pub name: String,
    pub i: ModuleMap,
    pub q: ModuleMap,
}

/// Accepts a preset name or a `short-exact-sequence` document.
pub fn ses_from_json(v: &Value, path: &str, top_level: bool) -> Result<ShortExactSequence, IoError> {
    if let Some(name) = v.as_str() {
        return crate::presets::ses(name);
    }
    expect_kind(v, path, top_level, "short-exact-sequence")?;
    let doc: SesDoc = decode(v, path)?;
    let a: ModuleRef = Arc::new(module_from_json(&doc.sub, &join(path, "sub"), false)?);
    let b: ModuleRef = Arc::new(module_from_json(&doc.mid, &join(path, "mid"), false)?);
    let c: ModuleRef = Arc::new(module_from_json(&doc.quot, &join(path, "quot"), false)?);
    let i = doc.i.to_map(a, b.clone(), &join(path, "i"))?;
    let q = doc.q.to_map(b, c, &join(path, "q"))?;
    let name = doc.name.unwrap_or_else(|| format!("{} → {} → {}", i.source.name(), i.target.name(), q.target.name()));
    Ok(ShortExactSequence { name, i, q })
}

// -------------------------------------------------------------- cohomology

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorDoc {
    pub name: String,
    pub degree: i32,
    #[serde(default)]
    pub exterior: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperationDoc {
    pub op: String,
    pub generator: String,
    pub value: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolynomialDoc {
    pub name: String,
    pub prime: Prime,
    pub truncation: i32,
    #[serde(default)]
    pub complete: bool,
    pub generators: Vec<GeneratorDoc>,
    #[serde(default)]
    pub zero: Vec<String>,
    #[serde(default)]
    pub operations: Vec<OperationDoc>,
}

impl PolynomialDoc {
    pub fn to_presentation(&self) -> PolynomialPresentation {
        let mut p = PolynomialPresentation::new(&self.name, self.prime, self.truncation).complete(self.complete);
        for g in &self.generators {
            p = if g.exterior { p.exterior_generator(&g.name, g.degree) } else { p.generator(&g.name, g.degree) };
        }
        for z in &self.zero {
            p = p.zero(z);
        }
        for o in &self.operations {
            p = p.set(&o.op, &o.generator, &o.value);
        }
        p
    }
}

/// A cohomology ring given by tables.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CohomologyDoc {
    pub name: String,
    pub prime: Prime,
    pub truncation: i32,
    pub complete: bool,
    pub basis: Vec<Vec<String>>,
    /// `((d1, d2), matrix)`.
    pub products: Vec<((i32, i32), SparseMatrix)>,
    pub operations: BTreeMap<String, Vec<SparseMatrix>>,
}

impl CohomologyDoc {
    pub fn from_presentation(h: &CohomologyPresentation) -> Self {
        CohomologyDoc {
            name: h.name.clone(),
            prime: h.prime,
            truncation: h.truncation,
            complete: h.complete,
            basis: h.basis.clone(),
            products: h.products.iter().map(|(&k, m)| (k, SparseMatrix::from_matrix(m))).collect(),
            operations: h
                .operations
                .iter()
                .map(|(k, ms)| (k.clone(), ms.iter().map(SparseMatrix::from_matrix).collect()))
                .collect(),
        }
    }

    pub fn to_presentation(&self, path: &str) -> Result<CohomologyPresentation, IoError> {
        let p = self.prime;
        let mut products = BTreeMap::new();
        for (i, (k, m)) in self.products.iter().enumerate() {
            products.insert(*k, m.to_matrix(p, &format!("{path}.products[{i}]"))?);
        }
        let mut operations = BTreeMap::new();
        for (name, ms) in &self.operations {
            let mats = ms
                .iter()
                .enumerate()
                .map(|(i, m)| m.to_matrix(p, &format!("{path}.operations.{name}[{i}]")))
                .collect::<Result<Vec<_>, _>>()?;
            operations.insert(name.clone(), mats);
        }
        let h = CohomologyPresentation {
            name: self.name.clone(),
            prime: p,
            truncation: self.truncation,
            complete: self.complete,
            basis: self.basis.clone(),
            products,
            operations,
        };
        h.check()?;
        Ok(h)
    }
}

pub fn cohomology_to_json(h: &CohomologyPresentation) -> Value {
    with_header("cohomology", to_value(&CohomologyDoc::from_presentation(h)))
}

/// Accepts a preset name, `polynomial-cohomology` or `cohomology`.
pub fn cohomology_from_json(v: &Value, path: &str, top_level: bool) -> Result<CohomologyPresentation, IoError> {
    if let Some(name) = v.as_str() {
        return crate::presets::cohomology(name);
    }
    match document_kind(v, path, top_level)?.as_str() {
        "polynomial-cohomology" => Ok(decode::<PolynomialDoc>(v, path)?.to_presentation().build()?),
        "cohomology" => decode::<CohomologyDoc>(v, path)?.to_presentation(path),
        other => Err(IoError::Kind {
            path: path.into(),
            expected: "polynomial-cohomology or cohomology".into(),
            got: other.into(),
        }),
    }
}

// ------------------------------------------------------------- resolutions

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageDoc {
    /// Generator degrees in flat order.
    pub degrees: Vec<i32>,
    /// `(row, col, algebra basis index, coefficient)`: generator `row`
    /// maps to `Σ c · e · g_col`. At stage 0, `col` indexes the module
    /// basis in the generator's degree and the algebra index is 0.
    pub differential: Vec<(usize, usize, usize, u8)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolutionDoc {
    pub content_hash: String,
    pub module: Value,
    pub s_max: usize,
    pub t_max: i32,
    pub stages: Vec<StageDoc>,
}

/// SHA-256 over the canonical JSON of the algebra table and module.
pub fn content_hash(m: &GradedModule) -> String {
    let mut h = Sha256::new();
    h.update(serde_json::to_vec(&AlgebraDoc::from_algebra(m.algebra())).expect("serializable"));
    h.update(b"\n");
    let mut doc = ModuleDoc::from_module(m);
    doc.algebra = Value::Null;
    h.update(serde_json::to_vec(&doc).expect("serializable"));
    hex::encode(h.finalize())
}

/// Offsets of the blocks of a free module with generators in `degrees`,
/// in degree `t`.
fn block_offsets(alg: &FiniteAlgebra, degrees: &[i32], t: i32) -> (Vec<Option<usize>>, usize) {
    let mut off = 0;
    let offsets = degrees
        .iter()
        .map(|&d| {
            let n = if d <= t { alg.dim(t - d) } else { 0 };
            let o = (n > 0).then_some(off);
            off += n;
            o
        })
        .collect();
    (offsets, off)
}

pub fn resolution_to_json(r: &FreeResolution) -> Value {
    let alg = r.algebra();
    let mut stages = Vec::new();
    let mut prev_degrees: Vec<i32> = Vec::new();
    for s in 0..=r.s_max() {
        let degrees: Vec<i32> = r.generators(s).iter().map(|g| g.degree).collect();
        let mut differential = Vec::new();
        for (row, &t) in degrees.iter().enumerate() {
            let k = row - r.flat_index(s, t, 0);
            let v = r.image(s, t, k);
            if s == 0 {
                differential.extend(v.iter().enumerate().filter(|(_, &c)| c != 0).map(|(j, &c)| (row, j, 0, c)));
                continue;
            }
            let (offsets, _) = block_offsets(alg, &prev_degrees, t);
            for (col, off) in offsets.iter().enumerate() {
                let Some(off) = off else { continue };
                let range = alg.range(t - prev_degrees[col]);
                for (j, e) in range.enumerate() {
                    let c = v[off + j];
                    if c != 0 {
                        differential.push((row, col, e, c));
                    }
                }
            }
        }
        stages.push(StageDoc { degrees: degrees.clone(), differential });
        prev_degrees = degrees;
    }
    let doc = ResolutionDoc {
        content_hash: content_hash(r.module()),
        module: module_to_json(r.module()),
        s_max: r.s_max(),
        t_max: r.t_max(),
        stages,
    };
    with_header("resolution", to_value(&doc))
}

/// Load a saved resolution. With `expected`, the stored content hash must
/// match that module and the module is taken from the caller.
pub fn resolution_from_json(v: &Value, expected: Option<ModuleRef>) -> Result<FreeResolution, IoError> {
    expect_kind(v, "$", true, "resolution")?;
    let doc: ResolutionDoc = decode(v, "$")?;
    let module: ModuleRef = match expected {
        Some(m) => {
            let current = content_hash(&m);
            if current != doc.content_hash {
                return Err(IoError::HashMismatch { stored: doc.content_hash, current });
            }
            m
        }
        None => {
            let m = Arc::new(module_from_json(&doc.module, "$.module", false)?);
            let current = content_hash(&m);
            if current != doc.content_hash {
                return Err(IoError::HashMismatch { stored: doc.content_hash, current });
            }
            m
        }
    };
    if doc.stages.len() != doc.s_max + 1 {
        return Err(invalid("$.stages", format!("expected {} stages, found {}", doc.s_max + 1, doc.stages.len())));
    }
    let alg = module.algebra().clone();
    let p = alg.prime();
    let lo = module.min_degree();
    let width = (doc.t_max as i64 - lo as i64 + 1).max(0) as usize;
    let mut stages: Vec<Vec<Vec<Vec<u8>>>> = Vec::new();
    let mut prev: &[i32] = &[];
    for (s, st) in doc.stages.iter().enumerate() {
        let here = format!("$.stages[{s}]");
        let mut cells: Vec<Vec<Vec<u8>>> = vec![Vec::new(); width];
        let mut rows: Vec<Vec<u8>> = Vec::with_capacity(st.degrees.len());
        for (i, &t) in st.degrees.iter().enumerate() {
            if t < lo || t > doc.t_max || (i > 0 && t < st.degrees[i - 1]) {
                return Err(invalid(&format!("{here}.degrees[{i}]"), format!("degree {t} out of order or outside the window")));
            }
            let dim = if s == 0 { module.dim(t) } else { block_offsets(&alg, prev, t).1 };
            rows.push(vec![0; dim]);
        }
        for (n, &(row, col, e, c)) in st.differential.iter().enumerate() {
            let at = format!("{here}.differential[{n}]");
            let t = *st.degrees.get(row).ok_or_else(|| invalid(&at, format!("row {row} out of range")))?;
            let idx = if s == 0 {
                (e == 0 && col < rows[row].len()).then_some(col)
            } else {
                let (offsets, _) = block_offsets(&alg, prev, t);
                match (offsets.get(col).copied().flatten(), prev.get(col)) {
                    (Some(off), Some(&d)) => {
                        let r = alg.range(t - d);
                        r.contains(&e).then(|| off + e - r.start)
                    }
                    _ => None,
                }
            };
            let idx = idx.ok_or_else(|| invalid(&at, "entry does not fit the source degree"))?;
            rows[row][idx] = p.reduce(c as i64);
        }
        for (i, v) in rows.into_iter().enumerate() {
            cells[(st.degrees[i] - lo) as usize].push(v);
        }
        stages.push(cells);
        prev = &st.degrees;
    }
    Ok(FreeResolution::from_parts(module, doc.s_max, doc.t_max, stages)?)
}

// ------------------------------------------------------------------ charts

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProductDoc {
    pub s: usize,
    pub t: i32,
    /// `((s, t) of the source cell, matrix)`.
    pub cells: Vec<((usize, i32), SparseMatrix)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChartDoc {
    pub name: String,
    pub prime: Prime,
    pub s_max: usize,
    pub t_max: i32,
    /// `(s, t, rank)`, nonzero cells only.
    pub ranks: Vec<(usize, i32, usize)>,
    #[serde(default)]
    pub products: BTreeMap<String, ProductDoc>,
}

pub fn chart_to_json(c: &ExtChart) -> Value {
    let doc = ChartDoc {
        name: c.name.clone(),
        prime: c.prime,
        s_max: c.s_max,
        t_max: c.t_max,
        ranks: c.ranks.iter().map(|(&(s, t), &n)| (s, t, n)).collect(),
        products: c
            .products
            .iter()
            .map(|(k, d)| {
                let cells = d.matrices.iter().map(|(&cell, m)| (cell, SparseMatrix::from_matrix(m))).collect();
                (k.clone(), ProductDoc { s: d.s, t: d.t, cells })
            })
            .collect(),
    };
    with_header("chart", to_value(&doc))
}

pub fn chart_from_json(v: &Value) -> Result<ExtChart, IoError> {
    expect_kind(v, "$", true, "chart")?;
    let doc: ChartDoc = decode(v, "$")?;
    let mut c = ExtChart::new(doc.name, doc.prime, doc.s_max, doc.t_max);
    for &(s, t, n) in &doc.ranks {
        if n > 0 {
            c.ranks.insert((s, t), n);
        }
    }
    for (name, pd) in doc.products {
        let mut matrices = BTreeMap::new();
        for (i, ((s, t), m)) in pd.cells.iter().enumerate() {
            let here = format!("$.products.{name}.cells[{i}]");
            if m.rows != c.rank(*s, *t) || m.cols != c.rank(s + pd.s, t + pd.t) {
                return Err(invalid(&here, "matrix shape does not match the chart ranks"));
            }
            matrices.insert((*s, *t), m.to_matrix(doc.prime, &here)?);
        }
        c.products.insert(name, ProductData { s: pd.s, t: pd.t, matrices });
    }
    Ok(c)
}

// ---------------------------------------------------------------- dispatch

/// Any document the library can load.
#[derive(Clone, Debug)]
pub enum Document {
    Algebra(AlgebraRef),
    Module(GradedModule),
    Cohomology(CohomologyPresentation),
    Resolution(FreeResolution),
    Chart(ExtChart),
    Ses(ShortExactSequence),
    Scenario(crate::scenario::Scenario),
}

pub fn load_document(v: &Value) -> Result<Document, IoError> {
    let kind = document_kind(v, "$", true)?;
    Ok(match kind.as_str() {
        "algebra" | "algebra-spec" => Document::Algebra(algebra_from_json(v, "$", true)?),
        "polynomial-cohomology" | "cohomology" => Document::Cohomology(cohomology_from_json(v, "$", true)?),
        "resolution" => Document::Resolution(resolution_from_json(v, None)?),
        "chart" => Document::Chart(chart_from_json(v)?),
        "short-exact-sequence" => Document::Ses(ses_from_json(v, "$", true)?),
        "twist-scenario" => Document::Scenario(crate::scenario::scenario_from_json(v, "$")?),
        _ => Document::Module(module_from_json(v, "$", true)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{a1, atmf, e1};
    use crate::resolution::minimal_resolution;

    #[test]
    fn algebra_roundtrip() {
        for a in [a1(), e1(), atmf()] {
            let v = algebra_to_json(&a);
            let b = algebra_from_json(&parse_json(&to_json_string(&v)).unwrap(), "$", true).unwrap();
            assert_eq!(*a, *b);
        }
    }

    #[test]
    fn algebra_spec_profile() {
        let v = parse_json(r#"{"format":1,"kind":"algebra-spec","milnor_profile":[2,1]}"#).unwrap();
        assert_eq!(*algebra_from_json(&v, "$", true).unwrap(), *a1());
    }

    #[test]
    fn module_roundtrip() {
        let alg = a1();
        let m = cyclic_module(&alg, &[alg.parse_element("Sq1").unwrap()], None).unwrap().suspend(-2);
        let v = module_to_json(&m);
        let back = module_from_json(&v, "$", true).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn resolution_roundtrip() {
        let alg = a1();
        let m = Arc::new(cyclic_module(&alg, &[alg.parse_element("Sq2").unwrap()], None).unwrap());
        let r = minimal_resolution(m.clone(), 4, 12).unwrap();
        let v = resolution_to_json(&r);
        let back = resolution_from_json(&parse_json(&to_json_string(&v)).unwrap(), None).unwrap();
        assert_eq!(r, back);
        let other = Arc::new(GradedModule::ground(alg, 0));
        assert!(matches!(resolution_from_json(&v, Some(other)), Err(IoError::HashMismatch { .. })));
    }

    #[test]
    fn missing_field_is_named() {
        let v = parse_json(r#"{"format":1,"kind":"module","name":"x","algebra":"A(1)"}"#).unwrap();
        let err = module_from_json(&v, "$", true).unwrap_err().to_string();
        assert!(err.contains("basis"), "{err}");
        let v = parse_json(r#"{"kind":"module"}"#).unwrap();
        assert!(module_from_json(&v, "$", true).unwrap_err().to_string().contains("format"));
    }

    #[test]
    fn nested_path_is_reported() {
        let v = parse_json(
            r#"{"format":1,"kind":"module","name":"x","algebra":"A(1)","basis":[["a",0]],
                "actions":[{"generator":"Sq1","source":"a"}]}"#,
        )
        .unwrap();
        let err = module_from_json(&v, "$", true).unwrap_err().to_string();
        assert!(err.contains("actions[0]") && err.contains("target"), "{err}");
    }
}
