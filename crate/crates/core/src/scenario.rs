//! Scenario documents: a module, a window and a list of checks, each with
//! its expected value and where that value comes from.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::algebra::AlgebraRef;
use crate::cohomology::CohomologyPresentation;
use crate::fp::Subspace;
use crate::io::{self, IoError};
use crate::module::{GradedModule, ModuleRef};
use crate::resolution::chart::{chart_with_products, named_class};
use crate::resolution::{
    collapse_check, ext_ranks, h0_injective, les_rank_check, minimal_resolution, read_off_groups, yoneda_product,
    ExtChart, ExtClass, FreeResolution, ResolutionError, StemGroup,
};
use crate::twist::{build_twisted_module, thom_module_from_sw, SwClassData, TwistData, TwistTarget};

/// Where an expected value comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Origin {
    /// Stated in the published computation being reproduced.
    Published,
    /// Worked out by hand or by an independent oracle.
    HandDerived,
    /// Recorded from an earlier run and frozen.
    Regression,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Origin::Published => "published",
            Origin::HandDerived => "hand-derived",
            Origin::Regression => "regression",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub s_max: usize,
    pub t_max: i32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    #[serde(flatten)]
    pub kind: CheckKind,
    /// Absent only for reports, which assert nothing.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<Origin>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "kebab-case")]
pub enum CheckKind {
    /// The module satisfies every relation of its algebra.
    Valid,
    /// Degreewise dimensions through `through`; unlisted degrees are 0.
    Dims { expected: Vec<(i32, usize)>, through: i32 },
    /// Degreewise dimensions agree with another module through `through`.
    DimsMatch { other: Value, through: i32 },
    /// `op(U·source) = U·expected` in a Thom module, classes written in the
    /// cohomology ring. `module` replaces the scenario module.
    ThomAction {
        op: String,
        source: String,
        expected: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        module: Option<Value>,
    },
    /// Print `op(U·source)` without asserting anything.
    ThomActionReport { op: String, source: String },
    /// Listed cells have the given rank; with `exact`, all other window
    /// cells vanish.
    Ranks {
        cells: Vec<(usize, i32, usize)>,
        #[serde(default)]
        exact: bool,
    },
    /// Ranks up a stem from `s = 0`: `ranks` lists them (zero afterwards),
    /// or `every` fixes the rank at every in-window filtration.
    StemRanks {
        stem: i32,
        #[serde(default)]
        ranks: Option<Vec<usize>>,
        #[serde(default)]
        every: Option<usize>,
    },
    /// Groups read off stems, Unicode or ASCII notation.
    Groups {
        stems: Vec<i32>,
        expected: Vec<String>,
        #[serde(default)]
        s_bound: Option<usize>,
    },
    /// Number of possible differentials with source stem at most
    /// `max_stem`.
    Collapse {
        max_stem: i32,
        #[serde(default = "default_r_max")]
        r_max: usize,
        #[serde(default)]
        h0_pruning: bool,
        expected: usize,
    },
    /// `h0` is injective on every in-window cell up to `max_stem`.
    H0Injective { max_stem: i32 },
    /// Cells carrying indecomposable classes of `Ext(F_p)`.
    ExtGenerators { cells: Vec<(usize, i32)> },
    /// Whether `left · right` vanishes, both named classes of `Ext(F_p)`.
    Product { left: String, right: String, zero: bool },
    /// Exactness of the long exact sequence of a short exact sequence.
    Les { ses: Value },
    /// `op(U·source) = U·expected` in the Thom module of a bundle.
    SwAction { cohomology: Value, sw: SwClassData, algebra: Value, op: String, source: String, expected: String },
    /// The Thom module of a bundle equals a twisted module, generator by
    /// generator.
    SwMatchesTwist { cohomology: Value, sw: SwClassData, algebra: Value, target: TwistTarget, twist: TwistData },
    /// `M ⊗ with` has the same Ext ranks as `M` in stems below `max_stem`.
    TensorRanks { with: Value, max_stem: i32 },
}

fn default_r_max() -> usize {
    4
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub module: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<Window>,
    #[serde(default)]
    pub products: Vec<String>,
    /// Stems to read off and print, whether or not a check covers them.
    #[serde(default)]
    pub read_off: Vec<i32>,
    pub checks: Vec<Check>,
}

pub fn scenario_from_json(v: &Value, path: &str) -> Result<Scenario, IoError> {
    let kind = io::document_kind(v, path, true)?;
    if kind != "twist-scenario" {
        return Err(IoError::Kind { path: path.into(), expected: "twist-scenario".into(), got: kind });
    }
    let mut obj = v.as_object().cloned().unwrap_or_default();
    obj.remove("format");
    obj.remove("kind");
    io::decode(&Value::Object(obj), path)
}

pub fn scenario_to_json(sc: &Scenario) -> Value {
    let mut out = serde_json::Map::new();
    out.insert("format".into(), Value::from(io::FORMAT));
    out.insert("kind".into(), Value::from("twist-scenario"));
    if let Value::Object(m) = serde_json::to_value(sc).expect("serializable") {
        out.extend(m);
    }
    Value::Object(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckOutcome {
    pub label: String,
    pub origin: Option<Origin>,
    /// `None` for reports.
    pub passed: Option<bool>,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScenarioReport {
    pub name: String,
    pub outcomes: Vec<CheckOutcome>,
    pub groups: Vec<(i32, String)>,
    #[serde(skip)]
    pub chart: Option<ExtChart>,
}

impl ScenarioReport {
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed != Some(false))
    }

    pub fn outcome(&self, label_prefix: &str) -> Option<&CheckOutcome> {
        self.outcomes.iter().find(|o| o.label.starts_with(label_prefix))
    }
}

impl fmt::Display for ScenarioReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "scenario {}", self.name)?;
        for o in &self.outcomes {
            let status = match o.passed {
                Some(true) => "PASS",
                Some(false) => "FAIL",
                None => "INFO",
            };
            let origin = o.origin.map(|x| format!(" [{x}]")).unwrap_or_default();
            writeln!(f, "  {status} {}{origin}: {}", o.label, o.detail)?;
        }
        for (stem, g) in &self.groups {
            writeln!(f, "  stem {stem}: {g}")?;
        }
        Ok(())
    }
}

struct Runner<'a> {
    sc: &'a Scenario,
    module: Option<ModuleRef>,
    cohomology: Option<CohomologyPresentation>,
    resolution: Option<FreeResolution>,
    chart: Option<ExtChart>,
    audits: Vec<(String, usize, Vec<String>)>,
}

fn fail(detail: impl Into<String>) -> (bool, String) {
    (false, detail.into())
}

impl<'a> Runner<'a> {
    fn module(&mut self) -> Result<ModuleRef, IoError> {
        if let Some(m) = &self.module {
            return Ok(m.clone());
        }
        let v = self.sc.module.as_ref().ok_or_else(|| IoError::Invalid {
            path: "$.module".into(),
            message: "this check needs a scenario module".into(),
        })?;
        let m = Arc::new(io::module_from_json(v, "$.module", false)?);
        self.module = Some(m.clone());
        Ok(m)
    }

    /// The cohomology ring under a twisted or Thom module.
    fn cohomology(&mut self) -> Result<CohomologyPresentation, IoError> {
        if let Some(h) = &self.cohomology {
            return Ok(h.clone());
        }
        let v = self
            .sc
            .module
            .as_ref()
            .and_then(|m| m.get("cohomology"))
            .ok_or_else(|| IoError::Invalid { path: "$.module".into(), message: "module is not a Thom module".into() })?;
        let h = io::cohomology_from_json(v, "$.module.cohomology", false)?;
        self.cohomology = Some(h.clone());
        Ok(h)
    }

    fn window(&self) -> Result<Window, IoError> {
        self.sc.window.ok_or_else(|| IoError::Invalid { path: "$.window".into(), message: "this check needs a window".into() })
    }

    fn resolve(&mut self, m: ModuleRef, w: Window) -> Result<FreeResolution, IoError> {
        let r = minimal_resolution(m.clone(), w.s_max, w.t_max)?;
        let a = r.audit();
        self.audits.push((m.name().to_string(), a.cells_checked, a.failures));
        Ok(r)
    }

    fn resolution(&mut self) -> Result<FreeResolution, IoError> {
        if let Some(r) = &self.resolution {
            return Ok(r.clone());
        }
        let m = self.module()?;
        let w = self.window()?;
        let r = self.resolve(m, w)?;
        self.resolution = Some(r.clone());
        Ok(r)
    }

    fn chart(&mut self) -> Result<ExtChart, IoError> {
        if let Some(c) = &self.chart {
            return Ok(c.clone());
        }
        let r = self.resolution()?;
        let names: Vec<&str> = self.sc.products.iter().map(String::as_str).collect();
        let c = chart_with_products(&r, &names)?;
        self.chart = Some(c.clone());
        Ok(c)
    }

    fn thom_action(
        m: &GradedModule,
        h: &CohomologyPresentation,
        op: &str,
        source: &str,
    ) -> Result<(i32, Option<Vec<u8>>, String), IoError> {
        let x = m.algebra().parse_element(op)?;
        let src = h.parse_class(source)?;
        let target = src.degree + x.degree;
        let v = m.act(&x, src.degree, &src.coeffs);
        if target > m.trusted_through() {
            return Ok((target, None, format!("lands in degree {target}, above the truncation {}", m.trusted_through())));
        }
        let text = format!("U·({})", h.format_class(&crate::cohomology::Class { degree: target, coeffs: v.clone() }));
        Ok((target, Some(v), text))
    }

    fn expect_thom(m: &GradedModule, h: &CohomologyPresentation, op: &str, source: &str, expected: &str) -> Result<(bool, String), IoError> {
        let (target, got, text) = Self::thom_action(m, h, op, source)?;
        let Some(got) = got else { return Ok(fail(text)) };
        let want = h.parse_class(expected)?;
        let want = if want.is_zero() { vec![0; h.dim(target)] } else { want.coeffs };
        if want.len() != got.len() {
            return Ok(fail(format!("expected class has the wrong degree; got {text}")));
        }
        Ok((got == want, format!("{op}(U·({source})) = {text}")))
    }

    fn run_check(&mut self, check: &CheckKind) -> Result<(bool, String), IoError> {
        Ok(match check {
            CheckKind::Valid => {
                let m = self.module()?;
                let rep = m.validate();
                match rep.violations.first() {
                    None => (true, format!("{} relations checked", rep.relations_checked)),
                    Some(v) => fail(format!("{} fails in degree {}: {} ↦ {}", v.relation, v.degree, v.witness, v.image)),
                }
            }
            CheckKind::Dims { expected, through } => {
                let m = self.module()?;
                let want: BTreeMap<i32, usize> = expected.iter().copied().filter(|e| e.1 > 0).collect();
                let got: BTreeMap<i32, usize> =
                    m.dims().into_iter().filter(|&(d, n)| d <= *through && n > 0).collect();
                (got == want, format!("{got:?}"))
            }
            CheckKind::DimsMatch { other, through } => {
                let m = self.module()?;
                let o = io::module_from_json(other, "$.checks.other", false)?;
                let lo = m.min_degree().min(o.min_degree());
                let bad: Vec<i32> = (lo..=*through).filter(|&d| m.dim(d) != o.dim(d)).collect();
                let dims: Vec<(i32, usize)> = m.dims().into_iter().filter(|&(d, n)| d <= *through && n > 0).collect();
                (bad.is_empty(), if bad.is_empty() { format!("{dims:?}") } else { format!("differ in degrees {bad:?}") })
            }
            CheckKind::ThomAction { op, source, expected, module: None } => {
                let m = self.module()?;
                let h = self.cohomology()?;
                Self::expect_thom(&m, &h, op, source, expected)?
            }
            CheckKind::ThomAction { op, source, expected, module: Some(v) } => {
                let m = io::module_from_json(v, "$.checks.module", false)?;
                let hv = v.get("cohomology").ok_or_else(|| IoError::Invalid {
                    path: "$.checks.module".into(),
                    message: "module is not a Thom module".into(),
                })?;
                let h = io::cohomology_from_json(hv, "$.checks.module.cohomology", false)?;
                Self::expect_thom(&m, &h, op, source, expected)?
            }
            CheckKind::ThomActionReport { op, source } => {
                let m = self.module()?;
                let h = self.cohomology()?;
                let (_, got, text) = Self::thom_action(&m, &h, op, source)?;
                let verdict = match got {
                    None => format!("undetermined: {text}"),
                    Some(v) if v.iter().all(|&c| c == 0) => "zero".to_string(),
                    Some(_) => format!("nonzero: {text}"),
                };
                (true, format!("{op}(U·({source})) is {verdict}"))
            }
            CheckKind::Ranks { cells, exact } => {
                let c = self.chart()?;
                let mut bad = Vec::new();
                for &(s, t, n) in cells {
                    if c.is_masked(s, t) {
                        bad.push(format!("({s}, {t}) is outside the window"));
                    } else if c.rank(s, t) != n {
                        bad.push(format!("rank at ({s}, {t}) is {}, expected {n}", c.rank(s, t)));
                    }
                }
                if *exact {
                    let listed: BTreeSet<(usize, i32)> = cells.iter().map(|&(s, t, _)| (s, t)).collect();
                    for (&cell, &n) in &c.ranks {
                        if !listed.contains(&cell) {
                            bad.push(format!("unexpected rank {n} at {cell:?}"));
                        }
                    }
                }
                (bad.is_empty(), if bad.is_empty() { format!("total rank {}", c.total_rank()) } else { bad.join("; ") })
            }
            CheckKind::StemRanks { stem, ranks, every } => {
                let c = self.chart()?;
                let Some(top) = c.ceiling(*stem) else { return Ok(fail("stem outside the window")) };
                let got: Vec<usize> = (0..=top).map(|s| c.at(*stem, s).unwrap_or(0)).collect();
                let want: Vec<usize> = match (ranks, every) {
                    (Some(r), None) => (0..=top).map(|s| r.get(s).copied().unwrap_or(0)).collect(),
                    (None, Some(n)) => vec![*n; top + 1],
                    _ => {
                        return Err(IoError::Invalid {
                            path: "$.checks".into(),
                            message: "stem-ranks needs exactly one of `ranks` and `every`".into(),
                        })
                    }
                };
                (got == want, format!("stem {stem}, s = 0..={top}: {got:?}"))
            }
            CheckKind::Groups { stems, expected, s_bound } => {
                let c = self.chart()?;
                if stems.len() != expected.len() {
                    return Err(IoError::Invalid { path: "$.checks".into(), message: "stems and expected differ in length".into() });
                }
                let mut ok = true;
                let mut parts = Vec::new();
                for (stem, want) in stems.iter().zip(expected) {
                    match read_off_groups(&c, *stem, *s_bound) {
                        Ok(g) => {
                            ok &= g.to_string() == *want || g.to_ascii() == *want;
                            parts.push(g.to_string());
                        }
                        Err(e) => {
                            ok = false;
                            parts.push(format!("stem {stem}: {e}"));
                        }
                    }
                }
                (ok, parts.join(", "))
            }
            CheckKind::Collapse { max_stem, r_max, h0_pruning, expected } => {
                let c = self.chart()?;
                let found: Vec<_> =
                    collapse_check(&c, *r_max, *h0_pruning).into_iter().filter(|d| d.source.0 <= *max_stem).collect();
                let listed: Vec<String> =
                    found.iter().map(|d| format!("d{} {:?}→{:?}", d.r, d.source, d.target)).collect();
                (found.len() == *expected, format!("{} possible differentials {listed:?}", found.len()))
            }
            CheckKind::H0Injective { max_stem } => {
                let c = self.chart()?;
                let mut bad = Vec::new();
                for (&(s, t), _) in &c.ranks {
                    let stem = t - s as i32;
                    if stem <= *max_stem && !h0_injective(&c, stem, s) {
                        bad.push((stem, s));
                    }
                }
                (bad.is_empty(), if bad.is_empty() { "injective".into() } else { format!("not injective at {bad:?}") })
            }
            CheckKind::ExtGenerators { cells } => {
                let r = self.resolution()?;
                let gens = indecomposables(&r)?;
                let got: BTreeSet<(usize, i32)> = gens.keys().copied().collect();
                let want: BTreeSet<(usize, i32)> = cells.iter().copied().collect();
                (got == want, format!("{gens:?}"))
            }
            CheckKind::Product { left, right, zero } => {
                let r = self.resolution()?;
                let x = named_class(&r, left)?;
                let y = named_class(&r, right)?;
                let z = yoneda_product(&r, &r, &x, &y)?;
                (z.is_zero() == *zero, format!("{left}·{right} = {:?} at ({}, {})", z.coeffs, z.s, z.t))
            }
            CheckKind::Les { ses } => {
                let w = self.window()?;
                let ses = io::ses_from_json(ses, "$.checks.ses", false)?;
                let (im, qm) = (&ses.i, &ses.q);
                let exact = crate::module::check_ses(im, qm);
                if !exact.passed() {
                    return Ok(fail(format!("not a short exact sequence: {exact:?}")));
                }
                let ra = self.resolve(im.source.clone(), w)?;
                let rb = self.resolve(im.target.clone(), w)?;
                let rc = self.resolve(qm.target.clone(), w)?;
                let rep = les_rank_check(im, qm, &ra, &rb, &rc)?;
                let nonzero = rep.cells.iter().filter(|c| c.connecting_rank > 0).count();
                (rep.passed(), format!("{} cells, {nonzero} with a nonzero connecting map; {:?}", rep.cells.len(), rep.problems))
            }
            CheckKind::SwAction { cohomology, sw, algebra, op, source, expected } => {
                let (h, m) = sw_module(cohomology, sw, algebra)?;
                Self::expect_thom(&m, &h, op, source, expected)?
            }
            CheckKind::SwMatchesTwist { cohomology, sw, algebra, target, twist } => {
                let (h, m) = sw_module(cohomology, sw, algebra)?;
                let t = build_twisted_module(&h, *target, twist)?;
                if *t.algebra() != *m.algebra() {
                    return Ok(fail("the twist lives over a different algebra"));
                }
                if !m.validate().is_valid() || !t.validate().is_valid() {
                    return Ok(fail("a module fails validation"));
                }
                let alg = m.algebra();
                let mut bad = Vec::new();
                for slot in 0..alg.num_generators() {
                    for d in 0..=m.top_degree() {
                        if m.action(slot, d) != t.action(slot, d) {
                            bad.push(format!("{} in degree {d}", alg.generator_name(slot)));
                        }
                    }
                }
                (bad.is_empty(), if bad.is_empty() { "all generator actions agree".into() } else { bad.join(", ") })
            }
            CheckKind::TensorRanks { with, max_stem } => {
                let m = self.module()?;
                let w = io::module_from_json(with, "$.checks.with", false)?;
                let tm: ModuleRef = Arc::new(m.tensor_product(&w)?);
                let win = self.window()?;
                let t_max = tm.truncation().map_or(win.t_max, |t| t.min(win.t_max));
                let c = self.chart()?;
                let rt = self.resolve(tm, Window { s_max: win.s_max, t_max })?;
                let ct = ext_ranks(&rt);
                let mut bad = Vec::new();
                for s in 0..=win.s_max {
                    for t in m.min_degree()..=t_max {
                        if t - (s as i32) < *max_stem && c.rank(s, t) != ct.rank(s, t) {
                            bad.push((s, t));
                        }
                    }
                }
                (bad.is_empty(), format!("compared through t = {t_max}; differing cells {bad:?}"))
            }
        })
    }
}

fn sw_module(cohomology: &Value, sw: &SwClassData, algebra: &Value) -> Result<(CohomologyPresentation, GradedModule), IoError> {
    let h = io::cohomology_from_json(cohomology, "$.checks.cohomology", false)?;
    let alg: AlgebraRef = io::algebra_from_json(algebra, "$.checks.algebra", false)?;
    let m = thom_module_from_sw(&h, sw, alg)?;
    Ok((h, m))
}

/// Ranks of the indecomposables of `Ext(F_p)` per cell, from a resolution
/// of the ground field: everything in filtration 1, and from filtration 2
/// on the cokernel of the products of positive-filtration classes.
pub fn indecomposables(r: &FreeResolution) -> Result<BTreeMap<(usize, i32), usize>, ResolutionError> {
    let mut out = BTreeMap::new();
    let lo = r.min_degree();
    for s in 1..=r.s_max() {
        for t in lo..=r.t_max() {
            let n = r.rank(s, t);
            if n == 0 {
                continue;
            }
            let mut span = Subspace::new(r.prime(), n);
            for s1 in 1..s {
                for t1 in lo..=t {
                    for i in 0..r.rank(s1, t1) {
                        let x = ExtClass::basis(r, s1, t1, i);
                        for j in 0..r.rank(s - s1, t - t1) {
                            let y = ExtClass::basis(r, s - s1, t - t1, j);
                            span.insert(&yoneda_product(r, r, &x, &y)?.coeffs);
                        }
                    }
                }
            }
            if span.rank() < n {
                out.insert((s, t), n - span.rank());
            }
        }
    }
    Ok(out)
}

fn label(check: &Check) -> String {
    let tag = serde_json::to_value(&check.kind)
        .ok()
        .and_then(|v| v.get("check").and_then(Value::as_str).map(str::to_string))
        .unwrap_or_default();
    match &check.note {
        Some(n) => format!("{tag} ({n})"),
        None => tag,
    }
}

/// Run every check. Setup problems (unreadable modules, windows beyond the
/// truncation) are errors; failed expectations are reported as outcomes.
pub fn run_scenario(sc: &Scenario) -> Result<ScenarioReport, IoError> {
    let mut run = Runner { sc, module: None, cohomology: None, resolution: None, chart: None, audits: Vec::new() };
    let mut outcomes = Vec::new();
    for check in &sc.checks {
        let (ok, detail) = run.run_check(&check.kind)?;
        let passed = match (&check.kind, check.origin) {
            (CheckKind::ThomActionReport { .. }, _) => None,
            _ => Some(ok),
        };
        outcomes.push(CheckOutcome { label: label(check), origin: check.origin, passed, detail });
    }
    let mut groups = Vec::new();
    if !sc.read_off.is_empty() {
        let c = run.chart()?;
        for &stem in &sc.read_off {
            let g = read_off_groups(&c, stem, None).map_or_else(|e| format!("unavailable ({e})"), |g: StemGroup| g.to_string());
            groups.push((stem, g));
        }
    }
    for (name, cells, failures) in std::mem::take(&mut run.audits) {
        outcomes.push(CheckOutcome {
            label: format!("audit {name}"),
            origin: None,
            passed: Some(failures.is_empty()),
            detail: if failures.is_empty() { format!("{cells} cells: d∘d = 0, minimal, exact") } else { failures.join("; ") },
        });
    }
    Ok(ScenarioReport { name: sc.name.clone(), outcomes, groups, chart: run.chart.take() })
}
