//! Finite-type graded modules over a [`FiniteAlgebra`].
//!
//! A module is a graded vector space over a degree window together with a
//! matrix for every algebra generator in every degree. A truncated module
//! stands for the quotient by everything above its truncation degree, so
//! facts are only asserted where the relevant degrees stay in the window.

use std::sync::{Arc, OnceLock};

use thiserror::Error;

use crate::algebra::{AlgebraRef, Element, FiniteAlgebra};
use crate::fp::{add_scaled, is_zero, FpMatrix, Prime, RowReduction, Subspace};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModuleError {
    #[error("modules are over different algebras ({0} vs {1})")]
    AlgebraMismatch(String, String),
    #[error("unknown basis label `{0}`")]
    UnknownLabel(String),
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("action of {generator} on `{label}` lands in degree {expected}, but `{target}` has degree {got}")]
    DegreeMismatch { generator: String, label: String, target: String, expected: i32, got: i32 },
    #[error("action matrix for {generator} in degree {degree} has shape {got:?}, expected {expected:?}")]
    Shape { generator: String, degree: i32, expected: (usize, usize), got: (usize, usize) },
    #[error("duplicate basis label `{0}`")]
    DuplicateLabel(String),
    #[error(transparent)]
    Algebra(#[from] crate::algebra::AlgebraError),
    #[error("{0}")]
    Other(String),
}

pub type ModuleRef = Arc<GradedModule>;

#[derive(Debug)]
pub struct GradedModule {
    algebra: AlgebraRef,
    name: String,
    min_degree: i32,
    /// Labels per degree, starting at `min_degree`.
    labels: Vec<Vec<String>>,
    /// `None` for a module given in full.
    truncation: Option<i32>,
    /// `actions[slot][d - min_degree]`: degree d -> degree d + |g|.
    actions: Vec<Vec<FpMatrix>>,
    /// Matrices for every algebra basis element, built on first use.
    basis_actions: OnceLock<Vec<Vec<FpMatrix>>>,
}

impl Clone for GradedModule {
    fn clone(&self) -> Self {
        GradedModule {
            algebra: self.algebra.clone(),
            name: self.name.clone(),
            min_degree: self.min_degree,
            labels: self.labels.clone(),
            truncation: self.truncation,
            actions: self.actions.clone(),
            basis_actions: OnceLock::new(),
        }
    }
}

impl PartialEq for GradedModule {
    fn eq(&self, other: &Self) -> bool {
        *self.algebra == *other.algebra
            && self.name == other.name
            && self.truncation == other.truncation
            && self.labels_by_degree() == other.labels_by_degree()
            && (self.min_degree..=self.top_degree()).all(|d| {
                (0..self.algebra.num_generators()).all(|s| self.action(s, d) == other.action(s, d))
            })
    }
}

impl GradedModule {
    /// Assemble a module from labels per degree and generator matrices.
    /// Degrees above the top of the window are never stored.
    pub fn from_parts(
        algebra: AlgebraRef,
        name: impl Into<String>,
        min_degree: i32,
        labels: Vec<Vec<String>>,
        truncation: Option<i32>,
        actions: Vec<Vec<FpMatrix>>,
    ) -> Result<Self, ModuleError> {
        let mut m = GradedModule {
            algebra,
            name: name.into(),
            min_degree,
            labels,
            truncation,
            actions,
            basis_actions: OnceLock::new(),
        };
        if let Some(t) = truncation {
            let want = (t - min_degree + 1).max(0) as usize;
            if m.labels.len() > want {
                m.labels.truncate(want);
            }
            while m.labels.len() < want {
                m.labels.push(Vec::new());
            }
        } else {
            while m.labels.last().is_some_and(Vec::is_empty) {
                m.labels.pop();
            }
        }
        let n = m.labels.len();
        let prime = m.prime();
        if m.actions.len() != m.algebra.num_generators() {
            return Err(ModuleError::Other("one action list per generator required".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for l in m.labels.iter().flatten() {
            if !seen.insert(l.clone()) {
                return Err(ModuleError::DuplicateLabel(l.clone()));
            }
        }
        for slot in 0..m.actions.len() {
            m.actions[slot].truncate(n);
            let gd = m.algebra.generator_degree(slot);
            for i in 0..n {
                let d = min_degree + i as i32;
                let expected = (m.dim(d), m.dim(d + gd));
                if i >= m.actions[slot].len() {
                    m.actions[slot].push(FpMatrix::zeros(prime, expected.0, expected.1));
                    continue;
                }
                let a = &m.actions[slot][i];
                let got = (a.rows(), a.cols());
                if got != expected {
                    if !a.is_zero() {
                        let generator = m.algebra.generator_name(slot).to_string();
                        return Err(ModuleError::Shape { generator, degree: d, expected, got });
                    }
                    m.actions[slot][i] = FpMatrix::zeros(prime, expected.0, expected.1);
                }
            }
        }
        Ok(m)
    }

    /// The zero module.
    pub fn zero(algebra: AlgebraRef) -> Self {
        let g = algebra.num_generators();
        GradedModule::from_parts(algebra, "0", 0, vec![], None, vec![vec![]; g]).expect("zero module")
    }

    /// F_p concentrated in `degree`.
    pub fn ground(algebra: AlgebraRef, degree: i32) -> Self {
        let name = format!("F{}", algebra.prime());
        let g = algebra.num_generators();
        let label = if degree == 0 { "1".to_string() } else { format!("Σ^{degree}1") };
        GradedModule::from_parts(algebra, name, degree, vec![vec![label]], None, vec![vec![]; g]).expect("ground module")
    }

    /// The algebra as a free module on one generator in degree 0.
    pub fn free(algebra: AlgebraRef) -> Self {
        let mut labels = Vec::new();
        for d in 0..=algebra.top_degree() {
            labels.push(algebra.range(d).map(|i| algebra.label(i).to_string()).collect());
        }
        let actions = (0..algebra.num_generators())
            .map(|s| (0..=algebra.top_degree()).map(|d| algebra.left_mult_matrix(s, d)).collect())
            .collect();
        let name = algebra.name().to_string();
        GradedModule::from_parts(algebra.clone(), name, 0, labels, None, actions).expect("free module")
    }

    pub fn algebra(&self) -> &AlgebraRef {
        &self.algebra
    }
    pub fn prime(&self) -> Prime {
        self.algebra.prime()
    }
    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
    pub fn min_degree(&self) -> i32 {
        self.min_degree
    }
    /// Last degree in the window (`min_degree - 1` for the zero module).
    pub fn top_degree(&self) -> i32 {
        self.min_degree + self.labels.len() as i32 - 1
    }
    pub fn truncation(&self) -> Option<i32> {
        self.truncation
    }
    /// Highest degree in which the module is known exactly. Complete
    /// modules are known everywhere.
    pub fn trusted_through(&self) -> i32 {
        self.truncation.unwrap_or(i32::MAX)
    }

    pub fn dim(&self, d: i32) -> usize {
        if d < self.min_degree || d > self.top_degree() {
            0
        } else {
            self.labels[(d - self.min_degree) as usize].len()
        }
    }

    pub fn total_dim(&self) -> usize {
        self.labels.iter().map(Vec::len).sum()
    }

    /// `(degree, dim)` for each degree of the window.
    pub fn dims(&self) -> Vec<(i32, usize)> {
        (self.min_degree..=self.top_degree()).map(|d| (d, self.dim(d))).collect()
    }

    /// Degrees where the module is nonzero.
    pub fn support(&self) -> Vec<i32> {
        self.dims().into_iter().filter(|&(_, n)| n > 0).map(|(d, _)| d).collect()
    }

    pub fn labels(&self, d: i32) -> &[String] {
        if d < self.min_degree || d > self.top_degree() {
            &[]
        } else {
            &self.labels[(d - self.min_degree) as usize]
        }
    }

    pub fn labels_by_degree(&self) -> Vec<(i32, Vec<String>)> {
        (self.min_degree..=self.top_degree()).map(|d| (d, self.labels(d).to_vec())).collect()
    }

    /// `(degree, index)` of a label.
    pub fn find(&self, label: &str) -> Option<(i32, usize)> {
        for d in self.min_degree..=self.top_degree() {
            if let Some(i) = self.labels(d).iter().position(|l| l == label) {
                return Some((d, i));
            }
        }
        None
    }

    /// Matrix of generator `slot` from degree `d`.
    pub fn action(&self, slot: usize, d: i32) -> FpMatrix {
        let gd = self.algebra.generator_degree(slot);
        if d < self.min_degree || d > self.top_degree() {
            return FpMatrix::zeros(self.prime(), self.dim(d), self.dim(d + gd));
        }
        self.actions[slot][(d - self.min_degree) as usize].clone()
    }

    fn action_ref(&self, slot: usize, d: i32) -> Option<&FpMatrix> {
        if d < self.min_degree || d > self.top_degree() {
            None
        } else {
            Some(&self.actions[slot][(d - self.min_degree) as usize])
        }
    }

    pub fn act_generator(&self, slot: usize, d: i32, v: &[u8]) -> Vec<u8> {
        match self.action_ref(slot, d) {
            Some(m) => m.apply(v),
            None => vec![0; self.dim(d + self.algebra.generator_degree(slot))],
        }
    }

    fn build_basis_actions(&self) -> Vec<Vec<FpMatrix>> {
        let alg = &self.algebra;
        let p = self.prime();
        let nd = self.labels.len();
        let mut out: Vec<Vec<FpMatrix>> = Vec::with_capacity(alg.total_dim());
        for e in 0..alg.total_dim() {
            let de = alg.degree_of(e);
            let mut per = Vec::with_capacity(nd);
            for i in 0..nd {
                let d = self.min_degree + i as i32;
                if e == 0 {
                    per.push(FpMatrix::identity(p, self.dim(d)));
                    continue;
                }
                let mut acc = FpMatrix::zeros(p, self.dim(d), self.dim(d + de));
                for &(slot, rest, c) in alg.decomposition(e) {
                    let dr = alg.degree_of(rest);
                    let first = &out[rest][i];
                    let next = self.action(slot, d + dr);
                    acc = acc.add(&first.matmul(&next).scale(c));
                }
                per.push(acc);
            }
            out.push(per);
        }
        out
    }

    /// Matrix of the algebra basis element `e` from degree `d`.
    pub fn basis_action(&self, e: usize, d: i32) -> FpMatrix {
        let de = self.algebra.degree_of(e);
        if d < self.min_degree || d > self.top_degree() {
            return FpMatrix::zeros(self.prime(), self.dim(d), self.dim(d + de));
        }
        let all = self.basis_actions.get_or_init(|| self.build_basis_actions());
        all[e][(d - self.min_degree) as usize].clone()
    }

    /// Apply the algebra basis element `e` to a vector of degree `d`.
    pub fn apply_basis(&self, e: usize, d: i32, v: &[u8]) -> Vec<u8> {
        let de = self.algebra.degree_of(e);
        if d < self.min_degree || d > self.top_degree() || self.dim(d + de) == 0 {
            return vec![0u8; self.dim(d + de)];
        }
        let all = self.basis_actions.get_or_init(|| self.build_basis_actions());
        all[e][(d - self.min_degree) as usize].apply(v)
    }

    /// Apply a homogeneous algebra element to a vector of degree `d`.
    pub fn act(&self, x: &Element, d: i32, v: &[u8]) -> Vec<u8> {
        let p = self.prime();
        let mut out = vec![0u8; self.dim(d + x.degree)];
        if out.is_empty() || d < self.min_degree || d > self.top_degree() {
            return out;
        }
        let all = self.basis_actions.get_or_init(|| self.build_basis_actions());
        let off = self.algebra.offset(x.degree);
        for (k, &c) in x.coeffs.iter().enumerate() {
            if c != 0 {
                let w = all[off + k][(d - self.min_degree) as usize].apply(v);
                add_scaled(p, &mut out, &w, c);
            }
        }
        out
    }

    /// Action of the algebra element on a single basis label; returns
    /// `(target degree, coefficients)`.
    pub fn act_on_label(&self, x: &Element, label: &str) -> Result<(i32, Vec<u8>), ModuleError> {
        let (d, i) = self.find(label).ok_or_else(|| ModuleError::UnknownLabel(label.to_string()))?;
        let mut v = vec![0u8; self.dim(d)];
        v[i] = 1;
        Ok((d + x.degree, self.act(x, d, &v)))
    }

    /// Render a vector of degree `d` as a sum of labels.
    pub fn format_vector(&self, d: i32, v: &[u8]) -> String {
        let parts: Vec<String> = v
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(i, &c)| {
                let l = &self.labels(d)[i];
                if c == 1 {
                    l.clone()
                } else {
                    format!("{c}*{l}")
                }
            })
            .collect();
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }

    /// Parse `"U*b + U*beta^2"`-style sums of labels in one degree.
    pub fn parse_vector(&self, text: &str) -> Result<(i32, Vec<u8>), ModuleError> {
        let p = self.prime();
        let mut degree = None;
        let mut acc: Vec<u8> = Vec::new();
        for raw in text.split('+') {
            let t = raw.trim();
            if t == "0" {
                continue;
            }
            let (c, label) = match t.split_once('*') {
                Some((k, rest)) if k.trim().parse::<i64>().is_ok() => (p.reduce(k.trim().parse().unwrap()), rest.trim()),
                _ => (1, t),
            };
            let (d, i) = self.find(label).ok_or_else(|| ModuleError::UnknownLabel(label.to_string()))?;
            match degree {
                None => {
                    degree = Some(d);
                    acc = vec![0; self.dim(d)];
                }
                Some(d0) if d0 != d => return Err(ModuleError::Other(format!("`{text}` is not homogeneous"))),
                _ => {}
            }
            acc[i] = p.add(acc[i], c);
        }
        degree.map(|d| (d, acc)).ok_or_else(|| ModuleError::Other(format!("`{text}` names no basis element")))
    }

    /// Check that every linear relation among generator words acts as zero
    /// wherever source and target degrees are inside the window.
    pub fn validate(&self) -> ValidationReport {
        let alg = &self.algebra;
        let mut violations = Vec::new();
        let top = self.top_degree();
        let span = top - self.min_degree;
        let mut checked = 0usize;
        for k in 1..=span.min(alg.top_degree() + alg.max_generator_degree()) {
            let wk = alg.word_kernel(k);
            if wk.kernel.rows() == 0 {
                continue;
            }
            for d in self.min_degree..=top - k {
                if self.dim(d) == 0 || self.dim(d + k) == 0 {
                    continue;
                }
                let word_mats: Vec<FpMatrix> = wk.words.iter().map(|w| self.word_matrix(w, d)).collect();
                for r in 0..wk.kernel.rows() {
                    checked += 1;
                    let row = wk.kernel.row(r);
                    let mut total = FpMatrix::zeros(self.prime(), self.dim(d), self.dim(d + k));
                    for (j, &c) in row.iter().enumerate() {
                        if c != 0 {
                            total = total.add(&word_mats[j].scale(c));
                        }
                    }
                    if total.is_zero() {
                        continue;
                    }
                    let i = (0..total.rows()).find(|&i| !is_zero(&total.row(i))).unwrap();
                    let relation = describe_relation(alg, &wk.words, &row);
                    violations.push(Violation {
                        relation,
                        degree: d,
                        witness: self.labels(d)[i].clone(),
                        image: self.format_vector(d + k, &total.row(i)),
                    });
                }
            }
        }
        ValidationReport { module: self.name.clone(), relations_checked: checked, violations }
    }

    /// Matrix of a generator word acting from degree `d`.
    pub fn word_matrix(&self, word: &[usize], d: i32) -> FpMatrix {
        let mut acc = FpMatrix::identity(self.prime(), self.dim(d));
        let mut e = d;
        for &slot in word.iter().rev() {
            acc = acc.matmul(&self.action(slot, e));
            e += self.algebra.generator_degree(slot);
        }
        acc
    }

    pub fn suspend(&self, k: i32) -> GradedModule {
        let labels = self
            .labels
            .iter()
            .map(|ls| ls.iter().map(|l| suspend_label(l, k)).collect())
            .collect();
        let name = if k == 0 { self.name.clone() } else { format!("Σ^{k}{}", self.name) };
        GradedModule {
            algebra: self.algebra.clone(),
            name,
            min_degree: self.min_degree + k,
            labels,
            truncation: self.truncation.map(|t| t + k),
            actions: self.actions.clone(),
            basis_actions: OnceLock::new(),
        }
    }

    fn same_algebra(&self, other: &GradedModule) -> Result<(), ModuleError> {
        if *self.algebra != *other.algebra {
            return Err(ModuleError::AlgebraMismatch(self.algebra.name().into(), other.algebra.name().into()));
        }
        Ok(())
    }

    pub fn direct_sum(&self, other: &GradedModule) -> Result<GradedModule, ModuleError> {
        self.same_algebra(other)?;
        if other.total_dim() == 0 && other.truncation.is_none() {
            return Ok(self.clone());
        }
        if self.total_dim() == 0 && self.truncation.is_none() {
            return Ok(other.clone());
        }
        let truncation = match (self.truncation, other.truncation) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        let lo = self.min_degree.min(other.min_degree);
        let hi = truncation.unwrap_or(self.top_degree().max(other.top_degree()));
        let labels: Vec<Vec<String>> = (lo..=hi)
            .map(|d| {
                let mut v: Vec<String> = self.labels(d).iter().map(|l| format!("a.{l}")).collect();
                v.extend(other.labels(d).iter().map(|l| format!("b.{l}")));
                v
            })
            .collect();
        let p = self.prime();
        let actions = (0..self.algebra.num_generators())
            .map(|s| {
                let gd = self.algebra.generator_degree(s);
                (lo..=hi)
                    .map(|d| {
                        let (a, b) = (self.action(s, d), other.action(s, d));
                        let mut m = FpMatrix::zeros(p, self.dim(d) + other.dim(d), self.dim(d + gd) + other.dim(d + gd));
                        for i in 0..a.rows() {
                            for j in 0..a.cols() {
                                m.set(i, j, a.get(i, j));
                            }
                        }
                        for i in 0..b.rows() {
                            for j in 0..b.cols() {
                                m.set(a.rows() + i, a.cols() + j, b.get(i, j));
                            }
                        }
                        if hi < d + gd {
                            FpMatrix::zeros(p, m.rows(), 0)
                        } else {
                            m
                        }
                    })
                    .collect()
            })
            .collect();
        let name = format!("{} ⊕ {}", self.name, other.name);
        GradedModule::from_parts(self.algebra.clone(), name, lo, labels, truncation, actions)
    }

    /// Tensor product with the action through generator coproducts and the
    /// Koszul sign `(a ⊗ b)(x ⊗ y) = (-1)^{|b||x|} ax ⊗ by`.
    pub fn tensor_product(&self, other: &GradedModule) -> Result<GradedModule, ModuleError> {
        self.same_algebra(other)?;
        let alg = self.algebra.clone();
        let p = self.prime();
        if self.total_dim() == 0 || other.total_dim() == 0 {
            let g = alg.num_generators();
            return GradedModule::from_parts(alg, "0", 0, vec![], None, vec![vec![]; g]);
        }
        let truncation = match (self.truncation, other.truncation) {
            (None, None) => None,
            (a, b) => {
                let x = a.map(|t| t + other.min_degree);
                let y = b.map(|t| t + self.min_degree);
                Some(x.unwrap_or(i32::MAX).min(y.unwrap_or(i32::MAX)))
            }
        };
        let lo = self.min_degree + other.min_degree;
        let hi = truncation.unwrap_or(self.top_degree() + other.top_degree());
        // index of (x degree, x idx, y idx) inside its total degree
        let layout = |d: i32| -> Vec<(i32, usize, usize)> {
            let mut v = Vec::new();
            for i in self.min_degree..=self.top_degree() {
                let j = d - i;
                for a in 0..self.dim(i) {
                    for b in 0..other.dim(j) {
                        v.push((i, a, b));
                    }
                }
            }
            v
        };
        let layouts: Vec<Vec<(i32, usize, usize)>> = (lo..=hi).map(layout).collect();
        let labels = layouts
            .iter()
            .enumerate()
            .map(|(k, lay)| {
                let d = lo + k as i32;
                lay.iter()
                    .map(|&(i, a, b)| format!("{}⊗{}", self.labels(i)[a], other.labels(d - i)[b]))
                    .collect()
            })
            .collect();
        let position = |d: i32, i: i32, a: usize, b: usize| -> Option<usize> {
            if d < lo || d > hi {
                return None;
            }
            layouts[(d - lo) as usize].iter().position(|&t| t == (i, a, b))
        };
        let mut actions = Vec::new();
        for slot in 0..alg.num_generators() {
            let gd = alg.generator_degree(slot);
            let mut per = Vec::new();
            for d in lo..=hi {
                let target_dim = if d + gd <= hi { layouts.get((d + gd - lo) as usize).map_or(0, Vec::len) } else { 0 };
                let mut m = FpMatrix::zeros(p, layouts[(d - lo) as usize].len(), target_dim);
                if target_dim > 0 {
                    for (row, &(i, a, b)) in layouts[(d - lo) as usize].iter().enumerate() {
                        let j = d - i;
                        for &(l, r, c) in alg.coproduct(slot) {
                            let (dl, dr) = (alg.degree_of(l), alg.degree_of(r));
                            let sign = p.sign((dr as i64) * (i as i64));
                            let coef = p.mul(c, sign);
                            let xa = self.basis_action(l, i).row(a);
                            let yb = other.basis_action(r, j).row(b);
                            for (a2, &ca) in xa.iter().enumerate() {
                                if ca == 0 {
                                    continue;
                                }
                                for (b2, &cb) in yb.iter().enumerate() {
                                    if cb == 0 {
                                        continue;
                                    }
                                    let col = position(d + gd, i + dl, a2, b2).expect("tensor basis");
                                    let v = p.mul(coef, p.mul(ca, cb));
                                    m.set(row, col, p.add(m.get(row, col), v));
                                }
                            }
                        }
                    }
                }
                per.push(m);
            }
            actions.push(per);
        }
        let name = format!("{} ⊗ {}", self.name, other.name);
        GradedModule::from_parts(alg, name, lo, labels, truncation, actions)
    }

    /// Same module, cut off at degree `t`.
    pub fn truncate(&self, t: i32) -> GradedModule {
        let t = self.truncation.map_or(t, |old| old.min(t));
        let mut actions = self.actions.clone();
        for (slot, per) in actions.iter_mut().enumerate() {
            let gd = self.algebra.generator_degree(slot);
            for (i, m) in per.iter_mut().enumerate() {
                let d = self.min_degree + i as i32;
                if d + gd > t {
                    *m = FpMatrix::zeros(self.prime(), m.rows(), 0);
                }
            }
        }
        GradedModule::from_parts(self.algebra.clone(), self.name.clone(), self.min_degree, self.labels.clone(), Some(t), actions)
            .expect("truncation")
    }
}

fn suspend_label(l: &str, k: i32) -> String {
    if k == 0 {
        l.to_string()
    } else {
        format!("Σ^{k}{l}")
    }
}

fn describe_relation(alg: &FiniteAlgebra, words: &[Vec<usize>], row: &[u8]) -> String {
    let parts: Vec<String> = row
        .iter()
        .enumerate()
        .filter(|(_, &c)| c != 0)
        .map(|(j, &c)| {
            let w = alg.word_label(&words[j]);
            if c == 1 {
                w
            } else {
                format!("{c}*{w}")
            }
        })
        .collect();
    parts.join(" + ")
}

/// One relation that fails to act as zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    /// The relation as a sum of generator words, e.g. `Sq1*Sq1`.
    pub relation: String,
    pub degree: i32,
    /// A basis element on which the relation acts nontrivially.
    pub witness: String,
    pub image: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    pub module: String,
    pub relations_checked: usize,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Build a module by naming basis elements and listing generator actions.
pub struct ModuleBuilder {
    algebra: AlgebraRef,
    name: String,
    basis: Vec<(String, i32)>,
    actions: Vec<(String, String, Vec<(String, i64)>)>,
    truncation: Option<i32>,
}

impl ModuleBuilder {
    pub fn new(algebra: AlgebraRef, name: impl Into<String>) -> Self {
        ModuleBuilder { algebra, name: name.into(), basis: vec![], actions: vec![], truncation: None }
    }

    pub fn basis(mut self, label: &str, degree: i32) -> Self {
        self.basis.push((label.to_string(), degree));
        self
    }

    /// `generator · source = Σ c · target`.
    pub fn action(mut self, generator: &str, source: &str, targets: &[(&str, i64)]) -> Self {
        self.actions.push((
            generator.to_string(),
            source.to_string(),
            targets.iter().map(|(t, c)| (t.to_string(), *c)).collect(),
        ));
        self
    }

    pub fn truncation(mut self, t: Option<i32>) -> Self {
        self.truncation = t;
        self
    }

    pub fn build(self) -> Result<GradedModule, ModuleError> {
        let alg = self.algebra;
        let p = alg.prime();
        let lo = self.basis.iter().map(|b| b.1).min().unwrap_or(0);
        let hi = self.truncation.unwrap_or(self.basis.iter().map(|b| b.1).max().unwrap_or(lo - 1));
        let mut labels: Vec<Vec<String>> = vec![Vec::new(); (hi - lo + 1).max(0) as usize];
        let mut pos = std::collections::HashMap::new();
        for (l, d) in &self.basis {
            if *d > hi {
                continue;
            }
            let slot = &mut labels[(d - lo) as usize];
            pos.insert(l.clone(), (*d, slot.len()));
            slot.push(l.clone());
        }
        let dim = |d: i32| if d < lo || d > hi { 0 } else { labels[(d - lo) as usize].len() };
        let mut actions: Vec<Vec<FpMatrix>> = (0..alg.num_generators())
            .map(|s| {
                let gd = alg.generator_degree(s);
                (lo..=hi).map(|d| FpMatrix::zeros(p, dim(d), dim(d + gd))).collect()
            })
            .collect();
        for (g, src, targets) in &self.actions {
            let slot = alg.generator_slot(g).ok_or_else(|| ModuleError::UnknownGenerator(g.clone()))?;
            let gd = alg.generator_degree(slot);
            let Some(&(d, i)) = pos.get(src) else {
                if self.basis.iter().any(|b| &b.0 == src) {
                    continue;
                }
                return Err(ModuleError::UnknownLabel(src.clone()));
            };
            for (t, c) in targets {
                let Some(&(dt, j)) = pos.get(t) else {
                    if self.basis.iter().any(|b| &b.0 == t) {
                        continue;
                    }
                    return Err(ModuleError::UnknownLabel(t.clone()));
                };
                if dt != d + gd {
                    return Err(ModuleError::DegreeMismatch {
                        generator: g.clone(),
                        label: src.clone(),
                        target: t.clone(),
                        expected: d + gd,
                        got: dt,
                    });
                }
                let m = &mut actions[slot][(d - lo) as usize];
                m.set(i, j, p.add(m.get(i, j), p.reduce(*c)));
            }
        }
        GradedModule::from_parts(alg, self.name, lo, labels, self.truncation, actions)
    }
}

/// `A / A·{annihilators}` as a left module on one generator in degree 0,
/// optionally cut off at `d_max`.
pub fn cyclic_module(
    algebra: &AlgebraRef,
    annihilators: &[Element],
    d_max: Option<i32>,
) -> Result<GradedModule, ModuleError> {
    let alg = algebra;
    let p = alg.prime();
    let top = alg.top_degree();
    let hi = d_max.map_or(top, |d| d.min(top));
    let truncation = d_max.filter(|&d| d < top);
    let mut ideals: Vec<Subspace> = Vec::new();
    for d in 0..=hi {
        let mut s = Subspace::new(p, alg.dim(d));
        for a in annihilators.iter().filter(|a| a.degree == d) {
            s.insert(&a.coeffs);
        }
        for slot in 0..alg.num_generators() {
            let e = d - alg.generator_degree(slot);
            if e < 0 {
                continue;
            }
            let lm = alg.left_mult_matrix(slot, e);
            for row in ideals[e as usize].basis() {
                s.insert(&lm.apply(row));
            }
        }
        ideals.push(s);
    }
    let survivors: Vec<Vec<usize>> = ideals
        .iter()
        .enumerate()
        .map(|(d, s)| {
            let mut pivot = vec![false; alg.dim(d as i32)];
            for r in s.basis() {
                pivot[r.iter().position(|&x| x != 0).unwrap()] = true;
            }
            (0..pivot.len()).filter(|&k| !pivot[k]).collect()
        })
        .collect();
    let labels: Vec<Vec<String>> = survivors
        .iter()
        .enumerate()
        .map(|(d, s)| s.iter().map(|&k| alg.label(alg.offset(d as i32) + k).to_string()).collect())
        .collect();
    let actions = (0..alg.num_generators())
        .map(|slot| {
            let gd = alg.generator_degree(slot);
            (0..=hi)
                .map(|d| {
                    let e = d + gd;
                    let tdim = if e <= hi { survivors[e as usize].len() } else { 0 };
                    let mut m = FpMatrix::zeros(p, survivors[d as usize].len(), tdim);
                    if tdim == 0 {
                        return m;
                    }
                    let lm = alg.left_mult_matrix(slot, d);
                    for (row, &k) in survivors[d as usize].iter().enumerate() {
                        let mut v = lm.row(k);
                        ideals[e as usize].reduce(&mut v);
                        for (col, &t) in survivors[e as usize].iter().enumerate() {
                            m.set(row, col, v[t]);
                        }
                    }
                    m
                })
                .collect()
        })
        .collect();
    let names: Vec<String> = annihilators.iter().map(|a| alg.element_label(a)).collect();
    let name = format!("{}/({})", alg.name(), names.join(", "));
    GradedModule::from_parts(alg.clone(), name, 0, labels, truncation, actions)
}

/// A degree-preserving (up to `shift`) linear map between modules.
#[derive(Clone, Debug)]
pub struct ModuleMap {
    pub source: ModuleRef,
    pub target: ModuleRef,
    pub shift: i32,
    /// Source degree `d` to target degree `d + shift`, indexed from the
    /// source's minimum degree.
    matrices: Vec<FpMatrix>,
}

impl ModuleMap {
    pub fn new(source: ModuleRef, target: ModuleRef, shift: i32, matrices: Vec<FpMatrix>) -> Result<Self, ModuleError> {
        source.same_algebra(&target)?;
        let mut map = ModuleMap { source, target, shift, matrices };
        let n = (map.source.top_degree() - map.source.min_degree() + 1).max(0) as usize;
        map.matrices.truncate(n);
        for i in 0..n {
            let d = map.source.min_degree() + i as i32;
            let shape = (map.source.dim(d), map.target.dim(d + shift));
            if i >= map.matrices.len() {
                map.matrices.push(FpMatrix::zeros(map.source.prime(), shape.0, shape.1));
            } else if (map.matrices[i].rows(), map.matrices[i].cols()) != shape {
                return Err(ModuleError::Other(format!("map matrix in degree {d} has the wrong shape")));
            }
        }
        Ok(map)
    }

    pub fn zero(source: ModuleRef, target: ModuleRef) -> Self {
        ModuleMap::new(source, target, 0, vec![]).expect("zero map")
    }

    pub fn identity(m: ModuleRef) -> Self {
        let mats = (m.min_degree()..=m.top_degree()).map(|d| FpMatrix::identity(m.prime(), m.dim(d))).collect();
        ModuleMap::new(m.clone(), m, 0, mats).expect("identity")
    }

    /// Build from `source label -> Σ c · target label` assignments; labels
    /// not mentioned map to zero.
    pub fn from_labels(source: ModuleRef, target: ModuleRef, assignments: &[(&str, &[(&str, i64)])]) -> Result<Self, ModuleError> {
        let p = source.prime();
        let mut shift = None;
        let mut mats: Vec<FpMatrix> = (source.min_degree()..=source.top_degree()).map(|_| FpMatrix::zeros(p, 0, 0)).collect();
        let mut entries = Vec::new();
        for (s, ts) in assignments {
            let (d, i) = source.find(s).ok_or_else(|| ModuleError::UnknownLabel(s.to_string()))?;
            for (t, c) in ts.iter() {
                let (dt, j) = target.find(t).ok_or_else(|| ModuleError::UnknownLabel(t.to_string()))?;
                match shift {
                    None => shift = Some(dt - d),
                    Some(k) if k != dt - d => return Err(ModuleError::Other("assignments use inconsistent shifts".into())),
                    _ => {}
                }
                entries.push((d, i, j, p.reduce(*c)));
            }
        }
        let shift = shift.unwrap_or(0);
        for (k, m) in mats.iter_mut().enumerate() {
            let d = source.min_degree() + k as i32;
            *m = FpMatrix::zeros(p, source.dim(d), target.dim(d + shift));
        }
        for (d, i, j, c) in entries {
            let m = &mut mats[(d - source.min_degree()) as usize];
            m.set(i, j, p.add(m.get(i, j), c));
        }
        ModuleMap::new(source, target, shift, mats)
    }

    pub fn matrix(&self, d: i32) -> FpMatrix {
        if d < self.source.min_degree() || d > self.source.top_degree() {
            FpMatrix::zeros(self.source.prime(), self.source.dim(d), self.target.dim(d + self.shift))
        } else {
            self.matrices[(d - self.source.min_degree()) as usize].clone()
        }
    }

    pub fn apply(&self, d: i32, v: &[u8]) -> Vec<u8> {
        self.matrix(d).apply(v)
    }

    /// Degrees and generators where `f(g x) ≠ g f(x)`, restricted to where
    /// both sides are inside both windows.
    pub fn commutation_failures(&self) -> Vec<String> {
        let alg = self.source.algebra();
        let mut out = Vec::new();
        let top = self.source.top_degree().min(self.target.top_degree() - self.shift);
        for slot in 0..alg.num_generators() {
            let gd = alg.generator_degree(slot);
            for d in self.source.min_degree()..=top - gd {
                let lhs = self.source.action(slot, d).matmul(&self.matrix(d + gd));
                let rhs = self.matrix(d).matmul(&self.target.action(slot, d + self.shift));
                if lhs != rhs {
                    out.push(format!("{} in degree {d}", alg.generator_name(slot)));
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SesDegree {
    pub degree: i32,
    pub injective: bool,
    pub surjective: bool,
    pub exact: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SesReport {
    pub degrees: Vec<SesDegree>,
    pub commutation_failures: Vec<String>,
}

impl SesReport {
    pub fn passed(&self) -> bool {
        self.commutation_failures.is_empty() && self.degrees.iter().all(|d| d.injective && d.surjective && d.exact)
    }
}

/// Check that `0 -> A -i-> B -q-> C -> 0` is a short exact sequence of
/// modules in every degree of the common window.
pub fn check_ses(i: &ModuleMap, q: &ModuleMap) -> SesReport {
    let mid = &i.target;
    let mut degrees = Vec::new();
    let mut failures: Vec<String> = i.commutation_failures().into_iter().map(|f| format!("i: {f}")).collect();
    failures.extend(q.commutation_failures().into_iter().map(|f| format!("q: {f}")));
    if !Arc::ptr_eq(&i.target, &q.source) && *i.target != *q.source {
        failures.push("target of i differs from source of q".into());
    }
    let lo = mid.min_degree().min(i.source.min_degree() + i.shift);
    let hi = mid.top_degree();
    for d in lo..=hi {
        let a_deg = d - i.shift;
        let fi = i.matrix(a_deg);
        let fq = q.matrix(d);
        let ri = fi.rank();
        let rq = fq.rank();
        let injective = ri == i.source.dim(a_deg);
        let surjective = rq == q.target.dim(d + q.shift);
        let composite_zero = fi.matmul(&fq).is_zero() || fq.cols() == 0;
        let kernel_q = RowReduction::new(&fq).kernel().rows();
        let exact = composite_zero && kernel_q == ri;
        degrees.push(SesDegree { degree: d, injective, surjective, exact });
    }
    SesReport { degrees, commutation_failures: failures }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{a1, e1};

    #[test]
    fn ground_is_valid() {
        let f = GradedModule::ground(a1(), 0);
        assert!(f.validate().is_valid());
    }

    #[test]
    fn corrupted_fixture_fails() {
        let m = ModuleBuilder::new(a1(), "bad")
            .basis("m0", 0)
            .basis("m1", 1)
            .basis("m2", 2)
            .action("Sq1", "m0", &[("m1", 1)])
            .action("Sq1", "m1", &[("m2", 1)])
            .build()
            .unwrap();
        let rep = m.validate();
        assert!(!rep.is_valid());
        assert!(rep.violations.iter().any(|v| v.relation == "Sq1*Sq1" && v.witness == "m0"));
    }

    #[test]
    fn cyclic_examples() {
        let a = a1();
        let all: Vec<Element> = ["Sq1", "Sq2"].iter().map(|g| a.parse_element(g).unwrap()).collect();
        let f = cyclic_module(&a, &all, None).unwrap();
        assert_eq!(f.support(), vec![0]);
        assert_eq!(f.total_dim(), 1);
        let m0 = cyclic_module(&a, &all[..1], None).unwrap();
        assert_eq!(m0.support(), vec![0, 2, 3, 5]);
        assert!(m0.validate().is_valid());
    }

    #[test]
    fn suspension_roundtrip() {
        let m = GradedModule::free(e1());
        assert_eq!(m.suspend(0), m);
        let back = m.suspend(3).suspend(-3);
        assert_eq!(back.dims(), m.dims());
        assert_eq!(GradedModule::ground(a1(), 0).suspend(4).support(), vec![4]);
    }

    #[test]
    fn ses_identity_zero() {
        let a = Arc::new(GradedModule::free(a1()));
        let z = Arc::new(GradedModule::zero(a1()));
        let i = ModuleMap::zero(z.clone(), a.clone());
        let q = ModuleMap::identity(a.clone());
        assert!(check_ses(&i, &q).passed());
        let i2 = ModuleMap::identity(a.clone());
        let q2 = ModuleMap::zero(a, z);
        assert!(check_ses(&i2, &q2).passed());
    }
}
