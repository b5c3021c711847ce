//! Finite graded algebras over F_p with explicit bases and structure
//! constants.
//!
//! Every algebra in the crate, whether it comes from a Milnor profile or a
//! presentation, ends up as a [`FiniteAlgebra`]: a basis sorted by degree,
//! a full multiplication table, distinguished generators and the
//! coproducts of those generators.

pub mod milnor;
pub mod presented;

use std::collections::HashMap;
use std::sync::Arc;

use thiserror::Error;

use crate::fp::{add_scaled, FpMatrix, Prime, RowReduction};

pub use milnor::{build_milnor_subalgebra, MilnorProfile};
pub use presented::{build_presented_algebra, AlgebraPresentation};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("invalid Milnor profile {0:?}")]
    BadProfile(Vec<u32>),
    #[error("product {left} * {right} leaves the profile ({result})")]
    NotClosed { left: String, right: String, result: String },
    #[error("relation {0} is not homogeneous")]
    Inhomogeneous(usize),
    #[error("unknown generator or basis element `{0}`")]
    UnknownSymbol(String),
    #[error("cannot parse element `{text}`: {reason}")]
    Parse { text: String, reason: String },
    #[error("generators do not span degree {0}")]
    NotGenerated(i32),
    #[error("malformed structure table: {0}")]
    Malformed(String),
    #[error("degree mismatch: {0}")]
    Degree(String),
}

/// A homogeneous element, stored as coefficients over the basis of its degree.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Element {
    pub degree: i32,
    pub coeffs: Vec<u8>,
}

impl Element {
    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }
}

/// Result of [`FiniteAlgebra::multiply`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Product {
    pub element: Element,
    /// Set when the product degree lies beyond the computed range of a
    /// truncated algebra, in which case `element` is zero.
    pub overflow: bool,
}

/// Plain data needed to assemble a [`FiniteAlgebra`].
#[derive(Clone, Debug)]
pub struct RawAlgebra {
    pub name: String,
    pub prime: Prime,
    /// `(label, degree)`, sorted by degree, unit first.
    pub basis: Vec<(String, i32)>,
    pub generators: Vec<usize>,
    pub generator_names: Vec<String>,
    /// `products[i * n + j]` = `e_i e_j` as `(k, c)` pairs.
    pub products: Vec<Vec<(usize, u8)>>,
    /// For each generator, `(left, right, c)` terms of its coproduct.
    pub coproducts: Vec<Vec<(usize, usize, u8)>>,
    pub truncated: bool,
}

#[derive(Clone, Debug)]
pub struct FiniteAlgebra {
    raw: RawAlgebra,
    /// `offsets[d]..offsets[d + 1]` are the basis indices of degree `d`.
    offsets: Vec<usize>,
    top_degree: i32,
    /// For each basis element of positive degree, `e = Σ c · g · e'` as
    /// `(generator slot, e', c)`.
    decompositions: Vec<Vec<(usize, usize, u8)>>,
    by_name: HashMap<String, usize>,
}

pub type AlgebraRef = Arc<FiniteAlgebra>;

impl PartialEq for FiniteAlgebra {
    fn eq(&self, other: &Self) -> bool {
        self.raw.name == other.raw.name
            && self.raw.prime == other.raw.prime
            && self.raw.basis == other.raw.basis
            && self.raw.generators == other.raw.generators
            && self.raw.generator_names == other.raw.generator_names
            && self.raw.products == other.raw.products
            && self.raw.coproducts == other.raw.coproducts
            && self.raw.truncated == other.raw.truncated
    }
}

impl Eq for FiniteAlgebra {}

impl FiniteAlgebra {
    pub fn from_raw(raw: RawAlgebra) -> Result<Self, AlgebraError> {
        let n = raw.basis.len();
        if n == 0 || raw.basis[0].1 != 0 {
            return Err(AlgebraError::Malformed("basis must start with the unit in degree 0".into()));
        }
        if raw.basis.windows(2).any(|w| w[0].1 > w[1].1) || raw.basis.iter().any(|b| b.1 < 0) {
            return Err(AlgebraError::Malformed("basis not sorted by nonnegative degree".into()));
        }
        if raw.basis.iter().filter(|b| b.1 == 0).count() != 1 {
            return Err(AlgebraError::Malformed("degree 0 must be one-dimensional".into()));
        }
        if raw.products.len() != n * n {
            return Err(AlgebraError::Malformed(format!("expected {} products, got {}", n * n, raw.products.len())));
        }
        if raw.generators.len() != raw.generator_names.len() || raw.generators.len() != raw.coproducts.len() {
            return Err(AlgebraError::Malformed("generator lists have different lengths".into()));
        }
        let top_degree = raw.basis.last().unwrap().1;
        let mut offsets = vec![0usize; top_degree as usize + 2];
        for (_, d) in &raw.basis {
            offsets[*d as usize + 1] += 1;
        }
        for d in 0..=top_degree as usize {
            offsets[d + 1] += offsets[d];
        }
        for (idx, terms) in raw.products.iter().enumerate() {
            let (i, j) = (idx / n, idx % n);
            let d = raw.basis[i].1 + raw.basis[j].1;
            for &(k, c) in terms {
                if k >= n || raw.basis[k].1 != d || c == 0 || c as u32 >= raw.prime.value() {
                    return Err(AlgebraError::Malformed(format!("bad product entry for ({i}, {j})")));
                }
            }
        }
        for &g in &raw.generators {
            if g == 0 || g >= n {
                return Err(AlgebraError::Malformed(format!("bad generator index {g}")));
            }
        }
        let mut by_name = HashMap::new();
        for (i, (label, _)) in raw.basis.iter().enumerate() {
            by_name.insert(label.clone(), i);
        }
        for (slot, name) in raw.generator_names.iter().enumerate() {
            by_name.insert(name.clone(), raw.generators[slot]);
        }
        let mut alg = FiniteAlgebra { raw, offsets, top_degree, decompositions: vec![], by_name };
        alg.decompositions = alg.compute_decompositions()?;
        Ok(alg)
    }

    fn compute_decompositions(&self) -> Result<Vec<Vec<(usize, usize, u8)>>, AlgebraError> {
        let n = self.raw.basis.len();
        let mut out = vec![Vec::new(); n];
        for d in 1..=self.top_degree {
            let mut pairs = Vec::new();
            let mut rows = Vec::new();
            for (slot, &g) in self.raw.generators.iter().enumerate() {
                let gd = self.degree_of(g);
                if gd > d {
                    continue;
                }
                for e in self.range(d - gd) {
                    let mut v = vec![0u8; self.dim(d)];
                    for &(k, c) in self.mul_basis(g, e) {
                        v[k - self.offsets[d as usize]] = c;
                    }
                    pairs.push((slot, e));
                    rows.push(v);
                }
            }
            let m = FpMatrix::from_rows(self.raw.prime, self.dim(d), &rows).expect("reduced entries");
            let rr = RowReduction::new(&m);
            for local in 0..self.dim(d) {
                let mut target = vec![0u8; self.dim(d)];
                target[local] = 1;
                let x = rr.preimage(&target).ok_or(AlgebraError::NotGenerated(d))?;
                out[self.offsets[d as usize] + local] = x
                    .iter()
                    .enumerate()
                    .filter(|(_, &c)| c != 0)
                    .map(|(i, &c)| (pairs[i].0, pairs[i].1, c))
                    .collect();
            }
        }
        Ok(out)
    }

    pub fn raw(&self) -> &RawAlgebra {
        &self.raw
    }
    pub fn name(&self) -> &str {
        &self.raw.name
    }
    pub fn prime(&self) -> Prime {
        self.raw.prime
    }
    pub fn top_degree(&self) -> i32 {
        self.top_degree
    }
    /// True when the basis was cut off at a maximum degree rather than
    /// found to vanish.
    pub fn is_truncated(&self) -> bool {
        self.raw.truncated
    }
    pub fn total_dim(&self) -> usize {
        self.raw.basis.len()
    }

    pub fn dim(&self, d: i32) -> usize {
        if d < 0 || d > self.top_degree {
            0
        } else {
            self.offsets[d as usize + 1] - self.offsets[d as usize]
        }
    }

    pub fn dims(&self) -> Vec<usize> {
        (0..=self.top_degree).map(|d| self.dim(d)).collect()
    }

    /// Global basis indices of degree `d`.
    pub fn range(&self, d: i32) -> std::ops::Range<usize> {
        if d < 0 || d > self.top_degree {
            0..0
        } else {
            self.offsets[d as usize]..self.offsets[d as usize + 1]
        }
    }

    pub fn offset(&self, d: i32) -> usize {
        self.offsets[d as usize]
    }

    pub fn degree_of(&self, idx: usize) -> i32 {
        self.raw.basis[idx].1
    }

    pub fn label(&self, idx: usize) -> &str {
        &self.raw.basis[idx].0
    }

    pub fn num_generators(&self) -> usize {
        self.raw.generators.len()
    }
    /// Basis index of generator slot `slot`.
    pub fn generator(&self, slot: usize) -> usize {
        self.raw.generators[slot]
    }
    pub fn generator_name(&self, slot: usize) -> &str {
        &self.raw.generator_names[slot]
    }
    pub fn generator_degree(&self, slot: usize) -> i32 {
        self.degree_of(self.raw.generators[slot])
    }
    pub fn generator_slot(&self, name: &str) -> Option<usize> {
        self.raw.generator_names.iter().position(|n| n == name).or_else(|| {
            let idx = *self.by_name.get(name)?;
            self.raw.generators.iter().position(|&g| g == idx)
        })
    }
    pub fn max_generator_degree(&self) -> i32 {
        (0..self.num_generators()).map(|s| self.generator_degree(s)).max().unwrap_or(0)
    }

    /// `(left, right, c)` terms of Δ(generator).
    pub fn coproduct(&self, slot: usize) -> &[(usize, usize, u8)] {
        &self.raw.coproducts[slot]
    }

    /// `e_i e_j` as global `(k, c)` pairs.
    #[inline]
    pub fn mul_basis(&self, i: usize, j: usize) -> &[(usize, u8)] {
        &self.raw.products[i * self.raw.basis.len() + j]
    }

    /// `e = Σ c · g · e'` for a basis element of positive degree.
    pub fn decomposition(&self, idx: usize) -> &[(usize, usize, u8)] {
        &self.decompositions[idx]
    }

    pub fn basis_element(&self, idx: usize) -> Element {
        let d = self.degree_of(idx);
        let mut coeffs = vec![0u8; self.dim(d)];
        coeffs[idx - self.offset(d)] = 1;
        Element { degree: d, coeffs }
    }

    pub fn unit(&self) -> Element {
        self.basis_element(0)
    }

    pub fn zero(&self, degree: i32) -> Element {
        Element { degree, coeffs: vec![0; self.dim(degree)] }
    }

    pub fn multiply(&self, x: &Element, y: &Element) -> Product {
        let d = x.degree + y.degree;
        if d > self.top_degree {
            let nonzero = !x.is_zero() && !y.is_zero();
            return Product { element: self.zero(d), overflow: nonzero && self.raw.truncated };
        }
        let p = self.raw.prime;
        let mut out = vec![0u8; self.dim(d)];
        let (ox, oy, od) = (self.offset(x.degree), self.offset(y.degree), self.offset(d));
        for (a, &ca) in x.coeffs.iter().enumerate() {
            if ca == 0 {
                continue;
            }
            for (b, &cb) in y.coeffs.iter().enumerate() {
                if cb == 0 {
                    continue;
                }
                let c = p.mul(ca, cb);
                for &(k, ck) in self.mul_basis(ox + a, oy + b) {
                    out[k - od] = p.add(out[k - od], p.mul(c, ck));
                }
            }
        }
        Product { element: Element { degree: d, coeffs: out }, overflow: false }
    }

    pub fn add(&self, x: &Element, y: &Element) -> Element {
        assert_eq!(x.degree, y.degree);
        let mut c = x.coeffs.clone();
        add_scaled(self.raw.prime, &mut c, &y.coeffs, 1);
        Element { degree: x.degree, coeffs: c }
    }

    /// Matrix of left multiplication by generator `slot`, from degree `d`
    /// to degree `d + |g|` (row-vector convention).
    pub fn left_mult_matrix(&self, slot: usize, d: i32) -> FpMatrix {
        let g = self.generator(slot);
        let e = d + self.degree_of(g);
        let mut m = FpMatrix::zeros(self.raw.prime, self.dim(d), self.dim(e));
        if self.dim(e) == 0 {
            return m;
        }
        let oe = self.offset(e);
        for (row, b) in self.range(d).enumerate() {
            for &(k, c) in self.mul_basis(g, b) {
                m.set(row, k - oe, c);
            }
        }
        m
    }

    /// All words in the generators of total degree `d`, as generator-slot
    /// sequences in lexicographic order.
    pub fn words(&self, d: i32) -> Vec<Vec<usize>> {
        let mut table: Vec<Vec<Vec<usize>>> = vec![vec![vec![]]];
        for e in 1..=d.max(0) {
            let mut here = Vec::new();
            for slot in 0..self.num_generators() {
                let gd = self.generator_degree(slot);
                if gd <= e {
                    for w in &table[(e - gd) as usize] {
                        let mut v = vec![slot];
                        v.extend_from_slice(w);
                        here.push(v);
                    }
                }
            }
            table.push(here);
        }
        if d < 0 {
            return vec![];
        }
        table.swap_remove(d as usize)
    }

    pub fn word_degree(&self, word: &[usize]) -> i32 {
        word.iter().map(|&s| self.generator_degree(s)).sum()
    }

    pub fn word_label(&self, word: &[usize]) -> String {
        if word.is_empty() {
            "1".into()
        } else {
            word.iter().map(|&s| self.generator_name(s)).collect::<Vec<_>>().join("*")
        }
    }

    /// Product of the generators in `word`.
    pub fn evaluate_word(&self, word: &[usize]) -> Product {
        let mut acc = self.unit();
        let mut overflow = false;
        for &slot in word.iter().rev() {
            let g = self.basis_element(self.generator(slot));
            let p = self.multiply(&g, &acc);
            overflow |= p.overflow;
            acc = p.element;
        }
        Product { element: acc, overflow }
    }

    /// Linear relations among the degree-`d` generator words.
    pub fn word_kernel(&self, d: i32) -> WordKernel {
        let words = self.words(d);
        let rows: Vec<Vec<u8>> = words.iter().map(|w| self.evaluate_word(w).element.coeffs).collect();
        let m = FpMatrix::from_rows(self.raw.prime, self.dim(d), &rows).expect("reduced entries");
        let kernel = RowReduction::new(&m).kernel().clone();
        WordKernel { words, kernel }
    }

    /// Parse `"Sq2*Sq1 + Sq(0,1)"`, `"2*beta*P1"`, `"1"`, `"0"`. Factors are
    /// generator names or basis labels.
    pub fn parse_element(&self, text: &str) -> Result<Element, AlgebraError> {
        let err = |reason: &str| AlgebraError::Parse { text: text.to_string(), reason: reason.to_string() };
        let p = self.raw.prime;
        let mut result: Option<Element> = None;
        for (sign, term) in split_terms(text).map_err(|r| err(&r))? {
            let mut coeff: i64 = sign;
            let mut acc = self.unit();
            for factor in term.split('*').map(str::trim) {
                if factor.is_empty() {
                    return Err(err("empty factor"));
                }
                if let Ok(k) = factor.parse::<i64>() {
                    coeff *= k;
                    continue;
                }
                let (base, power) = match factor.split_once('^') {
                    Some((b, e)) => (b.trim(), e.trim().parse::<u32>().map_err(|_| err("bad exponent"))?),
                    None => (factor, 1),
                };
                let idx = *self.by_name.get(base).ok_or_else(|| AlgebraError::UnknownSymbol(base.to_string()))?;
                for _ in 0..power {
                    acc = self.multiply(&acc, &self.basis_element(idx)).element;
                }
            }
            let c = p.reduce(coeff);
            let mut t = acc;
            for x in &mut t.coeffs {
                *x = p.mul(*x, c);
            }
            result = Some(match result {
                None => t,
                Some(r) if r.degree == t.degree => self.add(&r, &t),
                Some(r) if r.is_zero() => t,
                Some(r) if t.is_zero() => r,
                Some(_) => return Err(err("terms of different degrees")),
            });
        }
        result.ok_or_else(|| err("empty expression"))
    }

    pub fn element_label(&self, x: &Element) -> String {
        let mut parts = Vec::new();
        for (i, &c) in x.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let l = self.label(self.offset(x.degree) + i);
            parts.push(if c == 1 { l.to_string() } else { format!("{c}*{l}") });
        }
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }

    /// Check `(ab)c = a(bc)` on one basis triple.
    pub fn associative_on(&self, a: usize, b: usize, c: usize) -> bool {
        let (ea, eb, ec) = (self.basis_element(a), self.basis_element(b), self.basis_element(c));
        let left = self.multiply(&self.multiply(&ea, &eb).element, &ec).element;
        let right = self.multiply(&ea, &self.multiply(&eb, &ec).element).element;
        left == right
    }

    /// Unit acts as identity and each generator coproduct is counital.
    pub fn check_unit_and_counit(&self) -> Result<(), AlgebraError> {
        for i in 0..self.total_dim() {
            if self.mul_basis(0, i) != [(i, 1)] || self.mul_basis(i, 0) != [(i, 1)] {
                return Err(AlgebraError::Malformed(format!("unit fails on {}", self.label(i))));
            }
        }
        for slot in 0..self.num_generators() {
            let g = self.generator(slot);
            let cp = self.coproduct(slot);
            if !cp.contains(&(g, 0, 1)) || !cp.contains(&(0, g, 1)) {
                return Err(AlgebraError::Malformed(format!("coproduct of {} not counital", self.generator_name(slot))));
            }
        }
        Ok(())
    }
}

/// Words of one degree together with the linear relations among them.
#[derive(Clone, Debug)]
pub struct WordKernel {
    pub words: Vec<Vec<usize>>,
    /// One relation per row, coefficients indexed like `words`.
    pub kernel: FpMatrix,
}

fn split_terms(text: &str) -> Result<Vec<(i64, String)>, String> {
    let mut out = Vec::new();
    let mut sign = 1i64;
    let mut cur = String::new();
    let mut depth = 0;
    for ch in text.chars() {
        match ch {
            '(' => {
                depth += 1;
                cur.push(ch);
            }
            ')' => {
                depth -= 1;
                cur.push(ch);
            }
            '+' | '-' if depth == 0 => {
                if cur.trim().is_empty() {
                    if !out.is_empty() {
                        return Err("dangling operator".into());
                    }
                } else {
                    out.push((sign, cur.trim().to_string()));
                }
                cur.clear();
                sign = if ch == '-' { -1 } else { 1 };
            }
            _ => cur.push(ch),
        }
    }
    if cur.trim().is_empty() {
        return Err("dangling operator".into());
    }
    out.push((sign, cur.trim().to_string()));
    Ok(out)
}

/// 𝒜(0), generated by Sq1.
pub fn a0() -> AlgebraRef {
    Arc::new(build_milnor_subalgebra(&MilnorProfile::a(0)).expect("A(0)"))
}
/// 𝒜(1), generated by Sq1 and Sq2.
pub fn a1() -> AlgebraRef {
    Arc::new(build_milnor_subalgebra(&MilnorProfile::a(1)).expect("A(1)"))
}
/// 𝒜(2), generated by Sq1, Sq2 and Sq4.
pub fn a2() -> AlgebraRef {
    Arc::new(build_milnor_subalgebra(&MilnorProfile::a(2)).expect("A(2)"))
}
/// ℰ(1), exterior on Q0 and Q1.
pub fn e1() -> AlgebraRef {
    Arc::new(build_milnor_subalgebra(&MilnorProfile::e(1)).expect("E(1)"))
}
/// The mod 3 algebra on β (degree 1) and P¹ (degree 4).
pub fn atmf() -> AlgebraRef {
    Arc::new(build_presented_algebra(&AlgebraPresentation::atmf()).expect("A^tmf"))
}

/// Look up one of the shipped algebras by name.
pub fn by_name(name: &str) -> Option<AlgebraRef> {
    match name {
        "A(0)" | "a0" => Some(a0()),
        "A(1)" | "a1" => Some(a1()),
        "A(2)" | "a2" => Some(a2()),
        "E(1)" | "e1" => Some(e1()),
        "A^tmf" | "atmf" => Some(atmf()),
        _ => None,
    }
}

pub const SHIPPED: [&str; 5] = ["A(0)", "E(1)", "A(1)", "A(2)", "A^tmf"];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dims_and_tops() {
        let a = a1();
        assert_eq!(a.total_dim(), 8);
        assert_eq!(a.top_degree(), 6);
        assert_eq!(a0().total_dim(), 2);
        assert_eq!(e1().dims(), vec![1, 1, 0, 1, 1]);
    }

    #[test]
    fn q1_identity() {
        let a = a1();
        let x = a.parse_element("Sq1*Sq2 + Sq2*Sq1").unwrap();
        assert_eq!(x, a.parse_element("Sq(0,1)").unwrap());
        assert!(a.parse_element("Sq1*Sq1").unwrap().is_zero());
    }

    #[test]
    fn word_kernel_examples() {
        let a = a1();
        let wk = a.word_kernel(2);
        assert_eq!(wk.words, vec![vec![0, 0], vec![1]]);
        assert_eq!(wk.kernel.to_rows(), vec![vec![1, 0]]);
        assert_eq!(a.word_kernel(0).kernel.rows(), 0);
        let e = e1();
        let wk = e.word_kernel(4);
        assert_eq!(wk.words, vec![vec![0, 0, 0, 0], vec![0, 1], vec![1, 0]]);
        assert_eq!(wk.kernel.to_rows(), vec![vec![1, 0, 0], vec![0, 1, 1]]);
    }

    #[test]
    fn parse_errors() {
        let a = a1();
        assert!(matches!(a.parse_element("Sq7"), Err(AlgebraError::UnknownSymbol(_))));
        assert!(a.parse_element("Sq1 + Sq2").is_err());
        assert!(a.parse_element("").is_err());
        assert!(a.parse_element("0").unwrap().is_zero());
    }
}
