//! Truncated cohomology rings with Steenrod operations.
//!
//! A [`CohomologyPresentation`] is the tabulated form: a basis in each
//! degree up to a truncation `D`, the cup product and the operation
//! matrices. [`PolynomialPresentation`] builds one from generators,
//! monomial relations and the values of the operations on generators,
//! filling in the rest with the Cartan formula.

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::fp::{add_scaled, FpMatrix, Prime};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CohomologyError {
    #[error("unknown class `{0}`")]
    UnknownClass(String),
    #[error("cannot parse `{text}`: {reason}")]
    Parse { text: String, reason: String },
    #[error("`{0}` is not homogeneous")]
    Inhomogeneous(String),
    #[error("missing value of {op} on generator {generator} (lands in degree {degree} <= {truncation})")]
    MissingOperation { op: String, generator: String, degree: i32, truncation: i32 },
    #[error("{op}({generator}) = `{value}` has degree {got}, expected {expected}")]
    OperationDegree { op: String, generator: String, value: String, expected: i32, got: i32 },
    #[error("unknown operation `{0}`")]
    UnknownOperation(String),
    #[error("inconsistent tables: {0}")]
    Inconsistent(String),
    #[error("malformed presentation: {0}")]
    Malformed(String),
}

/// Operation names available at each prime.
pub fn operation_names(prime: Prime) -> &'static [&'static str] {
    if prime == Prime::TWO {
        &["Sq1", "Sq2", "Sq3", "Sq4"]
    } else {
        &["beta", "P1"]
    }
}

pub fn operation_degree(op: &str) -> Option<i32> {
    match op {
        "Sq1" | "beta" => Some(1),
        "Sq2" => Some(2),
        "Sq3" => Some(3),
        "Sq4" | "P1" => Some(4),
        _ => None,
    }
}

/// Tabulated truncated cohomology ring.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CohomologyPresentation {
    pub name: String,
    pub prime: Prime,
    /// Highest degree carried.
    pub truncation: i32,
    /// True when the ring vanishes above `truncation`, so nothing is lost.
    pub complete: bool,
    /// Labels per degree `0..=truncation`; degree 0 is the unit `1`.
    pub basis: Vec<Vec<String>>,
    /// `(d1, d2)` with `d1 <= d2`, `d1 + d2 <= truncation`: row
    /// `i * dim(d2) + j` is `x_i · y_j`.
    pub products: BTreeMap<(i32, i32), FpMatrix>,
    /// Operation name -> matrix per source degree (target beyond the
    /// truncation gives zero columns).
    pub operations: BTreeMap<String, Vec<FpMatrix>>,
}

/// A homogeneous class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Class {
    pub degree: i32,
    pub coeffs: Vec<u8>,
}

impl Class {
    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }
}

impl CohomologyPresentation {
    pub fn dim(&self, d: i32) -> usize {
        if d < 0 || d > self.truncation {
            0
        } else {
            self.basis[d as usize].len()
        }
    }

    pub fn dims(&self) -> Vec<usize> {
        (0..=self.truncation).map(|d| self.dim(d)).collect()
    }

    pub fn labels(&self, d: i32) -> &[String] {
        if d < 0 || d > self.truncation {
            &[]
        } else {
            &self.basis[d as usize]
        }
    }

    pub fn find(&self, label: &str) -> Option<(i32, usize)> {
        self.basis
            .iter()
            .enumerate()
            .find_map(|(d, ls)| ls.iter().position(|l| l == label).map(|i| (d as i32, i)))
    }

    pub fn zero(&self, d: i32) -> Class {
        Class { degree: d, coeffs: vec![0; self.dim(d)] }
    }

    pub fn unit(&self) -> Class {
        Class { degree: 0, coeffs: vec![1] }
    }

    pub fn basis_class(&self, d: i32, i: usize) -> Class {
        let mut c = self.zero(d);
        c.coeffs[i] = 1;
        c
    }

    /// Cup product; zero once the degree leaves the window.
    pub fn mul(&self, x: &Class, y: &Class) -> Class {
        let d = x.degree + y.degree;
        let mut out = self.zero(d);
        if d > self.truncation || x.is_zero() || y.is_zero() {
            return out;
        }
        let p = self.prime;
        let swapped = x.degree > y.degree;
        let (a, b) = if swapped { (y, x) } else { (x, y) };
        let table = &self.products[&(a.degree, b.degree)];
        let nb = self.dim(b.degree);
        // moving b past a when swapped costs (-1)^{|a||b|}
        let sign = if swapped { p.sign((a.degree as i64) * (b.degree as i64)) } else { 1 };
        for (i, &ca) in a.coeffs.iter().enumerate() {
            if ca == 0 {
                continue;
            }
            for (j, &cb) in b.coeffs.iter().enumerate() {
                if cb == 0 {
                    continue;
                }
                let row = table.row(i * nb + j);
                add_scaled(p, &mut out.coeffs, &row, p.mul(sign, p.mul(ca, cb)));
            }
        }
        out
    }

    pub fn add(&self, x: &Class, y: &Class) -> Class {
        assert_eq!(x.degree, y.degree);
        let mut c = x.clone();
        add_scaled(self.prime, &mut c.coeffs, &y.coeffs, 1);
        c
    }

    pub fn scale(&self, x: &Class, k: u8) -> Class {
        Class { degree: x.degree, coeffs: x.coeffs.iter().map(|&c| self.prime.mul(c, k)).collect() }
    }

    pub fn pow(&self, x: &Class, n: u32) -> Class {
        let mut acc = self.unit();
        for _ in 0..n {
            acc = self.mul(&acc, x);
        }
        acc
    }

    /// Apply a named operation. `Sq0` is the identity.
    pub fn op(&self, name: &str, x: &Class) -> Result<Class, CohomologyError> {
        if name == "Sq0" {
            return Ok(x.clone());
        }
        let k = operation_degree(name).ok_or_else(|| CohomologyError::UnknownOperation(name.into()))?;
        let mats = self.operations.get(name).ok_or_else(|| CohomologyError::UnknownOperation(name.into()))?;
        let d = x.degree + k;
        if d > self.truncation || x.degree < 0 || x.degree > self.truncation {
            return Ok(self.zero(d));
        }
        Ok(Class { degree: d, coeffs: mats[x.degree as usize].apply(&x.coeffs) })
    }

    /// `Sq^k`, with `Sq^0 = id` and zero for `k > 4` unless `k > |x|`.
    pub fn sq(&self, k: i32, x: &Class) -> Class {
        match k {
            0 => x.clone(),
            1..=4 => self.op(&format!("Sq{k}"), x).expect("p = 2 tables"),
            _ => self.zero(x.degree + k),
        }
    }

    /// Parse a sum of products of basis labels, e.g. `"x*y^3 + y^2"`.
    pub fn parse_class(&self, text: &str) -> Result<Class, CohomologyError> {
        let err = |reason: &str| CohomologyError::Parse { text: text.to_string(), reason: reason.to_string() };
        let p = self.prime;
        let mut result: Option<Class> = None;
        for (sign, term) in split_sum(text).map_err(|r| err(&r))? {
            let mut coeff = sign;
            let mut acc = self.unit();
            for factor in term.split('*').map(str::trim) {
                if let Ok(k) = factor.parse::<i64>() {
                    coeff *= k;
                    continue;
                }
                let (base, power) = match factor.split_once('^') {
                    Some((b, e)) => (b.trim(), e.trim().parse::<u32>().map_err(|_| err("bad exponent"))?),
                    None => (factor, 1),
                };
                let (d, i) = self.find(base).ok_or_else(|| CohomologyError::UnknownClass(base.to_string()))?;
                let g = self.basis_class(d, i);
                acc = self.mul(&acc, &self.pow(&g, power));
            }
            let t = self.scale(&acc, p.reduce(coeff));
            result = Some(match result {
                None => t,
                Some(r) if r.degree == t.degree => self.add(&r, &t),
                Some(r) if r.is_zero() && coeff % p.value() as i64 == 0 => r,
                Some(_) => return Err(CohomologyError::Inhomogeneous(text.to_string())),
            });
        }
        result.ok_or_else(|| err("empty expression"))
    }

    pub fn format_class(&self, x: &Class) -> String {
        let parts: Vec<String> = x
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(i, &c)| {
                let l = &self.labels(x.degree)[i];
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

    /// Verify unit, graded commutativity, associativity, the Cartan
    /// formula and (at p = 2) `Sq3 = Sq1 Sq2`, in every degree where all
    /// terms stay inside the window.
    pub fn check(&self) -> Result<(), CohomologyError> {
        let p = self.prime;
        let d_max = self.truncation;
        for name in operation_names(p) {
            if !self.operations.contains_key(*name) {
                return Err(CohomologyError::Malformed(format!("missing table for {name}")));
            }
        }
        let basis: Vec<Class> = (0..=d_max)
            .flat_map(|d| (0..self.dim(d)).map(move |i| (d, i)))
            .map(|(d, i)| self.basis_class(d, i))
            .collect();
        for x in &basis {
            if self.mul(&self.unit(), x) != *x {
                return Err(CohomologyError::Inconsistent("unit".into()));
            }
        }
        for x in &basis {
            for y in &basis {
                if x.degree + y.degree > d_max {
                    continue;
                }
                let xy = self.mul(x, y);
                let yx = self.mul(y, x);
                if xy != self.scale(&yx, p.sign((x.degree * y.degree) as i64)) {
                    return Err(CohomologyError::Inconsistent("graded commutativity".into()));
                }
                for z in &basis {
                    if x.degree + y.degree + z.degree > d_max {
                        continue;
                    }
                    if self.mul(&xy, z) != self.mul(x, &self.mul(y, z)) {
                        return Err(CohomologyError::Inconsistent("associativity".into()));
                    }
                }
                // Cartan formula
                if p == Prime::TWO {
                    for k in 1..=4 {
                        if x.degree + y.degree + k > d_max {
                            continue;
                        }
                        let lhs = self.sq(k, &xy);
                        let mut rhs = self.zero(lhs.degree);
                        for i in 0..=k {
                            rhs = self.add(&rhs, &self.mul(&self.sq(i, x), &self.sq(k - i, y)));
                        }
                        if lhs != rhs {
                            return Err(CohomologyError::Inconsistent(format!(
                                "Cartan formula for Sq{k} on {} * {}",
                                self.format_class(x),
                                self.format_class(y)
                            )));
                        }
                    }
                } else {
                    if x.degree + y.degree + 1 <= d_max {
                        let lhs = self.op("beta", &xy)?;
                        let rhs = self.add(
                            &self.mul(&self.op("beta", x)?, y),
                            &self.scale(&self.mul(x, &self.op("beta", y)?), p.sign(x.degree as i64)),
                        );
                        if lhs != rhs {
                            return Err(CohomologyError::Inconsistent("derivation rule for beta".into()));
                        }
                    }
                    if x.degree + y.degree + 4 <= d_max {
                        let lhs = self.op("P1", &xy)?;
                        let rhs = self.add(&self.mul(&self.op("P1", x)?, y), &self.mul(x, &self.op("P1", y)?));
                        if lhs != rhs {
                            return Err(CohomologyError::Inconsistent("Cartan formula for P1".into()));
                        }
                    }
                }
            }
        }
        for x in &basis {
            if p == Prime::TWO {
                if x.degree + 3 <= d_max {
                    let composite = self.sq(1, &self.sq(2, x));
                    if self.sq(3, x) != composite {
                        return Err(CohomologyError::Inconsistent(format!(
                            "Sq3 differs from Sq1 Sq2 on {}",
                            self.format_class(x)
                        )));
                    }
                }
                if x.degree + 2 <= d_max && !self.sq(1, &self.sq(1, x)).is_zero() {
                    return Err(CohomologyError::Inconsistent(format!("Sq1 Sq1 nonzero on {}", self.format_class(x))));
                }
            } else if x.degree + 2 <= d_max && !self.op("beta", &self.op("beta", x)?)?.is_zero() {
                return Err(CohomologyError::Inconsistent(format!("beta beta nonzero on {}", self.format_class(x))));
            }
            // unstable condition
            let deg = x.degree;
            if p == Prime::TWO {
                for k in 1..=4 {
                    if deg + k > d_max {
                        continue;
                    }
                    let expect = if k == deg {
                        Some(self.mul(x, x))
                    } else if k > deg {
                        Some(self.zero(deg + k))
                    } else {
                        None
                    };
                    if let Some(e) = expect {
                        if self.sq(k, x) != e {
                            return Err(CohomologyError::Inconsistent(format!(
                                "instability fails for Sq{k} on {}",
                                self.format_class(x)
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

pub(crate) fn split_sum(text: &str) -> Result<Vec<(i64, String)>, String> {
    let mut out = Vec::new();
    let mut sign = 1i64;
    let mut cur = String::new();
    for ch in text.chars() {
        if ch == '+' || ch == '-' {
            if cur.trim().is_empty() {
                if !out.is_empty() {
                    return Err("dangling operator".into());
                }
            } else {
                out.push((sign, cur.trim().to_string()));
            }
            cur.clear();
            sign = if ch == '-' { -1 } else { 1 };
        } else {
            cur.push(ch);
        }
    }
    if cur.trim().is_empty() {
        return Err("dangling operator".into());
    }
    out.push((sign, cur.trim().to_string()));
    Ok(out)
}

/// A polynomial generator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyGenerator {
    pub name: String,
    pub degree: i32,
    /// Squares to zero. Odd-degree generators at p = 3 are always exterior.
    pub exterior: bool,
}

/// Generators, monomial relations and operation values on generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolynomialPresentation {
    pub name: String,
    pub prime: Prime,
    pub generators: Vec<PolyGenerator>,
    /// Monomials set to zero, written like `"x^3"` or `"x*y^2"`.
    pub zero_monomials: Vec<String>,
    pub truncation: i32,
    pub complete: bool,
    /// `(operation, generator, value)`.
    pub operations: Vec<(String, String, String)>,
}

type Monomial = Vec<u32>;
type Poly = BTreeMap<Monomial, u8>;

impl PolynomialPresentation {
    pub fn new(name: &str, prime: Prime, truncation: i32) -> Self {
        PolynomialPresentation {
            name: name.into(),
            prime,
            generators: vec![],
            zero_monomials: vec![],
            truncation,
            complete: false,
            operations: vec![],
        }
    }

    pub fn generator(mut self, name: &str, degree: i32) -> Self {
        self.generators.push(PolyGenerator { name: name.into(), degree, exterior: false });
        self
    }

    pub fn exterior_generator(mut self, name: &str, degree: i32) -> Self {
        self.generators.push(PolyGenerator { name: name.into(), degree, exterior: true });
        self
    }

    pub fn zero(mut self, monomial: &str) -> Self {
        self.zero_monomials.push(monomial.into());
        self
    }

    pub fn complete(mut self, complete: bool) -> Self {
        self.complete = complete;
        self
    }

    /// Record `op(generator) = value`.
    pub fn set(mut self, op: &str, generator: &str, value: &str) -> Self {
        self.operations.push((op.into(), generator.into(), value.into()));
        self
    }

    fn mono_degree(&self, m: &Monomial) -> i32 {
        m.iter().zip(&self.generators).map(|(&e, g)| e as i32 * g.degree).sum()
    }

    fn is_exterior(&self, i: usize) -> bool {
        let g = &self.generators[i];
        g.exterior || (self.prime == Prime::THREE && g.degree % 2 == 1)
    }

    fn parse_monomial(&self, text: &str) -> Result<(i64, Monomial), CohomologyError> {
        let err = |reason: &str| CohomologyError::Parse { text: text.to_string(), reason: reason.to_string() };
        let mut m = vec![0u32; self.generators.len()];
        let mut coeff = 1i64;
        for factor in text.split('*').map(str::trim) {
            if let Ok(k) = factor.parse::<i64>() {
                coeff *= k;
                continue;
            }
            let (base, power) = match factor.split_once('^') {
                Some((b, e)) => (b.trim(), e.trim().parse::<u32>().map_err(|_| err("bad exponent"))?),
                None => (factor, 1),
            };
            let i = self
                .generators
                .iter()
                .position(|g| g.name == base)
                .ok_or_else(|| CohomologyError::UnknownClass(base.to_string()))?;
            m[i] += power;
        }
        Ok((coeff, m))
    }

    fn parse_poly(&self, text: &str, zeros: &[Monomial]) -> Result<Poly, CohomologyError> {
        let mut poly = Poly::new();
        for (sign, term) in split_sum(text).map_err(|r| CohomologyError::Parse { text: text.into(), reason: r })? {
            let (c, m) = self.parse_monomial(&term)?;
            if c * sign % self.prime.value() as i64 == 0 {
                continue;
            }
            let one: Poly = [(vec![0; self.generators.len()], self.prime.reduce(c * sign))].into_iter().collect();
            let mono: Poly = [(m, 1u8)].into_iter().collect();
            add_into(self.prime, &mut poly, &self.mul_poly(&one, &mono, zeros));
        }
        Ok(poly)
    }

    fn lex_label(&self, m: &Monomial) -> String {
        let parts: Vec<String> = m
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(i, &e)| {
                let n = &self.generators[i].name;
                if e == 1 {
                    n.clone()
                } else {
                    format!("{n}^{e}")
                }
            })
            .collect();
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("*")
        }
    }

    /// Product of monomials in the truncated quotient, with the Koszul
    /// sign for reordering odd generators.
    fn mul_mono(&self, a: &Monomial, b: &Monomial, zeros: &[Monomial]) -> Option<(Monomial, u8)> {
        let m: Monomial = a.iter().zip(b).map(|(x, y)| x + y).collect();
        if self.mono_degree(&m) > self.truncation {
            return None;
        }
        for (i, &e) in m.iter().enumerate() {
            if e > 1 && self.is_exterior(i) {
                return None;
            }
        }
        if zeros.iter().any(|z| z.iter().zip(&m).all(|(zi, mi)| zi <= mi)) {
            return None;
        }
        let mut swaps = 0i64;
        for (j, &eb) in b.iter().enumerate() {
            if eb == 0 || self.generators[j].degree % 2 == 0 {
                continue;
            }
            for (i, &ea) in a.iter().enumerate().skip(j + 1) {
                if ea > 0 && self.generators[i].degree % 2 != 0 {
                    swaps += (ea * eb) as i64;
                }
            }
        }
        Some((m, self.prime.sign(swaps)))
    }

    fn mul_poly(&self, a: &Poly, b: &Poly, zeros: &[Monomial]) -> Poly {
        let p = self.prime;
        let mut out = Poly::new();
        for (ma, &ca) in a {
            for (mb, &cb) in b {
                if let Some((m, s)) = self.mul_mono(ma, mb, zeros) {
                    let c = p.mul(s, p.mul(ca, cb));
                    let e = out.entry(m).or_insert(0);
                    *e = p.add(*e, c);
                }
            }
        }
        out.retain(|_, c| *c != 0);
        out
    }

    pub fn build(&self) -> Result<CohomologyPresentation, CohomologyError> {
        let p = self.prime;
        let n = self.generators.len();
        let d_max = self.truncation;
        if self.generators.iter().any(|g| g.degree <= 0) {
            return Err(CohomologyError::Malformed("generator degrees must be positive".into()));
        }
        let mut zeros = Vec::new();
        for z in &self.zero_monomials {
            zeros.push(self.parse_monomial(z)?.1);
        }

        // enumerate monomials up to the truncation
        let mut monos: Vec<Monomial> = vec![vec![0; n]];
        for i in 0..n {
            let cap = if self.is_exterior(i) { 1 } else { u32::MAX };
            let mut next = Vec::new();
            for m in &monos {
                let mut e = 0u32;
                let mut mm = m.clone();
                while e <= cap && self.mono_degree(&mm) <= d_max {
                    next.push(mm.clone());
                    e += 1;
                    mm[i] = e;
                }
            }
            monos = next;
        }
        monos.retain(|m| !zeros.iter().any(|z| z.iter().zip(m).all(|(zi, mi)| zi <= mi)));
        let mut by_degree: Vec<Vec<Monomial>> = vec![Vec::new(); d_max as usize + 1];
        for m in monos {
            by_degree[self.mono_degree(&m) as usize].push(m);
        }
        for ms in &mut by_degree {
            ms.sort_by(|a, b| b.cmp(a));
        }
        let index: HashMap<Monomial, (i32, usize)> = by_degree
            .iter()
            .enumerate()
            .flat_map(|(d, ms)| ms.iter().enumerate().map(move |(i, m)| (m.clone(), (d as i32, i))))
            .collect();
        let to_vec = |poly: &Poly, d: i32| -> Vec<u8> {
            let mut v = vec![0u8; by_degree.get(d as usize).map_or(0, Vec::len)];
            for (m, &c) in poly {
                if let Some(&(dm, i)) = index.get(m) {
                    debug_assert_eq!(dm, d);
                    v[i] = p.add(v[i], c);
                }
            }
            v
        };

        // operation values on generators
        let ops = operation_names(p);
        let mut gen_ops: HashMap<(String, usize), Poly> = HashMap::new();
        for (op, g, val) in &self.operations {
            if !ops.contains(&op.as_str()) {
                return Err(CohomologyError::UnknownOperation(op.clone()));
            }
            let gi = self
                .generators
                .iter()
                .position(|x| &x.name == g)
                .ok_or_else(|| CohomologyError::UnknownClass(g.clone()))?;
            let poly = self.parse_poly(val, &zeros)?;
            let expected = self.generators[gi].degree + operation_degree(op).unwrap();
            for m in poly.keys() {
                let got = self.mono_degree(m);
                if got != expected {
                    return Err(CohomologyError::OperationDegree {
                        op: op.clone(),
                        generator: g.clone(),
                        value: val.clone(),
                        expected,
                        got,
                    });
                }
            }
            gen_ops.insert((op.clone(), gi), poly);
        }
        let unit_mono = vec![0u32; n];
        let gen_mono = |i: usize| {
            let mut m = vec![0u32; n];
            m[i] = 1;
            m
        };
        // value of an operation on a generator, with the automatic rules
        let gen_value = |op: &str, i: usize| -> Result<Poly, CohomologyError> {
            let g = &self.generators[i];
            let k = operation_degree(op).unwrap();
            if let Some(v) = gen_ops.get(&(op.to_string(), i)) {
                return Ok(v.clone());
            }
            if g.degree + k > d_max {
                return Ok(Poly::new());
            }
            let single: Poly = [(gen_mono(i), 1u8)].into_iter().collect();
            if p == Prime::TWO {
                if k > g.degree {
                    return Ok(Poly::new());
                }
                if k == g.degree {
                    return Ok(self.mul_poly(&single, &single, &zeros));
                }
            } else if op == "P1" {
                if 2 > g.degree {
                    return Ok(Poly::new());
                }
                if g.degree == 2 {
                    let sq = self.mul_poly(&single, &single, &zeros);
                    return Ok(self.mul_poly(&sq, &single, &zeros));
                }
            }
            Err(CohomologyError::MissingOperation {
                op: op.to_string(),
                generator: g.name.clone(),
                degree: g.degree + k,
                truncation: d_max,
            })
        };

        // total operations on monomials via Cartan, memoised
        let mut memo: HashMap<(i32, Monomial), Poly> = HashMap::new();
        fn sq_mono(
            this: &PolynomialPresentation,
            k: i32,
            m: &Monomial,
            zeros: &[Monomial],
            gen_value: &dyn Fn(&str, usize) -> Result<Poly, CohomologyError>,
            memo: &mut HashMap<(i32, Monomial), Poly>,
        ) -> Result<Poly, CohomologyError> {
            if k == 0 {
                return Ok([(m.clone(), 1u8)].into_iter().collect());
            }
            if this.mono_degree(m) + k > this.truncation || m.iter().all(|&e| e == 0) {
                return Ok(Poly::new());
            }
            if let Some(v) = memo.get(&(k, m.clone())) {
                return Ok(v.clone());
            }
            let i = m.iter().position(|&e| e > 0).unwrap();
            let mut rest = m.clone();
            rest[i] -= 1;
            let mut g = vec![0u32; m.len()];
            g[i] = 1;
            let mut out = Poly::new();
            for a in 0..=k {
                let left = if a == 0 {
                    [(g.clone(), 1u8)].into_iter().collect()
                } else if a <= 4 {
                    gen_value(&format!("Sq{a}"), i)?
                } else {
                    Poly::new()
                };
                if left.is_empty() {
                    continue;
                }
                let right = sq_mono(this, k - a, &rest, zeros, gen_value, memo)?;
                add_into(this.prime, &mut out, &this.mul_poly(&left, &right, zeros));
            }
            memo.insert((k, m.clone()), out.clone());
            Ok(out)
        }
        let odd_op_mono = |op: &str, m: &Monomial| -> Result<Poly, CohomologyError> {
            // derivations: beta with sign (-1)^{|x|} past x, P1 plain
            let k = operation_degree(op).unwrap();
            let mut out = Poly::new();
            if self.mono_degree(m) + k > d_max {
                return Ok(out);
            }
            // write m as an ordered product of generators
            let mut factors = Vec::new();
            for (i, &e) in m.iter().enumerate() {
                for _ in 0..e {
                    factors.push(i);
                }
            }
            for pos in 0..factors.len() {
                let val = gen_value(op, factors[pos])?;
                if val.is_empty() {
                    continue;
                }
                let before: i32 = factors[..pos].iter().map(|&i| self.generators[i].degree).sum();
                let sign = if op == "beta" { p.sign(before as i64) } else { 1 };
                let mut acc: Poly = [(unit_mono.clone(), sign)].into_iter().collect();
                for (q, &f) in factors.iter().enumerate() {
                    let piece = if q == pos { val.clone() } else { [(gen_mono(f), 1u8)].into_iter().collect() };
                    acc = self.mul_poly(&acc, &piece, &zeros);
                }
                add_into(p, &mut out, &acc);
            }
            Ok(out)
        };

        let mut operations = BTreeMap::new();
        for op in ops {
            let k = operation_degree(op).unwrap();
            let mut mats = Vec::new();
            for d in 0..=d_max {
                let tdim = if d + k <= d_max { by_degree[(d + k) as usize].len() } else { 0 };
                let mut m = FpMatrix::zeros(p, by_degree[d as usize].len(), tdim);
                if tdim > 0 {
                    for (row, mono) in by_degree[d as usize].iter().enumerate() {
                        let val = if p == Prime::TWO {
                            sq_mono(self, k, mono, &zeros, &gen_value, &mut memo)?
                        } else {
                            odd_op_mono(op, mono)?
                        };
                        for (col, &c) in to_vec(&val, d + k).iter().enumerate() {
                            m.set(row, col, c);
                        }
                    }
                }
                mats.push(m);
            }
            operations.insert(op.to_string(), mats);
        }

        let mut products = BTreeMap::new();
        for d1 in 0..=d_max {
            for d2 in d1..=d_max - d1 {
                let (a, b) = (&by_degree[d1 as usize], &by_degree[d2 as usize]);
                let mut m = FpMatrix::zeros(p, a.len() * b.len(), by_degree[(d1 + d2) as usize].len());
                for (i, ma) in a.iter().enumerate() {
                    for (j, mb) in b.iter().enumerate() {
                        if let Some((mm, s)) = self.mul_mono(ma, mb, &zeros) {
                            let (_, k) = index[&mm];
                            m.set(i * b.len() + j, k, s);
                        }
                    }
                }
                products.insert((d1, d2), m);
            }
        }
        let basis = by_degree.iter().map(|ms| ms.iter().map(|m| self.lex_label(m)).collect()).collect();
        Ok(CohomologyPresentation {
            name: self.name.clone(),
            prime: p,
            truncation: d_max,
            complete: self.complete,
            basis,
            products,
            operations,
        })
    }
}

fn add_into(p: Prime, acc: &mut Poly, other: &Poly) {
    for (m, &c) in other {
        let e = acc.entry(m.clone()).or_insert(0);
        *e = p.add(*e, c);
    }
    acc.retain(|_, c| *c != 0);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rp_infinity_squares() {
        let h = PolynomialPresentation::new("BZ/2", Prime::TWO, 8).generator("t", 1).build().unwrap();
        assert_eq!(h.dims(), vec![1; 9]);
        h.check().unwrap();
        let t3 = h.parse_class("t^3").unwrap();
        // Sq^2 t^3 = 3 t^5 = t^5
        assert_eq!(h.sq(2, &t3), h.parse_class("t^5").unwrap());
        assert!(h.sq(1, &h.parse_class("t^2").unwrap()).is_zero());
    }

    #[test]
    fn missing_operation_is_reported() {
        let r = PolynomialPresentation::new("X", Prime::TWO, 6).generator("x", 2).build();
        assert!(matches!(r, Err(CohomologyError::MissingOperation { .. })));
    }

    #[test]
    fn inconsistent_sq3_detected() {
        let h = PolynomialPresentation::new("X", Prime::TWO, 7)
            .generator("x", 3)
            .generator("y", 4)
            .generator("z", 6)
            .set("Sq1", "x", "y")
            .set("Sq2", "x", "0")
            .set("Sq1", "y", "0")
            .set("Sq2", "y", "z")
            .set("Sq3", "y", "0")
            .set("Sq1", "z", "0")
            .build()
            .unwrap();
        // Sq3 x = x^2 but Sq1 Sq2 x = 0
        assert!(matches!(h.check(), Err(CohomologyError::Inconsistent(_))));
    }

    #[test]
    fn p3_exterior_and_signs() {
        let h = PolynomialPresentation::new("Y", Prime::THREE, 6)
            .generator("u", 1)
            .generator("v", 2)
            .set("beta", "u", "v")
            .set("beta", "v", "0")
            .build()
            .unwrap();
        assert!(h.parse_class("u^2").unwrap().is_zero());
        let uv = h.parse_class("u*v").unwrap();
        let vu = h.mul(&h.parse_class("v").unwrap(), &h.parse_class("u").unwrap());
        assert_eq!(uv, vu);
        // beta(u v) = v^2
        assert_eq!(h.op("beta", &uv).unwrap(), h.parse_class("v^2").unwrap());
        h.check().unwrap();
    }
}
