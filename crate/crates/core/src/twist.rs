//! Twisted Thom modules `M^{X,twist}` over the small subalgebras.
//!
//! The underlying vector space is `U·H*(X)`. Each generator of the
//! target algebra acts by a closed formula in the twisting classes and
//! the Steenrod operations of `X`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{self, AlgebraRef};
use crate::cohomology::{Class, CohomologyError, CohomologyPresentation};
use crate::fp::{FpMatrix, Prime};
use crate::module::{GradedModule, ModuleError};

#[derive(Debug, Error)]
pub enum TwistError {
    #[error(transparent)]
    Cohomology(#[from] CohomologyError),
    #[error(transparent)]
    Module(#[from] ModuleError),
    #[error("twisting class `{name}` must have degree {expected}, got {got}")]
    ClassDegree { name: String, expected: i32, got: i32 },
    #[error("target {target} needs cohomology at p = {expected}, got p = {got}")]
    Prime { target: String, expected: u32, got: u32 },
    #[error("unknown twist target `{0}`")]
    UnknownTarget(String),
    #[error("Stiefel-Whitney data needs an algebra over F_2 built from Sq1, Sq2, Sq4 or Q0, Q1; got {0}")]
    Algebra(String),
}

/// The spectrum being twisted, which fixes the algebra.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TwistTarget {
    #[serde(rename = "HZ")]
    Hz,
    #[serde(rename = "ku")]
    Ku,
    #[serde(rename = "ko")]
    Ko,
    #[serde(rename = "tmf2")]
    Tmf2,
    #[serde(rename = "tmf3")]
    Tmf3,
}

impl TwistTarget {
    pub const ALL: [TwistTarget; 5] =
        [TwistTarget::Hz, TwistTarget::Ku, TwistTarget::Ko, TwistTarget::Tmf2, TwistTarget::Tmf3];

    pub fn algebra(self) -> AlgebraRef {
        match self {
            TwistTarget::Hz => algebra::a0(),
            TwistTarget::Ku => algebra::e1(),
            TwistTarget::Ko => algebra::a1(),
            TwistTarget::Tmf2 => algebra::a2(),
            TwistTarget::Tmf3 => algebra::atmf(),
        }
    }

    pub fn prime(self) -> Prime {
        if self == TwistTarget::Tmf3 {
            Prime::THREE
        } else {
            Prime::TWO
        }
    }

    /// Twisting classes used by this target, with their degrees.
    pub fn classes(self) -> &'static [(&'static str, i32)] {
        match self {
            TwistTarget::Hz => &[("a", 1)],
            TwistTarget::Ku => &[("a", 1), ("c2", 3)],
            TwistTarget::Ko => &[("a", 1), ("b", 2)],
            TwistTarget::Tmf2 => &[("a", 1), ("gw", 2), ("delta", 4)],
            TwistTarget::Tmf3 => &[("d3", 4)],
        }
    }
}

impl fmt::Display for TwistTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TwistTarget::Hz => "HZ",
            TwistTarget::Ku => "ku",
            TwistTarget::Ko => "ko",
            TwistTarget::Tmf2 => "tmf2",
            TwistTarget::Tmf3 => "tmf3",
        })
    }
}

impl FromStr for TwistTarget {
    type Err = TwistError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "HZ" | "Hz" | "hz" => Ok(TwistTarget::Hz),
            "ku" => Ok(TwistTarget::Ku),
            "ko" => Ok(TwistTarget::Ko),
            "tmf2" | "tmf" => Ok(TwistTarget::Tmf2),
            "tmf3" => Ok(TwistTarget::Tmf3),
            _ => Err(TwistError::UnknownTarget(s.to_string())),
        }
    }
}

/// Twisting classes, given as expressions in the cohomology basis.
/// Absent classes are zero.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwistData {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c2: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gw: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d3: Option<String>,
}

impl TwistData {
    pub fn get(&self, name: &str) -> Option<&str> {
        match name {
            "a" => self.a.as_deref(),
            "b" => self.b.as_deref(),
            "c2" => self.c2.as_deref(),
            "gw" => self.gw.as_deref(),
            "delta" => self.delta.as_deref(),
            "d3" => self.d3.as_deref(),
            _ => None,
        }
    }

    pub fn with(mut self, name: &str, value: &str) -> Self {
        let v = Some(value.to_string());
        match name {
            "a" => self.a = v,
            "b" => self.b = v,
            "c2" => self.c2 = v,
            "gw" => self.gw = v,
            "delta" => self.delta = v,
            "d3" => self.d3 = v,
            _ => {}
        }
        self
    }
}

/// Stiefel-Whitney classes `w1..w4` of a vector bundle.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SwClassData {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w1: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w2: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w3: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w4: Option<String>,
}

impl SwClassData {
    fn get(&self, i: i32) -> Option<&str> {
        match i {
            1 => self.w1.as_deref(),
            2 => self.w2.as_deref(),
            3 => self.w3.as_deref(),
            4 => self.w4.as_deref(),
            _ => None,
        }
    }
}

/// Label of `U·x` for a cohomology basis label `x`.
pub fn thom_label(x: &str) -> String {
    if x == "1" {
        "U".to_string()
    } else {
        format!("U·{x}")
    }
}

fn class_of(h: &CohomologyPresentation, name: &str, text: Option<&str>, degree: i32) -> Result<Class, TwistError> {
    match text {
        None => Ok(h.zero(degree)),
        Some(t) => {
            let c = h.parse_class(t)?;
            if c.degree != degree && !c.is_zero() {
                return Err(TwistError::ClassDegree { name: name.to_string(), expected: degree, got: c.degree });
            }
            Ok(Class { degree, coeffs: if c.degree == degree { c.coeffs } else { h.zero(degree).coeffs } })
        }
    }
}

/// Assemble `U·H*(X)` with generator actions given by `act(slot, x)`.
fn assemble(
    h: &CohomologyPresentation,
    algebra: AlgebraRef,
    name: String,
    act: impl Fn(usize, &Class) -> Result<Class, TwistError>,
) -> Result<GradedModule, TwistError> {
    let labels: Vec<Vec<String>> =
        (0..=h.truncation).map(|d| h.labels(d).iter().map(|l| thom_label(l)).collect()).collect();
    let mut actions = Vec::new();
    for slot in 0..algebra.num_generators() {
        let k = algebra.generator_degree(slot);
        let mut per_degree = Vec::new();
        for d in 0..=h.truncation {
            let mut m = FpMatrix::zeros(h.prime, h.dim(d), h.dim(d + k));
            for i in 0..h.dim(d) {
                let y = act(slot, &h.basis_class(d, i))?;
                for (j, &c) in y.coeffs.iter().enumerate() {
                    m.set(i, j, c);
                }
            }
            per_degree.push(m);
        }
        actions.push(per_degree);
    }
    let truncation = if h.complete { None } else { Some(h.truncation) };
    Ok(GradedModule::from_parts(algebra, name, 0, labels, truncation, actions)?)
}

/// Build `M^{X,twist}` over the algebra of `target`.
pub fn build_twisted_module(
    h: &CohomologyPresentation,
    target: TwistTarget,
    twist: &TwistData,
) -> Result<GradedModule, TwistError> {
    if h.prime != target.prime() {
        return Err(TwistError::Prime {
            target: target.to_string(),
            expected: target.prime().value(),
            got: h.prime.value(),
        });
    }
    let mut classes = std::collections::HashMap::new();
    for &(name, deg) in target.classes() {
        classes.insert(name, class_of(h, name, twist.get(name), deg)?);
    }
    let algebra = target.algebra();
    let name = format!("M^{{{},{}}}", h.name, target);
    let c = |n: &str| classes[n].clone();
    let sum = |parts: Vec<Class>, d: i32| parts.iter().fold(h.zero(d), |acc, x| h.add(&acc, x));
    let gen_names: Vec<String> = (0..algebra.num_generators()).map(|s| algebra.generator_name(s).to_string()).collect();
    let act = |slot: usize, x: &Class| -> Result<Class, TwistError> {
        let d = x.degree;
        let g = gen_names[slot].as_str();
        Ok(match (target, g) {
            (TwistTarget::Hz | TwistTarget::Ko | TwistTarget::Tmf2, "Sq1") | (TwistTarget::Ku, "Q0") => {
                sum(vec![h.mul(&c("a"), x), h.sq(1, x)], d + 1)
            }
            (TwistTarget::Ku, "Q1") => {
                let a = c("a");
                let coeff = h.add(&c("c2"), &h.pow(&a, 3));
                let q1 = h.add(&h.sq(1, &h.sq(2, x)), &h.sq(2, &h.sq(1, x)));
                sum(vec![h.mul(&coeff, x), q1], d + 3)
            }
            (TwistTarget::Ko, "Sq2") => {
                sum(vec![h.mul(&c("b"), x), h.mul(&c("a"), &h.sq(1, x)), h.sq(2, x)], d + 2)
            }
            (TwistTarget::Tmf2, "Sq2") => {
                sum(vec![h.mul(&c("gw"), x), h.mul(&c("a"), &h.sq(1, x)), h.sq(2, x)], d + 2)
            }
            (TwistTarget::Tmf2, "Sq4") => {
                let gw = c("gw");
                let coeff = h.add(&h.mul(&gw, &c("a")), &h.sq(1, &gw));
                sum(
                    vec![
                        h.mul(&c("delta"), x),
                        h.mul(&coeff, &h.sq(1, x)),
                        h.mul(&gw, &h.sq(2, x)),
                        h.mul(&c("a"), &h.sq(3, x)),
                        h.sq(4, x),
                    ],
                    d + 4,
                )
            }
            (TwistTarget::Tmf3, "beta") => h.op("beta", x)?,
            (TwistTarget::Tmf3, "P1") => sum(vec![h.mul(&c("d3"), x), h.op("P1", x)?], d + 4),
            _ => unreachable!("generator {g} of {target}"),
        })
    };
    assemble(h, algebra, name, act)
}

/// Thom module of a vector bundle: `Sq^n(U·x) = Σ U·w_i Sq^j x`.
/// Works over A(0), A(1), A(2) and E(1); `Q1` acts as `Sq1 Sq2 + Sq2 Sq1`.
pub fn thom_module_from_sw(
    h: &CohomologyPresentation,
    w: &SwClassData,
    algebra: AlgebraRef,
) -> Result<GradedModule, TwistError> {
    if h.prime != Prime::TWO || algebra.prime() != Prime::TWO {
        return Err(TwistError::Algebra(algebra.name().to_string()));
    }
    let mut ws = vec![h.unit()];
    for i in 1..=4 {
        ws.push(class_of(h, &format!("w{i}"), w.get(i), i)?);
    }
    let total_sq = |n: i32, x: &Class| -> Class {
        (0..=n).fold(h.zero(x.degree + n), |acc, i| h.add(&acc, &h.mul(&ws[i as usize], &h.sq(n - i, x))))
    };
    let gen_names: Vec<String> = (0..algebra.num_generators()).map(|s| algebra.generator_name(s).to_string()).collect();
    for g in &gen_names {
        if !matches!(g.as_str(), "Sq1" | "Sq2" | "Sq4" | "Q0" | "Q1") {
            return Err(TwistError::Algebra(algebra.name().to_string()));
        }
    }
    let name = format!("Thom({})", h.name);
    let act = |slot: usize, x: &Class| -> Result<Class, TwistError> {
        Ok(match gen_names[slot].as_str() {
            "Sq1" | "Q0" => total_sq(1, x),
            "Sq2" => total_sq(2, x),
            "Sq4" => total_sq(4, x),
            "Q1" => h.add(&total_sq(1, &total_sq(2, x)), &total_sq(2, &total_sq(1, x))),
            g => unreachable!("generator {g}"),
        })
    };
    assemble(h, algebra, name, act)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cohomology::PolynomialPresentation;

    fn rp(d: i32) -> CohomologyPresentation {
        PolynomialPresentation::new("RP", Prime::TWO, d).generator("x", 1).build().unwrap()
    }

    #[test]
    fn hz_twist_by_w1_is_valid() {
        let h = rp(6);
        let m = build_twisted_module(&h, TwistTarget::Hz, &TwistData::default().with("a", "x")).unwrap();
        assert!(m.validate().is_valid());
        // Sq1(U) = U·x
        let (d, v) = m.parse_vector("U").unwrap();
        let alg = m.algebra().clone();
        let sq1 = alg.parse_element("Sq1").unwrap();
        assert_eq!(m.format_vector(d + 1, &m.act(&sq1, d, &v)), "U·x");
    }

    #[test]
    fn ku_q1_on_unit() {
        let h = rp(6);
        let m = build_twisted_module(&h, TwistTarget::Ku, &TwistData::default().with("a", "x")).unwrap();
        assert!(m.validate().is_valid());
        let q1 = m.algebra().parse_element("Q1").unwrap();
        let (_, v) = m.act_on_label(&q1, "U").unwrap();
        assert_eq!(m.format_vector(3, &v), "U·x^3");
    }

    #[test]
    fn sw_agrees_with_twist_formulas() {
        let h = rp(8);
        // 2 copies of the tautological line: w1 = 0, w2 = x^2
        let w = SwClassData { w2: Some("x^2".into()), ..Default::default() };
        let sw = thom_module_from_sw(&h, &w, algebra::a1()).unwrap();
        let tw = build_twisted_module(&h, TwistTarget::Ko, &TwistData::default().with("b", "x^2")).unwrap();
        let sw = sw.with_name(tw.name());
        assert_eq!(sw, tw);
    }

    #[test]
    fn wrong_degree_class_rejected() {
        let h = rp(4);
        let r = build_twisted_module(&h, TwistTarget::Ko, &TwistData::default().with("b", "x"));
        assert!(matches!(r, Err(TwistError::ClassDegree { .. })));
    }
}
