//! The shipped corpus: algebras, cohomology rings, modules and scenarios,
//! embedded as JSON documents.

use serde_json::Value;

use crate::algebra::AlgebraRef;
use crate::cohomology::CohomologyPresentation;
use crate::io::{self, Document, IoError};
use crate::module::GradedModule;
use crate::scenario::Scenario;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PresetKind {
    Algebra,
    Cohomology,
    Module,
    Ses,
    Scenario,
}

impl PresetKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PresetKind::Algebra => "algebra",
            PresetKind::Cohomology => "cohomology",
            PresetKind::Module => "module",
            PresetKind::Ses => "short-exact-sequence",
            PresetKind::Scenario => "twist-scenario",
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Preset {
    pub name: &'static str,
    pub kind: PresetKind,
    /// Deliberately broken test fixture; loaded without validation.
    pub fixture: bool,
    pub source: &'static str,
}

macro_rules! preset {
    ($name:literal, $kind:ident, $file:literal) => {
        Preset { name: $name, kind: PresetKind::$kind, fixture: false, source: include_str!(concat!("../presets/", $file)) }
    };
    ($name:literal, $kind:ident, $file:literal, fixture) => {
        Preset { name: $name, kind: PresetKind::$kind, fixture: true, source: include_str!(concat!("../presets/", $file)) }
    };
}

pub const PRESETS: &[Preset] = &[
    preset!("a0", Algebra, "algebras/a0.json"),
    preset!("e1", Algebra, "algebras/e1.json"),
    preset!("e1-presented", Algebra, "algebras/e1-presented.json"),
    preset!("a1", Algebra, "algebras/a1.json"),
    preset!("a2", Algebra, "algebras/a2.json"),
    preset!("atmf", Algebra, "algebras/atmf.json"),
    preset!("su8-cohomology", Cohomology, "cohomology/su8.json"),
    preset!("su8-cohomology-formal7", Cohomology, "cohomology/su8-formal7.json"),
    preset!("e8-mod3-cohomology", Cohomology, "cohomology/e8-mod3.json"),
    preset!("u2-cohomology", Cohomology, "cohomology/u2.json"),
    preset!("bz2-cohomology", Cohomology, "cohomology/bz2.json"),
    preset!("cp2-cohomology", Cohomology, "cohomology/cp2.json"),
    preset!("rp2xrp2-cohomology", Cohomology, "cohomology/rp2xrp2.json"),
    preset!("rp1xrp3-cohomology", Cohomology, "cohomology/rp1xrp3.json"),
    preset!("a1-seagull", Module, "modules/a1-seagull.json"),
    preset!("c-eta", Module, "modules/c-eta.json"),
    preset!("corrupted-sq1", Module, "modules/corrupted-sq1.json", fixture),
    preset!("atmf-cnu", Module, "modules/atmf-cnu.json"),
    preset!("atmf-n1", Module, "modules/atmf-n1.json"),
    preset!("atmf-n2", Module, "modules/atmf-n2.json"),
    preset!("w1", Module, "modules/w1.json"),
    preset!("w2", Module, "modules/w2.json"),
    preset!("w3", Module, "modules/w3.json"),
    preset!("atmf-cnu-ses", Ses, "ses/atmf-cnu-ses.json"),
    preset!("atmf-qn-ses", Ses, "ses/atmf-qn-ses.json"),
    preset!("atmf-2qn-ses", Ses, "ses/atmf-2qn-ses.json"),
    preset!("u-duality-su8", Scenario, "scenarios/u-duality-su8.json"),
    preset!("u2-ku", Scenario, "scenarios/u2-ku.json"),
    preset!("pin-minus", Scenario, "scenarios/pin-minus.json"),
    preset!("pin-c", Scenario, "scenarios/pin-c.json"),
    preset!("hz-bz2", Scenario, "scenarios/hz-bz2.json"),
    preset!("heterotic-e8", Scenario, "scenarios/heterotic-e8.json"),
    preset!("tmf3-ground", Scenario, "scenarios/tmf3-ground.json"),
    preset!("tmf3-cnu-ses", Scenario, "scenarios/tmf3-cnu-ses.json"),
    preset!("tmf3-qn-ses", Scenario, "scenarios/tmf3-qn-ses.json"),
    preset!("tmf3-2qn-ses", Scenario, "scenarios/tmf3-2qn-ses.json"),
    preset!("bundle-cross-checks", Scenario, "scenarios/bundle-cross-checks.json"),
    preset!("w3-tensor", Scenario, "scenarios/w3-tensor.json"),
];

pub fn find(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}

fn lookup(name: &str, kind: PresetKind) -> Result<(&'static Preset, Value), IoError> {
    let p = find(name).filter(|p| p.kind == kind).ok_or_else(|| IoError::UnknownPreset(name.to_string()))?;
    Ok((p, io::parse_json(p.source)?))
}

/// A shipped algebra, by preset name or by its own name (`A(1)`, ...).
pub fn algebra(name: &str) -> Result<AlgebraRef, IoError> {
    if let Some(a) = crate::algebra::by_name(name) {
        return Ok(a);
    }
    let (_, v) = lookup(name, PresetKind::Algebra)?;
    io::algebra_from_json(&v, "$", true)
}

pub fn cohomology(name: &str) -> Result<CohomologyPresentation, IoError> {
    let (_, v) = lookup(name, PresetKind::Cohomology)?;
    io::cohomology_from_json(&v, "$", true)
}

/// A shipped module. Everything but test fixtures is validated.
pub fn module(name: &str) -> Result<GradedModule, IoError> {
    let (p, v) = lookup(name, PresetKind::Module)?;
    let m = io::module_from_json(&v, "$", true)?;
    if !p.fixture {
        let rep = m.validate();
        if let Some(bad) = rep.violations.first() {
            return Err(IoError::Invalid {
                path: format!("preset {name}"),
                message: format!("fails validation: {} in degree {}", bad.relation, bad.degree),
            });
        }
    }
    Ok(m)
}

pub fn ses(name: &str) -> Result<io::ShortExactSequence, IoError> {
    let (_, v) = lookup(name, PresetKind::Ses)?;
    io::ses_from_json(&v, "$", true)
}

pub fn scenario(name: &str) -> Result<Scenario, IoError> {
    let (_, v) = lookup(name, PresetKind::Scenario)?;
    crate::scenario::scenario_from_json(&v, "$")
}

/// Load any preset as a validated document.
pub fn load_preset(name: &str) -> Result<Document, IoError> {
    let p = find(name).ok_or_else(|| IoError::UnknownPreset(name.to_string()))?;
    Ok(match p.kind {
        PresetKind::Algebra => Document::Algebra(algebra(name)?),
        PresetKind::Cohomology => Document::Cohomology(cohomology(name)?),
        PresetKind::Module => Document::Module(module(name)?),
        PresetKind::Ses => Document::Ses(ses(name)?),
        PresetKind::Scenario => Document::Scenario(scenario(name)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_loads() {
        for p in PRESETS {
            if let Err(e) = load_preset(p.name) {
                panic!("{}: {e}", p.name);
            }
        }
    }

    #[test]
    fn module_supports() {
        assert_eq!(module("a1-seagull").unwrap().support(), vec![0, 2, 3, 5]);
        assert_eq!(module("atmf-n1").unwrap().support(), vec![0, 4, 5]);
    }

    /// Monomials in polynomial generators of the given degrees.
    fn monomials(gens: &[i32], d: i32) -> usize {
        match gens.split_first() {
            None => usize::from(d == 0),
            Some((&g, rest)) => (0..=d / g).map(|k| monomials(rest, d - k * g)).sum(),
        }
    }

    #[test]
    fn su8_dims_count_monomials() {
        let h = cohomology("su8-cohomology").unwrap();
        let want: Vec<usize> = (0..=6).map(|d| monomials(&[2, 3, 4, 5, 6], d)).collect();
        assert_eq!(want, vec![1, 0, 1, 1, 2, 2, 4]);
        assert_eq!(h.dims(), want);
    }

    #[test]
    fn fixture_is_invalid() {
        assert!(!module("corrupted-sq1").unwrap().validate().is_valid());
    }
}
