//! One line per acceptance criterion. Runs without the test harness so the
//! lines always show up in `cargo test` output.

mod common;

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use twext::algebra::{a0, a1, a2, atmf, build_milnor_subalgebra, e1, AlgebraRef, Element, MilnorProfile};
use twext::fp::Prime;
use twext::io;
use twext::module::GradedModule;
use twext::presets::{self, PresetKind, PRESETS};
use twext::resolution::{ext_ranks, minimal_resolution};
use twext::scenario::{run_scenario, Origin, ScenarioReport};
use twext::twist::{build_twisted_module, thom_label, thom_module_from_sw, SwClassData, TwistData, TwistTarget};

use common::Check;

/// Frozen output of the rewriting engine for A^tmf, degrees 0..=23.
const ATMF_DIMS: [usize; 24] = [1, 1, 0, 0, 1, 2, 1, 0, 1, 3, 2, 0, 0, 2, 3, 1, 0, 1, 2, 1, 0, 0, 1, 1];

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, budget: Duration) -> Result<String, String> {
    let el = start.elapsed();
    ensure(el <= budget, || format!("took {el:.1?}, budget {budget:?}"))?;
    Ok(format!("{el:.1?}"))
}

fn scenario(name: &str) -> Result<ScenarioReport, String> {
    let sc = presets::scenario(name).map_err(|e| e.to_string())?;
    let rep = run_scenario(&sc).map_err(|e| e.to_string())?;
    if let Some(bad) = rep.outcomes.iter().find(|o| o.passed == Some(false)) {
        return Err(format!("{name}: {} failed: {}", bad.label, bad.detail));
    }
    Ok(rep)
}

fn passed(rep: &ScenarioReport, prefix: &str) -> Result<(), String> {
    let hits: Vec<_> =
        rep.outcomes.iter().filter(|o| o.label == prefix || o.label.starts_with(&format!("{prefix} "))).collect();
    ensure(!hits.is_empty(), || format!("{}: no `{prefix}` check", rep.name))?;
    ensure(hits.iter().all(|o| o.passed == Some(true)), || format!("{}: `{prefix}` did not pass", rep.name))
}

fn groups(rep: &ScenarioReport) -> BTreeMap<i32, String> {
    rep.groups.iter().cloned().collect()
}

fn by_label(a: &AlgebraRef, label: &str) -> Result<Element, String> {
    (0..a.total_dim()).find(|&i| a.label(i) == label).map(|i| a.basis_element(i)).ok_or(format!("no basis element {label}"))
}

fn c1_algebra_dims() -> Check {
    // A(n) with profile (e_1, ..., e_k) has 2^(e_1 + ... + e_k) elements.
    for (a, profile) in [(a0(), vec![1u32]), (e1(), vec![1, 1]), (a1(), vec![2, 1]), (a2(), vec![3, 2, 1])] {
        let want = 1usize << profile.iter().sum::<u32>();
        ensure(a.total_dim() == want, || format!("{}: {} != {want}", a.name(), a.total_dim()))?;
        let rebuilt = build_milnor_subalgebra(&MilnorProfile::new(profile).unwrap()).map_err(|e| e.to_string())?;
        ensure(rebuilt.dims() == a.dims(), || format!("{} changed on rebuild", a.name()))?;
    }
    let via_profile = presets::algebra("e1").map_err(|e| e.to_string())?;
    let via_presentation = presets::algebra("e1-presented").map_err(|e| e.to_string())?;
    ensure(via_profile.dims() == via_presentation.dims(), || {
        format!("E(1) {:?} vs {:?}", via_profile.dims(), via_presentation.dims())
    })?;
    ensure(atmf().dims() == ATMF_DIMS, || format!("A^tmf dims {:?}", atmf().dims()))?;
    Ok(format!("2, 4, 8, 64; E(1) {:?} both ways; A^tmf total {}", via_profile.dims(), atmf().total_dim()))
}

fn c2_milnor_identity() -> Check {
    let a = a1();
    let parsed = a.parse_element("Sq1*Sq2 + Sq2*Sq1").map_err(|e| e.to_string())?;
    let q1 = by_label(&a, "Sq(0,1)")?;
    ensure(parsed == q1, || format!("Sq1Sq2 + Sq2Sq1 = {}", a.element_label(&parsed)))?;
    // Adem relation and Milnor matrices by hand: Sq(1)Sq(2) = Sq(3),
    // Sq(2)Sq(1) = Sq(3) + Sq(0,1).
    let (s1, s2, s3) = (by_label(&a, "Sq(1)")?, by_label(&a, "Sq(2)")?, by_label(&a, "Sq(3)")?);
    let p12 = a.multiply(&s1, &s2).element;
    let p21 = a.multiply(&s2, &s1).element;
    ensure(p12 == s3, || format!("Sq(1)Sq(2) = {}", a.element_label(&p12)))?;
    ensure(p21 == a.add(&s3, &q1), || format!("Sq(2)Sq(1) = {}", a.element_label(&p21)))?;
    Ok("Sq(1)Sq(2) + Sq(2)Sq(1) = Sq(0,1)".into())
}

fn c3_twisted_validity() -> Check {
    let mut targets = BTreeMap::new();
    let mut add = |m: &GradedModule| -> Result<(), String> {
        let rep = m.validate();
        ensure(rep.is_valid(), || format!("{}: {:?}", m.name(), rep.violations.first()))?;
        *targets.entry(m.algebra().name().to_string()).or_insert(0) += 1;
        Ok(())
    };
    for p in PRESETS.iter().filter(|p| p.kind == PresetKind::Scenario) {
        let sc = presets::scenario(p.name).map_err(|e| e.to_string())?;
        if let Some(v) = &sc.module {
            add(&io::module_from_json(v, "$", false).map_err(|e| format!("{}: {e}", p.name))?)?;
        }
    }
    let tmf2 = [
        ("cp2-cohomology", TwistData::default().with("gw", "alpha")),
        ("rp2xrp2-cohomology", TwistData::default().with("a", "x + y").with("gw", "x*y + y^2")),
        ("rp1xrp3-cohomology", TwistData::default().with("a", "x + y").with("gw", "x*y + y^2").with("delta", "x*y^3")),
    ];
    for (h, tw) in tmf2 {
        let h = presets::cohomology(h).map_err(|e| e.to_string())?;
        add(&build_twisted_module(&h, TwistTarget::Tmf2, &tw).map_err(|e| e.to_string())?)?;
    }
    let bad = presets::module("corrupted-sq1").map_err(|e| e.to_string())?.validate();
    ensure(bad.violations.iter().any(|v| v.relation == "Sq1*Sq1"), || format!("fixture: {:?}", bad.violations))?;
    let all: Vec<String> = targets.iter().map(|(k, n)| format!("{k} x{n}")).collect();
    Ok(format!("valid over {}; fixture fails on Sq1*Sq1", all.join(", ")))
}

fn c4_bundles() -> Check {
    let sw = |w: &[(&str, &str)]| {
        let mut d = SwClassData::default();
        for &(k, v) in w {
            let v = Some(v.to_string());
            match k {
                "w1" => d.w1 = v,
                "w2" => d.w2 = v,
                "w3" => d.w3 = v,
                _ => d.w4 = v,
            }
        }
        d
    };
    let act = |m: &GradedModule, op: &str| -> Result<String, String> {
        let x = m.algebra().parse_element(op).map_err(|e| e.to_string())?;
        let (d, v) = m.act_on_label(&x, &thom_label("1")).map_err(|e| e.to_string())?;
        Ok(m.format_vector(d, &v))
    };
    let cases: [(&str, Vec<(&str, &str)>, &str, &str); 4] = [
        ("cp2-cohomology", vec![("w2", "alpha")], "Sq2", "U·alpha"),
        ("cp2-cohomology", vec![("w2", "alpha")], "Sq4", "0"),
        ("rp2xrp2-cohomology", vec![("w1", "x + y"), ("w2", "x*y + y^2"), ("w3", "x*y^2")], "Sq4", "0"),
        ("rp1xrp3-cohomology", vec![("w1", "x + y"), ("w2", "x*y + y^2"), ("w3", "x*y^2 + y^3"), ("w4", "x*y^3")], "Sq4", "U·x*y^3"),
    ];
    for (h, w, op, want) in &cases {
        let hp = presets::cohomology(h).map_err(|e| e.to_string())?;
        let m = thom_module_from_sw(&hp, &sw(w), a2()).map_err(|e| e.to_string())?;
        let got = act(&m, op)?;
        ensure(got == *want, || format!("{h}: {op}(U) = {got}, expected {want}"))?;
    }
    let rep = scenario("bundle-cross-checks")?;
    passed(&rep, "sw-matches-twist")?;
    Ok(format!("Sq2 U = U·alpha, Sq4 U = 0 twice, Sq4 U = U·xy³; {} twist comparisons", rep.outcomes.iter().filter(|o| o.label.starts_with("sw-matches")).count()))
}

fn c5_u2_ku() -> Check {
    let start = Instant::now();
    let h = presets::cohomology("u2-cohomology").map_err(|e| e.to_string())?;
    let tw = TwistData::default().with("a", "b1").with("c2", "b3");
    let m = build_twisted_module(&h, TwistTarget::Ku, &tw).map_err(|e| e.to_string())?;
    let r = minimal_resolution(Arc::new(m), 10, 10).map_err(|e| e.to_string())?;
    let ranks = ext_ranks(&r).ranks;
    ensure(ranks == BTreeMap::from([((0, 0), 1)]), || format!("ranks {ranks:?}"))?;
    let rep = scenario("u2-ku")?;
    passed(&rep, "ranks")?;
    Ok(format!("single F_2 at (0, 0) in s ≤ 10, t ≤ 10; {}", within(start, Duration::from_secs(5))?))
}

fn c6_u_duality() -> Check {
    let start = Instant::now();
    let rep = scenario("u-duality-su8")?;
    for prefix in ["valid", "thom-action", "stem-ranks", "collapse", "groups"] {
        passed(&rep, prefix)?;
    }
    let g = groups(&rep);
    let want = ["ℤ", "0", "0", "0", "ℤ²", "ℤ/2"];
    for (stem, w) in want.iter().enumerate() {
        ensure(g.get(&(stem as i32)).map(String::as_str) == Some(*w), || format!("stem {stem}: {:?}", g.get(&(stem as i32))))?;
    }
    let sq3 = rep.outcome("thom-action-report").ok_or("no Sq3(Uc) report")?;
    Ok(format!("{}; Sq3(U·c): {}; {}", want.join(", "), sq3.detail, within(start, Duration::from_secs(10))?))
}

fn c7_pin() -> Check {
    let minus = groups(&scenario("pin-minus")?);
    let c = groups(&scenario("pin-c")?);
    let get = |g: &BTreeMap<i32, String>, s: i32| g.get(&s).cloned().unwrap_or_default();
    ensure(get(&minus, 0) == "ℤ/2" && get(&minus, 2) == "ℤ/8", || format!("Pin-: {minus:?}"))?;
    ensure(get(&c, 0) == "ℤ/2" && get(&c, 2) == "ℤ/4", || format!("Pin^c: {c:?}"))?;
    Ok("Pin⁻: ℤ/2, ℤ/8; Pin^c: ℤ/2, ℤ/4".into())
}

fn c8_w_tensor() -> Check {
    let rep = scenario("w3-tensor")?;
    passed(&rep, "tensor-ranks")?;
    Ok(rep.outcome("tensor-ranks").map(|o| o.detail.clone()).unwrap_or_default())
}

fn c9_tmf3() -> Check {
    let start = Instant::now();
    let ground = scenario("tmf3-ground")?;
    passed(&ground, "ext-generators")?;
    passed(&ground, "product")?;
    let mut les = Vec::new();
    for name in ["tmf3-cnu-ses", "tmf3-qn-ses", "tmf3-2qn-ses"] {
        let rep = scenario(name)?;
        passed(&rep, "ranks")?;
        passed(&rep, "les")?;
        les.push(name);
    }
    Ok(format!("generators, α² = h0α = 0, Hom vanishing, LES on {}; {}", les.len(), within(start, Duration::from_secs(120))?))
}

fn c10_heterotic() -> Check {
    let start = Instant::now();
    let rep = scenario("heterotic-e8")?;
    for prefix in ["valid", "dims-match", "h0-injective", "collapse"] {
        passed(&rep, prefix)?;
    }
    Ok(format!("dims match N2 ⊕ Σ⁸N1 ⊕ Σ⁸N1 through 11, h0 injective, collapse; {}", within(start, Duration::from_secs(180))?))
}

fn c11_properties() -> Check {
    let parts = [
        common::rank_nullity(Prime::TWO, 10_000, 2)?,
        common::rank_nullity(Prime::THREE, 10_000, 3)?,
        common::associativity(11, 2000)?,
        common::audits()?,
        common::rendering_suite()?,
        common::roundtrips()?,
    ];
    Ok(parts.join("; "))
}

fn main() {
    let criteria: [(u32, &str, Origin, fn() -> Check); 11] = [
        (1, "algebra dimensions", Origin::Published, c1_algebra_dims),
        (2, "Milnor identity", Origin::Published, c2_milnor_identity),
        (3, "twisted-module validity", Origin::Published, c3_twisted_validity),
        (4, "vector-bundle cross-checks", Origin::Published, c4_bundles),
        (5, "ku over U(2)", Origin::Published, c5_u2_ku),
        (6, "U-duality bordism", Origin::Published, c6_u_duality),
        (7, "Pin⁻ / Pin^c", Origin::Published, c7_pin),
        (8, "W-module corollary", Origin::Published, c8_w_tensor),
        (9, "3-primary tmf suite", Origin::Published, c9_tmf3),
        (10, "heterotic at 3", Origin::Published, c10_heterotic),
        (11, "property suites", Origin::HandDerived, c11_properties),
    ];
    let mut failed = 0;
    for (n, title, origin, f) in criteria {
        match f() {
            Ok(detail) => println!("criterion {n:>2} PASS {title} [{origin}]: {detail}"),
            Err(e) => {
                failed += 1;
                println!("criterion {n:>2} FAIL {title} [{origin}]: {e}");
            }
        }
    }
    println!("{} of 11 criteria pass", 11 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
