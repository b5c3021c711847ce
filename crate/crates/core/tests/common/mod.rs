//! Property checks shared by the property suites and the acceptance run.
//! Each returns a short summary on success.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use twext::algebra::{a1, a2, atmf, e1, AlgebraRef};
use twext::fp::{FpMatrix, Prime};
use twext::io;
use twext::module::GradedModule;
use twext::presets;
use twext::render::{emit_ascii, emit_svg, stem_range, ChartStyle};
use twext::resolution::chart::chart_with_products;
use twext::resolution::{ext_ranks, ground_resolution, minimal_resolution, ExtChart, FreeResolution};

pub type Check = Result<String, String>;

/// Rank by plain Gaussian elimination on a copy, kept separate from the
/// library's packed implementation.
pub fn naive_rank(p: u32, rows: &[Vec<u8>]) -> usize {
    let mut m: Vec<Vec<u32>> = rows.iter().map(|r| r.iter().map(|&x| x as u32).collect()).collect();
    let cols = m.first().map_or(0, Vec::len);
    let inv = |a: u32| (1..p).find(|b| a * b % p == 1).unwrap();
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..m.len()).find(|&i| m[i][c] != 0) else { continue };
        m.swap(rank, piv);
        let k = inv(m[rank][c]);
        for x in m[rank].iter_mut() {
            *x = *x * k % p;
        }
        for i in 0..m.len() {
            if i != rank && m[i][c] != 0 {
                let f = m[i][c];
                for j in 0..cols {
                    m[i][j] = (m[i][j] + p * p - f * m[rank][j]) % p;
                }
            }
        }
        rank += 1;
    }
    rank
}

pub fn random_matrix(rng: &mut ChaCha8Rng, p: Prime, rows: usize, cols: usize) -> FpMatrix {
    let density: f64 = rng.gen_range(0.05..1.0);
    let data: Vec<Vec<u8>> = (0..rows)
        .map(|_| (0..cols).map(|_| if rng.gen_bool(density) { rng.gen_range(1..p.value()) as u8 } else { 0 }).collect())
        .collect();
    FpMatrix::from_rows(p, cols, &data).unwrap()
}

/// Rank plus nullity equals the column count, kernel vectors are killed
/// and independent, and the rank agrees with [`naive_rank`] and with the
/// transpose.
pub fn rank_nullity(p: Prime, count: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for n in 0..count {
        let big = n % 50 == 0;
        let hi = if big { 90 } else { 20 };
        let (r, c) = (rng.gen_range(0..=hi), rng.gen_range(0..=hi));
        let m = random_matrix(&mut rng, p, r, c);
        let rank = m.rank();
        let k = m.kernel_basis();
        if rank + k.rows() != c {
            return Err(format!("{r}x{c}: rank {rank} + nullity {} != {c}", k.rows()));
        }
        for v in k.to_rows() {
            if m.mul_vec(&v).iter().any(|&x| x != 0) {
                return Err(format!("{r}x{c}: kernel vector not killed"));
            }
        }
        if k.rank() != k.rows() {
            return Err(format!("{r}x{c}: kernel basis dependent"));
        }
        let oracle = naive_rank(p.value(), &m.to_rows());
        if oracle != rank || m.transpose().rank() != rank {
            return Err(format!("{r}x{c}: rank {rank}, oracle {oracle}"));
        }
    }
    Ok(format!("{count} matrices over F_{}", p.value()))
}

/// Exhaustive for small algebras, sampled for the rest.
pub fn associativity(seed: u64, samples: usize) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut total = 0;
    for a in [e1(), a1(), a2(), atmf()] {
        let n = a.total_dim();
        if n <= 8 {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        total += 1;
                        if !a.associative_on(i, j, k) {
                            return Err(format!("{}: ({i}, {j}, {k})", a.name()));
                        }
                    }
                }
            }
        } else {
            for _ in 0..samples {
                let (i, j, k) = (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n));
                total += 1;
                if !a.associative_on(i, j, k) {
                    return Err(format!("{}: ({i}, {j}, {k})", a.name()));
                }
            }
        }
    }
    Ok(format!("{total} triples"))
}

/// Resolutions exercised by the audit suite.
pub fn audit_targets() -> Vec<(String, FreeResolution)> {
    let mut out = Vec::new();
    let grounds: [(AlgebraRef, usize, i32); 4] = [(e1(), 6, 16), (a1(), 6, 20), (a2(), 4, 14), (atmf(), 4, 20)];
    for (a, s, t) in grounds {
        out.push((format!("F_p over {}", a.name()), ground_resolution(a, s, t)));
    }
    for name in ["a1-seagull", "c-eta", "atmf-n1", "atmf-n2", "w3"] {
        let m = Arc::new(presets::module(name).unwrap());
        let t = m.truncation().unwrap_or(m.min_degree() + 16);
        out.push((name.to_string(), minimal_resolution(m, 5, t).unwrap()));
    }
    out
}

pub fn audits() -> Check {
    let mut cells = 0;
    let targets = audit_targets();
    for (name, r) in &targets {
        let rep = r.audit();
        if !rep.passed() {
            return Err(format!("{name}: {:?}", rep.failures));
        }
        cells += rep.cells_checked;
    }
    Ok(format!("{} resolutions, {cells} cells", targets.len()))
}

/// `(stem, s) -> rank` as printed, with `None` for masked cells.
pub fn parse_ascii(text: &str, lo: i32) -> Result<BTreeMap<(i32, usize), Option<usize>>, String> {
    let mut out = BTreeMap::new();
    for line in text.lines() {
        let Some((head, body)) = line.split_once('|') else { continue };
        let Ok(s) = head.trim().parse::<usize>() else { continue };
        let chars: Vec<char> = body.chars().collect();
        for (k, pair) in chars.chunks(2).enumerate() {
            let c = *pair.get(1).unwrap_or(&' ');
            let v = match c {
                ' ' => Some(0),
                '?' => None,
                '#' => Some(10),
                d => Some(d.to_digit(10).ok_or_else(|| format!("bad cell `{d}`"))? as usize),
            };
            out.insert((lo + k as i32, s), v);
        }
    }
    Ok(out)
}

/// Circles per `(stem, s)` in an SVG chart; the document must be
/// well-formed XML.
pub fn svg_dots(svg: &str) -> Result<BTreeMap<(i32, usize), usize>, String> {
    let doc = roxmltree::Document::parse(svg).map_err(|e| e.to_string())?;
    let mut out = BTreeMap::new();
    for n in doc.descendants().filter(|n| n.has_tag_name("circle")) {
        let stem: i32 = n.attribute("data-stem").ok_or("circle without data-stem")?.parse().map_err(|_| "bad stem")?;
        let s: usize = n.attribute("data-s").ok_or("circle without data-s")?.parse().map_err(|_| "bad s")?;
        *out.entry((stem, s)).or_insert(0) += 1;
    }
    Ok(out)
}

/// Both renderings describe the rank function of the chart.
pub fn renderings_agree(c: &ExtChart) -> Check {
    let (lo, hi) = stem_range(c);
    let ascii = parse_ascii(&emit_ascii(c), lo)?;
    let dots = svg_dots(&emit_svg(c, &ChartStyle::for_prime(c.prime)))?;
    for s in 0..=c.s_max {
        for stem in lo..=hi {
            let want = c.at(stem, s);
            let got = ascii.get(&(stem, s)).copied().unwrap_or(Some(0));
            let shown = want.map(|n| n.min(10));
            if got != shown {
                return Err(format!("{}: ascii ({stem}, {s}) shows {got:?}, chart has {want:?}", c.name));
            }
            let d = dots.get(&(stem, s)).copied().unwrap_or(0);
            if d != want.unwrap_or(0) {
                return Err(format!("{}: svg ({stem}, {s}) has {d} dots, chart has {want:?}", c.name));
            }
        }
    }
    let total: usize = dots.values().sum();
    if total != c.total_rank() {
        return Err(format!("{}: {total} dots for total rank {}", c.name, c.total_rank()));
    }
    Ok(format!("{}: {} cells", c.name, ascii.len()))
}

pub fn rendering_suite() -> Check {
    let mut charts = vec![ExtChart::new("empty", Prime::TWO, 3, 3)];
    for name in ["a1-seagull", "c-eta", "atmf-n2"] {
        let m = Arc::new(presets::module(name).unwrap());
        let t = m.truncation().unwrap_or(16);
        let r = minimal_resolution(m, 5, t).unwrap();
        charts.push(chart_with_products(&r, &["h0"]).unwrap());
    }
    charts.push(ext_ranks(&ground_resolution(a1(), 12, 24)));
    let mut n = 0;
    for c in &charts {
        renderings_agree(c)?;
        n += 1;
    }
    Ok(format!("{n} charts"))
}

/// Save, load and compare documents of every kind.
pub fn roundtrips() -> Check {
    for a in [a1(), e1(), atmf()] {
        let v = io::algebra_to_json(&a);
        let back = io::algebra_from_json(&io::parse_json(&io::to_json_string(&v)).unwrap(), "$", true).map_err(|e| e.to_string())?;
        if io::AlgebraDoc::from_algebra(&back) != io::AlgebraDoc::from_algebra(&a) {
            return Err(format!("{} changed in a round trip", a.name()));
        }
    }
    let sc = presets::scenario("u-duality-su8").unwrap();
    let m: GradedModule = io::module_from_json(sc.module.as_ref().unwrap(), "$", false).map_err(|e| e.to_string())?;
    let mv = io::module_to_json(&m);
    let m2 = io::module_from_json(&mv, "$", true).map_err(|e| e.to_string())?;
    if io::module_to_json(&m2) != mv {
        return Err("module changed in a round trip".into());
    }
    let m = Arc::new(m);
    let r = minimal_resolution(m.clone(), 6, 6).unwrap();
    let text = io::to_json_string(&io::resolution_to_json(&r));
    let r2 = io::resolution_from_json(&io::parse_json(&text).unwrap(), Some(m)).map_err(|e| e.to_string())?;
    if r2 != r {
        return Err("resolution changed in a round trip".into());
    }
    let c = chart_with_products(&r, &["h0", "h1"]).unwrap();
    let c2 = io::chart_from_json(&io::chart_to_json(&c)).map_err(|e| e.to_string())?;
    if c2 != c {
        return Err("chart changed in a round trip".into());
    }
    let sv = twext::scenario::scenario_to_json(&sc);
    if twext::scenario::scenario_from_json(&sv, "$").map_err(|e| e.to_string())? != sc {
        return Err("scenario changed in a round trip".into());
    }
    Ok("algebra, module, resolution, chart, scenario".into())
}
