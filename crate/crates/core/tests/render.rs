mod common;

use std::sync::Arc;

use twext::algebra::{a1, atmf};
use twext::fp::Prime;
use twext::presets;
use twext::render::{emit_ascii, emit_svg, ChartStyle};
use twext::resolution::chart::chart_with_products;
use twext::resolution::{ground_resolution, minimal_resolution, ExtChart};

#[test]
fn ascii_and_svg_agree_with_chart() {
    common::rendering_suite().unwrap();
}

#[test]
fn empty_chart_renders() {
    let c = ExtChart::new("nothing", Prime::THREE, 2, 2);
    let svg = emit_svg(&c, &ChartStyle::for_prime(Prime::THREE));
    assert!(common::svg_dots(&svg).unwrap().is_empty());
    let a = emit_ascii(&c);
    assert_eq!(a.lines().last().unwrap().trim(), "0 1 2");
}

#[test]
fn output_is_deterministic() {
    let r = ground_resolution(a1(), 6, 14);
    let c1 = chart_with_products(&r, &["h0", "h1"]).unwrap();
    let c2 = chart_with_products(&ground_resolution(a1(), 6, 14), &["h0", "h1"]).unwrap();
    let st = ChartStyle::for_prime(Prime::TWO);
    assert_eq!(emit_svg(&c1, &st), emit_svg(&c2, &st));
    assert_eq!(emit_ascii(&c1), emit_ascii(&c2));
}

fn lines_of_class(svg: &str, class: &str) -> Vec<(f64, f64, f64, f64)> {
    let doc = roxmltree::Document::parse(svg).unwrap();
    doc.descendants()
        .filter(|n| n.has_tag_name("line") && n.attribute("class") == Some(class))
        .map(|n| {
            let f = |k: &str| n.attribute(k).unwrap().parse::<f64>().unwrap();
            (f("x1"), f("y1"), f("x2"), f("y2"))
        })
        .collect()
}

#[test]
fn h0_edges_are_vertical_and_h1_edges_diagonal() {
    let c = chart_with_products(&ground_resolution(a1(), 5, 10), &["h0", "h1"]).unwrap();
    let svg = emit_svg(&c, &ChartStyle::for_prime(Prime::TWO));
    let h0 = lines_of_class(&svg, "h0");
    assert!(!h0.is_empty());
    assert!(h0.iter().all(|&(x1, y1, x2, y2)| (x1 - x2).abs() < 1e-9 && y2 < y1));
    let h1 = lines_of_class(&svg, "h1");
    assert!(!h1.is_empty());
    assert!(h1.iter().all(|&(x1, y1, x2, y2)| x2 > x1 && y2 < y1));
}

#[test]
fn alpha_edges_at_three() {
    let c = chart_with_products(&ground_resolution(atmf(), 4, 16), &["h0", "alpha"]).unwrap();
    let svg = emit_svg(&c, &ChartStyle::for_prime(Prime::THREE));
    // The h0-tower in stem 0 carries edges.
    assert!(!lines_of_class(&svg, "h0").is_empty());
    common::renderings_agree(&c).unwrap();
}

#[test]
fn seagull_chart_has_no_masked_low_cells() {
    let m = Arc::new(presets::module("a1-seagull").unwrap());
    let c = chart_with_products(&minimal_resolution(m, 4, 12).unwrap(), &["h0"]).unwrap();
    for stem in 0..=8 {
        for s in 0..=4 {
            assert!(c.at(stem, s).is_some(), "({stem}, {s})");
        }
    }
    common::renderings_agree(&c).unwrap();
}
