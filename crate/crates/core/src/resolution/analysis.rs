//! Reading a chart: possible differentials, groups, and long exact
//! sequences.

use std::fmt;

use serde::Serialize;

use crate::fp::{FpMatrix, Prime, RowReduction};
use crate::module::ModuleMap;

use super::chain::induced_ext_map;
use super::chart::ExtChart;
use super::{FreeResolution, ResolutionError};

/// A differential `d_r` that bidegrees alone do not rule out, in Adams
/// coordinates `(stem, s)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct PossibleDifferential {
    pub r: usize,
    pub source: (i32, usize),
    pub target: (i32, usize),
}

struct H0View<'a> {
    chart: &'a ExtChart,
}

impl H0View<'_> {
    fn dim(&self, stem: i32, s: usize) -> usize {
        self.chart.at(stem, s).unwrap_or(0)
    }

    /// `h0` out of `(stem, s)`; `None` when the next cell is masked or no
    /// product data is present.
    fn out(&self, stem: i32, s: usize) -> Option<FpMatrix> {
        let next = self.chart.at(stem, s + 1)?;
        let n = self.dim(stem, s);
        if n == 0 || next == 0 {
            return Some(FpMatrix::zeros(self.chart.prime, n, next));
        }
        self.chart.product("h0", s, stem + s as i32).cloned()
    }

    /// Injective, or the next cell is masked (a tower reaching the edge of
    /// the trust region is taken to continue).
    fn injective(&self, stem: i32, s: usize) -> bool {
        match self.out(stem, s) {
            Some(m) => m.rank() == m.rows(),
            None => true,
        }
    }

    fn kills(&self, stem: i32, s: usize) -> bool {
        self.out(stem, s).is_some_and(|m| m.is_zero())
    }

    /// Every class of `(stem, s)` is `h0` times something.
    fn divisible(&self, stem: i32, s: usize) -> bool {
        s > 0 && self.out(stem, s - 1).is_some_and(|m| m.rank() == self.dim(stem, s))
    }
}

/// Pairs of nonzero, unmasked cells joined by a possible `d_r`,
/// `2 <= r <= r_max`. With `use_h0_linearity`, candidates incompatible with
/// `d(h0 x) = h0 d(x)` are dropped: an `h0`-torsion source cannot hit a
/// cell on which `h0` is injective, and an `h0`-divisible source whose
/// predecessor cannot support the corresponding differential is a cycle.
pub fn collapse_check(chart: &ExtChart, r_max: usize, use_h0_linearity: bool) -> Vec<PossibleDifferential> {
    let view = H0View { chart };
    let have_h0 = chart.products.contains_key("h0");
    let mut survivors: Vec<PossibleDifferential> = Vec::new();
    let mut cells: Vec<(i32, usize)> = chart.ranks.keys().map(|&(s, t)| (t - s as i32, s)).collect();
    cells.sort_by_key(|&(stem, s)| (s, stem));
    for (stem, s) in cells {
        if chart.at(stem, s).unwrap_or(0) == 0 {
            continue;
        }
        for r in 2..=r_max {
            let (ts, tt) = (stem - 1, s + r);
            if chart.at(ts, tt).unwrap_or(0) == 0 {
                continue;
            }
            if use_h0_linearity && have_h0 {
                if view.kills(stem, s) && view.injective(ts, tt) {
                    continue;
                }
                if view.divisible(stem, s) {
                    let below_target = chart.at(ts, tt - 1);
                    let below_alive = survivors.iter().any(|d| d.r == r && d.source == (stem, s - 1));
                    if below_target.is_some() && !below_alive {
                        continue;
                    }
                }
            }
            survivors.push(PossibleDifferential { r, source: (stem, s), target: (ts, tt) });
        }
    }
    survivors.sort();
    survivors
}

/// Whether `h0` is injective on cell `(stem, s)`. A masked successor
/// counts as injective.
pub fn h0_injective(chart: &ExtChart, stem: i32, s: usize) -> bool {
    H0View { chart }.injective(stem, s)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum GroupSummand {
    /// `Z_p` (an `h0`-tower).
    Integral,
    /// `Z/p^k`.
    Cyclic(u32),
}

/// Group read off one stem, assuming collapse and no hidden extensions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StemGroup {
    pub stem: i32,
    pub prime: u32,
    pub summands: Vec<GroupSummand>,
    /// Highest filtration inspected; strings reaching it count as towers.
    pub s_bound: usize,
    pub assumes_collapse: bool,
}

fn superscript(n: usize) -> String {
    const DIGITS: [char; 10] = ['⁰', '¹', '²', '³', '⁴', '⁵', '⁶', '⁷', '⁸', '⁹'];
    n.to_string().chars().map(|c| DIGITS[c.to_digit(10).unwrap() as usize]).collect()
}

impl StemGroup {
    pub fn is_zero(&self) -> bool {
        self.summands.is_empty()
    }

    pub fn integral_rank(&self) -> usize {
        self.summands.iter().filter(|s| **s == GroupSummand::Integral).count()
    }

    /// Orders `p^k` of the finite cyclic summands, sorted.
    pub fn torsion(&self) -> Vec<u64> {
        let mut v: Vec<u64> = self
            .summands
            .iter()
            .filter_map(|s| match s {
                GroupSummand::Cyclic(k) => Some((self.prime as u64).pow(*k)),
                _ => None,
            })
            .collect();
        v.sort_unstable();
        v
    }

    /// Plain ASCII, e.g. `Z^2 + Z/2`.
    pub fn to_ascii(&self) -> String {
        self.render("Z", |n| format!("^{n}"), " + ")
    }

    fn render(&self, z: &str, power: impl Fn(usize) -> String, plus: &str) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut parts = Vec::new();
        let n = self.integral_rank();
        if n == 1 {
            parts.push(z.to_string());
        } else if n > 1 {
            parts.push(format!("{z}{}", power(n)));
        }
        let tors = self.torsion();
        let mut i = 0;
        while i < tors.len() {
            let j = tors[i..].iter().take_while(|&&o| o == tors[i]).count();
            let base = format!("{z}/{}", tors[i]);
            parts.push(if j == 1 { base } else { format!("({base}){}", power(j)) });
            i += j;
        }
        parts.join(plus)
    }
}

impl fmt::Display for StemGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render("ℤ", superscript, " ⊕ "))
    }
}

/// Decompose the `h0`-strings of a stem. Needs `h0` products on the chart.
pub fn read_off_groups(chart: &ExtChart, stem: i32, s_bound: Option<usize>) -> Result<StemGroup, ResolutionError> {
    let ceiling = chart.ceiling(stem);
    let bound = s_bound.or(ceiling).unwrap_or(0);
    if ceiling.is_none_or(|c| bound > c) {
        return Err(ResolutionError::RaiseTMax {
            stem,
            s_bound: bound,
            ceiling: ceiling.map_or(-1, |c| c as i64),
            needed_t: stem + bound as i32,
        });
    }
    let view = H0View { chart };
    let dims: Vec<usize> = (0..=bound).map(|s| view.dim(stem, s)).collect();
    let mut maps = Vec::new();
    for s in 0..bound {
        let m = view.out(stem, s).unwrap_or_else(|| FpMatrix::zeros(chart.prime, dims[s], dims[s + 1]));
        if dims[s] > 0 && dims[s + 1] > 0 && !chart.products.contains_key("h0") {
            return Err(ResolutionError::Other("h0 products are needed to read off groups".into()));
        }
        maps.push(m);
    }
    // rank of h0^{b-a} from cell a to cell b
    let rank = |a: i64, b: i64| -> i64 {
        if a < 0 || b > bound as i64 || a > b {
            return 0;
        }
        let (a, b) = (a as usize, b as usize);
        if a == b {
            return dims[a] as i64;
        }
        let mut m = maps[a].clone();
        for k in a + 1..b {
            m = m.matmul(&maps[k]);
        }
        m.rank() as i64
    };
    let mut summands = Vec::new();
    for a in 0..=bound as i64 {
        for b in a..=bound as i64 {
            let count = rank(a, b) - rank(a - 1, b) - rank(a, b + 1) + rank(a - 1, b + 1);
            for _ in 0..count.max(0) {
                summands.push(if b == bound as i64 {
                    GroupSummand::Integral
                } else {
                    GroupSummand::Cyclic((b - a + 1) as u32)
                });
            }
        }
    }
    Ok(StemGroup { stem, prime: chart.prime.value(), summands, s_bound: bound, assumes_collapse: true })
}

/// One bidegree of the long exact sequence of `0 -> A -> B -> C -> 0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LesCell {
    pub s: usize,
    pub t: i32,
    pub dim_sub: usize,
    pub dim_mid: usize,
    pub dim_quot: usize,
    /// Rank of `Ext(B) -> Ext(A)`.
    pub rank_sub: usize,
    /// Rank of `Ext(C) -> Ext(B)`.
    pub rank_quot: usize,
    pub composite_zero: bool,
    pub exact_at_mid: bool,
    /// Forced rank of `Ext^{s,t}(A) -> Ext^{s+1,t}(C)`.
    pub connecting_rank: usize,
    /// Whether `ker(Ext^{s+1,t}(C) -> Ext^{s+1,t}(B))` has exactly that
    /// rank; `None` when `s + 1` is outside the window.
    pub exact_at_quot: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LesReport {
    pub cells: Vec<LesCell>,
    pub problems: Vec<String>,
}

impl LesReport {
    pub fn passed(&self) -> bool {
        self.problems.is_empty()
    }

    pub fn connecting_rank(&self, s: usize, t: i32) -> Option<usize> {
        self.cells.iter().find(|c| c.s == s && c.t == t).map(|c| c.connecting_rank)
    }
}

/// Exactness audit of the long exact sequence in Ext induced by the short
/// exact sequence `0 -> A -i-> B -q-> C -> 0`.
pub fn les_rank_check(
    i: &ModuleMap,
    q: &ModuleMap,
    r_sub: &FreeResolution,
    r_mid: &FreeResolution,
    r_quot: &FreeResolution,
) -> Result<LesReport, ResolutionError> {
    if i.shift != 0 || q.shift != 0 {
        return Err(ResolutionError::Other("short exact sequence maps must preserve degree".into()));
    }
    let i_star = induced_ext_map(i, r_sub, r_mid)?;
    let q_star = induced_ext_map(q, r_mid, r_quot)?;
    let s_max = r_sub.s_max().min(r_mid.s_max()).min(r_quot.s_max());
    let t_max = r_sub.t_max().min(r_mid.t_max()).min(r_quot.t_max());
    let t_min = r_sub.min_degree().min(r_mid.min_degree()).min(r_quot.min_degree());
    let p: Prime = r_mid.prime();
    let mut cells = Vec::new();
    let mut problems = Vec::new();
    let empty = |rows: usize, cols: usize| FpMatrix::zeros(p, rows, cols);
    for s in 0..=s_max {
        for t in t_min..=t_max {
            let (da, db, dc) = (r_sub.rank(s, t), r_mid.rank(s, t), r_quot.rank(s, t));
            let mi = i_star.get(s, t).cloned().unwrap_or_else(|| empty(db, da));
            let mq = q_star.get(s, t).cloned().unwrap_or_else(|| empty(dc, db));
            let ri = mi.rank();
            let rq = mq.rank();
            let composite_zero = mq.matmul(&mi).is_zero();
            let ker_i = RowReduction::new(&mi).kernel().rows();
            let exact_at_mid = composite_zero && ker_i == rq;
            let connecting_rank = da - ri;
            let exact_at_quot = (s < s_max).then(|| {
                let dc1 = r_quot.rank(s + 1, t);
                let rq1 = q_star.get(s + 1, t).map_or(0, FpMatrix::rank);
                dc1 - rq1 == connecting_rank
            });
            if s == 0 && rq != dc {
                problems.push(format!("Ext^{{0,{t}}}(C) -> Ext^{{0,{t}}}(B) is not injective"));
            }
            if !composite_zero {
                problems.push(format!("composite nonzero at ({s}, {t})"));
            } else if !exact_at_mid {
                problems.push(format!("not exact at Ext^{{{s},{t}}}(B)"));
            }
            if exact_at_quot == Some(false) {
                problems.push(format!("connecting rank {connecting_rank} at ({s}, {t}) disagrees with the kernel at ({}, {t})", s + 1));
            }
            if da + db + dc > 0 {
                cells.push(LesCell {
                    s,
                    t,
                    dim_sub: da,
                    dim_mid: db,
                    dim_quot: dc,
                    rank_sub: ri,
                    rank_quot: rq,
                    composite_zero,
                    exact_at_mid,
                    connecting_rank,
                    exact_at_quot,
                });
            }
        }
    }
    Ok(LesReport { cells, problems })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chart(cells: &[((usize, i32), usize)]) -> ExtChart {
        let mut c = ExtChart::new("c", Prime::TWO, 8, 12);
        c.ranks = cells.iter().copied().collect();
        c
    }

    #[test]
    fn one_possible_d2() {
        let c = chart(&[((1, 6), 1), ((3, 7), 1)]);
        let d = collapse_check(&c, 4, false);
        assert_eq!(d, vec![PossibleDifferential { r: 2, source: (5, 1), target: (4, 3) }]);
    }

    #[test]
    fn empty_stem_reads_zero() {
        let c = chart(&[]);
        let g = read_off_groups(&c, 3, None).unwrap();
        assert_eq!(g.to_string(), "0");
    }

    #[test]
    fn masked_stem_refused() {
        let c = chart(&[]);
        assert!(matches!(read_off_groups(&c, 13, None), Err(ResolutionError::RaiseTMax { .. })));
    }

    #[test]
    fn group_display() {
        let g = StemGroup {
            stem: 4,
            prime: 2,
            summands: vec![GroupSummand::Integral, GroupSummand::Integral, GroupSummand::Cyclic(3)],
            s_bound: 2,
            assumes_collapse: true,
        };
        assert_eq!(g.to_string(), "ℤ² ⊕ ℤ/8");
        assert_eq!(g.to_ascii(), "Z^2 + Z/8");
    }
}
