//! Minimal free resolutions and everything computed from them.
//!
//! Cell `(s, t)` of a resolution is the set of stage-`s` generators born in
//! internal degree `t`. It depends on cells `(s - 1, <= t)` and `(s, < t)`,
//! so all cells with the same `s + t` are independent and are computed
//! together as one wavefront.

pub mod analysis;
pub mod chain;
pub mod chart;

use std::collections::HashMap;

use thiserror::Error;

use crate::algebra::AlgebraRef;
use crate::fp::{FpMatrix, Prime, RowReduction, Subspace};
use crate::module::{ModuleError, ModuleRef};
use crate::par;

pub use analysis::{collapse_check, h0_injective, les_rank_check, read_off_groups, GroupSummand, LesReport, PossibleDifferential, StemGroup};
pub use chain::{induced_ext_map, lift_chain_map, yoneda_product, ChainMap, ExtClass, InducedMap};
pub use chart::{ext_ranks, ExtChart, ProductEdge};

#[derive(Debug, Error)]
pub enum ResolutionError {
    #[error("t_max = {requested} exceeds the module truncation {truncation}; cells above it would be unreliable")]
    BeyondTruncation { requested: i32, truncation: i32 },
    #[error("module `{0}` fails validation")]
    InvalidModule(String),
    #[error("cannot shrink a resolution from ({s_old}, {t_old}) to ({s_new}, {t_new})")]
    Shrink { s_old: usize, t_old: i32, s_new: usize, t_new: i32 },
    #[error("({s}, {t}) lies outside the computed window ({s_max}, {t_max})")]
    OutOfWindow { s: usize, t: i32, s_max: usize, t_max: i32 },
    #[error("lifting failed at stage {stage}, degree {degree}")]
    LiftFailed { stage: usize, degree: i32 },
    #[error("no class named `{name}` over {algebra}")]
    UnknownClass { name: String, algebra: String },
    #[error("stem {stem} needs cells up to s = {s_bound}, but s > {ceiling} is masked; raise t_max to at least {needed_t}")]
    RaiseTMax { stem: i32, s_bound: usize, ceiling: i64, needed_t: i32 },
    #[error(transparent)]
    Module(#[from] ModuleError),
    #[error("{0}")]
    Other(String),
}

/// A free generator of one stage.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FreeGenerator {
    pub stage: usize,
    pub degree: i32,
    /// Position among the generators of the same stage and degree.
    pub index: usize,
}

impl FreeGenerator {
    pub fn label(&self) -> String {
        format!("{}_{}_{}", self.stage, self.degree, self.index)
    }
}

/// Where each generator's block sits in a degree of a free module.
#[derive(Clone, Debug)]
pub(crate) struct Layout {
    /// `(flat generator, generator degree, offset)`.
    pub blocks: Vec<(usize, i32, usize)>,
    /// Offset of each flat generator, if its block is nonempty.
    pub offset_of: Vec<Option<usize>>,
    pub dim: usize,
}

/// Results of one audit pass.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AuditReport {
    pub cells_checked: usize,
    pub failures: Vec<String>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FreeResolution {
    algebra: AlgebraRef,
    module: ModuleRef,
    s_max: usize,
    t_max: i32,
    /// `stages[s][t - min_degree]`: images `d(g)` of generators born in
    /// degree `t`, as vectors in the previous stage (the module for s = 0).
    stages: Vec<Vec<Vec<Vec<u8>>>>,
}

impl FreeResolution {
    /// An empty resolution of `module` (window `(0, min_degree - 1)`).
    fn empty(module: ModuleRef) -> Self {
        FreeResolution {
            algebra: module.algebra().clone(),
            module,
            s_max: 0,
            t_max: i32::MIN,
            stages: vec![vec![]],
        }
    }

    /// Reassemble a resolution from stored images (used by the loader).
    pub fn from_parts(
        module: ModuleRef,
        s_max: usize,
        t_max: i32,
        stages: Vec<Vec<Vec<Vec<u8>>>>,
    ) -> Result<Self, ResolutionError> {
        let r = FreeResolution { algebra: module.algebra().clone(), module, s_max, t_max, stages };
        let width = r.width();
        if r.stages.len() != s_max + 1 || r.stages.iter().any(|st| st.len() != width) {
            return Err(ResolutionError::Other("stage table does not match the window".into()));
        }
        for s in 0..=s_max {
            for t in r.min_degree()..=t_max {
                let target = r.target_dim(s, t);
                if r.stages[s][(t - r.min_degree()) as usize].iter().any(|v| v.len() != target) {
                    return Err(ResolutionError::Other(format!("image of a generator at ({s}, {t}) has the wrong length")));
                }
            }
        }
        Ok(r)
    }

    pub fn algebra(&self) -> &AlgebraRef {
        &self.algebra
    }
    pub fn module(&self) -> &ModuleRef {
        &self.module
    }
    pub fn prime(&self) -> Prime {
        self.algebra.prime()
    }
    pub fn s_max(&self) -> usize {
        self.s_max
    }
    pub fn t_max(&self) -> i32 {
        self.t_max
    }
    pub fn min_degree(&self) -> i32 {
        self.module.min_degree()
    }
    fn width(&self) -> usize {
        (self.t_max as i64 - self.min_degree() as i64 + 1).max(0) as usize
    }

    pub fn in_window(&self, s: usize, t: i32) -> bool {
        s <= self.s_max && t <= self.t_max
    }

    /// Raw image table, `[s][t - min_degree][k]`.
    pub fn stage_images(&self) -> &[Vec<Vec<Vec<u8>>>] {
        &self.stages
    }

    fn cell(&self, s: usize, t: i32) -> &[Vec<u8>] {
        if s >= self.stages.len() || t < self.min_degree() {
            return &[];
        }
        self.stages[s].get((t - self.min_degree()) as usize).map_or(&[], Vec::as_slice)
    }

    /// Number of generators of stage `s` in degree `t`, i.e. `dim Ext^{s,t}`.
    pub fn rank(&self, s: usize, t: i32) -> usize {
        self.cell(s, t).len()
    }

    pub fn generators(&self, s: usize) -> Vec<FreeGenerator> {
        let mut out = Vec::new();
        if s < self.stages.len() {
            for (i, cell) in self.stages[s].iter().enumerate() {
                for k in 0..cell.len() {
                    out.push(FreeGenerator { stage: s, degree: self.min_degree() + i as i32, index: k });
                }
            }
        }
        out
    }

    /// Flat index (within stage `s`) of generator `k` of degree `t`.
    pub fn flat_index(&self, s: usize, t: i32, k: usize) -> usize {
        let lo = self.min_degree();
        (lo..t).map(|d| self.rank(s, d)).sum::<usize>() + k
    }

    /// Image `d(g)` of generator `k` of stage `s` in degree `t`.
    pub fn image(&self, s: usize, t: i32, k: usize) -> &[u8] {
        &self.cell(s, t)[k]
    }

    pub(crate) fn layout(&self, s: usize, t: i32) -> Layout {
        let alg = &self.algebra;
        let mut blocks = Vec::new();
        let mut offset_of = Vec::new();
        let mut off = 0;
        let mut flat = 0;
        if s < self.stages.len() {
            for (i, cell) in self.stages[s].iter().enumerate() {
                let d = self.min_degree() + i as i32;
                if d > t {
                    break;
                }
                let n = alg.dim(t - d);
                for _ in 0..cell.len() {
                    if n > 0 {
                        blocks.push((flat, d, off));
                        offset_of.push(Some(off));
                        off += n;
                    } else {
                        offset_of.push(None);
                    }
                    flat += 1;
                }
            }
        }
        Layout { blocks, offset_of, dim: off }
    }

    /// Dimension of stage `s` in degree `t`.
    pub fn free_dim(&self, s: usize, t: i32) -> usize {
        self.layout(s, t).dim
    }

    /// Dimension of the codomain of `d_s` in degree `t`.
    pub fn target_dim(&self, s: usize, t: i32) -> usize {
        if s == 0 {
            self.module.dim(t)
        } else {
            self.free_dim(s - 1, t)
        }
    }

    /// Offset of the unit coordinate of a generator in its own degree.
    pub fn unit_coordinate(&self, s: usize, t: i32, k: usize) -> usize {
        let flat = self.flat_index(s, t, k);
        self.layout(s, t).offset_of[flat].expect("unit block")
    }

    /// Act by algebra basis element `e` on `v` in stage `s`, degree `t`.
    pub(crate) fn act_free(&self, e: usize, t: i32, v: &[u8], lin: &Layout, lout: &Layout) -> Vec<u8> {
        let alg = &self.algebra;
        let p = self.prime();
        let k = alg.degree_of(e);
        let mut out = vec![0u8; lout.dim];
        for &(g, d, off) in &lin.blocks {
            let Some(Some(o2)) = lout.offset_of.get(g) else { continue };
            let r = alg.range(t - d);
            let base = alg.range(t + k - d).start;
            for (j, &c) in v[off..off + r.len()].iter().enumerate() {
                if c == 0 {
                    continue;
                }
                for &(k2, c2) in alg.mul_basis(e, r.start + j) {
                    let idx = o2 + k2 - base;
                    out[idx] = p.add(out[idx], p.mul(c, c2));
                }
            }
        }
        out
    }

    /// Matrix of `d_s` in degree `t`: rows follow the basis of stage `s`.
    pub fn d_matrix(&self, s: usize, t: i32) -> FpMatrix {
        let alg = &self.algebra;
        let p = self.prime();
        let lay = self.layout(s, t);
        let tdim = self.target_dim(s, t);
        let mut m = FpMatrix::zeros(p, lay.dim, tdim);
        let gens = self.generators(s);
        let mut row = 0;
        let lo_layouts: HashMap<i32, Layout> = if s == 0 {
            HashMap::new()
        } else {
            lay.blocks.iter().map(|&(_, d, _)| (d, self.layout(s - 1, d))).collect()
        };
        let lout = if s == 0 { None } else { Some(self.layout(s - 1, t)) };
        for &(g, d, _) in &lay.blocks {
            let gen = &gens[g];
            let img = self.image(s, gen.degree, gen.index);
            for e in alg.range(t - d) {
                let v = if s == 0 {
                    self.module.apply_basis(e, d, img)
                } else {
                    self.act_free(e, d, img, &lo_layouts[&d], lout.as_ref().unwrap())
                };
                for (j, &c) in v.iter().enumerate() {
                    if c != 0 {
                        m.set(row, j, c);
                    }
                }
                row += 1;
            }
        }
        m
    }

    /// Extend the computed window. Cells already present are kept.
    pub fn extend(&mut self, s_max: usize, t_max: i32) -> Result<(), ResolutionError> {
        if let Some(tr) = self.module.truncation() {
            if t_max > tr {
                return Err(ResolutionError::BeyondTruncation { requested: t_max, truncation: tr });
            }
        }
        let lo = self.min_degree();
        let old_s = self.s_max;
        let old_t = self.t_max;
        let had_cells = old_t >= lo;
        if had_cells && (s_max < old_s || t_max < old_t) {
            return Err(ResolutionError::Shrink { s_old: old_s, t_old: old_t, s_new: s_max, t_new: t_max });
        }
        let done = |s: usize, t: i32| had_cells && s <= old_s && t <= old_t;
        self.s_max = s_max;
        self.t_max = t_max;
        let width = self.width();
        self.stages.resize(s_max + 1, Vec::new());
        for st in &mut self.stages {
            st.resize(width, Vec::new());
        }
        let p = self.prime();
        let mut kernels: HashMap<(usize, i32), FpMatrix> = HashMap::new();
        // kernels of finished cells feeding new ones
        for s in 0..s_max {
            for t in lo..=t_max {
                if done(s, t) && !done(s + 1, t) {
                    let k = RowReduction::new(&self.d_matrix(s, t)).kernel().clone();
                    kernels.insert((s, t), k);
                }
            }
        }
        if t_max < lo {
            return Ok(());
        }
        let t_span = (t_max - lo) as usize;
        for w in 0..=(s_max + t_span) {
            let cells: Vec<(usize, i32)> = (0..=s_max.min(w))
                .map(|s| (s, lo + (w - s) as i32))
                .filter(|&(s, t)| t <= t_max && !done(s, t))
                .collect();
            let results = par::map(&cells, |&(s, t)| {
                let below = if s == 0 {
                    FpMatrix::identity(p, self.module.dim(t))
                } else {
                    kernels[&(s - 1, t)].clone()
                };
                self.compute_cell(s, t, &below, s < s_max)
            });
            for ((s, t), (new, kernel)) in cells.into_iter().zip(results) {
                self.stages[s][(t - lo) as usize] = new;
                if let Some(k) = kernel {
                    kernels.insert((s, t), k);
                }
                if s > 0 {
                    kernels.remove(&(s - 1, t));
                }
            }
        }
        Ok(())
    }

    /// New generators for cell `(s, t)` and, if requested, the kernel of
    /// the full `d_s` in degree `t`.
    fn compute_cell(&self, s: usize, t: i32, below: &FpMatrix, want_kernel: bool) -> (Vec<Vec<u8>>, Option<FpMatrix>) {
        let p = self.prime();
        let old = self.d_matrix(s, t);
        let mut sub = Subspace::new(p, old.cols());
        for i in 0..old.rows() {
            sub.insert(&old.row(i));
        }
        let mut new = Vec::new();
        for i in 0..below.rows() {
            let k = below.row(i);
            if sub.insert(&k) {
                new.push(k);
            }
        }
        let kernel = want_kernel.then(|| {
            let mut full = old;
            for v in &new {
                full.push_row(v);
            }
            RowReduction::new(&full).kernel().clone()
        });
        (new, kernel)
    }

    /// Check `d∘d = 0`, minimality and exactness in every cell of the window.
    pub fn audit(&self) -> AuditReport {
        let lo = self.min_degree();
        let mut report = AuditReport::default();
        if self.t_max < lo {
            return report;
        }
        for s in 0..=self.s_max {
            for t in lo..=self.t_max {
                report.cells_checked += 1;
                let d = self.d_matrix(s, t);
                if s == 0 {
                    if d.rank() != self.module.dim(t) {
                        report.failures.push(format!("d_0 not onto the module in degree {t}"));
                    }
                } else {
                    let below = self.d_matrix(s - 1, t);
                    if !d.matmul(&below).is_zero() {
                        report.failures.push(format!("d∘d ≠ 0 at ({s}, {t})"));
                    }
                    // minimality: no image has a unit coordinate
                    let lay = self.layout(s - 1, t);
                    let units: Vec<usize> = (0..self.rank(s - 1, t)).map(|k| lay.offset_of[self.flat_index(s - 1, t, k)].unwrap()).collect();
                    for (k, img) in self.cell(s, t).iter().enumerate() {
                        if units.iter().any(|&u| img[u] != 0) {
                            report.failures.push(format!("generator {s}_{t}_{k} has a unit coefficient"));
                        }
                    }
                    let ker = RowReduction::new(&below).kernel().rows();
                    if ker != d.rank() {
                        report.failures.push(format!("not exact at ({}, {t}): ker {ker}, im {}", s - 1, d.rank()));
                    }
                }
            }
        }
        report
    }
}

/// Minimal free resolution of `m` through `(s_max, t_max)`.
pub fn minimal_resolution(m: ModuleRef, s_max: usize, t_max: i32) -> Result<FreeResolution, ResolutionError> {
    if let Some(tr) = m.truncation() {
        if t_max > tr {
            return Err(ResolutionError::BeyondTruncation { requested: t_max, truncation: tr });
        }
    }
    if !m.validate().is_valid() {
        return Err(ResolutionError::InvalidModule(m.name().to_string()));
    }
    let mut r = FreeResolution::empty(m);
    r.extend(s_max, t_max)?;
    Ok(r)
}

/// Resolution of the ground field `F_p` in degree 0.
pub fn ground_resolution(algebra: AlgebraRef, s_max: usize, t_max: i32) -> FreeResolution {
    let m = std::sync::Arc::new(crate::module::GradedModule::ground(algebra, 0));
    minimal_resolution(m, s_max, t_max).expect("ground field resolves")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{a1, e1};
    use crate::module::{cyclic_module, GradedModule};
    use std::sync::Arc;

    #[test]
    fn free_module_has_one_generator() {
        let m = Arc::new(GradedModule::free(a1()));
        let r = minimal_resolution(m, 4, 10).unwrap();
        assert_eq!(r.rank(0, 0), 1);
        let total: usize = (0..=4).flat_map(|s| (0..=10).map(move |t| (s, t))).map(|(s, t)| r.rank(s, t)).sum();
        assert_eq!(total, 1);
        assert!(r.audit().passed());
    }

    #[test]
    fn e1_ground_is_polynomial() {
        // Ext_{E(1)}(F_2) = F_2[h0, v1]
        let r = ground_resolution(e1(), 4, 12);
        for s in 0..=4usize {
            for t in 0..=12 {
                let expect = (0..=s).filter(|&j| (s - j) as i32 + 3 * j as i32 == t).count();
                assert_eq!(r.rank(s, t), expect, "({s}, {t})");
            }
        }
        assert!(r.audit().passed());
    }

    #[test]
    fn extend_matches_direct() {
        let alg = a1();
        let sq1 = alg.parse_element("Sq1").unwrap();
        let m = Arc::new(cyclic_module(&alg, &[sq1], None).unwrap());
        let direct = minimal_resolution(m.clone(), 5, 12).unwrap();
        let mut grown = minimal_resolution(m, 2, 7).unwrap();
        grown.extend(5, 12).unwrap();
        assert_eq!(grown, direct);
    }

    #[test]
    fn sequential_matches_parallel() {
        let r1 = ground_resolution(a1(), 6, 16);
        par::set_sequential(true);
        let r2 = ground_resolution(a1(), 6, 16);
        par::set_sequential(false);
        assert_eq!(r1, r2);
    }
}
