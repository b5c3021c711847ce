//! Ext charts: ranks per bidegree, a trust mask and product structure.

use std::collections::BTreeMap;

use crate::fp::{FpMatrix, Prime};

use super::chain::{product_matrix, ExtClass};
use super::{ground_resolution, FreeResolution, ResolutionError};

/// Multiplication by one named class of `Ext(F_p)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductData {
    /// Bidegree `(s, t)` of the class.
    pub s: usize,
    pub t: i32,
    /// Source cell -> matrix (rows: source basis, columns: target basis).
    pub matrices: BTreeMap<(usize, i32), FpMatrix>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct ProductEdge {
    pub class: String,
    /// `(s, t, index)`.
    pub from: (usize, i32, usize),
    pub to: (usize, i32, usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtChart {
    pub name: String,
    pub prime: Prime,
    pub s_max: usize,
    pub t_max: i32,
    /// Nonzero cells only.
    pub ranks: BTreeMap<(usize, i32), usize>,
    pub products: BTreeMap<String, ProductData>,
}

impl ExtChart {
    pub fn new(name: impl Into<String>, prime: Prime, s_max: usize, t_max: i32) -> Self {
        ExtChart { name: name.into(), prime, s_max, t_max, ranks: BTreeMap::new(), products: BTreeMap::new() }
    }

    pub fn rank(&self, s: usize, t: i32) -> usize {
        self.ranks.get(&(s, t)).copied().unwrap_or(0)
    }

    /// Cells outside the computed window are unknown.
    pub fn is_masked(&self, s: usize, t: i32) -> bool {
        s > self.s_max || t > self.t_max
    }

    /// Rank at Adams coordinates `(x, y) = (t - s, s)`; `None` if masked.
    pub fn at(&self, stem: i32, s: usize) -> Option<usize> {
        let t = stem + s as i32;
        if self.is_masked(s, t) {
            None
        } else {
            Some(self.rank(s, t))
        }
    }

    /// Highest unmasked filtration in a stem.
    pub fn ceiling(&self, stem: i32) -> Option<usize> {
        let c = (self.t_max as i64 - stem as i64).min(self.s_max as i64);
        (c >= 0).then_some(c as usize)
    }

    pub fn total_rank(&self) -> usize {
        self.ranks.values().sum()
    }

    /// Stems that contain a nonzero cell.
    pub fn stems(&self) -> Vec<i32> {
        let mut v: Vec<i32> = self.ranks.keys().map(|&(s, t)| t - s as i32).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn product(&self, class: &str, s: usize, t: i32) -> Option<&FpMatrix> {
        self.products.get(class)?.matrices.get(&(s, t))
    }

    /// Every nonzero matrix entry of every product, as an edge.
    pub fn product_edges(&self) -> Vec<ProductEdge> {
        let mut out = Vec::new();
        for (name, data) in &self.products {
            for (&(s, t), m) in &data.matrices {
                for i in 0..m.rows() {
                    for j in 0..m.cols() {
                        if m.get(i, j) != 0 {
                            out.push(ProductEdge {
                                class: name.clone(),
                                from: (s, t, i),
                                to: (s + data.s, t + data.t, j),
                            });
                        }
                    }
                }
            }
        }
        out
    }

    /// Cellwise sum (products are dropped).
    pub fn direct_sum(&self, other: &ExtChart) -> ExtChart {
        let mut c = ExtChart::new(
            format!("{} ⊕ {}", self.name, other.name),
            self.prime,
            self.s_max.min(other.s_max),
            self.t_max.min(other.t_max),
        );
        for (&k, &v) in self.ranks.iter().chain(other.ranks.iter()) {
            if !c.is_masked(k.0, k.1) {
                *c.ranks.entry(k).or_insert(0) += v;
            }
        }
        c
    }

    /// Chart of the `k`-fold suspension.
    pub fn suspend(&self, k: i32) -> ExtChart {
        let mut c = ExtChart::new(format!("Σ^{k}{}", self.name), self.prime, self.s_max, self.t_max + k);
        c.ranks = self.ranks.iter().map(|(&(s, t), &v)| ((s, t + k), v)).collect();
        c
    }

    /// Ranks restricted to a window, for comparisons.
    pub fn ranks_in(&self, s_max: usize, t_max: i32) -> BTreeMap<(usize, i32), usize> {
        self.ranks.iter().filter(|(&(s, t), _)| s <= s_max && t <= t_max).map(|(&k, &v)| (k, v)).collect()
    }
}

/// The rank chart of a resolution.
pub fn ext_ranks(r: &FreeResolution) -> ExtChart {
    let mut c = ExtChart::new(r.module().name(), r.prime(), r.s_max(), r.t_max());
    for s in 0..=r.s_max() {
        for t in r.min_degree()..=r.t_max() {
            let n = r.rank(s, t);
            if n > 0 {
                c.ranks.insert((s, t), n);
            }
        }
    }
    c
}

/// Bidegree of a named class of `Ext(F_p)`.
pub fn class_bidegree(prime: Prime, name: &str) -> Option<(usize, i32)> {
    match (prime.value(), name) {
        (_, "h0") => Some((1, 1)),
        (2, "h1") => Some((1, 2)),
        (2, "h2") => Some((1, 4)),
        (2, "v1") => Some((1, 3)),
        (3, "alpha") => Some((1, 4)),
        (3, "beta") => Some((2, 12)),
        _ => None,
    }
}

/// The named class, as the first basis vector of its cell; the cell must
/// have rank one.
pub fn named_class(ground: &FreeResolution, name: &str) -> Result<ExtClass, ResolutionError> {
    let unknown = || ResolutionError::UnknownClass { name: name.to_string(), algebra: ground.algebra().name().to_string() };
    let (s, t) = class_bidegree(ground.prime(), name).ok_or_else(unknown)?;
    if !ground.in_window(s, t) {
        return Err(ResolutionError::OutOfWindow { s, t, s_max: ground.s_max(), t_max: ground.t_max() });
    }
    if ground.rank(s, t) != 1 {
        return Err(unknown());
    }
    Ok(ExtClass::basis(ground, s, t, 0))
}

/// A resolution of `F_p` large enough for products on `r`.
pub fn ground_for(r: &FreeResolution, names: &[&str]) -> FreeResolution {
    let s = names.iter().filter_map(|n| class_bidegree(r.prime(), n)).map(|(s, _)| s).max().unwrap_or(1);
    let t = (r.t_max() - r.min_degree()).max(1);
    ground_resolution(r.algebra().clone(), s, t)
}

/// Compute the product matrices of each named class on every source cell
/// whose target cell lies in the window.
pub fn add_products(chart: &mut ExtChart, r: &FreeResolution, ground: &FreeResolution, names: &[&str]) -> Result<(), ResolutionError> {
    for &name in names {
        let cls = named_class(ground, name)?;
        let cells: Vec<(usize, i32)> = chart
            .ranks
            .keys()
            .copied()
            .filter(|&(s, t)| r.in_window(s + cls.s, t + cls.t))
            .collect();
        let mats = crate::par::map(&cells, |&(s, t)| product_matrix(r, ground, &cls, s, t));
        let mut matrices = BTreeMap::new();
        for (cell, m) in cells.into_iter().zip(mats) {
            matrices.insert(cell, m?);
        }
        chart.products.insert(name.to_string(), ProductData { s: cls.s, t: cls.t, matrices });
    }
    Ok(())
}

/// Ranks plus the requested products.
pub fn chart_with_products(r: &FreeResolution, names: &[&str]) -> Result<ExtChart, ResolutionError> {
    let mut c = ext_ranks(r);
    if !names.is_empty() {
        let g = ground_for(r, names);
        add_products(&mut c, r, &g, names)?;
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::a1;
    use crate::module::cyclic_module;
    use crate::resolution::minimal_resolution;
    use std::sync::Arc;

    #[test]
    fn m0_tower() {
        let alg = a1();
        let sq1 = alg.parse_element("Sq1").unwrap();
        let m = Arc::new(cyclic_module(&alg, &[sq1], None).unwrap());
        let r = minimal_resolution(m, 5, 10).unwrap();
        let c = chart_with_products(&r, &["h0"]).unwrap();
        for s in 0..=5usize {
            assert_eq!(c.at(0, s), Some(1));
        }
        for s in 0..5usize {
            assert_eq!(c.product("h0", s, s as i32).unwrap().get(0, 0), 1);
        }
        assert_eq!(c.ceiling(0), Some(5));
    }
}
