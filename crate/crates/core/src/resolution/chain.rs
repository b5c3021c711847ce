//! Chain maps between resolutions, Yoneda products and induced maps.

use std::collections::{BTreeMap, HashMap};

use crate::fp::{add_scaled, FpMatrix, RowReduction};
use crate::module::ModuleMap;

use super::{FreeResolution, Layout, ResolutionError};

/// An element of `Ext^{s,t}`, in the basis dual to the stage-`s`
/// generators of degree `t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtClass {
    pub s: usize,
    pub t: i32,
    pub coeffs: Vec<u8>,
}

impl ExtClass {
    pub fn basis(r: &FreeResolution, s: usize, t: i32, k: usize) -> ExtClass {
        let mut coeffs = vec![0; r.rank(s, t)];
        coeffs[k] = 1;
        ExtClass { s, t, coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }
}

/// `F_k : P_{offset + k} -> Q_k`, shifting internal degree by `shift`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainMap {
    pub shift: i32,
    pub offset: usize,
    /// `maps[k][flat generator]`; `None` where the target window ends.
    pub maps: Vec<Vec<Option<Vec<u8>>>>,
}

impl ChainMap {
    /// Degreewise matrix of `F_k` on generators of degree `t`, rows over
    /// those generators, columns over `Q_k(t + shift)`.
    pub fn generator_matrix(&self, src: &FreeResolution, tgt: &FreeResolution, k: usize, t: i32) -> Option<FpMatrix> {
        let s = self.offset + k;
        let n = src.rank(s, t);
        let cols = tgt.free_dim(k, t + self.shift);
        let mut m = FpMatrix::zeros(src.prime(), n, cols);
        for i in 0..n {
            let flat = src.flat_index(s, t, i);
            let v = self.maps.get(k)?.get(flat)?.as_ref()?;
            for (j, &c) in v.iter().enumerate() {
                m.set(i, j, c);
            }
        }
        Some(m)
    }
}

struct Lifter<'a> {
    tgt: &'a FreeResolution,
    layouts: HashMap<(usize, i32), Layout>,
    solvers: HashMap<(usize, i32), RowReduction>,
}

impl<'a> Lifter<'a> {
    fn layout(&mut self, s: usize, t: i32) -> &Layout {
        let tgt = self.tgt;
        self.layouts.entry((s, t)).or_insert_with(|| tgt.layout(s, t))
    }

    fn solve(&mut self, k: usize, t: i32, y: &[u8]) -> Option<Vec<u8>> {
        if y.iter().all(|&c| c == 0) {
            return Some(vec![0; self.tgt.free_dim(k, t)]);
        }
        let tgt = self.tgt;
        let rr = self.solvers.entry((k, t)).or_insert_with(|| RowReduction::new(&tgt.d_matrix(k, t)));
        rr.preimage(y)
    }
}

/// Lift `initial : P_{offset} -> N` (given on generators, values in the
/// module resolved by `tgt`) to a chain map, for stages up to `k_max` and
/// source generators of degree at most `t_limit`.
pub(crate) fn lift_from<F>(
    src: &FreeResolution,
    tgt: &FreeResolution,
    offset: usize,
    shift: i32,
    initial: F,
    k_max: usize,
    t_limit: i32,
) -> Result<ChainMap, ResolutionError>
where
    F: Fn(i32, usize) -> Vec<u8>,
{
    let p = src.prime();
    let alg = src.algebra().clone();
    let mut lifter = Lifter { tgt, layouts: HashMap::new(), solvers: HashMap::new() };
    let k_top = k_max.min(tgt.s_max()).min(src.s_max().saturating_sub(offset));
    let mut maps: Vec<Vec<Option<Vec<u8>>>> = Vec::new();
    for k in 0..=k_top {
        let s = offset + k;
        let gens = src.generators(s);
        let mut level = Vec::with_capacity(gens.len());
        for g in &gens {
            let tt = g.degree + shift;
            if g.degree > t_limit || tt > tgt.t_max() {
                level.push(None);
                continue;
            }
            let y = if k == 0 {
                initial(g.degree, g.index)
            } else {
                // F_{k-1}(d g)
                let img = src.image(s, g.degree, g.index);
                let lay = src.layout(s - 1, g.degree);
                let out_dim = lifter.layout(k - 1, tt).dim;
                let mut acc = vec![0u8; out_dim];
                let mut ok = true;
                for &(gp, dp, off) in &lay.blocks {
                    let r = alg.range(g.degree - dp);
                    let coeffs = &img[off..off + r.len()];
                    if coeffs.iter().all(|&c| c == 0) {
                        continue;
                    }
                    let Some(fg) = maps[k - 1][gp].clone() else {
                        ok = false;
                        break;
                    };
                    let lin = lifter.layout(k - 1, dp + shift).clone();
                    let lout = lifter.layout(k - 1, tt).clone();
                    for (j, &c) in coeffs.iter().enumerate() {
                        if c != 0 {
                            let v = tgt.act_free(r.start + j, dp + shift, &fg, &lin, &lout);
                            add_scaled(p, &mut acc, &v, c);
                        }
                    }
                }
                if !ok {
                    level.push(None);
                    continue;
                }
                acc
            };
            let x = lifter.solve(k, tt, &y).ok_or(ResolutionError::LiftFailed { stage: s, degree: g.degree })?;
            level.push(Some(x));
        }
        maps.push(level);
    }
    Ok(ChainMap { shift, offset, maps })
}

/// Lift a module map `f : M -> N` to the resolutions of `M` and `N`.
pub fn lift_chain_map(f: &ModuleMap, r_src: &FreeResolution, r_tgt: &FreeResolution) -> Result<ChainMap, ResolutionError> {
    if *f.source != **r_src.module() || *f.target != **r_tgt.module() {
        return Err(ResolutionError::Other("map does not match the resolved modules".into()));
    }
    let k_max = r_src.s_max().min(r_tgt.s_max());
    lift_from(
        r_src,
        r_tgt,
        0,
        f.shift,
        |t, k| f.apply(t, r_src.image(0, t, k)),
        k_max,
        r_src.t_max(),
    )
}

/// Coefficient of the unit on each stage-`k` generator of degree `t`.
fn unit_coefficients(tgt: &FreeResolution, k: usize, t: i32, v: &[u8]) -> Vec<u8> {
    (0..tgt.rank(k, t)).map(|h| v[tgt.unit_coordinate(k, t, h)]).collect()
}

/// `cls · target`, with `cls ∈ Ext(F_p)` resolved by `ground`.
pub fn yoneda_product(
    r: &FreeResolution,
    ground: &FreeResolution,
    cls: &ExtClass,
    target: &ExtClass,
) -> Result<ExtClass, ResolutionError> {
    let (s, t) = (target.s + cls.s, target.t + cls.t);
    if !r.in_window(s, t) {
        return Err(ResolutionError::OutOfWindow { s, t, s_max: r.s_max(), t_max: r.t_max() });
    }
    if !ground.in_window(cls.s, cls.t) {
        return Err(ResolutionError::OutOfWindow { s: cls.s, t: cls.t, s_max: ground.s_max(), t_max: ground.t_max() });
    }
    let cocycle = |deg: i32, k: usize| {
        if deg == target.t {
            vec![target.coeffs[k]]
        } else {
            vec![0; ground.module().dim(deg - target.t)]
        }
    };
    let chain = lift_from(r, ground, target.s, -target.t, cocycle, cls.s, t)?;
    let p = r.prime();
    let mut out = vec![0u8; r.rank(s, t)];
    for (i, o) in out.iter_mut().enumerate() {
        let flat = r.flat_index(s, t, i);
        let v = chain.maps[cls.s][flat].as_ref().ok_or(ResolutionError::LiftFailed { stage: s, degree: t })?;
        let units = unit_coefficients(ground, cls.s, cls.t, v);
        let mut acc = 0u8;
        for (h, &c) in units.iter().enumerate() {
            acc = p.add(acc, p.mul(c, cls.coeffs[h]));
        }
        *o = acc;
    }
    Ok(ExtClass { s, t, coeffs: out })
}

/// Matrix of multiplication by `cls` from cell `(s, t)`: row `i` is
/// `cls · (basis class i)`.
pub fn product_matrix(
    r: &FreeResolution,
    ground: &FreeResolution,
    cls: &ExtClass,
    s: usize,
    t: i32,
) -> Result<FpMatrix, ResolutionError> {
    let rows: Vec<Vec<u8>> = (0..r.rank(s, t))
        .map(|i| yoneda_product(r, ground, cls, &ExtClass::basis(r, s, t, i)).map(|c| c.coeffs))
        .collect::<Result<_, _>>()?;
    Ok(FpMatrix::from_rows(r.prime(), r.rank(s + cls.s, t + cls.t), &rows).expect("product rows"))
}

/// Contravariant map `Ext^{s,t+shift}(N) -> Ext^{s,t}(M)` for each cell of
/// the source window. Row `h` is the image of the class dual to target
/// generator `h`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InducedMap {
    pub shift: i32,
    pub maps: BTreeMap<(usize, i32), FpMatrix>,
}

impl InducedMap {
    pub fn get(&self, s: usize, t: i32) -> Option<&FpMatrix> {
        self.maps.get(&(s, t))
    }

    pub fn apply(&self, y: &ExtClass) -> Option<ExtClass> {
        let t = y.t - self.shift;
        let m = self.maps.get(&(y.s, t))?;
        Some(ExtClass { s: y.s, t, coeffs: m.apply(&y.coeffs) })
    }
}

pub fn induced_ext_map(f: &ModuleMap, r_src: &FreeResolution, r_tgt: &FreeResolution) -> Result<InducedMap, ResolutionError> {
    let chain = lift_chain_map(f, r_src, r_tgt)?;
    let p = r_src.prime();
    let mut maps = BTreeMap::new();
    for s in 0..=r_src.s_max().min(r_tgt.s_max()) {
        for t in r_src.min_degree()..=r_src.t_max() {
            let tt = t + f.shift;
            if tt > r_tgt.t_max() {
                continue;
            }
            let rows = r_tgt.rank(s, tt);
            let cols = r_src.rank(s, t);
            let mut m = FpMatrix::zeros(p, rows, cols);
            for g in 0..cols {
                let flat = r_src.flat_index(s, t, g);
                let v = chain.maps[s][flat].as_ref().ok_or(ResolutionError::LiftFailed { stage: s, degree: t })?;
                for (h, c) in unit_coefficients(r_tgt, s, tt, v).into_iter().enumerate() {
                    m.set(h, g, c);
                }
            }
            maps.insert((s, t), m);
        }
    }
    Ok(InducedMap { shift: f.shift, maps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{a0, a1};
    use crate::module::GradedModule;
    use crate::resolution::{ground_resolution, minimal_resolution};
    use std::sync::Arc;

    #[test]
    fn h0_times_unit() {
        let g = ground_resolution(a0(), 4, 4);
        let h0 = ExtClass::basis(&g, 1, 1, 0);
        let one = ExtClass::basis(&g, 0, 0, 0);
        assert_eq!(yoneda_product(&g, &g, &h0, &one).unwrap(), h0);
    }

    #[test]
    fn h0_cubed_nonzero_over_a1() {
        let g = ground_resolution(a1(), 4, 6);
        let h0 = ExtClass::basis(&g, 1, 1, 0);
        let mut x = ExtClass::basis(&g, 0, 0, 0);
        for _ in 0..3 {
            x = yoneda_product(&g, &g, &h0, &x).unwrap();
        }
        assert!(!x.is_zero());
        assert_eq!((x.s, x.t), (3, 3));
    }

    #[test]
    fn identity_and_zero_induce_identity_and_zero() {
        let m: Arc<GradedModule> = Arc::new(GradedModule::ground(a1(), 0));
        let r = minimal_resolution(m.clone(), 3, 8).unwrap();
        let id = induced_ext_map(&ModuleMap::identity(m.clone()), &r, &r).unwrap();
        for (&(s, t), mat) in &id.maps {
            assert_eq!(*mat, FpMatrix::identity(r.prime(), r.rank(s, t)), "({s}, {t})");
        }
        let zero = induced_ext_map(&ModuleMap::zero(m.clone(), m), &r, &r).unwrap();
        assert!(zero.maps.values().all(FpMatrix::is_zero));
    }
}
