//! Milnor basis arithmetic for the mod 2 Steenrod algebra, restricted to
//! finite profile subalgebras.

use std::collections::BTreeMap;

use super::{AlgebraError, FiniteAlgebra, RawAlgebra};
use crate::fp::Prime;

/// Profile bounds `(e_1, .., e_k)`: `Sq(r_1, .., r_k)` is admitted iff
/// `r_i < 2^{e_i}` for every `i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MilnorProfile {
    pub bounds: Vec<u32>,
}

impl MilnorProfile {
    pub fn new(bounds: Vec<u32>) -> Result<Self, AlgebraError> {
        if bounds.is_empty() || bounds.iter().any(|&e| e == 0 || e > 8) {
            return Err(AlgebraError::BadProfile(bounds));
        }
        Ok(MilnorProfile { bounds })
    }

    /// Profile of A(n): `(n+1, n, .., 1)`.
    pub fn a(n: u32) -> Self {
        MilnorProfile { bounds: (1..=n + 1).rev().collect() }
    }

    /// Profile of E(n): exterior on `Q_0, .., Q_n`.
    pub fn e(n: u32) -> Self {
        MilnorProfile { bounds: vec![1; n as usize + 1] }
    }

    fn is_a_profile(&self) -> bool {
        let k = self.bounds.len() as u32;
        self.bounds.iter().enumerate().all(|(i, &e)| e == k - i as u32)
    }

    fn is_exterior(&self) -> bool {
        self.bounds.iter().all(|&e| e == 1)
    }

    pub fn admits(&self, r: &[u32]) -> bool {
        r.iter().enumerate().all(|(i, &x)| x == 0 || (i < self.bounds.len() && x < (1 << self.bounds[i])))
    }

    /// All admitted tuples, padded to the profile length.
    pub fn tuples(&self) -> Vec<Vec<u32>> {
        let mut out = vec![vec![]];
        for &e in &self.bounds {
            out = out
                .into_iter()
                .flat_map(|t: Vec<u32>| {
                    (0..(1u32 << e)).map(move |x| {
                        let mut t = t.clone();
                        t.push(x);
                        t
                    })
                })
                .collect();
        }
        out
    }
}

pub fn degree(r: &[u32]) -> i32 {
    r.iter().enumerate().map(|(i, &x)| x as i32 * ((1 << (i + 1)) - 1)).sum()
}

fn trim(mut r: Vec<u32>) -> Vec<u32> {
    while r.last() == Some(&0) {
        r.pop();
    }
    r
}

pub fn label(r: &[u32]) -> String {
    let r = trim(r.to_vec());
    if r.is_empty() {
        "1".to_string()
    } else {
        let parts: Vec<String> = r.iter().map(|x| x.to_string()).collect();
        format!("Sq({})", parts.join(","))
    }
}

/// `Sq(r) · Sq(s)` in the full mod 2 Steenrod algebra, as the set of
/// tuples appearing with coefficient 1.
pub fn product(r: &[u32], s: &[u32]) -> Vec<Vec<u32>> {
    let rows = r.len();
    let cols = s.len();
    // x[i][j] for i in 1..=rows, j in 1..=cols; row 0 / column 0 are implied.
    let mut x = vec![vec![0u32; cols + 1]; rows + 1];
    let mut acc: BTreeMap<Vec<u32>, u32> = BTreeMap::new();
    let cells: Vec<(usize, usize)> = (1..=rows).flat_map(|i| (1..=cols).map(move |j| (i, j))).collect();

    fn rec(
        k: usize,
        cells: &[(usize, usize)],
        x: &mut Vec<Vec<u32>>,
        r: &[u32],
        s: &[u32],
        acc: &mut BTreeMap<Vec<u32>, u32>,
    ) {
        if k == cells.len() {
            let rows = r.len();
            let cols = s.len();
            let mut full = x.clone();
            for i in 1..=rows {
                let used: u32 = (1..=cols).map(|j| x[i][j] << j).sum();
                full[i][0] = r[i - 1] - used;
            }
            for j in 1..=cols {
                let used: u32 = (1..=rows).map(|i| x[i][j]).sum();
                full[0][j] = s[j - 1] - used;
            }
            let n_max = rows + cols;
            let mut t = vec![0u32; n_max];
            for (n, slot) in t.iter_mut().enumerate() {
                let n = n + 1;
                // multinomial coefficient mod 2: binary digits must be disjoint
                let mut seen = 0u32;
                for i in 0..=n.min(rows) {
                    let j = n - i;
                    if j > cols {
                        continue;
                    }
                    let v = full[i][j];
                    if v & seen != 0 {
                        return;
                    }
                    seen |= v;
                }
                *slot = seen;
            }
            *acc.entry(trim(t)).or_insert(0) ^= 1;
            return;
        }
        let (i, j) = cells[k];
        let row_used: u32 = (1..j).map(|jj| x[i][jj] << jj).sum();
        let col_used: u32 = (1..i).map(|ii| x[ii][j]).sum();
        let row_room = (r[i - 1] - row_used) >> j;
        let col_room = s[j - 1] - col_used;
        for v in 0..=row_room.min(col_room) {
            x[i][j] = v;
            rec(k + 1, cells, x, r, s, acc);
        }
        x[i][j] = 0;
    }

    rec(0, &cells, &mut x, r, s, &mut acc);
    acc.into_iter().filter(|(_, c)| *c == 1).map(|(t, _)| t).collect()
}

/// Milnor coproduct `Δ Sq(R) = Σ_{R' + R'' = R} Sq(R') ⊗ Sq(R'')`.
pub fn coproduct(r: &[u32]) -> Vec<(Vec<u32>, Vec<u32>)> {
    let mut out = vec![(vec![], vec![])];
    for &x in r {
        out = out
            .into_iter()
            .flat_map(|(a, b)| {
                (0..=x).map(move |y| {
                    let mut a = a.clone();
                    let mut b = b.clone();
                    a.push(y);
                    b.push(x - y);
                    (a, b)
                })
            })
            .collect();
    }
    out.into_iter().map(|(a, b)| (trim(a), trim(b))).collect()
}

fn unit_tuple(len: usize, pos: usize, val: u32) -> Vec<u32> {
    let mut v = vec![0; len];
    v[pos] = val;
    v
}

/// Build the profile subalgebra with its Milnor basis.
pub fn build_milnor_subalgebra(profile: &MilnorProfile) -> Result<FiniteAlgebra, AlgebraError> {
    let k = profile.bounds.len();
    let mut tuples = profile.tuples();
    // Within a degree, tuples with mass in low positions come first.
    tuples.sort_by(|a, b| degree(a).cmp(&degree(b)).then_with(|| b.cmp(a)));
    let tuples: Vec<Vec<u32>> = tuples.into_iter().map(trim).collect();
    let index: BTreeMap<Vec<u32>, usize> = tuples.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect();

    let n = tuples.len();
    let mut products = Vec::with_capacity(n * n);
    for a in &tuples {
        for b in &tuples {
            let mut terms = Vec::new();
            for t in product(a, b) {
                let Some(&idx) = index.get(&t) else {
                    return Err(AlgebraError::NotClosed { left: label(a), right: label(b), result: label(&t) });
                };
                terms.push((idx, 1u8));
            }
            terms.sort_unstable();
            products.push(terms);
        }
    }

    let (generators, names): (Vec<Vec<u32>>, Vec<String>) = if profile.is_a_profile() {
        let n = k - 1;
        (0..=n)
            .map(|i| (trim(unit_tuple(k, 0, 1 << i)), format!("Sq{}", 1u32 << i)))
            .unzip()
    } else if profile.is_exterior() {
        (0..k).map(|i| (trim(unit_tuple(k, i, 1)), format!("Q{i}"))).unzip()
    } else {
        return Err(AlgebraError::BadProfile(profile.bounds.clone()));
    };
    let gen_idx: Vec<usize> = generators
        .iter()
        .map(|g| index.get(g).copied().ok_or_else(|| AlgebraError::BadProfile(profile.bounds.clone())))
        .collect::<Result<_, _>>()?;

    let coproducts = generators
        .iter()
        .map(|g| {
            let mut terms: Vec<(usize, usize, u8)> =
                coproduct(g).into_iter().map(|(a, b)| (index[&a], index[&b], 1u8)).collect();
            terms.sort_unstable();
            terms
        })
        .collect();

    let name = if profile.is_a_profile() {
        format!("A({})", k - 1)
    } else {
        format!("E({})", k - 1)
    };
    FiniteAlgebra::from_raw(RawAlgebra {
        name,
        prime: Prime::TWO,
        basis: tuples.iter().map(|t| (label(t), degree(t))).collect(),
        generators: gen_idx,
        generator_names: names,
        products,
        coproducts,
        truncated: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_products() {
        assert_eq!(product(&[1], &[1]), Vec::<Vec<u32>>::new());
        assert_eq!(product(&[1], &[2]), vec![vec![3]]);
        let mut p = product(&[2], &[1]);
        p.sort();
        assert_eq!(p, vec![vec![0, 1], vec![3]]);
        assert_eq!(product(&[], &[0, 1]), vec![vec![0, 1]]);
    }

    #[test]
    fn adem_sq2_sq2() {
        // Sq^2 Sq^2 = Sq^3 Sq^1 = Sq(1,1)
        assert_eq!(product(&[2], &[2]), vec![vec![1, 1]]);
    }

    #[test]
    fn profile_counts() {
        assert_eq!(MilnorProfile::a(1).tuples().len(), 8);
        assert_eq!(MilnorProfile::a(2).tuples().len(), 64);
        assert_eq!(MilnorProfile::e(1).tuples().len(), 4);
    }
}
