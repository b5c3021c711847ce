//! Algebras given by generators and homogeneous relations.
//!
//! Degree `d` of the quotient is computed as
//! `⊕_g g ⊗ A_{d-|g|}` modulo the span of `r · y` for relations `r` and
//! basis elements `y`, which keeps every linear system as small as the
//! algebra itself instead of the full space of words.

use super::{AlgebraError, FiniteAlgebra, RawAlgebra};
use crate::fp::{Prime, Subspace};

/// Generators, relations and a degree bound.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgebraPresentation {
    pub name: String,
    pub prime: Prime,
    /// `(name, degree)`; degrees must be positive.
    pub generators: Vec<(String, i32)>,
    /// Each relation is a list of `(coefficient, word)` terms; words are
    /// sequences of generator slots.
    pub relations: Vec<Vec<(i64, Vec<usize>)>>,
    pub max_degree: i32,
}

impl AlgebraPresentation {
    pub fn new(name: &str, prime: Prime, generators: &[(&str, i32)], max_degree: i32) -> Self {
        AlgebraPresentation {
            name: name.to_string(),
            prime,
            generators: generators.iter().map(|(n, d)| (n.to_string(), *d)).collect(),
            relations: Vec::new(),
            max_degree,
        }
    }

    /// Add a relation written like `"beta*P1*P1*beta - beta*P1*beta*P1"`.
    /// Powers `P1^3` are accepted.
    pub fn relation(mut self, text: &str) -> Result<Self, AlgebraError> {
        let rel = self.parse_relation(text)?;
        self.relations.push(rel);
        Ok(self)
    }

    fn parse_relation(&self, text: &str) -> Result<Vec<(i64, Vec<usize>)>, AlgebraError> {
        let err = |reason: &str| AlgebraError::Parse { text: text.to_string(), reason: reason.to_string() };
        let mut out = Vec::new();
        for (sign, term) in super::split_terms(text).map_err(|r| err(&r))? {
            let mut coeff = sign;
            let mut word = Vec::new();
            for factor in term.split('*').map(str::trim) {
                if let Ok(k) = factor.parse::<i64>() {
                    coeff *= k;
                    continue;
                }
                let (base, power) = match factor.split_once('^') {
                    Some((b, e)) => (b.trim(), e.trim().parse::<usize>().map_err(|_| err("bad exponent"))?),
                    None => (factor, 1),
                };
                let slot = self
                    .generators
                    .iter()
                    .position(|(n, _)| n == base)
                    .ok_or_else(|| AlgebraError::UnknownSymbol(base.to_string()))?;
                word.extend(std::iter::repeat(slot).take(power));
            }
            out.push((coeff, word));
        }
        Ok(out)
    }

    fn word_degree(&self, w: &[usize]) -> i32 {
        w.iter().map(|&s| self.generators[s].1).sum()
    }

    /// The mod 3 algebra on β (degree 1) and P¹ (degree 4) with relations
    /// β², βP¹P¹β − βP¹βP¹ − P¹βP¹β and (P¹)³.
    pub fn atmf() -> Self {
        AlgebraPresentation::new("A^tmf", Prime::THREE, &[("beta", 1), ("P1", 4)], 40)
            .relation("beta*beta")
            .and_then(|p| p.relation("beta*P1*P1*beta - beta*P1*beta*P1 - P1*beta*P1*beta"))
            .and_then(|p| p.relation("P1^3"))
            .expect("static presentation")
    }

    /// ℰ(1) as an exterior algebra on Q0 (degree 1) and Q1 (degree 3).
    pub fn e1() -> Self {
        AlgebraPresentation::new("E(1)", Prime::TWO, &[("Q0", 1), ("Q1", 3)], 10)
            .relation("Q0*Q0")
            .and_then(|p| p.relation("Q1*Q1"))
            .and_then(|p| p.relation("Q0*Q1 + Q1*Q0"))
            .expect("static presentation")
    }
}

/// Build the quotient algebra degree by degree. Generators are primitive
/// in the coproduct. If the algebra has not vanished by `max_degree` the
/// result is flagged as truncated.
pub fn build_presented_algebra(pres: &AlgebraPresentation) -> Result<FiniteAlgebra, AlgebraError> {
    let p = pres.prime;
    let ngens = pres.generators.len();
    if pres.generators.iter().any(|(_, d)| *d <= 0) {
        return Err(AlgebraError::Degree("generator degrees must be positive".into()));
    }
    let mut relations: Vec<(i32, Vec<(u8, Vec<usize>)>)> = Vec::new();
    for (i, rel) in pres.relations.iter().enumerate() {
        let degs: Vec<i32> = rel.iter().map(|(_, w)| pres.word_degree(w)).collect();
        if degs.is_empty() || degs.iter().any(|&d| d != degs[0] || d == 0) {
            return Err(AlgebraError::Inhomogeneous(i));
        }
        relations.push((degs[0], rel.iter().map(|(c, w)| (p.reduce(*c), w.clone())).collect()));
    }
    let max_gen = pres.generators.iter().map(|g| g.1).max().unwrap_or(1);

    // reps[d] = word representatives of the basis of degree d
    let mut reps: Vec<Vec<Vec<usize>>> = vec![vec![vec![]]];
    // left[g][e] = rows of left multiplication A_e -> A_{e+|g|}
    let mut left: Vec<Vec<Vec<Vec<u8>>>> = vec![Vec::new(); ngens];
    let mut zero_run = 0;
    let mut truncated = true;
    let mut d = 0;
    while d < pres.max_degree {
        d += 1;
        // Coordinates (g, b), b a basis index of degree d - |g|, sorted so
        // lexicographically larger words come first.
        let mut coords: Vec<(usize, usize)> = Vec::new();
        for g in 0..ngens {
            let e = d - pres.generators[g].1;
            if e >= 0 {
                for b in 0..reps[e as usize].len() {
                    coords.push((g, b));
                }
            }
        }
        let word_of = |&(g, b): &(usize, usize)| {
            let mut w = vec![g];
            w.extend_from_slice(&reps[(d - pres.generators[g].1) as usize][b]);
            w
        };
        coords.sort_by(|x, y| word_of(y).cmp(&word_of(x)));
        let col = |g: usize, b: usize| coords.iter().position(|&c| c == (g, b)).expect("coordinate");

        // Normal form of word * (basis element y of degree e) in degree < d.
        let apply_word = |word: &[usize], mut v: Vec<u8>, mut e: i32| -> Vec<u8> {
            for &g in word.iter().rev() {
                let rows = &left[g][e as usize];
                let target = e + pres.generators[g].1;
                let mut out = vec![0u8; reps[target as usize].len()];
                for (i, &c) in v.iter().enumerate() {
                    if c != 0 {
                        crate::fp::add_scaled(p, &mut out, &rows[i], c);
                    }
                }
                v = out;
                e = target;
            }
            v
        };

        let mut ideal = Subspace::new(p, coords.len());
        for (rd, rel) in &relations {
            let e = d - rd;
            if e < 0 {
                continue;
            }
            for y in 0..reps[e as usize].len() {
                let mut vec = vec![0u8; coords.len()];
                for (c, w) in rel {
                    let (g, rest) = (w[0], &w[1..]);
                    let mut unit = vec![0u8; reps[e as usize].len()];
                    unit[y] = 1;
                    let inner = apply_word(rest, unit, e);
                    for (b, &x) in inner.iter().enumerate() {
                        if x != 0 {
                            let k = col(g, b);
                            vec[k] = p.add(vec[k], p.mul(x, *c));
                        }
                    }
                }
                ideal.insert(&vec);
            }
        }
        let mut pivot = vec![false; coords.len()];
        for row in ideal.basis() {
            pivot[row.iter().position(|&x| x != 0).unwrap()] = true;
        }
        let mut survivors: Vec<usize> = (0..coords.len()).filter(|&k| !pivot[k]).collect();
        survivors.reverse();
        let here: Vec<Vec<usize>> = survivors.iter().map(|&k| word_of(&coords[k])).collect();

        for g in 0..ngens {
            let e = d - pres.generators[g].1;
            if e < 0 {
                continue;
            }
            let rows: Vec<Vec<u8>> = (0..reps[e as usize].len())
                .map(|b| {
                    let mut v = vec![0u8; coords.len()];
                    v[col(g, b)] = 1;
                    ideal.reduce(&mut v);
                    survivors.iter().map(|&k| v[k]).collect()
                })
                .collect();
            while left[g].len() < e as usize {
                let fill = reps[left[g].len()].len();
                left[g].push(vec![vec![]; fill]);
            }
            left[g].push(rows);
        }
        let dim = here.len();
        reps.push(here);
        if dim == 0 {
            zero_run += 1;
            if zero_run >= max_gen {
                truncated = false;
                break;
            }
        } else {
            zero_run = 0;
        }
    }

    while reps.len() > 1 && reps.last().is_some_and(Vec::is_empty) {
        reps.pop();
    }
    let top = reps.len() as i32 - 1;
    let mut basis = Vec::new();
    let mut offsets = vec![0usize];
    for (deg, rs) in reps.iter().enumerate() {
        for w in rs {
            let label = if w.is_empty() {
                "1".to_string()
            } else {
                w.iter().map(|&s| pres.generators[s].0.as_str()).collect::<Vec<_>>().join("*")
            };
            basis.push((label, deg as i32));
        }
        offsets.push(basis.len());
    }
    let n = basis.len();
    let left_apply = |g: usize, e: i32, v: &[u8]| -> Option<Vec<u8>> {
        let target = e + pres.generators[g].1;
        if target > top {
            return None;
        }
        let rows = left[g].get(e as usize)?;
        let mut out = vec![0u8; reps[target as usize].len()];
        for (i, &c) in v.iter().enumerate() {
            if c != 0 {
                crate::fp::add_scaled(p, &mut out, &rows[i], c);
            }
        }
        Some(out)
    };
    let mut products = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let (di, dj) = (basis[i].1, basis[j].1);
            let mut e = dj;
            let mut v = vec![0u8; reps[dj as usize].len()];
            v[j - offsets[dj as usize]] = 1;
            let word = &reps[di as usize][i - offsets[di as usize]];
            let mut alive = true;
            for &g in word.iter().rev() {
                match left_apply(g, e, &v) {
                    Some(next) => {
                        e += pres.generators[g].1;
                        v = next;
                    }
                    None => {
                        alive = false;
                        break;
                    }
                }
            }
            let terms = if alive {
                v.iter()
                    .enumerate()
                    .filter(|(_, &c)| c != 0)
                    .map(|(k, &c)| (offsets[e as usize] + k, c))
                    .collect()
            } else {
                Vec::new()
            };
            products.push(terms);
        }
    }

    let mut generators = Vec::new();
    for (slot, (name, gd)) in pres.generators.iter().enumerate() {
        let idx = (offsets[*gd as usize]..offsets[*gd as usize + 1])
            .find(|&k| reps[*gd as usize][k - offsets[*gd as usize]] == [slot])
            .ok_or_else(|| AlgebraError::Malformed(format!("generator {name} does not survive as a basis word")))?;
        generators.push(idx);
    }
    let coproducts = generators.iter().map(|&g| vec![(0, g, 1u8), (g, 0, 1u8)]).collect();
    FiniteAlgebra::from_raw(RawAlgebra {
        name: pres.name.clone(),
        prime: p,
        basis,
        generators,
        generator_names: pres.generators.iter().map(|g| g.0.clone()).collect(),
        products,
        coproducts,
        truncated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_on_one_generator() {
        let pres = AlgebraPresentation::new("free", Prime::TWO, &[("g", 1)], 3);
        let a = build_presented_algebra(&pres).unwrap();
        assert_eq!(a.dims(), vec![1, 1, 1, 1]);
        assert!(a.is_truncated());
    }

    #[test]
    fn exterior_e1() {
        let a = build_presented_algebra(&AlgebraPresentation::e1()).unwrap();
        assert_eq!(a.dims(), vec![1, 1, 0, 1, 1]);
        assert!(!a.is_truncated());
    }

    #[test]
    fn atmf_dimension_table() {
        let a = build_presented_algebra(&AlgebraPresentation::atmf()).unwrap();
        let dims = a.dims();
        assert_eq!(
            dims,
            vec![1, 1, 0, 0, 1, 2, 1, 0, 1, 3, 2, 0, 0, 2, 3, 1, 0, 1, 2, 1, 0, 0, 1, 1]
        );
        assert_eq!(a.total_dim(), 24);
        assert!(!a.is_truncated());
    }

    #[test]
    fn inhomogeneous_rejected() {
        let r = AlgebraPresentation::new("bad", Prime::TWO, &[("x", 1), ("y", 2)], 4).relation("x + y").unwrap();
        assert!(matches!(build_presented_algebra(&r), Err(AlgebraError::Inhomogeneous(0))));
    }
}
