//! Dense linear algebra over the prime fields F_2 and F_3.
//!
//! Matrices follow the row-vector convention used everywhere else in the
//! crate: a linear map `V -> W` is stored with one row per basis vector of
//! `V`. Rows over F_2 are bit-packed into `u64` words; rows over F_3 are
//! stored one byte per entry. Callers only ever see plain scalars.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::par;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FpError {
    #[error("unsupported prime {0}; only 2 and 3 are implemented")]
    UnsupportedPrime(u32),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("entry {value} is not reduced mod {prime}")]
    Unreduced { value: u32, prime: u32 },
    #[error("mixed primes {0} and {1}")]
    MixedPrimes(u32, u32),
}

/// One of the two supported coefficient primes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Prime(u8);

impl Prime {
    pub const TWO: Prime = Prime(2);
    pub const THREE: Prime = Prime(3);

    pub fn new(p: u32) -> Result<Self, FpError> {
        match p {
            2 => Ok(Self::TWO),
            3 => Ok(Self::THREE),
            _ => Err(FpError::UnsupportedPrime(p)),
        }
    }

    #[inline]
    pub fn value(self) -> u32 {
        self.0 as u32
    }

    #[inline]
    pub fn reduce(self, x: i64) -> u8 {
        x.rem_euclid(self.0 as i64) as u8
    }

    #[inline]
    pub fn add(self, a: u8, b: u8) -> u8 {
        let s = a + b;
        if s >= self.0 {
            s - self.0
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(self, a: u8, b: u8) -> u8 {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(self, a: u8, b: u8) -> u8 {
        (a * b) % self.0
    }

    #[inline]
    pub fn neg(self, a: u8) -> u8 {
        if a == 0 {
            0
        } else {
            self.0 - a
        }
    }

    /// Multiplicative inverse. Over F_2 and F_3 every nonzero element is
    /// its own inverse.
    #[inline]
    pub fn inv(self, a: u8) -> u8 {
        debug_assert!(a != 0 && a < self.0);
        a
    }

    /// `(-1)^k` as a field element.
    #[inline]
    pub fn sign(self, k: i64) -> u8 {
        if k.rem_euclid(2) == 0 {
            1
        } else {
            self.neg(1)
        }
    }
}

impl TryFrom<u32> for Prime {
    type Error = FpError;
    fn try_from(p: u32) -> Result<Self, FpError> {
        Prime::new(p)
    }
}

impl From<Prime> for u32 {
    fn from(p: Prime) -> u32 {
        p.value()
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A single field element tagged with its prime.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FpScalar {
    value: u8,
    prime: Prime,
}

impl FpScalar {
    pub fn new(prime: Prime, value: i64) -> Self {
        FpScalar { value: prime.reduce(value), prime }
    }
    pub fn value(self) -> u8 {
        self.value
    }
    pub fn prime(self) -> Prime {
        self.prime
    }
    pub fn inverse(self) -> Option<Self> {
        (self.value != 0).then(|| FpScalar { value: self.prime.inv(self.value), prime: self.prime })
    }
}

impl std::ops::Add for FpScalar {
    type Output = FpScalar;
    fn add(self, rhs: Self) -> Self {
        assert_eq!(self.prime, rhs.prime, "mixed primes");
        FpScalar { value: self.prime.add(self.value, rhs.value), prime: self.prime }
    }
}

impl std::ops::Sub for FpScalar {
    type Output = FpScalar;
    fn sub(self, rhs: Self) -> Self {
        assert_eq!(self.prime, rhs.prime, "mixed primes");
        FpScalar { value: self.prime.sub(self.value, rhs.value), prime: self.prime }
    }
}

impl std::ops::Mul for FpScalar {
    type Output = FpScalar;
    fn mul(self, rhs: Self) -> Self {
        assert_eq!(self.prime, rhs.prime, "mixed primes");
        FpScalar { value: self.prime.mul(self.value, rhs.value), prime: self.prime }
    }
}

impl std::ops::Neg for FpScalar {
    type Output = FpScalar;
    fn neg(self) -> Self {
        FpScalar { value: self.prime.neg(self.value), prime: self.prime }
    }
}

/// `acc += c * v` entrywise.
pub fn add_scaled(prime: Prime, acc: &mut [u8], v: &[u8], c: u8) {
    debug_assert_eq!(acc.len(), v.len());
    if c == 0 {
        return;
    }
    for (a, &b) in acc.iter_mut().zip(v) {
        if b != 0 {
            *a = prime.add(*a, prime.mul(b, c));
        }
    }
}

pub fn is_zero(v: &[u8]) -> bool {
    v.iter().all(|&x| x == 0)
}

#[derive(Clone, PartialEq, Eq, Hash)]
enum Store {
    /// `stride` words per row, bit `c % 64` of word `c / 64` holds column `c`.
    Bits { stride: usize, words: Vec<u64> },
    Bytes(Vec<u8>),
}

/// A dense matrix over F_2 or F_3.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FpMatrix {
    prime: Prime,
    rows: usize,
    cols: usize,
    store: Store,
}

const PAR_ELIM_THRESHOLD: usize = 1 << 16;

impl FpMatrix {
    pub fn zeros(prime: Prime, rows: usize, cols: usize) -> Self {
        let store = if prime == Prime::TWO {
            let stride = cols.div_ceil(64);
            Store::Bits { stride, words: vec![0; stride * rows] }
        } else {
            Store::Bytes(vec![0; rows * cols])
        };
        FpMatrix { prime, rows, cols, store }
    }

    pub fn identity(prime: Prime, n: usize) -> Self {
        let mut m = Self::zeros(prime, n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    /// Build from plain rows. Entries must already be reduced.
    pub fn from_rows(prime: Prime, cols: usize, rows: &[Vec<u8>]) -> Result<Self, FpError> {
        let mut m = Self::zeros(prime, rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(FpError::Dimension { expected: cols, got: r.len() });
            }
            for (j, &x) in r.iter().enumerate() {
                if x as u32 >= prime.value() {
                    return Err(FpError::Unreduced { value: x as u32, prime: prime.value() });
                }
                if x != 0 {
                    m.set(i, j, x);
                }
            }
        }
        Ok(m)
    }

    /// Build from arbitrary integers, reducing mod p.
    pub fn from_ints(prime: Prime, rows: &[Vec<i64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(prime, rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols, "ragged rows");
            for (j, &x) in r.iter().enumerate() {
                m.set(i, j, prime.reduce(x));
            }
        }
        m
    }

    #[inline]
    pub fn prime(&self) -> Prime {
        self.prime
    }
    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }
    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u8 {
        debug_assert!(i < self.rows && j < self.cols);
        match &self.store {
            Store::Bits { stride, words } => ((words[i * stride + j / 64] >> (j % 64)) & 1) as u8,
            Store::Bytes(b) => b[i * self.cols + j],
        }
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u8) {
        debug_assert!(i < self.rows && j < self.cols);
        let cols = self.cols;
        match &mut self.store {
            Store::Bits { stride, words } => {
                let w = &mut words[i * *stride + j / 64];
                if v & 1 == 1 {
                    *w |= 1 << (j % 64);
                } else {
                    *w &= !(1 << (j % 64));
                }
            }
            Store::Bytes(b) => b[i * cols + j] = v,
        }
    }

    pub fn row(&self, i: usize) -> Vec<u8> {
        (0..self.cols).map(|j| self.get(i, j)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<u8>> {
        (0..self.rows).map(|i| self.row(i)).collect()
    }

    pub fn is_zero(&self) -> bool {
        match &self.store {
            Store::Bits { words, .. } => words.iter().all(|&w| w == 0),
            Store::Bytes(b) => b.iter().all(|&x| x == 0),
        }
    }

    pub fn push_row(&mut self, row: &[u8]) {
        assert_eq!(row.len(), self.cols);
        match &mut self.store {
            Store::Bits { stride, words } => {
                let start = words.len();
                words.resize(start + *stride, 0);
                for (j, &x) in row.iter().enumerate() {
                    if x & 1 == 1 {
                        words[start + j / 64] |= 1 << (j % 64);
                    }
                }
            }
            Store::Bytes(b) => b.extend_from_slice(row),
        }
        self.rows += 1;
    }

    /// Row vector times matrix: `v · self`.
    pub fn apply(&self, v: &[u8]) -> Vec<u8> {
        assert_eq!(v.len(), self.rows, "vector length must equal row count");
        let mut out = vec![0u8; self.cols];
        match &self.store {
            Store::Bits { stride, words } => {
                let mut acc = vec![0u64; *stride];
                for (i, &c) in v.iter().enumerate() {
                    if c & 1 == 1 {
                        for (a, w) in acc.iter_mut().zip(&words[i * stride..(i + 1) * stride]) {
                            *a ^= w;
                        }
                    }
                }
                for (j, o) in out.iter_mut().enumerate() {
                    *o = ((acc[j / 64] >> (j % 64)) & 1) as u8;
                }
            }
            Store::Bytes(b) => {
                for (i, &c) in v.iter().enumerate() {
                    if c != 0 {
                        add_scaled(self.prime, &mut out, &b[i * self.cols..(i + 1) * self.cols], c);
                    }
                }
            }
        }
        out
    }

    /// Matrix times column vector: `self · x`.
    pub fn mul_vec(&self, x: &[u8]) -> Vec<u8> {
        assert_eq!(x.len(), self.cols, "vector length must equal column count");
        (0..self.rows)
            .map(|i| {
                let mut s = 0u8;
                for (j, &xj) in x.iter().enumerate() {
                    if xj != 0 {
                        s = self.prime.add(s, self.prime.mul(self.get(i, j), xj));
                    }
                }
                s
            })
            .collect()
    }

    /// `self · other`.
    pub fn matmul(&self, other: &FpMatrix) -> FpMatrix {
        assert_eq!(self.prime, other.prime);
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let mut out = FpMatrix::zeros(self.prime, 0, other.cols);
        for i in 0..self.rows {
            out.push_row(&other.apply(&self.row(i)));
        }
        out
    }

    pub fn transpose(&self) -> FpMatrix {
        let mut t = FpMatrix::zeros(self.prime, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let x = self.get(i, j);
                if x != 0 {
                    t.set(j, i, x);
                }
            }
        }
        t
    }

    pub fn add(&self, other: &FpMatrix) -> FpMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for i in 0..self.rows {
            for j in 0..self.cols {
                let y = other.get(i, j);
                if y != 0 {
                    out.set(i, j, self.prime.add(self.get(i, j), y));
                }
            }
        }
        out
    }

    pub fn scale(&self, c: u8) -> FpMatrix {
        let mut out = FpMatrix::zeros(self.prime, self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.prime.mul(self.get(i, j), c));
            }
        }
        out
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        match &mut self.store {
            Store::Bits { stride, words } => {
                for k in 0..*stride {
                    words.swap(a * *stride + k, b * *stride + k);
                }
            }
            Store::Bytes(v) => {
                for k in 0..self.cols {
                    v.swap(a * self.cols + k, b * self.cols + k);
                }
            }
        }
    }

    fn scale_row(&mut self, i: usize, c: u8) {
        if let Store::Bytes(v) = &mut self.store {
            for x in &mut v[i * self.cols..(i + 1) * self.cols] {
                *x = self.prime.mul(*x, c);
            }
        }
    }

    /// Clear column `col` in every row except `pivot_row`, whose entry there
    /// must be 1. Rows are independent, so large matrices are split across
    /// threads.
    fn eliminate_column(&mut self, pivot_row: usize, col: usize) {
        let prime = self.prime;
        let cols = self.cols;
        let big = self.rows * cols >= PAR_ELIM_THRESHOLD;
        match &mut self.store {
            Store::Bits { stride, words } => {
                let stride = *stride;
                if stride == 0 {
                    return;
                }
                let first = col / 64;
                let pivot: Vec<u64> = words[pivot_row * stride..(pivot_row + 1) * stride].to_vec();
                let mask = 1u64 << (col % 64);
                let job = |i: usize, row: &mut [u64]| {
                    if i != pivot_row && row[first] & mask != 0 {
                        for k in first..stride {
                            row[k] ^= pivot[k];
                        }
                    }
                };
                if big {
                    par::for_each_chunk_mut(words, stride, job);
                } else {
                    for (i, row) in words.chunks_mut(stride).enumerate() {
                        job(i, row);
                    }
                }
            }
            Store::Bytes(v) => {
                if cols == 0 {
                    return;
                }
                let pivot: Vec<u8> = v[pivot_row * cols..(pivot_row + 1) * cols].to_vec();
                let job = |i: usize, row: &mut [u8]| {
                    let c = row[col];
                    if i != pivot_row && c != 0 {
                        let f = prime.neg(c);
                        for k in col..cols {
                            if pivot[k] != 0 {
                                row[k] = prime.add(row[k], prime.mul(pivot[k], f));
                            }
                        }
                    }
                };
                if big {
                    par::for_each_chunk_mut(v, cols, job);
                } else {
                    for (i, row) in v.chunks_mut(cols).enumerate() {
                        job(i, row);
                    }
                }
            }
        }
    }

    /// In-place reduced row echelon form restricted to the first `limit`
    /// columns. Pivot search is leftmost column first, and within a column
    /// the first nonzero row at or below the current position. Returns the
    /// pivot columns.
    fn rref_in_place(&mut self, limit: usize) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..limit.min(self.cols) {
            if r == self.rows {
                break;
            }
            let Some(pr) = (r..self.rows).find(|&i| self.get(i, c) != 0) else {
                continue;
            };
            self.swap_rows(r, pr);
            let inv = self.prime.inv(self.get(r, c));
            self.scale_row(r, inv);
            self.eliminate_column(r, c);
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    fn truncate_rows(&mut self, n: usize) {
        match &mut self.store {
            Store::Bits { stride, words } => words.truncate(n * *stride),
            Store::Bytes(v) => v.truncate(n * self.cols),
        }
        self.rows = n;
    }

    /// Reduced row echelon form. The zero rows are kept at the bottom so the
    /// result has the same shape as the input.
    pub fn rref(&self) -> Rref {
        let mut m = self.clone();
        let pivots = m.rref_in_place(self.cols);
        let rank = pivots.len();
        Rref { reduced: m, pivots, rank }
    }

    pub fn rank(&self) -> usize {
        self.rref().rank
    }

    /// Basis of `{ x : self · x = 0 }`, one vector per row, ordered by the
    /// free column each vector is normalised at.
    pub fn kernel_basis(&self) -> FpMatrix {
        let Rref { reduced, pivots, .. } = self.rref();
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let mut k = FpMatrix::zeros(self.prime, 0, self.cols);
        for f in (0..self.cols).filter(|&c| !is_pivot[c]) {
            let mut v = vec![0u8; self.cols];
            v[f] = 1;
            for (i, &p) in pivots.iter().enumerate() {
                v[p] = self.prime.neg(reduced.get(i, f));
            }
            k.push_row(&v);
        }
        k
    }

    /// Solve `self · x = b`. `None` means `b` is not in the column space.
    pub fn solve(&self, b: &[u8]) -> Result<Option<Vec<u8>>, FpError> {
        if b.len() != self.rows {
            return Err(FpError::Dimension { expected: self.rows, got: b.len() });
        }
        let mut aug = FpMatrix::zeros(self.prime, 0, self.cols + 1);
        for i in 0..self.rows {
            let mut r = self.row(i);
            r.push(b[i]);
            aug.push_row(&r);
        }
        let pivots = aug.rref_in_place(self.cols + 1);
        if pivots.last() == Some(&self.cols) {
            return Ok(None);
        }
        let mut x = vec![0u8; self.cols];
        for (i, &p) in pivots.iter().enumerate() {
            x[p] = aug.get(i, self.cols);
        }
        Ok(Some(x))
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn hstack(&self, other: &FpMatrix) -> FpMatrix {
        assert_eq!(self.rows, other.rows);
        let mut out = FpMatrix::zeros(self.prime, 0, self.cols + other.cols);
        for i in 0..self.rows {
            let mut r = self.row(i);
            r.extend(other.row(i));
            out.push_row(&r);
        }
        out
    }

    /// Keep only the columns in `range`.
    pub fn columns(&self, range: std::ops::Range<usize>) -> FpMatrix {
        let mut out = FpMatrix::zeros(self.prime, 0, range.len());
        for i in 0..self.rows {
            out.push_row(&self.row(i)[range.clone()]);
        }
        out
    }
}

impl fmt::Debug for FpMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "FpMatrix<F_{}> {}x{}", self.prime, self.rows, self.cols)?;
        for i in 0..self.rows {
            let r: Vec<String> = self.row(i).iter().map(|x| x.to_string()).collect();
            writeln!(f, "  [{}]", r.join(" "))?;
        }
        Ok(())
    }
}

/// Result of [`FpMatrix::rref`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rref {
    pub reduced: FpMatrix,
    pub pivots: Vec<usize>,
    pub rank: usize,
}

/// Row reduction of a matrix `D` that remembers how each reduced row was
/// assembled from the original rows.
///
/// With `D` read as a linear map (one row per source basis vector) this
/// answers three questions at once: a basis of the image, a basis of the
/// kernel, and a preimage for any vector in the image.
#[derive(Clone, Debug)]
pub struct RowReduction {
    prime: Prime,
    source_dim: usize,
    target_dim: usize,
    /// Echelon rows of the image (reduced form).
    image: FpMatrix,
    pivots: Vec<usize>,
    /// `combos.row(i) · D = image.row(i)`.
    combos: FpMatrix,
    kernel: FpMatrix,
}

impl RowReduction {
    pub fn new(d: &FpMatrix) -> Self {
        let prime = d.prime();
        let (n, m) = (d.rows(), d.cols());
        let mut aug = d.hstack(&FpMatrix::identity(prime, n));
        let pivots = aug.rref_in_place(m);
        let rank = pivots.len();
        let image = {
            let mut im = aug.columns(0..m);
            im.truncate_rows(rank);
            im
        };
        let all_combos = aug.columns(m..m + n);
        let mut combos = FpMatrix::zeros(prime, 0, n);
        let mut kernel_rows = FpMatrix::zeros(prime, 0, n);
        for i in 0..n {
            if i < rank {
                combos.push_row(&all_combos.row(i));
            } else {
                kernel_rows.push_row(&all_combos.row(i));
            }
        }
        // Normalise the kernel so the basis is canonical.
        let mut kernel = kernel_rows.rref().reduced;
        kernel.truncate_rows(n - rank);
        RowReduction { prime, source_dim: n, target_dim: m, image, pivots, combos, kernel }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }
    pub fn source_dim(&self) -> usize {
        self.source_dim
    }
    pub fn target_dim(&self) -> usize {
        self.target_dim
    }
    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }
    pub fn image(&self) -> &FpMatrix {
        &self.image
    }
    /// Rows span `{ x : x · D = 0 }`, in reduced echelon form.
    pub fn kernel(&self) -> &FpMatrix {
        &self.kernel
    }

    /// Reduce `v` against the image; returns the residual and the
    /// coefficients used on each echelon row.
    fn reduce(&self, v: &[u8]) -> (Vec<u8>, Vec<u8>) {
        let mut r = v.to_vec();
        let mut coeffs = vec![0u8; self.pivots.len()];
        for (i, &p) in self.pivots.iter().enumerate() {
            let c = r[p];
            if c != 0 {
                coeffs[i] = c;
                add_scaled(self.prime, &mut r, &self.image.row(i), self.prime.neg(c));
            }
        }
        (r, coeffs)
    }

    pub fn contains(&self, v: &[u8]) -> bool {
        is_zero(&self.reduce(v).0)
    }

    /// Some `x` with `x · D = v`, if one exists.
    pub fn preimage(&self, v: &[u8]) -> Option<Vec<u8>> {
        assert_eq!(v.len(), self.target_dim);
        let (residual, coeffs) = self.reduce(v);
        if !is_zero(&residual) {
            return None;
        }
        let mut x = vec![0u8; self.source_dim];
        for (i, &c) in coeffs.iter().enumerate() {
            if c != 0 {
                add_scaled(self.prime, &mut x, &self.combos.row(i), c);
            }
        }
        Some(x)
    }
}

/// An incrementally grown subspace in reduced echelon form.
#[derive(Clone, Debug)]
pub struct Subspace {
    prime: Prime,
    dim: usize,
    rows: Vec<Vec<u8>>,
    pivots: Vec<usize>,
}

impl Subspace {
    pub fn new(prime: Prime, dim: usize) -> Self {
        Subspace { prime, dim, rows: Vec::new(), pivots: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn reduce(&self, v: &mut [u8]) {
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            let c = v[p];
            if c != 0 {
                add_scaled(self.prime, v, row, self.prime.neg(c));
            }
        }
    }

    pub fn contains(&self, v: &[u8]) -> bool {
        let mut w = v.to_vec();
        self.reduce(&mut w);
        is_zero(&w)
    }

    /// Add `v`; returns false when it was already in the span.
    pub fn insert(&mut self, v: &[u8]) -> bool {
        assert_eq!(v.len(), self.dim);
        let mut w = v.to_vec();
        self.reduce(&mut w);
        let Some(p) = w.iter().position(|&x| x != 0) else {
            return false;
        };
        let inv = self.prime.inv(w[p]);
        for x in w.iter_mut() {
            *x = self.prime.mul(*x, inv);
        }
        for row in &mut self.rows {
            let c = row[p];
            if c != 0 {
                add_scaled(self.prime, row, &w, self.prime.neg(c));
            }
        }
        let at = self.pivots.partition_point(|&q| q < p);
        self.pivots.insert(at, p);
        self.rows.insert(at, w);
        true
    }

    pub fn basis(&self) -> &[Vec<u8>] {
        &self.rows
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(p: Prime, rows: &[&[i64]]) -> FpMatrix {
        FpMatrix::from_ints(p, &rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>())
    }

    #[test]
    fn empty_matrix() {
        let z = FpMatrix::zeros(Prime::TWO, 0, 0);
        let r = z.rref();
        assert_eq!(r.rank, 0);
        assert!(r.pivots.is_empty());
        assert_eq!((r.reduced.rows(), r.reduced.cols()), (0, 0));
    }

    #[test]
    fn identity_rref() {
        let id = FpMatrix::identity(Prime::TWO, 3);
        let r = id.rref();
        assert_eq!(r.reduced, id);
        assert_eq!(r.pivots, vec![0, 1, 2]);
        assert_eq!(r.rank, 3);
        assert_eq!(id.kernel_basis().rows(), 0);
    }

    #[test]
    fn f3_two_by_two() {
        // det = 1*1 - 2*2 = -3 = 0 mod 3; second row is twice the first.
        let a = m(Prime::THREE, &[&[1, 2], &[2, 1]]);
        assert_eq!(a.rank(), 1);
        let k = a.kernel_basis();
        assert_eq!(k.rows(), 1);
        assert!(is_zero(&a.mul_vec(&k.row(0))));
    }

    #[test]
    fn kernel_examples() {
        let z = FpMatrix::zeros(Prime::THREE, 2, 3);
        assert_eq!(z.kernel_basis().rows(), 3);
        let one_one = m(Prime::TWO, &[&[1, 1]]);
        assert_eq!(one_one.kernel_basis().to_rows(), vec![vec![1, 1]]);
    }

    #[test]
    fn solve_examples() {
        let id = FpMatrix::identity(Prime::THREE, 3);
        assert_eq!(id.solve(&[2, 0, 1]).unwrap(), Some(vec![2, 0, 1]));
        let z = FpMatrix::zeros(Prime::TWO, 2, 2);
        assert_eq!(z.solve(&[1, 0]).unwrap(), None);
        let a = m(Prime::TWO, &[&[1, 1], &[0, 0]]);
        let x = a.solve(&[1, 0]).unwrap().unwrap();
        assert_eq!(a.mul_vec(&x), vec![1, 0]);
        assert!(matches!(a.solve(&[1]), Err(FpError::Dimension { .. })));
    }

    #[test]
    fn wide_bit_rows() {
        // crosses a word boundary
        let mut a = FpMatrix::zeros(Prime::TWO, 2, 130);
        a.set(0, 0, 1);
        a.set(0, 129, 1);
        a.set(1, 129, 1);
        let r = a.rref();
        assert_eq!(r.pivots, vec![0, 129]);
        assert_eq!(r.reduced.get(0, 129), 0);
        assert_eq!(a.kernel_basis().rows(), 128);
    }

    #[test]
    fn row_reduction_preimage_and_kernel() {
        let d = m(Prime::THREE, &[&[1, 0, 2], &[2, 0, 1], &[0, 1, 1]]);
        let rr = RowReduction::new(&d);
        assert_eq!(rr.rank(), 2);
        assert_eq!(rr.kernel().rows(), 1);
        assert!(is_zero(&d.apply(&rr.kernel().row(0))));
        let target = d.apply(&[1, 1, 2]);
        let x = rr.preimage(&target).unwrap();
        assert_eq!(d.apply(&x), target);
        assert!(rr.preimage(&[0, 0, 1]).is_none());
    }

    #[test]
    fn subspace_insert() {
        let mut s = Subspace::new(Prime::THREE, 3);
        assert!(s.insert(&[0, 1, 2]));
        assert!(s.insert(&[1, 1, 0]));
        assert!(!s.insert(&[1, 2, 2]));
        assert!(s.contains(&[2, 1, 1]));
        assert!(!s.contains(&[0, 0, 1]));
    }
}
