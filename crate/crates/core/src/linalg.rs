//! Exact linear algebra over F2 and F2[tau].
//!
//! `BitMatrix` is a dense, u64-packed matrix over F2 with row-echelon
//! Gaussian elimination, left-kernel extraction, deterministic solving
//! (free variables set to zero), and quotient-space bookkeeping for
//! cohomology classes. Echelon rows keep their above-pivot entries: every
//! consumer reduces against pivot rows in ascending pivot order, which
//! yields the same canonical result (the unique representative with zero
//! bits in all pivot columns) as a fully reduced form would. Elimination
//! is branch-order deterministic — two runs on the same input produce
//! bit-identical output — and large matrices eliminate rows in parallel,
//! which does not affect the result since each row's final value is
//! independent of the order in which other rows are processed.
//!
//! `TauMatrix` is a matrix over the graded PID F2[tau] with Smith normal
//! form; diagonal entries are monic (the only unit is 1) and satisfy
//! d_i | d_{i+1}.

use rayon::prelude::*;

// ---------------------------------------------------------------------------
// F2 matrices
// ---------------------------------------------------------------------------

/// Work size (in u64 words touched per elimination step) above which row
/// updates run in parallel. Small blocks stay serial: the fork overhead
/// would exceed the XOR work.
const PAR_ELIM_WORDS: usize = 1 << 21;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitMatrix {
    pub rows: usize,
    pub cols: usize,
    wpr: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        let wpr = cols.div_ceil(64).max(1);
        BitMatrix {
            rows,
            cols,
            wpr,
            data: vec![0; rows * wpr],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn words_per_row(&self) -> usize {
        self.wpr
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        (self.data[r * self.wpr + c / 64] >> (c % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        let w = &mut self.data[r * self.wpr + c / 64];
        if v {
            *w |= 1 << (c % 64);
        } else {
            *w &= !(1 << (c % 64));
        }
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.wpr..(r + 1) * self.wpr]
    }

    pub fn row_vec(&self, r: usize) -> Vec<u64> {
        self.row(r).to_vec()
    }

    pub fn set_row(&mut self, r: usize, words: &[u64]) {
        debug_assert_eq!(words.len(), self.wpr);
        self.data[r * self.wpr..(r + 1) * self.wpr].copy_from_slice(words);
    }

    #[inline]
    pub fn xor_row_into(&mut self, dst: usize, src: usize) {
        let (d, s) = (dst * self.wpr, src * self.wpr);
        for k in 0..self.wpr {
            let v = self.data[s + k];
            self.data[d + k] ^= v;
        }
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for k in 0..self.wpr {
            self.data.swap(a * self.wpr + k, b * self.wpr + k);
        }
    }

    pub fn row_is_zero(&self, r: usize) -> bool {
        self.row(r).iter().all(|&w| w == 0)
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut t = BitMatrix::zero(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.get(r, c) {
                    t.set(c, r, true);
                }
            }
        }
        t
    }

    /// Row echelon form with transformation record:
    /// `transform * self = reduced`, pivots listed in elimination
    /// (ascending-column) order. Entries above pivots are not cleared;
    /// reducing a vector against the pivot rows in ascending order still
    /// yields the canonical representative with zero bits in every pivot
    /// column.
    pub fn rref(&self) -> Rref {
        self.echelon(true)
    }

    /// Echelon core on an augmented working buffer `[self | transform]`;
    /// keeping both halves in one row makes the elimination a single pass
    /// and lets big matrices fan the row updates out across threads.
    fn echelon(&self, with_transform: bool) -> Rref {
        let twpr = if with_transform {
            self.rows.div_ceil(64).max(1)
        } else {
            0
        };
        let awpr = self.wpr + twpr;
        let mut aug = vec![0u64; self.rows * awpr];
        for r in 0..self.rows {
            aug[r * awpr..r * awpr + self.wpr].copy_from_slice(self.row(r));
            if with_transform {
                aug[r * awpr + self.wpr + r / 64] |= 1 << (r % 64);
            }
        }
        let mut pivots = Vec::new();
        let mut next_row = 0usize;
        let mut pivot_buf = vec![0u64; awpr];
        for col in 0..self.cols {
            let (w, b) = (col / 64, col % 64);
            // First unused row with a 1 in this column.
            let Some(pivot) =
                (next_row..self.rows).find(|&r| (aug[r * awpr + w] >> b) & 1 == 1)
            else {
                continue;
            };
            if pivot != next_row {
                for k in 0..awpr {
                    aug.swap(next_row * awpr + k, pivot * awpr + k);
                }
            }
            pivot_buf.copy_from_slice(&aug[next_row * awpr..(next_row + 1) * awpr]);
            let tail = &mut aug[(next_row + 1) * awpr..];
            let eliminate = |row: &mut [u64]| {
                if (row[w] >> b) & 1 == 1 {
                    for (d, s) in row.iter_mut().zip(&pivot_buf) {
                        *d ^= s;
                    }
                }
            };
            if tail.len() >= PAR_ELIM_WORDS {
                tail.par_chunks_mut(awpr).for_each(eliminate);
            } else {
                tail.chunks_mut(awpr).for_each(eliminate);
            }
            pivots.push((next_row, col));
            next_row += 1;
            if next_row == self.rows {
                break;
            }
        }
        let mut reduced = BitMatrix::zero(self.rows, self.cols);
        let mut transform = BitMatrix::zero(if with_transform { self.rows } else { 0 }, self.rows);
        for r in 0..self.rows {
            reduced.data[r * self.wpr..(r + 1) * self.wpr]
                .copy_from_slice(&aug[r * awpr..r * awpr + self.wpr]);
            if with_transform {
                transform.data[r * transform.wpr..r * transform.wpr + twpr]
                    .copy_from_slice(&aug[r * awpr + self.wpr..(r + 1) * awpr]);
            }
        }
        Rref {
            reduced,
            transform,
            pivots,
        }
    }

    pub fn rank(&self) -> usize {
        self.echelon(false).pivots.len()
    }

    /// Echelon pivot rows as `(pivot column, packed row)` in ascending
    /// pivot order, skipping the transform record. Reducing a vector
    /// against these rows with `reduce_by_pivot_rows` tests membership in
    /// the row space and canonicalizes coset representatives.
    pub fn echelon_rows(&self) -> Vec<(usize, Vec<u64>)> {
        let rr = self.echelon(false);
        rr.pivots
            .iter()
            .map(|&(row, col)| (col, rr.reduced.row_vec(row)))
            .collect()
    }

    /// Basis of the left kernel { x : x * self = 0 }, one row per basis
    /// vector, in deterministic order.
    pub fn left_kernel(&self) -> BitMatrix {
        let rr = self.rref();
        let rank = rr.pivots.len();
        let n = self.rows - rank;
        let mut k = BitMatrix::zero(n, self.rows);
        for (i, row) in (rank..self.rows).enumerate() {
            k.set_row(i, rr.transform.row(row));
        }
        k
    }

    /// Solve x * self = v for a row vector v (given as packed words),
    /// choosing zero for all free coordinates. None if inconsistent.
    pub fn solve_left(&self, v: &[u64]) -> Option<Vec<u64>> {
        debug_assert_eq!(v.len(), self.wpr);
        let rr = self.rref();
        let mut res = v.to_vec();
        let mut combo = vec![0u64; self.rows.div_ceil(64).max(1)];
        for &(prow, pcol) in &rr.pivots {
            if (res[pcol / 64] >> (pcol % 64)) & 1 == 1 {
                for (k, word) in rr.reduced.row(prow).iter().enumerate() {
                    res[k] ^= word;
                }
                for (k, word) in rr.transform.row(prow).iter().enumerate() {
                    combo[k] ^= word;
                }
            }
        }
        if res.iter().all(|&w| w == 0) {
            Some(combo)
        } else {
            None
        }
    }

    /// Solve self * x = v in column semantics, free variables zero.
    pub fn solve(&self, v: &[bool]) -> Option<Vec<bool>> {
        debug_assert_eq!(v.len(), self.rows);
        let t = self.transpose();
        let mut packed = vec![0u64; t.wpr];
        for (i, &b) in v.iter().enumerate() {
            if b {
                packed[i / 64] |= 1 << (i % 64);
            }
        }
        let x = t.solve_left(&packed)?;
        Some((0..self.cols).map(|i| (x[i / 64] >> (i % 64)) & 1 == 1).collect())
    }

    pub fn mul(&self, other: &BitMatrix) -> BitMatrix {
        debug_assert_eq!(self.cols, other.rows);
        let mut out = BitMatrix::zero(self.rows, other.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.get(r, c) {
                    let (d, s) = (r * out.wpr, c * other.wpr);
                    for k in 0..other.wpr {
                        out.data[d + k] ^= other.data[s + k];
                    }
                }
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&w| w == 0)
    }
}

pub struct Rref {
    pub reduced: BitMatrix,
    pub transform: BitMatrix,
    /// (row, column) of each pivot in elimination order.
    pub pivots: Vec<(usize, usize)>,
}

/// Pack a bool slice into row words.
pub fn pack_bits(bits: &[bool]) -> Vec<u64> {
    let mut words = vec![0u64; bits.len().div_ceil(64).max(1)];
    for (i, &b) in bits.iter().enumerate() {
        if b {
            words[i / 64] |= 1 << (i % 64);
        }
    }
    words
}

pub fn unpack_bits(words: &[u64], len: usize) -> Vec<bool> {
    (0..len).map(|i| (words[i / 64] >> (i % 64)) & 1 == 1).collect()
}

// ---------------------------------------------------------------------------
// Quotient spaces: cycles modulo boundaries
// ---------------------------------------------------------------------------

/// A cocycle space modulo a coboundary space, with chosen representative
/// vectors and a deterministic coordinate function.
///
/// Boundary rows are stored fully row-reduced (each contains its own pivot
/// and no other boundary pivot). Class rows are stored in insertion order;
/// row `i` is reduced against all boundaries and all classes `< i`, so a
/// single pass in insertion order is a complete, canonical reduction: class
/// row `i` cannot reintroduce any pivot `<= i`, and no class row contains a
/// boundary pivot.
#[derive(Debug, Clone)]
pub struct QuotientSpace {
    pub cols: usize,
    wpr: usize,
    /// RREF rows of the boundary space, pivot-ascending.
    boundary: Vec<(usize, Vec<u64>)>,
    /// (pivot, reduced row) per class, in insertion order.
    classes: Vec<(usize, Vec<u64>)>,
    /// Index into the original cycle list for each class representative.
    pub rep_indices: Vec<usize>,
    /// Unreduced original representative vectors (canonical cocycles).
    pub rep_vectors: Vec<Vec<u64>>,
}

impl QuotientSpace {
    /// Build from cycle rows and boundary rows (packed, `cols` wide each).
    pub fn new(cols: usize, cycles: &[Vec<u64>], boundaries: &[Vec<u64>]) -> Self {
        let wpr = cols.div_ceil(64).max(1);
        let boundary: Vec<(usize, Vec<u64>)> = if boundaries.is_empty() {
            Vec::new()
        } else {
            let mut bm = BitMatrix::zero(boundaries.len(), cols);
            for (i, b) in boundaries.iter().enumerate() {
                bm.set_row(i, b);
            }
            bm.echelon_rows()
        };
        // Boundary reduction of each cycle is independent of the others, so
        // big batches run wide; class absorption below is order-dependent
        // and stays serial.
        let reduce = |z: &Vec<u64>| {
            let mut v = z.clone();
            reduce_by_pivot_rows(&boundary, &mut v);
            v
        };
        let pre: Vec<Vec<u64>> = if cycles.len() * wpr >= PAR_ELIM_WORDS {
            cycles.par_iter().map(reduce).collect()
        } else {
            cycles.iter().map(reduce).collect()
        };
        let mut q = QuotientSpace {
            cols,
            wpr,
            boundary,
            classes: Vec::new(),
            rep_indices: Vec::new(),
            rep_vectors: Vec::new(),
        };
        for (i, mut v) in pre.into_iter().enumerate() {
            q.reduce_by_classes(&mut v, None);
            if let Some(p) = first_bit(&v) {
                q.classes.push((p, v));
                q.rep_indices.push(i);
                q.rep_vectors.push(cycles[i].clone());
            }
        }
        q
    }

    fn reduce_by_boundary(&self, v: &mut [u64]) {
        reduce_by_pivot_rows(&self.boundary, v);
    }

    fn reduce_by_classes(&self, v: &mut [u64], mut coords: Option<&mut Vec<bool>>) {
        for (i, (p, row)) in self.classes.iter().enumerate() {
            if (v[p / 64] >> (p % 64)) & 1 == 1 {
                xor_into(v, row);
                if let Some(c) = coords.as_deref_mut() {
                    c[i] = true;
                }
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.classes.len()
    }

    /// Coordinates of a cocycle vector in the chosen class basis, indexed in
    /// insertion order (matching `rep_indices` / `rep_vectors`);
    /// None if it is not in span(classes + boundaries).
    pub fn express(&self, v: &[u64]) -> Option<Vec<bool>> {
        let mut w = v.to_vec();
        debug_assert_eq!(w.len(), self.wpr);
        self.reduce_by_boundary(&mut w);
        let mut coords = vec![false; self.classes.len()];
        self.reduce_by_classes(&mut w, Some(&mut coords));
        if w.iter().all(|&x| x == 0) {
            Some(coords)
        } else {
            None
        }
    }
}

fn xor_into(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= s;
    }
}

/// Clear every pivot bit of `v` against echelon rows sorted by ascending
/// pivot. A row may carry bits at later pivot columns; those get cleared
/// when their own turn comes, so the end result has zero bits in all pivot
/// columns — the canonical coset representative. The input lies in the row
/// space exactly when the result is zero.
pub fn reduce_by_pivot_rows(rows: &[(usize, Vec<u64>)], v: &mut [u64]) {
    for (p, row) in rows {
        if (v[p / 64] >> (p % 64)) & 1 == 1 {
            xor_into(v, row);
        }
    }
}

fn first_bit(v: &[u64]) -> Option<usize> {
    for (k, &w) in v.iter().enumerate() {
        if w != 0 {
            return Some(k * 64 + w.trailing_zeros() as usize);
        }
    }
    None
}

// ---------------------------------------------------------------------------
// F2[tau] matrices and Smith normal form
// ---------------------------------------------------------------------------

/// A polynomial in F2[tau], bit-packed by coefficient (bit k = tau^k).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TauPoly {
    words: Vec<u64>,
}

impl TauPoly {
    pub fn zero() -> Self {
        TauPoly { words: Vec::new() }
    }

    pub fn one() -> Self {
        TauPoly { words: vec![1] }
    }

    pub fn tau_pow(k: usize) -> Self {
        let mut words = vec![0u64; k / 64 + 1];
        words[k / 64] |= 1 << (k % 64);
        TauPoly { words }
    }

    fn trim(&mut self) {
        while let Some(&w) = self.words.last() {
            if w == 0 {
                self.words.pop();
            } else {
                break;
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        let w = *self.words.last()?;
        Some((self.words.len() - 1) * 64 + (63 - w.leading_zeros() as usize))
    }

    pub fn coeff(&self, k: usize) -> bool {
        self.words
            .get(k / 64)
            .map_or(false, |w| (w >> (k % 64)) & 1 == 1)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut words = vec![0u64; self.words.len().max(other.words.len())];
        for (i, w) in words.iter_mut().enumerate() {
            *w = self.words.get(i).copied().unwrap_or(0)
                ^ other.words.get(i).copied().unwrap_or(0);
        }
        let mut p = TauPoly { words };
        p.trim();
        p
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return TauPoly::zero();
        }
        let (da, db) = (self.degree().unwrap(), other.degree().unwrap());
        let mut words = vec![0u64; (da + db) / 64 + 1];
        for k in 0..=da {
            if self.coeff(k) {
                // xor other shifted by k
                let (ws, bs) = (k / 64, k % 64);
                for (i, &w) in other.words.iter().enumerate() {
                    words[i + ws] ^= w << bs;
                    if bs > 0 && i + ws + 1 < words.len() {
                        words[i + ws + 1] ^= w >> (64 - bs);
                    }
                }
            }
        }
        let mut p = TauPoly { words };
        p.trim();
        p
    }

    /// Euclidean division: self = q * d + r with deg r < deg d.
    pub fn divmod(&self, d: &Self) -> (Self, Self) {
        assert!(!d.is_zero(), "division by zero in F2[tau]");
        let dd = d.degree().unwrap();
        let mut r = self.clone();
        let mut q = TauPoly::zero();
        while let Some(dr) = r.degree() {
            if dr < dd {
                break;
            }
            let shift = dr - dd;
            q = q.add(&TauPoly::tau_pow(shift));
            r = r.add(&d.mul(&TauPoly::tau_pow(shift)));
        }
        (q, r)
    }

    pub fn divides(&self, other: &Self) -> bool {
        if self.is_zero() {
            return other.is_zero();
        }
        other.divmod(self).1.is_zero()
    }

    pub fn display(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut parts = Vec::new();
        for k in 0..=self.degree().unwrap() {
            if self.coeff(k) {
                parts.push(match k {
                    0 => "1".to_string(),
                    1 => "tau".to_string(),
                    _ => format!("tau^{k}"),
                });
            }
        }
        parts.join(" + ")
    }
}

/// A dense matrix over F2[tau] in column semantics (maps R^cols -> R^rows).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TauMatrix {
    pub rows: usize,
    pub cols: usize,
    e: Vec<TauPoly>,
}

impl TauMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        TauMatrix {
            rows,
            cols,
            e: vec![TauPoly::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            *m.at_mut(i, i) = TauPoly::one();
        }
        m
    }

    pub fn at(&self, r: usize, c: usize) -> &TauPoly {
        &self.e[r * self.cols + c]
    }

    pub fn at_mut(&mut self, r: usize, c: usize) -> &mut TauPoly {
        &mut self.e[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: TauPoly) {
        self.e[r * self.cols + c] = v;
    }

    pub fn mul(&self, other: &TauMatrix) -> TauMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = TauMatrix::zero(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                if self.at(r, k).is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    if other.at(k, c).is_zero() {
                        continue;
                    }
                    let add = self.at(r, k).mul(other.at(k, c));
                    let cur = out.at(r, c).add(&add);
                    out.set(r, c, cur);
                }
            }
        }
        out
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.e.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for r in 0..self.rows {
            self.e.swap(r * self.cols + a, r * self.cols + b);
        }
    }

    /// row_dst += q * row_src
    fn row_op(&mut self, dst: usize, src: usize, q: &TauPoly) {
        for c in 0..self.cols {
            let add = q.mul(self.at(src, c));
            let v = self.at(dst, c).add(&add);
            self.set(dst, c, v);
        }
    }

    /// col_dst += q * col_src
    fn col_op(&mut self, dst: usize, src: usize, q: &TauPoly) {
        for r in 0..self.rows {
            let add = q.mul(self.at(r, src));
            let v = self.at(r, dst).add(&add);
            self.set(r, dst, v);
        }
    }
}

/// Smith normal form over F2[tau].
pub struct Snf {
    /// Nonzero diagonal entries, monic, each dividing the next.
    pub diagonal: Vec<TauPoly>,
    /// Left transform: u * m * v = diag.
    pub u: TauMatrix,
    /// Right transform.
    pub v: TauMatrix,
    /// Full diagonalized matrix (rows x cols).
    pub d: TauMatrix,
}

pub fn snf_tau(m: &TauMatrix) -> Snf {
    let mut d = m.clone();
    let mut u = TauMatrix::identity(m.rows);
    let mut v = TauMatrix::identity(m.cols);
    let n = m.rows.min(m.cols);
    let mut k = 0usize;
    while k < n {
        // Find the minimal-degree nonzero entry in the trailing submatrix.
        let mut best: Option<(usize, usize, usize)> = None;
        for r in k..m.rows {
            for c in k..m.cols {
                if let Some(deg) = d.at(r, c).degree() {
                    if best.map_or(true, |(_, _, bd)| deg < bd) {
                        best = Some((r, c, deg));
                    }
                }
            }
        }
        let Some((pr, pc, _)) = best else { break };
        d.swap_rows(k, pr);
        u.swap_rows(k, pr);
        d.swap_cols(k, pc);
        v.swap_cols(k, pc);

        // Clear row and column k; restart if a remainder drops the degree.
        let mut dirty = true;
        while dirty {
            dirty = false;
            for r in (k + 1)..m.rows {
                if d.at(r, k).is_zero() {
                    continue;
                }
                let (q, rem) = d.at(r, k).divmod(d.at(k, k));
                d.row_op(r, k, &q);
                u.row_op(r, k, &q);
                if !rem.is_zero() {
                    // Remainder has smaller degree: promote it to the pivot.
                    d.swap_rows(k, r);
                    u.swap_rows(k, r);
                    dirty = true;
                }
            }
            for c in (k + 1)..m.cols {
                if d.at(k, c).is_zero() {
                    continue;
                }
                let (q, rem) = d.at(k, c).divmod(d.at(k, k));
                d.col_op(c, k, &q);
                v.col_op(c, k, &q);
                if !rem.is_zero() {
                    d.swap_cols(k, c);
                    v.swap_cols(k, c);
                    dirty = true;
                }
            }
        }

        // Enforce divisibility of the remaining submatrix by the pivot.
        let mut fixed = false;
        'scan: for r in (k + 1)..m.rows {
            for c in (k + 1)..m.cols {
                if !d.at(k, k).divides(d.at(r, c)) {
                    // Fold that row into row k and redo this pivot.
                    d.row_op(k, r, &TauPoly::one());
                    u.row_op(k, r, &TauPoly::one());
                    fixed = true;
                    break 'scan;
                }
            }
        }
        if fixed {
            continue;
        }
        k += 1;
    }
    let diagonal = (0..n)
        .map(|i| d.at(i, i).clone())
        .take_while(|p| !p.is_zero())
        .collect();
    Snf { diagonal, u, v, d }
}

/// Basis of ker(m) (column semantics) over F2[tau]: the columns of V
/// corresponding to zero diagonal entries. The kernel of a map of free
/// modules over a PID is free.
pub fn tau_kernel_basis(m: &TauMatrix) -> Vec<Vec<TauPoly>> {
    let snf = snf_tau(m);
    let rank = snf.diagonal.len();
    let mut out = Vec::new();
    for c in rank..m.cols {
        let col = (0..m.cols).map(|r| snf.v.at(r, c).clone()).collect();
        out.push(col);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rref_and_rank() {
        let mut m = BitMatrix::zero(3, 4);
        // rows: 1101, 0110, 1011  (third = first + second)
        for (r, bits) in [[1, 1, 0, 1], [0, 1, 1, 0], [1, 0, 1, 1]].iter().enumerate() {
            for (c, &b) in bits.iter().enumerate() {
                m.set(r, c, b == 1);
            }
        }
        let rr = m.rref();
        assert_eq!(rr.pivots.len(), 2);
        // transform * m = reduced
        assert_eq!(rr.transform.mul(&m), rr.reduced);
        // rank + kernel dim = rows
        assert_eq!(m.left_kernel().rows, 1);
        // rref of rref is itself
        let rr2 = rr.reduced.rref();
        assert_eq!(rr2.reduced, rr.reduced);
    }

    #[test]
    fn solve_column_semantics() {
        let id = BitMatrix::identity(5);
        let v = vec![true, false, true, true, false];
        assert_eq!(id.solve(&v).unwrap(), v);
        let z = BitMatrix::zero(3, 3);
        assert!(z.solve(&[true, false, false]).is_none());
        assert_eq!(z.solve(&[false; 3]).unwrap(), vec![false; 3]);
    }

    #[test]
    fn solve_left_self_verifies() {
        let mut m = BitMatrix::zero(4, 6);
        let rows = [
            [1, 0, 1, 0, 1, 0],
            [0, 1, 1, 0, 0, 1],
            [1, 1, 0, 1, 0, 0],
            [0, 0, 0, 1, 1, 1],
        ];
        for (r, bits) in rows.iter().enumerate() {
            for (c, &b) in bits.iter().enumerate() {
                m.set(r, c, b == 1);
            }
        }
        // v = row0 + row2
        let mut v = m.row_vec(0);
        for (d, s) in v.iter_mut().zip(m.row(2)) {
            *d ^= s;
        }
        let x = m.solve_left(&v).unwrap();
        // verify x * m = v
        let mut check = vec![0u64; m.words_per_row()];
        for r in 0..m.rows {
            if (x[r / 64] >> (r % 64)) & 1 == 1 {
                for (d, s) in check.iter_mut().zip(m.row(r)) {
                    *d ^= s;
                }
            }
        }
        assert_eq!(check, v);
    }

    #[test]
    fn quotient_space_basics() {
        // cols = 3; boundaries span {e0+e1}; cycles: e0+e1 (trivial), e2.
        let b = vec![pack_bits(&[true, true, false])];
        let z = vec![
            pack_bits(&[true, true, false]),
            pack_bits(&[false, false, true]),
        ];
        let q = QuotientSpace::new(3, &z, &b);
        assert_eq!(q.dim(), 1);
        assert_eq!(q.rep_indices, vec![1]);
        // e2 expresses as the class; e0+e1 expresses as zero.
        assert_eq!(q.express(&pack_bits(&[false, false, true])).unwrap(), vec![true]);
        assert_eq!(q.express(&pack_bits(&[true, true, false])).unwrap(), vec![false]);
        // e0 alone is not a combination of classes + boundaries.
        assert!(q.express(&pack_bits(&[true, false, false])).is_none());
    }

    #[test]
    fn tau_poly_arithmetic() {
        let t = TauPoly::tau_pow(1);
        let one = TauPoly::one();
        let p = t.add(&one); // tau + 1
        let sq = p.mul(&p); // tau^2 + 1 over F2
        assert_eq!(sq, TauPoly::tau_pow(2).add(&one));
        let (q, r) = sq.divmod(&p);
        assert_eq!(q, p);
        assert!(r.is_zero());
        let (q, r) = TauPoly::tau_pow(3).divmod(&p);
        // tau^3 = (tau^2 + tau + 1)(tau + 1) + 1
        assert_eq!(q, TauPoly::tau_pow(2).add(&TauPoly::tau_pow(1)).add(&one));
        assert_eq!(r, one);
    }

    #[test]
    fn snf_diagonal_examples() {
        // diag(tau, tau^2) stays put.
        let mut m = TauMatrix::zero(2, 2);
        m.set(0, 0, TauPoly::tau_pow(1));
        m.set(1, 1, TauPoly::tau_pow(2));
        let s = snf_tau(&m);
        assert_eq!(s.diagonal, vec![TauPoly::tau_pow(1), TauPoly::tau_pow(2)]);
        assert_eq!(s.u.mul(&m).mul(&s.v), s.d);

        // [[tau, 1], [0, tau^2]] -> (1, tau^3).
        let mut m = TauMatrix::zero(2, 2);
        m.set(0, 0, TauPoly::tau_pow(1));
        m.set(0, 1, TauPoly::one());
        m.set(1, 1, TauPoly::tau_pow(2));
        let s = snf_tau(&m);
        assert_eq!(s.diagonal, vec![TauPoly::one(), TauPoly::tau_pow(3)]);
        assert_eq!(s.u.mul(&m).mul(&s.v), s.d);
        for w in s.diagonal.windows(2) {
            assert!(w[0].divides(&w[1]));
        }

        // zero matrix -> empty diagonal.
        let z = TauMatrix::zero(3, 2);
        assert!(snf_tau(&z).diagonal.is_empty());
    }

    #[test]
    fn tau_kernel() {
        // m = [tau, tau] : R^2 -> R^1; kernel is free rank 1 on (1, 1)
        // (times a unit).
        let mut m = TauMatrix::zero(1, 2);
        m.set(0, 0, TauPoly::tau_pow(1));
        m.set(0, 1, TauPoly::tau_pow(1));
        let k = tau_kernel_basis(&m);
        assert_eq!(k.len(), 1);
        // Verify m * k = 0.
        let combo = m.at(0, 0).mul(&k[0][0]).add(&m.at(0, 1).mul(&k[0][1]));
        assert!(combo.is_zero());
    }
}
