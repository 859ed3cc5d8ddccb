//! Enumerative codec for the simple Grassmannian Gray code: index `m` to
//! the `m`-th subspace and back.
//!
//! Both directions follow the recursion of the construction. A subspace
//! whose last column is zero lies in the `(n-1, k)` part and keeps its
//! index; otherwise it is `C''_i ⊕ span(v)` with `C''_i` from the
//! `(n-1, k-1)` code and `v` at position `j` of block `i`, and its index is
//! `[n-1, k]_q + ((q^(n-k) i + j - 1) mod q^(n-k) [n-1, k-1]_q)`.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::field::Field;
use crate::grassmann::{
    extension_vector, insert_by_lead, non_pivots, simple_rows, split_at_column, swap_digits, Rows,
    Walker,
};
use crate::linalg::{LinalgError, Matrix, Subspace};
use crate::qcombin::{self, QError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("index {m} out of range for a code of length {len}")]
    OutOfRange { m: BigUint, len: BigUint },
    #[error("expected a {k}-dimensional subspace of GF(q)^{n}, got dimension {got_k} in GF(q)^{got_n}")]
    Dimension { n: usize, k: usize, got_n: usize, got_k: usize },
    #[error("k = {k} exceeds n = {n}")]
    Params { n: usize, k: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Counting(#[from] QError),
}

/// Little-endian base-`q` digits of `x`, padded to `len`.
pub fn to_digits(x: &BigUint, q: u32, len: usize) -> Vec<u32> {
    let mut out = Vec::with_capacity(len);
    if q.is_power_of_two() {
        let w = q.trailing_zeros() as u64;
        for l in 0..len as u64 {
            let mut d = 0;
            for b in 0..w {
                if x.bit(l * w + b) {
                    d |= 1 << b;
                }
            }
            out.push(d);
        }
        return out;
    }
    let mut rest = x.clone();
    let qb = BigUint::from(q);
    for _ in 0..len {
        let (quot, rem) = rest.div_rem(&qb);
        out.push(rem.to_u32().unwrap());
        rest = quot;
    }
    out
}

/// Inverse of [`to_digits`].
pub fn from_digits(d: &[u32], q: u32) -> BigUint {
    if q.is_power_of_two() {
        let w = q.trailing_zeros() as usize;
        let mut words = vec![0u32; (d.len() * w).div_ceil(32)];
        for (l, &x) in d.iter().enumerate() {
            for b in 0..w {
                if x >> b & 1 == 1 {
                    let bit = l * w + b;
                    words[bit / 32] |= 1 << (bit % 32);
                }
            }
        }
        return BigUint::new(words);
    }
    // Horner over chunks of digits that fit in a u64
    let per = (u64::MAX.ilog(q as u64) as usize).max(1);
    let mut acc = BigUint::zero();
    for chunk in d.rchunks(per) {
        let (mut scale, mut val) = (1u64, 0u64);
        for &x in chunk.iter().rev() {
            scale *= q as u64;
            val = val * q as u64 + x as u64;
        }
        acc = acc * scale + val;
    }
    acc
}

/// Codec for the simple `(n, k; q)` code.
#[derive(Debug, Clone)]
pub struct Codec {
    field: Field,
    n: usize,
    k: usize,
    len: BigUint,
}

struct EncodeFrame {
    level: usize,
    k: usize,
    j: BigUint,
}

struct DecodeFrame {
    below: BigUint,
    block: BigUint,
    blocks: BigUint,
    j: BigUint,
}

impl Codec {
    pub fn new(field: &Field, n: usize, k: usize) -> Result<Self, CodecError> {
        if k > n {
            return Err(CodecError::Params { n, k });
        }
        let len = qcombin::gaussian(n, k, field.q() as u64)?;
        Ok(Codec { field: field.clone(), n, k, len })
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of codewords, `[n, k]_q`.
    pub fn len(&self) -> &BigUint {
        &self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn walker(&self) -> Walker<'_> {
        Walker { field: &self.field, width: self.n }
    }

    fn q(&self) -> u64 {
        self.field.q() as u64
    }

    /// The `m`-th subspace of the simple code.
    pub fn encode(&self, m: &BigUint) -> Result<Subspace, CodecError> {
        if *m >= self.len {
            return Err(CodecError::OutOfRange { m: m.clone(), len: self.len.clone() });
        }
        let q = self.q();
        let (mut level, mut k) = (self.n, self.k);
        let mut g = self.len.clone();
        let mut m = m.clone();
        let mut frames = Vec::new();
        while k != 0 && k != level {
            let (inner, outer) = qcombin::gaussian_step_down(&g, level, k, q)?;
            if m < outer {
                g = outer;
            } else {
                let block = qcombin::q_pow(q, level - k);
                let t = m - &outer + 1u32;
                let (i, j) = t.div_rem(&block);
                frames.push(EncodeFrame { level, k, j });
                m = i % &inner;
                g = inner;
                k -= 1;
            }
            level -= 1;
        }

        let walker = self.walker();
        let mut rows = simple_rows(self.n, k);
        for f in frames.iter().rev() {
            rows = self.extend_rows(&walker, rows, f.level, f.k, &f.j);
        }
        Ok(Subspace::from_canonical_rows(&self.field, self.n, &rows))
    }

    /// Appends the representative at position `j` of the block of `base`.
    fn extend_rows(&self, walker: &Walker<'_>, base: Rows, level: usize, k: usize, j: &BigUint) -> Rows {
        let q = self.field.q();
        let r = non_pivots(&base, level - 1);
        let mut d = to_digits(j, q, level - k);
        if !base.is_empty() {
            let next = walker.successor(level - 1, k - 1, &base);
            let link = walker.link_digits(&base, &next, &r);
            swap_digits(&mut d, Some(&link), q - 1);
        }
        let mut rows = base;
        insert_by_lead(&mut rows, extension_vector(self.n, level - 1, &r, &d));
        rows
    }

    fn check(&self, w: &Subspace) -> Result<(), CodecError> {
        if !w.field().same_as(&self.field) {
            return Err(LinalgError::FieldMismatch(self.field.q(), w.field().q()).into());
        }
        if w.ambient() != self.n || w.dim() != self.k {
            return Err(CodecError::Dimension { n: self.n, k: self.k, got_n: w.ambient(), got_k: w.dim() });
        }
        Ok(())
    }

    /// Splits off the row reaching column `level - 1` and returns the
    /// remaining rows with the position digits of the removed row.
    fn peel(&self, walker: &Walker<'_>, rows: &mut Rows, level: usize) -> BigUint {
        let q = self.field.q();
        let (base, v) = split_at_column(rows, level - 1);
        let r = non_pivots(&base, level - 1);
        let mut d: Vec<u32> = r.iter().map(|&c| v[c]).collect();
        if !base.is_empty() {
            let next = walker.successor(level - 1, base.len(), &base);
            let link = walker.link_digits(&base, &next, &r);
            swap_digits(&mut d, Some(&link), q - 1);
        }
        *rows = base;
        from_digits(&d, q)
    }

    fn fold(frames: Vec<DecodeFrame>) -> BigUint {
        let mut m = BigUint::zero();
        for f in frames.into_iter().rev() {
            let span = &f.block * &f.blocks;
            m = f.below + (&f.block * m + f.j + &span - 1u32) % span;
        }
        m
    }

    /// Index of `w`, carrying the Gaussian coefficients down level by level.
    pub fn decode(&self, w: &Subspace) -> Result<BigUint, CodecError> {
        self.check(w)?;
        let q = self.q();
        let walker = self.walker();
        let mut rows = w.rows();
        let (mut level, mut k) = (self.n, self.k);
        let mut g = self.len.clone();
        let mut frames = Vec::new();
        while k != 0 && k != level {
            let (inner, outer) = qcombin::gaussian_step_down(&g, level, k, q)?;
            if rows.iter().all(|r| r[level - 1] == 0) {
                g = outer;
            } else {
                let j = self.peel(&walker, &mut rows, level);
                frames.push(DecodeFrame { below: outer, block: qcombin::q_pow(q, level - k), blocks: inner.clone(), j });
                g = inner;
                k -= 1;
            }
            level -= 1;
        }
        Ok(Self::fold(frames))
    }

    /// Same value as [`Codec::decode`]. Runs of zero columns are skipped
    /// without arithmetic, the successors needed for the links are built
    /// once from the innermost base outwards, and the two coefficients at
    /// each of the at most `k` extension steps come from a product tree.
    pub fn decode_fast(&self, w: &Subspace) -> Result<BigUint, CodecError> {
        self.check(w)?;
        let q = self.q();
        let fq = self.field.q();
        let walker = self.walker();
        let mut rows = w.rows();
        let (mut level, mut k) = (self.n, self.k);
        let mut peeled = Vec::new();
        while k != 0 && k != level {
            let top = rows.iter().filter_map(|r| r.iter().rposition(|&x| x != 0)).max().unwrap();
            level = level.min(top + 1);
            if k == level {
                break;
            }
            let (base, v) = split_at_column(&rows, level - 1);
            peeled.push((level, k, v));
            rows = base;
            k -= 1;
            level -= 1;
        }

        let mut frames = Vec::with_capacity(peeled.len());
        // successor of the base one frame further in, with its arguments
        let mut known: Option<(usize, usize, Rows, Rows)> = None;
        for (level, k, v) in peeled.into_iter().rev() {
            let base = rows;
            let r = non_pivots(&base, level - 1);
            let mut d: Vec<u32> = r.iter().map(|&c| v[c]).collect();
            if !base.is_empty() {
                let next = walker.successor_with(level - 1, k - 1, &base, &mut |n, k, b| match &known {
                    Some((kn, kk, kb, ks)) if *kn == n && *kk == k && kb.as_slice() == b => ks.clone(),
                    _ => walker.successor(n, k, b),
                });
                let link = walker.link_digits(&base, &next, &r);
                swap_digits(&mut d, Some(&link), fq - 1);
                known = Some((level - 1, k - 1, base.clone(), next));
            }
            let blocks = qcombin::gaussian_product_tree(level - 1, k - 1, q)?;
            let below = &blocks * (qcombin::q_pow(q, level - k) - 1u32) / (qcombin::q_pow(q, k) - 1u32);
            frames.push(DecodeFrame { below, block: qcombin::q_pow(q, level - k), blocks, j: from_digits(&d, fq) });
            rows = base;
            insert_by_lead(&mut rows, v);
        }
        frames.reverse();
        Ok(Self::fold(frames))
    }

    /// Decodes the row space of `basis`; the flag reports whether the input
    /// had to be brought into canonical form first.
    pub fn decode_matrix(&self, basis: &Matrix) -> Result<(BigUint, bool), CodecError> {
        if basis.cols() != self.n {
            return Err(CodecError::Dimension { n: self.n, k: self.k, got_n: basis.cols(), got_k: basis.rows() });
        }
        let w = Subspace::from_basis(&self.field, basis)?;
        if w.dim() != basis.rows() {
            return Err(LinalgError::RankDeficient.into());
        }
        let recanonicalized = w.matrix() != basis;
        Ok((self.decode(&w)?, recanonicalized))
    }

    fn dual_codec(&self) -> Option<Codec> {
        (2 * self.k > self.n).then(|| Codec::new(&self.field, self.n, self.n - self.k).unwrap())
    }

    /// For `2k > n`, the dual of the `m`-th item of the `(n, n-k)` code.
    /// Consecutive indices still give adjacent subspaces, but the order is
    /// the dual of the smaller code, not the simple `(n, k)` order.
    pub fn encode_via_dual(&self, m: &BigUint) -> Result<Subspace, CodecError> {
        match self.dual_codec() {
            Some(d) => Ok(d.encode(m)?.dual()),
            None => self.encode(m),
        }
    }

    /// Inverse of [`Codec::encode_via_dual`].
    pub fn decode_via_dual(&self, w: &Subspace) -> Result<BigUint, CodecError> {
        self.check(w)?;
        match self.dual_codec() {
            Some(d) => d.decode(&w.dual()),
            None => self.decode(w),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grassmann::{build_simple, verify_gray, GraySequence};
    use num_traits::One;

    fn gf(q: u64) -> Field {
        Field::with_order(q).unwrap()
    }

    fn big(x: u64) -> BigUint {
        BigUint::from(x)
    }

    #[test]
    fn digits_round_trip() {
        for q in [2u32, 3, 4, 5, 256, 65536] {
            let x = BigUint::from(123_456_789u64);
            let d = to_digits(&x, q, 40);
            assert!(d.iter().all(|&v| v < q));
            assert_eq!(from_digits(&d, q), x);
        }
        assert_eq!(to_digits(&big(6), 3, 3), vec![0, 2, 0]);
    }

    #[test]
    fn encode_first_is_simple() {
        for (n, k) in [(4, 2), (5, 1), (6, 3), (3, 3), (3, 0)] {
            let c = Codec::new(&gf(3), n, k).unwrap();
            assert!(c.encode(&BigUint::zero()).unwrap().is_simple());
        }
    }

    #[test]
    fn encode_matches_walk() {
        for q in [2, 3, 4] {
            let f = gf(q);
            for n in 0..=5 {
                for k in 0..=n {
                    if q == 4 && n == 5 {
                        continue;
                    }
                    let code = build_simple(n, k, &f).unwrap();
                    let c = Codec::new(&f, n, k).unwrap();
                    for (m, item) in code.items.iter().enumerate() {
                        assert_eq!(&c.encode(&big(m as u64)).unwrap(), item, "({n},{k};{q}) m={m}");
                    }
                }
            }
        }
    }

    #[test]
    fn lines_of_the_binary_plane() {
        let c = Codec::new(&gf(2), 2, 1).unwrap();
        let items: Vec<Subspace> = (0..3).map(|m| c.encode(&big(m)).unwrap()).collect();
        assert_eq!(items[0].rows(), vec![vec![1, 0]]);
        assert!(items[1].intersect(&items[2]).unwrap().dim() == 0);
        assert_eq!(items.iter().collect::<std::collections::HashSet<_>>().len(), 3);
    }

    #[test]
    fn round_trips() {
        for (n, k, q) in [(4, 2, 2), (5, 2, 2), (4, 1, 3), (5, 3, 3), (4, 2, 4), (6, 3, 2)] {
            let c = Codec::new(&gf(q), n, k).unwrap();
            let len = c.len().to_u64().unwrap();
            for m in 0..len {
                let w = c.encode(&big(m)).unwrap();
                assert_eq!(c.decode(&w).unwrap(), big(m), "({n},{k};{q})");
                assert_eq!(c.decode_fast(&w).unwrap(), big(m), "({n},{k};{q})");
            }
        }
    }

    #[test]
    fn out_of_range_and_mismatch() {
        let f = gf(2);
        let c = Codec::new(&f, 4, 2).unwrap();
        assert!(matches!(c.encode(&big(35)), Err(CodecError::OutOfRange { .. })));
        assert!(matches!(c.decode(&Subspace::simple(&f, 4, 1)), Err(CodecError::Dimension { .. })));
        assert!(matches!(c.decode(&Subspace::simple(&f, 5, 2)), Err(CodecError::Dimension { .. })));
        assert!(matches!(Codec::new(&f, 2, 3), Err(CodecError::Params { .. })));
    }

    #[test]
    fn decode_matrix_flags_recanonicalization() {
        let f = gf(2);
        let c = Codec::new(&f, 4, 2).unwrap();
        let simple = Matrix::from_rows(4, &[vec![1, 0, 0, 0], vec![0, 1, 0, 0]]).unwrap();
        assert_eq!(c.decode_matrix(&simple).unwrap(), (BigUint::zero(), false));
        let messy = Matrix::from_rows(4, &[vec![1, 1, 0, 0], vec![0, 1, 0, 0]]).unwrap();
        assert_eq!(c.decode_matrix(&messy).unwrap(), (BigUint::zero(), true));
        let deficient = Matrix::from_rows(4, &[vec![1, 1, 0, 0], vec![1, 1, 0, 0]]).unwrap();
        assert!(matches!(
            c.decode_matrix(&deficient),
            Err(CodecError::Linalg(LinalgError::RankDeficient))
        ));
    }

    #[test]
    fn dual_codec() {
        let f = gf(2);
        let c = Codec::new(&f, 4, 3).unwrap();
        let items: Vec<Subspace> = (0..15).map(|m| c.encode_via_dual(&big(m)).unwrap()).collect();
        for (m, w) in items.iter().enumerate() {
            assert_eq!(w.dim(), 3);
            assert_eq!(c.decode_via_dual(w).unwrap(), big(m as u64));
        }
        let seq = GraySequence { n: 4, k: 3, field: f.clone(), items, cyclic: true };
        assert!(verify_gray(&seq).is_optimal_gray());
        let start = Subspace::simple(&f, 4, 1).dual();
        assert_eq!(c.decode_via_dual(&start).unwrap(), BigUint::zero());
    }

    #[test]
    fn large_parameters() {
        let f = gf(2);
        let c = Codec::new(&f, 64, 4).unwrap();
        let m = c.len() - 1u32;
        let w = c.encode(&m).unwrap();
        assert_eq!(c.decode(&w).unwrap(), m);
        assert_eq!(c.decode_fast(&w).unwrap(), m);
        let w0 = c.encode(&BigUint::one()).unwrap();
        assert_eq!(w.intersect(&c.encode(&BigUint::zero()).unwrap()).unwrap().dim(), 3);
        assert_eq!(c.decode_fast(&w0).unwrap(), BigUint::one());
    }
}
