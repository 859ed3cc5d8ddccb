//! Cyclic optimal Grassmannian Gray codes.
//!
//! An `(n, k; q)` code is assembled from an `(n-1, k; q)` code `C'` and an
//! `(n-1, k-1; q)` code `C''`: every `C''_i` is extended by `q^(n-k)`
//! vectors outside `W^(n-1)` (one per equivalence class), the extended
//! blocks are chained so that consecutive blocks meet in dimension `k-1`,
//! and a rotation of `C'` is spliced in after the block of the subspace
//! `C'_j ∩ C'_(j+1)`.
//!
//! [`build_general`] materializes the construction with every free choice
//! delegated to a [`ChoiceSource`]. [`SimpleCode`] is the deterministic
//! instance (simple ambient spaces, linked block order, insertion offset 0),
//! walked lazily one subspace at a time; the codec indexes the same code.
//!
//! # Block order of the simple code
//!
//! Inside block `i` the class representatives are
//! `e_(n-1) + sum_l alpha_(d_l) e_(r_l)` where `r_0 < r_1 < ...` are the
//! non-pivot columns of `C''_i`. Position `j` of the block uses the base-`q`
//! digits of `j` for `d`, except that two positions trade places: the last
//! position takes the digits of the *link* of `C''_i` (the reduced direction
//! in which `C''_(i+1)` leaves `C''_i`), and the position those digits would
//! have had takes the all-`(q-1)` digits. Every block starts with `e_(n-1)`
//! and ends with a vector congruent to `e_(n-1)` modulo `C''_i + C''_(i+1)`,
//! which is what makes consecutive blocks adjacent. With the unmodified
//! digit order the chain breaks, e.g. at `(4, 2; 2)` between indices 9
//! and 10.

use std::collections::HashSet;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use thiserror::Error;

use crate::field::Field;
use crate::linalg::{LinalgError, Subspace};
use crate::qcombin;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GrayError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("constraint violation in block {block}: {reason}")]
    ConstraintViolation { block: usize, reason: String },
    #[error("invalid choice: {0}")]
    BadChoice(String),
    #[error("parameters too large to materialize: {0}")]
    TooLarge(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Largest block size `q^(n-k)` that the materializing builders accept.
pub const MAX_BLOCK: usize = 1 << 20;

/// An ordered list of equal-dimension subspaces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraySequence {
    pub n: usize,
    pub k: usize,
    pub field: Field,
    pub items: Vec<Subspace>,
    pub cyclic: bool,
}

impl GraySequence {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// True if `other` lists the same items in the same cyclic order.
    pub fn is_rotation_of(&self, other: &GraySequence) -> bool {
        if self.items.len() != other.items.len() {
            return false;
        }
        if self.items.is_empty() {
            return true;
        }
        let Some(start) = other.items.iter().position(|x| *x == self.items[0]) else {
            return false;
        };
        let len = self.items.len();
        (0..len).all(|i| self.items[i] == other.items[(start + i) % len])
    }
}

// ---------------------------------------------------------------------------
// Row-level helpers shared with the codec. Rows have a fixed width; the
// current ambient dimension only says which column counts as "last".

pub(crate) type Rows = Vec<Vec<u32>>;

pub(crate) fn lead(v: &[u32]) -> Option<usize> {
    v.iter().position(|&x| x != 0)
}

pub(crate) fn unit(width: usize, i: usize) -> Vec<u32> {
    let mut v = vec![0; width];
    v[i] = 1;
    v
}

pub(crate) fn simple_rows(width: usize, k: usize) -> Rows {
    (0..k).map(|i| unit(width, i)).collect()
}

fn is_unit_row(row: &[u32], col: usize) -> bool {
    row.iter().enumerate().all(|(c, &x)| if c == col { x == 1 } else { x == 0 })
}

fn max_support(rows: &[Vec<u32>]) -> Option<usize> {
    rows.iter()
        .filter_map(|r| r.iter().rposition(|&x| x != 0))
        .max()
}

/// Inserts `v` so that leading columns stay increasing.
pub(crate) fn insert_by_lead(rows: &mut Rows, v: Vec<u32>) {
    let l = lead(&v).expect("nonzero row");
    let pos = rows.iter().take_while(|r| lead(r).unwrap() < l).count();
    rows.insert(pos, v);
}

/// Columns in `0..ambient` that are not leading columns of `rows`.
pub(crate) fn non_pivots(rows: &[Vec<u32>], ambient: usize) -> Vec<usize> {
    let mut pivots: Vec<usize> = rows.iter().map(|r| lead(r).unwrap()).filter(|&p| p < ambient).collect();
    pivots.sort_unstable();
    let mut out = Vec::with_capacity(ambient - pivots.len());
    let mut next = pivots.iter().peekable();
    for c in 0..ambient {
        if next.peek() == Some(&&c) {
            next.next();
        } else {
            out.push(c);
        }
    }
    out
}

/// Removes the row with a nonzero entry in column `col`.
pub(crate) fn split_at_column(rows: &[Vec<u32>], col: usize) -> (Rows, Vec<u32>) {
    let idx = rows
        .iter()
        .position(|r| r[col] != 0)
        .expect("a row reaches the last column");
    let mut base = rows.to_vec();
    let v = base.remove(idx);
    debug_assert!(base.iter().all(|r| r[col] == 0));
    (base, v)
}

/// Exchanges the link digits with the all-`top` digits; identity otherwise.
pub(crate) fn swap_digits(d: &mut [u32], link: Option<&[u32]>, top: u32) {
    let Some(y) = link else { return };
    if d == y {
        d.iter_mut().for_each(|x| *x = top);
    } else if d.iter().all(|&x| x == top) {
        d.copy_from_slice(y);
    }
}

fn increment_digits(d: &mut [u32], q: u32) {
    for x in d.iter_mut() {
        *x += 1;
        if *x < q {
            return;
        }
        *x = 0;
    }
}

pub(crate) fn extension_vector(width: usize, last: usize, r: &[usize], d: &[u32]) -> Vec<u32> {
    let mut v = unit(width, last);
    for (&c, &x) in r.iter().zip(d) {
        v[c] = x;
    }
    v
}

/// Walks the simple code on fixed-width rows.
pub(crate) struct Walker<'a> {
    pub field: &'a Field,
    pub width: usize,
}

impl Walker<'_> {
    /// Digits (at columns `r`) of the normalized direction by which `next`
    /// leaves `base`. Both are canonical row sets of the same dimension.
    pub fn link_digits(&self, base: &[Vec<u32>], next: &[Vec<u32>], r: &[usize]) -> Vec<u32> {
        let f = self.field;
        for row in next {
            let mut v = row.clone();
            for b in base {
                let p = lead(b).unwrap();
                if v[p] != 0 {
                    let c = f.mul(v[p], f.inv(b[p]));
                    for (x, &y) in v.iter_mut().zip(b) {
                        if y != 0 {
                            *x = f.sub(*x, f.mul(c, y));
                        }
                    }
                }
            }
            if let Some(l) = lead(&v) {
                let s = f.inv(v[l]);
                return r.iter().map(|&c| f.mul(v[c], s)).collect();
            }
        }
        panic!("successor coincides with its predecessor");
    }

    fn link_for(&self, ambient: usize, base: &[Vec<u32>], r: &[usize]) -> Option<Vec<u32>> {
        if base.is_empty() {
            return None;
        }
        let next = self.successor(ambient, base.len(), base);
        Some(self.link_digits(base, &next, r))
    }

    /// Whether `rows` (inside `W^ambient`) is the last item of the simple
    /// `(ambient, k)` code.
    fn is_last(&self, ambient: usize, k: usize, rows: &[Vec<u32>]) -> bool {
        if k == 0 || k == ambient {
            return rows.iter().enumerate().all(|(i, r)| is_unit_row(r, i));
        }
        rows.iter().enumerate().all(|(i, r)| {
            let col = if i + 1 == k { ambient - 1 } else { i };
            is_unit_row(r, col)
        })
    }

    /// Item 1 of the `C*` part at this level: block 0, position 1.
    fn second_part_start(&self, level: usize, k: usize) -> Rows {
        let base = simple_rows(self.width, k - 1);
        let r: Vec<usize> = (k - 1..level - 1).collect();
        let link = self.link_for(level - 1, &base, &r);
        let mut d = vec![0u32; r.len()];
        d[0] = 1;
        swap_digits(&mut d, link.as_deref(), self.field.q() - 1);
        let mut rows = base;
        insert_by_lead(&mut rows, extension_vector(self.width, level - 1, &r, &d));
        rows
    }

    /// Next item after `rows` in the simple `(n, k)` code, cyclically.
    pub fn successor(&self, n: usize, k: usize, rows: &[Vec<u32>]) -> Rows {
        self.successor_with(n, k, rows, &mut |n, k, base| self.successor(n, k, base))
    }

    /// [`Walker::successor`] with the successor of the lower-level base
    /// supplied by `inner`.
    pub fn successor_with<F>(&self, n: usize, k: usize, rows: &[Vec<u32>], inner: &mut F) -> Rows
    where
        F: FnMut(usize, usize, &[Vec<u32>]) -> Rows,
    {
        if k == 0 || k == n {
            return rows.to_vec();
        }
        let top = max_support(rows).expect("k >= 1");
        let mut level = n.min(top + 2);
        if level == top + 2 {
            if self.is_last(level - 1, k, rows) {
                return self.second_part_start(level, k);
            }
            level -= 1;
        }
        debug_assert_eq!(top, level - 1);

        let (base, v) = split_at_column(rows, level - 1);
        let r = non_pivots(&base, level - 1);
        let mut d: Vec<u32> = r.iter().map(|&c| v[c]).collect();
        let q = self.field.q();
        if d.iter().all(|&x| x == 0) && base.iter().enumerate().all(|(i, b)| is_unit_row(b, i)) {
            // first item of C*, which closes the cycle
            return simple_rows(self.width, k);
        }
        let next_base = if base.is_empty() {
            base.clone()
        } else {
            inner(level - 1, base.len(), &base)
        };
        let link = (!base.is_empty()).then(|| self.link_digits(&base, &next_base, &r));
        swap_digits(&mut d, link.as_deref(), q - 1);
        if d.iter().all(|&x| x == q - 1) {
            let mut out = next_base;
            out.push(unit(self.width, level - 1));
            return out;
        }
        increment_digits(&mut d, q);
        swap_digits(&mut d, link.as_deref(), q - 1);
        let mut out = base;
        insert_by_lead(&mut out, extension_vector(self.width, level - 1, &r, &d));
        out
    }

    /// Block order used by the simple code: representative at each position.
    pub fn linked_block(&self, base: &[Vec<u32>], next: &[Vec<u32>], ambient: usize) -> Vec<Vec<u32>> {
        let r = non_pivots(base, ambient - 1);
        let link = (!base.is_empty() && base != next).then(|| self.link_digits(base, next, &r));
        let q = self.field.q();
        let count = (q as usize).pow(r.len() as u32);
        let mut d = vec![0u32; r.len()];
        let mut out = Vec::with_capacity(count);
        for j in 0..count {
            if j > 0 {
                increment_digits(&mut d, q);
            }
            let mut p = d.clone();
            swap_digits(&mut p, link.as_deref(), q - 1);
            out.push(extension_vector(self.width, ambient - 1, &r, &p));
        }
        out
    }
}

fn embed(s: &Subspace, n: usize) -> Vec<Vec<u32>> {
    s.rows()
        .into_iter()
        .map(|mut r| {
            r.resize(n, 0);
            r
        })
        .collect()
}

fn extend(field: &Field, base: &Subspace, v: &[u32]) -> Result<Subspace, LinalgError> {
    let n = v.len();
    let mut rows = embed(base, n);
    rows.push(v.to_vec());
    Subspace::from_rows(field, n, &rows)
}

fn block_size(q: u32, e: usize) -> Result<usize, GrayError> {
    (q as usize)
        .checked_pow(e as u32)
        .filter(|&x| x <= MAX_BLOCK)
        .ok_or_else(|| GrayError::TooLarge(format!("q^{e} with q = {q}")))
}

// ---------------------------------------------------------------------------

/// One representative per equivalence class of `W^n \ W^(n-1)` induced by a
/// `(k-1)`-dimensional `base` of `W^(n-1)`.
#[derive(Debug, Clone)]
pub struct ExtensionFamily {
    pub field: Field,
    pub base: Subspace,
    pub reps: Vec<Vec<u32>>,
}

impl ExtensionFamily {
    pub fn n(&self) -> usize {
        self.base.ambient() + 1
    }

    /// `base ⊕ span(reps[j])` in `W^n`.
    pub fn extended(&self, j: usize) -> Subspace {
        extend(&self.field, &self.base, &self.reps[j]).expect("well-formed")
    }

    /// Checks that every representative lies outside `W^(n-1)`, meets
    /// `W^(n-1)` only in the base, and yields a distinct extension.
    pub fn check(&self) -> Result<(), GrayError> {
        let n = self.n();
        let hyper = Subspace::simple(&self.field, n, n - 1);
        let base_n = Subspace::from_rows(&self.field, n, &embed(&self.base, n))?;
        let mut seen = HashSet::new();
        for (j, v) in self.reps.iter().enumerate() {
            if v.len() != n || v[n - 1] == 0 {
                return Err(GrayError::Dimension(format!("representative {j} lies in W^(n-1)")));
            }
            let ext = self.extended(j);
            if ext.intersect(&hyper)? != base_n {
                return Err(GrayError::Dimension(format!("representative {j} changes the trace")));
            }
            if !seen.insert(ext) {
                return Err(GrayError::Dimension(format!("representative {j} repeats a class")));
            }
        }
        Ok(())
    }
}

/// The representatives `e_(n-1) + sum_l alpha_([j]_l) e_(r_l)` for
/// `j = 0..q^(n-k)`, in index order.
pub fn explicit_representatives(field: &Field, base: &Subspace) -> Result<ExtensionFamily, GrayError> {
    if !base.field().same_as(field) {
        return Err(LinalgError::FieldMismatch(field.q(), base.field().q()).into());
    }
    let n = base.ambient() + 1;
    let base_rows = base.rows();
    let r = non_pivots(&base_rows, n - 1);
    let q = field.q();
    let count = block_size(q, r.len())?;
    let mut d = vec![0u32; r.len()];
    let mut reps = Vec::with_capacity(count);
    for j in 0..count {
        if j > 0 {
            increment_digits(&mut d, q);
        }
        reps.push(extension_vector(n, n - 1, &r, &d));
    }
    Ok(ExtensionFamily { field: field.clone(), base: base.clone(), reps })
}

/// The `q` subspaces `C2 ⊕ span(v1 + eps u1)`, `eps` over the field in
/// index order, where `u1` completes `C1 ∩ C2` to `C1`. Each meets
/// `C1 ⊕ span(v1)` in dimension `k - 1`.
pub fn compatible_next_vectors(
    field: &Field,
    c1: &Subspace,
    c2: &Subspace,
    v1: &[u32],
) -> Result<Vec<Subspace>, GrayError> {
    let m = c1.ambient();
    let n = m + 1;
    if c2.ambient() != m || c1.dim() != c2.dim() || c1.dim() == 0 {
        return Err(GrayError::Dimension("C1, C2 must be equal-dimension, nonzero".into()));
    }
    if c1.intersect(c2)?.dim() + 1 != c1.dim() {
        return Err(GrayError::Dimension("C1 and C2 must be adjacent".into()));
    }
    if v1.len() != n || v1[n - 1] == 0 {
        return Err(GrayError::Dimension("v1 must lie in W^n \\ W^(n-1)".into()));
    }
    let u1 = c1
        .rows()
        .into_iter()
        .find(|row| !c2.contains(row).unwrap())
        .expect("C1 is not inside C2");
    let mut out = Vec::with_capacity(field.q() as usize);
    for eps in 0..field.q() {
        let mut v2 = v1.to_vec();
        for (x, &u) in v2.iter_mut().zip(&u1) {
            *x = field.add(*x, field.mul(eps, u));
        }
        out.push(extend(field, c2, &v2)?);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------

/// The simple `(n, k; q)` code, generated lazily.
#[derive(Debug, Clone)]
pub struct SimpleCode {
    field: Field,
    n: usize,
    k: usize,
}

impl SimpleCode {
    pub fn new(field: &Field, n: usize, k: usize) -> Result<Self, GrayError> {
        if k > n {
            return Err(GrayError::Dimension(format!("k = {k} exceeds n = {n}")));
        }
        Ok(SimpleCode { field: field.clone(), n, k })
    }

    pub fn len(&self) -> BigUint {
        qcombin::gaussian(self.n, self.k, self.field.q() as u64).expect("q >= 2")
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn first(&self) -> Subspace {
        Subspace::simple(&self.field, self.n, self.k)
    }

    /// Last item; it meets the first in a simple subspace.
    pub fn last(&self) -> Subspace {
        let (n, k) = (self.n, self.k);
        if k == 0 || k == n {
            return self.first();
        }
        let mut rows = simple_rows(n, k - 1);
        rows.push(unit(n, n - 1));
        Subspace::from_canonical_rows(&self.field, n, &rows)
    }

    pub fn successor(&self, s: &Subspace) -> Result<Subspace, GrayError> {
        if s.ambient() != self.n || s.dim() != self.k {
            return Err(GrayError::Dimension(format!(
                "expected a {}-subspace of GF(q)^{}, got dim {} in {}",
                self.k,
                self.n,
                s.dim(),
                s.ambient()
            )));
        }
        let walker = Walker { field: &self.field, width: self.n };
        let rows = walker.successor(self.n, self.k, &s.rows());
        Ok(Subspace::from_canonical_rows(&self.field, self.n, &rows))
    }

    /// All items in order, starting from the simple subspace.
    pub fn iter(&self) -> SimpleIter<'_> {
        SimpleIter { code: self, next: Some(self.first()) }
    }
}

pub struct SimpleIter<'a> {
    code: &'a SimpleCode,
    next: Option<Subspace>,
}

impl Iterator for SimpleIter<'_> {
    type Item = Subspace;

    fn next(&mut self) -> Option<Subspace> {
        let cur = self.next.take()?;
        let succ = self.code.successor(&cur).expect("dimensions match");
        if succ != self.code.first() {
            self.next = Some(succ);
        }
        Some(cur)
    }
}

/// The simple cyclic optimal code, materialized.
pub fn build_simple(n: usize, k: usize, field: &Field) -> Result<GraySequence, GrayError> {
    let code = SimpleCode::new(field, n, k)?;
    let len = code.len();
    if len.to_usize().is_none_or(|l| l > 1 << 26) {
        return Err(GrayError::TooLarge(format!("{len} items")));
    }
    Ok(GraySequence { n, k, field: field.clone(), items: code.iter().collect(), cyclic: true })
}

// ---------------------------------------------------------------------------

/// Context for ordering the extension classes of one block.
pub struct BlockRequest<'a> {
    pub field: &'a Field,
    /// Ambient dimension of the extended subspaces.
    pub n: usize,
    pub index: usize,
    pub blocks: usize,
    pub base: &'a Subspace,
    pub next_base: &'a Subspace,
    /// Base and last representative of the previous block.
    pub prev: Option<(&'a Subspace, &'a [u32])>,
    /// Base and first representative of block 0, for the final block.
    pub wrap: Option<(&'a Subspace, &'a [u32])>,
    /// The final block is also block 0 and must close on its own first item.
    pub wrap_self: bool,
}

impl BlockRequest<'_> {
    pub fn count(&self) -> usize {
        (self.field.q() as usize).pow((self.n - self.base.dim() - 1) as u32)
    }
}

/// Whether `(a ⊕ va)` and `(b ⊕ vb)` are adjacent in the Grassmann graph.
/// For `dim a >= 1` and `a != b` this is exactly non-empty intersection of
/// the classes `[va]_a` and `[vb]_b`.
pub fn classes_link(field: &Field, a: &Subspace, va: &[u32], b: &Subspace, vb: &[u32]) -> bool {
    let (Ok(x), Ok(y)) = (extend(field, a, va), extend(field, b, vb)) else {
        return false;
    };
    x != y && x.intersect(&y).map(|i| i.dim() + 1 == x.dim()).unwrap_or(false)
}

/// Free choices of the recursive construction.
///
/// Only [`ChoiceSource::pick`] is required; the other methods default to
/// enumerating the legal options and picking among them, so any `pick`
/// yields a valid code. Overriding them lets a source propose arbitrary
/// orders, which the builder validates.
pub trait ChoiceSource {
    /// Chooses one of `options` (at least 1) alternatives.
    fn pick(&mut self, options: usize) -> usize;

    /// Representatives of the block in sequence order.
    fn order_block(&mut self, req: &BlockRequest<'_>) -> Vec<Vec<u32>> {
        default_order_block(self, req)
    }

    /// Index `j` such that `C'` is entered at `C'_(j+1)`.
    fn insertion_index(&mut self, outer: &[Subspace]) -> usize {
        self.pick(outer.len())
    }

    /// Block to splice into when `C'` has a single item.
    fn insertion_block(&mut self, inner: &[Subspace]) -> usize {
        self.pick(inner.len())
    }

    /// Insertion offset in `0..options`.
    fn insertion_offset(&mut self, options: usize) -> usize {
        self.pick(options)
    }
}

pub fn default_order_block<S: ChoiceSource + ?Sized>(src: &mut S, req: &BlockRequest<'_>) -> Vec<Vec<u32>> {
    let f = req.field;
    let cands = explicit_representatives(f, req.base).expect("valid base").reps;
    let base = req.base;
    let ok_first = |v: &[u32]| req.prev.is_none_or(|(b, pv)| classes_link(f, b, pv, base, v));
    let ok_last = |v: &[u32], first: &[u32]| match (req.wrap, req.wrap_self) {
        (Some((b, wv)), _) => classes_link(f, base, v, b, wv),
        (None, true) => classes_link(f, base, v, base, first),
        (None, false) => true,
    };
    let constrained = req.wrap.is_some() || req.wrap_self;
    let firsts: Vec<usize> = (0..cands.len())
        .filter(|&a| ok_first(&cands[a]))
        .filter(|&a| {
            !constrained || (0..cands.len()).any(|b| b != a && ok_last(&cands[b], &cands[a]))
        })
        .collect();
    assert!(!firsts.is_empty(), "no admissible first class in block {}", req.index);
    let first = firsts[src.pick(firsts.len())];
    let mut rest: Vec<usize> = (0..cands.len()).filter(|&i| i != first).collect();
    let mut last = None;
    if constrained {
        let lasts: Vec<usize> = rest
            .iter()
            .copied()
            .filter(|&b| ok_last(&cands[b], &cands[first]))
            .collect();
        let l = lasts[src.pick(lasts.len())];
        rest.retain(|&i| i != l);
        last = Some(l);
    }
    let mut order = vec![first];
    while !rest.is_empty() {
        order.push(rest.remove(src.pick(rest.len())));
    }
    order.extend(last);
    order.into_iter().map(|i| cands[i].clone()).collect()
}

/// Uniformly random choices from a seeded generator.
pub struct RandomChoices {
    rng: StdRng,
}

impl RandomChoices {
    pub fn new(seed: u64) -> Self {
        RandomChoices { rng: StdRng::seed_from_u64(seed) }
    }
}

impl ChoiceSource for RandomChoices {
    fn pick(&mut self, options: usize) -> usize {
        self.rng.gen_range(0..options)
    }
}

/// Replays a fixed script of picks (0 once exhausted) and records the
/// number of options at every decision, which is enough to walk the whole
/// decision tree.
#[derive(Debug, Default, Clone)]
pub struct ReplayChoices {
    pub script: Vec<usize>,
    pos: usize,
    pub arities: Vec<usize>,
}

impl ReplayChoices {
    pub fn new(script: Vec<usize>) -> Self {
        ReplayChoices { script, pos: 0, arities: Vec::new() }
    }

    /// Script of the next leaf in depth-first order, if any.
    pub fn next_script(&self) -> Option<Vec<usize>> {
        let taken: Vec<usize> = (0..self.arities.len())
            .map(|i| self.script.get(i).copied().unwrap_or(0))
            .collect();
        let p = (0..taken.len()).rev().find(|&i| taken[i] + 1 < self.arities[i])?;
        let mut next = taken[..p].to_vec();
        next.push(taken[p] + 1);
        Some(next)
    }
}

impl ChoiceSource for ReplayChoices {
    fn pick(&mut self, options: usize) -> usize {
        let c = self.script.get(self.pos).copied().unwrap_or(0);
        self.pos += 1;
        self.arities.push(options);
        c.min(options - 1)
    }
}

/// The choices behind the simple code: linked block order, `C'` entered at
/// its simple item, insertion offset 0.
pub struct SimpleChoices;

impl ChoiceSource for SimpleChoices {
    fn pick(&mut self, _options: usize) -> usize {
        0
    }

    fn order_block(&mut self, req: &BlockRequest<'_>) -> Vec<Vec<u32>> {
        let walker = Walker { field: req.field, width: req.n };
        let base = embed(req.base, req.n);
        let next = embed(req.next_base, req.n);
        walker.linked_block(&base, &next, req.n)
    }

    fn insertion_index(&mut self, outer: &[Subspace]) -> usize {
        let len = outer.len();
        (0..len).find(|&j| outer[(j + 1) % len].is_simple()).unwrap_or(0)
    }

    fn insertion_block(&mut self, inner: &[Subspace]) -> usize {
        inner.iter().position(Subspace::is_simple).unwrap_or(0)
    }
}

fn validate_block(req: &BlockRequest<'_>, reps: &[Vec<u32>]) -> Result<Vec<Subspace>, GrayError> {
    let f = req.field;
    let n = req.n;
    let violation = |reason: String| GrayError::ConstraintViolation { block: req.index, reason };
    if reps.len() != req.count() {
        return Err(violation(format!("{} representatives, expected {}", reps.len(), req.count())));
    }
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(reps.len());
    for (j, v) in reps.iter().enumerate() {
        if v.len() != n || v[n - 1] == 0 || v.iter().any(|&x| x >= f.q()) {
            return Err(violation(format!("representative {j} is not in W^n \\ W^(n-1)")));
        }
        let s = extend(f, req.base, v)?;
        if !seen.insert(s.clone()) {
            return Err(violation(format!("representative {j} repeats a class")));
        }
        out.push(s);
    }
    if let Some((b, pv)) = req.prev {
        if !classes_link(f, b, pv, req.base, &reps[0]) {
            return Err(violation("first class does not meet the previous block's last class".into()));
        }
    }
    let last = reps.last().unwrap();
    if let Some((b, wv)) = req.wrap {
        if !classes_link(f, req.base, last, b, wv) {
            return Err(violation("last class does not meet the first class of block 0".into()));
        }
    }
    if req.wrap_self && reps.len() > 1 && !classes_link(f, req.base, last, req.base, &reps[0]) {
        return Err(violation("last class does not meet the first class".into()));
    }
    Ok(out)
}

fn construct(field: &Field, n: usize, k: usize, src: &mut dyn ChoiceSource) -> Result<Vec<Subspace>, GrayError> {
    if k == 0 || k == n {
        return Ok(vec![Subspace::simple(field, n, k)]);
    }
    let inner = construct(field, n - 1, k - 1, src)?;
    let outer = construct(field, n - 1, k, src)?;
    let per_block = block_size(field.q(), n - k)?;
    let blocks = inner.len();

    let mut star = Vec::with_capacity(blocks * per_block);
    let mut first0: Option<Vec<u32>> = None;
    let mut prev_last: Option<Vec<u32>> = None;
    for i in 0..blocks {
        let final_block = i + 1 == blocks;
        let req = BlockRequest {
            field,
            n,
            index: i,
            blocks,
            base: &inner[i],
            next_base: &inner[(i + 1) % blocks],
            prev: prev_last.as_deref().map(|v| (&inner[i - 1], v)),
            wrap: if final_block && blocks > 1 { first0.as_deref().map(|v| (&inner[0], v)) } else { None },
            wrap_self: final_block && blocks == 1,
        };
        let reps = src.order_block(&req);
        star.extend(validate_block(&req, &reps)?);
        if i == 0 {
            first0 = Some(reps[0].clone());
        }
        prev_last = reps.last().cloned();
    }

    let (block, j) = if outer.len() == 1 {
        let b = src.insertion_block(&inner);
        if b >= blocks {
            return Err(GrayError::BadChoice(format!("insertion block {b} of {blocks}")));
        }
        (b, 0)
    } else {
        let j = src.insertion_index(&outer);
        if j >= outer.len() {
            return Err(GrayError::BadChoice(format!("insertion index {j} of {}", outer.len())));
        }
        let u = outer[j].intersect(&outer[(j + 1) % outer.len()])?;
        let b = inner
            .iter()
            .position(|c| *c == u)
            .ok_or_else(|| GrayError::BadChoice("C'_j ∩ C'_(j+1) is not in C''".into()))?;
        (b, j)
    };
    let ell = src.insertion_offset(per_block - 1);
    if ell + 1 >= per_block {
        return Err(GrayError::BadChoice(format!("insertion offset {ell}")));
    }
    let cut = block * per_block + ell + 1;
    let lift = |s: &Subspace| Subspace::from_canonical_rows(field, n, &embed(s, n));
    let mut out = Vec::with_capacity(star.len() + outer.len());
    out.extend_from_slice(&star[..cut]);
    out.extend(outer[j + 1..].iter().map(lift));
    out.extend(outer[..=j].iter().map(lift));
    out.extend_from_slice(&star[cut..]);
    Ok(out)
}

/// Runs the recursive construction with all choices taken from `src`.
pub fn build_general(
    n: usize,
    k: usize,
    field: &Field,
    src: &mut dyn ChoiceSource,
) -> Result<GraySequence, GrayError> {
    if k > n {
        return Err(GrayError::Dimension(format!("k = {k} exceeds n = {n}")));
    }
    let items = construct(field, n, k, src)?;
    Ok(GraySequence { n, k, field: field.clone(), items, cyclic: true })
}

// ---------------------------------------------------------------------------

/// Outcome of [`verify_gray`]. Failures are listed, never raised.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayReport {
    pub len: usize,
    pub expected_len: BigUint,
    /// Items whose dimension or ambient space is wrong.
    pub bad_dimension: Vec<usize>,
    /// Pairs of equal items.
    pub duplicates: Vec<(usize, usize)>,
    /// `i` such that items `i` and `i + 1` (cyclically) are not adjacent.
    pub not_adjacent: Vec<usize>,
    pub wrap_checked: bool,
    pub optimal: bool,
    pub first_simple: bool,
    /// Simplicity of `first ∩ last`; `None` for a non-cyclic sequence.
    pub first_last_simple: Option<bool>,
}

impl GrayReport {
    /// Distinct items, correct dimensions and all required adjacencies.
    pub fn is_gray(&self) -> bool {
        self.bad_dimension.is_empty() && self.duplicates.is_empty() && self.not_adjacent.is_empty()
    }

    pub fn is_optimal_gray(&self) -> bool {
        self.is_gray() && self.optimal
    }

    /// The checks behind [`GrayReport::is_optimal_gray`].
    pub fn summary(&self) -> Vec<(String, bool)> {
        vec![
            ("dimensions".to_string(), self.bad_dimension.is_empty()),
            ("distinct".to_string(), self.duplicates.is_empty()),
            ("adjacency".to_string(), self.not_adjacent.is_empty()),
            (format!("optimal ({} of {})", self.len, self.expected_len), self.optimal),
        ]
    }

    /// Simplicity of the first item and of `first ∩ last`. The simple code
    /// has both; other valid codes need not.
    pub fn simplicity(&self) -> Vec<(String, bool)> {
        let mut out = vec![("first item simple".to_string(), self.first_simple)];
        if let Some(s) = self.first_last_simple {
            out.push(("first ∩ last simple".to_string(), s));
        }
        out
    }
}

/// Checks a Grassmannian sequence using only subspace arithmetic.
pub fn verify_gray(s: &GraySequence) -> GrayReport {
    let len = s.items.len();
    let expected_len = qcombin::gaussian(s.n, s.k, s.field.q() as u64).expect("q >= 2");
    let bad_dimension = (0..len)
        .filter(|&i| s.items[i].dim() != s.k || s.items[i].ambient() != s.n)
        .collect();

    let mut first_seen = std::collections::HashMap::new();
    let mut duplicates = Vec::new();
    for (i, item) in s.items.iter().enumerate() {
        if let Some(&j) = first_seen.get(item) {
            duplicates.push((j, i));
        } else {
            first_seen.insert(item, i);
        }
    }

    let adjacent = |a: &Subspace, b: &Subspace| {
        a.intersect(b)
            .map(|x| x.dim() + 1 == s.k && a.dim() == s.k && b.dim() == s.k)
            .unwrap_or(false)
    };
    let mut not_adjacent: Vec<usize> =
        (0..len.saturating_sub(1)).filter(|&i| !adjacent(&s.items[i], &s.items[i + 1])).collect();
    let wrap_checked = s.cyclic && len > 1;
    if wrap_checked && !adjacent(&s.items[len - 1], &s.items[0]) {
        not_adjacent.push(len - 1);
    }

    let first_simple = s.items.first().is_some_and(|x| x.is_simple());
    let first_last_simple = if s.cyclic && len > 0 {
        Some(
            s.items[0]
                .intersect(&s.items[len - 1])
                .map(|x| x.is_simple())
                .unwrap_or(false),
        )
    } else {
        None
    };
    GrayReport {
        len,
        optimal: BigUint::from(len) == expected_len,
        expected_len,
        bad_dimension,
        duplicates,
        not_adjacent,
        wrap_checked,
        first_simple,
        first_last_simple,
    }
}

/// Item-wise orthogonal complement: an `(n, n-k; q)` sequence.
pub fn dual_code(s: &GraySequence) -> GraySequence {
    GraySequence {
        n: s.n,
        k: s.n - s.k,
        field: s.field.clone(),
        items: s.items.iter().map(Subspace::dual).collect(),
        cyclic: s.cyclic,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf(q: u64) -> Field {
        Field::with_order(q).unwrap()
    }

    fn sub(f: &Field, n: usize, rows: &[&[u32]]) -> Subspace {
        let rows: Vec<Vec<u32>> = rows.iter().map(|r| r.to_vec()).collect();
        Subspace::from_rows(f, n, &rows).unwrap()
    }

    #[test]
    fn representatives_small() {
        let f = gf(2);
        let fam = explicit_representatives(&f, &Subspace::zero(&f, 1)).unwrap();
        assert_eq!(fam.reps, vec![vec![0, 1], vec![1, 1]]);
        fam.check().unwrap();

        let base = sub(&f, 3, &[&[1, 0, 0]]);
        let fam = explicit_representatives(&f, &base).unwrap();
        assert_eq!(
            fam.reps,
            vec![vec![0, 0, 0, 1], vec![0, 1, 0, 1], vec![0, 0, 1, 1], vec![0, 1, 1, 1]]
        );
        fam.check().unwrap();
    }

    #[test]
    fn representatives_start_at_last_unit_vector() {
        for q in [2, 3, 4] {
            let f = gf(q);
            for code in [(3usize, 1usize), (4, 2), (4, 1)] {
                for c in SimpleCode::new(&f, code.0, code.1).unwrap().iter() {
                    let fam = explicit_representatives(&f, &c).unwrap();
                    assert_eq!(fam.reps[0], unit(code.0 + 1, code.0));
                    fam.check().unwrap();
                }
            }
        }
    }

    #[test]
    fn family_check_rejects_bad_reps() {
        let f = gf(2);
        let base = sub(&f, 2, &[&[1, 0]]);
        let mut fam = explicit_representatives(&f, &base).unwrap();
        fam.reps[1] = vec![1, 0, 1]; // same class as e2 modulo span(e0)
        assert!(fam.check().is_err());
        fam.reps[1] = vec![0, 1, 0];
        assert!(fam.check().is_err());
    }

    #[test]
    fn compatible_vectors_example() {
        let f = gf(2);
        let c1 = sub(&f, 2, &[&[1, 0]]);
        let c2 = sub(&f, 2, &[&[0, 1]]);
        let out = compatible_next_vectors(&f, &c1, &c2, &[0, 0, 1]).unwrap();
        assert_eq!(out[0], sub(&f, 3, &[&[0, 1, 0], &[0, 0, 1]]));
        assert_eq!(out[1], sub(&f, 3, &[&[0, 1, 0], &[1, 0, 1]]));

        // exhaustive filter oracle
        let a = sub(&f, 3, &[&[1, 0, 0], &[0, 0, 1]]);
        let mut found = HashSet::new();
        for v in 0..4u32 {
            let v2 = vec![v & 1, (v >> 1) & 1, 1];
            let s = sub(&f, 3, &[&[0, 1, 0], &v2]);
            if a.intersect(&s).unwrap().dim() == 1 {
                found.insert(s);
            }
        }
        assert_eq!(found, out.into_iter().collect());
    }

    #[test]
    fn compatible_vectors_rejects_bad_input() {
        let f = gf(2);
        let c1 = sub(&f, 2, &[&[1, 0]]);
        assert!(compatible_next_vectors(&f, &c1, &c1, &[0, 0, 1]).is_err());
        let c2 = sub(&f, 2, &[&[0, 1]]);
        assert!(compatible_next_vectors(&f, &c1, &c2, &[1, 0, 0]).is_err());
    }

    #[test]
    fn base_cases() {
        let f = gf(3);
        let full = build_simple(3, 3, &f).unwrap();
        assert_eq!(full.items, vec![Subspace::full(&f, 3)]);
        let zero = build_simple(3, 0, &f).unwrap();
        assert_eq!(zero.items, vec![Subspace::zero(&f, 3)]);
        assert!(verify_gray(&zero).is_optimal_gray());
    }

    #[test]
    fn lines_of_the_binary_plane() {
        let f = gf(2);
        let s = build_simple(2, 1, &f).unwrap();
        assert_eq!(s.items.len(), 3);
        assert_eq!(s.items[0], sub(&f, 2, &[&[1, 0]]));
        let r = verify_gray(&s);
        assert!(r.is_optimal_gray());
        assert!(r.first_simple);
        assert_eq!(r.first_last_simple, Some(true));
    }

    #[test]
    fn simple_4_2_2() {
        let f = gf(2);
        let s = build_simple(4, 2, &f).unwrap();
        assert_eq!(s.items.len(), 35);
        let r = verify_gray(&s);
        assert!(r.is_optimal_gray(), "{r:?}");
        assert!(r.first_simple);
        assert_eq!(r.first_last_simple, Some(true));
        assert_eq!(s.items.last().unwrap(), &SimpleCode::new(&f, 4, 2).unwrap().last());
    }

    #[test]
    fn report_flags_defects() {
        let f = gf(2);
        let mut s = build_simple(3, 1, &f).unwrap();
        let mut dup = s.clone();
        dup.items[3] = dup.items[1].clone();
        let r = verify_gray(&dup);
        assert_eq!(r.duplicates, vec![(1, 3)]);
        assert!(!r.is_gray());

        s.items.truncate(5);
        s.cyclic = false;
        let r = verify_gray(&s);
        assert!(!r.wrap_checked);
        assert!(r.is_gray());
        assert!(!r.optimal);
        assert_eq!(r.first_last_simple, None);

        let mut wrong = build_simple(4, 2, &f).unwrap();
        wrong.items.swap(3, 20);
        assert!(!verify_gray(&wrong).not_adjacent.is_empty());
    }

    /// The representatives in plain index order, without the link swap.
    struct UnlinkedChoices;

    impl ChoiceSource for UnlinkedChoices {
        fn pick(&mut self, _: usize) -> usize {
            0
        }
        fn order_block(&mut self, req: &BlockRequest<'_>) -> Vec<Vec<u32>> {
            explicit_representatives(req.field, req.base).unwrap().reps
        }
        fn insertion_index(&mut self, outer: &[Subspace]) -> usize {
            SimpleChoices.insertion_index(outer)
        }
    }

    #[test]
    fn unlinked_order_breaks_the_block_chain() {
        let f = gf(2);
        let err = build_general(4, 2, &f, &mut UnlinkedChoices).unwrap_err();
        assert!(matches!(err, GrayError::ConstraintViolation { block: 1, .. }), "{err}");
        // the simple code's neighbours at the same spot are fine
        let s = build_simple(4, 2, &f).unwrap();
        assert_eq!(s.items[9].intersect(&s.items[10]).unwrap().dim(), 1);
    }

    #[test]
    fn simple_choices_reproduce_simple_code() {
        for q in [2, 3] {
            let f = gf(q);
            for (n, k) in [(3, 1), (3, 2), (4, 2), (4, 1), (5, 2), (4, 3)] {
                let general = build_general(n, k, &f, &mut SimpleChoices).unwrap();
                let simple = build_simple(n, k, &f).unwrap();
                assert!(general.is_rotation_of(&simple), "({n},{k};{q})");
            }
        }
    }

    #[test]
    fn random_choices_yield_codes() {
        let f = gf(2);
        for seed in 0..20 {
            let s = build_general(4, 2, &f, &mut RandomChoices::new(seed)).unwrap();
            assert_eq!(s.len(), 35);
            assert!(verify_gray(&s).is_optimal_gray());
        }
    }

    #[test]
    fn bad_sources_are_rejected() {
        struct Repeat;
        impl ChoiceSource for Repeat {
            fn pick(&mut self, _: usize) -> usize {
                0
            }
            fn order_block(&mut self, req: &BlockRequest<'_>) -> Vec<Vec<u32>> {
                let v = unit(req.n, req.n - 1);
                vec![v; req.count()]
            }
        }
        let f = gf(2);
        assert!(matches!(
            build_general(3, 1, &f, &mut Repeat),
            Err(GrayError::ConstraintViolation { .. })
        ));

        struct FarOffset;
        impl ChoiceSource for FarOffset {
            fn pick(&mut self, _: usize) -> usize {
                0
            }
            fn insertion_offset(&mut self, options: usize) -> usize {
                options
            }
        }
        assert!(matches!(build_general(3, 1, &f, &mut FarOffset), Err(GrayError::BadChoice(_))));
    }

    #[test]
    fn replay_walks_every_leaf() {
        let f = gf(2);
        let mut script = Vec::new();
        let mut leaves = 0;
        loop {
            let mut src = ReplayChoices::new(script);
            build_general(2, 1, &f, &mut src).unwrap();
            leaves += 1;
            match src.next_script() {
                Some(s) => script = s,
                None => break,
            }
        }
        // two orders of the two classes
        assert_eq!(leaves, 2);
    }

    #[test]
    fn duals() {
        let f = gf(2);
        let s = build_simple(3, 1, &f).unwrap();
        let d = dual_code(&s);
        assert_eq!((d.n, d.k, d.len()), (3, 2, 7));
        assert!(verify_gray(&d).is_optimal_gray());
        assert_eq!(dual_code(&d).items, s.items);
    }
}
