//! Gray codes in the projective-space graph: all subspaces of `GF(q)^n`,
//! consecutive ones differing in dimension by one with containment.
//!
//! `GF(q)^n` is identified with `GF(q^n)` in a polynomial basis, and
//! multiplication by a primitive element `alpha` of `GF(q^n)` acts on
//! subspaces. Its orbits are the necklaces. A path through one
//! representative of each necklace, closed up by `alpha^l`, expands into a
//! cyclic code for the middle levels; splicing in the trivial and full
//! spaces gives optimal codes for `n = 3` and `n = 5`. For even `n` no
//! optimal code exists, and [`nonexistence_certificate`] evaluates the
//! counting inequalities behind that.

use std::collections::{HashMap, HashSet};

use num_bigint::BigUint;
use num_integer::Integer;
use thiserror::Error;

use crate::field::{prime_factors, Field};
use crate::grassmann::SimpleCode;
use crate::linalg::{mat_mul, LinalgError, Matrix, Subspace};
use crate::qcombin;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProjError {
    #[error("n must be even, got {0}")]
    OddDimension(usize),
    #[error("unsupported dimension n = {0}")]
    Unsupported(usize),
    #[error("GF({q}^{n}) is too large")]
    TooLarge { q: u32, n: usize },
    #[error("necklaces of unequal size: {0} and {1}")]
    UnequalOrbits(usize, usize),
    #[error("path is not valid: {0}")]
    BadPath(String),
    #[error("necklace path search failed: {0}")]
    SearchExhausted(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Largest `q^n` accepted by [`ExtensionField::new`].
pub const MAX_EXTENSION_ORDER: u64 = 1 << 24;

/// `GF(q^n)` as `GF(q)[x] / f(x)` with `f` primitive, so `alpha = x`.
#[derive(Debug, Clone)]
pub struct ExtensionField {
    base: Field,
    n: usize,
    modulus: Vec<u32>,
    alpha: Matrix,
    order: u64,
}

impl ExtensionField {
    /// Uses the first monic primitive polynomial of degree `n`, ordered by
    /// the base-`q` value of its lower coefficients.
    pub fn new(base: &Field, n: usize) -> Result<Self, ProjError> {
        let q = base.q();
        let size = (q as u64)
            .checked_pow(n as u32)
            .filter(|&s| n >= 1 && s <= MAX_EXTENSION_ORDER)
            .ok_or(ProjError::TooLarge { q, n })?;
        let order = size - 1;
        let factors = prime_factors(order);
        let identity = Matrix::identity(n, n);
        for code in 0..size {
            let mut lower = Vec::with_capacity(n);
            let mut c = code;
            for _ in 0..n {
                lower.push((c % q as u64) as u32);
                c /= q as u64;
            }
            if lower[0] == 0 {
                continue;
            }
            let alpha = companion(base, &lower);
            let pw = |e: u64| matrix_pow(base, &alpha, e);
            if pw(order) == identity && factors.iter().all(|&p| pw(order / p) != identity) {
                let mut modulus = lower;
                modulus.push(1);
                return Ok(ExtensionField { base: base.clone(), n, modulus, alpha, order });
            }
        }
        unreachable!("primitive polynomials exist in every degree")
    }

    pub fn base(&self) -> &Field {
        &self.base
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    /// Coefficients of `f`, constant term first, leading 1 last.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    /// `q^n - 1`, the multiplicative order of `alpha`.
    pub fn order(&self) -> u64 {
        self.order
    }

    /// Multiplication by `alpha` on row vectors.
    pub fn alpha_matrix(&self) -> &Matrix {
        &self.alpha
    }

    pub fn alpha_pow_matrix(&self, e: u64) -> Matrix {
        matrix_pow(&self.base, &self.alpha, e % self.order)
    }

    /// Product of two elements given as coefficient vectors.
    pub fn mul(&self, a: &[u32], b: &[u32]) -> Vec<u32> {
        let f = &self.base;
        let mut acc = vec![0u32; self.n];
        let mut power = a.to_vec();
        for &c in b {
            if c != 0 {
                for (x, &y) in acc.iter_mut().zip(&power) {
                    *x = f.add(*x, f.mul(c, y));
                }
            }
            power = crate::linalg::vec_mat(f, &power, &self.alpha);
        }
        acc
    }

    pub fn times_alpha(&self, s: &Subspace) -> Subspace {
        s.map(&self.alpha)
    }

    /// `alpha^t s` for `t = 0, 1, ...` until the orbit closes.
    pub fn orbit(&self, s: &Subspace) -> Vec<Subspace> {
        let mut out = vec![s.clone()];
        loop {
            let next = self.times_alpha(out.last().unwrap());
            if next == *s {
                return out;
            }
            out.push(next);
        }
    }
}

fn companion(f: &Field, lower: &[u32]) -> Matrix {
    let n = lower.len();
    let mut m = Matrix::zeros(n, n);
    for i in 0..n - 1 {
        m.row_mut(i)[i + 1] = 1;
    }
    for (j, &c) in lower.iter().enumerate() {
        m.row_mut(n - 1)[j] = f.neg(c);
    }
    m
}

fn matrix_pow(f: &Field, a: &Matrix, mut e: u64) -> Matrix {
    let mut result = Matrix::identity(a.rows(), a.cols());
    let mut base = a.clone();
    while e > 0 {
        if e & 1 == 1 {
            result = mat_mul(f, &result, &base);
        }
        base = mat_mul(f, &base, &base);
        e >>= 1;
    }
    result
}

/// Ordered subspaces of mixed dimensions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubspaceSequence {
    pub n: usize,
    pub field: Field,
    pub items: Vec<Subspace>,
    pub cyclic: bool,
}

impl SubspaceSequence {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.items.iter().map(Subspace::dim).collect()
    }
}

/// Adjacency in the projective-space graph.
pub fn projectively_adjacent(a: &Subspace, b: &Subspace) -> bool {
    match a.dim().abs_diff(b.dim()) {
        1 if a.dim() < b.dim() => a.is_subspace_of(b),
        1 => b.is_subspace_of(a),
        _ => false,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubspaceReport {
    pub len: usize,
    pub expected_len: BigUint,
    pub bad_ambient: Vec<usize>,
    pub duplicates: Vec<(usize, usize)>,
    /// `i` such that items `i` and `i + 1` (cyclically) are not adjacent.
    pub not_adjacent: Vec<usize>,
    pub wrap_checked: bool,
    pub optimal: bool,
}

impl SubspaceReport {
    pub fn is_gray(&self) -> bool {
        self.bad_ambient.is_empty() && self.duplicates.is_empty() && self.not_adjacent.is_empty()
    }

    pub fn is_optimal_gray(&self) -> bool {
        self.is_gray() && self.optimal
    }

    pub fn summary(&self) -> Vec<(String, bool)> {
        vec![
            ("ambient".to_string(), self.bad_ambient.is_empty()),
            ("distinct".to_string(), self.duplicates.is_empty()),
            ("adjacency".to_string(), self.not_adjacent.is_empty()),
            (format!("optimal ({} of {})", self.len, self.expected_len), self.optimal),
        ]
    }
}

/// Number of subspaces of `GF(q)^n`.
pub fn total_subspaces(n: usize, q: u64) -> BigUint {
    (0..=n).map(|k| qcombin::gaussian(n, k, q).expect("q >= 2")).sum()
}

pub fn verify_subspace(s: &SubspaceSequence) -> SubspaceReport {
    let len = s.items.len();
    let expected_len = total_subspaces(s.n, s.field.q() as u64);
    let bad_ambient = (0..len).filter(|&i| s.items[i].ambient() != s.n).collect();
    let mut seen = HashMap::new();
    let mut duplicates = Vec::new();
    for (i, item) in s.items.iter().enumerate() {
        if let Some(&j) = seen.get(item) {
            duplicates.push((j, i));
        } else {
            seen.insert(item, i);
        }
    }
    let mut not_adjacent: Vec<usize> = (0..len.saturating_sub(1))
        .filter(|&i| !projectively_adjacent(&s.items[i], &s.items[i + 1]))
        .collect();
    let wrap_checked = s.cyclic && len > 1;
    if wrap_checked && !projectively_adjacent(&s.items[len - 1], &s.items[0]) {
        not_adjacent.push(len - 1);
    }
    SubspaceReport {
        optimal: BigUint::from(len) == expected_len,
        len,
        expected_len,
        bad_ambient,
        duplicates,
        not_adjacent,
        wrap_checked,
    }
}

/// Counting data showing that no optimal code exists for even `n = 2m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NonexistenceReport {
    pub n: usize,
    pub q: u64,
    /// `[2m, m]_q`
    pub middle: BigUint,
    /// `[2m, m+1]_q + [2m, m-1]_q`
    pub neighbors: BigUint,
    /// `[2m, m]_q (q^m - 1) = [2m, m+1]_q (q^(m+1) - 1)`, checked exactly.
    pub ratio_identity: bool,
    /// `(q^(m+1) - 1) / (2 (q^m - 1)) > 1`
    pub ratio_exceeds_one: bool,
}

impl NonexistenceReport {
    /// Every middle-level item of a cyclic code needs two neighbours in
    /// levels `m +- 1`, which is impossible when `middle > neighbors`.
    pub fn cyclic_excluded(&self) -> bool {
        self.middle > self.neighbors
    }

    /// A path can spare one neighbour; needs `middle >= neighbors + 2`.
    pub fn noncyclic_excluded(&self) -> bool {
        self.middle >= &self.neighbors + 2u32
    }

    pub fn deficit(&self) -> Option<BigUint> {
        (self.middle >= self.neighbors).then(|| &self.middle - &self.neighbors)
    }
}

pub fn nonexistence_certificate(n: usize, q: u64) -> Result<NonexistenceReport, ProjError> {
    if n < 2 || n % 2 == 1 {
        return Err(ProjError::OddDimension(n));
    }
    let m = n / 2;
    let g = |k| qcombin::gaussian(n, k, q).map_err(|_| ProjError::TooLarge { q: q as u32, n });
    let middle = g(m)?;
    let upper = g(m + 1)?;
    let neighbors = &upper + g(m - 1)?;
    let qm = qcombin::q_pow(q, m) - 1u32;
    let qm1 = qcombin::q_pow(q, m + 1) - 1u32;
    Ok(NonexistenceReport {
        n,
        q,
        ratio_identity: &middle * &qm == &upper * &qm1,
        ratio_exceeds_one: qm1 > qm * 2u32,
        middle,
        neighbors,
    })
}

/// The optimal non-cyclic code of `GF(2)^2`:
/// `span(1,0), {0}, span(0,1), GF(2)^2, span(1,1)`.
pub fn fixture_code_2_2() -> SubspaceSequence {
    let f = Field::with_order(2).unwrap();
    let s = |rows: &[&[u32]]| {
        let rows: Vec<Vec<u32>> = rows.iter().map(|r| r.to_vec()).collect();
        Subspace::from_rows(&f, 2, &rows).unwrap()
    };
    SubspaceSequence {
        n: 2,
        field: f.clone(),
        items: vec![s(&[&[1, 0]]), s(&[]), s(&[&[0, 1]]), s(&[&[1, 0], &[0, 1]]), s(&[&[1, 1]])],
        cyclic: false,
    }
}

/// `W^0, W^1`.
pub fn build_full_n1(field: &Field) -> SubspaceSequence {
    SubspaceSequence {
        n: 1,
        field: field.clone(),
        items: vec![Subspace::zero(field, 1), Subspace::full(field, 1)],
        cyclic: true,
    }
}

/// An orbit of the `alpha` action, starting at its least member.
#[derive(Debug, Clone)]
pub struct Necklace {
    pub representative: Subspace,
    /// `orbit[t] = alpha^t * representative`
    pub orbit: Vec<Subspace>,
}

impl Necklace {
    pub fn size(&self) -> usize {
        self.orbit.len()
    }
}

/// All necklaces of `dim`-dimensional subspaces, sorted by representative.
pub fn necklace_decompose(ext: &ExtensionField, dim: usize) -> Vec<Necklace> {
    let code = SimpleCode::new(ext.base(), ext.degree(), dim).expect("dim <= n");
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for s in code.iter() {
        if seen.contains(&s) {
            continue;
        }
        let orbit = ext.orbit(&s);
        seen.extend(orbit.iter().cloned());
        let start = (0..orbit.len()).min_by(|&a, &b| orbit[a].cmp(&orbit[b])).unwrap();
        let mut orbit = orbit;
        orbit.rotate_left(start);
        out.push(Necklace { representative: orbit[0].clone(), orbit });
    }
    out.sort_by(|a, b| a.representative.cmp(&b.representative));
    out
}

/// Alternating path `X_0, Y_0, ..., X_(s-1), Y_(s-1)` through distinct
/// necklaces, closed by `alpha^step X_0 ⊂ Y_(s-1)`.
#[derive(Debug, Clone)]
pub struct NecklacePath {
    pub reps: Vec<Subspace>,
    pub step: u64,
    pub orbit_size: usize,
}

/// Superspaces of `x` of one dimension more, in canonical order.
fn superspaces(x: &Subspace) -> Vec<Subspace> {
    let f = x.field();
    let n = x.ambient();
    let pivots: HashSet<usize> = x.pivots().iter().copied().collect();
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    let mut out: Vec<Subspace> = projective_points(f, free.len())
        .into_iter()
        .map(|c| {
            let mut w = vec![0u32; n];
            for (&col, &v) in free.iter().zip(&c) {
                w[col] = v;
            }
            let mut rows = x.rows();
            rows.push(w);
            Subspace::from_rows(f, n, &rows).unwrap()
        })
        .collect();
    out.sort();
    out
}

/// Hyperplanes of `y`, in canonical order.
fn hyperplanes(y: &Subspace) -> Vec<Subspace> {
    let f = y.field();
    let d = y.dim();
    let mut out: Vec<Subspace> = projective_points(f, d)
        .into_iter()
        .map(|c| {
            let kernel = Subspace::from_rows(f, d, &[c]).unwrap().dual();
            let coords = kernel.matrix().clone();
            let rows = mat_mul(f, &coords, y.matrix()).to_rows();
            Subspace::from_rows(f, y.ambient(), &rows).unwrap()
        })
        .collect();
    out.sort();
    out
}

/// Nonzero vectors of length `d` with leading entry 1.
fn projective_points(f: &Field, d: usize) -> Vec<Vec<u32>> {
    let q = f.q() as u64;
    let total = q.pow(d as u32);
    let mut out = Vec::new();
    for code in 1..total {
        let mut v = Vec::with_capacity(d);
        let mut c = code;
        for _ in 0..d {
            v.push((c % q) as u32);
            c /= q;
        }
        if v.iter().find(|&&x| x != 0) == Some(&1) {
            out.push(v);
        }
    }
    out
}

struct PathSearch<'a> {
    lookup: HashMap<Subspace, usize>,
    x0_orbit: &'a [Subspace],
    steps: Vec<u64>,
    count: usize,
    nodes: usize,
    budget: usize,
}

impl PathSearch<'_> {
    fn close(&self, y: &Subspace) -> Option<u64> {
        self.steps.iter().copied().find(|&l| self.x0_orbit[l as usize].is_subspace_of(y))
    }

    fn extend(&mut self, path: &mut Vec<Subspace>, used: &mut [bool]) -> Option<u64> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return None;
        }
        let x = path.last().unwrap().clone();
        let last = path.len() / 2 + 1 == self.count;
        for y in superspaces(&x) {
            let id = self.lookup[&y];
            if used[id] {
                continue;
            }
            if last {
                if let Some(l) = self.close(&y) {
                    path.push(y);
                    return Some(l);
                }
                continue;
            }
            used[id] = true;
            path.push(y.clone());
            for x_next in hyperplanes(&y) {
                let lid = self.lookup[&x_next];
                if used[lid] {
                    continue;
                }
                used[lid] = true;
                path.push(x_next);
                if let Some(l) = self.extend(path, used) {
                    return Some(l);
                }
                path.pop();
                used[lid] = false;
            }
            path.pop();
            used[id] = false;
        }
        None
    }
}

/// Depth-first search for a middle-levels necklace path, `n = 2m + 1`.
pub fn search_necklace_path(ext: &ExtensionField) -> Result<NecklacePath, ProjError> {
    let n = ext.degree();
    if n.is_multiple_of(2) {
        return Err(ProjError::Unsupported(n));
    }
    let m = n / 2;
    let lower = necklace_decompose(ext, m);
    let upper = necklace_decompose(ext, m + 1);
    let size = lower[0].size();
    for nk in lower.iter().chain(&upper) {
        if nk.size() != size {
            return Err(ProjError::UnequalOrbits(size, nk.size()));
        }
    }
    if lower.len() != upper.len() {
        return Err(ProjError::BadPath("levels have different necklace counts".into()));
    }
    let mut lookup = HashMap::new();
    for (id, nk) in lower.iter().chain(&upper).enumerate() {
        for s in &nk.orbit {
            lookup.insert(s.clone(), id);
        }
    }
    let steps: Vec<u64> = (1..size as u64).filter(|l| l.gcd(&(size as u64)) == 1).collect();
    let mut search = PathSearch {
        lookup,
        x0_orbit: &lower[0].orbit,
        steps,
        count: lower.len(),
        nodes: 0,
        budget: 5_000_000,
    };
    let mut used = vec![false; lower.len() + upper.len()];
    used[0] = true;
    let mut path = vec![lower[0].representative.clone()];
    match search.extend(&mut path, &mut used) {
        Some(step) => Ok(NecklacePath { reps: path, step, orbit_size: size }),
        None => Err(ProjError::SearchExhausted(format!(
            "n = {n}, q = {}, {} nodes visited",
            ext.base().q(),
            search.nodes
        ))),
    }
}

/// Checks the path conditions: alternating containment, distinct
/// necklaces, closing step coprime to the orbit size.
pub fn check_necklace_path(ext: &ExtensionField, path: &NecklacePath) -> Result<(), ProjError> {
    let reps = &path.reps;
    if reps.len() < 2 || reps.len() % 2 == 1 {
        return Err(ProjError::BadPath("expected an even, nonempty alternating path".into()));
    }
    for w in reps.windows(2) {
        if !projectively_adjacent(&w[0], &w[1]) {
            return Err(ProjError::BadPath("consecutive representatives are not adjacent".into()));
        }
    }
    let mut orbits = HashSet::new();
    for r in reps {
        let orbit = ext.orbit(r);
        if orbit.len() != path.orbit_size {
            return Err(ProjError::UnequalOrbits(path.orbit_size, orbit.len()));
        }
        if !orbits.insert(orbit.into_iter().min().unwrap()) {
            return Err(ProjError::BadPath("two representatives share a necklace".into()));
        }
    }
    if path.step.gcd(&(path.orbit_size as u64)) != 1 {
        return Err(ProjError::BadPath(format!("step {} shares a factor with {}", path.step, path.orbit_size)));
    }
    let shifted = reps[0].map(&ext.alpha_pow_matrix(path.step));
    if !projectively_adjacent(reps.last().unwrap(), &shifted) {
        return Err(ProjError::BadPath("alpha^step X_0 is not adjacent to the last item".into()));
    }
    Ok(())
}

/// `L, alpha^l L, alpha^(2l) L, ..., alpha^((N-1) l) L`.
pub fn expand_path(ext: &ExtensionField, path: &[Subspace], step: u64) -> Result<SubspaceSequence, ProjError> {
    let size = expansion_size(ext, path)?;
    let shift = ext.alpha_pow_matrix(step);
    let mut items = Vec::with_capacity(size * path.len());
    let mut block = path.to_vec();
    for _ in 0..size {
        let next = block.iter().map(|s| s.map(&shift)).collect();
        items.extend(std::mem::replace(&mut block, next));
    }
    Ok(SubspaceSequence { n: ext.degree(), field: ext.base().clone(), items, cyclic: true })
}

fn expansion_size(ext: &ExtensionField, path: &[Subspace]) -> Result<usize, ProjError> {
    let mut size = None;
    for s in path {
        let len = ext.orbit(s).len();
        match size {
            None => size = Some(len),
            Some(n) if n != len => return Err(ProjError::UnequalOrbits(n, len)),
            _ => {}
        }
    }
    size.ok_or_else(|| ProjError::BadPath("empty path".into()))
}

/// `n = 3`: `W^0, C_0, C_1, W^3, C_(P'-1), ..., C_2` from a middle-levels
/// code `C` with `dim C_0 = 1`.
pub fn build_full_n3(field: &Field) -> Result<SubspaceSequence, ProjError> {
    let ext = ExtensionField::new(field, 3)?;
    let path = search_necklace_path(&ext)?;
    let middle = expand_path(&ext, &path.reps, path.step)?;
    let c = middle.items;
    debug_assert_eq!(c[0].dim(), 1);
    let i = 1;
    let mut items = vec![Subspace::zero(field, 3)];
    items.extend_from_slice(&c[..=i]);
    items.push(Subspace::full(field, 3));
    items.extend(c[i + 1..].iter().rev().cloned());
    Ok(SubspaceSequence { n: 3, field: field.clone(), items, cyclic: true })
}

/// `n = 5`: two new necklaces `X_0 ∩ X_1` and `Y_0 + Y_1` are threaded
/// into the path, and the first two expanded blocks are rearranged to make
/// room for `W^0` and `W^5`.
pub fn build_full_n5(field: &Field) -> Result<SubspaceSequence, ProjError> {
    let ext = ExtensionField::new(field, 5)?;
    let path = search_necklace_path(&ext)?;
    let r = &path.reps;
    let s = r.len() / 2;
    let x = |i: usize| &r[2 * i];
    let y = |i: usize| &r[2 * i + 1];
    let meet = x(0).intersect(x(1))?;
    let join = y(0).sum(y(1))?;

    let mut l1 = vec![x(0).clone(), meet.clone(), x(1).clone(), y(0).clone(), join.clone(), y(1).clone()];
    l1.extend(r[4..].iter().cloned());

    let shift = ext.alpha_pow_matrix(path.step);
    let a = |t: &Subspace| t.map(&shift);
    let mut star = vec![x(0).clone(), meet.clone(), Subspace::zero(field, 5), a(&meet), a(x(0))];
    for i in (2..s).rev() {
        star.push(y(i).clone());
        star.push(x(i).clone());
    }
    star.extend([y(1).clone(), x(1).clone(), y(0).clone(), join.clone(), Subspace::full(field, 5)]);
    star.extend([a(&join), a(y(0)), a(x(1)), a(y(1))]);
    for i in 2..s {
        star.push(a(x(i)));
        star.push(a(y(i)));
    }

    let rest = expand_path(&ext, &l1, path.step)?;
    let mut items = star;
    items.extend(rest.items.into_iter().skip(2 * l1.len()));
    Ok(SubspaceSequence { n: 5, field: field.clone(), items, cyclic: true })
}

/// Cyclic optimal code for `n` in `{1, 3, 5}`.
pub fn build_full(field: &Field, n: usize) -> Result<SubspaceSequence, ProjError> {
    match n {
        1 => Ok(build_full_n1(field)),
        3 => build_full_n3(field),
        5 => build_full_n5(field),
        _ => Err(ProjError::Unsupported(n)),
    }
}
