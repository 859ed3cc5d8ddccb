//! Python bindings: fields, subspaces, the codec, and the Gray code builders.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use subgray_core::grassmann::RandomChoices;
use subgray_core::projective;
use subgray_core::{qcombin, textio, BigUint, Codec, Field, GraySequence, SubspaceSequence};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn field(spec: &str) -> PyResult<Field> {
    Field::parse(spec).map_err(value_err)
}

/// The finite field GF(q), given as `"q"` or `"p^m"`.
#[pyclass(name = "Field", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyField(pub Field);

#[pymethods]
impl PyField {
    #[new]
    fn new(spec: &str) -> PyResult<Self> {
        field(spec).map(PyField)
    }

    #[getter]
    fn q(&self) -> u32 {
        self.0.q()
    }

    #[getter]
    fn p(&self) -> u32 {
        self.0.p()
    }

    #[getter]
    fn degree(&self) -> u32 {
        self.0.degree()
    }

    fn add(&self, a: u32, b: u32) -> PyResult<u32> {
        self.check(&[a, b])?;
        Ok(self.0.add(a, b))
    }

    fn mul(&self, a: u32, b: u32) -> PyResult<u32> {
        self.check(&[a, b])?;
        Ok(self.0.mul(a, b))
    }

    fn inv(&self, a: u32) -> PyResult<u32> {
        self.check(&[a])?;
        if a == 0 {
            return Err(PyValueError::new_err("zero has no inverse"));
        }
        Ok(self.0.inv(a))
    }

    fn __repr__(&self) -> String {
        format!("Field('{}')", self.0.name())
    }
}

impl PyField {
    fn check(&self, xs: &[u32]) -> PyResult<()> {
        match xs.iter().find(|&&x| x >= self.0.q()) {
            Some(x) => Err(PyValueError::new_err(format!("{x} is not an element of GF({})", self.0.name()))),
            None => Ok(()),
        }
    }
}

/// A subspace of GF(q)^n, stored by its canonical basis.
#[pyclass(name = "Subspace", frozen, from_py_object)]
#[derive(Clone)]
pub struct PySubspace(pub subgray_core::Subspace);

#[pymethods]
impl PySubspace {
    /// Row span of `rows` in GF(q)^n.
    #[new]
    fn new(q: &str, n: usize, rows: Vec<Vec<u32>>) -> PyResult<Self> {
        let f = field(q)?;
        subgray_core::Subspace::from_rows(&f, n, &rows).map(PySubspace).map_err(value_err)
    }

    /// Parses a `k n q` block.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        textio::parse_subspace(text).map(PySubspace).map_err(value_err)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    #[getter]
    fn ambient(&self) -> usize {
        self.0.ambient()
    }

    #[getter]
    fn field(&self) -> PyField {
        PyField(self.0.field().clone())
    }

    /// Canonical basis rows.
    fn rows(&self) -> Vec<Vec<u32>> {
        self.0.rows()
    }

    fn contains(&self, v: Vec<u32>) -> PyResult<bool> {
        self.0.contains(&v).map_err(value_err)
    }

    fn is_subspace_of(&self, other: &PySubspace) -> bool {
        self.0.is_subspace_of(&other.0)
    }

    fn intersect(&self, other: &PySubspace) -> PyResult<PySubspace> {
        self.0.intersect(&other.0).map(PySubspace).map_err(value_err)
    }

    fn sum(&self, other: &PySubspace) -> PyResult<PySubspace> {
        self.0.sum(&other.0).map(PySubspace).map_err(value_err)
    }

    fn dual(&self) -> PySubspace {
        PySubspace(self.0.dual())
    }

    /// Text block `k n q` followed by the canonical rows.
    fn to_text(&self) -> String {
        textio::format_subspace(&self.0)
    }

    fn __eq__(&self, other: &PySubspace) -> bool {
        self.0 == other.0
    }

    fn __hash__(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.0.hash(&mut h);
        h.finish()
    }

    fn __repr__(&self) -> String {
        format!("Subspace('{}', {}, {:?})", self.0.field().name(), self.0.ambient(), self.0.rows())
    }
}

/// Index to subspace and back for the simple `(n, k; q)` Gray code.
#[pyclass(name = "Codec", frozen)]
pub struct PyCodec(Codec);

#[pymethods]
impl PyCodec {
    #[new]
    fn new(n: usize, k: usize, q: &str) -> PyResult<Self> {
        Codec::new(&field(q)?, n, k).map(PyCodec).map_err(value_err)
    }

    fn __len__(&self) -> PyResult<usize> {
        usize::try_from(self.0.len()).map_err(|_| PyValueError::new_err("code too long for len(); use size"))
    }

    /// Number of items, as an unbounded integer.
    #[getter]
    fn size(&self) -> BigUint {
        self.0.len().clone()
    }

    fn encode(&self, m: BigUint) -> PyResult<PySubspace> {
        self.0.encode(&m).map(PySubspace).map_err(value_err)
    }

    fn decode(&self, w: &PySubspace) -> PyResult<BigUint> {
        self.0.decode(&w.0).map_err(value_err)
    }

    fn decode_fast(&self, w: &PySubspace) -> PyResult<BigUint> {
        self.0.decode_fast(&w.0).map_err(value_err)
    }

    fn encode_via_dual(&self, m: BigUint) -> PyResult<PySubspace> {
        self.0.encode_via_dual(&m).map(PySubspace).map_err(value_err)
    }

    fn decode_via_dual(&self, w: &PySubspace) -> PyResult<BigUint> {
        self.0.decode_via_dual(&w.0).map_err(value_err)
    }
}

fn wrap(items: Vec<subgray_core::Subspace>) -> Vec<PySubspace> {
    items.into_iter().map(PySubspace).collect()
}

fn unwrap_items(items: &[PySubspace]) -> Vec<subgray_core::Subspace> {
    items.iter().map(|s| s.0.clone()).collect()
}

/// Number of `k`-subspaces of GF(q)^n.
#[pyfunction]
fn gaussian(n: usize, k: usize, q: u64) -> PyResult<BigUint> {
    qcombin::gaussian(n, k, q).map_err(value_err)
}

/// Lower bound on the number of distinct cyclic optimal `(n, k; q)` codes.
#[pyfunction]
fn count_lower_bound(n: usize, k: usize, q: u64) -> PyResult<BigUint> {
    qcombin::count_lower_bound(n, k, q).map_err(value_err)
}

/// The simple cyclic optimal Gray code, as a list of subspaces.
#[pyfunction]
fn build_simple(n: usize, k: usize, q: &str) -> PyResult<Vec<PySubspace>> {
    subgray_core::build_simple(n, k, &field(q)?).map(|s| wrap(s.items)).map_err(value_err)
}

/// A cyclic optimal Gray code from seeded random construction choices.
#[pyfunction]
fn build_general(n: usize, k: usize, q: &str, seed: u64) -> PyResult<Vec<PySubspace>> {
    subgray_core::build_general(n, k, &field(q)?, &mut RandomChoices::new(seed))
        .map(|s| wrap(s.items))
        .map_err(value_err)
}

/// Check names with pass flags for a cyclic Grassmannian sequence; with
/// `simplicity=True` the two simplicity flags are appended.
#[pyfunction]
#[pyo3(signature = (n, k, q, items, simplicity = false))]
fn verify_gray(n: usize, k: usize, q: &str, items: Vec<PySubspace>, simplicity: bool) -> PyResult<Vec<(String, bool)>> {
    let s = GraySequence { n, k, field: field(q)?, items: unwrap_items(&items), cyclic: true };
    let r = subgray_core::verify_gray(&s);
    let mut out = r.summary();
    if simplicity {
        out.extend(r.simplicity());
    }
    Ok(out)
}

/// Cyclic Gray code through all subspaces of GF(q)^n, for n = 1, 3, 5.
#[pyfunction]
fn build_projective(n: usize, q: &str) -> PyResult<Vec<PySubspace>> {
    projective::build_full(&field(q)?, n).map(|s| wrap(s.items)).map_err(value_err)
}

/// Check names with pass flags for a cyclic sequence of all subspaces.
#[pyfunction]
fn verify_projective(n: usize, q: &str, items: Vec<PySubspace>) -> PyResult<Vec<(String, bool)>> {
    let s = SubspaceSequence { n, field: field(q)?, items: unwrap_items(&items), cyclic: true };
    Ok(projective::verify_subspace(&s).summary())
}

/// `(middle, neighbors, deficit)` for even `n`; `deficit` is None when
/// the middle level is not larger.
#[pyfunction]
fn nonexistence_certificate(n: usize, q: u64) -> PyResult<(BigUint, BigUint, Option<BigUint>)> {
    let r = projective::nonexistence_certificate(n, q).map_err(value_err)?;
    let d = r.deficit();
    Ok((r.middle, r.neighbors, d))
}

#[pymodule]
pub fn subgray(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyField>()?;
    m.add_class::<PySubspace>()?;
    m.add_class::<PyCodec>()?;
    m.add_function(wrap_pyfunction!(gaussian, m)?)?;
    m.add_function(wrap_pyfunction!(count_lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(build_simple, m)?)?;
    m.add_function(wrap_pyfunction!(build_general, m)?)?;
    m.add_function(wrap_pyfunction!(verify_gray, m)?)?;
    m.add_function(wrap_pyfunction!(build_projective, m)?)?;
    m.add_function(wrap_pyfunction!(verify_projective, m)?)?;
    m.add_function(wrap_pyfunction!(nonexistence_certificate, m)?)?;
    Ok(())
}
