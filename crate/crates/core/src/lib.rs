//! Gray codes for vector spaces over finite fields.
//!
//! The crate builds cyclic optimal Grassmannian Gray codes for every
//! `(n, k; q)`, provides the enumerative codec induced by the simple code
//! (index to subspace and back), and constructs cyclic optimal
//! projective-space Gray codes for `n = 1, 3, 5`, together with numeric
//! nonexistence certificates for even `n`.

pub mod codec;
pub mod field;
pub mod grassmann;
pub mod linalg;
pub mod projective;
pub mod qcombin;
pub mod textio;

pub use codec::{Codec, CodecError};
pub use field::{Field, FieldElement, FieldError};
pub use grassmann::{
    build_general, build_simple, dual_code, verify_gray, ChoiceSource, GrayReport, GraySequence,
    SimpleCode,
};
pub use linalg::{LinalgError, Matrix, Subspace};
pub use num_bigint::BigUint;
pub use projective::{ExtensionField, SubspaceSequence};
