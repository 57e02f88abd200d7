//! Bell inequalities from pseudo Pauli operators on logical qubits, with
//! exact classical bounds, quantum bounds and sum-of-squares certificates.

pub mod bounds;
pub mod cases;
pub mod construct;
pub mod error;
pub mod expression;
pub mod linalg;
pub mod pauli;
pub mod report;
pub mod pseudo;
pub mod recipe;
pub mod recursive;
pub mod stabilizer;
pub mod uncertainty;

pub use error::{Error, Result};
pub use linalg::{DenseMatrix, DensityMatrix, StateVector};
pub use pauli::{Pauli, PauliSum, PauliTerm};
