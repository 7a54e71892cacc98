//! Exact query learning of multilinear polynomials over finite fields.
//!
//! A hidden `f: F_q^n → F_q` of degree at most `d` is reachable only through a
//! counted [`Oracle`]. Two learners recover it exactly:
//!
//! * [`classical_learn`], evaluating `f` on 0/1 points, with `Σ_{i≤d} C(n,i)` queries;
//! * [`quantum_learn`], a simulated quantum algorithm built from Fourier
//!   sampling over F_q and discrete derivatives, with
//!   `1 + Σ_{i=1}^{d} 2^{i−1} C(n,i−1)` queries.
//!
//! Field arithmetic is exact. Simulated amplitudes are generic over the float
//! type (see [`SimFloat`]); the aliases below fix it to `f64` or `f32`.

pub mod error;
pub mod field;
pub mod learn;
pub mod oracle;
pub mod poly;
pub mod scalar;
pub mod sim;
pub mod verify;

pub use error::{Error, Result};
pub use field::{FieldCtx, FieldElem, FieldSpec};
pub use learn::{
    classical_learn, classical_query_count, fano_error_bound, learn_top_degree, lower_bound_report, quantum_learn,
    quantum_learn_linear, quantum_query_count, LearnReport, LinearOutcome, LowerBoundReport, QuantumLearner,
};
pub use oracle::{reduce_oracle, HiddenOracle, Oracle, QueryLedger, ReducedOracle};
pub use poly::{binomial, DerivativeFn, MultilinearPoly, PointVec, PolyFile, SubsetIndex};
pub use scalar::SimFloat;
pub use sim::{QftMatrix, StateVector, DEFAULT_MEM_CAP};

pub type StateVector64 = StateVector<f64>;
pub type StateVector32 = StateVector<f32>;
pub type QftMatrix64 = QftMatrix<f64>;
pub type QftMatrix32 = QftMatrix<f32>;
pub type QuantumLearner64 = QuantumLearner<f64>;
pub type QuantumLearner32 = QuantumLearner<f32>;
