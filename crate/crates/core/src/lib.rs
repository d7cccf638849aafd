//! Phase-estimation sensitivity limits for measurements restricted to one
//! projective basis, including the gain obtained when the expectation value
//! of the phase-imprinting generator is known, and the atomic-clock study
//! with one-axis-twisted spin states.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
pub mod bounds;
pub mod clock;
pub mod error;
pub mod linalg;
pub mod moments;
pub mod observable;
pub mod operator;
pub mod random;
pub mod spin;
pub mod state;
pub mod verify;

pub use basis::ProjectiveBasis;
pub use bounds::{
    chi_squared, classical_fisher, enhanced_sensitivity, enhancement, entanglement_witness, quantum_fisher,
    spin_squeezing_sensitivity, ChiDiagnostic, ChiSquared, SensitivityBreakdown, SqueezingSensitivity,
};
pub use clock::{
    coefficient_profile, find_tau_opt, gain_scaling, sensitivity_sweep, ClockModel, CoefficientProfile, CoefficientRow,
    ScalingRecord, SweepRecord, TauOpt,
};
pub use error::{Error, Result};
pub use moments::{
    block_inverse, max_moment_sensitivity, moment_data, moment_matrix, reduced_projector_stats, structured_inverse,
    FamilyMember, MomentData, MomentMatrix, MomentPolicy, OperatorFamily, ReducedStats,
};
pub use observable::{
    ablated_observable, normalize_coefficients, x_opt, x_opt0, AblatedObservable, ObservableCoefficients,
    OptimalObservable,
};
pub use operator::HermitianOperator;
pub use random::RandomInstance;
pub use spin::{
    coherent_state_z, jy_basis, make_spin_operators, oat_state, phase_evolve, Axis, SpinLength, SpinSystem,
};
pub use state::QuantumState;
pub use verify::{run_verification, CheckOutcome, VerifyConfig, VerifyReport};
