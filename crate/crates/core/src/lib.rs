//! Exact many-particle scattering on `n`-mode unitaries.
//!
//! Bosons, fermions and distinguishable particles are propagated through a
//! single-particle scattering matrix; event probabilities come from
//! permanents and determinants of the transition submatrix. For the Fourier
//! (Bell) multiport, the [`suppression`] module predicts fully destructive
//! interference from a linear-time arithmetic test on the arrangements.
//!
//! ```
//! use multiport_core::{prob_boson, fourier_matrix, ModeOccupation};
//!
//! let u = fourier_matrix(2);
//! let r: ModeOccupation = "1,1".parse().unwrap();
//! // two bosons on a balanced beam splitter never leave through different ports
//! assert!(prob_boson(&u, &r, &r).unwrap() < 1e-15);
//! ```

pub mod arrangements;
pub mod error;
pub mod linalg;
pub mod scattering;
pub mod suppression;

pub use arrangements::{
    assignment_to_occupation, canonical_class, count_arrangements, detect_periodicity,
    enumerate_classes, enumerate_occupations, occupation_to_assignment, parse_arrangement,
    ArrangementClass, ModeAssignment, ModeOccupation, Periodicity, Species,
};
pub use error::{Error, Result};
pub use linalg::{
    determinant, fourier_matrix, is_unitary, matrix_from_json, matrix_to_json, permanent,
    permanent_naive, random_unitary, submatrix_for_transition, ComplexMatrix, RealMatrix, C64,
};
pub use scattering::{
    average_pauli_probability, correlation_boson_fermion, enhancement_ratio,
    equiprobable_distribution, equiprobable_estimate, mixed_state_distribution,
    output_distribution, phase_class_histogram, prob, prob_boson, prob_distinguishable,
    prob_fermion, single_particle_prob, total_variation_distance, verify_phase_class_symmetry,
    zero_threshold, DistributionRow, DistributionTable, InitialState, Multiport, PauliAverage,
    PhaseClassHistogram, SymmetryCase, TransitionRecord,
};
pub use suppression::{
    boson_suppressed, classify_transitions, classify_transitions_with, fermion_suppressed,
    law_verdict, q_value, ClassifiedTransition, Direction, FermionCase, LawTag, SuppressionVerdict,
};
