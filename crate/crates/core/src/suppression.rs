//! Suppression laws for the Fourier multiport.
//!
//! For an input with minimal period `m` (repeated `p = n/m` times) and an
//! output `s`, let `Q = m * sum_j d_j(s) mod n`. Bosons are suppressed when
//! `Q != 0`. Fermions follow the same rule when `N` is odd or `N/p` is even;
//! when `N` is even and `N/p` odd they are suppressed when `Q != n/2`.
//! Because the Fourier transition probabilities are symmetric under
//! exchanging input and output, each law is also applied with the roles
//! swapped.
//!
//! Every predicate here is integer arithmetic linear in the number of modes.

use rayon::prelude::*;
use serde::Serialize;

use crate::arrangements::{detect_periodicity, enumerate_classes, ModeOccupation, Periodicity};
use crate::error::{Error, Result};
use crate::scattering::{transition_record, zero_threshold, Multiport, Species, TransitionRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Reverse,
    None,
}

impl Direction {
    pub fn name(self) -> &'static str {
        match self {
            Direction::Forward => "forward",
            Direction::Reverse => "reverse",
            Direction::None => "none",
        }
    }
}

/// Which fermionic rule was used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FermionCase {
    /// `N` odd or `N/p` even: suppressed iff `Q != 0`.
    OddOrEvenRatio,
    /// `N` even and `N/p` odd: suppressed iff `Q != n/2`.
    EvenOddRatio,
    NotApplicable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SuppressionVerdict {
    pub suppressed_by_law: bool,
    pub direction: Direction,
    pub q_value: usize,
    pub period_m: usize,
    pub repetitions_p: usize,
    pub fermion_case: FermionCase,
}

/// `m * sum_j d_j(s) mod n`.
pub fn q_value(m: usize, s: &ModeOccupation, n: usize) -> Result<usize> {
    if m == 0 || !n.is_multiple_of(m) {
        return Err(Error::PeriodDoesNotDivide {
            period: m,
            modes: n,
        });
    }
    let sum = s.assignment_sum_mod(n) as u128;
    Ok(((m as u128 * sum) % n as u128) as usize)
}

fn check_pair(r: &ModeOccupation, s: &ModeOccupation, n: usize) -> Result<()> {
    for occ in [r, s] {
        if occ.modes() != n {
            return Err(Error::ModeMismatch {
                left: occ.modes(),
                right: n,
            });
        }
    }
    if r.particles() != s.particles() {
        return Err(Error::ParticleMismatch {
            input: r.particles(),
            output: s.particles(),
        });
    }
    Ok(())
}

/// One-directional test: `periodic` supplies `m` and `p`, `other` the sum.
fn apply(
    periodic: &ModeOccupation,
    other: &ModeOccupation,
    n: usize,
    fermion: bool,
    direction: Direction,
) -> SuppressionVerdict {
    let Periodicity {
        period,
        repetitions,
        ..
    } = detect_periodicity(periodic);
    let q = q_value(period, other, n).expect("minimal period divides n");
    let particles = periodic.particles();
    let (fires, case) = if !fermion {
        // p = 1 gives Q = 0 identically: nothing to predict
        (repetitions > 1 && q != 0, FermionCase::NotApplicable)
    } else if particles % 2 == 1 || (particles / repetitions).is_multiple_of(2) {
        (q != 0, FermionCase::OddOrEvenRatio)
    } else {
        // n is even here: N even, N/p odd forces p even
        (2 * q != n, FermionCase::EvenOddRatio)
    };
    SuppressionVerdict {
        suppressed_by_law: fires,
        direction: if fires { direction } else { Direction::None },
        q_value: q,
        period_m: period,
        repetitions_p: repetitions,
        fermion_case: case,
    }
}

fn both_ways(
    r: &ModeOccupation,
    s: &ModeOccupation,
    n: usize,
    fermion: bool,
) -> SuppressionVerdict {
    let forward = apply(r, s, n, fermion, Direction::Forward);
    if forward.suppressed_by_law {
        return forward;
    }
    let reverse = apply(s, r, n, fermion, Direction::Reverse);
    if reverse.suppressed_by_law {
        reverse
    } else {
        forward
    }
}

/// Bosonic law, forward first, then with input and output exchanged.
pub fn boson_suppressed(
    r: &ModeOccupation,
    s: &ModeOccupation,
    n: usize,
) -> Result<SuppressionVerdict> {
    check_pair(r, s, n)?;
    Ok(both_ways(r, s, n, false))
}

/// Fermionic law; both arrangements must be Pauli states.
pub fn fermion_suppressed(
    r: &ModeOccupation,
    s: &ModeOccupation,
    n: usize,
) -> Result<SuppressionVerdict> {
    check_pair(r, s, n)?;
    if !r.is_pauli() || !s.is_pauli() {
        return Err(Error::InvalidFermionState);
    }
    Ok(both_ways(r, s, n, true))
}

/// Law verdict for `species`; `None` for distinguishable particles and for
/// fermionic outputs already excluded by the Pauli principle.
pub fn law_verdict(
    r: &ModeOccupation,
    s: &ModeOccupation,
    species: Species,
) -> Result<Option<SuppressionVerdict>> {
    let n = r.modes();
    match species {
        Species::Distinguishable => Ok(None),
        Species::Boson => boson_suppressed(r, s, n).map(Some),
        Species::Fermion if !s.is_pauli() => {
            check_pair(r, s, n)?;
            Ok(None)
        }
        Species::Fermion => fermion_suppressed(r, s, n).map(Some),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LawTag {
    /// Predicted by the law, and numerically zero.
    PredictedZero,
    /// Numerically zero without a law prediction.
    UnpredictedZero,
    Nonzero,
}

impl LawTag {
    pub fn name(self) -> &'static str {
        match self {
            LawTag::PredictedZero => "predicted_zero",
            LawTag::UnpredictedZero => "unpredicted_zero",
            LawTag::Nonzero => "nonzero",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassifiedTransition {
    pub record: TransitionRecord,
    pub verdict: Option<SuppressionVerdict>,
    pub tag: LawTag,
}

impl ClassifiedTransition {
    pub fn direction(&self) -> Direction {
        self.verdict.map_or(Direction::None, |v| v.direction)
    }
}

/// Classifies one transition; a law prediction with a non-vanishing exact
/// probability is reported as [`Error::LawViolation`].
pub fn classify_transition(
    mp: &Multiport,
    r: &ModeOccupation,
    s: &ModeOccupation,
    species: Species,
) -> Result<ClassifiedTransition> {
    let record = transition_record(mp, r, s, species)?;
    let verdict = law_verdict(r, s, species)?;
    let zero = record.probability < zero_threshold(r.modes(), r.particles());
    let predicted = verdict.is_some_and(|v| v.suppressed_by_law);
    let tag = match (predicted, zero) {
        (true, true) => LawTag::PredictedZero,
        (true, false) => {
            return Err(Error::LawViolation {
                input: r.to_string(),
                output: s.to_string(),
                probability: record.probability,
            })
        }
        (false, true) => LawTag::UnpredictedZero,
        (false, false) => LawTag::Nonzero,
    };
    Ok(ClassifiedTransition {
        record,
        verdict,
        tag,
    })
}

/// Every pair of inequivalent arrangements on `mp`, row-major in class order.
pub fn classify_transitions_with(
    mp: &Multiport,
    particles: usize,
    species: Species,
    pauli_only: bool,
) -> Result<Vec<ClassifiedTransition>> {
    let pauli = pauli_only || species == Species::Fermion;
    let reps: Vec<ModeOccupation> = enumerate_classes(mp.modes(), particles, pauli)
        .into_iter()
        .map(|c| c.representative)
        .collect();
    let rows: Vec<Vec<ClassifiedTransition>> = reps
        .par_iter()
        .map(|r| {
            reps.iter()
                .map(|s| classify_transition(mp, r, s, species))
                .collect::<Result<_>>()
        })
        .collect::<Result<_>>()?;
    Ok(rows.into_iter().flatten().collect())
}

/// [`classify_transitions_with`] on the `n`-mode Fourier multiport.
pub fn classify_transitions(
    n: usize,
    particles: usize,
    species: Species,
    pauli_only: bool,
) -> Result<Vec<ClassifiedTransition>> {
    classify_transitions_with(&Multiport::fourier(n), particles, species, pauli_only)
}
