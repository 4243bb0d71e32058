//! Transition probabilities for distinguishable particles, bosons and
//! fermions, plus the derived distributions and statistics.
//!
//! Probabilities come from matrix functions of the transition submatrix
//! `M[j][k] = U[d_j(r), d_k(s)]`:
//!
//! * distinguishable: `perm(|M|^2) / prod s_j!`
//! * bosons: `|perm(M)|^2 / prod r_j! s_j!`
//! * fermions: `|det(M)|^2`

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::arrangements::{
    canonical_class, count_arrangements, detect_periodicity, enumerate_classes,
    enumerate_occupations, factorial, ModeOccupation,
};
use crate::error::{Error, Result};
use crate::linalg::{
    determinant, fourier_matrix, permanent, random_unitary, submatrix_for_transition,
    ComplexMatrix, C64,
};
use crate::suppression::law_verdict;

pub use crate::arrangements::Species;

/// Relative zero level: a probability below `ZERO_RELATIVE * N! / n^N`
/// counts as vanishing.
pub const ZERO_RELATIVE: f64 = 1e-9;

/// Largest particle number the phase-class enumeration accepts.
pub const HISTOGRAM_MAX: usize = 9;

/// Scale-aware zero threshold for `particles` in `n` modes.
pub fn zero_threshold(n: usize, particles: usize) -> f64 {
    ZERO_RELATIVE * factorial(particles) / (n as f64).powi(particles as i32)
}

/// A single-particle scattering matrix and a label describing where it
/// came from (`fourier:6`, `random:5:42`, `file:<path>`).
#[derive(Debug, Clone)]
pub struct Multiport {
    matrix: ComplexMatrix,
    label: String,
    fourier: bool,
}

impl Multiport {
    pub fn fourier(n: usize) -> Self {
        Self {
            matrix: fourier_matrix(n),
            label: format!("fourier:{n}"),
            fourier: true,
        }
    }

    pub fn random(n: usize, seed: u64) -> Self {
        Self {
            matrix: random_unitary(n, seed),
            label: format!("random:{n}:{seed}"),
            fourier: false,
        }
    }

    /// Any square matrix. Suppression-law annotations are only produced for
    /// the Fourier constructor.
    pub fn custom(matrix: ComplexMatrix, label: impl Into<String>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare {
                rows: matrix.rows(),
                cols: matrix.cols(),
            });
        }
        Ok(Self {
            matrix,
            label: label.into(),
            fourier: false,
        })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_fourier(&self) -> bool {
        self.fourier
    }

    pub fn modes(&self) -> usize {
        self.matrix.rows()
    }
}

/// `|U[j,k]|^2` with 1-based mode labels.
pub fn single_particle_prob(u: &ComplexMatrix, j: usize, k: usize) -> Result<f64> {
    let n = u.rows();
    for mode in [j, k] {
        if mode == 0 || mode > n {
            return Err(Error::InvalidMode { mode, modes: n });
        }
    }
    Ok(u[(j - 1, k - 1)].norm_sqr())
}

pub fn prob_distinguishable(
    u: &ComplexMatrix,
    input: &ModeOccupation,
    output: &ModeOccupation,
) -> Result<f64> {
    let m = submatrix_for_transition(u, input, output)?;
    Ok(permanent(&m.abs_squared())? / output.factorial_product())
}

pub fn prob_boson(
    u: &ComplexMatrix,
    input: &ModeOccupation,
    output: &ModeOccupation,
) -> Result<f64> {
    let m = submatrix_for_transition(u, input, output)?;
    Ok(permanent(&m)?.norm_sqr() / (input.factorial_product() * output.factorial_product()))
}

/// Zero without evaluating anything when the output violates Pauli exclusion.
pub fn prob_fermion(
    u: &ComplexMatrix,
    input: &ModeOccupation,
    output: &ModeOccupation,
) -> Result<f64> {
    if !input.is_pauli() {
        return Err(Error::InvalidFermionState);
    }
    let m = submatrix_for_transition(u, input, output)?;
    if !output.is_pauli() {
        return Ok(0.0);
    }
    Ok(determinant(&m)?.norm_sqr())
}

pub fn prob(
    u: &ComplexMatrix,
    input: &ModeOccupation,
    output: &ModeOccupation,
    species: Species,
) -> Result<f64> {
    match species {
        Species::Distinguishable => prob_distinguishable(u, input, output),
        Species::Boson => prob_boson(u, input, output),
        Species::Fermion => prob_fermion(u, input, output),
    }
}

/// `P_species / P_D`, or `None` when the classical probability is below the
/// zero threshold.
pub fn enhancement_ratio(
    u: &ComplexMatrix,
    input: &ModeOccupation,
    output: &ModeOccupation,
    species: Species,
) -> Result<Option<f64>> {
    let p = prob(u, input, output, species)?;
    let classical = prob_distinguishable(u, input, output)?;
    Ok(ratio(
        p,
        classical,
        zero_threshold(input.modes(), input.particles()),
    ))
}

fn ratio(p: f64, classical: f64, threshold: f64) -> Option<f64> {
    (classical >= threshold).then(|| p / classical)
}

/// One evaluated transition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransitionRecord {
    #[serde(serialize_with = "as_display")]
    pub input: ModeOccupation,
    #[serde(serialize_with = "as_display")]
    pub output: ModeOccupation,
    pub species: Species,
    pub probability: f64,
    pub enhancement: Option<f64>,
}

pub fn transition_record(
    mp: &Multiport,
    input: &ModeOccupation,
    output: &ModeOccupation,
    species: Species,
) -> Result<TransitionRecord> {
    let u = mp.matrix();
    let probability = prob(u, input, output, species)?;
    let classical = match species {
        Species::Distinguishable => probability,
        _ => prob_distinguishable(u, input, output)?,
    };
    Ok(TransitionRecord {
        input: input.clone(),
        output: output.clone(),
        species,
        probability,
        enhancement: ratio(
            probability,
            classical,
            zero_threshold(input.modes(), input.particles()),
        ),
    })
}

/// Which initial state a distribution refers to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InitialState {
    Pure(ModeOccupation),
    /// Equal-weight mixture over the inequivalent arrangements.
    Mixed {
        pauli_only: bool,
    },
    /// The flat estimate `1 / N_arr`.
    Equiprobable,
}

impl fmt::Display for InitialState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialState::Pure(occ) => occ.fmt(f),
            InitialState::Mixed { pauli_only: false } => f.write_str("mixed"),
            InitialState::Mixed { pauli_only: true } => f.write_str("mixed-pauli"),
            InitialState::Equiprobable => f.write_str("equiprobable"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistributionRow {
    #[serde(serialize_with = "as_display")]
    pub output: ModeOccupation,
    pub class_multiplicity: usize,
    pub probability: f64,
    pub enhancement: Option<f64>,
    pub law_suppressed: bool,
}

/// Output distribution for one initial state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistributionTable {
    pub matrix: String,
    pub species: Species,
    #[serde(serialize_with = "as_display")]
    pub input: InitialState,
    pub rows: Vec<DistributionRow>,
}

impl DistributionTable {
    pub fn total(&self) -> f64 {
        self.rows.iter().map(|r| r.probability).sum()
    }

    pub fn probability_of(&self, output: &ModeOccupation) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| &r.output == output)
            .map(|r| r.probability)
    }
}

fn as_display<T: fmt::Display, S: Serializer>(
    value: &T,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(value)
}

/// Probability of every output arrangement (only Pauli outputs for
/// fermions), optionally summed over dihedral classes of outputs.
pub fn output_distribution(
    mp: &Multiport,
    input: &ModeOccupation,
    species: Species,
    group_by_class: bool,
) -> Result<DistributionTable> {
    if species == Species::Fermion && !input.is_pauli() {
        return Err(Error::InvalidFermionState);
    }
    let n = mp.modes();
    if input.modes() != n {
        return Err(Error::ModeMismatch {
            left: input.modes(),
            right: n,
        });
    }
    let particles = input.particles();
    let outputs: Vec<ModeOccupation> =
        enumerate_occupations(n, particles, species == Species::Fermion).collect();
    let evaluated: Vec<(f64, f64, bool)> = outputs
        .par_iter()
        .map(|s| {
            let u = mp.matrix();
            let p = prob(u, input, s, species)?;
            let pd = prob_distinguishable(u, input, s)?;
            let law = if mp.is_fourier() {
                law_verdict(input, s, species)?.is_some_and(|v| v.suppressed_by_law)
            } else {
                false
            };
            Ok((p, pd, law))
        })
        .collect::<Result<_>>()?;
    let threshold = zero_threshold(n, particles);
    let rows = if group_by_class {
        group_rows(&outputs, &evaluated, species, threshold)
    } else {
        outputs
            .into_iter()
            .zip(evaluated)
            .map(|(output, (p, pd, law))| DistributionRow {
                output,
                class_multiplicity: 1,
                probability: p,
                enhancement: ratio(p, pd, threshold),
                law_suppressed: law,
            })
            .collect()
    };
    Ok(DistributionTable {
        matrix: mp.label().to_string(),
        species,
        input: InitialState::Pure(input.clone()),
        rows,
    })
}

fn group_rows(
    outputs: &[ModeOccupation],
    evaluated: &[(f64, f64, bool)],
    species: Species,
    threshold: f64,
) -> Vec<DistributionRow> {
    let Some(first) = outputs.first() else {
        return Vec::new();
    };
    let mut sums: BTreeMap<ModeOccupation, (f64, f64, bool)> = BTreeMap::new();
    for (s, &(p, pd, law)) in outputs.iter().zip(evaluated) {
        let entry = sums
            .entry(canonical_class(s).representative)
            .or_insert((0.0, 0.0, false));
        entry.0 += p;
        entry.1 += pd;
        entry.2 |= law;
    }
    enumerate_classes(
        first.modes(),
        first.particles(),
        species == Species::Fermion,
    )
    .into_iter()
    .map(|class| {
        let (p, pd, law) = sums[&class.representative];
        DistributionRow {
            output: class.representative,
            class_multiplicity: class.multiplicity,
            probability: p,
            enhancement: ratio(p, pd, threshold * class.multiplicity as f64),
            law_suppressed: law,
        }
    })
    .collect()
}

/// Equal-weight average of the output distributions of every inequivalent
/// initial arrangement (one representative per dihedral class).
pub fn mixed_state_distribution(
    mp: &Multiport,
    particles: usize,
    species: Species,
    pauli_only: bool,
    group_by_class: bool,
) -> Result<DistributionTable> {
    let pauli_inputs = pauli_only || species == Species::Fermion;
    let inputs: Vec<ModeOccupation> = enumerate_classes(mp.modes(), particles, pauli_inputs)
        .into_iter()
        .map(|c| c.representative)
        .collect();
    let tables: Vec<DistributionTable> = inputs
        .iter()
        .map(|r| output_distribution(mp, r, species, group_by_class))
        .collect::<Result<_>>()?;
    let mut mixed = average_tables(&tables).ok_or(Error::NoModes)?;
    if mixed.rows.is_empty() {
        return Err(Error::NoModes);
    }
    // per-row classical enhancement against the mixed classical distribution
    let classical: Vec<DistributionTable> = inputs
        .iter()
        .map(|r| output_distribution(mp, r, Species::Distinguishable, group_by_class))
        .collect::<Result<_>>()?;
    let classical = average_tables(&classical).expect("same inputs");
    let threshold = zero_threshold(mp.modes(), particles);
    for row in &mut mixed.rows {
        let pd = classical.probability_of(&row.output).unwrap_or(0.0);
        row.enhancement = ratio(
            row.probability,
            pd,
            threshold * row.class_multiplicity as f64,
        );
        row.law_suppressed = false;
    }
    mixed.input = InitialState::Mixed {
        pauli_only: pauli_inputs,
    };
    Ok(mixed)
}

/// Row-wise arithmetic mean of tables sharing the same output order.
pub fn average_tables(tables: &[DistributionTable]) -> Option<DistributionTable> {
    let first = tables.first()?;
    let weight = 1.0 / tables.len() as f64;
    let mut out = first.clone();
    for (i, row) in out.rows.iter_mut().enumerate() {
        row.probability = tables.iter().map(|t| t.rows[i].probability).sum::<f64>() * weight;
        row.enhancement = None;
        row.law_suppressed = false;
    }
    Some(out)
}

/// `1 / N_arr` for the species.
pub fn equiprobable_estimate(n: usize, particles: usize, species: Species) -> f64 {
    1.0 / count_arrangements(n, particles, species) as f64
}

/// The flat distribution `P_E` over the species' accessible outputs, grouped
/// like [`output_distribution`] when asked.
pub fn equiprobable_distribution(
    n: usize,
    particles: usize,
    species: Species,
    group_by_class: bool,
) -> DistributionTable {
    let pauli = species == Species::Fermion;
    let each = equiprobable_estimate(n, particles, species);
    let rows = if group_by_class {
        enumerate_classes(n, particles, pauli)
            .into_iter()
            .map(|c| DistributionRow {
                output: c.representative,
                class_multiplicity: c.multiplicity,
                probability: each * c.multiplicity as f64,
                enhancement: None,
                law_suppressed: false,
            })
            .collect()
    } else {
        enumerate_occupations(n, particles, pauli)
            .map(|output| DistributionRow {
                output,
                class_multiplicity: 1,
                probability: each,
                enhancement: None,
                law_suppressed: false,
            })
            .collect()
    };
    DistributionTable {
        matrix: "none".into(),
        species,
        input: InitialState::Equiprobable,
        rows,
    }
}

/// Half the L1 distance, over the union of both supports.
pub fn total_variation_distance(a: &DistributionTable, b: &DistributionTable) -> f64 {
    let mut diff: BTreeMap<&ModeOccupation, f64> = BTreeMap::new();
    for row in &a.rows {
        *diff.entry(&row.output).or_default() += row.probability;
    }
    for row in &b.rows {
        *diff.entry(&row.output).or_default() -= row.probability;
    }
    0.5 * diff.values().map(|d| d.abs()).sum::<f64>()
}

/// How Pauli-state averages are taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PauliAverage {
    /// Every ordered pair of Pauli arrangements, equal weight.
    RawPairs,
    /// Every pair of inequivalent (dihedral class) representatives.
    ClassPairs,
}

/// Mean transition probability between Pauli states.
pub fn average_pauli_probability(
    mp: &Multiport,
    particles: usize,
    species: Species,
    scheme: PauliAverage,
) -> Result<f64> {
    let n = mp.modes();
    let states: Vec<ModeOccupation> = match scheme {
        PauliAverage::RawPairs => enumerate_occupations(n, particles, true).collect(),
        PauliAverage::ClassPairs => enumerate_classes(n, particles, true)
            .into_iter()
            .map(|c| c.representative)
            .collect(),
    };
    if states.is_empty() {
        return Ok(0.0);
    }
    let row_sums: Vec<f64> = states
        .par_iter()
        .map(|r| {
            states
                .iter()
                .map(|s| prob(mp.matrix(), r, s, species))
                .sum::<Result<f64>>()
        })
        .collect::<Result<_>>()?;
    let count = (states.len() * states.len()) as f64;
    Ok(row_sums.iter().sum::<f64>() / count)
}

/// Evaluates `species` on every pair of class representatives, row-major
/// in class order.
pub fn class_grid(
    mp: &Multiport,
    particles: usize,
    species: Species,
    pauli_only: bool,
) -> Result<Vec<TransitionRecord>> {
    let pauli = pauli_only || species == Species::Fermion;
    let reps: Vec<ModeOccupation> = enumerate_classes(mp.modes(), particles, pauli)
        .into_iter()
        .map(|c| c.representative)
        .collect();
    let rows: Vec<Vec<TransitionRecord>> = reps
        .par_iter()
        .map(|r| {
            reps.iter()
                .map(|s| transition_record(mp, r, s, species))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok(rows.into_iter().flatten().collect())
}

/// Population Pearson correlation; `None` when either side has no spread.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.is_empty() {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

/// Correlation between the bosonic and fermionic enhancement ratios over the
/// grid of inequivalent Pauli states. Pairs with an undefined ratio for
/// either species are skipped.
pub fn correlation_boson_fermion(mp: &Multiport, particles: usize) -> Result<Option<f64>> {
    let bosons = class_grid(mp, particles, Species::Boson, true)?;
    let fermions = class_grid(mp, particles, Species::Fermion, true)?;
    let (xs, ys): (Vec<f64>, Vec<f64>) = bosons
        .iter()
        .zip(&fermions)
        .filter_map(|(b, f)| Some((b.enhancement?, f.enhancement?)))
        .unzip();
    Ok(pearson(&xs, &ys))
}

/// Exact counts of many-particle paths by acquired phase on the Fourier
/// multiport.
///
/// `counts[k]` is the number of permutations `sigma` of the `N` particles whose
/// total phase `sum_j d_sigma(j)(r) * d_j(s)` is `k` modulo `n`; `even`/`odd`
/// split the same counts by the signature of `sigma`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PhaseClassHistogram {
    pub modulus: usize,
    pub particles: usize,
    pub counts: Vec<u64>,
    pub even: Vec<u64>,
    pub odd: Vec<u64>,
    /// `m * sum_j d_j(s) mod n` for the minimal period `m` of the input.
    pub q: usize,
    pub period: usize,
    pub repetitions: usize,
}

/// Which exact identity the shift by `Q` must satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SymmetryCase {
    /// `c[b + Q] = c[b]`.
    Boson,
    /// Even and odd counts each shift-invariant (odd `N`, or even `N/p`).
    ParityPreserving,
    /// Even and odd counts swap under the shift (even `N`, odd `N/p`).
    ParityInterchanging,
}

pub fn phase_class_histogram(
    n: usize,
    input: &ModeOccupation,
    output: &ModeOccupation,
) -> Result<PhaseClassHistogram> {
    for occ in [input, output] {
        if occ.modes() != n {
            return Err(Error::ModeMismatch {
                left: occ.modes(),
                right: n,
            });
        }
    }
    let particles = input.particles();
    if particles != output.particles() {
        return Err(Error::ParticleMismatch {
            input: particles,
            output: output.particles(),
        });
    }
    if particles > HISTOGRAM_MAX {
        return Err(Error::TooLarge {
            op: "phase-class histogram",
            size: particles,
            max: HISTOGRAM_MAX,
        });
    }
    let mut values: Vec<usize> = input.assignment().entries().to_vec();
    let weights: Vec<usize> = output.assignment().entries().to_vec();
    let mut counts = vec![0u64; n];
    let mut even = vec![0u64; n];
    let mut odd = vec![0u64; n];
    let mut record = |values: &[usize], parity_even: bool| {
        let theta = values
            .iter()
            .zip(&weights)
            .fold(0usize, |acc, (a, b)| (acc + a * b) % n);
        counts[theta] += 1;
        if parity_even {
            even[theta] += 1;
        } else {
            odd[theta] += 1;
        }
    };
    // Heap's algorithm: each step is a single transposition, flipping parity.
    let len = values.len();
    let mut stack = vec![0usize; len];
    let mut parity_even = true;
    record(&values, parity_even);
    let mut i = 1;
    while i < len {
        if stack[i] < i {
            if i % 2 == 0 {
                values.swap(0, i);
            } else {
                values.swap(stack[i], i);
            }
            parity_even = !parity_even;
            record(&values, parity_even);
            stack[i] += 1;
            i = 1;
        } else {
            stack[i] = 0;
            i += 1;
        }
    }
    let periodicity = detect_periodicity(input);
    let q =
        ((periodicity.period as u128 * output.assignment_sum_mod(n) as u128) % n as u128) as usize;
    Ok(PhaseClassHistogram {
        modulus: n,
        particles,
        counts,
        even,
        odd,
        q,
        period: periodicity.period,
        repetitions: periodicity.repetitions,
    })
}

impl PhaseClassHistogram {
    /// The identity the input's periodicity implies for `species`.
    pub fn expected_case(&self, species: Species) -> SymmetryCase {
        match species {
            Species::Fermion => {
                let per_period = self.particles / self.repetitions;
                if self.particles % 2 == 1 || per_period.is_multiple_of(2) {
                    SymmetryCase::ParityPreserving
                } else {
                    SymmetryCase::ParityInterchanging
                }
            }
            _ => SymmetryCase::Boson,
        }
    }

    fn amplitude(&self, weights: impl Fn(usize) -> f64) -> C64 {
        let n = self.modulus as f64;
        (0..self.modulus)
            .map(|k| C64::from_polar(weights(k), 2.0 * PI * k as f64 / n))
            .sum()
    }

    /// `|sum_k c_k w^k|^2 / (n^N prod r! s!)`.
    pub fn boson_probability(&self, input: &ModeOccupation, output: &ModeOccupation) -> f64 {
        let amp = self.amplitude(|k| self.counts[k] as f64);
        amp.norm_sqr() / self.normalisation(input, output)
    }

    /// Same with signed counts `c^E_k - c^O_k`.
    pub fn fermion_probability(&self, input: &ModeOccupation, output: &ModeOccupation) -> f64 {
        let amp = self.amplitude(|k| self.even[k] as f64 - self.odd[k] as f64);
        amp.norm_sqr() / self.normalisation(input, output)
    }

    fn normalisation(&self, input: &ModeOccupation, output: &ModeOccupation) -> f64 {
        (self.modulus as f64).powi(self.particles as i32)
            * input.factorial_product()
            * output.factorial_product()
    }
}

/// Exact integer check of the shift identity selected by `case`.
pub fn verify_phase_class_symmetry(hist: &PhaseClassHistogram, case: SymmetryCase) -> bool {
    let n = hist.modulus;
    let shift = |b: usize| (b + hist.q) % n;
    let totals_ok = hist.counts.iter().sum::<u64>() == factorial_u64(hist.particles)
        && (0..n).all(|b| hist.counts[b] == hist.even[b] + hist.odd[b]);
    totals_ok
        && (0..n).all(|b| match case {
            SymmetryCase::Boson => hist.counts[shift(b)] == hist.counts[b],
            SymmetryCase::ParityPreserving => {
                hist.even[shift(b)] == hist.even[b] && hist.odd[shift(b)] == hist.odd[b]
            }
            SymmetryCase::ParityInterchanging => {
                hist.even[shift(b)] == hist.odd[b] && hist.odd[shift(b)] == hist.even[b]
            }
        })
}

fn factorial_u64(k: usize) -> u64 {
    (1..=k as u64).product()
}
