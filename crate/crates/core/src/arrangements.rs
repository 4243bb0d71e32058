//! Particle arrangements: mode occupation lists, mode assignment lists,
//! periodicity and dihedral equivalence classes.
//!
//! All public I/O uses 1-based mode labels. Internally an occupation is a
//! plain `Vec<usize>` indexed from 0.

use std::cmp::Reverse;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of particles in each of `n` modes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct ModeOccupation {
    counts: Vec<usize>,
}

impl ModeOccupation {
    pub fn new(counts: Vec<usize>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::NoModes);
        }
        Ok(Self { counts })
    }

    /// The empty arrangement on `n` modes.
    pub fn vacuum(n: usize) -> Result<Self> {
        Self::new(vec![0; n])
    }

    /// All `particles` stacked in the first mode.
    pub fn bunched(n: usize, particles: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::NoModes);
        }
        let mut counts = vec![0; n];
        counts[0] = particles;
        Ok(Self { counts })
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn modes(&self) -> usize {
        self.counts.len()
    }

    pub fn particles(&self) -> usize {
        self.counts.iter().sum()
    }

    /// At most one particle per mode.
    pub fn is_pauli(&self) -> bool {
        self.counts.iter().all(|&c| c <= 1)
    }

    pub fn assignment(&self) -> ModeAssignment {
        occupation_to_assignment(self)
    }

    /// Sum of the 1-based mode assignment list, computed without materialising it.
    pub fn assignment_sum(&self) -> u128 {
        self.counts
            .iter()
            .enumerate()
            .map(|(j, &c)| (j as u128 + 1) * c as u128)
            .sum()
    }

    /// Same, reduced modulo `modulus`. Never overflows.
    pub fn assignment_sum_mod(&self, modulus: usize) -> usize {
        let m = modulus as u128;
        self.counts.iter().enumerate().fold(0u128, |acc, (j, &c)| {
            (acc + ((j as u128 + 1) % m) * (c as u128 % m)) % m
        }) as usize
    }

    /// Product of the factorials of the counts.
    pub fn factorial_product(&self) -> f64 {
        self.counts.iter().map(|&c| factorial(c)).product()
    }

    /// Cyclic shift moving the particles of mode `j` to mode `j + shift` (mod n).
    pub fn rotated(&self, shift: usize) -> Self {
        let n = self.modes();
        let mut counts = vec![0; n];
        for (j, &c) in self.counts.iter().enumerate() {
            counts[(j + shift) % n] = c;
        }
        Self { counts }
    }

    /// Mode order reversed.
    pub fn reversed(&self) -> Self {
        let mut counts = self.counts.clone();
        counts.reverse();
        Self { counts }
    }
}

impl TryFrom<Vec<usize>> for ModeOccupation {
    type Error = Error;

    fn try_from(counts: Vec<usize>) -> Result<Self> {
        Self::new(counts)
    }
}

impl From<ModeOccupation> for Vec<usize> {
    fn from(occ: ModeOccupation) -> Self {
        occ.counts
    }
}

impl fmt::Display for ModeOccupation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_list(f, &self.counts)
    }
}

impl FromStr for ModeOccupation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::new(parse_list(s)?)
    }
}

/// Per-particle 1-based mode labels in non-decreasing order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ModeAssignment {
    entries: Vec<usize>,
}

impl ModeAssignment {
    /// Sorts `entries` into canonical order.
    pub fn new(mut entries: Vec<usize>) -> Self {
        entries.sort_unstable();
        Self { entries }
    }

    pub fn entries(&self) -> &[usize] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn sum(&self) -> u128 {
        self.entries.iter().map(|&d| d as u128).sum()
    }
}

impl fmt::Display for ModeAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_list(f, &self.entries)
    }
}

/// Repeats mode `j` exactly `occ[j]` times.
pub fn occupation_to_assignment(occ: &ModeOccupation) -> ModeAssignment {
    let entries = occ
        .counts
        .iter()
        .enumerate()
        .flat_map(|(j, &c)| std::iter::repeat_n(j + 1, c))
        .collect();
    ModeAssignment { entries }
}

pub fn assignment_to_occupation(entries: &[usize], n: usize) -> Result<ModeOccupation> {
    if n == 0 {
        return Err(Error::NoModes);
    }
    let mut counts = vec![0; n];
    for &mode in entries {
        if mode == 0 || mode > n {
            return Err(Error::InvalidMode { mode, modes: n });
        }
        counts[mode - 1] += 1;
    }
    Ok(ModeOccupation { counts })
}

/// Parses either an occupation list (`"0,1,2"`) or, with a `d:` prefix, a
/// 1-based assignment list (`"d:2,3,3"`), which needs the mode count.
pub fn parse_arrangement(s: &str, modes: Option<usize>) -> Result<ModeOccupation> {
    let s = s.trim();
    if let Some(rest) = s.strip_prefix("d:") {
        let n = modes.ok_or_else(|| Error::Parse(s.to_string()))?;
        let entries = if rest.trim().is_empty() {
            Vec::new()
        } else {
            parse_list(rest)?
        };
        return assignment_to_occupation(&entries, n);
    }
    let occ: ModeOccupation = s.parse()?;
    if let Some(n) = modes {
        if occ.modes() != n {
            return Err(Error::ModeMismatch {
                left: occ.modes(),
                right: n,
            });
        }
    }
    Ok(occ)
}

fn parse_list(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<usize>()
                .map_err(|_| Error::Parse(s.to_string()))
        })
        .collect()
}

fn write_list(f: &mut fmt::Formatter<'_>, items: &[usize]) -> fmt::Result {
    for (i, x) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write!(f, "{x}")?;
    }
    Ok(())
}

pub(crate) fn factorial(k: usize) -> f64 {
    (1..=k).map(|x| x as f64).product()
}

/// Binomial coefficient, exact while it fits in `u128`.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 1..=k as u128 {
        acc = acc * (n as u128 - k as u128 + i) / i;
    }
    acc
}

/// Particle statistics relevant for counting arrangements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Species {
    Distinguishable,
    Boson,
    Fermion,
}

impl Species {
    pub const ALL: [Species; 3] = [Species::Distinguishable, Species::Boson, Species::Fermion];

    pub fn name(self) -> &'static str {
        match self {
            Species::Distinguishable => "distinguishable",
            Species::Boson => "boson",
            Species::Fermion => "fermion",
        }
    }
}

impl fmt::Display for Species {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Species {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "d" | "distinguishable" => Ok(Species::Distinguishable),
            "b" | "boson" | "bosons" => Ok(Species::Boson),
            "f" | "fermion" | "fermions" => Ok(Species::Fermion),
            _ => Err(Error::Parse(s.to_string())),
        }
    }
}

/// Number of distinct arrangements of `particles` in `n` modes.
pub fn count_arrangements(n: usize, particles: usize, species: Species) -> u128 {
    match species {
        Species::Distinguishable | Species::Boson => {
            binomial((particles + n - 1) as u64, (n - 1) as u64)
        }
        Species::Fermion => binomial(n as u64, particles as u64),
    }
}

/// Iterator over occupations in descending lexicographic order of the counts.
#[derive(Debug, Clone)]
pub struct Occupations {
    state: Option<Vec<usize>>,
    pauli: bool,
}

/// Every arrangement of `particles` in `n` modes, each exactly once.
///
/// With `pauli_only`, only states with at most one particle per mode; empty
/// when `particles > n`.
pub fn enumerate_occupations(n: usize, particles: usize, pauli_only: bool) -> Occupations {
    let state = if n == 0 || (pauli_only && particles > n) {
        None
    } else if pauli_only {
        let mut counts = vec![0; n];
        counts[..particles].fill(1);
        Some(counts)
    } else {
        let mut counts = vec![0; n];
        counts[0] = particles;
        Some(counts)
    };
    Occupations {
        state,
        pauli: pauli_only,
    }
}

impl Occupations {
    fn advance(counts: &mut [usize], pauli: bool) -> bool {
        let n = counts.len();
        if n < 2 {
            return false;
        }
        if pauli {
            // rightmost 1 that has a 0 to its right, move it one step right,
            // then pack every 1 after it immediately behind it
            let Some(i) = (0..n - 1)
                .rev()
                .find(|&i| counts[i] == 1 && counts[i + 1] == 0)
            else {
                return false;
            };
            let tail: usize = counts[i + 1..].iter().sum();
            counts[i] = 0;
            counts[i + 1..].fill(0);
            counts[i + 1..i + 2 + tail].fill(1);
            true
        } else {
            let Some(i) = (0..n - 1).rev().find(|&i| counts[i] > 0) else {
                return false;
            };
            let tail: usize = counts[i + 1..].iter().sum();
            counts[i] -= 1;
            counts[i + 1..].fill(0);
            counts[i + 1] = tail + 1;
            true
        }
    }
}

impl Iterator for Occupations {
    type Item = ModeOccupation;

    fn next(&mut self) -> Option<ModeOccupation> {
        let current = self.state.take()?;
        let mut next = current.clone();
        if Self::advance(&mut next, self.pauli) {
            self.state = Some(next);
        }
        Some(ModeOccupation { counts: current })
    }
}

/// Minimal cyclic period of an occupation list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Periodicity {
    /// Smallest period length `m`, a divisor of `n`.
    pub period: usize,
    /// Number of repetitions `p = n / m`.
    pub repetitions: usize,
    pub pattern: Vec<usize>,
}

impl Periodicity {
    pub fn is_periodic(&self) -> bool {
        self.repetitions > 1
    }

    /// Particles inside one repetition of the pattern, `N / p`.
    pub fn particles_per_period(&self) -> usize {
        self.pattern.iter().sum()
    }
}

pub fn detect_periodicity(occ: &ModeOccupation) -> Periodicity {
    let q = occ.counts();
    let n = q.len();
    let period = (1..=n)
        .filter(|m| n.is_multiple_of(*m))
        .find(|&m| (m..n).all(|j| q[j] == q[j - m]))
        .unwrap_or(n);
    Periodicity {
        period,
        repetitions: n / period,
        pattern: q[..period].to_vec(),
    }
}

/// Orbit of an occupation under cyclic shifts and mode-order reversal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ArrangementClass {
    /// Lexicographically smallest member of the orbit.
    pub representative: ModeOccupation,
    /// Number of distinct occupations in the orbit.
    pub multiplicity: usize,
}

/// All `2n` dihedral images, possibly with repeats.
pub fn dihedral_images(occ: &ModeOccupation) -> Vec<ModeOccupation> {
    let n = occ.modes();
    let rev = occ.reversed();
    (0..n)
        .flat_map(|k| [occ.rotated(k), rev.rotated(k)])
        .collect()
}

pub fn canonical_class(occ: &ModeOccupation) -> ArrangementClass {
    let mut images = dihedral_images(occ);
    images.sort_unstable();
    images.dedup();
    let multiplicity = images.len();
    ArrangementClass {
        representative: images.swap_remove(0),
        multiplicity,
    }
}

/// Sort key for class representatives: most bunched profile first, then
/// lexicographic order of the representative.
pub fn occupancy_order_key(occ: &ModeOccupation) -> (Reverse<Vec<usize>>, ModeOccupation) {
    let mut profile = occ.counts.clone();
    profile.sort_unstable_by(|a, b| b.cmp(a));
    (Reverse(profile), occ.clone())
}

/// One class per dihedral orbit, in occupancy order.
pub fn enumerate_classes(n: usize, particles: usize, pauli_only: bool) -> Vec<ArrangementClass> {
    let mut orbits: BTreeMap<ModeOccupation, usize> = BTreeMap::new();
    for occ in enumerate_occupations(n, particles, pauli_only) {
        *orbits
            .entry(canonical_class(&occ).representative)
            .or_default() += 1;
    }
    let mut classes: Vec<ArrangementClass> = orbits
        .into_iter()
        .map(|(representative, multiplicity)| ArrangementClass {
            representative,
            multiplicity,
        })
        .collect();
    classes.sort_by_cached_key(|c| occupancy_order_key(&c.representative));
    classes
}

#[cfg(test)]
mod tests {
    use super::*;

    fn occ(v: &[usize]) -> ModeOccupation {
        ModeOccupation::new(v.to_vec()).unwrap()
    }

    #[test]
    fn assignment_examples() {
        assert_eq!(occ(&[2, 0, 0, 1]).assignment().entries(), &[1, 1, 4]);
        assert_eq!(occ(&[1, 1, 1, 0]).assignment().entries(), &[1, 2, 3]);
        assert!(occ(&[0, 0, 0]).assignment().is_empty());
    }

    #[test]
    fn assignment_back_to_occupation() {
        assert_eq!(
            assignment_to_occupation(&[1, 1, 4], 4).unwrap(),
            occ(&[2, 0, 0, 1])
        );
        assert_eq!(assignment_to_occupation(&[], 5).unwrap(), occ(&[0; 5]));
        assert_eq!(
            assignment_to_occupation(&[2, 2, 2], 2).unwrap(),
            occ(&[0, 3])
        );
        assert_eq!(
            assignment_to_occupation(&[1, 5], 4),
            Err(Error::InvalidMode { mode: 5, modes: 4 })
        );
        assert!(assignment_to_occupation(&[0], 4).is_err());
    }

    #[test]
    fn enumeration_order_and_counts() {
        let all: Vec<_> = enumerate_occupations(2, 2, false).collect();
        assert_eq!(all, vec![occ(&[2, 0]), occ(&[1, 1]), occ(&[0, 2])]);
        assert_eq!(enumerate_occupations(6, 6, false).count(), 462);
        assert_eq!(enumerate_occupations(12, 4, true).count(), 495);
        assert_eq!(enumerate_occupations(3, 4, true).count(), 0);
        let zero: Vec<_> = enumerate_occupations(3, 0, false).collect();
        assert_eq!(zero, vec![occ(&[0, 0, 0])]);
    }

    #[test]
    fn enumeration_is_strictly_descending() {
        for pauli in [false, true] {
            let all: Vec<_> = enumerate_occupations(5, 3, pauli).collect();
            assert!(all.windows(2).all(|w| w[0] > w[1]));
            assert!(all.iter().all(|o| o.particles() == 3));
        }
    }

    #[test]
    fn arrangement_counts() {
        assert_eq!(count_arrangements(6, 6, Species::Boson), 462);
        assert_eq!(count_arrangements(12, 4, Species::Fermion), 495);
        assert_eq!(count_arrangements(12, 4, Species::Boson), 1365);
        assert_eq!(count_arrangements(3, 5, Species::Fermion), 0);
    }

    #[test]
    fn periodicity_examples() {
        let p = detect_periodicity(&occ(&[2, 1, 0, 5, 0, 2]));
        assert_eq!((p.period, p.repetitions), (6, 1));
        let p = detect_periodicity(&occ(&[4, 4, 4, 4, 4]));
        assert_eq!((p.period, p.repetitions), (1, 5));
        let p = detect_periodicity(&occ(&[0, 1, 2, 0, 1, 2]));
        assert_eq!((p.period, p.repetitions, p.pattern), (3, 2, vec![0, 1, 2]));
    }

    #[test]
    fn class_examples() {
        let c = canonical_class(&occ(&[0, 2]));
        assert_eq!((c.representative, c.multiplicity), (occ(&[0, 2]), 2));
        let c = canonical_class(&occ(&[2, 0]));
        assert_eq!(c.representative, occ(&[0, 2]));
        let c = canonical_class(&occ(&[1, 1]));
        assert_eq!((c.representative, c.multiplicity), (occ(&[1, 1]), 1));
        let c = canonical_class(&occ(&[0, 0, 3, 0, 0, 3]));
        assert_eq!(
            (c.representative, c.multiplicity),
            (occ(&[0, 0, 3, 0, 0, 3]), 3)
        );
    }

    #[test]
    fn class_counts() {
        assert_eq!(enumerate_classes(6, 6, false).len(), 50);
        assert_eq!(enumerate_classes(12, 4, true).len(), 29);
        let two = enumerate_classes(2, 2, false);
        assert_eq!(two.len(), 2);
        assert_eq!(two[0].representative, occ(&[0, 2]));
        assert_eq!(two[0].multiplicity, 2);
        assert_eq!(two[1].representative, occ(&[1, 1]));
    }

    #[test]
    fn class_order_puts_bunched_first() {
        let classes = enumerate_classes(6, 6, false);
        assert_eq!(classes[0].representative, occ(&[0, 0, 0, 0, 0, 6]));
        assert_eq!(classes.last().unwrap().representative, occ(&[1; 6]));
        // the equally spaced Pauli state closes the n = 12, N = 4 grid
        let pauli = enumerate_classes(12, 4, true);
        assert_eq!(
            pauli.last().unwrap().representative.assignment().entries(),
            &[3, 6, 9, 12]
        );
    }

    #[test]
    fn parse_both_forms() {
        assert_eq!(
            parse_arrangement("0,1,2,0,1,2", None).unwrap(),
            occ(&[0, 1, 2, 0, 1, 2])
        );
        assert_eq!(
            parse_arrangement("d:2,3,3,5,6,6", Some(6)).unwrap(),
            occ(&[0, 1, 2, 0, 1, 2])
        );
        assert!(parse_arrangement("d:1,2", None).is_err());
        assert!(parse_arrangement("1,x", None).is_err());
        assert!(parse_arrangement("1,1", Some(3)).is_err());
        assert_eq!(occ(&[2, 0, 0, 1]).to_string(), "2,0,0,1");
    }

    #[test]
    fn assignment_sum_matches_list() {
        let o = occ(&[0, 1, 2, 0, 1, 2]);
        assert_eq!(o.assignment_sum(), 25);
        assert_eq!(o.assignment().sum(), 25);
        assert_eq!(o.assignment_sum_mod(6), 1);
    }
}
