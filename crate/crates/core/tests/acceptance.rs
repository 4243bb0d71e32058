//! Acceptance gate. Runs every criterion, prints one line each, and exits
//! non-zero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use multiport_core::*;

type Check = std::result::Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn lift<T>(r: multiport_core::Result<T>) -> std::result::Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn fact(k: usize) -> f64 {
    (1..=k).map(|x| x as f64).product()
}

/// 1. Boson law soundness, n <= 8, every input and output class.
fn boson_law_soundness() -> Check {
    let mut flagged = 0usize;
    for n in 1..=8 {
        let u = fourier_matrix(n);
        for particles in 0..=6 {
            let threshold = zero_threshold(n, particles);
            let classes: Vec<_> = enumerate_classes(n, particles, false)
                .into_iter()
                .map(|c| c.representative)
                .collect();
            for r in &classes {
                for s in &classes {
                    if lift(boson_suppressed(r, s, n))?.suppressed_by_law {
                        flagged += 1;
                        let p = lift(prob_boson(&u, r, s))?;
                        if p >= threshold {
                            return Err(format!("n={n} {r} -> {s}: P_B = {p:e}"));
                        }
                    }
                }
            }
        }
    }
    ensure(
        flagged > 0,
        format!("{flagged} law-flagged class pairs, all vanish"),
    )
}

/// 2. Fermion law soundness, all Pauli pairs n <= 10, N <= 5.
fn fermion_law_soundness() -> Check {
    let mut flagged = 0usize;
    let mut half_rule = 0usize;
    for n in 1..=10 {
        let u = fourier_matrix(n);
        for particles in 0..=n.min(5) {
            let threshold = zero_threshold(n, particles);
            let states: Vec<_> = enumerate_occupations(n, particles, true).collect();
            for r in &states {
                for s in &states {
                    let v = lift(fermion_suppressed(r, s, n))?;
                    if v.suppressed_by_law {
                        flagged += 1;
                        if v.fermion_case == FermionCase::EvenOddRatio {
                            half_rule += 1;
                        }
                        let p = lift(prob_fermion(&u, r, s))?;
                        if p >= threshold {
                            return Err(format!("n={n} {r} -> {s}: P_F = {p:e}"));
                        }
                    }
                }
            }
        }
    }
    ensure(
        flagged > 0 && half_rule > 0,
        format!("{flagged} flagged Pauli pairs ({half_rule} via the n/2 rule), all vanish"),
    )
}

/// 3. P_D on the Fourier matrix is multinomial.
fn multinomial_identity() -> Check {
    let mut worst: f64 = 0.0;
    for n in 1..=6 {
        let u = fourier_matrix(n);
        for particles in 0..=6 {
            let states: Vec<_> = enumerate_occupations(n, particles, false).collect();
            for r in &states {
                for s in &states {
                    let want = fact(particles)
                        / ((n as f64).powi(particles as i32)
                            * s.counts().iter().map(|&c| fact(c)).product::<f64>());
                    worst = worst.max((lift(prob_distinguishable(&u, r, s))? - want).abs());
                }
            }
        }
    }
    ensure(
        worst <= 1e-12,
        format!("max deviation {worst:.2e} (tol 1e-12)"),
    )
}

/// 4. P(r -> s) = P(s -> r) for bosons and fermions.
fn input_output_symmetry() -> Check {
    let mut worst: f64 = 0.0;
    for n in 1..=6 {
        let u = fourier_matrix(n);
        for particles in 0..=5 {
            let all: Vec<_> = enumerate_occupations(n, particles, false).collect();
            for (i, r) in all.iter().enumerate() {
                for s in &all[i..] {
                    let b = lift(prob_boson(&u, r, s))? - lift(prob_boson(&u, s, r))?;
                    worst = worst.max(b.abs());
                    if r.is_pauli() && s.is_pauli() {
                        let f = lift(prob_fermion(&u, r, s))? - lift(prob_fermion(&u, s, r))?;
                        worst = worst.max(f.abs());
                    }
                }
            }
        }
    }
    ensure(
        worst <= 1e-10,
        format!("max asymmetry {worst:.2e} (tol 1e-10)"),
    )
}

/// 5. Output distributions sum to one.
fn normalisation() -> Check {
    let mut worst: f64 = 0.0;
    for n in 1..=6 {
        let mut ports = vec![Multiport::fourier(n)];
        ports.extend((0..5).map(|seed| Multiport::random(n, 1000 + seed)));
        for mp in &ports {
            for particles in 0..=5 {
                for species in Species::ALL {
                    let pauli = species == Species::Fermion;
                    for r in enumerate_occupations(n, particles, pauli) {
                        let table = lift(output_distribution(mp, &r, species, false))?;
                        worst = worst.max((table.total() - 1.0).abs());
                    }
                }
            }
        }
    }
    ensure(
        worst <= 1e-9,
        format!("max |sum - 1| = {worst:.2e} (tol 1e-9)"),
    )
}

/// 6. Pauli-state averages and the boson/fermion correlation for n = 12, N = 4.
fn pauli_averages() -> Check {
    let mp = Multiport::fourier(12);
    let pd = lift(average_pauli_probability(
        &mp,
        4,
        Species::Distinguishable,
        PauliAverage::RawPairs,
    ))?;
    let pf = lift(average_pauli_probability(
        &mp,
        4,
        Species::Fermion,
        PauliAverage::RawPairs,
    ))?;
    let pb_classes = lift(average_pauli_probability(
        &mp,
        4,
        Species::Boson,
        PauliAverage::ClassPairs,
    ))?;
    let pb_raw = lift(average_pauli_probability(
        &mp,
        4,
        Species::Boson,
        PauliAverage::RawPairs,
    ))?;
    let rho = lift(correlation_boson_fermion(&mp, 4))?.ok_or("correlation undefined")?;
    let detail = format!(
        "P_D = {pd:.6e} (1/864), P_F = {pf:.6e} (1/495), P_B = {pb_classes:.4e} over class pairs \
         [{pb_raw:.4e} over raw pairs], rho = {rho:.4}"
    );
    ensure(
        (pd - 1.0 / 864.0).abs() <= 1e-12
            && (pf - 1.0 / 495.0).abs() <= 1e-9
            && (pb_classes - 7.50e-4).abs() <= 0.05e-4
            && (rho + 0.05).abs() <= 0.02,
        detail,
    )
}

/// 7. Dihedral class counts.
fn class_counts() -> Check {
    let bosons = enumerate_classes(6, 6, false).len();
    let pauli = enumerate_classes(12, 4, true).len();
    ensure(
        bosons == 50 && pauli == 29,
        format!("{bosons} classes for n=N=6, {pauli} Pauli classes for n=12, N=4"),
    )
}

/// 8. The worked example pair on six modes.
fn caption_triple() -> Check {
    let n = 6;
    let u = fourier_matrix(n);
    let periodic = ModeOccupation::new(vec![0, 1, 2, 0, 1, 2]).map_err(|e| e.to_string())?;
    let blocks = ModeOccupation::new(vec![0, 0, 3, 0, 0, 3]).map_err(|e| e.to_string())?;
    let target = ModeOccupation::new(vec![0, 2, 0, 2, 0, 2]).map_err(|e| e.to_string())?;
    let threshold = zero_threshold(n, 6);

    let v = lift(boson_suppressed(&periodic, &target, n))?;
    let first = v.suppressed_by_law
        && v.direction == Direction::Reverse
        && v.q_value == 2
        && lift(prob_boson(&u, &periodic, &target))? < threshold;

    let w = lift(boson_suppressed(&blocks, &target, n))?;
    let p_blocks = lift(prob_boson(&u, &blocks, &target))?;
    let second = !w.suppressed_by_law && p_blocks > threshold;

    let mut same = true;
    for s in enumerate_occupations(n, 6, false) {
        let a = lift(boson_suppressed(&periodic, &s, n))?.direction == Direction::Forward;
        let b = lift(boson_suppressed(&blocks, &s, n))?.direction == Direction::Forward;
        same &= a == b;
    }
    ensure(
        first && second && same,
        format!(
            "reverse Q={} fired: {first}; (0,0,3,0,0,3) P_B = {p_blocks:.4e}: {second}; \
             forward sets equal: {same}",
            v.q_value
        ),
    )
}

/// 9. Two-photon interference on a balanced beam splitter.
fn hong_ou_mandel() -> Check {
    let u = fourier_matrix(2);
    let occ = |v: &[usize]| ModeOccupation::new(v.to_vec()).unwrap();
    let r = occ(&[1, 1]);
    let values = [
        (lift(prob_boson(&u, &r, &occ(&[1, 1])))?, 0.0),
        (lift(prob_boson(&u, &r, &occ(&[2, 0])))?, 0.5),
        (lift(prob_boson(&u, &r, &occ(&[0, 2])))?, 0.5),
        (lift(prob_fermion(&u, &r, &occ(&[1, 1])))?, 1.0),
    ];
    let worst = values
        .iter()
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    ensure(
        worst <= 1e-12,
        format!("max deviation {worst:.2e} (tol 1e-12)"),
    )
}

/// 10. Ryser vs brute force, and histogram reconstruction vs permanent.
fn oracle_equivalence() -> Check {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
    let mut worst_perm: f64 = 0.0;
    for size in 2..=7 {
        for _ in 0..100 {
            let data: Vec<C64> = (0..size * size)
                .map(|_| {
                    let radius: f64 = rng.random::<f64>().sqrt();
                    C64::from_polar(radius, rng.random::<f64>() * std::f64::consts::TAU)
                })
                .collect();
            let m = lift(ComplexMatrix::from_vec(size, size, data))?;
            let d = lift(permanent(&m))? - lift(permanent_naive(&m))?;
            worst_perm = worst_perm.max(d.norm());
        }
    }
    let mut worst_hist: f64 = 0.0;
    let mut pairs = 0usize;
    for n in 1..=6 {
        let u = fourier_matrix(n);
        for particles in 0..=6 {
            let states: Vec<_> = enumerate_occupations(n, particles, false).collect();
            for r in &states {
                for s in &states {
                    let h = lift(phase_class_histogram(n, r, s))?;
                    let d = h.boson_probability(r, s) - lift(prob_boson(&u, r, s))?;
                    worst_hist = worst_hist.max(d.abs());
                    if r.is_pauli() {
                        let d = h.fermion_probability(r, s) - lift(prob_fermion(&u, r, s))?;
                        worst_hist = worst_hist.max(d.abs());
                    }
                    pairs += 1;
                }
            }
        }
    }
    ensure(
        worst_perm <= 1e-10 && worst_hist <= 1e-10,
        format!("Ryser vs naive {worst_perm:.2e}; histogram vs permanent {worst_hist:.2e} over {pairs} transitions"),
    )
}

/// 11. Exact shift identities of the phase-class counts for periodic inputs.
fn bijection_identities() -> Check {
    let mut checked = 0usize;
    let mut interchanging = 0usize;
    for n in 1..=8 {
        for particles in 1..=6 {
            let states: Vec<_> = enumerate_occupations(n, particles, false).collect();
            for r in states
                .iter()
                .filter(|r| detect_periodicity(r).is_periodic())
            {
                for s in &states {
                    let h = lift(phase_class_histogram(n, r, s))?;
                    let case = h.expected_case(Species::Fermion);
                    if case == SymmetryCase::ParityInterchanging {
                        interchanging += 1;
                    }
                    if !verify_phase_class_symmetry(&h, SymmetryCase::Boson)
                        || !verify_phase_class_symmetry(&h, case)
                    {
                        return Err(format!("n={n} {r} -> {s}: {case:?} identity broken"));
                    }
                    checked += 1;
                }
            }
        }
    }
    ensure(
        checked > 0 && interchanging > 0,
        format!(
            "{checked} periodic-input transitions ({interchanging} parity-interchanging), exact"
        ),
    )
}

/// 12. The mixed state sits closer to P_E than distinguishable particles do.
fn mixed_state_convergence() -> Check {
    let mut lines = Vec::new();
    let mut ok = true;
    for (n, particles, species, pauli) in [
        (6, 6, Species::Boson, false),
        (12, 4, Species::Boson, true),
        (12, 4, Species::Fermion, true),
    ] {
        let mp = Multiport::fourier(n);
        let mixed = lift(mixed_state_distribution(
            &mp, particles, species, pauli, false,
        ))?;
        let estimate = equiprobable_distribution(n, particles, species, false);
        let reference = ModeOccupation::bunched(n, particles).map_err(|e| e.to_string())?;
        let classical = lift(output_distribution(
            &mp,
            &reference,
            Species::Distinguishable,
            false,
        ))?;
        let tvd_mixed = total_variation_distance(&mixed, &estimate);
        let tvd_classical = total_variation_distance(&classical, &estimate);
        ok &= tvd_mixed < tvd_classical;
        lines.push(format!(
            "n={n} N={particles} {species}: {tvd_mixed:.4} < {tvd_classical:.4}"
        ));
    }
    ensure(ok, lines.join("; "))
}

/// 13. Runtime bounds.
fn performance() -> Check {
    let m = random_unitary(20, 20);
    let start = Instant::now();
    let value = lift(permanent(&m))?;
    let perm_time = start.elapsed();

    let n = 200_000;
    let r = ModeOccupation::new((0..n).map(|j| usize::from(j % 2 == 1)).collect())
        .map_err(|e| e.to_string())?;
    let s = ModeOccupation::new((0..n).map(|j| usize::from(j < n / 2)).collect())
        .map_err(|e| e.to_string())?;
    let start = Instant::now();
    let verdict = lift(boson_suppressed(&r, &s, n))?;
    let law_time = start.elapsed();
    ensure(
        value.norm().is_finite()
            && perm_time < Duration::from_secs(5)
            && law_time < Duration::from_millis(10),
        format!(
            "20x20 permanent {perm_time:.2?} (< 5 s); law on n={n} modes, N={} particles in {law_time:.2?} (< 10 ms), suppressed={}",
            r.particles(),
            verdict.suppressed_by_law
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 13] = [
        ("1  boson law soundness", boson_law_soundness),
        ("2  fermion law soundness", fermion_law_soundness),
        ("3  multinomial identity", multinomial_identity),
        ("4  input-output symmetry", input_output_symmetry),
        ("5  normalisation", normalisation),
        (
            "6  Pauli averages and correlation (n=12, N=4)",
            pauli_averages,
        ),
        ("7  class counts", class_counts),
        ("8  six-mode example pair", caption_triple),
        ("9  Hong-Ou-Mandel", hong_ou_mandel),
        ("10 oracle equivalence", oracle_equivalence),
        ("11 phase-class bijection identities", bijection_identities),
        ("12 mixed-state convergence", mixed_state_convergence),
        ("13 performance", performance),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail} [{elapsed:.1?}]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail} [{elapsed:.1?}]");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
