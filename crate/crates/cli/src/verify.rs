//! Self-checks run by `multiport verify`.

use std::ops::RangeInclusive;

use multiport_core::{
    average_pauli_probability, boson_suppressed, correlation_boson_fermion, detect_periodicity,
    enumerate_classes, enumerate_occupations, equiprobable_distribution, fermion_suppressed,
    mixed_state_distribution, output_distribution, permanent, permanent_naive,
    phase_class_histogram, prob_boson, prob_distinguishable, prob_fermion,
    total_variation_distance, verify_phase_class_symmetry, ComplexMatrix, ModeOccupation,
    Multiport, PauliAverage, Species, SymmetryCase, C64,
};
use rand::{Rng, SeedableRng};

use crate::commands::Outcome;
use crate::config::{perturbed, RunConfig, Suite};
use crate::error::CliResult;
use crate::export::{Cell, Report};

type Check = Result<String, String>;

fn lift<T>(r: multiport_core::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn occ(counts: &[usize]) -> ModeOccupation {
    ModeOccupation::new(counts.to_vec()).expect("literal arrangements are valid")
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|x| x as f64).product()
}

/// The matrix under test. `phase` perturbs it so that checks must fail.
struct Context {
    phase: Option<f64>,
}

impl Context {
    fn fourier(&self, n: usize) -> Result<Multiport, String> {
        let mp = Multiport::fourier(n);
        match self.phase {
            Some(phase) => lift(perturbed(&mp, phase)),
            None => Ok(mp),
        }
    }
}

fn hong_ou_mandel(ctx: &Context) -> Check {
    let mp = ctx.fourier(2)?;
    let u = mp.matrix();
    let r = occ(&[1, 1]);
    let values = [
        (lift(prob_boson(u, &r, &occ(&[1, 1])))?, 0.0),
        (lift(prob_boson(u, &r, &occ(&[2, 0])))?, 0.5),
        (lift(prob_boson(u, &r, &occ(&[0, 2])))?, 0.5),
        (lift(prob_fermion(u, &r, &occ(&[1, 1])))?, 1.0),
    ];
    let worst = values
        .iter()
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    ensure(worst <= 1e-12, format!("max deviation {worst:.2e}"))
}

fn class_counts() -> Check {
    let bosons = enumerate_classes(6, 6, false).len();
    let pauli = enumerate_classes(12, 4, true).len();
    ensure(
        bosons == 50 && pauli == 29,
        format!("{bosons} classes (n=N=6), {pauli} Pauli classes (n=12, N=4)"),
    )
}

fn boson_law(ctx: &Context, modes: RangeInclusive<usize>, max_particles: usize) -> Check {
    let mut flagged = 0;
    for n in modes {
        let mp = ctx.fourier(n)?;
        for particles in 0..=max_particles {
            let threshold = multiport_core::zero_threshold(n, particles);
            let reps: Vec<_> = enumerate_classes(n, particles, false)
                .into_iter()
                .map(|c| c.representative)
                .collect();
            for r in &reps {
                for s in &reps {
                    if lift(boson_suppressed(r, s, n))?.suppressed_by_law {
                        flagged += 1;
                        let p = lift(prob_boson(mp.matrix(), r, s))?;
                        if p >= threshold {
                            return Err(format!("{r} -> {s} predicted zero but P_B = {p:e}"));
                        }
                    }
                }
            }
        }
    }
    Ok(format!("{flagged} predicted zeros confirmed"))
}

fn fermion_law(ctx: &Context, modes: RangeInclusive<usize>, max_particles: usize) -> Check {
    let mut flagged = 0;
    for n in modes {
        let mp = ctx.fourier(n)?;
        for particles in 0..=max_particles.min(n) {
            let threshold = multiport_core::zero_threshold(n, particles);
            let states: Vec<_> = enumerate_occupations(n, particles, true).collect();
            for r in &states {
                for s in &states {
                    if lift(fermion_suppressed(r, s, n))?.suppressed_by_law {
                        flagged += 1;
                        let p = lift(prob_fermion(mp.matrix(), r, s))?;
                        if p >= threshold {
                            return Err(format!("{r} -> {s} predicted zero but P_F = {p:e}"));
                        }
                    }
                }
            }
        }
    }
    Ok(format!("{flagged} predicted zeros confirmed"))
}

fn multinomial(ctx: &Context, max_modes: usize, max_particles: usize) -> Check {
    let mut worst: f64 = 0.0;
    for n in 1..=max_modes {
        let mp = ctx.fourier(n)?;
        for particles in 0..=max_particles {
            let states: Vec<_> = enumerate_occupations(n, particles, false).collect();
            for r in &states {
                for s in &states {
                    let expected = factorial(particles)
                        / ((n as f64).powi(particles as i32)
                            * s.counts().iter().map(|&c| factorial(c)).product::<f64>());
                    let p = lift(prob_distinguishable(mp.matrix(), r, s))?;
                    worst = worst.max((p - expected).abs());
                }
            }
        }
    }
    ensure(worst <= 1e-12, format!("max deviation {worst:.2e}"))
}

fn reciprocity(ctx: &Context, max_modes: usize, max_particles: usize) -> Check {
    let mut worst: f64 = 0.0;
    for n in 1..=max_modes {
        let mp = ctx.fourier(n)?;
        let u = mp.matrix();
        for particles in 0..=max_particles {
            let states: Vec<_> = enumerate_occupations(n, particles, false).collect();
            for (i, r) in states.iter().enumerate() {
                for s in &states[i..] {
                    worst =
                        worst.max((lift(prob_boson(u, r, s))? - lift(prob_boson(u, s, r))?).abs());
                    if r.is_pauli() && s.is_pauli() {
                        let d = lift(prob_fermion(u, r, s))? - lift(prob_fermion(u, s, r))?;
                        worst = worst.max(d.abs());
                    }
                }
            }
        }
    }
    ensure(worst <= 1e-10, format!("max asymmetry {worst:.2e}"))
}

fn normalisation(ctx: &Context, max_modes: usize, max_particles: usize, seeds: u64) -> Check {
    let mut worst: f64 = 0.0;
    for n in 1..=max_modes {
        let mut ports = vec![ctx.fourier(n)?];
        ports.extend((0..seeds).map(|seed| Multiport::random(n, seed)));
        for mp in &ports {
            for particles in 0..=max_particles {
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
    ensure(worst <= 1e-9, format!("max |sum - 1| = {worst:.2e}"))
}

fn random_matrix(rng: &mut rand_chacha::ChaCha8Rng, size: usize) -> Result<ComplexMatrix, String> {
    let data = (0..size * size)
        .map(|_| {
            let radius: f64 = rng.random::<f64>().sqrt();
            C64::from_polar(radius, rng.random::<f64>() * std::f64::consts::TAU)
        })
        .collect();
    lift(ComplexMatrix::from_vec(size, size, data))
}

fn oracles(
    ctx: &Context,
    sizes: RangeInclusive<usize>,
    samples: usize,
    max_modes: usize,
    max_particles: usize,
) -> Check {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let mut worst_perm: f64 = 0.0;
    for size in sizes {
        for _ in 0..samples {
            let m = random_matrix(&mut rng, size)?;
            worst_perm = worst_perm.max((lift(permanent(&m))? - lift(permanent_naive(&m))?).norm());
        }
    }
    let mut worst_hist: f64 = 0.0;
    for n in 1..=max_modes {
        let mp = ctx.fourier(n)?;
        for particles in 0..=max_particles {
            let states: Vec<_> = enumerate_occupations(n, particles, false).collect();
            for r in &states {
                for s in &states {
                    let h = lift(phase_class_histogram(n, r, s))?;
                    let d = h.boson_probability(r, s) - lift(prob_boson(mp.matrix(), r, s))?;
                    worst_hist = worst_hist.max(d.abs());
                }
            }
        }
    }
    ensure(
        worst_perm <= 1e-10 && worst_hist <= 1e-10,
        format!("Ryser vs expansion {worst_perm:.2e}, histogram vs permanent {worst_hist:.2e}"),
    )
}

fn bijections(max_modes: usize, max_particles: usize) -> Check {
    let mut checked = 0;
    for n in 1..=max_modes {
        for particles in 1..=max_particles {
            let states: Vec<_> = enumerate_occupations(n, particles, false).collect();
            for r in states
                .iter()
                .filter(|r| detect_periodicity(r).is_periodic())
            {
                for s in &states {
                    let h = lift(phase_class_histogram(n, r, s))?;
                    let case = h.expected_case(Species::Fermion);
                    if !verify_phase_class_symmetry(&h, SymmetryCase::Boson)
                        || !verify_phase_class_symmetry(&h, case)
                    {
                        return Err(format!("{r} -> {s}: {case:?} identity fails"));
                    }
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("{checked} periodic-input histograms"))
}

fn average(ctx: &Context, species: Species, scheme: PauliAverage) -> Result<f64, String> {
    lift(average_pauli_probability(
        &ctx.fourier(12)?,
        4,
        species,
        scheme,
    ))
}

fn distinguishable_average(ctx: &Context) -> Check {
    let p = average(ctx, Species::Distinguishable, PauliAverage::RawPairs)?;
    ensure(
        (p - 1.0 / 864.0).abs() <= 1e-12,
        format!("{p:.12e} vs 1/864"),
    )
}

fn fermion_average(ctx: &Context) -> Check {
    let p = average(ctx, Species::Fermion, PauliAverage::RawPairs)?;
    ensure(
        (p - 1.0 / 495.0).abs() <= 1e-9,
        format!("{p:.12e} vs 1/495"),
    )
}

fn boson_average(ctx: &Context) -> Check {
    let classes = average(ctx, Species::Boson, PauliAverage::ClassPairs)?;
    let raw = average(ctx, Species::Boson, PauliAverage::RawPairs)?;
    ensure(
        (classes - 7.50e-4).abs() <= 0.05e-4,
        format!("{classes:.4e} over class pairs ({raw:.4e} over raw pairs) vs 7.50e-4"),
    )
}

fn correlation(ctx: &Context) -> Check {
    let rho = lift(correlation_boson_fermion(&ctx.fourier(12)?, 4))?
        .ok_or_else(|| "correlation undefined".to_string())?;
    ensure(
        (rho + 0.05).abs() <= 0.02,
        format!("{rho:.4} vs -0.05 +/- 0.02"),
    )
}

fn mixed_state(ctx: &Context, cases: &[(usize, usize, Species, bool)]) -> Check {
    let mut parts = Vec::new();
    let mut ok = true;
    for &(n, particles, species, pauli) in cases {
        let mp = ctx.fourier(n)?;
        let mixed = lift(mixed_state_distribution(
            &mp, particles, species, pauli, false,
        ))?;
        let flat = equiprobable_distribution(n, particles, species, false);
        let bunched = lift(ModeOccupation::bunched(n, particles))?;
        let classical = lift(output_distribution(
            &mp,
            &bunched,
            Species::Distinguishable,
            false,
        ))?;
        let a = total_variation_distance(&mixed, &flat);
        let b = total_variation_distance(&classical, &flat);
        ok &= a < b;
        parts.push(format!("n={n} N={particles} {species}: {a:.4} < {b:.4}"));
    }
    ensure(ok, parts.join("; "))
}

type Named<'a> = (&'static str, Box<dyn Fn() -> Check + 'a>);

fn checks(suite: Suite, ctx: &Context) -> Vec<Named<'_>> {
    let reference: Vec<Named<'_>> = vec![
        ("class_counts", Box::new(class_counts)),
        (
            "distinguishable_average",
            Box::new(|| distinguishable_average(ctx)),
        ),
        ("fermion_average", Box::new(|| fermion_average(ctx))),
        ("boson_average", Box::new(|| boson_average(ctx))),
        ("boson_fermion_correlation", Box::new(|| correlation(ctx))),
    ];
    match suite {
        Suite::Reference => reference,
        Suite::Quick => vec![
            ("hong_ou_mandel", Box::new(|| hong_ou_mandel(ctx))),
            ("class_counts", Box::new(class_counts)),
            ("boson_law_soundness", Box::new(|| boson_law(ctx, 1..=6, 5))),
            (
                "fermion_law_soundness",
                Box::new(|| fermion_law(ctx, 1..=8, 4)),
            ),
            ("multinomial", Box::new(|| multinomial(ctx, 5, 4))),
            ("input_output_symmetry", Box::new(|| reciprocity(ctx, 5, 4))),
            ("normalisation", Box::new(|| normalisation(ctx, 5, 4, 2))),
            (
                "oracle_equivalence",
                Box::new(|| oracles(ctx, 2..=6, 20, 4, 4)),
            ),
            ("phase_class_bijections", Box::new(|| bijections(6, 4))),
            (
                "mixed_state",
                Box::new(|| mixed_state(ctx, &[(6, 6, Species::Boson, false)])),
            ),
        ],
        Suite::Full => {
            let mut all: Vec<Named<'_>> = vec![
                ("hong_ou_mandel", Box::new(|| hong_ou_mandel(ctx))),
                ("boson_law_soundness", Box::new(|| boson_law(ctx, 1..=8, 6))),
                (
                    "fermion_law_soundness",
                    Box::new(|| fermion_law(ctx, 1..=10, 5)),
                ),
                ("multinomial", Box::new(|| multinomial(ctx, 6, 6))),
                ("input_output_symmetry", Box::new(|| reciprocity(ctx, 6, 5))),
                ("normalisation", Box::new(|| normalisation(ctx, 6, 5, 5))),
                (
                    "oracle_equivalence",
                    Box::new(|| oracles(ctx, 2..=7, 100, 6, 6)),
                ),
                ("phase_class_bijections", Box::new(|| bijections(8, 6))),
                (
                    "mixed_state",
                    Box::new(|| {
                        mixed_state(
                            ctx,
                            &[
                                (6, 6, Species::Boson, false),
                                (12, 4, Species::Boson, true),
                                (12, 4, Species::Fermion, true),
                            ],
                        )
                    }),
                ),
            ];
            all.extend(reference);
            all
        }
    }
}

pub fn verify(config: &RunConfig) -> CliResult<Outcome> {
    let suite = config.suite.unwrap_or_default();
    let ctx = Context {
        phase: config.perturb,
    };
    let mut report = Report::new("checks", vec!["name", "passed", "detail"]);
    let mut failed = Vec::new();
    let mut rows = Vec::new();
    for (name, check) in checks(suite, &ctx) {
        let (passed, detail) = match check() {
            Ok(detail) => (true, detail),
            Err(detail) => (false, detail),
        };
        eprintln!("{} {name}: {detail}", if passed { "PASS" } else { "FAIL" });
        if !passed {
            failed.push(name);
        }
        rows.push(vec![Cell::from(name), passed.into(), detail.into()]);
    }
    report
        .meta("command", "verify")
        .meta("suite", suite.name())
        .meta("perturbed", config.perturb.is_some())
        .meta("passed", failed.is_empty());
    for row in rows {
        report.push(row);
    }
    let failure = (!failed.is_empty()).then(|| failed.join(", "));
    Ok(Outcome { report, failure })
}
