use multiport_core::{
    classify_transitions_with, detect_periodicity, enumerate_classes, enumerate_occupations,
    equiprobable_distribution, law_verdict, mixed_state_distribution, output_distribution, prob,
    zero_threshold, DistributionTable, Error, FermionCase, ModeOccupation, Species,
};
use rayon::prelude::*;

use crate::config::{InputSpec, MatrixSource, RunConfig};
use crate::error::{usage, CliResult};
use crate::export::{enhancement, probability, Cell, Report};

/// A rendered report plus the reason the run should exit with status 1, if any.
pub struct Outcome {
    pub report: Report,
    pub failure: Option<String>,
}

impl From<Report> for Outcome {
    fn from(report: Report) -> Self {
        Outcome {
            report,
            failure: None,
        }
    }
}

pub fn distribution(config: &RunConfig) -> CliResult<Outcome> {
    let n = config.modes()?;
    let species = config.species();
    let mp = config.multiport(n)?;
    let group = config.group_by_class;
    let table: DistributionTable = match config.input_spec(n)? {
        InputSpec::Pure(input) => output_distribution(&mp, &input, species, group)?,
        InputSpec::Mixed => {
            let pauli = config.pauli_only || species == Species::Fermion;
            mixed_state_distribution(&mp, config.particles(n)?, species, pauli, group)?
        }
        InputSpec::Equiprobable => {
            equiprobable_distribution(n, config.particles(n)?, species, group)
        }
    };
    let particles = table.rows.first().map_or(0, |row| row.output.particles());
    let zero = zero_threshold(n, particles);

    let mut report = Report::new(
        "rows",
        vec![
            "output",
            "class_multiplicity",
            "probability",
            "enhancement",
            "law_suppressed",
        ],
    );
    report
        .meta("command", "distribution")
        .meta("matrix", table.matrix.clone())
        .meta("species", species.name())
        .meta("input", table.input.to_string())
        .meta("n", n)
        .meta("particles", particles)
        .meta("group_by_class", group);
    let mut total = 0.0;
    for row in &table.rows {
        total += row.probability;
        report.push(vec![
            row.output.to_string().into(),
            row.class_multiplicity.into(),
            probability(row.probability, zero),
            enhancement(row.enhancement, row.probability, zero),
            row.law_suppressed.into(),
        ]);
    }
    let total = crate::export::round_sig(total, crate::export::PROBABILITY_DIGITS);
    report.meta("total", total);
    Ok(report.into())
}

pub fn enhancement_grid(config: &RunConfig) -> CliResult<Outcome> {
    let n = config.modes()?;
    let particles = config.particles(n)?;
    let species = config.species();
    if config.matrix_source() != MatrixSource::Fourier {
        return Err(usage(
            "enhancement grids are defined for the fourier matrix only",
        ));
    }
    let mp = config.multiport(n)?;
    let pauli = config.pauli_only || species == Species::Fermion;
    let classes = enumerate_classes(n, particles, pauli);
    let grid = classify_transitions_with(&mp, particles, species, pauli)?;

    let mut report = Report::new(
        "cells",
        vec![
            "input_index",
            "output_index",
            "input",
            "output",
            "probability",
            "enhancement",
            "law_tag",
            "direction",
            "q",
        ],
    );
    let class_list: Vec<serde_json::Value> = classes
        .iter()
        .enumerate()
        .map(|(index, class)| {
            serde_json::json!({
                "index": index,
                "representative": class.representative.to_string(),
                "multiplicity": class.multiplicity,
            })
        })
        .collect();
    report
        .meta("command", "enhancement")
        .meta("matrix", mp.label())
        .meta("species", species.name())
        .meta("n", n)
        .meta("particles", particles)
        .meta("pauli_only", pauli)
        .meta("classes", class_list);
    let size = classes.len();
    let zero = zero_threshold(n, particles);
    for (k, cell) in grid.iter().enumerate() {
        report.push(vec![
            (k / size).into(),
            (k % size).into(),
            cell.record.input.to_string().into(),
            cell.record.output.to_string().into(),
            probability(cell.record.probability, zero),
            enhancement(cell.record.enhancement, cell.record.probability, zero),
            cell.tag.name().into(),
            cell.direction().name().into(),
            cell.verdict.map_or(Cell::Missing, |v| v.q_value.into()),
        ]);
    }
    Ok(report.into())
}

fn fermion_case_name(case: FermionCase) -> &'static str {
    match case {
        FermionCase::OddOrEvenRatio => "odd_or_even_ratio",
        FermionCase::EvenOddRatio => "even_odd_ratio",
        FermionCase::NotApplicable => "not_applicable",
    }
}

pub fn suppression(config: &RunConfig) -> CliResult<Outcome> {
    let n = config.modes()?;
    let species = config.species();
    if species == Species::Distinguishable {
        return Err(usage("suppression laws concern bosons and fermions"));
    }
    let input = config.input_occupation(n)?;
    if species == Species::Fermion && !input.is_pauli() {
        return Err(Error::InvalidFermionState.into());
    }
    let outputs: Vec<ModeOccupation> = match config.output_occupation(n)? {
        Some(s) => vec![s],
        None => {
            let pauli = config.pauli_only || species == Species::Fermion;
            enumerate_occupations(n, input.particles(), pauli).collect()
        }
    };
    let mp = if config.check {
        if config.matrix_source() != MatrixSource::Fourier {
            return Err(usage("--check compares against the fourier matrix only"));
        }
        Some(config.multiport(n)?)
    } else {
        None
    };
    let threshold = zero_threshold(n, input.particles());
    let input_periodic = detect_periodicity(&input).is_periodic();

    let mut header = vec![
        "output",
        "applicable",
        "suppressed",
        "direction",
        "q",
        "m",
        "p",
        "fermion_case",
    ];
    if mp.is_some() {
        header.extend(["probability", "zero", "consistent"]);
    }
    let rows: Vec<(Vec<Cell>, bool, bool)> = outputs
        .par_iter()
        .map(|s| -> CliResult<_> {
            let verdict = law_verdict(&input, s, species)?;
            let applicable = input_periodic || detect_periodicity(s).is_periodic();
            let suppressed = verdict.is_some_and(|v| v.suppressed_by_law);
            let mut row: Vec<Cell> =
                vec![s.to_string().into(), applicable.into(), suppressed.into()];
            match verdict {
                Some(v) => row.extend([
                    v.direction.name().into(),
                    v.q_value.into(),
                    v.period_m.into(),
                    v.repetitions_p.into(),
                    fermion_case_name(v.fermion_case).into(),
                ]),
                None => row.extend([
                    "none".into(),
                    Cell::Missing,
                    Cell::Missing,
                    Cell::Missing,
                    Cell::Missing,
                ]),
            }
            let mut consistent = true;
            if let Some(mp) = &mp {
                let p = prob(mp.matrix(), &input, s, species)?;
                let zero = p < threshold;
                consistent = !suppressed || zero;
                row.extend([probability(p, threshold), zero.into(), consistent.into()]);
            }
            Ok((row, suppressed, consistent))
        })
        .collect::<CliResult<_>>()?;

    let mut report = Report::new("verdicts", header);
    report
        .meta("command", "suppression")
        .meta("species", species.name())
        .meta("input", input.to_string())
        .meta("n", n)
        .meta("particles", input.particles());
    if let Some(mp) = &mp {
        report.meta("matrix", mp.label());
    }
    let suppressed = rows.iter().filter(|r| r.1).count();
    let violations: Vec<String> = rows
        .iter()
        .filter(|r| !r.2)
        .map(|r| match &r.0[0] {
            Cell::Text(s) => s.clone(),
            _ => unreachable!("first column is the output arrangement"),
        })
        .collect();
    report
        .meta("outputs", rows.len())
        .meta("suppressed", suppressed);
    if mp.is_some() {
        report.meta("violations", violations.len());
    }
    for (row, _, _) in rows {
        report.push(row);
    }
    let failure = (!violations.is_empty()).then(|| {
        let shown = violations
            .iter()
            .take(5)
            .cloned()
            .collect::<Vec<_>>()
            .join(" | ");
        let more = violations.len().saturating_sub(5);
        let tail = if more > 0 {
            format!(" and {more} more")
        } else {
            String::new()
        };
        format!(
            "law predicts suppression of {input} -> {shown}{tail} but the probability is nonzero"
        )
    });
    Ok(Outcome { report, failure })
}
