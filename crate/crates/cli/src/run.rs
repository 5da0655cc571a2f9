//! The commands, generic over the coefficient field.

use std::time::Instant;

use relci_core::homalg::{
    poincare_truncation, bass_truncation, sequence_table, verify_t2, verify_t9, ComparisonReport, Functor,
};
use relci_core::resolve::{Scenario, Sequence};
use relci_core::Field;

use crate::report::{emit_series_table, matrix_out, operators_out, CheckOut, Report, WindowOut};
use crate::scenario::{ScenarioError, ScenarioFile, WindowSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    CheckRegular,
    Tor,
    Ext,
    Series,
    VerifyT2,
    VerifyT9,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::CheckRegular => "check-regular",
            Command::Tor => "tor",
            Command::Ext => "ext",
            Command::Series => "series",
            Command::VerifyT2 => "verify-t2",
            Command::VerifyT9 => "verify-t9",
        }
    }
}

/// Which sequence a single-sequence command uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    F,
    FPrime,
    Both,
}

#[derive(Debug, Clone)]
pub struct Options {
    pub which: Which,
    pub window: WindowSpec,
    pub truncation: Option<i32>,
    pub verbose_operators: bool,
    pub timing: bool,
}

pub struct Outcome {
    pub report: Report,
    pub text: String,
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("{command}: {err}")]
    Domain { command: &'static str, err: relci_core::Error },
    #[error(transparent)]
    Table(#[from] crate::report::LengthMismatch),
}

fn sequences(which: Which, s: &Scenario<impl Field>) -> Vec<(Sequence, &'static str)> {
    let both = [(Sequence::F, "f"), (Sequence::FPrime, "f_prime")];
    match which {
        Which::F => vec![both[0]],
        Which::FPrime => vec![both[1]],
        Which::Both if s.is_annihilator_variant() => vec![both[0]],
        Which::Both => both.to_vec(),
    }
}

pub fn field_label<F: Field>(field: &F) -> String {
    match field.characteristic() {
        0 => "Q".into(),
        p => format!("F_{}", p),
    }
}

pub fn run<F: Field>(field: F, command: Command, file: &ScenarioFile, scenario_name: &str, opts: &Options) -> Result<Outcome, RunError> {
    let start = Instant::now();
    let s = file.build(field.clone(), opts.window)?;
    let domain = |err| RunError::Domain { command: command.name(), err };
    let w = opts.window;
    let mut report = Report::new(
        command.name(),
        scenario_name,
        field_label(&field),
        WindowOut { max_hdeg: w.max_hdeg, max_ideg: w.max_ideg },
    );
    let trunc = opts.truncation.or(file.truncation).unwrap_or(w.max_hdeg).min(w.max_hdeg);
    let mut series_rows: Vec<(String, Vec<i64>)> = Vec::new();
    match command {
        Command::CheckRegular => {
            for (which, name) in [(Sequence::F, "f"), (Sequence::FPrime, "f_prime")] {
                if s.sequence(which).iter().all(|p| p.is_zero()) {
                    report.notes.push(format!("{} is zero; nothing to check", name));
                    continue;
                }
                let detail = match s.check_regular(which).map_err(domain)? {
                    None => CheckOut { name: format!("{}_koszul_regular", name), passed: true, detail: format!("H_i(E)_j = 0 for i >= 1, j <= {}", w.max_ideg) },
                    Some((i, j)) => CheckOut {
                        name: format!("{}_koszul_regular", name),
                        passed: false,
                        detail: format!("H_{}(E) is nonzero in internal degree {}", i, j),
                    },
                };
                report.push_check(detail);
            }
        }
        Command::Tor | Command::Ext => {
            let (functor, tag) = if command == Command::Tor { (Functor::Tor, "tor") } else { (Functor::Ext, "ext") };
            for (which, name) in sequences(opts.which, &s) {
                let data = sequence_table(&s, which, functor).map_err(domain)?;
                report.add_table(&format!("{}_{}", tag, name), &data.homology.table);
                if opts.verbose_operators {
                    report.operators.get_or_insert_with(Default::default).insert(format!("{}_{}", tag, name), operators_out(&field, &data.operators));
                }
            }
        }
        Command::Series => {
            for (which, name) in sequences(opts.which, &s) {
                let p = poincare_truncation(&s, which, trunc).map_err(domain)?;
                let b = bass_truncation(&s, which, trunc).map_err(domain)?;
                series_rows.push((format!("P_{}", name), p.coefficients.clone()));
                series_rows.push((format!("B_{}", name), b.coefficients.clone()));
                report.add_series(&format!("poincare_{}", name), &p);
                report.add_series(&format!("bass_{}", name), &b);
            }
        }
        Command::VerifyT2 => {
            let r = verify_t2(&s).map_err(domain)?;
            absorb(&field, &mut report, &r, opts.verbose_operators, trunc);
            for key in ["poincare_f", "poincare_f_prime", "bass_f", "bass_f_prime"] {
                series_rows.push((key.into(), truncated(&r.series[key].coefficients, trunc)));
            }
        }
        Command::VerifyT9 => {
            let r = verify_t9(&s).map_err(domain)?;
            absorb(&field, &mut report, &r, opts.verbose_operators, trunc);
            let n = s.n_seq();
            for kind in ["poincare", "bass"] {
                let over_r = &r.series[&format!("{}_f", kind)];
                series_rows.push((format!("{}_f", kind), truncated(&over_r.coefficients, trunc)));
                series_rows.push((format!("{}_f * (1-t^2)^{}", kind, n), truncated(&over_r.times_one_minus_t2_pow(n), trunc)));
                series_rows.push((format!("{}_q", kind), truncated(&r.series[&format!("{}_q", kind)].coefficients, trunc)));
            }
        }
    }
    if opts.timing {
        report.timing_ms = Some(start.elapsed().as_millis() as u64);
    }
    let mut text = report.to_text();
    if !series_rows.is_empty() {
        text.push('\n');
        text.push_str(&emit_series_table(&series_rows)?);
    }
    Ok(Outcome { report, text })
}

fn truncated(c: &[i64], t: i32) -> Vec<i64> {
    c.iter().take((t.max(-1) + 1) as usize).copied().collect()
}

fn absorb<F: Field>(field: &F, report: &mut Report, r: &ComparisonReport<F::Elem>, verbose: bool, trunc: i32) {
    for c in &r.checks {
        report.push_check(c.into());
    }
    for (name, t) in &r.tables {
        report.add_table(name, t);
    }
    for (name, s) in &r.series {
        let mut s = s.clone();
        s.coefficients.truncate((trunc.max(-1) + 1) as usize);
        report.add_series(name, &s);
    }
    report.notes.extend(r.notes.iter().cloned());
    if verbose {
        report.operators = Some(r.operators.iter().map(|(k, v)| (k.clone(), operators_out(field, v))).collect());
        report.isomorphisms = Some(
            r.isomorphisms
                .iter()
                .map(|(k, mats)| (k.clone(), mats.iter().map(|(&at, m)| matrix_out(field, 0, at, m)).collect()))
                .collect(),
        );
    }
}
