//! Versioned text format for trained models.
//!
//! Layout: the header line `UNIFIED-PINSVM v1`, a kernel line, the
//! training-configuration block, solver diagnostics, the bias, sample
//! dimensions, one line per retained sample (coefficient then features),
//! and a closing `end` line. Floats are written with 17 significant
//! digits, so decision values of a reloaded model are bit-identical.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use pinsvm_core::dual::Formulation;
use pinsvm_core::kernel::KernelSpec;
use pinsvm_core::loss::Tau;
use pinsvm_core::model::{Model, SolveDiagnostics, TrainConfig};
use pinsvm_core::solver::SolverConfig;

use crate::{CliError, Result};

const HEADER: &str = "UNIFIED-PINSVM v1";

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Serializes a model to its text form.
pub fn to_text(model: &Model) -> String {
    let mut out = String::new();
    let cfg = model.config();
    let diag = model.diagnostics();
    out.push_str(HEADER);
    out.push('\n');
    match model.kernel() {
        KernelSpec::Linear => out.push_str("kernel linear\n"),
        KernelSpec::Rbf { q } => {
            let _ = writeln!(out, "kernel rbf {}", fmt_f64(*q));
        }
    }
    let _ = writeln!(out, "formulation {}", cfg.formulation.name());
    let _ = writeln!(out, "c0 {}", fmt_f64(cfg.c0));
    let _ = writeln!(out, "tau {}", fmt_f64(cfg.tau.value()));
    let _ = writeln!(out, "weighting {}", cfg.weighting);
    let _ = writeln!(out, "tol {}", fmt_f64(cfg.solver.tol));
    let _ = writeln!(out, "max_iter {}", cfg.solver.max_iter);
    let _ = writeln!(out, "seed {}", cfg.solver.seed);
    let _ = writeln!(out, "objective {}", fmt_f64(diag.objective));
    let _ = writeln!(out, "iterations {}", diag.iterations);
    let _ = writeln!(out, "kkt {}", fmt_f64(diag.kkt_residual));
    let _ = writeln!(out, "converged {}", diag.converged);
    if let Some(cap) = diag.upper_cap {
        let _ = writeln!(out, "cap {}", fmt_f64(cap));
        let _ = writeln!(out, "cap_reached {}", diag.cap_reached);
    }
    let _ = writeln!(out, "bias {}", fmt_f64(model.bias()));
    let _ = writeln!(out, "dim {}", model.n_features());
    let _ = writeln!(out, "samples {}", model.support_len());
    for i in 0..model.support_len() {
        out.push_str(&fmt_f64(model.coeffs()[i]));
        for &x in model.support_row(i) {
            out.push(' ');
            out.push_str(&fmt_f64(x));
        }
        out.push('\n');
    }
    out.push_str("end\n");
    out
}

struct Reader<'a> {
    lines: std::str::Lines<'a>,
}

impl<'a> Reader<'a> {
    fn next_section(&mut self, section: &str) -> Result<&'a str> {
        self.lines
            .next()
            .ok_or_else(|| CliError::ModelFormat(format!("truncated file: missing {section}")))
    }

    /// Reads a `key value` line, insisting on the key.
    fn keyed(&mut self, key: &str) -> Result<&'a str> {
        let line = self.next_section(key)?;
        let (k, v) = line
            .split_once(' ')
            .ok_or_else(|| CliError::ModelFormat(format!("malformed {key} line: {line:?}")))?;
        if k != key {
            return Err(CliError::ModelFormat(format!(
                "expected {key} line, found {line:?}"
            )));
        }
        Ok(v)
    }

    fn keyed_parse<T: FromStr>(&mut self, key: &str) -> Result<T> {
        let raw = self.keyed(key)?;
        raw.parse()
            .map_err(|_| CliError::ModelFormat(format!("bad {key} value: {raw:?}")))
    }
}

/// Parses the text form back into a model.
pub fn from_text(text: &str) -> Result<Model> {
    let mut r = Reader {
        lines: text.lines(),
    };
    let header = r.next_section("header")?;
    if header != HEADER {
        return Err(CliError::ModelFormat(format!(
            "unknown version tag: {header:?}"
        )));
    }

    let kernel_line = r.keyed("kernel")?;
    let kernel = match kernel_line.split_once(' ') {
        None if kernel_line == "linear" => KernelSpec::Linear,
        Some(("rbf", q)) => {
            let q: f64 = q
                .parse()
                .map_err(|_| CliError::ModelFormat(format!("bad rbf width: {q:?}")))?;
            KernelSpec::rbf(q)?
        }
        _ => {
            return Err(CliError::ModelFormat(format!(
                "unknown kernel: {kernel_line:?}"
            )))
        }
    };

    let formulation: Formulation = r.keyed_parse("formulation")?;
    let c0: f64 = r.keyed_parse("c0")?;
    let tau = Tau::new(r.keyed_parse("tau")?)?;
    let weighting: bool = r.keyed_parse("weighting")?;
    let tol: f64 = r.keyed_parse("tol")?;
    let max_iter: u64 = r.keyed_parse("max_iter")?;
    let seed: u64 = r.keyed_parse("seed")?;
    let objective: f64 = r.keyed_parse("objective")?;
    let iterations: u64 = r.keyed_parse("iterations")?;
    let kkt_residual: f64 = r.keyed_parse("kkt")?;
    let converged: bool = r.keyed_parse("converged")?;

    // cap lines are present only for the incorrect-negative baseline.
    let (upper_cap, cap_reached, bias_raw) = {
        let line = r.next_section("bias")?;
        if let Some(v) = line.strip_prefix("cap ") {
            let cap: f64 = v
                .parse()
                .map_err(|_| CliError::ModelFormat(format!("bad cap value: {v:?}")))?;
            let reached: bool = r.keyed_parse("cap_reached")?;
            (Some(cap), reached, r.keyed("bias")?)
        } else if let Some(v) = line.strip_prefix("bias ") {
            (None, false, v)
        } else {
            return Err(CliError::ModelFormat(format!(
                "expected bias line, found {line:?}"
            )));
        }
    };
    let bias: f64 = bias_raw
        .parse()
        .map_err(|_| CliError::ModelFormat(format!("bad bias value: {bias_raw:?}")))?;

    let dim: usize = r.keyed_parse("dim")?;
    let samples: usize = r.keyed_parse("samples")?;

    let mut coeffs = Vec::with_capacity(samples);
    let mut support_x = Vec::with_capacity(samples * dim);
    for s in 0..samples {
        let line = r.next_section(&format!("sample {} of {samples}", s + 1))?;
        let mut parts = line.split_whitespace();
        let coeff_raw = parts
            .next()
            .ok_or_else(|| CliError::ModelFormat(format!("empty sample line {}", s + 1)))?;
        let coeff: f64 = coeff_raw
            .parse()
            .map_err(|_| CliError::ModelFormat(format!("bad coefficient: {coeff_raw:?}")))?;
        let mut row = Vec::with_capacity(dim);
        for p in parts {
            let v: f64 = p
                .parse()
                .map_err(|_| CliError::ModelFormat(format!("bad feature value: {p:?}")))?;
            row.push(v);
        }
        if row.len() != dim {
            return Err(CliError::ModelFormat(format!(
                "sample {} has {} features, expected {dim}",
                s + 1,
                row.len()
            )));
        }
        coeffs.push(coeff);
        support_x.extend_from_slice(&row);
    }
    let terminator = r.next_section("end marker")?;
    if terminator != "end" {
        return Err(CliError::ModelFormat(format!(
            "expected end marker, found {terminator:?}"
        )));
    }

    let config = TrainConfig {
        c0,
        tau,
        kernel,
        formulation,
        solver: SolverConfig {
            tol,
            max_iter,
            seed,
        },
        weighting,
    };
    let diagnostics = SolveDiagnostics {
        objective,
        iterations,
        kkt_residual,
        converged,
        upper_cap,
        cap_reached,
    };
    Model::from_parts(kernel, dim, support_x, coeffs, bias, config, diagnostics)
        .map_err(CliError::from)
}

/// Writes the model to `path`.
pub fn save(model: &Model, path: &Path) -> Result<()> {
    fs::write(path, to_text(model)).map_err(|e| CliError::io(path, e))
}

/// Reads a model back from `path`.
pub fn load(path: &Path) -> Result<Model> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    from_text(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use pinsvm_core::data::Dataset;
    use pinsvm_core::model::{decision_value, train};

    fn sample_model(formulation: Formulation, tau: f64) -> Model {
        let data = Dataset::from_rows(
            vec![
                vec![1.0, 0.3],
                vec![-1.0, 0.9],
                vec![0.4, -0.2],
                vec![-0.3, -0.6],
            ],
            vec![1.0, -1.0, 1.0, -1.0],
        )
        .unwrap();
        let cfg = TrainConfig::new(1.5, Tau::new(tau).unwrap(), KernelSpec::rbf(0.8).unwrap())
            .with_formulation(formulation);
        train(&data, &cfg).unwrap()
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let model = sample_model(Formulation::Unified, -0.37);
        let text = to_text(&model);
        let back = from_text(&text).unwrap();
        for x in [[0.1, 0.2], [-2.0, 0.5], [0.77, -0.13]] {
            let a = decision_value(&model, &x).unwrap();
            let b = decision_value(&back, &x).unwrap();
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert_eq!(to_text(&back), text);
    }

    #[test]
    fn cap_lines_round_trip_for_the_baseline() {
        let model = sample_model(Formulation::IncorrectNegative, -0.5);
        let text = to_text(&model);
        assert!(text.contains("cap 1.0000000000000000e6"));
        let back = from_text(&text).unwrap();
        assert_eq!(back.diagnostics().upper_cap, Some(1e6));
    }

    #[test]
    fn unknown_version_is_rejected() {
        let err = from_text("UNIFIED-PINSVM v9\n").unwrap_err();
        assert!(err.to_string().contains("unknown version tag"));
    }

    #[test]
    fn truncation_names_the_missing_section() {
        let model = sample_model(Formulation::Unified, 0.25);
        let text = to_text(&model);
        // Drop the end marker and the last sample line.
        let truncated: Vec<&str> = text.lines().collect();
        let cut = truncated[..truncated.len() - 2].join("\n");
        let err = from_text(&cut).unwrap_err();
        assert!(
            err.to_string().contains("missing"),
            "unexpected error: {err}"
        );

        let only_header = from_text(HEADER).unwrap_err();
        assert!(only_header.to_string().contains("missing kernel"));
    }

    #[test]
    fn save_and_load_through_the_filesystem() {
        let model = sample_model(Formulation::Unified, 0.0);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.pinsvm");
        save(&model, &path).unwrap();
        let back = load(&path).unwrap();
        assert_eq!(back.coeffs(), model.coeffs());
        assert_eq!(back.bias().to_bits(), model.bias().to_bits());
    }
}
