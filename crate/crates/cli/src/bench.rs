//! Experimental protocol: cross-validated grid search at `tau = 0`,
//! `tau` sweeps per formulation, report emission, and whole-table runs.

use std::fmt;
use std::fs;
use std::path::Path;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use pinsvm_core::data::{normalize_minmax, Dataset};
use pinsvm_core::dual::Formulation;
use pinsvm_core::kernel::KernelSpec;
use pinsvm_core::loss::Tau;
use pinsvm_core::model::{accuracy, train, TrainConfig};
use pinsvm_core::solver::SolverConfig;
use pinsvm_core::Error;

use crate::registry;
use crate::{CliError, Result};

/// Kernel family selector; the width is what grid search tunes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    Linear,
    Rbf,
}

impl KernelKind {
    pub fn spec(&self, q: f64) -> Result<KernelSpec> {
        match self {
            KernelKind::Linear => Ok(KernelSpec::Linear),
            KernelKind::Rbf => KernelSpec::rbf(q).map_err(CliError::from),
        }
    }
}

impl std::str::FromStr for KernelKind {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(KernelKind::Linear),
            "rbf" => Ok(KernelKind::Rbf),
            other => Err(CliError::ModelFormat(format!(
                "unknown kernel kind {other:?}"
            ))),
        }
    }
}

/// Candidate parameter values for the search; defaults to powers of two
/// from 2^-7 through 2^7 for both `C0` and the RBF width.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub c_values: Vec<f64>,
    pub q_values: Vec<f64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        let powers: Vec<f64> = (-7..=7).map(|e| (e as f64).exp2()).collect();
        GridSpec {
            c_values: powers.clone(),
            q_values: powers,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.c_values.is_empty() || self.q_values.is_empty() {
            return Err(CliError::Core(Error::InvalidParameter {
                name: "grid",
                detail: "value sets must be nonempty".into(),
            }));
        }
        if self
            .c_values
            .iter()
            .chain(&self.q_values)
            .any(|&v| v.is_nan() || v <= 0.0)
        {
            return Err(CliError::Core(Error::InvalidParameter {
                name: "grid",
                detail: "all grid values must be positive".into(),
            }));
        }
        Ok(())
    }
}

/// Deterministic stratified k-fold assignment: per-class shuffles dealt
/// round-robin, so folds stay class-balanced whenever counts allow.
pub fn stratified_kfold(labels: &[f64], folds: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if folds < 2 {
        return Err(CliError::Core(Error::InvalidParameter {
            name: "folds",
            detail: "need at least 2".into(),
        }));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pos: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] > 0.0).collect();
    let mut neg: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] < 0.0).collect();
    if pos.is_empty() || neg.is_empty() {
        return Err(CliError::Core(Error::DegenerateClasses));
    }
    pos.shuffle(&mut rng);
    neg.shuffle(&mut rng);
    let mut assignment = vec![Vec::new(); folds];
    for (k, &i) in pos.iter().chain(neg.iter()).enumerate() {
        assignment[k % folds].push(i);
    }
    for fold in &mut assignment {
        fold.sort_unstable();
    }
    Ok(assignment)
}

fn subset(data: &Dataset, indices: &[usize]) -> Dataset {
    let rows: Vec<Vec<f64>> = indices.iter().map(|&i| data.row(i).to_vec()).collect();
    let labels: Vec<f64> = indices.iter().map(|&i| data.labels()[i]).collect();
    Dataset::from_rows(rows, labels).expect("subset of a valid dataset")
}

/// Cross-validated search for `(C0, q)` at `tau = 0`, maximizing mean
/// validation accuracy. Ties break toward the smaller `C0`, then the
/// smaller `q` (the simpler model). For a linear kernel the `q` axis is
/// not searched and 1.0 is returned.
pub fn grid_search(
    train_set: &Dataset,
    grid: &GridSpec,
    kernel_kind: KernelKind,
    weighting: bool,
    folds: usize,
    seed: u64,
    solver: SolverConfig,
) -> Result<(f64, f64)> {
    grid.validate()?;
    let assignment = stratified_kfold(train_set.labels(), folds, seed)?;
    let tau = Tau::new(0.0).expect("0 is in range");

    let q_axis: &[f64] = match kernel_kind {
        KernelKind::Linear => &[1.0],
        KernelKind::Rbf => &grid.q_values,
    };
    let mut c_sorted = grid.c_values.clone();
    c_sorted.sort_by(f64::total_cmp);
    let mut q_sorted = q_axis.to_vec();
    q_sorted.sort_by(f64::total_cmp);

    let mut best: Option<(f64, f64, f64)> = None; // (mean_acc, c, q)
    for &c0 in &c_sorted {
        for &q in &q_sorted {
            let kernel = kernel_kind.spec(q)?;
            let mut acc_sum = 0.0;
            let mut acc_count = 0usize;
            for held_out in &assignment {
                if held_out.is_empty() {
                    continue;
                }
                let train_idx: Vec<usize> = (0..train_set.len())
                    .filter(|i| !held_out.contains(i))
                    .collect();
                let cv_train = subset(train_set, &train_idx);
                let cv_val = subset(train_set, held_out);
                let cfg = TrainConfig::new(c0, tau, kernel)
                    .with_weighting(weighting)
                    .with_solver(solver);
                let model = train(&cv_train, &cfg)?;
                acc_sum += accuracy(&model, &cv_val)?;
                acc_count += 1;
            }
            let mean = acc_sum / acc_count as f64;
            // Strict improvement keeps the earlier (smaller) candidates on
            // ties.
            if best.is_none_or(|(b, _, _)| mean > b) {
                best = Some((mean, c0, q));
            }
        }
    }
    let (_, c0, q) = best.expect("grid is nonempty");
    Ok((c0, q))
}

/// One requested `(tau, formulation)` combination of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub tau: f64,
    pub formulation: Formulation,
    pub outcome: RowOutcome,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RowOutcome {
    Ran {
        accuracy: f64,
        time_s: f64,
        iterations: u64,
        converged: bool,
    },
    /// The formulation is undefined at this `tau` (sign mismatch).
    Skipped { reason: String },
    /// Training failed; the sweep continues.
    Failed { reason: String },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn ran_rows(&self) -> impl Iterator<Item = (&SweepRow, f64)> {
        self.rows.iter().filter_map(|r| match r.outcome {
            RowOutcome::Ran { accuracy, .. } => Some((r, accuracy)),
            _ => None,
        })
    }

    /// Best accuracy over executed rows of one formulation, with its tau.
    pub fn best_for(&self, formulation: Formulation) -> Option<(f64, f64)> {
        self.ran_rows()
            .filter(|(r, _)| r.formulation == formulation)
            .map(|(r, a)| (a, r.tau))
            .max_by(|x, y| x.0.total_cmp(&y.0))
    }
}

/// Trains and evaluates every `(tau, formulation)` combination at fixed
/// `(C0, q)`. Sign mismatches are recorded as skips; per-row failures do
/// not abort the sweep.
#[allow(clippy::too_many_arguments)]
pub fn tau_sweep(
    train_set: &Dataset,
    test_set: &Dataset,
    c0: f64,
    q: f64,
    kernel_kind: KernelKind,
    taus: &[f64],
    formulations: &[Formulation],
    weighting: bool,
    solver: SolverConfig,
) -> Result<SweepResult> {
    let mut rows = Vec::with_capacity(taus.len() * formulations.len());
    for &t in taus {
        let tau = Tau::new(t).map_err(CliError::from)?;
        for &formulation in formulations {
            if !formulation.accepts(tau) {
                rows.push(SweepRow {
                    tau: t,
                    formulation,
                    outcome: RowOutcome::Skipped {
                        reason: format!("{} undefined at tau={t}", formulation.name()),
                    },
                });
                continue;
            }
            let kernel = kernel_kind.spec(q)?;
            let cfg = TrainConfig::new(c0, tau, kernel)
                .with_formulation(formulation)
                .with_weighting(weighting)
                .with_solver(solver);
            let started = Instant::now();
            let outcome = match train(train_set, &cfg) {
                Ok(model) => {
                    let time_s = started.elapsed().as_secs_f64();
                    match accuracy(&model, test_set) {
                        Ok(acc) => RowOutcome::Ran {
                            accuracy: acc,
                            time_s,
                            iterations: model.diagnostics().iterations,
                            converged: model.diagnostics().converged,
                        },
                        Err(e) => RowOutcome::Failed {
                            reason: e.to_string(),
                        },
                    }
                }
                Err(e) => RowOutcome::Failed {
                    reason: e.to_string(),
                },
            };
            rows.push(SweepRow {
                tau: t,
                formulation,
                outcome,
            });
        }
    }
    Ok(SweepResult { rows })
}

/// Writes executed sweep rows as CSV, sorted by formulation then `tau`.
/// Re-emitting the same result is byte-identical.
pub fn emit_report(result: &SweepResult, path: &Path) -> Result<()> {
    if result.rows.is_empty() {
        return Err(CliError::Core(Error::InvalidParameter {
            name: "report",
            detail: "empty sweep result".into(),
        }));
    }
    let mut executed: Vec<(&SweepRow, f64, f64, u64, bool)> = result
        .rows
        .iter()
        .filter_map(|r| match r.outcome {
            RowOutcome::Ran {
                accuracy,
                time_s,
                iterations,
                converged,
            } => Some((r, accuracy, time_s, iterations, converged)),
            _ => None,
        })
        .collect();
    executed.sort_by(|a, b| {
        a.0.formulation
            .name()
            .cmp(b.0.formulation.name())
            .then(a.0.tau.total_cmp(&b.0.tau))
    });

    let mut out = String::from("tau,formulation,accuracy,time_s,iterations,converged\n");
    for (row, acc, time_s, iterations, converged) in executed {
        out.push_str(&format!(
            "{},{},{},{:.6},{},{}\n",
            row.tau,
            row.formulation.name(),
            acc,
            time_s,
            iterations,
            converged
        ));
    }
    fs::write(path, out).map_err(|e| CliError::io(path, e))
}

/// `tau` grid from -1 to 1 inclusive with the given step (rounded to
/// cancel accumulation artifacts).
pub fn tau_grid(step: f64) -> Vec<f64> {
    let n = (2.0 / step).round() as usize;
    (0..=n)
        .map(|i| {
            let t = -1.0 + i as f64 * step;
            (t * 1e10).round() / 1e10
        })
        .filter(|t| (-1.0..=1.0).contains(t))
        .collect()
}

/// Settings for a whole-table run.
#[derive(Debug, Clone)]
pub struct TableConfig {
    pub kernel_kind: KernelKind,
    pub grid: GridSpec,
    pub folds: usize,
    pub tau_step: f64,
    pub seed: u64,
    pub weighting: bool,
    pub solver: SolverConfig,
    pub data_dir: std::path::PathBuf,
}

impl Default for TableConfig {
    fn default() -> Self {
        TableConfig {
            kernel_kind: KernelKind::Linear,
            grid: GridSpec::default(),
            folds: 5,
            tau_step: 0.1,
            seed: 0,
            weighting: true,
            solver: SolverConfig::default(),
            data_dir: std::path::PathBuf::from("."),
        }
    }
}

/// One model family's best result on one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct TableLine {
    pub model: &'static str,
    pub accuracy: f64,
    pub time_s: f64,
    pub best_tau: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableBlock {
    pub dataset: String,
    pub c0: f64,
    pub q: f64,
    pub lines: Vec<TableLine>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TableReport {
    pub blocks: Vec<TableBlock>,
    pub skipped: Vec<(String, String)>,
}

impl fmt::Display for TableReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for block in &self.blocks {
            writeln!(f, "{} (C0={}, q={})", block.dataset, block.c0, block.q)?;
            for line in &block.lines {
                let tau = line
                    .best_tau
                    .map(|t| format!("{t:.2}"))
                    .unwrap_or_else(|| "-".into());
                writeln!(
                    f,
                    "  {:<16} accuracy={:.2}%  time={:.2}s  tau={}",
                    line.model,
                    100.0 * line.accuracy,
                    line.time_s,
                    tau
                )?;
            }
        }
        for (name, reason) in &self.skipped {
            writeln!(f, "skipped {name}: {reason}")?;
        }
        Ok(())
    }
}

/// Per-dataset protocol: normalize, grid-search `(C0, q)` at `tau = 0`,
/// then report the best-`tau` accuracy of the unified model, of the
/// existing model (its positive-`tau` dual plus the legacy negative-`tau`
/// QPP), and of the plain C-SVM (`tau = 0`). Unavailable datasets are
/// skipped with a notice.
pub fn run_table_experiment(names: &[String], config: &TableConfig) -> Result<TableReport> {
    let mut report = TableReport::default();
    let taus = tau_grid(config.tau_step);
    let negative: Vec<f64> = taus.iter().copied().filter(|&t| t < 0.0).collect();
    let nonnegative: Vec<f64> = taus.iter().copied().filter(|&t| t >= 0.0).collect();

    for name in names {
        let resolved = registry::resolve(name, &config.data_dir, config.seed);
        let (raw_train, raw_test) = match resolved {
            Ok(pair) => pair,
            Err(e) => {
                report.skipped.push((name.clone(), e.to_string()));
                continue;
            }
        };
        let (train_set, test_set, _) = normalize_minmax(&raw_train, &raw_test)?;
        let (c0, q) = grid_search(
            &train_set,
            &config.grid,
            config.kernel_kind,
            config.weighting,
            config.folds,
            config.seed,
            config.solver,
        )?;

        let sweep = |taus: &[f64], formulations: &[Formulation]| -> Result<SweepResult> {
            tau_sweep(
                &train_set,
                &test_set,
                c0,
                q,
                config.kernel_kind,
                taus,
                formulations,
                config.weighting,
                config.solver,
            )
        };

        let unified = sweep(&taus, &[Formulation::Unified])?;
        let existing_pos = sweep(&nonnegative, &[Formulation::LegacyPositive])?;
        let existing_neg = sweep(&negative, &[Formulation::IncorrectNegative])?;
        let csvm = sweep(&[0.0], &[Formulation::Unified])?;

        let mut lines = Vec::new();
        if let Some((acc, tau)) = unified.best_for(Formulation::Unified) {
            let time: f64 = total_time(&unified);
            lines.push(TableLine {
                model: "Unified Pin-SVM",
                accuracy: acc,
                time_s: time,
                best_tau: Some(tau),
            });
        }
        let existing_best = existing_pos
            .best_for(Formulation::LegacyPositive)
            .into_iter()
            .chain(existing_neg.best_for(Formulation::IncorrectNegative))
            .max_by(|a, b| a.0.total_cmp(&b.0));
        if let Some((acc, tau)) = existing_best {
            lines.push(TableLine {
                model: "Pin-SVM",
                accuracy: acc,
                time_s: total_time(&existing_pos) + total_time(&existing_neg),
                best_tau: Some(tau),
            });
        }
        if let Some((acc, _)) = csvm.best_for(Formulation::Unified) {
            lines.push(TableLine {
                model: "C-SVM",
                accuracy: acc,
                time_s: total_time(&csvm),
                best_tau: None,
            });
        }
        report.blocks.push(TableBlock {
            dataset: name.clone(),
            c0,
            q,
            lines,
        });
    }
    Ok(report)
}

fn total_time(result: &SweepResult) -> f64 {
    result
        .rows
        .iter()
        .map(|r| match r.outcome {
            RowOutcome::Ran { time_s, .. } => time_s,
            _ => 0.0,
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn separable(n: usize) -> Dataset {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..n {
            let y = if i % 2 == 0 { 1.0 } else { -1.0 };
            rows.push(vec![y * 2.0 + (i as f64 % 5.0) * 0.1]);
            labels.push(y);
        }
        Dataset::from_rows(rows, labels).unwrap()
    }

    #[test]
    fn kfold_is_stratified_and_deterministic() {
        let labels: Vec<f64> = (0..20).map(|i| if i < 12 { 1.0 } else { -1.0 }).collect();
        let a = stratified_kfold(&labels, 4, 9).unwrap();
        let b = stratified_kfold(&labels, 4, 9).unwrap();
        assert_eq!(a, b);
        for fold in &a {
            let pos = fold.iter().filter(|&&i| labels[i] > 0.0).count();
            assert_eq!(pos, 3);
            assert_eq!(fold.len(), 5);
        }
    }

    #[test]
    fn grid_with_single_pair_returns_it() {
        let grid = GridSpec {
            c_values: vec![0.5],
            q_values: vec![2.0],
        };
        let data = separable(24);
        let (c0, q) = grid_search(
            &data,
            &grid,
            KernelKind::Rbf,
            true,
            3,
            1,
            SolverConfig::default(),
        )
        .unwrap();
        assert_eq!((c0, q), (0.5, 2.0));
    }

    #[test]
    fn grid_finds_a_perfect_pair_on_separable_data() {
        let data = separable(30);
        let grid = GridSpec {
            c_values: vec![0.25, 4.0],
            q_values: vec![1.0],
        };
        let (c0, _q) = grid_search(
            &data,
            &grid,
            KernelKind::Linear,
            true,
            5,
            1,
            SolverConfig::default(),
        )
        .unwrap();
        // Some pair reaches validation accuracy 1.0; ties break to the
        // smaller C0.
        assert_eq!(c0, 0.25);
    }

    #[test]
    fn grid_search_is_deterministic() {
        let data = separable(20);
        let grid = GridSpec::default();
        let run = || {
            grid_search(
                &data,
                &grid,
                KernelKind::Linear,
                true,
                4,
                7,
                SolverConfig::default(),
            )
            .unwrap()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn sweep_skips_sign_mismatches_and_keeps_all_rows() {
        let data = separable(16);
        let result = tau_sweep(
            &data,
            &data,
            1.0,
            1.0,
            KernelKind::Linear,
            &[-0.5, 0.0],
            &[Formulation::Unified, Formulation::LegacyPositive],
            true,
            SolverConfig::default(),
        )
        .unwrap();
        assert_eq!(result.rows.len(), 4);
        let skipped: Vec<_> = result
            .rows
            .iter()
            .filter(|r| matches!(r.outcome, RowOutcome::Skipped { .. }))
            .collect();
        assert_eq!(skipped.len(), 1);
        assert_eq!(skipped[0].formulation, Formulation::LegacyPositive);
        assert_eq!(skipped[0].tau, -0.5);
    }

    #[test]
    fn tau_zero_rows_agree_across_equivalent_formulations() {
        let data = separable(16);
        let result = tau_sweep(
            &data,
            &data,
            1.0,
            1.0,
            KernelKind::Linear,
            &[0.0],
            &[Formulation::Unified, Formulation::LegacyPositive],
            true,
            SolverConfig::default(),
        )
        .unwrap();
        let accs: Vec<f64> = result.ran_rows().map(|(_, a)| a).collect();
        assert_eq!(accs.len(), 2);
        assert_eq!(accs[0], accs[1]);
    }

    #[test]
    fn sweep_is_deterministic_up_to_wall_clock() {
        let data = separable(18);
        let run = || {
            tau_sweep(
                &data,
                &data,
                0.5,
                1.0,
                KernelKind::Linear,
                &[-0.4, 0.0, 0.4],
                &[Formulation::Unified, Formulation::IncorrectNegative],
                true,
                SolverConfig::default(),
            )
            .unwrap()
        };
        let a = run();
        let b = run();
        assert_eq!(a.rows.len(), b.rows.len());
        for (ra, rb) in a.rows.iter().zip(&b.rows) {
            assert_eq!(ra.tau, rb.tau);
            assert_eq!(ra.formulation, rb.formulation);
            match (&ra.outcome, &rb.outcome) {
                (
                    RowOutcome::Ran { accuracy: aa, iterations: ia, converged: ca, .. },
                    RowOutcome::Ran { accuracy: ab, iterations: ib, converged: cb, .. },
                ) => {
                    assert_eq!(aa, ab);
                    assert_eq!(ia, ib);
                    assert_eq!(ca, cb);
                }
                (RowOutcome::Skipped { reason: x }, RowOutcome::Skipped { reason: y }) => {
                    assert_eq!(x, y)
                }
                other => panic!("outcome kinds diverged: {other:?}"),
            }
        }
    }

    #[test]
    fn report_layout_and_determinism() {
        let data = separable(12);
        let result = tau_sweep(
            &data,
            &data,
            1.0,
            1.0,
            KernelKind::Linear,
            &[0.0, 0.5],
            &[Formulation::Unified],
            true,
            SolverConfig::default(),
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("report.csv");
        emit_report(&result, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(
            lines[0],
            "tau,formulation,accuracy,time_s,iterations,converged"
        );
        emit_report(&result, &path).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), text);
    }

    #[test]
    fn empty_report_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("report.csv");
        assert!(emit_report(&SweepResult::default(), &path).is_err());
    }

    #[test]
    fn tau_grid_includes_both_endpoints() {
        let g = tau_grid(0.1);
        assert_eq!(g.len(), 21);
        assert_eq!(g[0], -1.0);
        assert_eq!(*g.last().unwrap(), 1.0);
        assert!(g.contains(&0.0));
    }

    #[test]
    fn table_run_skips_missing_datasets_with_notice() {
        let config = TableConfig {
            grid: GridSpec {
                c_values: vec![1.0],
                q_values: vec![1.0],
            },
            tau_step: 1.0,
            ..Default::default()
        };
        let report = run_table_experiment(&["nonsuch".to_string()], &config).unwrap();
        assert!(report.blocks.is_empty());
        assert_eq!(report.skipped.len(), 1);
        assert_eq!(report.skipped[0].0, "nonsuch");
    }
}
