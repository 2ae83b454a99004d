//! Fidelity sweeps over the operation time.

use rayon::prelude::*;

use holonomy_core::bath::{fixed_rates_preset, rates_from_bath, OhmicBath};
use holonomy_core::lindblad::{noisy_fidelity, IntegrationOptions, NoiseModel, ProbeChannel};
use holonomy_core::path::not_gate_path;
use holonomy_core::propagator::mean_fidelity_over;
use holonomy_core::sampling::{bloch_samples, NamedState};
use holonomy_core::{DensityMatrix, PathSpec};

use crate::config::{ExperimentConfig, Figure, Preset};
use crate::csv::Table;
use crate::error::LabError;

/// Gates are simulated with `Ω = 1`, so grid values are `Ωτ`.
pub const OMEGA: f64 = 1.0;

/// A noise model together with its column-label suffix.
#[derive(Debug, Clone)]
pub struct NoiseVariant {
    pub suffix: String,
    pub model: NoiseModel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnKind {
    IdealMean,
    NoisyMean { variant: usize },
    State { state: NamedState, variant: usize },
}

#[derive(Debug, Clone)]
pub struct Column {
    pub label: String,
    pub kind: ColumnKind,
}

/// Loop family swept in time.
#[derive(Debug, Clone)]
pub enum LoopFamily {
    NotGate,
    Custom(PathSpec),
}

impl LoopFamily {
    pub fn at(&self, tau: f64) -> holonomy_core::Result<PathSpec> {
        match self {
            Self::NotGate => not_gate_path(tau),
            Self::Custom(p) => p.rescaled(tau),
        }
    }
}

/// A validated configuration with everything precomputed that does not
/// depend on the grid point.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub family: LoopFamily,
    pub variants: Vec<NoiseVariant>,
    pub samples: Vec<DensityMatrix>,
    pub columns: Vec<Column>,
}

/// A grid point whose evaluation failed; its row is left out of the table.
#[derive(Debug, Clone)]
pub struct RowFailure {
    pub omega_tau: f64,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub table: Table,
    pub failures: Vec<RowFailure>,
}

fn noise_variants(cfg: &ExperimentConfig) -> Result<Vec<NoiseVariant>, LabError> {
    if cfg.figure == Figure::IdealMean {
        return Ok(Vec::new());
    }
    let lambdas = cfg.lambda2_list();
    let mut out = Vec::new();
    match cfg.preset() {
        Preset::Fixed => {
            for &l2 in &lambdas {
                out.push(NoiseVariant {
                    suffix: format!("l2={l2:?}"),
                    model: NoiseModel::new(fixed_rates_preset(), l2)
                        .map_err(|e| LabError::config("lambda2", e.to_string()))?,
                });
            }
        }
        Preset::Ohmic => {
            let mut tables = Vec::new();
            for &t in &cfg.temperatures {
                let bath = OhmicBath::new(cfg.kappa, cfg.omega_c, t)
                    .map_err(|e| LabError::config("temperature", e.to_string()))?;
                tables.push((t, rates_from_bath(&bath)?));
            }
            for &l2 in &lambdas {
                for (t, rates) in &tables {
                    let suffix = if lambdas.len() == 1 {
                        format!("T={t:?}")
                    } else {
                        format!("l2={l2:?}_T={t:?}")
                    };
                    out.push(NoiseVariant {
                        suffix,
                        model: NoiseModel::new(*rates, l2)
                            .map_err(|e| LabError::config("lambda2", e.to_string()))?,
                    });
                }
            }
        }
    }
    Ok(out)
}

impl Experiment {
    pub fn new(config: ExperimentConfig) -> Result<Self, LabError> {
        config.validate()?;
        let family = match &config.path {
            None => LoopFamily::NotGate,
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| LabError::config("path", format!("cannot read {}: {e}", p.display())))?;
                let spec = PathSpec::parse(&text).map_err(|e| LabError::config("path", e.to_string()))?;
                if !spec.is_closed() {
                    return Err(LabError::config("path", "loop is not closed"));
                }
                LoopFamily::Custom(spec)
            }
        };
        let variants = noise_variants(&config)?;
        let samples = bloch_samples(&config.sampling).map_err(|e| LabError::config("samples", e.to_string()))?;
        let mut columns = Vec::new();
        match config.figure {
            Figure::IdealMean => columns.push(Column {
                label: "F_mean".into(),
                kind: ColumnKind::IdealMean,
            }),
            Figure::NoisyMean | Figure::OhmicMean => {
                for (i, v) in variants.iter().enumerate() {
                    columns.push(Column {
                        label: format!("F_mean_{}", v.suffix),
                        kind: ColumnKind::NoisyMean { variant: i },
                    });
                }
            }
            Figure::PerState => {
                for state in NamedState::ALL {
                    for (i, v) in variants.iter().enumerate() {
                        columns.push(Column {
                            label: format!("F_{}_{}", state.label(), v.suffix),
                            kind: ColumnKind::State { state, variant: i },
                        });
                    }
                }
            }
        }
        Ok(Self {
            config,
            family,
            variants,
            samples,
            columns,
        })
    }

    pub fn header(&self) -> Vec<String> {
        std::iter::once("omega_tau".to_string())
            .chain(self.columns.iter().map(|c| c.label.clone()))
            .collect()
    }

    fn options(&self) -> IntegrationOptions {
        IntegrationOptions {
            steps_per_segment: self.config.steps,
            record_stride: 0,
        }
    }

    /// Value of one column at `Ωτ`.
    pub fn evaluate_column(&self, omega_tau: f64, column: usize) -> holonomy_core::Result<f64> {
        let path = self.family.at(omega_tau / OMEGA)?;
        match self.columns[column].kind {
            ColumnKind::IdealMean => mean_fidelity_over(&path, OMEGA, &self.samples),
            ColumnKind::NoisyMean { variant } => {
                ProbeChannel::new(&path, OMEGA, &self.variants[variant].model, &self.options())?
                    .mean_fidelity(&self.samples)
            }
            ColumnKind::State { state, variant } => noisy_fidelity(
                &path,
                OMEGA,
                &state.density(),
                &self.variants[variant].model,
                &self.options(),
            ),
        }
    }

    /// All columns at `Ωτ`, preceded by `Ωτ` itself.
    pub fn evaluate_row(&self, omega_tau: f64) -> holonomy_core::Result<Vec<f64>> {
        let mut row = Vec::with_capacity(self.columns.len() + 1);
        row.push(omega_tau);
        for i in 0..self.columns.len() {
            row.push(self.evaluate_column(omega_tau, i)?);
        }
        Ok(row)
    }

    /// Evaluates the whole grid in parallel; rows come back in grid order.
    pub fn run(&self) -> ExperimentOutput {
        let results: Vec<(f64, holonomy_core::Result<Vec<f64>>)> = self
            .config
            .grid()
            .into_par_iter()
            .map(|x| (x, self.evaluate_row(x)))
            .collect();
        let mut rows = Vec::new();
        let mut failures = Vec::new();
        for (x, r) in results {
            match r {
                Ok(row) => rows.push(row),
                Err(e) => failures.push(RowFailure {
                    omega_tau: x,
                    message: e.to_string(),
                }),
            }
        }
        ExperimentOutput {
            table: Table {
                header: self.header(),
                rows,
            },
            failures,
        }
    }
}

/// Runs the configured sweep and writes the CSV to `config.out`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput, LabError> {
    let exp = Experiment::new(cfg.clone())?;
    let out = exp.run();
    out.table.write(&cfg.out)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(figure: Figure) -> ExperimentConfig {
        ExperimentConfig {
            figure,
            tau_min: 5.0,
            tau_max: 20.0,
            tau_points: 3,
            steps: 200,
            ..Default::default()
        }
    }

    #[test]
    fn headers_per_figure() {
        let e = Experiment::new(small(Figure::IdealMean)).unwrap();
        assert_eq!(e.header(), vec!["omega_tau", "F_mean"]);

        let mut c = small(Figure::PerState);
        c.lambda2 = Some(vec![0.0, 0.005]);
        let e = Experiment::new(c).unwrap();
        assert_eq!(
            e.header(),
            vec![
                "omega_tau",
                "F_up_l2=0.0",
                "F_up_l2=0.005",
                "F_down_l2=0.0",
                "F_down_l2=0.005",
                "F_sym_l2=0.0",
                "F_sym_l2=0.005"
            ]
        );

        let mut c = small(Figure::OhmicMean);
        c.temperatures = vec![5.0];
        let e = Experiment::new(c.clone()).unwrap();
        assert_eq!(e.header(), vec!["omega_tau", "F_mean_T=5.0"]);
        c.lambda2 = Some(vec![0.01, 0.02]);
        let e = Experiment::new(c).unwrap();
        assert_eq!(e.header()[2], "F_mean_l2=0.02_T=5.0");

        let mut c = small(Figure::NoisyMean);
        c.lambda2 = Some(vec![0.01]);
        assert_eq!(Experiment::new(c).unwrap().header()[1], "F_mean_l2=0.01");
    }

    #[test]
    fn rows_are_in_grid_order_and_bounded() {
        let mut c = small(Figure::NoisyMean);
        c.lambda2 = Some(vec![0.0, 0.05]);
        c.sampling.count = 20;
        let out = Experiment::new(c).unwrap().run();
        assert!(out.failures.is_empty());
        let xs: Vec<f64> = out.table.rows.iter().map(|r| r[0]).collect();
        assert_eq!(xs, vec![5.0, 12.5, 20.0]);
        for r in &out.table.rows {
            for &f in &r[1..] {
                assert!((0.0..=1.0 + 1e-9).contains(&f));
            }
        }
    }

    #[test]
    fn custom_path_family() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("loop.txt");
        std::fs::write(&p, not_gate_path(3.0).unwrap().to_text()).unwrap();
        let mut c = small(Figure::IdealMean);
        c.path = Some(p.clone());
        let custom = Experiment::new(c).unwrap().run();
        let builtin = Experiment::new(small(Figure::IdealMean)).unwrap().run();
        for (a, b) in custom.table.rows.iter().zip(&builtin.table.rows) {
            assert!((a[1] - b[1]).abs() < 1e-12);
        }

        std::fs::write(&p, "0 0 1.5707963267948966 0 1\n").unwrap();
        let mut c = small(Figure::IdealMean);
        c.path = Some(p);
        let e = Experiment::new(c).unwrap_err();
        assert!(e.to_string().contains("path"));
    }
}
