//! Location of the fidelity maximum near the first revival time.

use std::fmt::Write as _;

use holonomy_core::closed_form::optimal_time;

use crate::csv::format_g12;
use crate::error::LabError;
use crate::experiment::{Experiment, OMEGA};

/// Half-width of the search window around `τ*₁`, relative to `τ*₁`.
pub const WINDOW: f64 = 0.10;
const COARSE_POINTS: usize = 41;

#[derive(Debug, Clone)]
pub struct OptimalTimeEntry {
    pub label: String,
    pub tau_star: f64,
    pub tau_max: f64,
    pub fidelity_at_max: f64,
    pub fidelity_at_tau_star: f64,
}

impl OptimalTimeEntry {
    pub fn offset(&self) -> f64 {
        self.tau_max - self.tau_star
    }

    pub fn relative_offset(&self) -> f64 {
        self.offset() / self.tau_star
    }
}

fn golden_max<F: Fn(f64) -> holonomy_core::Result<f64>>(
    f: &F,
    mut a: f64,
    mut b: f64,
    tol: f64,
) -> holonomy_core::Result<(f64, f64)> {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while b - a > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d)?;
        }
    }
    let x = 0.5 * (a + b);
    Ok((x, f(x)?))
}

/// For each column of the experiment, the maximum of the fidelity within
/// `τ*₁(1 ± 10%)`: coarse scan, then golden-section refinement.
pub fn optimal_time_report(exp: &Experiment) -> Result<Vec<OptimalTimeEntry>, LabError> {
    let tau_star = optimal_time(OMEGA);
    let lo = tau_star * (1.0 - WINDOW);
    let hi = tau_star * (1.0 + WINDOW);
    let step = (hi - lo) / (COARSE_POINTS - 1) as f64;
    let mut out = Vec::new();
    for (ci, col) in exp.columns.iter().enumerate() {
        let f = |x: f64| exp.evaluate_column(x, ci);
        let xs: Vec<f64> = (0..COARSE_POINTS).map(|i| lo + step * i as f64).collect();
        let ys = xs.iter().map(|&x| f(x)).collect::<holonomy_core::Result<Vec<_>>>()?;
        let best = ys
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .expect("non-empty scan");
        let a = xs[best.saturating_sub(1)];
        let b = xs[(best + 1).min(COARSE_POINTS - 1)];
        let (x, fx) = golden_max(&f, a, b, 1e-6)?;
        let (tau_max, fidelity_at_max) = if fx >= ys[best] { (x, fx) } else { (xs[best], ys[best]) };
        out.push(OptimalTimeEntry {
            label: col.label.clone(),
            tau_star,
            tau_max,
            fidelity_at_max,
            fidelity_at_tau_star: f(tau_star)?,
        });
    }
    Ok(out)
}

pub fn report_csv(entries: &[OptimalTimeEntry]) -> String {
    let mut s = String::from("column,tau_star,tau_max,offset,relative_offset,F_at_tau_max,F_at_tau_star\n");
    for e in entries {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            e.label,
            format_g12(e.tau_star),
            format_g12(e.tau_max),
            format_g12(e.offset()),
            format_g12(e.relative_offset()),
            format_g12(e.fidelity_at_max),
            format_g12(e.fidelity_at_tau_star)
        );
    }
    s
}
