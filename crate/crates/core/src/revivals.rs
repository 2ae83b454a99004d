//! Numerical location of fidelity revivals of the noiseless gate.

use std::f64::consts::PI;

use crate::closed_form::{omega_tau_for_alpha, revival_times};
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::path::{generalized_loop_path, not_gate_path, PathSpec};
use crate::propagator::{mean_fidelity_exact, q_operator, q_operator_for_path};

/// A revival of the NOT loop located numerically.
#[derive(Debug, Clone)]
pub struct RevivalReport {
    pub k: u32,
    /// Numerical maximum of `Re Q₁₁`, as `Ωτ`.
    pub omega_tau: f64,
    pub closed_form_omega_tau: f64,
    pub q_matrix: ComplexMatrix,
    /// Exact Bloch-averaged fidelity at `omega_tau`.
    pub mean_fidelity: f64,
}

impl RevivalReport {
    pub fn offset(&self) -> f64 {
        self.omega_tau - self.closed_form_omega_tau
    }
}

/// Five-point derivative.
fn derivative<F: Fn(f64) -> Result<f64>>(f: &F, x: f64, h: f64) -> Result<f64> {
    let d1 = f(x + h)? - f(x - h)?;
    let d2 = f(x + 2.0 * h)? - f(x - 2.0 * h)?;
    Ok((8.0 * d1 - d2) / (12.0 * h))
}

/// Maximum of a unimodal `f` on `[lo, hi]`, by bisection on the sign of
/// its derivative. Returns `None` if the derivative does not change sign.
fn maximize_bracketed<F: Fn(f64) -> Result<f64>>(f: &F, mut lo: f64, mut hi: f64) -> Result<Option<f64>> {
    let h = 1e-4;
    let mut d_lo = derivative(f, lo, h)?;
    let d_hi = derivative(f, hi, h)?;
    if !(d_lo > 0.0 && d_hi < 0.0) {
        return Ok(None);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= 1e-13 * mid.abs().max(1.0) {
            break;
        }
        let d = derivative(f, mid, h)?;
        if d == 0.0 {
            return Ok(Some(mid));
        }
        if (d > 0.0) == (d_lo > 0.0) {
            lo = mid;
            d_lo = d;
        } else {
            hi = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

fn check_range(lo: f64, hi: f64, omega: f64) -> Result<()> {
    if !(lo > 0.0) || !(hi > lo) || !hi.is_finite() {
        return Err(Error::Validation(format!(
            "revival search range must satisfy 0 < lo < hi, got [{lo}, {hi}]"
        )));
    }
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::Validation(format!("Omega must be positive, got {omega}")));
    }
    Ok(())
}

/// Revivals of the equal-time NOT loop with `τ ∈ [lo, hi]`.
///
/// Each revival is bracketed in `α = 2πk ± π/2`, where `Re Q₁₁` is
/// unimodal, and refined on the numerical propagator.
pub fn find_revivals_numeric(lo: f64, hi: f64, omega: f64) -> Result<Vec<RevivalReport>> {
    check_range(lo, hi, omega)?;
    let q11 = |x: f64| -> Result<f64> { Ok(q_operator(x)?[(0, 0)].re) };
    let (wlo, whi) = (omega * lo, omega * hi);
    let mut out = Vec::new();
    let mut k = 1u32;
    loop {
        let a = 2.0 * PI * k as f64;
        let b_lo = omega_tau_for_alpha(a - PI / 2.0);
        let b_hi = omega_tau_for_alpha(a + PI / 2.0);
        if b_lo > whi {
            break;
        }
        if b_hi >= wlo {
            if let Some(x) = maximize_bracketed(&q11, b_lo.max(1e-3), b_hi)? {
                if x >= wlo && x <= whi {
                    let closed = revival_times(k, 1, 1.0)?[k as usize - 1];
                    let path = not_gate_path(x)?;
                    out.push(RevivalReport {
                        k,
                        omega_tau: x,
                        closed_form_omega_tau: closed,
                        q_matrix: q_operator(x)?,
                        mean_fidelity: mean_fidelity_exact(&path, 1.0)?,
                    });
                }
            }
        }
        k += 1;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalMaximum {
    pub omega_tau: f64,
    pub mean_fidelity: f64,
    /// `Re Q₁₁` at the maximum.
    pub q11: f64,
}

impl LocalMaximum {
    /// A revival restores the target gate exactly; other maxima fall short.
    pub fn is_revival(&self, tol: f64) -> bool {
        1.0 - self.mean_fidelity < tol
    }
}

/// Local maxima of the exact mean fidelity of `build(τ)` over a uniform
/// grid of `points` values of `Ωτ` in `[lo, hi]`, refined between grid
/// neighbours. Works for any closed loop family (reversed, other `n`).
pub fn scan_maxima<B>(build: B, omega: f64, lo: f64, hi: f64, points: usize) -> Result<Vec<LocalMaximum>>
where
    B: Fn(f64) -> Result<PathSpec>,
{
    check_range(lo, hi, omega)?;
    if points < 3 {
        return Err(Error::Validation("scan needs at least 3 grid points".into()));
    }
    let fid = |wt: f64| -> Result<f64> { mean_fidelity_exact(&build(wt / omega)?, omega) };
    let step = (hi - lo) / (points - 1) as f64;
    let xs: Vec<f64> = (0..points).map(|i| omega * (lo + step * i as f64)).collect();
    let ys = xs.iter().map(|&x| fid(x)).collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    for i in 1..points - 1 {
        if ys[i] >= ys[i - 1] && ys[i] > ys[i + 1] {
            let x = maximize_bracketed(&fid, xs[i - 1], xs[i + 1])?.unwrap_or(xs[i]);
            let path = build(x / omega)?;
            out.push(LocalMaximum {
                omega_tau: x,
                mean_fidelity: mean_fidelity_exact(&path, omega)?,
                q11: q_operator_for_path(&path, omega)?[(0, 0)].re,
            });
        }
    }
    Ok(out)
}

/// [`scan_maxima`] for the loop with equatorial arc `π/2n`.
pub fn scan_generalized_loop(n: u32, omega: f64, lo: f64, hi: f64, points: usize) -> Result<Vec<LocalMaximum>> {
    scan_maxima(|t| generalized_loop_path(t, n), omega, lo, hi, points)
}
