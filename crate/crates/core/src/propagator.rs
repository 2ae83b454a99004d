//! Exact closed-system evolution along piecewise constant-rate loops.
//!
//! On a segment with constant angular rates the generator `D` is constant
//! and the eigenvalues are fixed, so the evolution operator factorizes as
//! `U = e^{iτD} e^{−iτ(H + D)}` in the frame basis at the segment start.
//! All propagators returned here are expressed in the `{D_i(0)}` basis of
//! the path's starting point.

use num_complex::Complex64;

use crate::closed_form;
use crate::error::{Error, Result};
use crate::linalg::{expm_hermitian, ComplexMatrix, DensityMatrix};
use crate::path::{adiabatic_holonomy, not_gate_path, PathSegment, PathSpec};
use crate::sampling::{bloch_samples, BlochSampling};
use crate::tripod::{connection_d, frame, frame_hamiltonian, SpherePoint};

/// Change of basis from the frame at `point` to the frame at `reference`:
/// entries `⟨D_i(reference)|D_j(point)⟩`.
pub fn frame_transfer(reference: SpherePoint, point: SpherePoint) -> ComplexMatrix {
    frame(reference).matrix().adjoint() * frame(point).matrix()
}

/// Per-segment propagator in the segment-start frame basis.
fn local_segment_propagator(seg: &PathSegment, omega: f64) -> Result<ComplexMatrix> {
    let d = connection_d(seg.start, seg.theta_rate, seg.phi_rate);
    let h = frame_hamiltonian(omega);
    let transport = expm_hermitian(&d, -seg.duration)?;
    let interaction = expm_hermitian(&(h + d), seg.duration)?;
    Ok(transport * interaction)
}

/// Exact propagator of one segment, in the `{D_i(reference)}` basis.
pub fn segment_propagator(
    seg: &PathSegment,
    omega: f64,
    reference: SpherePoint,
) -> Result<ComplexMatrix> {
    check_omega(omega)?;
    let local = local_segment_propagator(seg, omega)?;
    Ok(local.conjugate_by(&frame_transfer(reference, seg.start)))
}

/// Block-diagonal (adiabatic) approximation of [`segment_propagator`]: the
/// couplings of `D` between different eigenspaces are dropped from the
/// interaction-frame generator, while the frame transport is kept exact.
pub fn adiabatic_segment_propagator(
    seg: &PathSegment,
    omega: f64,
    reference: SpherePoint,
) -> Result<ComplexMatrix> {
    check_omega(omega)?;
    let d = connection_d(seg.start, seg.theta_rate, seg.phi_rate);
    let mut d_block = ComplexMatrix::zeros(4);
    d_block[(0, 1)] = d[(0, 1)];
    d_block[(1, 0)] = d[(1, 0)];
    let h = frame_hamiltonian(omega);
    let local = expm_hermitian(&d, -seg.duration)? * expm_hermitian(&(h + d_block), seg.duration)?;
    Ok(local.conjugate_by(&frame_transfer(reference, seg.start)))
}

/// Propagator of a whole loop with its per-segment factors.
#[derive(Debug, Clone)]
pub struct LoopPropagator {
    pub total: ComplexMatrix,
    pub per_segment: Vec<ComplexMatrix>,
    /// Dimensionless `Ωτ`.
    pub omega_tau: f64,
}

pub fn loop_propagator(path: &PathSpec, omega: f64) -> Result<LoopPropagator> {
    check_omega(omega)?;
    if !path.is_closed() {
        return Err(Error::Validation("loop propagator needs a closed path".into()));
    }
    let reference = path.start();
    let per_segment = path
        .segments()
        .iter()
        .map(|s| segment_propagator(s, omega, reference))
        .collect::<Result<Vec<_>>>()?;
    let total = per_segment
        .iter()
        .fold(ComplexMatrix::identity(4), |acc, u| *u * acc);
    Ok(LoopPropagator {
        total,
        per_segment,
        omega_tau: omega * path.total_time(),
    })
}

/// Ideal gate: the holonomy on `{D₀, D₁}` and dynamical phases
/// `e^{∓iΩτ}` on `D±`.
pub fn adiabatic_target(path: &PathSpec, omega: f64) -> Result<ComplexMatrix> {
    let hol = adiabatic_holonomy(path)?;
    let mut u = hol.embed(4);
    let phase = omega * path.total_time();
    u[(2, 2)] = Complex64::from_polar(1.0, -phase);
    u[(3, 3)] = Complex64::from_polar(1.0, phase);
    Ok(u)
}

/// `Q = U†·U_ad` for an arbitrary closed path.
pub fn q_operator_for_path(path: &PathSpec, omega: f64) -> Result<ComplexMatrix> {
    let u = loop_propagator(path, omega)?.total;
    Ok(u.adjoint() * adiabatic_target(path, omega)?)
}

/// `Q(Ωτ)` for the equal-time NOT loop (`Ω = 1`).
pub fn q_operator(omega_tau: f64) -> Result<ComplexMatrix> {
    q_operator_for_path(&not_gate_path(omega_tau)?, 1.0)
}

/// Segment propagators of the equal-time NOT loop next to their closed
/// forms, for oracle comparisons. Rejects paths with unequal segment times.
pub fn compare_with_closed_form(
    path: &PathSpec,
    omega: f64,
) -> Result<(Vec<ComplexMatrix>, [ComplexMatrix; 3])> {
    if path.segments().len() != 3 || !path.has_equal_segment_times() {
        return Err(Error::Validation(
            "closed forms apply only to the three-arc loop covered in equal times".into(),
        ));
    }
    if (path.solid_angle() - std::f64::consts::FRAC_PI_2).abs() > 1e-12 {
        return Err(Error::Validation("closed forms apply only to the NOT loop".into()));
    }
    let numeric = loop_propagator(path, omega)?.per_segment;
    let (u1, u2, u3) = closed_form::appendix_a_closed_form(omega * path.total_time())?;
    Ok((numeric, [u1, u2, u3]))
}

fn check_computational(initial: &DensityMatrix) -> Result<()> {
    if !initial.is_pure(1e-8) {
        return Err(Error::Validation("initial state must be pure".into()));
    }
    let m = initial.matrix();
    let leak = (0..4)
        .flat_map(|i| (0..4).map(move |j| (i, j)))
        .filter(|&(i, j)| i >= 2 || j >= 2)
        .map(|(i, j)| m[(i, j)].norm())
        .fold(0.0, f64::max);
    if leak > 1e-12 {
        return Err(Error::Validation(format!(
            "initial state has support outside the computational space (|entry| = {leak:.3e})"
        )));
    }
    Ok(())
}

/// `F = Tr{U_ad σ(0) U_ad† · U σ(0) U†}` for a pure computational state.
pub fn fidelity_noiseless(path: &PathSpec, omega: f64, initial: &DensityMatrix) -> Result<f64> {
    check_computational(initial)?;
    let u = loop_propagator(path, omega)?.total;
    let target = adiabatic_target(path, omega)?;
    Ok(fidelity_from_unitaries(&u, &target, initial))
}

fn fidelity_from_unitaries(u: &ComplexMatrix, target: &ComplexMatrix, initial: &DensityMatrix) -> f64 {
    let actual = initial.matrix().conjugate_by(u);
    let ideal = initial.matrix().conjugate_by(target);
    (ideal * actual).trace().re
}

/// Mean of [`fidelity_noiseless`] over the given initial states.
pub fn mean_fidelity_over(path: &PathSpec, omega: f64, states: &[DensityMatrix]) -> Result<f64> {
    if states.is_empty() {
        return Err(Error::Validation("no initial states to average over".into()));
    }
    let u = loop_propagator(path, omega)?.total;
    let target = adiabatic_target(path, omega)?;
    let mut sum = 0.0;
    for s in states {
        check_computational(s)?;
        sum += fidelity_from_unitaries(&u, &target, s);
    }
    Ok(sum / states.len() as f64)
}

pub fn mean_fidelity_noiseless(path: &PathSpec, omega: f64, samples: &BlochSampling) -> Result<f64> {
    mean_fidelity_over(path, omega, &bloch_samples(samples)?)
}

/// Exact uniform Bloch-sphere average of the noiseless fidelity, from
/// `∫|⟨ψ|M|ψ⟩|² dψ = (Tr MM† + |Tr M|²)/6` with `M` the computational block
/// of `U_ad†U`.
pub fn mean_fidelity_exact(path: &PathSpec, omega: f64) -> Result<f64> {
    let q = q_operator_for_path(path, omega)?;
    let m = q.adjoint().top_left(2);
    let tr = m.trace();
    Ok(((m * m.adjoint()).trace().re + tr.norm_sqr()) / 6.0)
}

fn check_omega(omega: f64) -> Result<()> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::Validation(format!("Omega must be positive, got {omega}")));
    }
    Ok(())
}
