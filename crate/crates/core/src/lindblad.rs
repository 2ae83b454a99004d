//! Markovian master equation for the tripod gate in the moving frame.
//!
//! The state `ρ_R` is written in the instantaneous eigenbasis
//! `(D₀, D₁, D₊, D₋)` of the current point on the loop and obeys
//!
//! ```text
//! ρ̇_R = −i[H₀ + D, ρ_R] + λ² Σ_{αβ} f_{αβ}(t) ( iΔ_{αβ}[P_α, ρ_R]
//!        − Γ_{αβ}/2 ({P_α, ρ_R} − 2 L_{αβ}† ρ_R L_{αβ}) )
//! ```
//!
//! with `H₀ = diag(0, 0, Ω, −Ω)`, `L_{αβ} = |D_α⟩⟨D_β|` and `P_α = L L†`.
//! Lab-frame states are reported in the `{D_i}` basis of the loop's
//! starting point, like the closed-system propagators.

use num_complex::Complex64;

use crate::bath::RateTable;
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, DensityMatrix, StateVector};
use crate::path::{PathSegment, PathSpec};
use crate::propagator::{adiabatic_target, frame_transfer};
use crate::tripod::{connection_d, frame, frame_hamiltonian, Level, SpherePoint};

/// Angular weight of the `(α, β)` channel at `p`.
///
/// Only pairs with a bright index contribute:
/// `f_{α0} = cos²φ/2`, `f_{α1} = sin²φ cos²ϑ/2`, `f_{α±} = sin²φ sin²ϑ/4`
/// for bright `α`, extended symmetrically.
pub fn f_coefficient(alpha: Level, beta: Level, p: SpherePoint) -> f64 {
    let (bright, other) = match (alpha.is_bright(), beta.is_bright()) {
        (false, false) => return 0.0,
        (true, _) => (alpha, beta),
        (false, true) => (beta, alpha),
    };
    debug_assert!(bright.is_bright());
    let (sp, cp) = p.phi.sin_cos();
    let (st, ct) = p.theta.sin_cos();
    match other {
        Level::Dark0 => cp * cp / 2.0,
        Level::Dark1 => sp * sp * ct * ct / 2.0,
        Level::BrightPlus | Level::BrightMinus => sp * sp * st * st / 4.0,
    }
}

/// [`f_coefficient`] with raw frame indices.
pub fn f_coefficient_indexed(alpha: usize, beta: usize, p: SpherePoint) -> Result<f64> {
    Ok(f_coefficient(Level::from_index(alpha)?, Level::from_index(beta)?, p))
}

/// `L_{αβ} = |D_α⟩⟨D_β|` in the frame basis.
pub fn lindblad_operator(alpha: Level, beta: Level) -> ComplexMatrix {
    ComplexMatrix::outer(&StateVector::basis(4, alpha.index()), &StateVector::basis(4, beta.index()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub rates: RateTable,
    /// Dimensionless coupling `λ²`.
    pub lambda2: f64,
}

impl NoiseModel {
    pub fn new(rates: RateTable, lambda2: f64) -> Result<Self> {
        if !(lambda2 >= 0.0) || !lambda2.is_finite() {
            return Err(Error::Validation(format!(
                "lambda2 must be non-negative, got {lambda2}"
            )));
        }
        rates.validate()?;
        Ok(Self { rates, lambda2 })
    }

    pub fn noiseless() -> Self {
        Self {
            rates: RateTable::zeros(),
            lambda2: 0.0,
        }
    }

    /// `lambda2=<value>` followed by the rate table lines.
    pub fn to_config(&self) -> String {
        format!("lambda2={:?}\n{}", self.lambda2, self.rates.to_config())
    }

    pub fn parse_config(text: &str) -> Result<Self> {
        let mut rates = RateTable::zeros();
        let mut lambda2 = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::Parse {
                line: i + 1,
                message,
            };
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected key=value, got '{line}'")))?;
            let k = k.trim();
            if k == "lambda2" {
                lambda2 = Some(
                    v.trim()
                        .parse::<f64>()
                        .map_err(|_| err(format!("lambda2: '{}' is not a number", v.trim())))?,
                );
                continue;
            }
            match rates.apply_config_entry(k, v) {
                Ok(true) => {}
                Ok(false) => return Err(err(format!("unknown key '{k}'"))),
                Err(e) => return Err(err(e.to_string())),
            }
        }
        let lambda2 = lambda2.ok_or_else(|| Error::Validation("lambda2 is missing".into()))?;
        Self::new(rates, lambda2)
    }
}

/// Coefficients of the dissipator at one point: `ρ ↦ (c_i + c_j*) ρ_ij`
/// plus the feeding term `δ_ij Σ_α g_{αi} ρ_αα`.
#[derive(Debug, Clone, Copy)]
struct DissipatorCoefficients {
    c: [Complex64; 4],
    gain: [[f64; 4]; 4],
}

impl DissipatorCoefficients {
    fn at(p: SpherePoint, rates: &RateTable, scale: f64) -> Self {
        let mut c = [Complex64::new(0.0, 0.0); 4];
        let mut gain = [[0.0; 4]; 4];
        for a in Level::ALL {
            for b in Level::ALL {
                let w = scale * f_coefficient(a, b, p);
                if w == 0.0 {
                    continue;
                }
                let g = rates.gamma(a, b);
                c[a.index()] += Complex64::new(-0.5 * g, rates.delta(a, b)) * w;
                gain[a.index()][b.index()] = w * g;
            }
        }
        Self { c, gain }
    }

    fn apply(&self, rho: &ComplexMatrix, out: &mut ComplexMatrix) {
        for i in 0..4 {
            for j in 0..4 {
                out[(i, j)] += (self.c[i] + self.c[j].conj()) * rho[(i, j)];
            }
        }
        for a in 0..4 {
            let pop = rho[(a, a)];
            for b in 0..4 {
                if self.gain[a][b] != 0.0 {
                    out[(b, b)] += pop * self.gain[a][b];
                }
            }
        }
    }
}

/// `Σ f_{αβ}(p)(iΔ[P_α, ρ] − Γ/2({P_α, ρ} − 2L†ρL))` without the `λ²`
/// prefactor, which the caller applies.
pub fn dissipator(rho: &ComplexMatrix, p: SpherePoint, rates: &RateTable) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(4);
    DissipatorCoefficients::at(p, rates, 1.0).apply(rho, &mut out);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IntegrationOptions {
    /// RK4 steps on each segment; at least 100.
    pub steps_per_segment: usize,
    /// Record every `record_stride` steps; `0` keeps only the endpoints.
    pub record_stride: usize,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        Self {
            steps_per_segment: 2000,
            record_stride: 100,
        }
    }
}

/// Hermiticity drift tolerated before a step is rejected.
pub const HERMITICITY_DRIFT_BOUND: f64 = 1e-8;
/// Trace drift tolerated before the run is rejected.
pub const TRACE_DRIFT_BOUND: f64 = 1e-6;

/// Worst-case invariant residues over a run. Trace and Hermiticity are
/// checked after every step; eigenvalues only on recorded samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantReport {
    pub max_trace_error: f64,
    pub max_hermiticity_residue: f64,
    pub min_eigenvalue: f64,
}

impl InvariantReport {
    pub fn within(&self, trace: f64, hermiticity: f64, eigenvalue_floor: f64) -> bool {
        self.max_trace_error < trace
            && self.max_hermiticity_residue < hermiticity
            && self.min_eigenvalue >= eigenvalue_floor
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// Moving-frame states `ρ_R`.
    pub states_r: Vec<DensityMatrix>,
    /// States in the `{D_i}` basis of the starting point.
    pub states_lab: Vec<DensityMatrix>,
    /// `Tr(σ_ad σ)` against adiabatic transport of the initial state.
    pub fidelity: Vec<f64>,
    pub invariants: InvariantReport,
}

impl Trajectory {
    pub fn final_state(&self) -> &DensityMatrix {
        self.states_lab.last().expect("trajectory has samples")
    }

    pub fn final_fidelity(&self) -> f64 {
        *self.fidelity.last().expect("trajectory has samples")
    }
}

fn check_support(initial: &DensityMatrix) -> Result<()> {
    let m = initial.matrix();
    for i in 0..4 {
        for j in 0..4 {
            if (i >= 2 || j >= 2) && m[(i, j)].norm() > 1e-12 {
                return Err(Error::Validation(
                    "initial state must be supported on the computational space".into(),
                ));
            }
        }
    }
    Ok(())
}

/// Adiabatic transport over time `s` of one segment, in its local frame:
/// rotation of the dark pair by `φ̇ cos ϑ · s` and dynamical phases on `D±`.
fn adiabatic_local(seg: &PathSegment, omega: f64, s: f64) -> ComplexMatrix {
    let a = seg.phi_rate * seg.start.theta.cos() * s;
    let (sa, ca) = a.sin_cos();
    let mut u = ComplexMatrix::zeros(4);
    u[(0, 0)] = Complex64::new(ca, 0.0);
    u[(0, 1)] = Complex64::new(-sa, 0.0);
    u[(1, 0)] = Complex64::new(sa, 0.0);
    u[(1, 1)] = Complex64::new(ca, 0.0);
    u[(2, 2)] = Complex64::from_polar(1.0, -omega * s);
    u[(3, 3)] = Complex64::from_polar(1.0, omega * s);
    u
}

struct Recorder {
    stride: usize,
    f0_adj: ComplexMatrix,
    initial: ComplexMatrix,
    traj: Trajectory,
}

impl Recorder {
    fn record(&mut self, t: f64, rho: &ComplexMatrix, point: SpherePoint, v_ad: &ComplexMatrix) {
        let b = self.f0_adj * frame(point).matrix();
        let lab = rho.conjugate_by(&b);
        let ideal = self.initial.conjugate_by(&(b * *v_ad));
        let fid = (ideal * lab).trace().re;
        let rho_dm = DensityMatrix::new_unchecked(*rho);
        let inv = &mut self.traj.invariants;
        inv.min_eigenvalue = inv.min_eigenvalue.min(rho_dm.min_eigenvalue());
        self.traj.times.push(t);
        self.traj.states_r.push(rho_dm);
        self.traj.states_lab.push(DensityMatrix::new_unchecked(lab));
        self.traj.fidelity.push(fid);
    }
}

/// Fixed-step RK4 integration of the master equation along `path`.
///
/// `D` is constant on each segment, while the angular weights `f_{αβ}`
/// follow the point `(ϑ(t), φ(t))` and are evaluated at the RK4 substeps.
pub fn integrate_master_equation(
    path: &PathSpec,
    omega: f64,
    initial: &DensityMatrix,
    model: &NoiseModel,
    options: &IntegrationOptions,
) -> Result<Trajectory> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::Validation(format!("Omega must be positive, got {omega}")));
    }
    if options.steps_per_segment < 100 {
        return Err(Error::Validation(format!(
            "steps_per_segment must be at least 100, got {}",
            options.steps_per_segment
        )));
    }
    if !(model.lambda2 >= 0.0) {
        return Err(Error::Validation("lambda2 must be non-negative".into()));
    }
    check_support(initial)?;

    let steps = options.steps_per_segment;
    let mut rec = Recorder {
        stride: options.record_stride,
        f0_adj: frame(path.start()).matrix().adjoint(),
        initial: *initial.matrix(),
        traj: Trajectory {
            times: Vec::new(),
            states_r: Vec::new(),
            states_lab: Vec::new(),
            fidelity: Vec::new(),
            invariants: InvariantReport {
                max_trace_error: (initial.matrix().trace().re - 1.0).abs(),
                max_hermiticity_residue: initial.matrix().hermiticity_residue(),
                min_eigenvalue: f64::INFINITY,
            },
        },
    };
    let mut rho = *initial.matrix();
    let mut v_ad = ComplexMatrix::identity(4);
    rec.record(0.0, &rho, path.start(), &v_ad);

    let h0 = frame_hamiltonian(omega);
    let noisy = model.lambda2 > 0.0;
    let mut t_start = 0.0;
    let mut step_count = 0usize;
    let mut prev_end: Option<SpherePoint> = None;
    let n_seg = path.segments().len();

    for (seg_idx, seg) in path.segments().iter().enumerate() {
        if let Some(end) = prev_end {
            // Re-express the state if the frame jumps (a pole crossed with a
            // discontinuous φ label).
            let t = frame_transfer(seg.start, end);
            rho = rho.conjugate_by(&t);
            v_ad = t * v_ad;
        }
        let h = h0 + connection_d(seg.start, seg.theta_rate, seg.phi_rate);
        let minus_i_h = h.scale(Complex64::new(0.0, -1.0));
        let dt = seg.duration / steps as f64;
        let rhs = |s: f64, r: &ComplexMatrix| -> ComplexMatrix {
            let mut out = minus_i_h * *r - *r * minus_i_h;
            if noisy {
                DissipatorCoefficients::at(seg.point_at(s), &model.rates, model.lambda2)
                    .apply(r, &mut out);
            }
            out
        };
        let v_seg_start = v_ad;
        for k in 0..steps {
            let s = k as f64 * dt;
            let k1 = rhs(s, &rho);
            let k2 = rhs(s + 0.5 * dt, &(rho + k1.scale_real(0.5 * dt)));
            let k3 = rhs(s + 0.5 * dt, &(rho + k2.scale_real(0.5 * dt)));
            let k4 = rhs(s + dt, &(rho + k3.scale_real(dt)));
            let next = rho + (k1 + k2.scale_real(2.0) + k3.scale_real(2.0) + k4).scale_real(dt / 6.0);

            let t_now = t_start + (k + 1) as f64 * dt;
            let herm = next.hermiticity_residue();
            rho = next.hermitize(HERMITICITY_DRIFT_BOUND).map_err(|_| {
                Error::IntegrationDiverged(format!(
                    "Hermiticity residue {herm:.3e} at t = {t_now:.6} exceeds {HERMITICITY_DRIFT_BOUND:e}"
                ))
            })?;
            let trace_err = (rho.trace().re - 1.0).abs();
            if !(trace_err <= TRACE_DRIFT_BOUND) {
                return Err(Error::IntegrationDiverged(format!(
                    "trace drifted by {trace_err:.3e} at t = {t_now:.6} with {steps} steps per segment"
                )));
            }
            let inv = &mut rec.traj.invariants;
            inv.max_trace_error = inv.max_trace_error.max(trace_err);
            inv.max_hermiticity_residue = inv.max_hermiticity_residue.max(herm);

            step_count += 1;
            let last = seg_idx + 1 == n_seg && k + 1 == steps;
            if last || (rec.stride > 0 && step_count.is_multiple_of(rec.stride)) {
                let s_now = (k + 1) as f64 * dt;
                let v = adiabatic_local(seg, omega, s_now) * v_seg_start;
                rec.record(t_now, &rho, seg.point_at(s_now), &v);
            }
        }
        v_ad = adiabatic_local(seg, omega, seg.duration) * v_seg_start;
        t_start += seg.duration;
        prev_end = Some(seg.end());
    }
    Ok(rec.traj)
}

/// `Tr(U_ad σ₀ U_ad† · σ(τ))` for one initial state on a closed loop.
pub fn noisy_fidelity(
    path: &PathSpec,
    omega: f64,
    initial: &DensityMatrix,
    model: &NoiseModel,
    options: &IntegrationOptions,
) -> Result<f64> {
    let target = adiabatic_target(path, omega)?;
    let opts = IntegrationOptions {
        record_stride: 0,
        ..*options
    };
    let traj = integrate_master_equation(path, omega, initial, model, &opts)?;
    let ideal = initial.matrix().conjugate_by(&target);
    Ok((ideal * *traj.final_state().matrix()).trace().re)
}

/// Final-time map of a closed loop, reconstructed by linearity from the
/// images of `|0⟩`, `|1⟩`, `|+⟩` and `|+i⟩`.
#[derive(Debug, Clone)]
pub struct ProbeChannel {
    outputs: [ComplexMatrix; 4],
    target: ComplexMatrix,
    invariants: [InvariantReport; 4],
}

fn probe_states() -> [StateVector; 4] {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let z = Complex64::new(0.0, 0.0);
    [
        StateVector::basis(4, 0),
        StateVector::basis(4, 1),
        StateVector::from_real(&[r, r, 0.0, 0.0]),
        StateVector::from_amplitudes(&[Complex64::new(r, 0.0), Complex64::new(0.0, r), z, z]),
    ]
}

impl ProbeChannel {
    pub fn new(
        path: &PathSpec,
        omega: f64,
        model: &NoiseModel,
        options: &IntegrationOptions,
    ) -> Result<Self> {
        let target = adiabatic_target(path, omega)?;
        let opts = IntegrationOptions {
            record_stride: 0,
            ..*options
        };
        let mut outputs = [ComplexMatrix::zeros(4); 4];
        let mut invariants = [InvariantReport {
            max_trace_error: 0.0,
            max_hermiticity_residue: 0.0,
            min_eigenvalue: 0.0,
        }; 4];
        for (k, psi) in probe_states().iter().enumerate() {
            let rho = DensityMatrix::pure(psi)?;
            let traj = integrate_master_equation(path, omega, &rho, model, &opts)?;
            outputs[k] = *traj.final_state().matrix();
            invariants[k] = traj.invariants;
        }
        Ok(Self {
            outputs,
            target,
            invariants,
        })
    }

    pub fn invariants(&self) -> &[InvariantReport; 4] {
        &self.invariants
    }

    /// Final lab-frame state for an initial state on the computational
    /// space.
    pub fn apply(&self, initial: &DensityMatrix) -> Result<ComplexMatrix> {
        check_support(initial)?;
        let m = initial.matrix();
        let p = m[(0, 0)].re;
        let z = m[(0, 1)];
        let c = 2.0 * z.re;
        let d = -2.0 * z.im;
        let a = p - 0.5 * (c + d);
        let b = (1.0 - p) - 0.5 * (c + d);
        Ok(self.outputs[0].scale_real(a)
            + self.outputs[1].scale_real(b)
            + self.outputs[2].scale_real(c)
            + self.outputs[3].scale_real(d))
    }

    pub fn fidelity(&self, initial: &DensityMatrix) -> Result<f64> {
        let out = self.apply(initial)?;
        let ideal = initial.matrix().conjugate_by(&self.target);
        Ok((ideal * out).trace().re)
    }

    pub fn mean_fidelity(&self, states: &[DensityMatrix]) -> Result<f64> {
        if states.is_empty() {
            return Err(Error::Validation("no initial states to average over".into()));
        }
        let mut sum = 0.0;
        for s in states {
            sum += self.fidelity(s)?;
        }
        Ok(sum / states.len() as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::fixed_rates_preset;
    use crate::closed_form::optimal_time;
    use crate::path::not_gate_path;
    use crate::propagator::{fidelity_noiseless, loop_propagator};
    use crate::sampling::{axis_states, bloch_samples, BlochSampling, NamedState};
    use proptest::prelude::*;
    use std::f64::consts::PI;
    use Level::{BrightMinus as M, BrightPlus as P, Dark0 as D0, Dark1 as D1};

    fn pt(theta: f64, phi: f64) -> SpherePoint {
        SpherePoint::new(theta, phi).unwrap()
    }

    fn reference_dissipator(rho: &ComplexMatrix, p: SpherePoint, rates: &RateTable) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(4);
        for a in Level::ALL {
            for b in Level::ALL {
                let f = f_coefficient(a, b, p);
                let l = lindblad_operator(a, b);
                let proj = l * l.adjoint();
                let lamb = proj.commutator(rho).scale(Complex64::new(0.0, rates.delta(a, b)));
                let decay = (proj.anticommutator(rho) - (l.adjoint() * *rho * l).scale_real(2.0))
                    .scale_real(rates.gamma(a, b) / 2.0);
                out += (lamb - decay).scale_real(f);
            }
        }
        out
    }

    #[test]
    fn f_examples() {
        assert!((f_coefficient(P, D0, pt(0.3, 0.0)) - 0.5).abs() < 1e-15);
        assert_eq!(f_coefficient(D0, D1, pt(1.0, 0.7)), 0.0);
        assert_eq!(f_coefficient(D0, D0, pt(1.0, 0.7)), 0.0);
        assert!((f_coefficient(P, M, pt(PI / 2.0, PI / 2.0)) - 0.25).abs() < 1e-15);
        assert!(f_coefficient_indexed(4, 0, pt(0.0, 0.0)).is_err());
        assert_eq!(f_coefficient_indexed(2, 0, pt(0.0, 0.0)).unwrap(), 0.5);
    }

    #[test]
    fn lindblad_operator_examples() {
        let l00 = lindblad_operator(D0, D0);
        assert!(l00.approx_eq(&StateVector::basis(4, 0).projector(), 0.0));
        assert!(lindblad_operator(P, D1).adjoint().approx_eq(&lindblad_operator(D1, P), 0.0));
        let l = lindblad_operator(P, D1);
        assert!((l * l.adjoint()).approx_eq(&StateVector::basis(4, 2).projector(), 0.0));
    }

    #[test]
    fn dissipator_examples() {
        let rho = ComplexMatrix::identity(4).scale_real(0.25);
        let p = pt(0.9, 0.4);
        assert!(dissipator(&rho, p, &RateTable::zeros()).max_abs() == 0.0);
        let out = dissipator(&rho, p, &fixed_rates_preset());
        assert!(out.hermiticity_residue() < 1e-14);
        assert!(out.trace().norm() < 1e-12);

        let plus = StateVector::basis(4, 2).projector();
        let pole = pt(0.0, 0.0);
        let out = dissipator(&plus, pole, &fixed_rates_preset());
        assert!(out.trace().norm() < 1e-12);
        // Only the |D₊⟩ → |D₀⟩ channel (f = 1/2, Γ = 1.1) acts.
        assert!((out[(2, 2)].re + 0.55).abs() < 1e-14);
        assert!((out[(0, 0)].re - 0.55).abs() < 1e-14);
        assert!(out[(1, 1)].norm() < 1e-15 && out[(3, 3)].norm() < 1e-15);
    }

    fn arb_density() -> impl Strategy<Value = ComplexMatrix> {
        prop::collection::vec(-1.0f64..1.0, 32).prop_map(|v| {
            let mut a = ComplexMatrix::zeros(4);
            for i in 0..4 {
                for j in 0..4 {
                    a[(i, j)] = Complex64::new(v[2 * (4 * i + j)], v[2 * (4 * i + j) + 1]);
                }
            }
            let m = a * a.adjoint();
            let tr = m.trace().re.max(1e-9);
            m.scale_real(1.0 / tr)
        })
    }

    proptest! {
        #[test]
        fn dissipator_matches_operator_form(rho in arb_density(), th in 0.0..PI, ph in -3.0..3.0f64) {
            let p = pt(th, ph);
            let fast = dissipator(&rho, p, &fixed_rates_preset());
            let slow = reference_dissipator(&rho, p, &fixed_rates_preset());
            prop_assert!(fast.max_abs_diff(&slow) < 1e-13);
            prop_assert!(fast.hermiticity_residue() < 1e-13);
            prop_assert!(fast.trace().norm() < 1e-12);
        }
    }

    #[test]
    fn noise_model_config_round_trip() {
        let m = NoiseModel::new(fixed_rates_preset(), 0.005).unwrap();
        let text = m.to_config();
        assert!(text.starts_with("lambda2=0.005\n"));
        assert_eq!(NoiseModel::parse_config(&text).unwrap(), m);
        assert!(NoiseModel::parse_config("gamma.+0=1").is_err());
        assert!(NoiseModel::parse_config("lambda2=-1").is_err());
        assert!(matches!(
            NoiseModel::parse_config("lambda2=0\nbogus=1"),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn noiseless_run_matches_unitary_oracle() {
        let path = not_gate_path(20.0).unwrap();
        let u = loop_propagator(&path, 1.0).unwrap().total;
        for s in NamedState::ALL {
            let rho = s.density();
            let traj = integrate_master_equation(&path, 1.0, &rho, &NoiseModel::noiseless(), &Default::default())
                .unwrap();
            let exact = rho.matrix().conjugate_by(&u);
            assert!(traj.final_state().matrix().max_abs_diff(&exact) < 1e-6);
            let f = fidelity_noiseless(&path, 1.0, &rho).unwrap();
            assert!((traj.final_fidelity() - f).abs() < 1e-6);
            assert!(traj.invariants.within(1e-8, 1e-8, -1e-6));
        }
    }

    #[test]
    fn frozen_hamiltonian_conserves_populations() {
        // Zero-rate segment: D vanishes, so only H₀ acts.
        let seg = PathSegment::new(pt(0.7, 0.2), 0.0, 0.0, 5.0).unwrap();
        let path = PathSpec::new(vec![seg]).unwrap();
        let psi = StateVector::from_real(&[0.6, 0.8, 0.0, 0.0]);
        let rho = DensityMatrix::pure(&psi).unwrap();
        let traj =
            integrate_master_equation(&path, 1.0, &rho, &NoiseModel::noiseless(), &Default::default()).unwrap();
        for s in &traj.states_r {
            for i in 0..4 {
                assert!((s.matrix()[(i, i)] - rho.matrix()[(i, i)]).norm() < 1e-12);
            }
        }
        assert!((traj.final_fidelity() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn trajectory_records_and_validates() {
        let path = not_gate_path(10.0).unwrap();
        let opts = IntegrationOptions {
            steps_per_segment: 200,
            record_stride: 50,
        };
        let model = NoiseModel::new(fixed_rates_preset(), 0.02).unwrap();
        let traj = integrate_master_equation(&path, 1.0, &NamedState::Up.density(), &model, &opts).unwrap();
        assert_eq!(traj.times.len(), 1 + 600 / 50);
        assert!(traj.times.windows(2).all(|w| w[1] > w[0]));
        assert!((traj.times.last().unwrap() - 10.0).abs() < 1e-12);
        assert_eq!(traj.fidelity[0], 1.0);
        assert!(traj.invariants.within(1e-8, 1e-8, -1e-6));
        for s in &traj.states_lab {
            assert!((s.matrix().trace().re - 1.0).abs() < 1e-8);
        }

        let few = IntegrationOptions {
            steps_per_segment: 99,
            record_stride: 0,
        };
        assert!(integrate_master_equation(&path, 1.0, &NamedState::Up.density(), &model, &few).is_err());
        let bright = DensityMatrix::pure(&StateVector::basis(4, 3)).unwrap();
        assert!(integrate_master_equation(&path, 1.0, &bright, &model, &opts).is_err());
    }

    #[test]
    fn weak_noise_at_optimal_time() {
        let path = not_gate_path(optimal_time(1.0)).unwrap();
        let model = NoiseModel::new(fixed_rates_preset(), 0.005).unwrap();
        for s in NamedState::ALL {
            let f = noisy_fidelity(&path, 1.0, &s.density(), &model, &Default::default()).unwrap();
            assert!(f > 0.9 && f < 1.0, "{}: {f}", s.label());
        }
    }

    #[test]
    fn fidelity_decreases_with_coupling() {
        let path = not_gate_path(optimal_time(1.0)).unwrap();
        let opts = IntegrationOptions {
            steps_per_segment: 500,
            record_stride: 0,
        };
        for s in NamedState::ALL {
            let mut prev = f64::INFINITY;
            for l2 in [0.0, 0.01, 0.03, 0.05] {
                let model = NoiseModel::new(fixed_rates_preset(), l2).unwrap();
                let f = noisy_fidelity(&path, 1.0, &s.density(), &model, &opts).unwrap();
                assert!(f <= prev + 1e-12);
                prev = f;
            }
        }
    }

    #[test]
    fn probe_channel_reproduces_direct_runs() {
        let path = not_gate_path(14.0).unwrap();
        let model = NoiseModel::new(fixed_rates_preset(), 0.03).unwrap();
        let opts = IntegrationOptions {
            steps_per_segment: 300,
            record_stride: 0,
        };
        let ch = ProbeChannel::new(&path, 1.0, &model, &opts).unwrap();
        let states = bloch_samples(&BlochSampling::fibonacci(5)).unwrap();
        for s in &states {
            let direct = noisy_fidelity(&path, 1.0, s, &model, &opts).unwrap();
            assert!((ch.fidelity(s).unwrap() - direct).abs() < 1e-12);
        }
        let mean_axes = ch.mean_fidelity(&axis_states()).unwrap();
        let mean_lattice = ch.mean_fidelity(&bloch_samples(&BlochSampling::fibonacci(2000)).unwrap()).unwrap();
        assert!((mean_axes - mean_lattice).abs() < 1e-3);
        assert!(ch.invariants().iter().all(|r| r.within(1e-8, 1e-8, -1e-6)));
    }

    #[test]
    fn probe_channel_without_noise_matches_exact_mean() {
        let path = not_gate_path(20.0).unwrap();
        let ch = ProbeChannel::new(&path, 1.0, &NoiseModel::noiseless(), &Default::default()).unwrap();
        let exact = crate::propagator::mean_fidelity_exact(&path, 1.0).unwrap();
        assert!((ch.mean_fidelity(&axis_states()).unwrap() - exact).abs() < 1e-6);
    }
}
