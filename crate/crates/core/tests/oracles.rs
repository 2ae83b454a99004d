use holonomy_core::bath::{fixed_rates_preset, rates_from_bath, OhmicBath};
use holonomy_core::closed_form::{optimal_time, q11_closed_form, revival_times};
use holonomy_core::lindblad::{
    integrate_master_equation, noisy_fidelity, IntegrationOptions, NoiseModel, ProbeChannel,
};
use holonomy_core::path::{generalized_loop_path, not_gate_path};
use holonomy_core::propagator::{loop_propagator, mean_fidelity_exact, q_operator};
use holonomy_core::sampling::{axis_states, NamedState};
use holonomy_core::PathSpec;

#[test]
fn q11_closed_form_over_a_grid() {
    for i in 1..=200 {
        let wt = 0.5 * i as f64;
        let q = q_operator(wt).unwrap();
        assert!((q[(0, 0)].re - q11_closed_form(wt)).abs() < 1e-10, "Ωτ = {wt}");
    }
}

#[test]
fn parsed_path_reproduces_builtin_loop() {
    let path = not_gate_path(27.0).unwrap();
    let again = PathSpec::parse(&path.to_text()).unwrap();
    let a = loop_propagator(&path, 1.0).unwrap().total;
    let b = loop_propagator(&again, 1.0).unwrap().total;
    assert!(a.max_abs_diff(&b) < 1e-12);
}

#[test]
fn master_equation_reduces_to_propagator_at_revival() {
    let path = not_gate_path(optimal_time(1.0)).unwrap();
    let u = loop_propagator(&path, 1.0).unwrap().total;
    for s in axis_states() {
        let traj =
            integrate_master_equation(&path, 1.0, &s, &NoiseModel::noiseless(), &Default::default()).unwrap();
        let exact = s.matrix().conjugate_by(&u);
        assert!(traj.final_state().matrix().max_abs_diff(&exact) < 1e-6);
        assert!((traj.final_fidelity() - 1.0).abs() < 1e-6);
    }
}

#[test]
fn generalized_loop_closes_and_revives() {
    for (k, t) in revival_times(2, 3, 1.0).unwrap().into_iter().enumerate() {
        let path = generalized_loop_path(t, 3).unwrap();
        let f = mean_fidelity_exact(&path, 1.0).unwrap();
        assert!((f - 1.0).abs() < 1e-9, "k = {}: {f}", k + 1);
    }
}

#[test]
fn ohmic_noise_costs_a_few_percent_at_optimal_time() {
    let path = not_gate_path(optimal_time(1.0)).unwrap();
    let opts = IntegrationOptions {
        steps_per_segment: 500,
        record_stride: 0,
    };
    for t in [0.1, 10.0] {
        let rates = rates_from_bath(&OhmicBath::new(0.01, 100.0, t).unwrap()).unwrap();
        let model = NoiseModel::new(rates, 0.01).unwrap();
        let ch = ProbeChannel::new(&path, 1.0, &model, &opts).unwrap();
        let f = ch.mean_fidelity(&axis_states()).unwrap();
        assert!(f > 0.95 && f < 1.0, "T = {t}: {f}");
    }
}

#[test]
fn probe_channel_matches_direct_runs_per_state() {
    let path = not_gate_path(optimal_time(1.0)).unwrap();
    let model = NoiseModel::new(fixed_rates_preset(), 0.02).unwrap();
    let opts = IntegrationOptions {
        steps_per_segment: 500,
        record_stride: 0,
    };
    let ch = ProbeChannel::new(&path, 1.0, &model, &opts).unwrap();
    for s in NamedState::ALL {
        let direct = noisy_fidelity(&path, 1.0, &s.density(), &model, &opts).unwrap();
        assert!(direct > 0.8 && direct < 1.0, "{}: {direct}", s.label());
        assert!((ch.fidelity(&s.density()).unwrap() - direct).abs() < 1e-10);
    }
}
