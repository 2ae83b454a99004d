//! Analytic expressions for the equal-time NOT loop, used as oracles for the
//! numerical propagators.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

/// `α = √(9π² + 4Ω²τ²)/6`.
pub fn alpha(omega_tau: f64) -> f64 {
    (9.0 * PI * PI + 4.0 * omega_tau * omega_tau).sqrt() / 6.0
}

/// `α′ = (Ωτ/3)·√(1 + (3π/(2Ωτ))²)`; equal to [`alpha`] for `Ωτ > 0`.
pub fn alpha_prime(omega_tau: f64) -> f64 {
    let x = 3.0 * PI / (2.0 * omega_tau);
    omega_tau / 3.0 * (1.0 + x * x).sqrt()
}

/// `Ωτ` at which [`alpha`] takes the value `a` (`a ≥ π/2`).
pub fn omega_tau_for_alpha(a: f64) -> f64 {
    ((36.0 * a * a - 9.0 * PI * PI).max(0.0)).sqrt() / 2.0
}

/// Segment propagators `(U₁, U₂, U₃)` of the NOT loop covered in equal
/// times, written in the `{D_i(0)}` basis.
///
/// The `(1, 2)` entry of `U₁` (0-based) is taken as
/// `(3α cos α − iΩτ sin α)/(3√2 α)`, mirroring the `(2, 0)` entry of `U₃`;
/// the variant with a bare `cos α` term is not unitary.
pub fn appendix_a_closed_form(omega_tau: f64) -> Result<(ComplexMatrix, ComplexMatrix, ComplexMatrix)> {
    if !(omega_tau > 0.0) {
        return Err(Error::Validation(format!(
            "omega_tau must be positive, got {omega_tau}"
        )));
    }
    let wt = omega_tau;
    let a = alpha(wt);
    let (sa, ca) = a.sin_cos();
    let beta = Complex64::new(6.0 * PI, 4.0 * wt);
    let beta_c = beta.conj();
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let r = |x: f64| c(x, 0.0);
    let z = r(0.0);
    let one = r(1.0);
    let s2 = SQRT_2;

    let pisa = r(PI * sa / (2.0 * a));
    let bright_pp = c(3.0 * PI + 6.0 * a * sa, 2.0 * wt * ca);
    let bright_pm = c(-3.0 * PI + 6.0 * a * sa, -2.0 * wt * ca);
    let bright_mp = c(-3.0 * PI + 6.0 * a * sa, 2.0 * wt * ca);
    let bright_mm = c(3.0 * PI + 6.0 * a * sa, -2.0 * wt * ca);
    let lower_p = -c(3.0 * PI * ca, 2.0 * wt).scale(s2) / beta;
    let lower_m = c(-3.0 * PI * ca, 2.0 * wt).scale(s2) / beta_c;
    let up_m = c(3.0 * a * ca, -wt * sa) / r(3.0 * s2 * a);
    let up_p = c(3.0 * a * ca, wt * sa) / r(3.0 * s2 * a);

    let u1 = ComplexMatrix::from_rows(&[
        [one, z, z, z],
        [z, pisa, up_m, up_p],
        [z, lower_p, bright_pp / beta, bright_pm / beta],
        [z, lower_m, bright_mp / beta_c, bright_mm / beta_c],
    ]);

    let k = c(0.0, PI * wt * (ca - 1.0) / (6.0 * s2 * a * a));
    let s_im = c(0.0, wt * sa / (3.0 * s2 * a));
    let diag_b = r((9.0 * PI * PI + 2.0 * wt * wt + 2.0 * wt * wt * ca) / (36.0 * a * a));
    let off_b = r(-wt * wt * (ca - 1.0) / (18.0 * a * a));
    let u2 = ComplexMatrix::from_rows(&[
        [pisa, r(ca), -s_im, s_im],
        [
            r(-(4.0 * wt * wt + 9.0 * PI * PI * ca) / (36.0 * a * a)),
            pisa,
            k,
            -k,
        ],
        [k, -s_im, diag_b, off_b],
        [-k, s_im, off_b, diag_b],
    ]);

    let u3 = ComplexMatrix::from_rows(&[
        [pisa, z, lower_p, lower_m],
        [z, one, z, z],
        [up_m, z, bright_pp / beta, bright_mp / beta_c],
        [up_p, z, bright_pm / beta, bright_mm / beta_c],
    ]);
    Ok((u1, u2, u3))
}

/// `(1,1)` element of `Q = U†U_ad` for the equal-time NOT loop.
pub fn q11_closed_form(omega_tau: f64) -> f64 {
    let wt2 = omega_tau * omega_tau;
    let pi2 = PI * PI;
    (4.0 * wt2 + 9.0 * pi2 * alpha_prime(omega_tau).cos()) / (9.0 * pi2 + 4.0 * wt2)
}

/// Revival times `τ*_k(n) = ((2n+1)π/(2nΩ))·√(16k²n² − 1)`, `k = 1..=k_max`.
pub fn revival_times(k_max: u32, n: u32, omega: f64) -> Result<Vec<f64>> {
    if k_max == 0 || n == 0 {
        return Err(Error::Validation("k_max and n must be at least 1".into()));
    }
    if !(omega > 0.0) {
        return Err(Error::Validation(format!("Omega must be positive, got {omega}")));
    }
    let n = n as f64;
    Ok((1..=k_max)
        .map(|k| {
            let k = k as f64;
            (2.0 * n + 1.0) * PI / (2.0 * n * omega) * (16.0 * k * k * n * n - 1.0).sqrt()
        })
        .collect())
}

/// First revival of the NOT loop, `(3π/2Ω)√15`.
pub fn optimal_time(omega: f64) -> f64 {
    3.0 * PI / (2.0 * omega) * 15f64.sqrt()
}

/// Approximate angular frequency of the revivals, `(Ω/3)√(1 + (3π/(2Ωτ))²)`.
pub fn revival_frequency(tau: f64, omega: f64) -> f64 {
    let x = 3.0 * PI / (2.0 * omega * tau);
    omega / 3.0 * (1.0 + x * x).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_is_integer_turns_at_revivals() {
        let taus = revival_times(6, 1, 1.0).unwrap();
        for (k, t) in taus.iter().enumerate() {
            let a = alpha(*t);
            assert!((a - 2.0 * PI * (k + 1) as f64).abs() < 1e-12);
            assert!((a.cos() - 1.0).abs() < 1e-15);
            assert!(a.sin().abs() < 1e-11);
            assert!((alpha_prime(*t) - a).abs() < 1e-12);
            assert!((omega_tau_for_alpha(a) - t).abs() < 1e-11);
        }
    }

    #[test]
    fn revival_time_values() {
        let t = revival_times(2, 1, 1.0).unwrap();
        assert!((t[0] - 1.5 * PI * 15f64.sqrt()).abs() < 1e-13);
        assert!((t[0] - 18.251004041881).abs() < 1e-9);
        assert!((t[1] - 1.5 * PI * 63f64.sqrt()).abs() < 1e-13);
        assert!((t[1] - 37.403427969297).abs() < 1e-9);
        assert!((optimal_time(1.0) - t[0]).abs() < 1e-15);
        // n = 1 generalization reduces to (3π/2Ω)√(16k² − 1)
        let t2 = revival_times(5, 1, 2.0).unwrap();
        for (k, t) in t2.iter().enumerate() {
            let k = (k + 1) as f64;
            assert!((t - 3.0 * PI / 4.0 * (16.0 * k * k - 1.0).sqrt()).abs() < 1e-12);
        }
        assert!(revival_times(0, 1, 1.0).is_err());
        assert!(revival_times(1, 0, 1.0).is_err());
    }

    #[test]
    fn u2_entries() {
        let (_, u2, _) = appendix_a_closed_form(7.0).unwrap();
        let a = alpha(7.0);
        assert!((u2[(0, 1)].re - a.cos()).abs() < 1e-15);
        assert!((u2[(1, 1)].re - PI * a.sin() / (2.0 * a)).abs() < 1e-15);
    }

    #[test]
    fn closed_forms_are_unitary() {
        for wt in [0.3, 1.0, 5.0, 10.0, 50.0, 100.0, 1e3] {
            let (u1, u2, u3) = appendix_a_closed_form(wt).unwrap();
            for u in [u1, u2, u3] {
                assert!(u.is_unitary(1e-10), "Ωτ = {wt}: {}", u.unitarity_residue());
            }
        }
        assert!(appendix_a_closed_form(0.0).is_err());
    }

    #[test]
    fn q11_is_one_exactly_at_revivals() {
        for t in revival_times(10, 1, 1.0).unwrap() {
            assert!((q11_closed_form(t) - 1.0).abs() < 1e-12);
        }
        assert!(q11_closed_form(10.0) < 0.7);
    }
}
