//! The tripod Hamiltonian on the `(ϑ, φ)` parameter sphere and its
//! dark/bright eigenframe.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, StateVector, I, ZERO};

/// Instantaneous eigenstate label, in frame ordering `(D₀, D₁, D₊, D₋)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Level {
    Dark0,
    Dark1,
    BrightPlus,
    BrightMinus,
}

impl Level {
    pub const ALL: [Level; 4] = [
        Level::Dark0,
        Level::Dark1,
        Level::BrightPlus,
        Level::BrightMinus,
    ];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Result<Self> {
        Self::ALL
            .get(i)
            .copied()
            .ok_or_else(|| Error::Validation(format!("level index {i} outside 0..4")))
    }

    pub fn is_bright(self) -> bool {
        matches!(self, Level::BrightPlus | Level::BrightMinus)
    }

    /// Eigenvalue in units of `Ω`.
    pub fn energy(self) -> f64 {
        match self {
            Level::Dark0 | Level::Dark1 => 0.0,
            Level::BrightPlus => 1.0,
            Level::BrightMinus => -1.0,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Level::Dark0 => '0',
            Level::Dark1 => '1',
            Level::BrightPlus => '+',
            Level::BrightMinus => '-',
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

impl FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "0" => Ok(Level::Dark0),
            "1" => Ok(Level::Dark1),
            "+" | "p" => Ok(Level::BrightPlus),
            "-" | "m" => Ok(Level::BrightMinus),
            other => Err(Error::Validation(format!(
                "unknown level '{other}', expected one of 0, 1, +, -"
            ))),
        }
    }
}

/// Point on the parameter sphere. `theta ∈ [0, π]`; `phi` is unwrapped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpherePoint {
    pub theta: f64,
    pub phi: f64,
}

/// Slack allowed on `theta` bounds to absorb rounding at the poles.
pub(crate) const ANGLE_SLACK: f64 = 1e-12;

impl SpherePoint {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !theta.is_finite() || !phi.is_finite() {
            return Err(Error::Validation("sphere angles must be finite".into()));
        }
        if !(-ANGLE_SLACK..=std::f64::consts::PI + ANGLE_SLACK).contains(&theta) {
            return Err(Error::Validation(format!(
                "theta = {theta} outside [0, π]"
            )));
        }
        Ok(Self { theta, phi })
    }

    pub const NORTH_POLE: SpherePoint = SpherePoint {
        theta: 0.0,
        phi: 0.0,
    };

    pub fn is_pole(&self, tol: f64) -> bool {
        self.theta.abs() <= tol || (self.theta - std::f64::consts::PI).abs() <= tol
    }

    /// Same point on the sphere, treating `φ` as irrelevant at the poles.
    pub fn same_point(&self, other: &SpherePoint, tol: f64) -> bool {
        if (self.theta - other.theta).abs() > tol {
            return false;
        }
        self.is_pole(tol) || (self.phi - other.phi).abs() <= tol
    }

    /// Rabi frequencies `(Ω₀, Ω₁, Ω_a)`.
    pub fn rabi_frequencies(&self, omega: f64) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [omega * st * sp, omega * st * cp, omega * ct]
    }
}

/// Tripod Hamiltonian in the bare basis `(|0⟩, |1⟩, |a⟩, |e⟩)`.
pub fn hamiltonian(p: SpherePoint, omega: f64) -> Result<ComplexMatrix> {
    if !(omega > 0.0) {
        return Err(Error::Validation(format!("Omega must be positive, got {omega}")));
    }
    let [o0, o1, oa] = p.rabi_frequencies(omega);
    let mut h = ComplexMatrix::zeros(4);
    for (k, v) in [o0, o1, oa].into_iter().enumerate() {
        h[(3, k)] = Complex64::new(v, 0.0);
        h[(k, 3)] = Complex64::new(v, 0.0);
    }
    Ok(h)
}

/// Instantaneous dark/bright eigenbasis and its energies.
#[derive(Debug, Clone, Copy)]
pub struct TripodFrame {
    pub point: SpherePoint,
    /// `[D₀, D₁, D₊, D₋]` in the bare basis.
    pub basis: [StateVector; 4],
    /// Energies in units of `Ω`: `[0, 0, +1, −1]`.
    pub energies: [f64; 4],
}

impl TripodFrame {
    pub fn state(&self, level: Level) -> &StateVector {
        &self.basis[level.index()]
    }

    /// Unitary whose columns are `D₀, D₁, D₊, D₋` (frame → bare).
    pub fn matrix(&self) -> ComplexMatrix {
        ComplexMatrix::from_columns(&self.basis)
    }

    /// Eigenprojection onto the zero-energy (computational) space.
    pub fn dark_projector(&self) -> ComplexMatrix {
        self.basis[0].projector() + self.basis[1].projector()
    }
}

/// The explicit dark/bright basis at `p`.
pub fn frame(p: SpherePoint) -> TripodFrame {
    let (st, ct) = p.theta.sin_cos();
    let (sp, cp) = p.phi.sin_cos();
    let r = FRAC_1_SQRT_2;
    let d0 = StateVector::from_real(&[cp, -sp, 0.0, 0.0]);
    let d1 = StateVector::from_real(&[ct * sp, ct * cp, -st, 0.0]);
    let dp = StateVector::from_real(&[r * st * sp, r * st * cp, r * ct, r]);
    let dm = StateVector::from_real(&[r * st * sp, r * st * cp, r * ct, -r]);
    TripodFrame {
        point: p,
        basis: [d0, d1, dp, dm],
        energies: [0.0, 0.0, 1.0, -1.0],
    }
}

/// `H` expressed in its own eigenframe: `diag(0, 0, Ω, −Ω)`.
pub fn frame_hamiltonian(omega: f64) -> ComplexMatrix {
    ComplexMatrix::from_diagonal(&[
        ZERO,
        ZERO,
        Complex64::new(omega, 0.0),
        Complex64::new(-omega, 0.0),
    ])
}

/// Generator `D = −i R†Ṙ` for motion through `p` at the given angular rates,
/// in the frame basis `(D₀, D₁, D₊, D₋)`.
pub fn connection_d(p: SpherePoint, theta_rate: f64, phi_rate: f64) -> ComplexMatrix {
    let (st, ct) = p.theta.sin_cos();
    let r = FRAC_1_SQRT_2;
    let a = phi_rate * ct;
    let b = phi_rate * st * r;
    let c = theta_rate * r;
    let real = ComplexMatrix::from_real_rows(&[
        [0.0, a, b, b],
        [-a, 0.0, c, c],
        [-b, -c, 0.0, 0.0],
        [-b, -c, 0.0, 0.0],
    ]);
    real.scale(-I)
}

/// Adiabatic connection `(A_ϑ, A_φ)` on the computational space `{D₀, D₁}`.
pub fn adiabatic_connection(p: SpherePoint) -> (ComplexMatrix, ComplexMatrix) {
    let ct = p.theta.cos();
    let a_theta = ComplexMatrix::zeros(2);
    let a_phi = i_sigma_y().scale_real(ct);
    (a_theta, a_phi)
}

/// `iσ_y = |D₀⟩⟨D₁| − |D₁⟩⟨D₀|` on the computational space.
pub fn i_sigma_y() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[[0.0, 1.0], [-1.0, 0.0]])
}
