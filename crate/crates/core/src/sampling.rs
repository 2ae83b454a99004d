//! Pure initial states on the computational Bloch sphere.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{DensityMatrix, StateVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplingScheme {
    /// Golden-angle spiral; deterministic for a given count.
    Fibonacci,
    /// Uniform random points from a seeded ChaCha8 stream.
    Random,
}

impl FromStr for SamplingScheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fibonacci" => Ok(Self::Fibonacci),
            "random" | "random-seeded" => Ok(Self::Random),
            other => Err(Error::Validation(format!(
                "unknown sampling scheme '{other}' (expected fibonacci or random)"
            ))),
        }
    }
}

impl fmt::Display for SamplingScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Fibonacci => write!(f, "fibonacci"),
            Self::Random => write!(f, "random"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlochSampling {
    pub scheme: SamplingScheme,
    pub count: usize,
    pub seed: u64,
}

impl BlochSampling {
    pub fn fibonacci(count: usize) -> Self {
        Self {
            scheme: SamplingScheme::Fibonacci,
            count,
            seed: 0,
        }
    }

    pub fn random(count: usize, seed: u64) -> Self {
        Self {
            scheme: SamplingScheme::Random,
            count,
            seed,
        }
    }
}

/// `cos(θ/2)|0⟩ + e^{iϕ} sin(θ/2)|1⟩` embedded in the 4-level space.
pub fn bloch_state(theta: f64, azimuth: f64) -> StateVector {
    let (s, c) = (theta / 2.0).sin_cos();
    StateVector::from_amplitudes(&[
        Complex64::new(c, 0.0),
        Complex64::from_polar(s, azimuth),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
    ])
}

/// Bloch angles `(θ, ϕ)` of the sample points.
pub fn bloch_angles(s: &BlochSampling) -> Result<Vec<(f64, f64)>> {
    if s.count == 0 {
        return Err(Error::Validation("Bloch sample count must be at least 1".into()));
    }
    let n = s.count;
    Ok(match s.scheme {
        SamplingScheme::Fibonacci => {
            // z_i = 1 − (2i+1)/n, ϕ_i = i·golden angle. The first point is the
            // lattice origin (ϕ = 0); for n = 1 it sits on the equator.
            let golden = PI * (3.0 - 5f64.sqrt());
            (0..n)
                .map(|i| {
                    let z = 1.0 - (2 * i + 1) as f64 / n as f64;
                    let az = (i as f64 * golden).rem_euclid(2.0 * PI);
                    (z.clamp(-1.0, 1.0).acos(), az)
                })
                .collect()
        }
        SamplingScheme::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
            (0..n)
                .map(|_| {
                    let z: f64 = rng.gen_range(-1.0..=1.0);
                    let az: f64 = rng.gen_range(0.0..2.0 * PI);
                    (z.acos(), az)
                })
                .collect()
        }
    })
}

/// Pure computational states distributed over the Bloch sphere.
pub fn bloch_samples(s: &BlochSampling) -> Result<Vec<DensityMatrix>> {
    bloch_angles(s)?
        .into_iter()
        .map(|(t, a)| DensityMatrix::pure(&bloch_state(t, a)))
        .collect()
}

/// The six Pauli-axis states. Averages of quadratic functions of the state
/// over this set equal their uniform Bloch-sphere averages.
pub fn axis_states() -> Vec<DensityMatrix> {
    let h = PI / 2.0;
    [(0.0, 0.0), (PI, 0.0), (h, 0.0), (h, PI), (h, h), (h, 3.0 * h)]
        .into_iter()
        .map(|(t, a)| DensityMatrix::pure(&bloch_state(t, a)).expect("unit norm"))
        .collect()
}

/// Named initial states used for per-state fidelity curves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NamedState {
    /// `|0⟩`
    Up,
    /// `|1⟩`
    Down,
    /// `(|0⟩ + |1⟩)/√2`
    Symmetric,
}

impl NamedState {
    pub const ALL: [NamedState; 3] = [NamedState::Up, NamedState::Down, NamedState::Symmetric];

    pub fn label(self) -> &'static str {
        match self {
            Self::Up => "up",
            Self::Down => "down",
            Self::Symmetric => "sym",
        }
    }

    pub fn vector(self) -> StateVector {
        match self {
            Self::Up => bloch_state(0.0, 0.0),
            Self::Down => bloch_state(PI, 0.0),
            Self::Symmetric => bloch_state(PI / 2.0, 0.0),
        }
    }

    pub fn density(self) -> DensityMatrix {
        DensityMatrix::pure(&self.vector()).expect("unit norm")
    }
}
