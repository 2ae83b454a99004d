//! Bath spectral densities and the decay-rate / Lamb-shift tables they
//! induce on the tripod levels.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::quadrature::principal_value;
use crate::tripod::Level;

/// Ohmic bath `ξ(ω) = κ ω e^{−ω/ω_c}`, with temperature in units of `Ω`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OhmicBath {
    pub kappa: f64,
    pub omega_c: f64,
    pub temperature: f64,
}

/// Upper quadrature limit for the Lamb shifts, in units of `ω_c`.
pub const CUTOFF_MULTIPLE: f64 = 20.0;

/// Relative tolerance on the principal-value window extrapolation.
pub const LAMB_SHIFT_RTOL: f64 = 1e-6;

impl OhmicBath {
    pub fn new(kappa: f64, omega_c: f64, temperature: f64) -> Result<Self> {
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(Error::Validation(format!("kappa must be positive, got {kappa}")));
        }
        if !(omega_c > 0.0) || !omega_c.is_finite() {
            return Err(Error::Validation(format!("omega_c must be positive, got {omega_c}")));
        }
        if !(temperature >= 0.0) || !temperature.is_finite() {
            return Err(Error::Validation(format!(
                "temperature must be non-negative, got {temperature}"
            )));
        }
        Ok(Self {
            kappa,
            omega_c,
            temperature,
        })
    }

    /// Bare density; zero for `ω ≤ 0`.
    pub fn spectral_density(&self, omega: f64) -> f64 {
        if omega > 0.0 {
            self.kappa * omega * (-omega / self.omega_c).exp()
        } else {
            0.0
        }
    }

    /// `ξ_th(ω) = ξ(ω)[n_B(ω) + 1] + ξ(−ω) n_B(−ω)`.
    pub fn thermal_spectral_density(&self, omega: f64) -> f64 {
        let t = self.temperature;
        if t == 0.0 {
            return self.spectral_density(omega);
        }
        if omega == 0.0 {
            // ω n_B(ω) → T as ω → 0
            return self.kappa * t;
        }
        let w = omega.abs();
        // ω(n_B + 1) and |ω| n_B(|ω|) are both ω/(1 − e^{−ω/T})
        let occupation_factor = omega / -(-omega / t).exp_m1();
        self.kappa * occupation_factor * (-w / self.omega_c).exp()
    }
}

/// Decay rates `Γ_{αβ}` and Lamb shifts `Δ_{αβ}` indexed by frame level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateTable {
    pub gamma: [[f64; 4]; 4],
    pub delta: [[f64; 4]; 4],
}

impl RateTable {
    pub fn zeros() -> Self {
        Self {
            gamma: [[0.0; 4]; 4],
            delta: [[0.0; 4]; 4],
        }
    }

    pub fn new(gamma: [[f64; 4]; 4], delta: [[f64; 4]; 4]) -> Result<Self> {
        let t = Self { gamma, delta };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        for a in Level::ALL {
            for b in Level::ALL {
                let g = self.gamma(a, b);
                if !(g >= 0.0) || !g.is_finite() {
                    return Err(Error::Validation(format!(
                        "gamma.{a}{b} must be finite and non-negative, got {g}"
                    )));
                }
                if !self.delta(a, b).is_finite() {
                    return Err(Error::Validation(format!("delta.{a}{b} must be finite")));
                }
            }
        }
        Ok(())
    }

    pub fn gamma(&self, a: Level, b: Level) -> f64 {
        self.gamma[a.index()][b.index()]
    }

    pub fn delta(&self, a: Level, b: Level) -> f64 {
        self.delta[a.index()][b.index()]
    }

    pub fn set(&mut self, a: Level, b: Level, gamma: f64, delta: f64) {
        self.gamma[a.index()][b.index()] = gamma;
        self.delta[a.index()][b.index()] = delta;
    }

    /// `gamma.<a><b>=<value>` / `delta.<a><b>=<value>` lines for every
    /// nonzero entry, in level order.
    pub fn to_config(&self) -> String {
        let mut out = String::new();
        for (name, table) in [("gamma", &self.gamma), ("delta", &self.delta)] {
            for a in Level::ALL {
                for b in Level::ALL {
                    let v = table[a.index()][b.index()];
                    if v != 0.0 {
                        let _ = writeln!(out, "{name}.{a}{b}={v:?}");
                    }
                }
            }
        }
        out
    }

    /// Applies one `gamma.<a><b>` or `delta.<a><b>` entry. Returns `false`
    /// when `key` is not a rate key.
    pub fn apply_config_entry(&mut self, key: &str, value: &str) -> Result<bool> {
        let (is_gamma, pair) = if let Some(rest) = key.strip_prefix("gamma.") {
            (true, rest)
        } else if let Some(rest) = key.strip_prefix("delta.") {
            (false, rest)
        } else {
            return Ok(false);
        };
        let chars: Vec<char> = pair.chars().collect();
        if chars.len() != 2 {
            return Err(Error::Validation(format!(
                "{key}: expected two level symbols after the prefix"
            )));
        }
        let a: Level = chars[0].to_string().parse()?;
        let b: Level = chars[1].to_string().parse()?;
        let v: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::Validation(format!("{key}: '{value}' is not a number")))?;
        if is_gamma {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Validation(format!("{key} must be non-negative, got {v}")));
            }
            self.gamma[a.index()][b.index()] = v;
        } else {
            if !v.is_finite() {
                return Err(Error::Validation(format!("{key} must be finite")));
            }
            self.delta[a.index()][b.index()] = v;
        }
        Ok(true)
    }

    /// Table of `key=value` lines as written by [`RateTable::to_config`];
    /// blank lines and `#` comments are skipped.
    pub fn parse_config(text: &str) -> Result<Self> {
        let mut t = Self::zeros();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |message: String| Error::Parse {
                line: i + 1,
                message,
            };
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| parse_err(format!("expected key=value, got '{line}'")))?;
            match t.apply_config_entry(k.trim(), v) {
                Ok(true) => {}
                Ok(false) => return Err(parse_err(format!("unknown key '{}'", k.trim()))),
                Err(e) => return Err(parse_err(e.to_string())),
            }
        }
        Ok(t)
    }
}

/// Fixed rates (units of `Ω`) used for the per-state noisy curves.
pub fn fixed_rates_preset() -> RateTable {
    use Level::{BrightMinus as M, BrightPlus as P, Dark0 as D0, Dark1 as D1};
    let mut t = RateTable::zeros();
    for (a, b) in [(P, D0), (P, D1), (D0, M), (D1, M)] {
        t.set(a, b, 1.1, -1.1);
    }
    for (a, b) in [(D0, P), (M, D0), (D1, P), (M, D1)] {
        t.set(a, b, 0.8, 0.8);
    }
    t.set(P, P, 1.0, 1.0);
    t.set(M, M, 1.0, 1.0);
    t.set(P, M, 1.2, -1.2);
    t.set(M, P, 0.7, 0.7);
    t
}

/// `Γ_{αβ} = 2π ξ_th(ε_α − ε_β)` and `Δ_{αβ} = P∫ ξ_th(ω)/(ω − ε_α + ε_β) dω`
/// over `[−20ω_c, 20ω_c]`. Diagonal rates use `2πκT` directly.
pub fn rates_from_bath(bath: &OhmicBath) -> Result<RateTable> {
    let mut t = RateTable::zeros();
    // Five distinct transition frequencies: 0, ±1, ±2.
    let mut shifts = BTreeMap::new();
    for a in Level::ALL {
        for b in Level::ALL {
            let w = a.energy() - b.energy();
            let key = w as i32;
            if let Entry::Vacant(slot) = shifts.entry(key) {
                slot.insert(lamb_shift(bath, w)?);
            }
            let gamma = if key == 0 {
                2.0 * PI * bath.kappa * bath.temperature
            } else {
                2.0 * PI * bath.thermal_spectral_density(w)
            };
            t.set(a, b, gamma, shifts[&key]);
        }
    }
    Ok(t)
}

/// `P∫ ξ_th(ω)/(ω − w) dω` over `[−20ω_c, 20ω_c]`.
pub fn lamb_shift(bath: &OhmicBath, w: f64) -> Result<f64> {
    let limit = CUTOFF_MULTIPLE * bath.omega_c;
    if !(w.abs() < limit) {
        return Err(Error::Validation(format!(
            "transition frequency {w} outside the integration window ±{limit}"
        )));
    }
    let mut breaks = vec![0.0, -bath.omega_c, bath.omega_c];
    if bath.temperature > 0.0 {
        breaks.extend([-bath.temperature, bath.temperature]);
    }
    breaks.retain(|x| x.abs() < limit);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    principal_value(
        |x| bath.thermal_spectral_density(x),
        -limit,
        limit,
        w,
        &breaks,
        LAMB_SHIFT_RTOL,
    )
    .map_err(|e| match e {
        Error::Quadrature(msg) => Error::Quadrature(format!(
            "Lamb shift at ω = {w} (κ = {}, ω_c = {}, T = {}): {msg}",
            bath.kappa, bath.omega_c, bath.temperature
        )),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use Level::{BrightMinus as M, BrightPlus as P, Dark0 as D0, Dark1 as D1};

    fn paper_bath(t: f64) -> OhmicBath {
        OhmicBath::new(0.01, 100.0, t).unwrap()
    }

    #[test]
    fn spectral_density_examples() {
        let cold = paper_bath(0.0);
        assert_eq!(cold.thermal_spectral_density(-1.0), 0.0);
        assert!((cold.thermal_spectral_density(1.0) - 0.01 * (-0.01f64).exp()).abs() < 1e-16);
        let warm = paper_bath(1.0);
        let expected = 0.01 * (-0.01f64).exp() * (1.0 / (1f64.exp() - 1.0) + 1.0);
        assert!((warm.thermal_spectral_density(1.0) - expected).abs() < 1e-15);
        assert!((warm.thermal_spectral_density(1.0) - 0.015662).abs() < 1e-6);
        // detailed balance
        let r = warm.thermal_spectral_density(-2.0) / warm.thermal_spectral_density(2.0);
        assert!((r - (-2f64).exp()).abs() < 1e-14);
        // continuity at zero frequency
        assert!((warm.thermal_spectral_density(1e-9) - 0.01).abs() < 1e-10);
        assert!((warm.thermal_spectral_density(-1e-9) - 0.01).abs() < 1e-10);
    }

    #[test]
    fn tiny_temperature_matches_zero() {
        let a = paper_bath(1e-6);
        let b = paper_bath(0.0);
        for w in [-2.0, -1.0, 0.5, 1.0, 2.0] {
            assert!((a.thermal_spectral_density(w) - b.thermal_spectral_density(w)).abs() < 1e-15);
        }
    }

    #[test]
    fn invalid_bath() {
        assert!(OhmicBath::new(0.0, 1.0, 1.0).is_err());
        assert!(OhmicBath::new(0.1, -1.0, 1.0).is_err());
        assert!(OhmicBath::new(0.1, 1.0, -0.1).is_err());
        assert!(OhmicBath::new(0.1, 1.0, 0.0).is_ok());
    }

    #[test]
    fn preset_values() {
        let t = fixed_rates_preset();
        assert_eq!(t.gamma(P, M), 1.2);
        assert_eq!(t.delta(P, M), -1.2);
        assert_eq!(t.delta(M, P), 0.7);
        assert_eq!(t.gamma(D0, M), 1.1);
        assert_eq!(t.gamma(M, D1), 0.8);
        assert_eq!(t.gamma(D0, D1), 0.0);
        assert_eq!(t.gamma(D0, D0), 0.0);
        t.validate().unwrap();
    }

    #[test]
    fn config_round_trip() {
        let t = fixed_rates_preset();
        let text = t.to_config();
        assert!(text.contains("gamma.+0=1.1\n"));
        assert!(text.contains("delta.+-=-1.2\n"));
        assert_eq!(RateTable::parse_config(&text).unwrap(), t);
        assert!(matches!(
            RateTable::parse_config("gamma.+0=-1"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(RateTable::parse_config("gamma.x0=1").is_err());
        assert!(RateTable::parse_config("\n# c\nfoo=1").is_err());
    }

    #[test]
    fn diagonal_rates_from_bath() {
        let t = rates_from_bath(&paper_bath(1.0)).unwrap();
        let g = t.gamma(P, P);
        assert!((g - 2.0 * PI * 0.01).abs() < 1e-12);
        assert!((g - 0.06283).abs() < 1e-5);
        for a in Level::ALL {
            assert!(((t.delta(a, a) - 1.0) / 1.0).abs() < 1e-4);
        }
        let cold = rates_from_bath(&paper_bath(0.0)).unwrap();
        assert_eq!(cold.gamma(D0, D0), 0.0);
        assert!((cold.delta(D0, D0) - 1.0).abs() < 1e-4);
    }

    #[test]
    fn lamb_shifts_for_all_paper_temperatures() {
        for t in [0.0, 0.1, 1.0, 5.0, 10.0] {
            let table = rates_from_bath(&paper_bath(t)).unwrap();
            for a in Level::ALL {
                assert!((table.delta(a, a) - 1.0).abs() < 1e-4, "T = {t}: {}", table.delta(a, a));
            }
        }
    }

    #[test]
    fn off_diagonal_rates_from_bath() {
        let bath = paper_bath(5.0);
        let t = rates_from_bath(&bath).unwrap();
        assert!((t.gamma(P, D0) - 2.0 * PI * bath.thermal_spectral_density(1.0)).abs() < 1e-15);
        assert!((t.gamma(D0, P) - 2.0 * PI * bath.thermal_spectral_density(-1.0)).abs() < 1e-15);
        assert_eq!(t.gamma(P, M), 2.0 * PI * bath.thermal_spectral_density(2.0));
        assert!(t.gamma(P, D0) > t.gamma(D0, P));
        assert_eq!(t.delta(P, D0), t.delta(D1, M));
        t.validate().unwrap();
    }

    #[test]
    fn lamb_shift_zero_temperature_closed_form() {
        // At T = 0: P∫_0^L κω e^{−ω/ω_c}/(ω − w) dω = κ[∫_0^L e^{−ω/ω_c} dω + w P∫_0^L e^{−ω/ω_c}/(ω − w) dω].
        // For w < 0 the second integral is regular; check against direct quadrature.
        let bath = OhmicBath::new(0.2, 3.0, 0.0).unwrap();
        let w = -1.0;
        let l = CUTOFF_MULTIPLE * 3.0;
        let direct = crate::quadrature::integrate(
            |x: f64| 0.2 * x * (-x / 3.0).exp() / (x - w),
            0.0,
            l,
            Default::default(),
        )
        .unwrap()
        .value;
        assert!((lamb_shift(&bath, w).unwrap() - direct).abs() < 1e-8);
    }
}
