//! Loops on the parameter sphere built from constant-rate segments.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::linalg::{expm_generator, ComplexMatrix};
use crate::tripod::{i_sigma_y, SpherePoint, ANGLE_SLACK};

/// Tolerance for continuity and closure of paths built from floats.
pub const CLOSURE_TOL: f64 = 1e-9;

/// Arc of constant angular velocity along a meridian or a parallel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathSegment {
    pub start: SpherePoint,
    pub theta_rate: f64,
    pub phi_rate: f64,
    pub duration: f64,
}

impl PathSegment {
    pub fn new(start: SpherePoint, theta_rate: f64, phi_rate: f64, duration: f64) -> Result<Self> {
        if !(duration > 0.0) || !duration.is_finite() {
            return Err(Error::Validation(format!(
                "segment duration must be positive, got {duration}"
            )));
        }
        if !theta_rate.is_finite() || !phi_rate.is_finite() {
            return Err(Error::Validation("segment rates must be finite".into()));
        }
        if theta_rate != 0.0 && phi_rate != 0.0 {
            return Err(Error::Validation(
                "a segment may move along only one angle at a time".into(),
            ));
        }
        let seg = Self {
            start,
            theta_rate,
            phi_rate,
            duration,
        };
        let end = seg.end_unchecked();
        if end.theta < -ANGLE_SLACK.max(CLOSURE_TOL) || end.theta > PI + CLOSURE_TOL {
            return Err(Error::Validation(format!(
                "segment leaves the sphere: end theta = {}",
                end.theta
            )));
        }
        Ok(seg)
    }

    /// Segment from `start` moving by `(dtheta, dphi)` in `duration`.
    pub fn from_increments(start: SpherePoint, dtheta: f64, dphi: f64, duration: f64) -> Result<Self> {
        if !(duration > 0.0) {
            return Err(Error::Validation(format!(
                "segment duration must be positive, got {duration}"
            )));
        }
        Self::new(start, dtheta / duration, dphi / duration, duration)
    }

    /// Point reached after time `s ∈ [0, duration]` into the segment.
    pub fn point_at(&self, s: f64) -> SpherePoint {
        SpherePoint {
            theta: (self.start.theta + self.theta_rate * s).clamp(0.0, PI),
            phi: self.start.phi + self.phi_rate * s,
        }
    }

    fn end_unchecked(&self) -> SpherePoint {
        SpherePoint {
            theta: self.start.theta + self.theta_rate * self.duration,
            phi: self.start.phi + self.phi_rate * self.duration,
        }
    }

    pub fn end(&self) -> SpherePoint {
        self.point_at(self.duration)
    }

    pub fn delta_theta(&self) -> f64 {
        self.theta_rate * self.duration
    }

    pub fn delta_phi(&self) -> f64 {
        self.phi_rate * self.duration
    }

    /// Contribution to the solid angle measured from the north-pole cap:
    /// `Δφ (1 − cos ϑ)` along a parallel, zero along a meridian.
    pub fn solid_angle(&self) -> f64 {
        if self.phi_rate == 0.0 {
            0.0
        } else {
            self.delta_phi() * (1.0 - self.start.theta.cos())
        }
    }
}

/// Ordered, continuous sequence of segments.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSpec {
    segments: Vec<PathSegment>,
}

impl PathSpec {
    pub fn new(segments: Vec<PathSegment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::Validation("path has no segments".into()));
        }
        for (k, pair) in segments.windows(2).enumerate() {
            let end = pair[0].end();
            if !end.same_point(&pair[1].start, CLOSURE_TOL) {
                return Err(Error::Validation(format!(
                    "path is discontinuous between segments {k} and {}: {:?} vs {:?}",
                    k + 1,
                    end,
                    pair[1].start
                )));
            }
        }
        Ok(Self { segments })
    }

    pub fn segments(&self) -> &[PathSegment] {
        &self.segments
    }

    pub fn total_time(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    pub fn start(&self) -> SpherePoint {
        self.segments[0].start
    }

    pub fn end(&self) -> SpherePoint {
        self.segments[self.segments.len() - 1].end()
    }

    pub fn is_closed(&self) -> bool {
        self.end().same_point(&self.start(), CLOSURE_TOL)
    }

    /// Solid angle enclosed by the loop (signed by orientation).
    pub fn solid_angle(&self) -> f64 {
        self.segments.iter().map(PathSegment::solid_angle).sum()
    }

    /// The same loop traversed in the opposite direction.
    pub fn reversed(&self) -> Self {
        let segments = self
            .segments
            .iter()
            .rev()
            .map(|s| PathSegment {
                start: s.end(),
                theta_rate: -s.theta_rate,
                phi_rate: -s.phi_rate,
                duration: s.duration,
            })
            .collect();
        Self { segments }
    }

    /// Same geometry covered in `total_time`, keeping the time fractions of
    /// each segment.
    pub fn rescaled(&self, total_time: f64) -> Result<Self> {
        if !(total_time > 0.0) {
            return Err(Error::Validation(format!(
                "total time must be positive, got {total_time}"
            )));
        }
        let factor = total_time / self.total_time();
        let segments = self
            .segments
            .iter()
            .map(|s| PathSegment {
                start: s.start,
                theta_rate: s.theta_rate / factor,
                phi_rate: s.phi_rate / factor,
                duration: s.duration * factor,
            })
            .collect();
        Ok(Self { segments })
    }

    /// Whether all segments have the same duration (within relative 1e-12).
    pub fn has_equal_segment_times(&self) -> bool {
        let d0 = self.segments[0].duration;
        self.segments
            .iter()
            .all(|s| (s.duration - d0).abs() <= 1e-12 * d0)
    }

    /// Parses the plain-text segment list: one `theta0 phi0 dtheta dphi
    /// duration` line per segment, where `dtheta`/`dphi` are the angle
    /// increments across the segment. Blank lines and `#` comments are
    /// skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut segments = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |message: String| Error::Parse {
                line: lineno + 1,
                message,
            };
            let fields: Vec<f64> = line
                .split_whitespace()
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|e| parse_err(format!("bad number '{t}': {e}")))
                })
                .collect::<Result<_>>()?;
            if fields.len() != 5 {
                return Err(parse_err(format!(
                    "expected 5 fields (theta0 phi0 dtheta dphi duration), found {}",
                    fields.len()
                )));
            }
            let start = SpherePoint::new(fields[0], fields[1]).map_err(|e| parse_err(e.to_string()))?;
            let seg = PathSegment::from_increments(start, fields[2], fields[3], fields[4])
                .map_err(|e| parse_err(e.to_string()))?;
            segments.push(seg);
        }
        Self::new(segments)
    }

    /// Inverse of [`PathSpec::parse`]; floats use round-trip formatting.
    pub fn to_text(&self) -> String {
        let mut out = String::from("# theta0 phi0 dtheta dphi duration\n");
        for s in &self.segments {
            let _ = writeln!(
                out,
                "{:?} {:?} {:?} {:?} {:?}",
                s.start.theta,
                s.start.phi,
                s.delta_theta(),
                s.delta_phi(),
                s.duration
            );
        }
        out
    }
}

/// Pole → equator along `φ = 0`, a `π/2` arc along the equator, and back to
/// the pole along `φ = π/2`; each arc covered in `τ/3`.
pub fn not_gate_path(tau: f64) -> Result<PathSpec> {
    generalized_loop_path(tau, 1)
}

/// Loop enclosing the solid angle `π/(2n)`: pole → equator, an equatorial
/// arc of `π/(2n)`, back to the pole. All three arcs share one angular
/// speed, so for `n = 1` the segments take equal times.
pub fn generalized_loop_path(tau: f64, n: u32) -> Result<PathSpec> {
    if !(tau > 0.0) {
        return Err(Error::Validation(format!("tau must be positive, got {tau}")));
    }
    if n == 0 {
        return Err(Error::Validation("loop index n must be at least 1".into()));
    }
    let arc = FRAC_PI_2 / n as f64;
    let speed = (FRAC_PI_2 + arc + FRAC_PI_2) / tau;
    let t_meridian = FRAC_PI_2 / speed;
    let t_equator = if n == 1 { t_meridian } else { arc / speed };
    let pole = SpherePoint::NORTH_POLE;
    let s1 = PathSegment::new(pole, speed, 0.0, t_meridian)?;
    let s2 = PathSegment::new(
        SpherePoint {
            theta: FRAC_PI_2,
            phi: 0.0,
        },
        0.0,
        speed,
        t_equator,
    )?;
    let s3 = PathSegment::new(
        SpherePoint {
            theta: FRAC_PI_2,
            phi: arc,
        },
        -speed,
        0.0,
        t_meridian,
    )?;
    PathSpec::new(vec![s1, s2, s3])
}

/// Holonomy `exp(iσ_y ω)` on the computational space, `ω` the enclosed
/// solid angle.
pub fn adiabatic_holonomy(path: &PathSpec) -> Result<ComplexMatrix> {
    if !path.is_closed() {
        return Err(Error::Validation(format!(
            "adiabatic holonomy needs a closed loop; start {:?}, end {:?}",
            path.start(),
            path.end()
        )));
    }
    expm_generator(&i_sigma_y(), path.solid_angle())
}
