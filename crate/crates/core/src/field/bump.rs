//! Compactly supported space-time bumps built from the quintic smoothstep.

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::State;

/// `S(r) = 10 r^3 - 15 r^4 + 6 r^5` and its derivative.
fn smoothstep(r: f64) -> (f64, f64) {
    let r2 = r * r;
    (r2 * r * (10.0 - 15.0 * r + 6.0 * r2), 30.0 * r2 * (1.0 - r) * (1.0 - r))
}

/// `S(1 - |s - c| / R)` on `[c - R, c + R]`, zero outside. Equals 1 at the
/// centre and is C^2 everywhere. Returns the value and its derivative.
pub fn smoothstep_profile(s: f64, c: f64, radius: f64) -> (f64, f64) {
    let d = s - c;
    if d.abs() >= radius {
        return (0.0, 0.0);
    }
    let (v, dv) = smoothstep(1.0 - d.abs() / radius);
    (v, -dv * d.signum() / radius)
}

/// `delta u(t, x) = amplitude * direction * B(t, x)` with `B` a product of
/// smoothstep profiles centred at `center = [t, x]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct Bump {
    pub center: [f64; 2],
    pub radii: [f64; 2],
    pub direction: Vec<f64>,
    #[serde(default = "unit_amplitude")]
    pub amplitude: f64,
}

fn unit_amplitude() -> f64 {
    1.0
}

impl Bump {
    pub fn new(center: [f64; 2], radii: [f64; 2], direction: Vec<f64>, amplitude: f64) -> Result<Self> {
        let bump = Self { center, radii, direction, amplitude };
        bump.validate()?;
        Ok(bump)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self.center.iter().chain(&self.radii).chain(&self.direction).all(|v| v.is_finite());
        if !finite || !self.amplitude.is_finite() {
            return Err(Error::SupportViolation("bump parameters must be finite".into()));
        }
        if self.radii.iter().any(|r| *r <= 0.0) {
            return Err(Error::SupportViolation(format!("bump radii must be positive, got {:?}", self.radii)));
        }
        Ok(())
    }

    pub fn with_amplitude(&self, amplitude: f64) -> Self {
        Self { amplitude, ..self.clone() }
    }

    /// `B, B_t, B_x` at `(t, x)`.
    pub fn profile(&self, t: f64, x: f64) -> (f64, f64, f64) {
        let (pt, dpt) = smoothstep_profile(t, self.center[0], self.radii[0]);
        let (px, dpx) = smoothstep_profile(x, self.center[1], self.radii[1]);
        (pt * px, dpt * px, pt * dpx)
    }

    pub fn t_range(&self) -> (f64, f64) {
        (self.center[0] - self.radii[0], self.center[0] + self.radii[0])
    }

    pub fn x_range(&self) -> (f64, f64) {
        (self.center[1] - self.radii[1], self.center[1] + self.radii[1])
    }

    /// Times where the bump is not smooth: support edges and centre.
    pub fn t_breaks(&self) -> [f64; 3] {
        let (lo, hi) = self.t_range();
        [lo, self.center[0], hi]
    }

    pub fn x_breaks(&self) -> [f64; 3] {
        let (lo, hi) = self.x_range();
        [lo, self.center[1], hi]
    }

    /// `(delta u, delta u_t, delta u_x)`.
    pub fn jet(&self, t: f64, x: f64) -> (State, State, State) {
        let (b, bt, bx) = self.profile(t, x);
        let d = State::from_column_slice(&self.direction) * self.amplitude;
        (&d * b, &d * bt, &d * bx)
    }
}
