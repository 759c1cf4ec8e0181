//! Oscillator constants derived from the physical inputs.
//!
//! All quantities are dimensionless code units with defaults m = omega =
//! hbar = 1; the constants are
//!
//! ```text
//! lambda_{1,2} = (m w sqrt(4 hbar^2 + m^2 w^2 theta^2) +/- m^2 w^2 theta) / 2
//! K_1 = lambda_1 (4 + 2 lambda_1 theta / hbar^2)
//! K_2 = lambda_2 (4 - 2 lambda_2 theta / hbar^2)
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmath::QValue;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PhysicalInputs {
    pub m: f64,
    pub omega: f64,
    pub hbar: f64,
    pub theta: f64,
    pub q: QValue,
}

impl PhysicalInputs {
    pub fn new(m: f64, omega: f64, hbar: f64, theta: f64, q: QValue) -> Result<Self> {
        if !(m > 0.0 && omega > 0.0 && hbar > 0.0) {
            return Err(Error::Invariant(format!(
                "m, omega, hbar must be positive (m={m}, omega={omega}, hbar={hbar})"
            )));
        }
        if !(theta >= 0.0) {
            return Err(Error::Invariant(format!("theta must be nonnegative, got {theta}")));
        }
        Ok(PhysicalInputs { m, omega, hbar, theta, q })
    }

    /// Dimensionless defaults with the given deformation and noncommutativity.
    pub fn standard(theta: f64, q: QValue) -> Result<Self> {
        PhysicalInputs::new(1.0, 1.0, 1.0, theta, q)
    }
}

/// Inputs plus the derived constants; `lambda1` carries the plus sign, so
/// `lambda1 >= lambda2` always, with equality at `theta = 0`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ModelParams {
    pub inputs: PhysicalInputs,
    pub lambda1: f64,
    pub lambda2: f64,
    pub k1: f64,
    pub k2: f64,
    /// lambda1 + lambda2
    pub lambda: f64,
}

pub fn derive_params(inputs: PhysicalInputs) -> Result<ModelParams> {
    let PhysicalInputs { m, omega, hbar, theta, .. } = inputs;
    let root = m * omega * (4.0 * hbar * hbar + m * m * omega * omega * theta * theta).sqrt();
    let shift = m * m * omega * omega * theta;
    let lambda1 = 0.5 * (root + shift);
    let lambda2 = 0.5 * (root - shift);
    let k1 = lambda1 * (4.0 + 2.0 * lambda1 * theta / (hbar * hbar));
    let k2 = lambda2 * (4.0 - 2.0 * lambda2 * theta / (hbar * hbar));
    for (name, v) in [("lambda1", lambda1), ("lambda2", lambda2), ("K1", k1), ("K2", k2)] {
        if !(v > 0.0) {
            return Err(Error::Invariant(format!("derived constant {name} = {v} is not positive")));
        }
    }
    Ok(ModelParams { inputs, lambda1, lambda2, k1, k2, lambda: lambda1 + lambda2 })
}

impl ModelParams {
    pub fn hbar(&self) -> f64 {
        self.inputs.hbar
    }

    pub fn q(&self) -> QValue {
        self.inputs.q
    }

    pub fn theta(&self) -> f64 {
        self.inputs.theta
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(m: f64, omega: f64, hbar: f64, theta: f64) -> ModelParams {
        let q = QValue::new(1.0).unwrap();
        derive_params(PhysicalInputs::new(m, omega, hbar, theta, q).unwrap()).unwrap()
    }

    #[test]
    fn commutative_limit() {
        let p = params(1.0, 1.0, 1.0, 0.0);
        assert!((p.lambda1 - 1.0).abs() < 1e-15);
        assert!((p.lambda2 - 1.0).abs() < 1e-15);
        assert!((p.k1 - 4.0).abs() < 1e-15);
        assert!((p.k2 - 4.0).abs() < 1e-15);
    }

    #[test]
    fn golden_ratio_point() {
        // m = omega = hbar = 1, theta = 1: lambda_{1,2} = (sqrt(5) +/- 1)/2
        let p = params(1.0, 1.0, 1.0, 1.0);
        let s5 = 5.0_f64.sqrt();
        assert!((p.lambda1 - (s5 + 1.0) / 2.0).abs() < 1e-14);
        assert!((p.lambda2 - (s5 - 1.0) / 2.0).abs() < 1e-14);
    }

    #[test]
    fn product_and_difference_identities() {
        for &(m, w, h, th) in &[
            (1.0, 1.0, 1.0, 0.0),
            (2.0, 0.5, 1.0, 0.3),
            (0.7, 1.9, 2.3, 4.0),
            (10.0, 0.1, 0.5, 0.01),
        ] {
            let p = params(m, w, h, th);
            let prod = h * h * m * m * w * w;
            assert!((p.lambda1 * p.lambda2 - prod).abs() <= 1e-12 * prod);
            let diff = m * m * w * w * th;
            assert!((p.lambda1 - p.lambda2 - diff).abs() <= 1e-12 * diff.max(1.0));
            assert!(p.lambda1 >= p.lambda2);
        }
    }

    #[test]
    fn continuity_at_theta_zero() {
        let a = params(1.0, 1.0, 1.0, 0.0);
        let b = params(1.0, 1.0, 1.0, 1e-10);
        for (x, y) in [
            (a.lambda1, b.lambda1),
            (a.lambda2, b.lambda2),
            (a.k1, b.k1),
            (a.k2, b.k2),
        ] {
            assert!((x - y).abs() < 1e-8 * x.abs());
        }
    }

    #[test]
    fn k2_positive_on_stress_grid() {
        for &theta in &[0.0, 1.0, 10.0, 100.0, 1000.0] {
            for &mw in &[1e-2, 1e-1, 1.0, 10.0, 100.0] {
                let p = params(mw, 1.0, 1.0, theta);
                assert!(p.k2 > 0.0, "K2 = {} at theta={theta}, m*omega={mw}", p.k2);
            }
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let q = QValue::new(0.5).unwrap();
        assert!(PhysicalInputs::new(0.0, 1.0, 1.0, 0.0, q).is_err());
        assert!(PhysicalInputs::new(1.0, 1.0, 1.0, -1.0, q).is_err());
    }
}
