//! Normalized bi-coherent state vectors on the truncated basis, label
//! evolution, and the checkable Gazeau-Klauder properties.
//!
//! The phase convention is `exp(-i (gamma1 [n1]_q + gamma2 [n2]_q))`
//! throughout, so Hamiltonian evolution shifts labels as
//! `gamma_i -> gamma_i + lambda_i t / m` with a plus sign.

use ndarray::Array1;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::FockBasis;
use crate::model::ModelParams;
use crate::qmath::{q_int, q_radius, QFactorialTable, QValue};
use crate::series;

pub const NORM_TOL: f64 = 1e-12;

/// Coherent-state label `(J1, gamma1, J2, gamma2)`. The radius bound
/// `J_i < 1/(1-q^2)` depends on `q` and is checked at state construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherentLabel {
    pub j1: f64,
    pub gamma1: f64,
    pub j2: f64,
    pub gamma2: f64,
}

impl CoherentLabel {
    pub fn new(j1: f64, gamma1: f64, j2: f64, gamma2: f64) -> Result<Self> {
        if !(j1 >= 0.0 && j2 >= 0.0) {
            return Err(Error::Domain(format!("J values must be nonnegative ({j1}, {j2})")));
        }
        Ok(CoherentLabel { j1, gamma1, j2, gamma2 })
    }

    pub fn in_domain(&self, q: QValue) -> bool {
        let r = q_radius(q);
        self.j1 < r && self.j2 < r
    }
}

/// Normalized state on a truncated basis, together with the weight the
/// truncation discarded.
#[derive(Debug, Clone)]
pub struct StateVector {
    pub basis: FockBasis,
    pub amplitudes: Array1<Complex64>,
    pub truncation_error: f64,
}

impl StateVector {
    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Normalization series `E_q(J1, J2)` with the cutoff chosen so the tail
/// bound is below `tol`.
pub fn normalization_eq(j1: f64, j2: f64, q: QValue, tol: f64) -> Result<f64> {
    assert!(tol > 0.0);
    series::e_q(j1, j2, q, tol)
}

/// Build the normalized bi-coherent vector on the given basis.
///
/// Fails if the label lies outside the convergence radius or if the basis is
/// too small to hold the state to within `trunc_tol` neglected weight.
pub fn build_coherent_vector(
    label: &CoherentLabel,
    q: QValue,
    basis: &FockBasis,
    trunc_tol: f64,
) -> Result<StateVector> {
    if !label.in_domain(q) {
        return Err(Error::Domain(format!(
            "label (J1={}, J2={}) outside convergence radius {} for q={}",
            label.j1,
            label.j2,
            q_radius(q),
            q.value()
        )));
    }
    let e_full = series::e_q(label.j1, label.j2, q, series::DEFAULT_SERIES_TOL)?;

    let n = basis.cutoff();
    let mut table = QFactorialTable::new(q);
    let mut amplitudes = Array1::zeros(basis.dim());
    let mut captured = 0.0_f64;
    for n1 in 0..n {
        let w1 = label.j1.powi(n1 as i32) / table.get(n1 as u32)?;
        let b1 = q_int(n1 as u32, q);
        for n2 in 0..n {
            let w2 = label.j2.powi(n2 as i32) / table.get(n2 as u32)?;
            let b2 = q_int(n2 as u32, q);
            let weight = w1 * w2;
            captured += weight;
            let phase = -(label.gamma1 * b1 + label.gamma2 * b2);
            amplitudes[basis.index(n1, n2)] = Complex64::from_polar(weight.sqrt(), phase);
        }
    }
    let truncation_error = (1.0 - captured / e_full).max(0.0);
    if truncation_error > trunc_tol {
        return Err(Error::CutoffInsufficient { err: truncation_error, tol: trunc_tol });
    }
    // Renormalize on the truncated space.
    let norm = captured.sqrt();
    amplitudes.mapv_inplace(|z| z / norm);
    Ok(StateVector { basis: *basis, amplitudes, truncation_error })
}

/// Grow the cutoff until the neglected weight is below `trunc_tol`, capped at
/// `n_max` per mode.
pub fn build_coherent_auto(
    label: &CoherentLabel,
    q: QValue,
    trunc_tol: f64,
    n_max: usize,
) -> Result<StateVector> {
    let mut n = 8.min(n_max).max(2);
    loop {
        let basis = FockBasis::new(n)?;
        match build_coherent_vector(label, q, &basis, trunc_tol) {
            Ok(state) => return Ok(state),
            Err(Error::CutoffInsufficient { err, tol }) => {
                if n >= n_max {
                    return Err(Error::CutoffInsufficient { err, tol });
                }
                n = (n * 2).min(n_max);
            }
            Err(e) => return Err(e),
        }
    }
}

/// Temporal stability on labels: `gamma_i -> gamma_i + lambda_i t / m`.
pub fn evolve(label: &CoherentLabel, t: f64, params: &ModelParams) -> CoherentLabel {
    let m = params.inputs.m;
    CoherentLabel {
        j1: label.j1,
        gamma1: label.gamma1 + params.lambda1 * t / m,
        j2: label.j2,
        gamma2: label.gamma2 + params.lambda2 * t / m,
    }
}

/// Diagonal eigenvalues of the shifted Hamiltonian,
/// `(lambda1 [n1]_q + lambda2 [n2]_q) / m`.
pub fn hamiltonian_eigenvalues(params: &ModelParams, q: QValue, basis: &FockBasis) -> Array1<f64> {
    let m = params.inputs.m;
    let mut out = Array1::zeros(basis.dim());
    for k in 0..basis.dim() {
        let (n1, n2) = basis.modes(k);
        out[k] = (params.lambda1 * q_int(n1 as u32, q) + params.lambda2 * q_int(n2 as u32, q)) / m;
    }
    out
}

/// Apply `exp(-i H t)` through the diagonal phases of the deformed
/// Hamiltonian.
pub fn apply_evolution(
    state: &StateVector,
    t: f64,
    params: &ModelParams,
    q: QValue,
) -> StateVector {
    let eigs = hamiltonian_eigenvalues(params, q, &state.basis);
    let amplitudes = state
        .amplitudes
        .iter()
        .zip(eigs.iter())
        .map(|(z, &e)| z * Complex64::from_polar(1.0, -e * t))
        .collect();
    StateVector {
        basis: state.basis,
        amplitudes,
        truncation_error: state.truncation_error,
    }
}

/// Deviation of the action identity: `<H> - (lambda1 J1 + lambda2 J2) / m`.
pub fn action_identity_check(
    label: &CoherentLabel,
    params: &ModelParams,
    q: QValue,
    trunc_tol: f64,
    n_max: usize,
) -> Result<f64> {
    let state = build_coherent_auto(label, q, trunc_tol, n_max)?;
    let eigs = hamiltonian_eigenvalues(params, q, &state.basis);
    let energy: f64 = state
        .amplitudes
        .iter()
        .zip(eigs.iter())
        .map(|(z, &e)| z.norm_sqr() * e)
        .sum();
    let m = params.inputs.m;
    Ok(energy - (params.lambda1 * label.j1 + params.lambda2 * label.j2) / m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{derive_params, PhysicalInputs};

    fn q(v: f64) -> QValue {
        QValue::new(v).unwrap()
    }

    fn params(theta: f64, qv: f64) -> ModelParams {
        derive_params(PhysicalInputs::standard(theta, q(qv)).unwrap()).unwrap()
    }

    #[test]
    fn normalization_examples() {
        assert!((normalization_eq(0.0, 0.0, q(0.3), 1e-12).unwrap() - 1.0).abs() < 1e-14);
        let v = normalization_eq(1.0, 2.0, q(1.0), 1e-12).unwrap();
        assert!((v - 20.085536923187668).abs() < 1e-9);
        assert!(normalization_eq(1.0, 2.0, q(1.0), 1e-12).unwrap() >= 1.0);
    }

    #[test]
    fn vacuum_label_gives_vacuum_state() {
        let label = CoherentLabel::new(0.0, 0.0, 0.0, 0.0).unwrap();
        let basis = FockBasis::new(4).unwrap();
        let s = build_coherent_vector(&label, q(0.5), &basis, 1e-12).unwrap();
        assert!((s.amplitudes[0] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(s.amplitudes.iter().skip(1).all(|z| z.norm() == 0.0));
        assert_eq!(s.truncation_error, 0.0);
    }

    #[test]
    fn unit_norm_after_construction() {
        let label = CoherentLabel::new(0.7, 1.3, 0.4, -0.5).unwrap();
        let s = build_coherent_auto(&label, q(0.6), 1e-13, 64).unwrap();
        assert!((s.norm() - 1.0).abs() < NORM_TOL);
    }

    #[test]
    fn glauber_overlap_at_classical_point() {
        // (J1=1, gamma1=0, J2=0, q=1) against |z=1> x |0>.
        let label = CoherentLabel::new(1.0, 0.0, 0.0, 0.0).unwrap();
        let s = build_coherent_auto(&label, q(1.0), 1e-14, 64).unwrap();
        let basis = s.basis;
        let mut overlap = Complex64::new(0.0, 0.0);
        let norm = (-0.5_f64).exp();
        let mut fact = 1.0;
        for n in 0..basis.cutoff() {
            if n > 0 {
                fact *= n as f64;
            }
            let glauber = norm / fact.sqrt();
            overlap += Complex64::new(glauber, 0.0).conj() * s.amplitudes[basis.index(n, 0)];
        }
        assert!((overlap.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn out_of_radius_label_rejected() {
        let label = CoherentLabel::new(4.0 / 3.0, 0.0, 0.0, 0.0).unwrap();
        let basis = FockBasis::new(8).unwrap();
        assert!(matches!(
            build_coherent_vector(&label, q(0.5), &basis, 1e-12),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn insufficient_cutoff_reported() {
        let label = CoherentLabel::new(1.3, 0.0, 0.0, 0.0).unwrap();
        let basis = FockBasis::new(3).unwrap();
        assert!(matches!(
            build_coherent_vector(&label, q(0.5), &basis, 1e-12),
            Err(Error::CutoffInsufficient { .. })
        ));
    }

    #[test]
    fn evolve_identity_at_t_zero() {
        let p = params(0.3, 0.8);
        let label = CoherentLabel::new(0.5, 1.0, 0.2, -0.4).unwrap();
        assert_eq!(evolve(&label, 0.0, &p), label);
    }

    #[test]
    fn evolution_matches_label_shift() {
        for &(qv, t) in &[(1.0, 1.7), (0.6, 2.0)] {
            let p = params(0.3, qv);
            let label = CoherentLabel::new(0.5, 0.9, 0.3, -0.2).unwrap();
            let s0 = build_coherent_auto(&label, q(qv), 1e-13, 64).unwrap();
            let evolved = apply_evolution(&s0, t, &p, q(qv));
            let shifted = build_coherent_vector(&evolve(&label, t, &p), q(qv), &s0.basis, 1e-12)
                .unwrap();
            let diff: f64 = evolved
                .amplitudes
                .iter()
                .zip(shifted.amplitudes.iter())
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(diff < 1e-10, "q={qv}, t={t}: norm difference {diff:e}");
        }
    }

    #[test]
    fn action_identity_examples() {
        let p = params(0.0, 1.0);
        let label = CoherentLabel::new(2.0, 0.3, 3.0, -0.7).unwrap();
        let dev = action_identity_check(&label, &p, q(1.0), 1e-13, 64).unwrap();
        assert!(dev.abs() < 1e-10, "deviation {dev:e}");

        let vac = CoherentLabel::new(0.0, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(action_identity_check(&vac, &p, q(1.0), 1e-13, 16).unwrap(), 0.0);

        let pq = params(0.0, 0.5);
        let label = CoherentLabel::new(0.6, 0.2, 0.3, 0.1).unwrap();
        let dev = action_identity_check(&label, &pq, q(0.5), 1e-13, 64).unwrap();
        assert!(dev.abs() < 1e-10, "deviation {dev:e}");
    }
}
