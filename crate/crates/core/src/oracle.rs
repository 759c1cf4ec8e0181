//! Independent brute-force verification path: every expectation, variance,
//! and commutator mean computed directly from truncated state vectors and
//! operator matrices, then compared against the closed-form series values.

use ndarray::Array1;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{canonical_matrices, ladder_matrices, OperatorMatrix};
use crate::model::ModelParams;
use crate::qmath::QValue;
use crate::series::{self, Convention};
use crate::states::{build_coherent_auto, CoherentLabel, StateVector};
use crate::uncertainty::{CommutatorBounds, VarianceSet};

const HERMITIAN_IMAG_TOL: f64 = 1e-12;

/// `<psi| M |psi>`; real to within round-off when `M` carries the Hermitian
/// hint.
pub fn expectation(state: &StateVector, m: &OperatorMatrix) -> Result<Complex64> {
    let mv = m.apply(&state.amplitudes)?;
    let val: Complex64 = state
        .amplitudes
        .iter()
        .zip(mv.iter())
        .map(|(a, b)| a.conj() * b)
        .sum();
    if m.hermitian_hint && val.im.abs() > HERMITIAN_IMAG_TOL {
        return Err(Error::Invariant(format!(
            "Hermitian expectation has imaginary part {:e}",
            val.im
        )));
    }
    Ok(val)
}

/// `<M^2> - <M>^2` for Hermitian `M`, through matrix-vector products only.
pub fn variance(state: &StateVector, m: &OperatorMatrix) -> Result<f64> {
    let mv = m.apply(&state.amplitudes)?;
    let msq: f64 = mv.iter().map(|z| z.norm_sqr()).sum();
    let mean = expectation(state, m)?;
    Ok(msq - mean.norm_sqr())
}

/// `<psi| L R |psi>` as `<L^dag psi, R psi>`; the caller supplies the adjoint
/// of the left factor so no product matrix is ever formed.
pub fn pair_expectation(
    state: &StateVector,
    left_dag: &OperatorMatrix,
    right: &OperatorMatrix,
) -> Result<Complex64> {
    let lv = left_dag.apply(&state.amplitudes)?;
    let rv = right.apply(&state.amplitudes)?;
    Ok(lv.iter().zip(rv.iter()).map(|(a, b)| a.conj() * b).sum())
}

/// `<[A, B]>` via two matrix-vector chains.
pub fn commutator_expectation(
    state: &StateVector,
    a: &OperatorMatrix,
    b: &OperatorMatrix,
) -> Result<Complex64> {
    let bv = b.apply(&state.amplitudes)?;
    let abv = a.apply(&bv)?;
    let av = a.apply(&state.amplitudes)?;
    let bav = b.apply(&av)?;
    let dot = |v: &Array1<Complex64>| -> Complex64 {
        state.amplitudes.iter().zip(v.iter()).map(|(x, y)| x.conj() * y).sum()
    };
    Ok(dot(&abv) - dot(&bav))
}

#[derive(Debug, Clone, Serialize)]
pub struct CrossCheckReport {
    pub quantity: String,
    pub closed_form: Complex64,
    pub matrix_value: Complex64,
    pub abs_diff: f64,
    pub cutoff_used: usize,
    pub tail_estimate: f64,
}

/// Matrix-side values computed once per label for reuse by the closed-form
/// comparisons.
pub struct MatrixSide {
    pub state: StateVector,
    pub variances: VarianceSet,
    pub bounds: CommutatorBounds,
}

/// Matrix-oracle variances and commutator bounds for one label.
pub fn matrix_observables(
    label: &CoherentLabel,
    params: &ModelParams,
    q: QValue,
    trunc_tol: f64,
    n_max: usize,
) -> Result<MatrixSide> {
    let state = build_coherent_auto(label, q, trunc_tol, n_max)?;
    let ladders = ladder_matrices(&state.basis, q);
    let canon = canonical_matrices(params, &ladders)?;
    let variances = VarianceSet {
        chi1: variance(&state, &canon.x1)?,
        chi2: variance(&state, &canon.x2)?,
        kappa1: variance(&state, &canon.p1)?,
        kappa2: variance(&state, &canon.p2)?,
    };
    let bounds = CommutatorBounds {
        x1x2: 0.5 * commutator_expectation(&state, &canon.x1, &canon.x2)?.norm(),
        x1p1: 0.5 * commutator_expectation(&state, &canon.x1, &canon.p1)?.norm(),
        x2p2: 0.5 * commutator_expectation(&state, &canon.x2, &canon.p2)?.norm(),
        p1p2: 0.5 * commutator_expectation(&state, &canon.p1, &canon.p2)?.norm(),
    };
    Ok(MatrixSide { state, variances, bounds })
}

/// One report per closed-form identity: ladder expectations and bilinears,
/// canonical first and second moments, variances, and commutator means.
pub fn crosscheck(
    label: &CoherentLabel,
    params: &ModelParams,
    q: QValue,
    convention: Convention,
    tol: f64,
    n_max: usize,
) -> Result<Vec<CrossCheckReport>> {
    let trunc_tol = tol / 10.0;
    let state = build_coherent_auto(label, q, trunc_tol, n_max)?;
    let cutoff = state.basis.cutoff();
    let tail = state.truncation_error;
    let ladders = ladder_matrices(&state.basis, q);
    let canon = canonical_matrices(params, &ladders)?;

    let (j1, j2, g1, g2) = (label.j1, label.j2, label.gamma1, label.gamma2);
    let qv = q.value();
    let opq = 1.0 + qv * qv;
    let stol = series::DEFAULT_SERIES_TOL;
    let e = series::e_q(j1, j2, q, stol)?;
    let f1 = |g: f64| series::f_q(j1, j2, g, 1, q, convention, stol);
    let f2 = |g: f64| series::f_q(j1, j2, g, 2, q, convention, stol);
    let fj = |ga: f64, gb: f64| series::f_q_joint(j1, j2, ga, gb, q, convention, stol);

    let sj1 = Complex64::new(j1.sqrt() / e, 0.0);
    let sj2 = Complex64::new(j2.sqrt() / e, 0.0);
    let j1e = Complex64::new(j1 / e, 0.0);
    let j2e = Complex64::new(j2 / e, 0.0);
    let j12e = Complex64::new((j1 * j2).sqrt() / e, 0.0);
    let real = |x: f64| Complex64::new(x, 0.0);

    let mut reports: Vec<CrossCheckReport> = Vec::new();
    let mut push = |name: &str, closed: Complex64, mat: Complex64| {
        reports.push(CrossCheckReport {
            quantity: name.to_string(),
            closed_form: closed,
            matrix_value: mat,
            abs_diff: (closed - mat).norm(),
            cutoff_used: cutoff,
            tail_estimate: tail,
        });
    };

    // Single ladder expectations.
    push("A1", sj1 * f1(-g1)?, expectation(&state, &ladders.a1)?);
    push("A2", sj2 * f2(-g2)?, expectation(&state, &ladders.a2)?);
    push("A1dag", sj1 * f1(g1)?, expectation(&state, &ladders.a1_dag)?);
    push("A2dag", sj2 * f2(g2)?, expectation(&state, &ladders.a2_dag)?);

    // Same-mode bilinears; each left factor's adjoint is already in the
    // ladder set.
    push(
        "A1A1",
        j1e * f1(-opq * g1)?,
        pair_expectation(&state, &ladders.a1_dag, &ladders.a1)?,
    );
    push(
        "A1dagA1dag",
        j1e * f1(opq * g1)?,
        pair_expectation(&state, &ladders.a1, &ladders.a1_dag)?,
    );
    push("A1dagA1", real(j1), pair_expectation(&state, &ladders.a1, &ladders.a1)?);
    push(
        "A1A1dag",
        real(1.0 + qv * qv * j1),
        pair_expectation(&state, &ladders.a1_dag, &ladders.a1_dag)?,
    );
    push(
        "A2A2",
        j2e * f2(-opq * g2)?,
        pair_expectation(&state, &ladders.a2_dag, &ladders.a2)?,
    );
    push(
        "A2dagA2dag",
        j2e * f2(opq * g2)?,
        pair_expectation(&state, &ladders.a2, &ladders.a2_dag)?,
    );
    push("A2dagA2", real(j2), pair_expectation(&state, &ladders.a2, &ladders.a2)?);
    push(
        "A2A2dag",
        real(1.0 + qv * qv * j2),
        pair_expectation(&state, &ladders.a2_dag, &ladders.a2_dag)?,
    );

    // Cross-mode bilinears.
    push(
        "A1A2",
        j12e * fj(-g1, -g2)?,
        pair_expectation(&state, &ladders.a1_dag, &ladders.a2)?,
    );
    push(
        "A1dagA2dag",
        j12e * fj(g1, g2)?,
        pair_expectation(&state, &ladders.a1, &ladders.a2_dag)?,
    );
    push(
        "A2dagA1",
        j12e * fj(-g1, g2)?,
        pair_expectation(&state, &ladders.a2, &ladders.a1)?,
    );
    push(
        "A1dagA2",
        j12e * fj(g1, -g2)?,
        pair_expectation(&state, &ladders.a1, &ladders.a2)?,
    );

    // Canonical first moments, via the G values.
    let gb = series::g_bundle(j1, j2, g1, g2, q, convention, stol)?;
    let hbar = params.hbar();
    let (l1, l2, ll) = (params.lambda1, params.lambda2, params.lambda);
    let (sk1, sk2) = (params.k1.sqrt(), params.k2.sqrt());
    let half = 2.0 * ll;
    push(
        "X1",
        real(-hbar * sk1 / half * gb.gc1 + hbar * sk2 / half * gb.gc2),
        expectation(&state, &canon.x1)?,
    );
    push(
        "X2",
        Complex64::new(0.0, -hbar * sk1 / half) * gb.gs1
            + Complex64::new(0.0, -hbar * sk2 / half) * gb.gs2,
        expectation(&state, &canon.x2)?,
    );
    push(
        "P1",
        Complex64::new(0.0, -l2 * sk1 / half) * gb.gs1
            + Complex64::new(0.0, l1 * sk2 / half) * gb.gs2,
        expectation(&state, &canon.p1)?,
    );
    push(
        "P2",
        real(l2 * sk1 / half * gb.gc1 + l1 * sk2 / half * gb.gc2),
        expectation(&state, &canon.p2)?,
    );

    // Second moments.
    let d2 = 4.0 * ll * ll;
    let m1p = 1.0 + opq * j1 + gb.gq1;
    let m2p = 1.0 + opq * j2 + gb.gq2;
    let m1m = 1.0 + opq * j1 - gb.gq1;
    let m2m = 1.0 + opq * j2 - gb.gq2;
    push(
        "X1^2",
        real(hbar * hbar / d2 * (params.k1 * m1p + params.k2 * m2p)
            - hbar * hbar * sk1 * sk2 / (2.0 * ll * ll) * (gb.gc_plus + gb.gc_minus)),
        pair_expectation(&state, &canon.x1, &canon.x1)?,
    );
    push(
        "X2^2",
        real(hbar * hbar / d2 * (params.k1 * m1m + params.k2 * m2m)
            - hbar * hbar * sk1 * sk2 / (2.0 * ll * ll) * (gb.gc_plus - gb.gc_minus)),
        pair_expectation(&state, &canon.x2, &canon.x2)?,
    );
    push(
        "P1^2",
        real((l2 * l2 * params.k1 * m1m + l1 * l1 * params.k2 * m2m) / d2
            + l1 * l2 * sk1 * sk2 / (2.0 * ll * ll) * (gb.gc_plus - gb.gc_minus)),
        pair_expectation(&state, &canon.p1, &canon.p1)?,
    );
    push(
        "P2^2",
        real((l2 * l2 * params.k1 * m1p + l1 * l1 * params.k2 * m2p) / d2
            + l1 * l2 * sk1 * sk2 / (2.0 * ll * ll) * (gb.gc_plus + gb.gc_minus)),
        pair_expectation(&state, &canon.p2, &canon.p2)?,
    );

    // Variances and commutator means against the closed-form module.
    let v = crate::uncertainty::variances_closed_form(params, q, &gb, label)?;
    push("var(X1)", real(v.chi1), real(variance(&state, &canon.x1)?));
    push("var(X2)", real(v.chi2), real(variance(&state, &canon.x2)?));
    push("var(P1)", real(v.kappa1), real(variance(&state, &canon.p1)?));
    push("var(P2)", real(v.kappa2), real(variance(&state, &canon.p2)?));

    let b = crate::uncertainty::commutator_rhs(label, params, q);
    push(
        "rhs[X1,X2]",
        real(b.x1x2),
        real(0.5 * commutator_expectation(&state, &canon.x1, &canon.x2)?.norm()),
    );
    push(
        "rhs[X1,P1]",
        real(b.x1p1),
        real(0.5 * commutator_expectation(&state, &canon.x1, &canon.p1)?.norm()),
    );
    push(
        "rhs[X2,P2]",
        real(b.x2p2),
        real(0.5 * commutator_expectation(&state, &canon.x2, &canon.p2)?.norm()),
    );
    push(
        "rhs[P1,P2]",
        real(b.p1p2),
        real(0.5 * commutator_expectation(&state, &canon.p1, &canon.p2)?.norm()),
    );

    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::FockBasis;
    use crate::model::{derive_params, PhysicalInputs};
    use crate::states::build_coherent_vector;

    fn q(v: f64) -> QValue {
        QValue::new(v).unwrap()
    }

    fn params(theta: f64, qv: f64) -> ModelParams {
        derive_params(PhysicalInputs::standard(theta, q(qv)).unwrap()).unwrap()
    }

    #[test]
    fn vacuum_number_expectation() {
        let label = CoherentLabel::new(0.0, 0.0, 0.0, 0.0).unwrap();
        let basis = FockBasis::new(4).unwrap();
        let s = build_coherent_vector(&label, q(0.5), &basis, 1e-12).unwrap();
        let l = ladder_matrices(&basis, q(0.5));
        let n1 = l.a1_dag.matmul(&l.a1);
        assert_eq!(expectation(&s, &n1).unwrap().norm(), 0.0);
    }

    #[test]
    fn number_and_antinumber_expectations() {
        let label = CoherentLabel::new(0.7, 1.3, 0.4, -0.5).unwrap();
        let s = build_coherent_auto(&label, q(0.6), 1e-13, 64).unwrap();
        let l = ladder_matrices(&s.basis, q(0.6));
        let n2 = pair_expectation(&s, &l.a2, &l.a2).unwrap();
        assert!((n2.re - 0.4).abs() < 1e-10);
        let anti1 = pair_expectation(&s, &l.a1_dag, &l.a1_dag).unwrap();
        let expected = 1.0 + 0.36 * 0.7;
        assert!((anti1.re - expected).abs() < 1e-10);
    }

    #[test]
    fn expectation_dimension_mismatch() {
        let label = CoherentLabel::new(0.1, 0.0, 0.1, 0.0).unwrap();
        let b4 = FockBasis::new(4).unwrap();
        let s = build_coherent_vector(&label, q(0.5), &b4, 1.0).unwrap();
        let b6 = FockBasis::new(6).unwrap();
        let l = ladder_matrices(&b6, q(0.5));
        assert!(matches!(
            expectation(&s, &l.a1),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn crosscheck_classical_point() {
        let p = params(0.0, 1.0);
        let label = CoherentLabel::new(0.8, 0.9, 0.5, -0.3).unwrap();
        let reports =
            crosscheck(&label, &p, q(1.0), Convention::SpectralGap, 1e-10, 64).unwrap();
        for r in &reports {
            assert!(r.abs_diff < 1e-10, "{}: diff {:e}", r.quantity, r.abs_diff);
        }
    }

    #[test]
    fn crosscheck_deformed_point_spectral_gap() {
        let p = params(0.4, 0.7);
        let label = CoherentLabel::new(0.6, 1.1, 0.3, -0.8).unwrap();
        let reports =
            crosscheck(&label, &p, q(0.7), Convention::SpectralGap, 1e-10, 64).unwrap();
        for r in &reports {
            assert!(r.abs_diff < 1e-10, "{}: diff {:e}", r.quantity, r.abs_diff);
        }
    }

    #[test]
    fn paper_literal_convention_disagrees() {
        let p = params(0.0, 0.5);
        let label = CoherentLabel::new(0.5, 2.0, 0.3, 0.0).unwrap();
        let reports =
            crosscheck(&label, &p, q(0.5), Convention::PaperLiteral, 1e-10, 64).unwrap();
        let a1 = reports.iter().find(|r| r.quantity == "A1").unwrap();
        assert!(a1.abs_diff > 1e-4, "literal-convention diff only {:e}", a1.abs_diff);
    }

    #[test]
    fn oracle_variance_nonnegative() {
        let p = params(0.3, 0.8);
        let label = CoherentLabel::new(0.5, 0.7, 0.2, 1.9).unwrap();
        let s = build_coherent_auto(&label, q(0.8), 1e-13, 64).unwrap();
        let l = ladder_matrices(&s.basis, q(0.8));
        let c = canonical_matrices(&p, &l).unwrap();
        for m in [&c.x1, &c.x2, &c.p1, &c.p2] {
            assert!(variance(&s, m).unwrap() >= -1e-12);
        }
    }

    #[test]
    fn crosscheck_diff_shrinks_with_cutoff() {
        let label = CoherentLabel::new(0.9, 0.4, 0.6, -1.2).unwrap();
        let mut prev = f64::INFINITY;
        for &n in &[16usize, 32, 64] {
            let basis = FockBasis::new(n).unwrap();
            let s = build_coherent_vector(&label, q(0.6), &basis, 1.0).unwrap();
            let l = ladder_matrices(&basis, q(0.6));
            let n1 = pair_expectation(&s, &l.a1, &l.a1).unwrap();
            let diff = (n1.re - 0.9).abs();
            assert!(diff <= prev + 1e-14, "N={n}: {diff:e} > {prev:e}");
            prev = diff;
        }
    }
}
