//! Truncated two-mode Fock basis and dense matrix representations of the
//! deformed ladder and canonical operators.
//!
//! Raising past the cutoff maps to the zero vector, which corrupts the top
//! levels of each mode; operator identities are therefore checked on the
//! interior subspace `n_i <= N - 2` only.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::qmath::{q_int, QValue};

pub const HERMITICITY_TOL: f64 = 1e-13;

/// Two-mode truncated basis; each mode holds `n_i` in `0..cutoff`, with the
/// linear index `k = n1 * cutoff + n2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockBasis {
    cutoff: usize,
}

impl FockBasis {
    pub fn new(cutoff: usize) -> Result<Self> {
        if cutoff < 2 {
            return Err(Error::Invariant(format!(
                "basis cutoff must be at least 2, got {cutoff}"
            )));
        }
        Ok(FockBasis { cutoff })
    }

    #[inline]
    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.cutoff * self.cutoff
    }

    #[inline]
    pub fn index(&self, n1: usize, n2: usize) -> usize {
        debug_assert!(n1 < self.cutoff && n2 < self.cutoff);
        n1 * self.cutoff + n2
    }

    #[inline]
    pub fn modes(&self, k: usize) -> (usize, usize) {
        (k / self.cutoff, k % self.cutoff)
    }

    /// Indices of the interior subspace, `n_i <= cutoff - 2`.
    pub fn interior_indices(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity((self.cutoff - 1) * (self.cutoff - 1));
        for n1 in 0..self.cutoff - 1 {
            for n2 in 0..self.cutoff - 1 {
                out.push(self.index(n1, n2));
            }
        }
        out
    }
}

/// Dense complex matrix on the truncated basis.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    pub entries: Array2<Complex64>,
    pub hermitian_hint: bool,
}

impl OperatorMatrix {
    pub fn zeros(dim: usize) -> Self {
        OperatorMatrix {
            entries: Array2::zeros((dim, dim)),
            hermitian_hint: false,
        }
    }

    pub fn identity(dim: usize) -> Self {
        OperatorMatrix {
            entries: Array2::eye(dim),
            hermitian_hint: true,
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn dagger(&self) -> Self {
        let mut t = self.entries.t().to_owned();
        t.mapv_inplace(|z| z.conj());
        OperatorMatrix { entries: t, hermitian_hint: self.hermitian_hint }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        OperatorMatrix {
            entries: self.entries.mapv(|z| z * c),
            hermitian_hint: false,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        OperatorMatrix {
            entries: &self.entries + &other.entries,
            hermitian_hint: self.hermitian_hint && other.hermitian_hint,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        OperatorMatrix {
            entries: &self.entries - &other.entries,
            hermitian_hint: self.hermitian_hint && other.hermitian_hint,
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        OperatorMatrix {
            entries: self.entries.dot(&other.entries),
            hermitian_hint: false,
        }
    }

    pub fn commutator(&self, other: &Self) -> Self {
        let ab = self.entries.dot(&other.entries);
        let ba = other.entries.dot(&self.entries);
        OperatorMatrix { entries: ab - ba, hermitian_hint: false }
    }

    pub fn apply(&self, v: &Array1<Complex64>) -> Result<Array1<Complex64>> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: v.len() });
        }
        Ok(self.entries.dot(v))
    }

    /// Max-norm of `M - M^dagger`.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        let n = self.dim();
        for i in 0..n {
            for j in 0..n {
                let d = (self.entries[(i, j)] - self.entries[(j, i)].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn max_norm(&self) -> f64 {
        self.entries.iter().fold(0.0_f64, |m, z| m.max(z.norm()))
    }

    /// Max-norm over the rows and columns named in `indices`.
    pub fn max_norm_on(&self, indices: &[usize]) -> f64 {
        let mut worst = 0.0_f64;
        for &i in indices {
            for &j in indices {
                worst = worst.max(self.entries[(i, j)].norm());
            }
        }
        worst
    }

    fn tag_hermitian(mut self) -> Result<Self> {
        let defect = self.hermiticity_defect();
        if defect >= HERMITICITY_TOL {
            return Err(Error::Invariant(format!(
                "matrix tagged Hermitian has defect {defect:e}"
            )));
        }
        self.hermitian_hint = true;
        Ok(self)
    }
}

/// The deformed ladder operators and their adjoints.
#[derive(Debug, Clone)]
pub struct LadderSet {
    pub a1: OperatorMatrix,
    pub a2: OperatorMatrix,
    pub a1_dag: OperatorMatrix,
    pub a2_dag: OperatorMatrix,
}

/// Lowering amplitude `sqrt([n_i]_q)`; raising out of the truncated range
/// maps to zero (hard cutoff).
pub fn ladder_matrices(basis: &FockBasis, q: QValue) -> LadderSet {
    let n = basis.cutoff();
    let dim = basis.dim();
    let mut a1 = OperatorMatrix::zeros(dim);
    let mut a2 = OperatorMatrix::zeros(dim);
    for n1 in 0..n {
        for n2 in 0..n {
            let k = basis.index(n1, n2);
            if n1 > 0 {
                let amp = q_int(n1 as u32, q).sqrt();
                a1.entries[(basis.index(n1 - 1, n2), k)] = Complex64::new(amp, 0.0);
            }
            if n2 > 0 {
                let amp = q_int(n2 as u32, q).sqrt();
                a2.entries[(basis.index(n1, n2 - 1), k)] = Complex64::new(amp, 0.0);
            }
        }
    }
    let a1_dag = a1.dagger();
    let a2_dag = a2.dagger();
    LadderSet { a1, a2, a1_dag, a2_dag }
}

/// The canonical position and momentum operators on the truncated basis.
#[derive(Debug, Clone)]
pub struct CanonicalSet {
    pub x1: OperatorMatrix,
    pub x2: OperatorMatrix,
    pub p1: OperatorMatrix,
    pub p2: OperatorMatrix,
}

/// Inversion of the ladder definitions:
///
/// ```text
/// X1 = -hbar sqrt(K1)/(2L) (A1 + A1+) + hbar sqrt(K2)/(2L) (A2 + A2+)
/// X2 =  i hbar sqrt(K1)/(2L) (A1 - A1+) + i hbar sqrt(K2)/(2L) (A2 - A2+)
/// P1 =  i l2 sqrt(K1)/(2L) (A1 - A1+) - i l1 sqrt(K2)/(2L) (A2 - A2+)
/// P2 =  l2 sqrt(K1)/(2L) (A1 + A1+) + l1 sqrt(K2)/(2L) (A2 + A2+)
/// ```
pub fn canonical_matrices(params: &ModelParams, ladders: &LadderSet) -> Result<CanonicalSet> {
    let hbar = params.hbar();
    let (l1, l2, ll) = (params.lambda1, params.lambda2, params.lambda);
    let (sk1, sk2) = (params.k1.sqrt(), params.k2.sqrt());
    let re = |x: f64| Complex64::new(x, 0.0);
    let im = |x: f64| Complex64::new(0.0, x);

    let sum1 = ladders.a1.add(&ladders.a1_dag);
    let sum2 = ladders.a2.add(&ladders.a2_dag);
    let dif1 = ladders.a1.sub(&ladders.a1_dag);
    let dif2 = ladders.a2.sub(&ladders.a2_dag);

    let x1 = sum1
        .scale(re(-hbar * sk1 / (2.0 * ll)))
        .add(&sum2.scale(re(hbar * sk2 / (2.0 * ll))))
        .tag_hermitian()?;
    let x2 = dif1
        .scale(im(hbar * sk1 / (2.0 * ll)))
        .add(&dif2.scale(im(hbar * sk2 / (2.0 * ll))))
        .tag_hermitian()?;
    let p1 = dif1
        .scale(im(l2 * sk1 / (2.0 * ll)))
        .add(&dif2.scale(im(-l1 * sk2 / (2.0 * ll))))
        .tag_hermitian()?;
    let p2 = sum1
        .scale(re(l2 * sk1 / (2.0 * ll)))
        .add(&sum2.scale(re(l1 * sk2 / (2.0 * ll))))
        .tag_hermitian()?;
    Ok(CanonicalSet { x1, x2, p1, p2 })
}

/// Interior-subspace residual of the deformed algebra
/// `A_i A_j+ - ((q^2 - 1) d_ij + 1) A_j+ A_i = d_ij`.
pub fn deformed_algebra_residual(ladders: &LadderSet, q: QValue, basis: &FockBasis) -> f64 {
    let interior = basis.interior_indices();
    let dim = basis.dim();
    let qv = q.value();
    let q2 = Complex64::new(qv * qv, 0.0);
    let eye = OperatorMatrix::identity(dim);
    let ops = [&ladders.a1, &ladders.a2];
    let dags = [&ladders.a1_dag, &ladders.a2_dag];
    let mut worst = 0.0_f64;
    for i in 0..2 {
        for j in 0..2 {
            let lhs = ops[i].matmul(dags[j]);
            let residual = if i == j {
                lhs.sub(&dags[j].matmul(ops[i]).scale(q2)).sub(&eye)
            } else {
                lhs.sub(&dags[j].matmul(ops[i]))
            };
            worst = worst.max(residual.max_norm_on(&interior));
        }
    }
    // [A1, A2] = 0 half of the algebra.
    worst = worst.max(ladders.a1.commutator(&ladders.a2).max_norm_on(&interior));
    worst
}

/// Interior residuals of the deformed canonical commutation relations and the
/// quadratic number-operator expansions.
#[derive(Debug, Clone, serde::Serialize)]
pub struct CommutatorResiduals {
    pub x1x2: f64,
    pub x1p1: f64,
    pub x2p2: f64,
    pub p1p2: f64,
    pub x1p2: f64,
    pub x2p1: f64,
    pub k1_expansion: f64,
    pub k2_expansion: f64,
}

impl CommutatorResiduals {
    pub fn max(&self) -> f64 {
        [
            self.x1x2,
            self.x1p1,
            self.x2p2,
            self.p1p2,
            self.x1p2,
            self.x2p1,
            self.k1_expansion,
            self.k2_expansion,
        ]
        .into_iter()
        .fold(0.0_f64, f64::max)
    }
}

pub fn verify_dynamical_commutators(
    params: &ModelParams,
    q: QValue,
    basis: &FockBasis,
) -> Result<CommutatorResiduals> {
    let ladders = ladder_matrices(basis, q);
    let canon = canonical_matrices(params, &ladders)?;
    let interior = basis.interior_indices();
    let dim = basis.dim();
    let qv = q.value();
    let one_m_q2 = 1.0 - qv * qv;
    let hbar = params.hbar();
    let (l1, l2, ll) = (params.lambda1, params.lambda2, params.lambda);
    let theta = params.theta();
    let im = |x: f64| Complex64::new(0.0, x);

    let n1 = ladders.a1_dag.matmul(&ladders.a1);
    let n2 = ladders.a2_dag.matmul(&ladders.a2);
    let k1n1 = n1.scale(Complex64::new(params.k1, 0.0));
    let k2n2 = n2.scale(Complex64::new(params.k2, 0.0));
    let eye = OperatorMatrix::identity(dim);

    // [X1, X2] = i theta + (1-q^2) (i hbar^2 / 2L^2) (K2 N2 - K1 N1)
    let rhs_x1x2 = eye
        .scale(im(theta))
        .add(&k2n2.sub(&k1n1).scale(im(one_m_q2 * hbar * hbar / (2.0 * ll * ll))));
    let x1x2 = canon.x1.commutator(&canon.x2).sub(&rhs_x1x2).max_norm_on(&interior);

    // [Xi, Pi] = i hbar - (1-q^2) (i hbar / 2L^2) (l1 K2 N2 + l2 K1 N1)
    let rhs_xp = eye.scale(im(hbar)).sub(
        &k2n2
            .scale(Complex64::new(l1, 0.0))
            .add(&k1n1.scale(Complex64::new(l2, 0.0)))
            .scale(im(one_m_q2 * hbar / (2.0 * ll * ll))),
    );
    let x1p1 = canon.x1.commutator(&canon.p1).sub(&rhs_xp).max_norm_on(&interior);
    let x2p2 = canon.x2.commutator(&canon.p2).sub(&rhs_xp).max_norm_on(&interior);

    // [P1, P2] = i (1-q^2) (1 / 2L^2) (l1^2 K2 N2 - l2^2 K1 N1)
    let rhs_p1p2 = k2n2
        .scale(Complex64::new(l1 * l1, 0.0))
        .sub(&k1n1.scale(Complex64::new(l2 * l2, 0.0)))
        .scale(im(one_m_q2 / (2.0 * ll * ll)));
    let p1p2 = canon.p1.commutator(&canon.p2).sub(&rhs_p1p2).max_norm_on(&interior);

    let x1p2 = canon.x1.commutator(&canon.p2).max_norm_on(&interior);
    let x2p1 = canon.x2.commutator(&canon.p1).max_norm_on(&interior);

    let k1_expansion =
        number_expansion_residual(params, &canon, &k1n1, params.lambda1, 1.0, &interior);
    let k2_expansion =
        number_expansion_residual(params, &canon, &k2n2, params.lambda2, -1.0, &interior);

    Ok(CommutatorResiduals { x1x2, x1p1, x2p2, p1p2, x1p2, x2p1, k1_expansion, k2_expansion })
}

/// Residual of `K_i Ai+ Ai` against its expansion in canonical variables.
/// `sign` is `+1` for mode 1 and `-1` for mode 2; it flips the mixed
/// `X P` terms, the `[X1, X2]` term, and the `[P1, P2]` term.
fn number_expansion_residual(
    params: &ModelParams,
    canon: &CanonicalSet,
    kn: &OperatorMatrix,
    lambda: f64,
    sign: f64,
    interior: &[usize],
) -> f64 {
    let hbar = params.hbar();
    let l = lambda;
    let re = |x: f64| Complex64::new(x, 0.0);
    let im = |x: f64| Complex64::new(0.0, x);
    let x1sq = canon.x1.matmul(&canon.x1);
    let x2sq = canon.x2.matmul(&canon.x2);
    let p1sq = canon.p1.matmul(&canon.p1);
    let p2sq = canon.p2.matmul(&canon.p2);
    let expansion = x1sq
        .add(&x2sq)
        .scale(re(l * l / (hbar * hbar)))
        .add(&p1sq)
        .add(&p2sq)
        .sub(&canon.x1.matmul(&canon.p2).scale(re(sign * 2.0 * l / hbar)))
        .add(&canon.x2.matmul(&canon.p1).scale(re(sign * 2.0 * l / hbar)))
        .add(&canon.x1.commutator(&canon.x2).scale(im(sign * l * l / (hbar * hbar))))
        .add(&canon.x1.commutator(&canon.p1).scale(im(l / hbar)))
        .add(&canon.x2.commutator(&canon.p2).scale(im(l / hbar)))
        .add(&canon.p1.commutator(&canon.p2).scale(im(sign)));
    kn.sub(&expansion).max_norm_on(interior)
}

/// Two-sided evaluation of one of the solved commutator forms; diagnostic
/// only, no threshold is applied.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SolvedFormComparison {
    pub name: &'static str,
    pub commutator_expectation: Complex64,
    pub solved_form_expectation: Complex64,
    pub discrepancy: f64,
}

/// Expectations of both sides of the solved dynamical commutator forms in the
/// given normalized state.
pub fn solved_commutator_forms(
    params: &ModelParams,
    q: QValue,
    basis: &FockBasis,
    state: &Array1<Complex64>,
) -> Result<Vec<SolvedFormComparison>> {
    let ladders = ladder_matrices(basis, q);
    let canon = canonical_matrices(params, &ladders)?;
    let dim = basis.dim();
    let qv = q.value();
    let (q2, one_m_q2, one_p_q2) = (qv * qv, 1.0 - qv * qv, 1.0 + qv * qv);
    let hbar = params.hbar();
    let (l1, l2, ll) = (params.lambda1, params.lambda2, params.lambda);
    let theta = params.theta();
    let re = |x: f64| Complex64::new(x, 0.0);
    let im = |x: f64| Complex64::new(0.0, x);

    let expect = |m: &OperatorMatrix| -> Result<Complex64> {
        let mv = m.apply(state)?;
        Ok(state.iter().zip(mv.iter()).map(|(a, b)| a.conj() * b).sum())
    };

    let eye = OperatorMatrix::identity(dim);
    let xsq = canon.x1.matmul(&canon.x1).add(&canon.x2.matmul(&canon.x2));
    let psq = canon.p1.matmul(&canon.p1).add(&canon.p2.matmul(&canon.p2));
    let xp_cross = canon.x1.matmul(&canon.p2).sub(&canon.x2.matmul(&canon.p1));
    let ll4 = ll.powi(4);

    let q1_rhs = eye.scale(im(2.0 * theta / one_p_q2)).add(
        &xsq.scale(re((l2 - l1) / ll))
            .add(&xp_cross.scale(re(
                2.0 * hbar * (ll.powi(3) - one_m_q2 * (ll - 1.0) * l1 * l2) / ll4,
            )))
            .scale(im(one_m_q2 / one_p_q2)),
    );
    let q23_rhs = eye.scale(im(2.0 * hbar / one_p_q2)).sub(
        &xsq.scale(re(l1 * l2 / ll))
            .add(&psq.scale(re(2.0 * hbar / ll)))
            .sub(&xp_cross.scale(re(
                2.0 * one_m_q2 * (l1 - l2) * (ll - 1.0) * l1 * l2 / ll4,
            )))
            .scale(im(one_m_q2 / one_p_q2)),
    );
    let q4_rhs = xsq
        .scale(re((hbar - 1.0) * (l1 - l2) * l1 * l2 / (hbar * hbar * ll)))
        .add(&psq.scale(re(2.0 * (l1 - l2) / ll)))
        .add(&xp_cross.scale(re(
            l1 * l2
                * ((2.0 * ll.powi(3) - one_p_q2 * (ll - 1.0) * ll * ll) / (hbar * ll4)
                    - 2.0 * one_m_q2 * (ll - 1.0) * (l1 * l1 + l2 * l2 - l1 * l2)
                        / (hbar * ll4)),
        )))
        .scale(im(one_m_q2 / one_p_q2));

    let pairs: [(&'static str, OperatorMatrix, OperatorMatrix); 4] = [
        ("[X1,X2]", canon.x1.commutator(&canon.x2), q1_rhs),
        ("[X1,P1]", canon.x1.commutator(&canon.p1), q23_rhs.clone()),
        ("[X2,P2]", canon.x2.commutator(&canon.p2), q23_rhs),
        ("[P1,P2]", canon.p1.commutator(&canon.p2), q4_rhs),
    ];
    let _ = q2;
    pairs
        .into_iter()
        .map(|(name, lhs, rhs)| {
            let a = expect(&lhs)?;
            let b = expect(&rhs)?;
            Ok(SolvedFormComparison {
                name,
                commutator_expectation: a,
                solved_form_expectation: b,
                discrepancy: (a - b).norm(),
            })
        })
        .collect()
}
