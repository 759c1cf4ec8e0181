//! Closed-form variances, commutator bounds, generalized-uncertainty-relation
//! reports, and the feasibility conditions.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::qmath::QValue;
use crate::series::{g_bundle, Convention, GBundle};
use crate::states::CoherentLabel;

/// Default absolute-plus-relative band for "satisfied".
pub const DEFAULT_GUR_TOL: f64 = 1e-9;
/// Relative band for "saturated".
pub const SATURATION_REL_TOL: f64 = 1e-6;
/// Negative round-off below this magnitude is clamped; anything worse is an
/// error.
const NEGATIVE_VARIANCE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PairTag {
    X1X2,
    X1P1,
    X2P2,
    P1P2,
    X1P2,
    X2P1,
}

impl PairTag {
    pub const ALL: [PairTag; 6] = [
        PairTag::X1X2,
        PairTag::X1P1,
        PairTag::X2P2,
        PairTag::P1P2,
        PairTag::X1P2,
        PairTag::X2P1,
    ];
}

/// One uncertainty-relation evaluation: `lhs = dO1 * dO2`,
/// `rhs = |<[O1,O2]>| / 2`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GurReport {
    pub pair: PairTag,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs / rhs`, infinite when `rhs = 0` and `lhs > 0`.
    pub ratio: f64,
    pub satisfied: bool,
    pub saturated: bool,
}

impl GurReport {
    fn evaluate(pair: PairTag, lhs: f64, rhs: f64, tol: f64) -> Self {
        let ratio = if rhs == 0.0 {
            if lhs > 0.0 {
                f64::INFINITY
            } else {
                1.0
            }
        } else {
            lhs / rhs
        };
        GurReport {
            pair,
            lhs,
            rhs,
            ratio,
            satisfied: lhs + tol * rhs.max(1.0) >= rhs,
            saturated: (lhs - rhs).abs() <= SATURATION_REL_TOL * rhs,
        }
    }
}

/// The four closed-form variances.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct VarianceSet {
    pub chi1: f64,
    pub chi2: f64,
    pub kappa1: f64,
    pub kappa2: f64,
}

fn clamp_variance(name: &str, v: f64) -> Result<f64> {
    if v >= 0.0 {
        Ok(v)
    } else if v > -NEGATIVE_VARIANCE_TOL {
        Ok(0.0)
    } else {
        Err(Error::Invariant(format!("variance {name} = {v:e} is genuinely negative")))
    }
}

/// Variances from the G-family values; the `Gs^2` contributions enter as the
/// real value of a squared imaginary, hence nonpositive.
pub fn variances_closed_form(
    params: &ModelParams,
    q: QValue,
    gb: &GBundle,
    label: &CoherentLabel,
) -> Result<VarianceSet> {
    let hbar = params.hbar();
    let (l1, l2, ll) = (params.lambda1, params.lambda2, params.lambda);
    let (k1, k2) = (params.k1, params.k2);
    let qv = q.value();
    let opq = 1.0 + qv * qv;
    let (j1, j2) = (label.j1, label.j2);

    let gs1_sq = (gb.gs1 * gb.gs1).re;
    let gs2_sq = (gb.gs2 * gb.gs2).re;
    let gs1_gs2 = (gb.gs1 * gb.gs2).re;

    // Mode blocks that repeat across the four formulas.
    let plus1 = 1.0 + opq * j1 + gb.gq1 - gb.gc1 * gb.gc1;
    let plus2 = 1.0 + opq * j2 + gb.gq2 - gb.gc2 * gb.gc2;
    let minus1 = 1.0 + opq * j1 - gb.gq1 + gs1_sq;
    let minus2 = 1.0 + opq * j2 - gb.gq2 + gs2_sq;

    let sk12 = (k1 * k2).sqrt();
    let d2 = 4.0 * ll * ll;

    let chi1 = hbar * hbar / d2
        * (k1 * plus1 + k2 * plus2
            + 2.0 * sk12 * (-gb.gc_plus - gb.gc_minus + gb.gc1 * gb.gc2));
    let chi2 = hbar * hbar / d2
        * (k1 * minus1 + k2 * minus2 + 2.0 * sk12 * (-gb.gc_plus + gb.gc_minus + gs1_gs2));
    let kappa1 = (l2 * l2 * k1 * minus1
        + l1 * l1 * k2 * minus2
        + 2.0 * l1 * l2 * sk12 * (gb.gc_plus - gb.gc_minus - gs1_gs2))
        / d2;
    let kappa2 = (l2 * l2 * k1 * plus1
        + l1 * l1 * k2 * plus2
        + 2.0 * l1 * l2 * sk12 * (gb.gc_plus + gb.gc_minus - gb.gc1 * gb.gc2))
        / d2;

    Ok(VarianceSet {
        chi1: clamp_variance("chi1", chi1)?,
        chi2: clamp_variance("chi2", chi2)?,
        kappa1: clamp_variance("kappa1", kappa1)?,
        kappa2: clamp_variance("kappa2", kappa2)?,
    })
}

/// The four gamma-independent right-hand sides of the uncertainty relation.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CommutatorBounds {
    pub x1x2: f64,
    pub x1p1: f64,
    pub x2p2: f64,
    pub p1p2: f64,
}

/// Bounds with `a_i = 1 - (1 - q^2) J_i`:
///
/// ```text
/// hbar^2/(4L^2) |K1 a1 - K2 a2|,    hbar/(4L^2) |l2 K1 a1 + l1 K2 a2|  (x2),
/// 1/(4L^2) |l2^2 K1 a1 - l1^2 K2 a2|
/// ```
pub fn commutator_rhs(label: &CoherentLabel, params: &ModelParams, q: QValue) -> CommutatorBounds {
    let hbar = params.hbar();
    let (l1, l2, ll) = (params.lambda1, params.lambda2, params.lambda);
    let (k1, k2) = (params.k1, params.k2);
    let qv = q.value();
    let a1 = 1.0 - (1.0 - qv * qv) * label.j1;
    let a2 = 1.0 - (1.0 - qv * qv) * label.j2;
    let d2 = 4.0 * ll * ll;
    let xp = hbar / d2 * (l2 * k1 * a1 + l1 * k2 * a2).abs();
    CommutatorBounds {
        x1x2: hbar * hbar / d2 * (k1 * a1 - k2 * a2).abs(),
        x1p1: xp,
        x2p2: xp,
        p1p2: (l2 * l2 * k1 * a1 - l1 * l1 * k2 * a2).abs() / d2,
    }
}

/// Assemble the six reports from precomputed variances and bounds.
pub fn gur_reports_from_parts(
    variances: &VarianceSet,
    bounds: &CommutatorBounds,
    tol: f64,
) -> Vec<GurReport> {
    let d = |v: f64| v.sqrt();
    vec![
        GurReport::evaluate(PairTag::X1X2, d(variances.chi1) * d(variances.chi2), bounds.x1x2, tol),
        GurReport::evaluate(PairTag::X1P1, d(variances.chi1) * d(variances.kappa1), bounds.x1p1, tol),
        GurReport::evaluate(PairTag::X2P2, d(variances.chi2) * d(variances.kappa2), bounds.x2p2, tol),
        GurReport::evaluate(PairTag::P1P2, d(variances.kappa1) * d(variances.kappa2), bounds.p1p2, tol),
        // The two commuting cross pairs have identically zero right-hand side.
        GurReport::evaluate(PairTag::X1P2, d(variances.chi1) * d(variances.kappa2), 0.0, tol),
        GurReport::evaluate(PairTag::X2P1, d(variances.chi2) * d(variances.kappa1), 0.0, tol),
    ]
}

/// Full closed-form evaluation for one label.
pub fn gur_report(
    label: &CoherentLabel,
    params: &ModelParams,
    q: QValue,
    convention: Convention,
    series_tol: f64,
    tol: f64,
) -> Result<Vec<GurReport>> {
    let gb = g_bundle(label.j1, label.j2, label.gamma1, label.gamma2, q, convention, series_tol)?;
    let variances = variances_closed_form(params, q, &gb, label)?;
    let bounds = commutator_rhs(label, params, q);
    Ok(gur_reports_from_parts(&variances, &bounds, tol))
}

/// Signed values of the four feasibility conditions and their reduced forms;
/// positivity is reported, never assumed.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FeasibilityValues {
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub p4: f64,
    /// `4 J1 - Gc1^2 + Gs1^2`
    pub reduced1: f64,
    /// `4 J2 - Gc2^2 + Gs2^2`
    pub reduced2: f64,
    /// `2 Gc+ - (Gc1 Gc2 + Gs1 Gs2)`
    pub reduced_cross: f64,
}

pub fn feasibility_conditions(
    label: &CoherentLabel,
    params: &ModelParams,
    gb: &GBundle,
) -> FeasibilityValues {
    let (l1, l2) = (params.lambda1, params.lambda2);
    let (k1, k2) = (params.k1, params.k2);
    let (sk1, sk2) = (k1.sqrt(), k2.sqrt());
    let (j1, j2) = (label.j1, label.j2);
    let gs1_sq = (gb.gs1 * gb.gs1).re;
    let gs2_sq = (gb.gs2 * gb.gs2).re;
    let gs1_gs2 = (gb.gs1 * gb.gs2).re;

    let p1 = k1 * (2.0 * j1 + gb.gq1) + k2 * (2.0 * j2 + gb.gq2)
        - 2.0 * sk1 * sk2 * (gb.gc_plus + gb.gc_minus)
        - (sk1 * gb.gc1 - sk2 * gb.gc2).powi(2);
    // (sqrt(K1) Gs1 + sqrt(K2) Gs2)^2 expanded over the imaginary Gs values.
    let p2 = k1 * (2.0 * j1 - gb.gq1) + k2 * (2.0 * j2 - gb.gq2)
        - 2.0 * sk1 * sk2 * (gb.gc_plus - gb.gc_minus)
        + k1 * gs1_sq
        + k2 * gs2_sq
        + 2.0 * sk1 * sk2 * gs1_gs2;
    let p3 = l2 * l2 * k1 * (2.0 * j1 - gb.gq1) + l1 * l1 * k2 * (2.0 * j2 - gb.gq2)
        + 2.0 * l1 * l2 * sk1 * sk2 * (gb.gc_plus - gb.gc_minus)
        + l2 * l2 * k1 * gs1_sq
        + l1 * l1 * k2 * gs2_sq
        - 2.0 * l1 * l2 * sk1 * sk2 * gs1_gs2;
    // The square here is over the Gc values; this is the form consistent
    // with the momentum variance, mirroring how p1 pairs with chi1.
    let p4 = l2 * l2 * k1 * (2.0 * j1 + gb.gq1) + l1 * l1 * k2 * (2.0 * j2 + gb.gq2)
        + 2.0 * l1 * l2 * sk1 * sk2 * (gb.gc_plus + gb.gc_minus)
        - (l2 * sk1 * gb.gc1 + l1 * sk2 * gb.gc2).powi(2);

    FeasibilityValues {
        p1,
        p2,
        p3,
        p4,
        reduced1: 4.0 * j1 - gb.gc1 * gb.gc1 + gs1_sq,
        reduced2: 4.0 * j2 - gb.gc2 * gb.gc2 + gs2_sq,
        reduced_cross: 2.0 * gb.gc_plus - (gb.gc1 * gb.gc2 + gs1_gs2),
    }
}
