//! Closed-form series evaluators: the normalization series `E_q`, the phased
//! sums `F_q`, and the G-family combinations entering the variance formulas.
//!
//! All sums are truncated double series over `(n1, n2)` with the cutoff chosen
//! from the rigorous tail bound, accumulated in increasing total order
//! `n1 + n2` with compensated summation.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmath::{cutoff_for_tol, q_int, QFactorialTable, QValue};

pub const DEFAULT_SERIES_TOL: f64 = 1e-12;
const SERIES_N_MAX: u32 = 4096;

/// Exponent convention for the phase factor in `F_q`.
///
/// The deformed lowering operator shifts the coherent phase by the spectral
/// gap `[n+1]_q - [n]_q = q^{2n}`, so only `SpectralGap` reproduces matrix
/// expectations; `PaperLiteral` keeps the printed exponent `q^{2 [n]_q}` for
/// side-by-side comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Convention {
    #[default]
    SpectralGap,
    PaperLiteral,
}

impl std::str::FromStr for Convention {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spectral-gap" => Ok(Convention::SpectralGap),
            "paper-literal" => Ok(Convention::PaperLiteral),
            other => Err(Error::Config(format!("unknown convention '{other}'"))),
        }
    }
}

impl Convention {
    fn exponent(self, n: u32, q: QValue) -> f64 {
        match self {
            Convention::SpectralGap => q.value().powi(2 * n as i32),
            Convention::PaperLiteral => q.value().powf(2.0 * q_int(n, q)),
        }
    }
}

/// Kahan-compensated complex accumulator.
#[derive(Default)]
struct Accumulator {
    re: f64,
    re_c: f64,
    im: f64,
    im_c: f64,
}

impl Accumulator {
    fn add(&mut self, z: Complex64) {
        let y = z.re - self.re_c;
        let t = self.re + y;
        self.re_c = (t - self.re) - y;
        self.re = t;
        let y = z.im - self.im_c;
        let t = self.im + y;
        self.im_c = (t - self.im) - y;
        self.im = t;
    }

    fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// Double sum `sum u[n1] v[n2]` in increasing total order.
fn rank_one_sum(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    let n = u.len();
    let mut acc = Accumulator::default();
    for s in 0..2 * n - 1 {
        let lo = s.saturating_sub(n - 1);
        let hi = s.min(n - 1);
        for n1 in lo..=hi {
            acc.add(u[n1] * v[s - n1]);
        }
    }
    acc.value()
}

/// Magnitude factors `J^n / [n]_q!` for `n` in `0..cutoff`.
fn magnitude_row(j: f64, cutoff: u32, table: &mut QFactorialTable) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(cutoff as usize);
    for n in 0..cutoff {
        out.push(j.powi(n as i32) / table.get(n)?);
    }
    Ok(out)
}

fn phased_row(
    mags: &[f64],
    gamma: f64,
    q: QValue,
    convention: Convention,
) -> Vec<Complex64> {
    mags.iter()
        .enumerate()
        .map(|(n, &m)| Complex64::from_polar(m, gamma * convention.exponent(n as u32, q)))
        .collect()
}

fn real_row(mags: &[f64]) -> Vec<Complex64> {
    mags.iter().map(|&m| Complex64::new(m, 0.0)).collect()
}

/// Normalization series `E_q(J1, J2)`, truncated so the neglected tail is at
/// most `tol`.
pub fn e_q(j1: f64, j2: f64, q: QValue, tol: f64) -> Result<f64> {
    let cutoff = cutoff_for_tol(j1, j2, q, tol, SERIES_N_MAX)?;
    let mut table = QFactorialTable::new(q);
    let u = real_row(&magnitude_row(j1, cutoff, &mut table)?);
    let v = real_row(&magnitude_row(j2, cutoff, &mut table)?);
    Ok(rank_one_sum(&u, &v).re)
}

/// `F_q(J1, J2, gamma)` with the phase attached to the mode selected by
/// `mode` (1 or 2).
pub fn f_q(
    j1: f64,
    j2: f64,
    gamma: f64,
    mode: u8,
    q: QValue,
    convention: Convention,
    tol: f64,
) -> Result<Complex64> {
    let cutoff = cutoff_for_tol(j1, j2, q, tol, SERIES_N_MAX)?;
    let mut table = QFactorialTable::new(q);
    let m1 = magnitude_row(j1, cutoff, &mut table)?;
    let m2 = magnitude_row(j2, cutoff, &mut table)?;
    let (u, v) = match mode {
        1 => (phased_row(&m1, gamma, q, convention), real_row(&m2)),
        2 => (real_row(&m1), phased_row(&m2, gamma, q, convention)),
        m => return Err(Error::Config(format!("F_q mode must be 1 or 2, got {m}"))),
    };
    Ok(rank_one_sum(&u, &v))
}

/// `F_q(J1, J2, gamma1, gamma2)` with a phase on each mode.
pub fn f_q_joint(
    j1: f64,
    j2: f64,
    gamma1: f64,
    gamma2: f64,
    q: QValue,
    convention: Convention,
    tol: f64,
) -> Result<Complex64> {
    let cutoff = cutoff_for_tol(j1, j2, q, tol, SERIES_N_MAX)?;
    let mut table = QFactorialTable::new(q);
    let u = phased_row(&magnitude_row(j1, cutoff, &mut table)?, gamma1, q, convention);
    let v = phased_row(&magnitude_row(j2, cutoff, &mut table)?, gamma2, q, convention);
    Ok(rank_one_sum(&u, &v))
}

/// The G-family values for one coherent label. `Gs` values are purely
/// imaginary and kept complex; the variance formulas consume their squares,
/// which are real and nonpositive.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GBundle {
    pub gc1: f64,
    pub gc2: f64,
    pub gs1: Complex64,
    pub gs2: Complex64,
    pub gq1: f64,
    pub gq2: f64,
    pub gc_plus: f64,
    pub gc_minus: f64,
    pub gs_plus: Complex64,
    pub gs_minus: Complex64,
    /// Normalization E_q(J1, J2) shared by every member.
    pub e: f64,
}

const PURITY_TOL: f64 = 1e-13;

pub fn g_bundle(
    j1: f64,
    j2: f64,
    gamma1: f64,
    gamma2: f64,
    q: QValue,
    convention: Convention,
    tol: f64,
) -> Result<GBundle> {
    let cutoff = cutoff_for_tol(j1, j2, q, tol, SERIES_N_MAX)?;
    let mut table = QFactorialTable::new(q);
    let m1 = magnitude_row(j1, cutoff, &mut table)?;
    let m2 = magnitude_row(j2, cutoff, &mut table)?;
    let e1 = real_row(&m1);
    let e2 = real_row(&m2);
    let e = rank_one_sum(&e1, &e2).re;

    let qv = q.value();
    let f = |g1: f64, g2: f64| -> Complex64 {
        let u = if g1 == 0.0 { e1.clone() } else { phased_row(&m1, g1, q, convention) };
        let v = if g2 == 0.0 { e2.clone() } else { phased_row(&m2, g2, q, convention) };
        rank_one_sum(&u, &v)
    };

    let f1 = f(gamma1, 0.0);
    let f2 = f(0.0, gamma2);
    let f1q = f((1.0 + qv * qv) * gamma1, 0.0);
    let f2q = f(0.0, (1.0 + qv * qv) * gamma2);
    let fp = f(gamma1, gamma2);
    let fm = f(gamma1, -gamma2);

    let sj1 = j1.sqrt();
    let sj2 = j2.sqrt();
    let sj12 = (j1 * j2).sqrt();
    // G_c = (sqrt(J)/E)(F(g) + F(-g)) = 2 sqrt(J) Re F / E, and likewise the
    // differences give the purely imaginary G_s values.
    let gc1 = 2.0 * sj1 * f1.re / e;
    let gc2 = 2.0 * sj2 * f2.re / e;
    let gs1 = Complex64::new(0.0, 2.0 * sj1 * f1.im / e);
    let gs2 = Complex64::new(0.0, 2.0 * sj2 * f2.im / e);
    let gq1 = 2.0 * j1 * f1q.re / e;
    let gq2 = 2.0 * j2 * f2q.re / e;
    let gc_plus = 2.0 * sj12 * fp.re / e;
    let gc_minus = 2.0 * sj12 * fm.re / e;
    let gs_plus = Complex64::new(0.0, 2.0 * sj12 * fp.im / e);
    let gs_minus = Complex64::new(0.0, 2.0 * sj12 * fm.im / e);

    let bundle = GBundle {
        gc1,
        gc2,
        gs1,
        gs2,
        gq1,
        gq2,
        gc_plus,
        gc_minus,
        gs_plus,
        gs_minus,
        e,
    };
    bundle.check_ranges(j1, j2)?;
    Ok(bundle)
}

impl GBundle {
    /// Range bounds inherited from `|cos| <= 1`, `|sin| <= 1` and the series
    /// weights summing to `E`.
    fn check_ranges(&self, j1: f64, j2: f64) -> Result<()> {
        let slack = 1e-10;
        let b1 = 2.0 * j1.sqrt() + slack;
        let b2 = 2.0 * j2.sqrt() + slack;
        let b12 = 2.0 * (j1 * j2).sqrt() + slack;
        let checks = [
            ("Gc1", self.gc1.abs(), b1),
            ("Gc2", self.gc2.abs(), b2),
            ("Gs1", self.gs1.im.abs(), b1),
            ("Gs2", self.gs2.im.abs(), b2),
            ("Gc+", self.gc_plus.abs(), b12),
            ("Gc-", self.gc_minus.abs(), b12),
            ("Gs+", self.gs_plus.im.abs(), b12),
            ("Gs-", self.gs_minus.im.abs(), b12),
        ];
        for (name, v, bound) in checks {
            if v > bound {
                return Err(Error::Invariant(format!("{name} = {v} exceeds range bound {bound}")));
            }
        }
        for (name, v) in [("Gs1", self.gs1), ("Gs2", self.gs2), ("Gs+", self.gs_plus), ("Gs-", self.gs_minus)]
        {
            if v.re.abs() > PURITY_TOL {
                return Err(Error::Invariant(format!("{name} has real part {:e}", v.re)));
            }
        }
        Ok(())
    }
}
