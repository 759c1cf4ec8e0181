//! q-deformed combinatorics and series truncation control.
//!
//! The basic bracket is `[n]_q = (1 - q^{2n}) / (1 - q^2)`, which reduces to
//! `n` at `q = 1` and is bounded by `1 / (1 - q^2)` for `q < 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Deformation parameter, restricted to `(0, 1]` at construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct QValue(f64);

impl QValue {
    pub fn new(q: f64) -> Result<Self> {
        if q.is_finite() && q > 0.0 && q <= 1.0 {
            Ok(QValue(q))
        } else {
            Err(Error::InvalidQ(q))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// True at the undeformed point `q = 1`.
    #[inline]
    pub fn is_classical(self) -> bool {
        self.0 == 1.0
    }
}

impl TryFrom<f64> for QValue {
    type Error = Error;
    fn try_from(q: f64) -> Result<Self> {
        QValue::new(q)
    }
}

impl From<QValue> for f64 {
    fn from(q: QValue) -> f64 {
        q.0
    }
}

/// The q-bracket `[n]_q`. Explicit branch at `q = 1` avoids the 0/0 form.
pub fn q_int(n: u32, q: QValue) -> f64 {
    let qv = q.value();
    if q.is_classical() {
        n as f64
    } else {
        let q2 = qv * qv;
        (1.0 - q2.powi(n as i32)) / (1.0 - q2)
    }
}

/// The q-factorial `[n]_q! = [1]_q [2]_q ... [n]_q`, with `[0]_q! = 1`.
pub fn q_factorial(n: u32, q: QValue) -> Result<f64> {
    let mut acc = 1.0_f64;
    for k in 1..=n {
        acc *= q_int(k, q);
        if !acc.is_finite() {
            return Err(Error::Range(format!("q_factorial({n}) overflows f64")));
        }
    }
    Ok(acc)
}

/// Convergence radius of the q-exponential series: `1/(1-q^2)`, infinite at `q = 1`.
pub fn q_radius(q: QValue) -> f64 {
    if q.is_classical() {
        f64::INFINITY
    } else {
        let qv = q.value();
        1.0 / (1.0 - qv * qv)
    }
}

/// Prefix table of q-factorials for one fixed `q`, grown on demand.
///
/// Read-only after warm-up when shared across workers; each sweep worker owns
/// its table in practice.
#[derive(Debug, Clone)]
pub struct QFactorialTable {
    q: QValue,
    fact: Vec<f64>,
}

impl QFactorialTable {
    pub fn new(q: QValue) -> Self {
        QFactorialTable { q, fact: vec![1.0] }
    }

    pub fn q(&self) -> QValue {
        self.q
    }

    /// `[n]_q!`, extending the cached prefix products as needed.
    pub fn get(&mut self, n: u32) -> Result<f64> {
        while self.fact.len() <= n as usize {
            let k = self.fact.len() as u32;
            let next = self.fact[self.fact.len() - 1] * q_int(k, self.q);
            if !next.is_finite() {
                return Err(Error::Range(format!("q_factorial({k}) overflows f64")));
            }
            self.fact.push(next);
        }
        Ok(self.fact[n as usize])
    }
}

fn check_radius(j: f64, q: QValue) -> Result<()> {
    if !(0.0..f64::INFINITY).contains(&j) {
        return Err(Error::Domain(format!("J must be a finite nonnegative real, got {j}")));
    }
    if j >= q_radius(q) {
        return Err(Error::Domain(format!(
            "J = {j} lies outside the convergence radius {} for q = {}",
            q_radius(q),
            q.value()
        )));
    }
    Ok(())
}

/// Single-mode geometric tail bound for `sum_{n >= n0} J^n / [n]_q!`.
///
/// For `n >= n0` the term ratio is at most `r = J / [n0+1]_q` since the
/// brackets are increasing in `n`; when `r < 1` the tail is dominated by the
/// geometric series starting at the boundary term.
fn single_tail(j: f64, q: QValue, n0: u32, table: &mut QFactorialTable) -> Result<f64> {
    if j == 0.0 {
        return Ok(0.0);
    }
    let r = j / q_int(n0 + 1, q);
    if r >= 1.0 {
        return Ok(f64::INFINITY);
    }
    let boundary = j.powi(n0 as i32) / table.get(n0)?;
    Ok(boundary / (1.0 - r))
}

/// Rigorous upper bound on the neglected tail of the double series
/// `sum J1^{n1} J2^{n2} / ([n1]_q! [n2]_q!)` over `max(n1, n2) >= n`.
///
/// The bound is `T1(n) * U2 + U1 * T2(n)` where `Ti` is the single-mode tail
/// bound and `Ui` an upper bound on the full single-mode series; the union of
/// the two half-planes covers (and over-counts) the tail region.
pub fn tail_bound(j1: f64, j2: f64, q: QValue, n: u32) -> Result<f64> {
    check_radius(j1, q)?;
    check_radius(j2, q)?;
    assert!(n >= 1, "tail_bound requires a cutoff of at least 1");
    let mut table = QFactorialTable::new(q);

    let mut partial1 = 0.0_f64;
    let mut partial2 = 0.0_f64;
    for k in 0..n {
        let f = table.get(k)?;
        partial1 += j1.powi(k as i32) / f;
        partial2 += j2.powi(k as i32) / f;
    }
    let t1 = single_tail(j1, q, n, &mut table)?;
    let t2 = single_tail(j2, q, n, &mut table)?;
    Ok(t1 * (partial2 + t2) + (partial1 + t1) * t2)
}

/// Smallest cutoff (searched in coarse steps) whose tail bound is below `tol`.
pub fn cutoff_for_tol(j1: f64, j2: f64, q: QValue, tol: f64, n_max: u32) -> Result<u32> {
    check_radius(j1, q)?;
    check_radius(j2, q)?;
    let mut n = 8;
    loop {
        if tail_bound(j1, j2, q, n)? <= tol {
            return Ok(n);
        }
        if n >= n_max {
            return Err(Error::CutoffInsufficient {
                err: tail_bound(j1, j2, q, n)?,
                tol,
            });
        }
        n = (n + n / 2).min(n_max);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: f64) -> QValue {
        QValue::new(v).unwrap()
    }

    #[test]
    fn rejects_out_of_range_q() {
        assert!(QValue::new(0.0).is_err());
        assert!(QValue::new(-0.5).is_err());
        assert!(QValue::new(1.0 + 1e-12).is_err());
        assert!(QValue::new(f64::NAN).is_err());
        assert!(QValue::new(1.0).is_ok());
    }

    #[test]
    fn q_int_examples() {
        assert_eq!(q_int(0, q(0.3)), 0.0);
        assert_eq!(q_int(5, q(1.0)), 5.0);
        assert!((q_int(2, q(0.5)) - 1.25).abs() < 1e-15);
    }

    #[test]
    fn q_int_bounded_by_radius() {
        let qq = q(0.7);
        let r = q_radius(qq);
        // Strict for small n; for large n the bracket saturates the radius
        // to the last floating-point digit.
        for n in 0..200 {
            assert!(q_int(n, qq) <= r);
        }
        assert!(q_int(20, qq) < r);
    }

    #[test]
    fn q_factorial_examples() {
        assert_eq!(q_factorial(0, q(0.7)).unwrap(), 1.0);
        assert_eq!(q_factorial(3, q(1.0)).unwrap(), 6.0);
        assert!((q_factorial(2, q(0.5)).unwrap() - 1.25).abs() < 1e-15);
    }

    #[test]
    fn q_factorial_overflow_is_range_error() {
        assert!(matches!(q_factorial(400, q(1.0)), Err(Error::Range(_))));
    }

    #[test]
    fn q_radius_examples() {
        assert_eq!(q_radius(q(1.0)), f64::INFINITY);
        assert!((q_radius(q(0.5)) - 4.0 / 3.0).abs() < 1e-15);
        assert!((q_radius(q(1e-8)) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn telescoping_identity() {
        for &qv in &[0.3, 0.5, 0.8, 1.0] {
            let qq = q(qv);
            for n in 0..60u32 {
                let gap = q_int(n + 1, qq) - q_int(n, qq);
                assert!((gap - qv.powi(2 * n as i32)).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn q_int_continuous_at_classical_limit() {
        let eps = 1e-8;
        let qq = q(1.0 - eps);
        for n in 1..30u32 {
            let tol = 1e-5 * (n as f64) * (n as f64);
            assert!((q_int(n, qq) - n as f64).abs() < tol);
        }
    }

    #[test]
    fn factorial_table_matches_direct() {
        let mut t = QFactorialTable::new(q(0.6));
        for n in 0..40u32 {
            assert_eq!(t.get(n).unwrap(), q_factorial(n, q(0.6)).unwrap());
        }
    }

    #[test]
    fn tail_bound_examples() {
        assert_eq!(tail_bound(0.0, 0.0, q(0.5), 1).unwrap(), 0.0);
        // Term ratio approaches J (1 - q^2) = 0.75, so the 64-term tail sits
        // near 0.75^64 ~ 1e-8.
        let b = tail_bound(1.0, 1.0, q(0.5), 64).unwrap();
        assert!(b <= 1e-5, "bound {b:e}");
        assert!(b > 0.0);
        assert!(tail_bound(4.0 / 3.0, 0.0, q(0.5), 8).is_err());
    }

    /// Brute-force tail over max(n1,n2) >= n, summed to a doubled cutoff.
    fn brute_tail(j1: f64, j2: f64, qq: QValue, n: u32, n_hi: u32) -> f64 {
        // Terms built by the ratio recurrence so large factorials never
        // appear on their own.
        let terms = |j: f64| -> Vec<f64> {
            let mut out = Vec::with_capacity(n_hi as usize);
            let mut term = 1.0;
            for k in 0..n_hi {
                if k > 0 {
                    term *= j / q_int(k, qq);
                }
                out.push(term);
            }
            out
        };
        let t1 = terms(j1);
        let t2 = terms(j2);
        let mut acc = 0.0;
        for n1 in 0..n_hi as usize {
            for n2 in 0..n_hi as usize {
                if n1.max(n2) >= n as usize {
                    acc += t1[n1] * t2[n2];
                }
            }
        }
        acc
    }

    #[test]
    fn tail_bound_dominates_brute_force() {
        for &qv in &[0.4, 0.7, 0.95, 1.0] {
            let qq = q(qv);
            let r = q_radius(qq).min(5.0);
            for &frac in &[0.2, 0.5, 0.8] {
                let j = frac * r;
                for &n in &[4u32, 16, 48] {
                    let bound = tail_bound(j, j * 0.5, qq, n).unwrap();
                    let brute = brute_tail(j, j * 0.5, qq, n, 4 * n.max(64));
                    // Slack covers summation round-off in the brute sum.
                    assert!(
                        bound >= brute * (1.0 - 1e-12),
                        "q={qv} J={j} n={n}: bound {bound:e} < brute {brute:e}"
                    );
                }
            }
        }
    }

    #[test]
    fn tail_bound_vanishes_with_cutoff() {
        let qq = q(0.5);
        let mut prev = f64::INFINITY;
        for &n in &[8u32, 16, 32, 64, 128, 256, 512] {
            let b = tail_bound(1.2, 1.2, qq, n).unwrap();
            assert!(b <= prev);
            prev = b;
        }
        // Ratio 1.2 (1 - q^2) = 0.9 per term: 0.9^512 is far below 1e-20.
        assert!(prev < 1e-20);
    }
}
