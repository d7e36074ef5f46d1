//! Equations of state in potential form.
//!
//! The potential is the pressure antiderivative of density. Two closed forms
//! are supported:
//!
//! * ideal gas: `pi(p) = p^2 / 2`
//! * CNGA: `pi(p) = b1 p^2 / 2 + b2 p^3 / 3`, pressures in MPa
//!
//! Compressors act on potentials through `gamma = alpha^2`, which is exact for
//! the ideal gas and an approximation for CNGA; [`EosParams::alpha_cnga`] and
//! [`alpha_error_sweep`] quantify that approximation.

use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use thiserror::Error;

pub const CNGA_B1: f64 = 1.003;
/// Per MPa.
pub const CNGA_B2: f64 = 2.968e-2;

const ROOT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EosKind {
    Ideal,
    Cnga,
}

impl std::fmt::Display for EosKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EosKind::Ideal => f.write_str("ideal"),
            EosKind::Cnga => f.write_str("cnga"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EosError {
    /// Negative potential under the ideal gas: `p^2 / 2 = pi` has no real root.
    #[error("no real pressure for potential {potential} under the ideal gas law")]
    NoRealPressure { potential: f64 },
    #[error("domain error: {0}")]
    Domain(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EosParams {
    pub kind: EosKind,
    pub b1: f64,
    pub b2: f64,
}

/// Pressure recovered from a potential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecoveredPressure {
    pub value: f64,
    /// Set when the pressure is a real root that is not physically meaningful
    /// (the negative CNGA branch).
    pub generalized_only: bool,
}

impl Default for EosParams {
    fn default() -> Self {
        Self::ideal()
    }
}

impl EosParams {
    pub fn ideal() -> Self {
        Self {
            kind: EosKind::Ideal,
            b1: 1.0,
            b2: 0.0,
        }
    }

    pub fn cnga() -> Self {
        Self {
            kind: EosKind::Cnga,
            b1: CNGA_B1,
            b2: CNGA_B2,
        }
    }

    pub fn of_kind(kind: EosKind) -> Self {
        match kind {
            EosKind::Ideal => Self::ideal(),
            EosKind::Cnga => Self::cnga(),
        }
    }

    /// CNGA with custom coefficients; both must be positive and finite.
    pub fn cnga_with(b1: f64, b2: f64) -> Result<Self, EosError> {
        if !(b1 > 0.0 && b1.is_finite() && b2 > 0.0 && b2.is_finite()) {
            return Err(EosError::Domain(format!(
                "cnga coefficients must be positive, got b1={b1}, b2={b2}"
            )));
        }
        Ok(Self {
            kind: EosKind::Cnga,
            b1,
            b2,
        })
    }

    /// Potential at pressure `p`. Any real `p` is accepted.
    pub fn potential(&self, p: f64) -> f64 {
        match self.kind {
            EosKind::Ideal => 0.5 * p * p,
            EosKind::Cnga => self.b1 * p * p / 2.0 + self.b2 * p * p * p / 3.0,
        }
    }

    /// d(pi)/dp, i.e. the density in potential units.
    pub fn density(&self, p: f64) -> f64 {
        match self.kind {
            EosKind::Ideal => p,
            EosKind::Cnga => self.b1 * p + self.b2 * p * p,
        }
    }

    /// Inverts [`potential`](Self::potential).
    ///
    /// Ideal gas: `sqrt(2 pi)` for `pi >= 0`, otherwise
    /// [`EosError::NoRealPressure`]. CNGA: the unique non-negative root for
    /// `pi >= 0`; for `pi < 0` the unique real root, which is negative and is
    /// flagged `generalized_only`.
    pub fn pressure_from_potential(&self, potential: f64) -> Result<RecoveredPressure, EosError> {
        if !potential.is_finite() {
            return Err(EosError::Domain(format!(
                "potential must be finite, got {potential}"
            )));
        }
        match self.kind {
            EosKind::Ideal => {
                if potential < 0.0 {
                    Err(EosError::NoRealPressure { potential })
                } else {
                    Ok(RecoveredPressure {
                        value: (2.0 * potential).sqrt(),
                        generalized_only: false,
                    })
                }
            }
            EosKind::Cnga => {
                let value = self.invert_cnga(potential);
                Ok(RecoveredPressure {
                    value,
                    generalized_only: potential < 0.0,
                })
            }
        }
    }

    // Bisection on a bracket that contains exactly one root, then a guarded
    // Newton polish. For pi >= 0 the cubic is increasing on [0, inf); for
    // pi < 0 the only real root lies left of the cubic's zero -3 b1 / (2 b2),
    // where the cubic is increasing as well.
    fn invert_cnga(&self, potential: f64) -> f64 {
        if potential == 0.0 {
            return 0.0;
        }
        let (b1, b2) = (self.b1, self.b2);
        let (mut lo, mut hi) = if potential > 0.0 {
            (0.0, (2.0 * potential / b1).sqrt())
        } else {
            let lower = (-3.0 * b1 / b2).min(-(6.0 * potential.abs() / b2).cbrt());
            (lower, -1.5 * b1 / b2)
        };
        let f = |p: f64| self.potential(p) - potential;
        if f(hi) == 0.0 {
            return hi;
        }
        if f(lo) == 0.0 {
            return lo;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let fm = f(mid);
            if fm == 0.0 {
                return mid;
            }
            if fm > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= ROOT_TOL * hi.abs().max(lo.abs()).max(1.0) {
                break;
            }
        }
        let mut p = 0.5 * (lo + hi);
        for _ in 0..4 {
            let d = self.density(p);
            if d == 0.0 {
                break;
            }
            let next = p - f(p) / d;
            if !(next >= lo && next <= hi) {
                break;
            }
            if next == p {
                break;
            }
            p = next;
        }
        p
    }

    /// Effective ratio `sqrt(pi(alpha p) / pi(p))` for a compressor with
    /// inlet pressure `p` under this equation of state. Equals `alpha` for the
    /// ideal gas.
    pub fn alpha_cnga(&self, alpha: f64, p: f64) -> Result<f64, EosError> {
        if !(p > 0.0) || !p.is_finite() {
            return Err(EosError::Domain(format!(
                "inlet pressure must be positive, got {p}"
            )));
        }
        if !(alpha >= 1.0) || !alpha.is_finite() {
            return Err(EosError::Domain(format!(
                "compressor ratio must be >= 1, got {alpha}"
            )));
        }
        Ok((self.potential(alpha * p) / self.potential(p)).sqrt())
    }
}

/// Potential ratio of a compressor with boost ratio `alpha`.
pub fn gamma_from_alpha(alpha: f64) -> f64 {
    alpha * alpha
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub p_mpa: f64,
    pub alpha: f64,
    pub alpha_cnga: f64,
    pub abs_err: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSummary {
    pub max_abs_err: f64,
    pub argmax_p: f64,
    pub argmax_alpha: f64,
    pub max_rel_err: f64,
}

/// Rectangular grid of `alpha_cnga` values, ordered pressure-major.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaSweep {
    pub n_p: usize,
    pub n_alpha: usize,
    pub rows: Vec<SweepRow>,
    pub summary: SweepSummary,
}

impl AlphaSweep {
    pub fn row(&self, ip: usize, ia: usize) -> &SweepRow {
        &self.rows[ip * self.n_alpha + ia]
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("p_mpa,alpha,alpha_cnga,abs_err\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:?},{:?},{:?},{:?}",
                r.p_mpa, r.alpha, r.alpha_cnga, r.abs_err
            );
        }
        let s = &self.summary;
        let _ = writeln!(
            out,
            "# max_abs_err={:?},argmax_p={:?},argmax_alpha={:?}",
            s.max_abs_err, s.argmax_p, s.argmax_alpha
        );
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepGrid {
    pub p_range: (f64, f64),
    pub alpha_range: (f64, f64),
    pub n_p: usize,
    pub n_alpha: usize,
}

impl Default for SweepGrid {
    fn default() -> Self {
        Self {
            p_range: (0.1, 10.0),
            alpha_range: (1.1, 2.1),
            n_p: 100,
            n_alpha: 100,
        }
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(move |i| if i + 1 == n { hi } else { lo + step * i as f64 })
}

/// Evaluates [`EosParams::alpha_cnga`] over a pressure x ratio grid.
pub fn alpha_error_sweep(eos: &EosParams, grid: &SweepGrid) -> Result<AlphaSweep, EosError> {
    let (p_lo, p_hi) = grid.p_range;
    let (a_lo, a_hi) = grid.alpha_range;
    if grid.n_p < 2 || grid.n_alpha < 2 {
        return Err(EosError::Domain("grid counts must be at least 2".into()));
    }
    if !(p_lo > 0.0 && p_hi >= p_lo) {
        return Err(EosError::Domain(format!(
            "pressure range must be positive and ordered, got [{p_lo}, {p_hi}]"
        )));
    }
    if !(a_lo > 0.0 && a_hi >= a_lo) {
        return Err(EosError::Domain(format!(
            "ratio range must be positive and ordered, got [{a_lo}, {a_hi}]"
        )));
    }

    let mut rows = Vec::with_capacity(grid.n_p * grid.n_alpha);
    let mut summary = SweepSummary {
        max_abs_err: 0.0,
        argmax_p: p_lo,
        argmax_alpha: a_lo,
        max_rel_err: 0.0,
    };
    for p in linspace(p_lo, p_hi, grid.n_p) {
        for alpha in linspace(a_lo, a_hi, grid.n_alpha) {
            let alpha_cnga = eos.alpha_cnga(alpha, p)?;
            let abs_err = (alpha_cnga - alpha).abs();
            if abs_err > summary.max_abs_err {
                summary.max_abs_err = abs_err;
                summary.argmax_p = p;
                summary.argmax_alpha = alpha;
            }
            summary.max_rel_err = summary.max_rel_err.max(abs_err / alpha);
            rows.push(SweepRow {
                p_mpa: p,
                alpha,
                alpha_cnga,
                abs_err,
            });
        }
    }
    Ok(AlphaSweep {
        n_p: grid.n_p,
        n_alpha: grid.n_alpha,
        rows,
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn potential_values() {
        assert_eq!(EosParams::ideal().potential(0.0), 0.0);
        let cnga = EosParams::cnga();
        assert!(close(cnga.potential(1.0), 0.5015 + 0.02968 / 3.0, 1e-15));
        let ratio = cnga.potential(10.0) / EosParams::ideal().potential(10.0);
        assert!((ratio - 1.2009).abs() < 5e-4, "ratio {ratio}");
        assert!(close(cnga.potential(10.0), 50.15 + 29.68 / 3.0, 1e-14));
    }

    #[test]
    fn ideal_inversion() {
        let ideal = EosParams::ideal();
        let r = ideal.pressure_from_potential(2.0).unwrap();
        assert_eq!(r.value, 2.0);
        assert!(!r.generalized_only);
        assert_eq!(
            ideal.pressure_from_potential(-2.0),
            Err(EosError::NoRealPressure { potential: -2.0 })
        );
    }

    #[test]
    fn cnga_inversion_roundtrip_at_one() {
        let cnga = EosParams::cnga();
        let pi = cnga.potential(1.0);
        let r = cnga.pressure_from_potential(pi).unwrap();
        assert!((r.value - 1.0).abs() < 1e-10);
        assert!(!r.generalized_only);
    }

    #[test]
    fn cnga_inversion_matches_polynomial_roots() {
        // Real roots of b2/3 p^3 + b1/2 p^2 - pi computed with a companion
        // matrix eigen solver.
        let cnga = EosParams::cnga();
        let r = cnga.pressure_from_potential(2.0).unwrap();
        assert!((r.value - 1.959_492_88).abs() < 1e-8, "{}", r.value);
        let r = cnga.pressure_from_potential(-2.0).unwrap();
        assert!((r.value - (-50.769_131_8)).abs() < 1e-6, "{}", r.value);
        assert!(r.generalized_only);
    }

    #[test]
    fn cnga_negative_potential_root_is_unique_real_root() {
        let cnga = EosParams::cnga();
        for &pi in &[-1e-9, -0.5, -2.0, -190.0, -1e4] {
            let p = cnga.pressure_from_potential(pi).unwrap().value;
            assert!(p < 0.0);
            assert!((cnga.potential(p) - pi).abs() <= 1e-10 * pi.abs().max(1.0));
        }
    }

    #[test]
    fn gamma_is_square() {
        assert_eq!(gamma_from_alpha(1.0), 1.0);
        assert_eq!(gamma_from_alpha(2.0), 4.0);
        assert_eq!(gamma_from_alpha(1.5), 2.25);
    }

    #[test]
    fn alpha_cnga_values() {
        let cnga = EosParams::cnga();
        assert_eq!(cnga.alpha_cnga(1.0, 3.7).unwrap(), 1.0);
        let a = cnga.alpha_cnga(2.0, 1.0).unwrap();
        let closed = 2.0 * ((3.0 * CNGA_B1 + 4.0 * CNGA_B2) / (3.0 * CNGA_B1 + 2.0 * CNGA_B2)).sqrt();
        assert!((a - closed).abs() < 1e-14);
        assert!((a - 2.019_253_168_348).abs() < 1e-11);
        for p in [0.01, 1.0, 5.0, 10.0] {
            assert!(cnga.alpha_cnga(2.1, p).unwrap() > 2.1);
        }
        assert!(matches!(cnga.alpha_cnga(2.0, 0.0), Err(EosError::Domain(_))));
        assert!(matches!(cnga.alpha_cnga(2.0, -1.0), Err(EosError::Domain(_))));
    }

    #[test]
    fn ideal_ratio_is_exact() {
        let ideal = EosParams::ideal();
        for p in [0.1, 1.0, 7.5] {
            for alpha in [1.0, 1.3, 2.1] {
                assert!((ideal.alpha_cnga(alpha, p).unwrap() - alpha).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn sweep_small_pressure_limit() {
        let grid = SweepGrid {
            p_range: (1e-9, 1e-8),
            alpha_range: (1.1, 2.1),
            n_p: 2,
            n_alpha: 5,
        };
        let sweep = alpha_error_sweep(&EosParams::cnga(), &grid).unwrap();
        assert!(sweep.summary.max_abs_err < 1e-9);
    }

    #[test]
    fn sweep_identity_row_and_argmax() {
        let grid = SweepGrid {
            p_range: (1.0, 5.0),
            alpha_range: (1.0, 2.0),
            n_p: 5,
            n_alpha: 3,
        };
        let sweep = alpha_error_sweep(&EosParams::cnga(), &grid).unwrap();
        let row = sweep.row(4, 0);
        assert_eq!((row.p_mpa, row.alpha, row.abs_err), (5.0, 1.0, 0.0));

        let sweep = alpha_error_sweep(&EosParams::cnga(), &SweepGrid::default()).unwrap();
        assert_eq!(sweep.rows.len(), 100 * 100);
        assert_eq!(sweep.summary.argmax_p, 10.0);
        assert_eq!(sweep.summary.argmax_alpha, 2.1);
    }

    #[test]
    fn sweep_rejects_bad_grid() {
        let cnga = EosParams::cnga();
        let mut grid = SweepGrid::default();
        grid.p_range = (0.0, 10.0);
        assert!(alpha_error_sweep(&cnga, &grid).is_err());
        grid = SweepGrid::default();
        grid.n_p = 1;
        assert!(alpha_error_sweep(&cnga, &grid).is_err());
    }

    #[test]
    fn sweep_csv_layout() {
        let grid = SweepGrid {
            n_p: 2,
            n_alpha: 2,
            ..SweepGrid::default()
        };
        let csv = alpha_error_sweep(&EosParams::cnga(), &grid).unwrap().to_csv();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "p_mpa,alpha,alpha_cnga,abs_err");
        assert_eq!(lines.len(), 6);
        assert!(lines[5].starts_with("# max_abs_err="));
        assert!(lines[5].contains(",argmax_p=10.0,argmax_alpha=2.1"));
    }
}

#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn roundtrip_nonnegative(pi in 0.0f64..1e4, cnga in any::<bool>()) {
            let eos = if cnga { EosParams::cnga() } else { EosParams::ideal() };
            let p = eos.pressure_from_potential(pi).unwrap();
            prop_assert!(p.value >= 0.0);
            prop_assert!(!p.generalized_only);
            prop_assert!((eos.potential(p.value) - pi).abs() <= 1e-10 * pi.max(f64::MIN_POSITIVE));
        }

        #[test]
        fn potential_increasing_on_positive_axis(a in 0.0f64..100.0, d in 1e-6f64..10.0, cnga in any::<bool>()) {
            let eos = if cnga { EosParams::cnga() } else { EosParams::ideal() };
            prop_assert!(eos.potential(a + d) > eos.potential(a));
        }

        #[test]
        fn alpha_cnga_dominates_alpha(alpha in 1.0f64..3.0, p in 1e-3f64..20.0, dp in 1e-3f64..5.0) {
            let eos = EosParams::cnga();
            let a0 = eos.alpha_cnga(alpha, p).unwrap();
            prop_assert!(a0 >= alpha);
            if alpha > 1.0 + 1e-9 {
                prop_assert!(a0 > alpha);
                prop_assert!(eos.alpha_cnga(alpha, p + dp).unwrap() > a0);
            }
        }
    }

    #[test]
    fn cubic_root_structure_from_critical_values() {
        // The cubic c(p) = b2 p^3/3 + b1 p^2/2 has critical points at p = 0
        // (local min, c = 0) and p = -b1/b2 (local max, c = b1^3/(6 b2^2)).
        let eos = EosParams::cnga();
        let local_max = eos.potential(-eos.b1 / eos.b2);
        assert!((local_max - eos.b1.powi(3) / (6.0 * eos.b2 * eos.b2)).abs() < 1e-10);
        let count_real_roots = |pi: f64| -> usize {
            let lo_crit = eos.potential(0.0) - pi;
            let hi_crit = local_max - pi;
            if lo_crit < 0.0 && hi_crit > 0.0 {
                3
            } else {
                1
            }
        };
        assert_eq!(count_real_roots(1.0), 3);
        assert_eq!(count_real_roots(local_max * 0.999), 3);
        assert_eq!(count_real_roots(local_max * 1.001), 1);
        assert_eq!(count_real_roots(-1.0), 1);
        // With three roots exactly one of them is non-negative and it is the
        // one returned.
        let p = eos.pressure_from_potential(1.0).unwrap().value;
        assert!(p > 0.0);
    }
}
