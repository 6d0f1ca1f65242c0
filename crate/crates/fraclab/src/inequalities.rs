//! Empirical verification of the functional inequalities: the trace
//! inequality with its discrete sharp constant, the fractional Hardy
//! inequality in both its spectral and extension forms, and the weighted
//! Sobolev inequality in its three weight regimes.

use serde::Serialize;

use crate::domain::{DistanceField, GridFunction};
use crate::error::{Error, Result};
use crate::extension::{dirichlet_energy_raw, energy_with_coefficient, ExtensionField};
use crate::fractional::{hardy_constant, hardy_quotient_integral, hs_norm, FracParams};
use crate::operator::SpectralBasis;

/// Record of one verified inequality.
///
/// `pass` means `lhs <= rhs * (1 + tol)`; for criteria of the form
/// "empirical ratio >= constant - slack" the slack is folded into `lhs`,
/// and the raw ratio is kept in `empirical_constant`.
#[derive(Debug, Clone, Serialize)]
pub struct InequalityCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub empirical_constant: f64,
    pub theoretical_bound: Option<f64>,
    pub tol: f64,
    pub pass: bool,
    /// Degenerate input (e.g. an identically zero test function); the
    /// check was skipped rather than decided.
    pub skipped: bool,
    /// No theoretical constant is asserted; the record only reports data.
    pub informational: bool,
    pub mesh_level: Option<usize>,
}

impl InequalityCheck {
    fn decided(name: &str, lhs: f64, rhs: f64, tol: f64) -> Self {
        InequalityCheck {
            name: name.to_string(),
            lhs,
            rhs,
            empirical_constant: if rhs != 0.0 { lhs / rhs } else { f64::NAN },
            theoretical_bound: None,
            tol,
            pass: lhs <= rhs * (1.0 + tol),
            skipped: false,
            informational: false,
            mesh_level: None,
        }
    }
}

/// Trace inequality on the cylinder: checks
/// `C_D (int |phi(.,0)|^{2*_s})^{2/2*_s} <= int y^{1-2s} |grad phi|^2`
/// with the discrete `C_D`, and records the spectral quotient of the trace
/// as the empirical constant (tight for the minimizer, by definition).
pub fn trace_check(
    phi: &ExtensionField,
    basis: &SpectralBasis,
    s: f64,
    c_d: f64,
) -> Result<InequalityCheck> {
    let trace = phi.trace();
    if trace.linf() == 0.0 {
        return Err(Error::Degenerate(
            "trace inequality with identically zero trace (0/0)".into(),
        ));
    }
    let n = basis.grid().dim() as f64;
    let two_star = 2.0 * n / (n - 2.0 * s);
    let trace_norm_sq = trace.lp(two_star).powi(2);
    let lhs = c_d * trace_norm_sq;
    let rhs = dirichlet_energy_raw(phi);
    let mut check = InequalityCheck::decided("trace", lhs, rhs, 1e-9);
    check.empirical_constant = hs_norm(basis, &trace, s).powi(2) / trace_norm_sq;
    check.theoretical_bound = Some(c_d);
    Ok(check)
}

/// Fractional Hardy inequality, spectral form:
/// `C(s) int (f/d^s)^2 <= ||f||_{H^s_0}^2` on the pure-Dirichlet basis,
/// with the convexity constant `C(s)` and slack 1e-6 on the ratio.
///
/// `f` must vanish on the whole boundary; identically zero `f` yields a
/// skipped record.
pub fn hardy_check_spectral(
    basis: &SpectralBasis,
    dist: &DistanceField,
    f: &GridFunction,
    s: f64,
) -> Result<InequalityCheck> {
    hardy_preconditions(basis, f, s)?;
    let c = hardy_constant(s)?;
    if f.linf() == 0.0 {
        return Ok(skipped_record("hardy_spectral", Some(c)));
    }
    let grid = basis.grid();
    let quotient = hardy_quotient_integral(f, dist, grid, s);
    let hs2 = hs_norm(basis, f, s).powi(2);
    const SLACK: f64 = 1e-6;
    let mut check = InequalityCheck::decided("hardy_spectral", (c - SLACK) * quotient, hs2, 0.0);
    check.empirical_constant = hs2 / quotient;
    check.theoretical_bound = Some(c);
    check.tol = SLACK;
    Ok(check)
}

/// Fractional Hardy inequality through the extension:
/// `int (F(.,0)/d^s)^2 <= C int y^{1-2s}|grad F|^2` for lateral-Dirichlet
/// fields. The constant is not pinned by theory here, so the record is
/// informational: it reports the empirical `C`.
pub fn hardy_check_extension(
    f_ext: &ExtensionField,
    dist: &DistanceField,
    s: f64,
) -> Result<InequalityCheck> {
    if !f_ext.mesh.lap.partition.pure_dirichlet {
        return Err(Error::Precondition(
            "extension-form Hardy needs a lateral-Dirichlet cylinder".into(),
        ));
    }
    let trace = f_ext.trace();
    if trace.linf() == 0.0 {
        return Ok(skipped_record("hardy_extension", None));
    }
    let grid = &f_ext.mesh.lap.grid;
    let lhs = hardy_quotient_integral(&trace, dist, grid, s);
    let rhs = dirichlet_energy_raw(f_ext);
    Ok(InequalityCheck {
        name: "hardy_extension".to_string(),
        lhs,
        rhs,
        empirical_constant: lhs / rhs,
        theoretical_bound: None,
        tol: 0.0,
        pass: rhs > 0.0,
        skipped: false,
        informational: true,
        mesh_level: None,
    })
}

fn hardy_preconditions(basis: &SpectralBasis, f: &GridFunction, s: f64) -> Result<()> {
    if !(0.5..1.0).contains(&s) {
        return Err(Error::Precondition(format!(
            "Hardy inequality requires 1/2 <= s < 1, got {s}"
        )));
    }
    if !basis.lap.partition.pure_dirichlet {
        return Err(Error::Precondition(
            "Hardy check needs the pure-Dirichlet basis".into(),
        ));
    }
    let fmax = f.linf();
    let grid = basis.grid();
    for idx in 0..grid.len() {
        if grid.is_boundary(idx) && f.values[idx].abs() > 1e-12 * fmax.max(1.0) {
            return Err(Error::Precondition(
                "Hardy test function must vanish on the whole boundary".into(),
            ));
        }
    }
    Ok(())
}

fn skipped_record(name: &str, bound: Option<f64>) -> InequalityCheck {
    InequalityCheck {
        name: name.to_string(),
        lhs: 0.0,
        rhs: 0.0,
        empirical_constant: f64::NAN,
        theoretical_bound: bound,
        tol: 0.0,
        pass: true,
        skipped: true,
        informational: false,
        mesh_level: None,
    }
}

/// Weighted Sobolev inequality:
/// `(int u^r |phi(.,0)|^q)^{2/q} <= C (int y^{1-2s} U^2 |grad phi|^2
///  + int u^2 phi(.,0)^2)`.
///
/// The constant depends on data the theory does not pin down numerically,
/// so the record is informational: it reports the empirical constant,
/// which must stay bounded along a mesh ladder. The only hard failure is
/// a zero right side with a positive left side.
pub fn weighted_sobolev_check(
    u: &GridFunction,
    u_ext: &ExtensionField,
    phi: &ExtensionField,
    params: &FracParams,
) -> Result<InequalityCheck> {
    let grid = &u.grid;
    let r = params.r;
    let q = params.q;
    let trace = phi.trace();

    let mut lhs_int = 0.0;
    let mut zero_order = 0.0;
    for idx in 0..grid.len() {
        let w = grid.quad_weights[idx];
        let uv = u.values[idx].max(0.0);
        let ur = if r == 0.0 { 1.0 } else { uv.powf(r) };
        lhs_int += w * ur * trace.values[idx].abs().powf(q);
        zero_order += w * (u.values[idx] * trace.values[idx]).powi(2);
    }
    let lhs = lhs_int.powf(2.0 / q);
    let weighted_grad = energy_with_coefficient(phi, Some(u_ext));
    let rhs = weighted_grad + zero_order;

    let name = format!("weighted_sobolev[r={r:.3}]");
    let pass = !(rhs == 0.0 && lhs > 0.0);
    Ok(InequalityCheck {
        name,
        lhs,
        rhs,
        empirical_constant: if rhs > 0.0 { lhs / rhs } else { 0.0 },
        theoretical_bound: None,
        tol: 0.0,
        pass,
        skipped: false,
        informational: true,
        mesh_level: None,
    })
}

/// Fractional Sobolev inequality on the pure-Dirichlet space:
/// ratio `||v||_{H^s}^2 / (int |v|^r)^{2/r}`, reported against `S(N,s)`
/// at the critical exponent (informational: the sharp constant is only
/// attained on the whole space).
pub fn sobolev_check(
    basis: &SpectralBasis,
    v: &GridFunction,
    s: f64,
    r: f64,
) -> Result<InequalityCheck> {
    let n = basis.grid().dim() as f64;
    if n <= 2.0 * s {
        return Err(Error::Precondition(format!(
            "Sobolev check requires N > 2s, got N = {n}, s = {s}"
        )));
    }
    let two_star = 2.0 * n / (n - 2.0 * s);
    if !(1.0..=two_star + 1e-12).contains(&r) {
        return Err(Error::Precondition(format!(
            "Sobolev exponent r must lie in [1, 2*_s] = [1, {two_star:.4}], got {r}"
        )));
    }
    if v.linf() == 0.0 {
        return Ok(skipped_record("sobolev", None));
    }
    let hs2 = hs_norm(basis, v, s).powi(2);
    let denom = v.lp(r).powi(2);
    let at_critical = (r - two_star).abs() < 1e-9;
    Ok(InequalityCheck {
        name: format!("sobolev[r={r:.3}]"),
        lhs: denom,
        rhs: hs2,
        empirical_constant: hs2 / denom,
        theoretical_bound: if at_critical {
            Some(crate::fractional::sobolev_constant(
                basis.grid().dim(),
                s,
            )?)
        } else {
            None
        },
        tol: 0.0,
        pass: true,
        skipped: false,
        informational: true,
        mesh_level: None,
    })
}
