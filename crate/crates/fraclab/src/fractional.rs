//! The spectral fractional Laplacian: fractional powers and inverse powers
//! in the mixed-BC eigenbasis, the `H^s` norm, the closed-form constants
//! (extension normalization, fractional Sobolev constant, Hardy constant),
//! derived exponents, and the discrete sharp trace constant obtained by
//! Rayleigh-quotient minimization.

use crate::domain::{DistanceField, Grid, GridFunction};
use crate::error::{Error, Result};
use crate::gamma::gamma;
use crate::operator::SpectralBasis;

/// Applies `(-Delta)^sigma` through the spectral basis:
/// `sum_j lambda_j^sigma <u, phi_j> phi_j`.
///
/// `sigma = 0` reproduces the function (projected onto the basis),
/// `sigma = 1` matches the direct matrix application on a full basis, and
/// `sigma = 1 - s` is what the superharmonicity probes need.
pub fn frac_apply(basis: &SpectralBasis, u: &GridFunction, sigma: f64) -> Result<GridFunction> {
    if !(0.0..=1.0).contains(&sigma) {
        return Err(Error::Precondition(format!(
            "fractional exponent must lie in [0, 1], got {sigma}"
        )));
    }
    let mut coeffs = basis.coefficients(u);
    for (c, lam) in coeffs.iter_mut().zip(&basis.eigenvalues) {
        *c *= lam.powf(sigma);
    }
    Ok(basis.synthesize(&coeffs))
}

/// Solves `(-Delta)^s u = f` with homogeneous mixed boundary data:
/// `u = sum_j lambda_j^{-s} <f, phi_j> phi_j`.
pub fn frac_solve(basis: &SpectralBasis, f: &GridFunction, s: f64) -> Result<GridFunction> {
    if !(s > 0.0 && s <= 1.0) {
        return Err(Error::Precondition(format!(
            "solve exponent must lie in (0, 1], got {s}"
        )));
    }
    let mut coeffs = basis.coefficients(f);
    for (c, lam) in coeffs.iter_mut().zip(&basis.eigenvalues) {
        *c *= lam.powf(-s);
    }
    Ok(basis.synthesize(&coeffs))
}

/// `H^s` norm of `u`: `(sum_j a_j^2 lambda_j^s)^{1/2}`, which coincides with
/// `||(-Delta)^{s/2} u||_{L^2}` on a full basis.
pub fn hs_norm(basis: &SpectralBasis, u: &GridFunction, s: f64) -> f64 {
    let coeffs = basis.coefficients(u);
    coeffs
        .iter()
        .zip(&basis.eigenvalues)
        .map(|(a, lam)| a * a * lam.powf(s))
        .sum::<f64>()
        .sqrt()
}

/// Extension normalization constant `kappa_s = 2^{2s-1} Gamma(s)/Gamma(1-s)`.
///
/// `kappa_{1/2} = 1` exactly; the constant degenerates at `s = 1` where
/// `Gamma(1-s)` has a pole.
pub fn kappa(s: f64) -> Result<f64> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::Precondition(format!(
            "kappa_s requires 0 < s < 1, got {s}"
        )));
    }
    Ok(2.0_f64.powf(2.0 * s - 1.0) * gamma(s) / gamma(1.0 - s))
}

/// Fractional Sobolev constant
/// `S(N,s) = 2^{2s} pi^s Gamma((N+2s)/2)/Gamma((N-2s)/2)
///           (Gamma(N/2)/Gamma(N))^{2s/N}`, requiring `N > 2s`.
pub fn sobolev_constant(n_dim: usize, s: f64) -> Result<f64> {
    let n = n_dim as f64;
    if n <= 2.0 * s {
        return Err(Error::Precondition(format!(
            "Sobolev constant requires N > 2s, got N = {n_dim}, s = {s}"
        )));
    }
    Ok(2.0_f64.powf(2.0 * s)
        * std::f64::consts::PI.powf(s)
        * gamma((n + 2.0 * s) / 2.0)
        / gamma((n - 2.0 * s) / 2.0)
        * (gamma(n / 2.0) / gamma(n)).powf(2.0 * s / n))
}

/// Hardy constant for domains with superharmonic distance function
/// (`-Delta d >= 0`, true for convex domains):
/// `C(s) = 2^{2s} Gamma^2((3+2s)/4) / Gamma^2((3-2s)/4)`, for 1/2 <= s < 1.
pub fn hardy_constant(s: f64) -> Result<f64> {
    if !(0.5..1.0).contains(&s) {
        return Err(Error::Precondition(format!(
            "Hardy constant requires 1/2 <= s < 1, got {s}"
        )));
    }
    let num = gamma((3.0 + 2.0 * s) / 4.0);
    let den = gamma((3.0 - 2.0 * s) / 4.0);
    Ok(2.0_f64.powf(2.0 * s) * (num / den).powi(2))
}

/// Validated parameter bundle: the fractional exponent `s`, the dimension,
/// the integrability exponent `p` of the comparison datum, the weight
/// exponent `r` with its conjugate `q` from `q/2 = 1 + rs/N`, and the
/// critical exponent `2*_s = 2N/(N-2s)`.
///
/// `gamma` is the decay exponent of the level-set iteration. It is computed
/// from the iteration's own weight exponent `r = p/(p-1)` (not from the
/// user-chosen `r`): that coupling is what turns `p > N/s` into
/// `gamma = 2 - 1/p - 2/q > 1`, the condition forcing the level-set
/// function to vanish at a finite level.
#[derive(Debug, Clone, Copy)]
pub struct FracParams {
    pub s: f64,
    pub dim: usize,
    pub p: f64,
    pub r: f64,
    pub two_star: f64,
    /// Conjugate of the user-chosen `r`: `q = 2(1 + rs/N)`.
    pub q: f64,
    /// Level-set weight exponent `p/(p-1)`, always in `(1, 2*_s)`.
    pub stampacchia_r: f64,
    /// `q` evaluated at the level-set exponent.
    pub stampacchia_q: f64,
    /// Decay exponent `2 - 1/p - 2/q` at the level-set exponent; `> 1`.
    pub gamma: f64,
}

/// Derives and validates the exponent bundle. `p > N/s` is exactly the
/// condition that makes the truncation exponent `gamma` exceed 1.
pub fn derive_params(dim: usize, s: f64, p: f64, r: f64) -> Result<FracParams> {
    if !(s > 0.5 && s < 1.0) {
        return Err(Error::Config(format!("s must lie in (1/2, 1), got {s}")));
    }
    let n = dim as f64;
    if n <= 2.0 * s {
        return Err(Error::Config(format!(
            "need N > 2s for a finite critical exponent, got N = {dim}, s = {s}"
        )));
    }
    if p <= n / s {
        return Err(Error::Config(format!(
            "p = {p} <= N/s = {:.6}: the decay exponent gamma = 2 - 1/p - 2/q \
             would not exceed 1",
            n / s
        )));
    }
    let two_star = 2.0 * n / (n - 2.0 * s);
    if !(0.0..=two_star + 1e-12).contains(&r) {
        return Err(Error::Config(format!(
            "weight exponent r must lie in [0, 2*_s] = [0, {two_star:.6}], got {r}"
        )));
    }
    let q = 2.0 * (1.0 + r * s / n);
    let stampacchia_r = p / (p - 1.0);
    let stampacchia_q = 2.0 * (1.0 + stampacchia_r * s / n);
    let gamma_exp = 2.0 - 1.0 / p - 2.0 / stampacchia_q;
    Ok(FracParams {
        s,
        dim,
        p,
        r,
        two_star,
        q,
        stampacchia_r,
        stampacchia_q,
        gamma: gamma_exp,
    })
}

/// Result of the Rayleigh-quotient minimization for the trace constant.
#[derive(Debug, Clone)]
pub struct CdResult {
    /// The converged quotient: the discrete trace constant `C_D`.
    pub value: f64,
    /// The minimizer, normalized in `L^{2*_s}`.
    pub minimizer: GridFunction,
    /// Accepted quotient values along the descent (monotone nonincreasing).
    pub trace: Vec<f64>,
}

/// Discrete sharp constant of the trace inequality,
/// `C_D = inf ||u||_{H^s}^2 / ||u||_{L^{2*_s}}^2` over the mixed space,
/// by normalized projected-gradient descent started at `|phi_1|`.
///
/// Backtracking only ever accepts decreasing steps, so the returned value
/// upper-bounds the discrete infimum and the recorded trace is monotone.
/// Requires `N = 2`: with `s > 1/2` the critical exponent is finite only
/// there.
pub fn cd_constant(basis: &SpectralBasis, s: f64) -> Result<CdResult> {
    let phi1 = basis.mode(0);
    let init = GridFunction::new(&phi1.grid, phi1.values.iter().map(|v| v.abs()).collect());
    cd_constant_with_inits(basis, s, std::slice::from_ref(&init))
}

/// Same as [`cd_constant`] but minimizing from several starting points and
/// keeping the best run. Warm starts from minimizers found on larger
/// Dirichlet sets make the alpha-ladder monotone, since any admissible
/// candidate upper-bounds the infimum.
pub fn cd_constant_with_inits(
    basis: &SpectralBasis,
    s: f64,
    inits: &[GridFunction],
) -> Result<CdResult> {
    if basis.grid().dim() != 2 {
        return Err(Error::Precondition(
            "trace-constant minimization needs N = 2 (finite critical exponent)".into(),
        ));
    }
    if !basis.full {
        return Err(Error::Precondition(
            "trace-constant minimization needs the full spectral basis".into(),
        ));
    }
    let mut best: Option<CdResult> = None;
    for init in inits {
        let run = descend(basis, s, init)?;
        if best.as_ref().is_none_or(|b| run.value < b.value) {
            best = Some(run);
        }
    }
    best.ok_or_else(|| Error::Precondition("no initial guess supplied".into()))
}

fn descend(basis: &SpectralBasis, s: f64, init: &GridFunction) -> Result<CdResult> {
    let n = basis.grid().dim() as f64;
    let two_star = 2.0 * n / (n - 2.0 * s);
    let lap = &basis.lap;

    // Work on free nodes throughout; the basis spans exactly the functions
    // vanishing on the Dirichlet part.
    let weights = &lap.weights;
    let lp_norm = |u: &[f64]| -> f64 {
        u.iter()
            .zip(weights)
            .map(|(v, w)| v.abs().powf(two_star) * w)
            .sum::<f64>()
            .powf(1.0 / two_star)
    };
    // a_j = <u, phi_j>, then A(u) = sum lambda^s a_j^2 and
    // grad_W A = 2 sum lambda^s a_j phi_j.
    let spectral = |u: &[f64]| -> (f64, Vec<f64>) {
        let k = basis.k();
        let nf = u.len();
        let mut wu = vec![0.0; nf];
        for i in 0..nf {
            wu[i] = u[i] * weights[i];
        }
        let mut hsq = 0.0;
        let mut grad = vec![0.0; nf];
        for j in 0..k {
            let col = basis.modes.column(j);
            let mut a = 0.0;
            for i in 0..nf {
                a += col[i] * wu[i];
            }
            let ls = basis.eigenvalues[j].powf(s) * a;
            hsq += ls * a;
            for i in 0..nf {
                grad[i] += 2.0 * ls * col[i];
            }
        }
        (hsq, grad)
    };

    let mut u = lap.restrict(init);
    let norm0 = lp_norm(&u);
    if norm0 <= 0.0 {
        return Err(Error::Precondition("zero initial guess".into()));
    }
    for v in u.iter_mut() {
        *v /= norm0;
    }

    let quotient = |u: &[f64], hsq: f64| -> f64 {
        let b = lp_norm(u);
        hsq / (b * b)
    };

    let (mut hsq, mut grad_a) = spectral(&u);
    let mut r = quotient(&u, hsq);
    let mut trace = vec![r];
    let mut step = 0.5 / basis.eigenvalues[0].powf(s).max(1.0);

    const WINDOW: usize = 20;
    const MAX_ITER: usize = 4000;
    for iter in 0..MAX_ITER {
        // grad R = (B grad A - A grad B) / B^2, in the weighted metric;
        // with u normalized to ||u||_{2*} = 1, B = 1.
        let m: f64 = u
            .iter()
            .zip(weights)
            .map(|(v, w)| v.abs().powf(two_star) * w)
            .sum();
        let b_pow = m.powf(2.0 / two_star - 1.0);
        let mut grad = vec![0.0; u.len()];
        for i in 0..u.len() {
            let gb = 2.0 * b_pow * u[i].abs().powf(two_star - 1.0) * u[i].signum();
            grad[i] = grad_a[i] - hsq * gb / m.powf(2.0 / two_star);
        }

        let gnorm2: f64 = grad
            .iter()
            .zip(weights)
            .map(|(g, w)| g * g * w)
            .sum();
        if !gnorm2.is_finite() {
            return Err(Error::Numerical(format!(
                "descent produced a non-finite gradient at iteration {iter}; \
                 quotient trace: {trace:?}"
            )));
        }

        // Backtracking line search on the quotient.
        let mut accepted = false;
        for _ in 0..40 {
            let mut cand: Vec<f64> = u
                .iter()
                .zip(&grad)
                .map(|(v, g)| v - step * g)
                .collect();
            let norm = lp_norm(&cand);
            if norm > 0.0 && norm.is_finite() {
                for v in cand.iter_mut() {
                    *v /= norm;
                }
                let (hsq_c, grad_c) = spectral(&cand);
                let r_c = quotient(&cand, hsq_c);
                if r_c < r {
                    u = cand;
                    hsq = hsq_c;
                    grad_a = grad_c;
                    r = r_c;
                    accepted = true;
                    step *= 1.3;
                    break;
                }
            }
            step *= 0.5;
        }
        trace.push(r);
        if !r.is_finite() {
            return Err(Error::Numerical(format!(
                "quotient became non-finite; trace: {trace:?}"
            )));
        }
        if trace.len() > WINDOW {
            let past = trace[trace.len() - 1 - WINDOW];
            if (past - r) / r.abs() < 1e-8 {
                break;
            }
        }
        if !accepted && step < 1e-18 {
            break;
        }
    }

    let minimizer = lap.embed(&u);
    Ok(CdResult {
        value: r,
        minimizer,
        trace,
    })
}

/// Closed-form and computed constants for one value of `s`; assembled by
/// the verification runner and echoed in reports.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ConstantsReport {
    pub s: f64,
    pub kappa_s: f64,
    /// `S(N, s)`; `None` when `N <= 2s`.
    pub sobolev: Option<f64>,
    pub hardy_c: f64,
    /// Discrete trace constant; `None` unless computed (N = 2 only).
    pub cd: Option<f64>,
    /// First eigenvalue of the mixed operator on the run's partition.
    pub lambda1_alpha: f64,
}

/// Quadrature of `(f/d^s)^2`; boundary nodes contribute zero because the
/// admissible `f` vanish there, so the quotient is only formed where
/// `d >= h/2`.
pub fn hardy_quotient_integral(
    f: &GridFunction,
    dist: &DistanceField,
    grid: &Grid,
    s: f64,
) -> f64 {
    let h_half = 0.5 * grid.h_max();
    f.values
        .iter()
        .zip(&dist.values)
        .zip(&grid.quad_weights)
        .filter(|((_, d), _)| **d >= h_half)
        .map(|((v, d), w)| (v / d.powf(s)).powi(2) * w)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{
        build_grid, make_bump, partition_boundary, DomainSpec, Face, FaceSelection,
    };
    use crate::operator::{assemble, direct_solve, eigendecompose, ModeCount};
    use proptest::prelude::*;
    use std::sync::Arc;

    // Frozen 30-digit oracle values.
    const KAPPA_34: f64 = 0.477_988_797_486_125;
    const S_2_075: f64 = 1.691_887_110_690_963_8;
    const S_2_06: f64 = 1.839_226_246_152_825_4;
    const S_2_09: f64 = 0.986_319_337_229_589_9;
    const HARDY_06: f64 = 0.562_084_131_964_814_4;
    const HARDY_075: f64 = 0.446_429_599_962_565_34;
    const HARDY_09: f64 = 0.328_020_476_355_022_2;

    fn mixed_basis_1d(n: usize) -> SpectralBasis {
        let grid = build_grid(&DomainSpec::interval(1.0, n)).unwrap();
        let part = partition_boundary(&grid, &[FaceSelection::whole(Face::Left)]).unwrap();
        let lap = Arc::new(assemble(&grid, &part).unwrap());
        eigendecompose(&lap, ModeCount::Full).unwrap()
    }

    #[test]
    fn kappa_values() {
        assert!((kappa(0.5).unwrap() - 1.0).abs() < 1e-12);
        assert!((kappa(0.75).unwrap() - KAPPA_34).abs() < 1e-10);
        assert!(kappa(1.0).is_err());
        assert!(kappa(0.0).is_err());
    }

    #[test]
    fn sobolev_constant_values() {
        // For N = 2, s = 3/4 the last factor is (Gamma(1)/Gamma(2))^{3/4} = 1.
        assert!((sobolev_constant(2, 0.75).unwrap() - S_2_075).abs() < 1e-10);
        assert!((sobolev_constant(2, 0.6).unwrap() - S_2_06).abs() < 1e-10);
        assert!((sobolev_constant(2, 0.9).unwrap() - S_2_09).abs() < 1e-10);
        // The oracle tabulation shows S(2, s) decreasing over these s:
        // Gamma((N-2s)/2) in the denominator blows up as s -> 1.
        assert!(S_2_06 > S_2_075 && S_2_075 > S_2_09);
        assert!(sobolev_constant(1, 0.75).is_err());
    }

    #[test]
    fn hardy_constant_values() {
        let c_half = hardy_constant(0.5).unwrap();
        assert!((c_half - 2.0 / std::f64::consts::PI).abs() < 1e-10);
        assert!((hardy_constant(0.6).unwrap() - HARDY_06).abs() < 1e-10);
        assert!((hardy_constant(0.75).unwrap() - HARDY_075).abs() < 1e-10);
        assert!((hardy_constant(0.9).unwrap() - HARDY_09).abs() < 1e-10);
        assert!(hardy_constant(0.4).is_err());
    }

    #[test]
    fn derive_params_cases() {
        let p = derive_params(2, 0.75, 4.0, 0.0).unwrap();
        assert!((p.q - 2.0).abs() < 1e-14);
        assert!((p.two_star - 8.0).abs() < 1e-12);
        let p = derive_params(2, 0.75, 4.0, 8.0).unwrap();
        assert!((p.q - 8.0).abs() < 1e-12);
        // p below N/s = 8/3 is rejected.
        assert!(derive_params(2, 0.75, 2.0, 0.0).is_err());
        assert!(derive_params(2, 0.75, 4.0, 9.0).is_err());
    }

    proptest! {
        #[test]
        fn gamma_exceeds_one_whenever_p_is_admissible(
            s in 0.51f64..0.99,
            p_excess in 0.01f64..20.0,
            r_frac in 0.0f64..1.0,
        ) {
            let dim = 2usize;
            let p = dim as f64 / s + p_excess;
            let two_star = 2.0 * dim as f64 / (dim as f64 - 2.0 * s);
            let r = r_frac * two_star;
            let params = derive_params(dim, s, p, r).unwrap();
            prop_assert!(params.gamma > 1.0);
            // r = 2*_s forces q = 2*_s.
            let at_top = derive_params(dim, s, p, two_star).unwrap();
            prop_assert!((at_top.q - two_star).abs() < 1e-10);
        }
    }

    #[test]
    fn apply_single_mode_scales_by_lambda_pow() {
        let basis = mixed_basis_1d(65);
        let s = 0.75;
        let phi1 = basis.mode(0);
        let out = frac_apply(&basis, &phi1, s).unwrap();
        let expected = phi1.scaled(basis.eigenvalues[0].powf(s));
        assert!(out.linf_diff(&expected) < 1e-10 * expected.linf());
    }

    #[test]
    fn apply_sigma_zero_is_identity_on_full_basis() {
        let basis = mixed_basis_1d(65);
        let f = make_bump(&basis.grid().clone(), &[0.6], 0.2).unwrap();
        let out = frac_apply(&basis, &f, 0.0).unwrap();
        assert!(out.linf_diff(&f) < 1e-10 * f.linf().max(1.0));
    }

    #[test]
    fn apply_sigma_one_matches_matrix() {
        let basis = mixed_basis_1d(65);
        let f = make_bump(&basis.grid().clone(), &[0.5], 0.2).unwrap();
        let spectral = frac_apply(&basis, &f, 1.0).unwrap();
        let direct = basis.lap.apply_grid(&f);
        assert!(spectral.linf_diff(&direct) < 1e-10 * direct.linf());
    }

    #[test]
    fn solve_inverts_apply() {
        let basis = mixed_basis_1d(129);
        let s = 0.8;
        let f = make_bump(&basis.grid().clone(), &[0.4], 0.25).unwrap();
        let u = frac_solve(&basis, &f, s).unwrap();
        let back = frac_apply(&basis, &u, s).unwrap();
        assert!(back.linf_diff(&f) < 1e-8 * f.linf());
    }

    #[test]
    fn solve_at_s_one_matches_direct_solve() {
        let basis = mixed_basis_1d(129);
        let f = make_bump(&basis.grid().clone(), &[0.5], 0.3).unwrap();
        let u = frac_solve(&basis, &f, 1.0).unwrap();
        let direct = direct_solve(&basis.lap, &f).unwrap();
        assert!(u.linf_diff(&direct) < 1e-10 * direct.linf());
    }

    #[test]
    fn semigroup_property() {
        let basis = mixed_basis_1d(65);
        let f = make_bump(&basis.grid().clone(), &[0.5], 0.3).unwrap();
        let two_step =
            frac_apply(&basis, &frac_apply(&basis, &f, 0.3).unwrap(), 0.45).unwrap();
        let one_step = frac_apply(&basis, &f, 0.75).unwrap();
        assert!(two_step.linf_diff(&one_step) < 1e-10 * one_step.linf());
    }

    #[test]
    fn solve_is_linear() {
        let basis = mixed_basis_1d(65);
        let grid = basis.grid().clone();
        let f = make_bump(&grid, &[0.4], 0.2).unwrap();
        let g = make_bump(&grid, &[0.7], 0.15).unwrap();
        let s = 0.75;
        let combo = frac_solve(&basis, &f.scaled(2.0).add(&g.scaled(-3.0)), s).unwrap();
        let parts = frac_solve(&basis, &f, s)
            .unwrap()
            .scaled(2.0)
            .add(&frac_solve(&basis, &g, s).unwrap().scaled(-3.0));
        assert!(combo.linf_diff(&parts) < 1e-12 * parts.linf().max(1.0));
    }

    #[test]
    fn hs_norm_of_first_mode_and_identity() {
        let basis = mixed_basis_1d(65);
        let s = 0.75;
        let phi1 = basis.mode(0);
        let n1 = hs_norm(&basis, &phi1, s);
        assert!((n1 - basis.eigenvalues[0].powf(s / 2.0)).abs() < 1e-10);
        assert_eq!(hs_norm(&basis, &GridFunction::zeros(basis.grid()), s), 0.0);

        let u = make_bump(&basis.grid().clone(), &[0.55], 0.3).unwrap();
        let via_apply = frac_apply(&basis, &u, s / 2.0).unwrap().l2();
        assert!((hs_norm(&basis, &u, s) - via_apply).abs() < 1e-10);
    }

    #[test]
    fn positivity_of_inverse_power_is_measured() {
        // (P_v): solution of (-Delta)^s v = 1 stays nonnegative.
        let basis = mixed_basis_1d(129);
        let one = GridFunction::constant(basis.grid(), 1.0);
        let v = frac_solve(&basis, &one, 0.75).unwrap();
        assert!(v.min() >= -1e-8 * v.linf());
    }

    #[test]
    fn comparison_with_torsion_solution() {
        let basis = mixed_basis_1d(129);
        let grid = basis.grid().clone();
        let f = make_bump(&grid, &[0.5], 0.3).unwrap();
        let s = 0.75;
        let u = frac_solve(&basis, &f, s).unwrap();
        let v = frac_solve(&basis, &GridFunction::constant(&grid, 1.0), s).unwrap();
        let fmax = f.max();
        for i in 0..grid.len() {
            assert!(u.values[i] <= fmax * v.values[i] + 1e-8 * u.linf());
        }
    }

    fn square_basis(n: usize, faces: &[&str]) -> SpectralBasis {
        let grid = build_grid(&DomainSpec::unit_square(n)).unwrap();
        let sels: Vec<FaceSelection> =
            faces.iter().map(|f| FaceSelection::parse(f).unwrap()).collect();
        let part = partition_boundary(&grid, &sels).unwrap();
        let lap = Arc::new(assemble(&grid, &part).unwrap());
        eigendecompose(&lap, ModeCount::Full).unwrap()
    }

    #[test]
    fn cd_descent_is_monotone_and_below_holder_bound() {
        let basis = square_basis(17, &["left"]);
        let s = 0.75;
        let res = cd_constant(&basis, s).unwrap();
        for w in res.trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-14);
        }
        // Hoelder: C_D <= |Omega|^{2s/N} lambda_1^s, and the descent starts
        // at a quotient already below that bound.
        let bound = basis.eigenvalues[0].powf(s);
        assert!(res.value <= bound + 1e-9, "{} vs {}", res.value, bound);
        assert!(res.value > 0.0);
    }

    #[test]
    fn cd_monotone_under_dirichlet_growth() {
        let s = 0.75;
        let small = square_basis(17, &["left"]);
        let large = square_basis(17, &["left", "right"]);
        let res_small = cd_constant(&small, s).unwrap();
        // Warm-start the smaller-alpha problem from the larger-alpha
        // minimizer: the feasible set only grows, so C_D may only drop.
        let res_large = cd_constant(&large, s).unwrap();
        let warm = cd_constant_with_inits(
            &small,
            s,
            &[res_small.minimizer.clone(), res_large.minimizer.clone()],
        )
        .unwrap();
        assert!(warm.value <= res_large.value + 1e-8);
    }

    #[test]
    fn cd_requires_two_dimensions() {
        let basis = mixed_basis_1d(33);
        assert!(cd_constant(&basis, 0.75).is_err());
    }
}
