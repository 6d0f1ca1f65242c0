//! Finite-difference Laplacian with mixed Dirichlet-Neumann boundary
//! conditions and its eigendecomposition.
//!
//! The scheme is the classical 3-point (1D) / 5-point (2D) stencil with
//! Dirichlet nodes eliminated and Neumann nodes closed by ghost-point
//! reflection. Ghost reflection makes the operator self-adjoint with respect
//! to the trapezoid quadrature weights: with `W = diag(quad weights)` the
//! stiffness form `A = W L` is a symmetric M-matrix assembled edge by edge,
//!
//! ```text
//! u' A v = sum over grid edges (i,j) of  t_e / h_e * (u_i - u_j)(v_i - v_j)
//! ```
//!
//! with `t_e` the transverse trapezoid measure of the edge. Eigenpairs of
//! `L = W^{-1} A` are computed from the symmetrized matrix
//! `S = W^{-1/2} A W^{-1/2}`, so the eigenvectors come out orthonormal in
//! the discrete L^2 inner product.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::domain::{BoundaryPartition, Grid, GridFunction, NodeClass, pure_dirichlet_partition};
use crate::error::{Error, Result};

/// Free-node count above which the dense eigensolver gives way to Lanczos.
pub const DENSE_EIGEN_LIMIT: usize = 3000;

/// Minimal CSR storage for the symmetric stiffness matrix.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col: Vec<usize>,
    pub val: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from triplets, merging duplicate entries.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_unstable_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0usize; n + 1];
        let mut col = Vec::with_capacity(triplets.len());
        let mut val = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in triplets {
            if last == Some((i, j)) {
                *val.last_mut().unwrap() += v;
            } else {
                col.push(j);
                val.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix { n, row_ptr, col, val }
    }

    pub fn mul_vec(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        for i in 0..self.n {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.val[k] * x[self.col[k]];
            }
            out[i] = acc;
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        for k in self.row_ptr[i]..self.row_ptr[i + 1] {
            if self.col[k] == j {
                return self.val[k];
            }
        }
        0.0
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                m[(i, self.col[k])] += self.val[k];
            }
        }
        m
    }

    /// Largest |A_ij - A_ji|.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col[k];
                worst = worst.max((self.val[k] - self.get(j, i)).abs());
            }
        }
        worst
    }
}

/// The assembled mixed-BC Laplacian restricted to free (non-Dirichlet) nodes.
#[derive(Debug, Clone)]
pub struct MixedLaplacian {
    pub grid: Arc<Grid>,
    pub partition: Arc<BoundaryPartition>,
    /// Symmetric stiffness form `A = W L` on free nodes.
    pub stiffness: CsrMatrix,
    /// Quadrature weights of the free nodes (the diagonal of `W`).
    pub weights: Vec<f64>,
    pub free_to_grid: Vec<usize>,
    pub grid_to_free: Vec<Option<usize>>,
}

impl MixedLaplacian {
    pub fn n_free(&self) -> usize {
        self.free_to_grid.len()
    }

    /// Applies `L = W^{-1} A` to a free-node vector.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_free()];
        self.stiffness.mul_vec(x, &mut out);
        for (o, w) in out.iter_mut().zip(&self.weights) {
            *o /= w;
        }
        out
    }

    /// Restricts a grid function to the free nodes.
    pub fn restrict(&self, f: &GridFunction) -> Vec<f64> {
        self.free_to_grid.iter().map(|&g| f.values[g]).collect()
    }

    /// Embeds a free-node vector into a grid function, zero on Dirichlet nodes.
    pub fn embed(&self, x: &[f64]) -> GridFunction {
        let mut values = vec![0.0; self.grid.len()];
        for (k, &g) in self.free_to_grid.iter().enumerate() {
            values[g] = x[k];
        }
        GridFunction::new(&self.grid, values)
    }

    /// Applies the Laplacian to a grid function (zero Dirichlet data assumed).
    pub fn apply_grid(&self, f: &GridFunction) -> GridFunction {
        self.embed(&self.apply(&self.restrict(f)))
    }

    /// M-matrix structure: nonpositive off-diagonals, weakly diagonally
    /// dominant rows. Returns the worst violation (0 for a clean M-matrix).
    pub fn m_matrix_defect(&self) -> f64 {
        let a = &self.stiffness;
        let mut worst = 0.0_f64;
        for i in 0..a.n {
            let mut row_sum = 0.0;
            for k in a.row_ptr[i]..a.row_ptr[i + 1] {
                let v = a.val[k];
                if a.col[k] != i {
                    worst = worst.max(v); // off-diagonal must be <= 0
                }
                row_sum += v;
            }
            worst = worst.max(-row_sum); // row sum must be >= 0
        }
        worst
    }
}

/// Assembles the stiffness form over free nodes, edge by edge.
///
/// Errors when the Dirichlet part is empty (`alpha = 0`): the pure-Neumann
/// operator is singular.
pub fn assemble(grid: &Arc<Grid>, partition: &BoundaryPartition) -> Result<MixedLaplacian> {
    if partition.dirichlet_count() == 0 {
        return Err(Error::Config(
            "alpha = 0: pure-Neumann operator is singular".into(),
        ));
    }
    let n = grid.len();
    let mut grid_to_free = vec![None; n];
    let mut free_to_grid = Vec::new();
    for idx in 0..n {
        if partition.class(idx) != NodeClass::Dirichlet {
            grid_to_free[idx] = Some(free_to_grid.len());
            free_to_grid.push(idx);
        }
    }
    let n_free = free_to_grid.len();
    let weights: Vec<f64> = free_to_grid
        .iter()
        .map(|&g| grid.quad_weights[g])
        .collect();

    let [nx, ny] = grid.shape;
    let axis_weight = |n_ax: usize, h: f64, k: usize| -> f64 {
        if n_ax == 1 {
            1.0
        } else if k == 0 || k == n_ax - 1 {
            0.5 * h
        } else {
            h
        }
    };

    let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
    let mut add_edge = |a: usize, b: usize, c: f64| {
        match (grid_to_free[a], grid_to_free[b]) {
            (Some(fa), Some(fb)) => {
                triplets.push((fa, fa, c));
                triplets.push((fb, fb, c));
                triplets.push((fa, fb, -c));
                triplets.push((fb, fa, -c));
            }
            (Some(fa), None) => triplets.push((fa, fa, c)),
            (None, Some(fb)) => triplets.push((fb, fb, c)),
            (None, None) => {}
        }
    };

    // Edges along x: transverse measure is the y trapezoid weight.
    for j in 0..ny {
        let t = axis_weight(ny, grid.h[1], j);
        for i in 0..nx - 1 {
            add_edge(grid.index(i, j), grid.index(i + 1, j), t / grid.h[0]);
        }
    }
    // Edges along y (2D only).
    if ny > 1 {
        for i in 0..nx {
            let t = axis_weight(nx, grid.h[0], i);
            for j in 0..ny - 1 {
                add_edge(grid.index(i, j), grid.index(i, j + 1), t / grid.h[1]);
            }
        }
    }

    let stiffness = CsrMatrix::from_triplets(n_free, triplets);
    Ok(MixedLaplacian {
        grid: Arc::clone(grid),
        partition: Arc::new(partition.clone()),
        stiffness,
        weights,
        free_to_grid,
        grid_to_free,
    })
}

/// How many modes to retain in the eigendecomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeCount {
    /// All free nodes; required for exact `s = 1` consistency.
    Full,
    Partial(usize),
}

/// Eigenpairs of the mixed Laplacian, ascending, orthonormal in the
/// quadrature-weighted inner product.
#[derive(Debug, Clone)]
pub struct SpectralBasis {
    pub lap: Arc<MixedLaplacian>,
    pub eigenvalues: Vec<f64>,
    /// `n_free x k` matrix whose columns are the modes on free nodes.
    pub modes: DMatrix<f64>,
    /// First discarded eigenvalue, for the spectral-truncation estimate
    /// `lambda_{k+1}^{-s} ||f||`; `None` for a full basis.
    pub next_eigenvalue: Option<f64>,
    pub full: bool,
}

impl SpectralBasis {
    pub fn k(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.lap.grid
    }

    /// Spectral coefficients `a_j = <f, phi_j>_{L^2}` of a grid function.
    pub fn coefficients(&self, f: &GridFunction) -> Vec<f64> {
        let free = self.lap.restrict(f);
        let weighted: DVector<f64> = DVector::from_iterator(
            free.len(),
            free.iter().zip(&self.lap.weights).map(|(v, w)| v * w),
        );
        (self.modes.transpose() * weighted).data.into()
    }

    /// Synthesizes `sum_j c_j phi_j` as a grid function.
    pub fn synthesize(&self, coeffs: &[f64]) -> GridFunction {
        let c = DVector::from_column_slice(coeffs);
        let free = self.modes.clone() * c;
        self.lap.embed(free.as_slice())
    }

    /// The j-th mode as a grid function.
    pub fn mode(&self, j: usize) -> GridFunction {
        self.lap.embed(self.modes.column(j).as_slice())
    }

    /// Worst relative eigen-residual `||L phi - lambda phi|| / lambda` and
    /// worst deviation of the weighted Gram matrix from the identity.
    pub fn validate(&self) -> (f64, f64) {
        let n = self.lap.n_free();
        let mut worst_resid = 0.0_f64;
        for j in 0..self.k() {
            let phi: Vec<f64> = self.modes.column(j).iter().copied().collect();
            let lphi = self.lap.apply(&phi);
            let lam = self.eigenvalues[j];
            let mut num = 0.0;
            for i in 0..n {
                num += (lphi[i] - lam * phi[i]).powi(2);
            }
            worst_resid = worst_resid.max(num.sqrt() / lam);
        }
        let mut worst_gram = 0.0_f64;
        for a in 0..self.k() {
            for b in a..self.k() {
                let mut g = 0.0;
                for i in 0..n {
                    g += self.modes[(i, a)] * self.modes[(i, b)] * self.lap.weights[i];
                }
                let target = if a == b { 1.0 } else { 0.0 };
                worst_gram = worst_gram.max((g - target).abs());
            }
        }
        (worst_resid, worst_gram)
    }
}

/// Eigendecomposition of the mixed Laplacian.
///
/// Dense symmetric solve (tridiagonalization + implicit QL, via nalgebra)
/// up to [`DENSE_EIGEN_LIMIT`] free nodes, Lanczos with full
/// reorthogonalization above.
pub fn eigendecompose(lap: &Arc<MixedLaplacian>, count: ModeCount) -> Result<SpectralBasis> {
    let n = lap.n_free();
    let k = match count {
        ModeCount::Full => n,
        ModeCount::Partial(k) => {
            if k == 0 || k > n {
                return Err(Error::Config(format!(
                    "mode count must lie in 1..={n}, got {k}"
                )));
            }
            k
        }
    };
    let (mut eigenvalues, mut modes) = if n <= DENSE_EIGEN_LIMIT || k == n {
        dense_eigen(lap, k.min(n) + 1)?
    } else {
        lanczos_eigen(lap, k + 1, 0x5eed_f00d)?
    };

    let next_eigenvalue = if k < eigenvalues.len() {
        let next = eigenvalues[k];
        eigenvalues.truncate(k);
        modes = modes.columns(0, k).into_owned();
        Some(next)
    } else {
        None
    };

    if eigenvalues[0] <= 0.0 {
        return Err(Error::Numerical(format!(
            "smallest eigenvalue {} is not positive; operator lost coercivity",
            eigenvalues[0]
        )));
    }

    Ok(SpectralBasis {
        lap: Arc::clone(lap),
        eigenvalues,
        modes,
        next_eigenvalue,
        full: k == n,
    })
}

/// Dense path: symmetrize with `W^{1/2}`, decompose, sort, undo the scaling.
fn dense_eigen(lap: &MixedLaplacian, want: usize) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = lap.n_free();
    let sqrt_w: Vec<f64> = lap.weights.iter().map(|w| w.sqrt()).collect();
    let mut s = lap.stiffness.to_dense();
    for i in 0..n {
        for j in 0..n {
            s[(i, j)] /= sqrt_w[i] * sqrt_w[j];
        }
    }
    let eig = s.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .expect("eigenvalues are finite")
    });
    let kept = want.min(n);
    let mut eigenvalues = Vec::with_capacity(kept);
    let mut modes = DMatrix::zeros(n, kept);
    for (col, &idx) in order.iter().take(kept).enumerate() {
        eigenvalues.push(eig.eigenvalues[idx]);
        for i in 0..n {
            modes[(i, col)] = eig.eigenvectors[(i, idx)] / sqrt_w[i];
        }
    }
    Ok((eigenvalues, modes))
}

/// Lanczos with full reorthogonalization on `S = W^{-1/2} A W^{-1/2}`,
/// extracting the `want` smallest Ritz pairs.
fn lanczos_eigen(
    lap: &MixedLaplacian,
    want: usize,
    seed: u64,
) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = lap.n_free();
    let sqrt_w: Vec<f64> = lap.weights.iter().map(|w| w.sqrt()).collect();
    let apply_s = |x: &[f64]| -> Vec<f64> {
        let scaled: Vec<f64> = x.iter().zip(&sqrt_w).map(|(v, s)| v / s).collect();
        let mut out = vec![0.0; n];
        lap.stiffness.mul_vec(&scaled, &mut out);
        for (o, s) in out.iter_mut().zip(&sqrt_w) {
            *o /= *s;
        }
        out
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    normalize(&mut v);

    let max_iter = n.min((6 * want + 200).max(400));
    let mut basis: Vec<Vec<f64>> = vec![v.clone()];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();

    let mut check_at = (2 * want + 50).min(max_iter);
    loop {
        while alpha.len() < check_at {
            let m = alpha.len();
            let mut w = apply_s(&basis[m]);
            let a = dot(&w, &basis[m]);
            alpha.push(a);
            for i in 0..n {
                w[i] -= a * basis[m][i];
                if m > 0 {
                    w[i] -= beta[m - 1] * basis[m - 1][i];
                }
            }
            // Full reorthogonalization, two passes.
            for _ in 0..2 {
                for q in &basis {
                    let c = dot(&w, q);
                    for i in 0..n {
                        w[i] -= c * q[i];
                    }
                }
            }
            let b = dot(&w, &w).sqrt();
            if b < 1e-14 {
                // Invariant subspace found.
                beta.push(0.0);
                for x in w.iter_mut() {
                    *x = rng.random::<f64>() - 0.5;
                }
                for q in &basis {
                    let c = dot(&w, q);
                    for i in 0..n {
                        w[i] -= c * q[i];
                    }
                }
                normalize(&mut w);
            } else {
                beta.push(b);
                for x in w.iter_mut() {
                    *x /= b;
                }
            }
            basis.push(w);
            if basis.len() > n {
                break;
            }
        }

        let m = alpha.len();
        let (ritz_vals, ritz_vecs) = tridiag_eigen(&alpha, &beta[..m - 1]);
        // Residual of Ritz pair i is |beta_m * y[m-1, i]|.
        let tail = beta[m - 1];
        let converged = (0..want.min(m)).all(|i| {
            (tail * ritz_vecs[(m - 1, i)]).abs() <= 1e-10 * ritz_vals[i].max(1e-30)
        });
        if converged || m >= max_iter || m >= n {
            if !converged && m >= max_iter {
                let worst: f64 = (0..want.min(m))
                    .map(|i| (tail * ritz_vecs[(m - 1, i)]).abs() / ritz_vals[i].max(1e-30))
                    .fold(0.0, f64::max);
                return Err(Error::Numerical(format!(
                    "Lanczos did not converge after {m} iterations \
                     (worst relative residual {worst:.3e})"
                )));
            }
            let kept = want.min(m);
            let mut eigenvalues = Vec::with_capacity(kept);
            let mut modes = DMatrix::zeros(n, kept);
            for col in 0..kept {
                eigenvalues.push(ritz_vals[col]);
                for i in 0..n {
                    let mut acc = 0.0;
                    for (q, row) in basis.iter().take(m).enumerate() {
                        acc += row[i] * ritz_vecs[(q, col)];
                    }
                    modes[(i, col)] = acc / sqrt_w[i];
                }
            }
            return Ok((eigenvalues, modes));
        }
        check_at = (check_at + (want / 2 + 25)).min(max_iter);
    }
}

/// Eigen-decomposition of a symmetric tridiagonal matrix, ascending order.
fn tridiag_eigen(alpha: &[f64], beta: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
    let m = alpha.len();
    let mut t = DMatrix::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = t.symmetric_eigen();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = DMatrix::zeros(m, m);
    for (col, &idx) in order.iter().enumerate() {
        vecs.set_column(col, &eig.eigenvectors.column(idx));
    }
    (vals, vecs)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) {
    let norm = dot(v, v).sqrt();
    for x in v.iter_mut() {
        *x /= norm;
    }
}

/// First eigenpair of the pure-Dirichlet Laplacian on the same grid,
/// sign-normalized positive and with unit L^2 norm.
pub fn first_dirichlet_eigenpair(grid: &Arc<Grid>) -> Result<(GridFunction, f64)> {
    let partition = pure_dirichlet_partition(grid);
    let lap = Arc::new(assemble(grid, &partition)?);
    let k = if lap.n_free() > DENSE_EIGEN_LIMIT {
        ModeCount::Partial(1)
    } else {
        ModeCount::Partial(lap.n_free().min(1))
    };
    let basis = eigendecompose(&lap, k)?;
    let lambda1 = basis.eigenvalues[0];
    let mut phi = basis.mode(0);
    // Perron mode has constant sign on free nodes; make it positive.
    let mass: f64 = phi.integral();
    if mass < 0.0 {
        phi = phi.scaled(-1.0);
    }
    let norm = phi.l2();
    phi = phi.scaled(1.0 / norm);
    Ok((phi, lambda1))
}

/// Direct (non-spectral) solve of `L u = f`. Thomas elimination for the
/// tridiagonal 1D stiffness, dense Cholesky up to the dense limit,
/// conjugate gradients beyond.
pub fn direct_solve(lap: &MixedLaplacian, f: &GridFunction) -> Result<GridFunction> {
    let rhs: Vec<f64> = lap
        .restrict(f)
        .iter()
        .zip(&lap.weights)
        .map(|(v, w)| v * w)
        .collect();
    let n = lap.n_free();
    let x = if lap.grid.dim() == 1 {
        thomas_solve(&lap.stiffness, &rhs)?
    } else if n <= DENSE_EIGEN_LIMIT {
        let a = lap.stiffness.to_dense();
        let chol = a
            .cholesky()
            .ok_or_else(|| Error::Numerical("stiffness matrix is not SPD".into()))?;
        chol.solve(&DVector::from_column_slice(&rhs)).data.into()
    } else {
        cg_solve(&lap.stiffness, &rhs, 1e-13, 50 * n)?
    };
    Ok(lap.embed(&x))
}

fn thomas_solve(a: &CsrMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    let n = a.n;
    let mut diag = vec![0.0; n];
    let mut lower = vec![0.0; n]; // lower[i] = A[i, i-1]
    let mut upper = vec![0.0; n]; // upper[i] = A[i, i+1]
    for i in 0..n {
        for k in a.row_ptr[i]..a.row_ptr[i + 1] {
            let j = a.col[k];
            if j == i {
                diag[i] = a.val[k];
            } else if j + 1 == i {
                lower[i] = a.val[k];
            } else if j == i + 1 {
                upper[i] = a.val[k];
            } else {
                return Err(Error::Numerical(
                    "1D stiffness is not tridiagonal; cannot use Thomas solve".into(),
                ));
            }
        }
    }
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = upper[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - lower[i] * c[i - 1];
        c[i] = upper[i] / m;
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    Ok(x)
}

/// Jacobi-preconditioned conjugate gradients for the SPD stiffness matrix.
pub fn cg_solve(a: &CsrMatrix, rhs: &[f64], rel_tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    let n = a.n;
    let mut inv_diag = vec![0.0; n];
    for i in 0..n {
        let d = a.get(i, i);
        if d <= 0.0 {
            return Err(Error::Numerical("nonpositive diagonal in CG".into()));
        }
        inv_diag[i] = 1.0 / d;
    }
    let norm_b = dot(rhs, rhs).sqrt();
    if norm_b == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let mut x = vec![0.0; n];
    let mut r = rhs.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(v, d)| v * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for _ in 0..max_iter {
        a.mul_vec(&p, &mut ap);
        let alpha = rz / dot(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if dot(&r, &r).sqrt() <= rel_tol * norm_b {
            return Ok(x);
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::Numerical(format!(
        "CG did not reach relative residual {rel_tol:.1e} in {max_iter} iterations \
         (final residual {:.3e})",
        dot(&r, &r).sqrt() / norm_b
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_grid, partition_boundary, DomainSpec, Face, FaceSelection};
    use std::f64::consts::PI;

    fn interval_lap(n: usize, faces: &[Face]) -> Arc<MixedLaplacian> {
        let grid = build_grid(&DomainSpec::interval(1.0, n)).unwrap();
        let sels: Vec<FaceSelection> = faces.iter().map(|&f| FaceSelection::whole(f)).collect();
        let part = partition_boundary(&grid, &sels).unwrap();
        Arc::new(assemble(&grid, &part).unwrap())
    }

    #[test]
    fn dirichlet_interval_matches_textbook_stencil() {
        // 5 nodes on [0,1], both ends Dirichlet: L is tridiag(-16, 32, -16).
        let lap = interval_lap(5, &[Face::Left, Face::Right]);
        assert_eq!(lap.n_free(), 3);
        let e0 = lap.apply(&[1.0, 0.0, 0.0]);
        assert!((e0[0] - 32.0).abs() < 1e-10);
        assert!((e0[1] + 16.0).abs() < 1e-10);
        assert_eq!(e0[2], 0.0);
    }

    #[test]
    fn stiffness_is_symmetric_and_m_matrix() {
        let grid = build_grid(&DomainSpec::unit_square(9)).unwrap();
        let part = partition_boundary(
            &grid,
            &[
                FaceSelection::whole(Face::Left),
                FaceSelection::parse("bottom:0.5").unwrap(),
            ],
        )
        .unwrap();
        let lap = assemble(&grid, &part).unwrap();
        assert!(lap.stiffness.asymmetry() < 1e-14);
        assert!(lap.m_matrix_defect() <= 0.0 + 1e-14);
    }

    #[test]
    fn alpha_zero_is_rejected_upstream() {
        let grid = build_grid(&DomainSpec::interval(1.0, 9)).unwrap();
        assert!(partition_boundary(&grid, &[]).is_err());
    }

    #[test]
    fn mixed_interval_eigenvalues_match_closed_form() {
        // Dirichlet at 0, Neumann at 1: lambda_k = ((k - 1/2) pi)^2.
        let lap = interval_lap(512, &[Face::Left]);
        let basis = eigendecompose(&lap, ModeCount::Partial(5)).unwrap();
        for (k, &lam) in basis.eigenvalues.iter().enumerate() {
            let exact = ((k as f64 + 0.5) * PI).powi(2);
            assert!(
                (lam - exact).abs() / exact < 1e-3,
                "mode {k}: {lam} vs {exact}"
            );
        }
    }

    #[test]
    fn dirichlet_interval_lambda1_near_pi_squared() {
        let lap = interval_lap(257, &[Face::Left, Face::Right]);
        let basis = eigendecompose(&lap, ModeCount::Partial(1)).unwrap();
        let lam = basis.eigenvalues[0];
        assert!((lam - PI * PI).abs() / (PI * PI) < 1e-4, "{lam}");
    }

    #[test]
    fn basis_invariants_hold() {
        let lap = interval_lap(129, &[Face::Left]);
        let basis = eigendecompose(&lap, ModeCount::Partial(12)).unwrap();
        let (resid, gram) = basis.validate();
        assert!(resid < 1e-8, "residual {resid}");
        assert!(gram < 1e-10, "gram deviation {gram}");
        for w in basis.eigenvalues.windows(2) {
            assert!(w[0] <= w[1] + 1e-12);
        }
        assert!(basis.eigenvalues[0] > 0.0);
        assert!(basis.next_eigenvalue.is_some());
    }

    #[test]
    fn eigenvalue_convergence_is_second_order() {
        let exact = (0.5 * PI).powi(2);
        let err = |n: usize| {
            let lap = interval_lap(n, &[Face::Left]);
            let basis = eigendecompose(&lap, ModeCount::Partial(1)).unwrap();
            (basis.eigenvalues[0] - exact).abs()
        };
        let ratio = err(128) / err(256);
        // h halves (roughly), error ratio should be ~4.
        assert!(ratio > 3.2 && ratio < 4.8, "ratio {ratio}");
    }

    #[test]
    fn dirichlet_monotonicity_of_lambda1() {
        let lam = |faces: &[Face]| {
            let lap = interval_lap(65, faces);
            eigendecompose(&lap, ModeCount::Partial(1)).unwrap().eigenvalues[0]
        };
        assert!(lam(&[Face::Left]) <= lam(&[Face::Left, Face::Right]) + 1e-12);
    }

    #[test]
    fn first_dirichlet_eigenpair_interval() {
        let grid = build_grid(&DomainSpec::interval(1.0, 129)).unwrap();
        let (phi, lam) = first_dirichlet_eigenpair(&grid).unwrap();
        assert!((lam - PI * PI).abs() / (PI * PI) < 1e-3);
        // Positive in the interior, unit L^2 norm.
        for idx in 1..grid.len() - 1 {
            assert!(phi.values[idx] > 0.0);
        }
        assert!((phi.l2() - 1.0).abs() < 1e-12);
        // Shape: sqrt(2) sin(pi x) up to O(h^2).
        let mid = phi.values[64];
        assert!((mid - 2.0_f64.sqrt()).abs() < 1e-3);
    }

    #[test]
    fn first_dirichlet_eigenpair_square() {
        let grid = build_grid(&DomainSpec::unit_square(33)).unwrap();
        let (phi, lam) = first_dirichlet_eigenpair(&grid).unwrap();
        assert!((lam - 2.0 * PI * PI).abs() / (2.0 * PI * PI) < 2e-3);
        let mid = phi.values[grid.index(16, 16)];
        assert!((mid - 2.0).abs() < 5e-3, "center value {mid}");
    }

    #[test]
    fn lanczos_agrees_with_dense() {
        let lap = interval_lap(301, &[Face::Left]);
        let dense = eigendecompose(&lap, ModeCount::Partial(8)).unwrap();
        let (vals, _) = lanczos_eigen(&lap, 8, 42).unwrap();
        for (a, b) in dense.eigenvalues.iter().zip(&vals) {
            assert!((a - b).abs() / a < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn direct_solve_matches_manufactured_solution() {
        // -u'' = pi^2 sin(pi x), u = sin(pi x) with Dirichlet ends.
        let grid = build_grid(&DomainSpec::interval(1.0, 257)).unwrap();
        let part = partition_boundary(
            &grid,
            &[FaceSelection::whole(Face::Left), FaceSelection::whole(Face::Right)],
        )
        .unwrap();
        let lap = assemble(&grid, &part).unwrap();
        let f = GridFunction::from_fn(&grid, |x, _| PI * PI * (PI * x).sin());
        let u = direct_solve(&lap, &f).unwrap();
        let exact = GridFunction::from_fn(&grid, |x, _| (PI * x).sin());
        assert!(u.linf_diff(&exact) < 1e-4);
    }

    #[test]
    fn mode_count_bounds_checked() {
        let lap = interval_lap(9, &[Face::Left]);
        assert!(eigendecompose(&lap, ModeCount::Partial(0)).is_err());
        assert!(eigendecompose(&lap, ModeCount::Partial(100)).is_err());
    }
}
