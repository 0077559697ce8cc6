use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{domain, Error, Result};
use crate::fracfun::gamma;

/// Cell-centred grid on (−R, R).
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceGrid {
    pub radius: f64,
    pub n: usize,
    pub h: f64,
    pub nodes: Vec<f64>,
}

impl SpaceGrid {
    pub fn new(radius: f64, n: usize) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return domain(format!("R = {radius} must be positive"));
        }
        if n < 2 {
            return domain(format!("grid needs at least 2 cells, got {n}"));
        }
        let h = 2.0 * radius / n as f64;
        let nodes = (0..n).map(|i| -radius + (i as f64 + 0.5) * h).collect();
        Ok(Self { radius, n, h, nodes })
    }

    /// Index of the node nearest to `x`.
    pub fn nearest(&self, x: f64) -> usize {
        let i = ((x + self.radius) / self.h - 0.5).round();
        i.clamp(0.0, (self.n - 1) as f64) as usize
    }
}

fn second_difference(n: usize) -> DMatrix<f64> {
    // Antisymmetric ghost cells put the zero at the faces ±R.
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = 2.0;
        if i > 0 {
            m[(i, i - 1)] = -1.0;
        }
        if i + 1 < n {
            m[(i, i + 1)] = -1.0;
        }
    }
    m[(0, 0)] = 3.0;
    m[(n - 1, n - 1)] = 3.0;
    m
}

/// Normalizing constant of the 1-d fractional Laplacian singular integral.
pub fn fractional_laplacian_constant(alpha: f64) -> f64 {
    alpha * 2f64.powf(alpha - 1.0) * gamma(0.5 * (1.0 + alpha)) / (std::f64::consts::PI.sqrt() * gamma(1.0 - 0.5 * alpha))
}

/// Matrix approximating ν(−Δ)^{α/2} on the grid with zero exterior data.
pub fn build_discrete_generator(alpha: f64, nu: f64, grid: &SpaceGrid) -> Result<DMatrix<f64>> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return domain(format!("alpha = {alpha} must lie in (0, 2]"));
    }
    if !(nu > 0.0 && nu.is_finite()) {
        return domain(format!("nu = {nu} must be positive"));
    }
    let n = grid.n;
    if n < 8 {
        return domain(format!("grid.n = {n} too small, need at least 8 cells"));
    }
    let h = grid.h;
    if alpha == 2.0 {
        return Ok(second_difference(n) * (nu / (h * h)));
    }
    let c = fractional_laplacian_constant(alpha);
    // Far field: exact integral of |x_i − y|^{−1−α} over each cell and over the exterior;
    // near field |y − x_i| < h/2: second-order Taylor term.
    let mut a = DMatrix::zeros(n, n);
    let diag = c * 2.0 * (0.5 * h).powf(-alpha) / alpha;
    for i in 0..n {
        a[(i, i)] = diag;
        for j in 0..n {
            if j == i {
                continue;
            }
            let k = (j as f64 - i as f64).abs();
            let w = ((k - 0.5) * h).powf(-alpha) - ((k + 0.5) * h).powf(-alpha);
            a[(i, j)] = -c * w / alpha;
        }
    }
    let near = c * (0.5 * h).powf(2.0 - alpha) / ((2.0 - alpha) * h * h);
    a += second_difference(n) * near;
    a *= nu;
    // Exact symmetry regardless of rounding in the loops above.
    let at = a.transpose();
    Ok((a + at) * 0.5)
}

/// Spectrum of the discrete generator; eigenfunctions are orthonormal in the h-weighted inner product.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub mu: Vec<f64>,
    /// Column n holds φ_n sampled at the grid nodes.
    pub phi: DMatrix<f64>,
    pub grid: SpaceGrid,
}

pub fn eigen_system(a: &DMatrix<f64>, grid: &SpaceGrid) -> Result<EigenSystem> {
    let n = grid.n;
    if a.nrows() != n || a.ncols() != n {
        return domain(format!("matrix is {}x{}, grid has {n} nodes", a.nrows(), a.ncols()));
    }
    let asym = (a - a.transpose()).amax();
    if asym > 1e-12 * a.amax() {
        return domain(format!("matrix not symmetric (max asymmetry {asym:e})"));
    }
    let eig = SymmetricEigen::try_new(a.clone(), 1e-15, 10_000)
        .ok_or_else(|| Error::Numerical("symmetric eigendecomposition did not converge".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());
    let scale = 1.0 / grid.h.sqrt();
    let mut phi = DMatrix::zeros(n, n);
    let mut mu = Vec::with_capacity(n);
    for (col, &k) in order.iter().enumerate() {
        let mut v: DVector<f64> = eig.eigenvectors.column(k).into_owned();
        let lead = v.iter().fold(0.0f64, |m, x| if x.abs() > m.abs() + 1e-12 { *x } else { m });
        if lead < 0.0 {
            v = -v;
        }
        phi.set_column(col, &(v * scale));
        mu.push(eig.eigenvalues[k]);
    }
    if mu[0] <= 0.0 {
        return Err(Error::Numerical(format!("generator not positive definite: μ₁ = {:e}", mu[0])));
    }
    Ok(EigenSystem { mu, phi, grid: grid.clone() })
}

impl EigenSystem {
    /// Builds the generator and its spectrum in one step.
    pub fn for_generator(alpha: f64, nu: f64, grid: &SpaceGrid) -> Result<Self> {
        eigen_system(&build_discrete_generator(alpha, nu, grid)?, grid)
    }

    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }

    /// h·Φᵀv: expansion coefficients of a grid function.
    pub fn project(&self, v: &[f64]) -> Vec<f64> {
        let dv = DVector::from_column_slice(v);
        (self.phi.tr_mul(&dv) * self.grid.h).iter().copied().collect()
    }

    /// Φc: grid function with expansion coefficients `c`.
    pub fn synthesize(&self, c: &[f64]) -> Vec<f64> {
        let dc = DVector::from_column_slice(c);
        (&self.phi * dc).iter().copied().collect()
    }
}
