//! Dense real and complex Hermitian linear algebra at desk scale (dims ≤ ~16).
//!
//! Everything here is self-contained: a row-major real matrix type, a complex
//! Hermitian matrix type, a cyclic Jacobi eigensolver, and the handful of
//! derived operations (spectral functions, partial transpose, trace norm)
//! needed by the rest of the crate.

use num_complex::Complex64;
use thiserror::Error;

pub const HERMITICITY_TOL: f64 = 1e-10;
const JACOBI_OFF_TOL: f64 = 1e-14;
const JACOBI_MAX_SWEEPS: usize = 100;

#[derive(Debug, Error, PartialEq)]
pub enum LinalgError {
    #[error("matrix is not Hermitian: max asymmetry {0:.3e}")]
    NotHermitian(f64),
    #[error("spectral function undefined at eigenvalue {0}")]
    Domain(f64),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// Row-major dense real matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct RealMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl RealMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, entries: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut entries = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            entries.extend_from_slice(row);
        }
        Self { rows: r, cols: c, entries }
    }

    pub fn from_vec(rows: usize, cols: usize, entries: Vec<f64>) -> Self {
        assert_eq!(entries.len(), rows * cols);
        Self { rows, cols, entries }
    }

    /// Column vector from a slice.
    pub fn column(v: &[f64]) -> Self {
        Self { rows: v.len(), cols: 1, entries: v.to_vec() }
    }

    /// Row vector from a slice.
    pub fn row(v: &[f64]) -> Self {
        Self { rows: 1, cols: v.len(), entries: v.to_vec() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.entries[i * self.cols + j] = v;
    }

    pub fn row_slice(&self, i: usize) -> &[f64] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "matmul shape mismatch");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.entries[i * rhs.cols + j] += a * rhs.get(k, j);
                }
            }
        }
        out
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let entries = self
            .entries
            .iter()
            .zip(&rhs.entries)
            .map(|(a, b)| a + b)
            .collect();
        Self { rows: self.rows, cols: self.cols, entries }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let entries = self
            .entries
            .iter()
            .zip(&rhs.entries)
            .map(|(a, b)| a - b)
            .collect();
        Self { rows: self.rows, cols: self.cols, entries }
    }

    pub fn scale(&self, a: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|x| a * x).collect(),
        }
    }

    pub fn kron(&self, rhs: &Self) -> Self {
        let mut out = Self::zeros(self.rows * rhs.rows, self.cols * rhs.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                if a == 0.0 {
                    continue;
                }
                for k in 0..rhs.rows {
                    for l in 0..rhs.cols {
                        out.set(i * rhs.rows + k, j * rhs.cols + l, a * rhs.get(k, l));
                    }
                }
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn max_abs_diff(&self, rhs: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        self.entries
            .iter()
            .zip(&rhs.entries)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// Solves the square system A·x = b by Gaussian elimination with partial
/// pivoting. Returns None when A is singular to working precision.
pub fn solve_linear(a: &RealMatrix, b: &[f64]) -> Option<Vec<f64>> {
    let n = a.rows();
    assert_eq!(a.cols(), n);
    assert_eq!(b.len(), n);
    let mut m = a.entries().to_vec();
    let mut x = b.to_vec();
    for col in 0..n {
        let mut piv = col;
        for r in (col + 1)..n {
            if m[r * n + col].abs() > m[piv * n + col].abs() {
                piv = r;
            }
        }
        if m[piv * n + col].abs() < 1e-12 {
            return None;
        }
        if piv != col {
            for j in 0..n {
                m.swap(col * n + j, piv * n + j);
            }
            x.swap(col, piv);
        }
        let d = m[col * n + col];
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = m[r * n + col] / d;
            if f == 0.0 {
                continue;
            }
            for j in col..n {
                m[r * n + j] -= f * m[col * n + j];
            }
            x[r] -= f * x[col];
        }
    }
    for i in 0..n {
        x[i] /= m[i * n + i];
    }
    Some(x)
}

/// Dense complex Hermitian matrix (full row-major storage).
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl HermitianMatrix {
    /// Builds from full entries, validating Hermiticity within 1e-12.
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Self, LinalgError> {
        assert_eq!(entries.len(), dim * dim);
        let m = Self { dim, entries };
        let asym = m.asymmetry();
        if asym > 1e-12 {
            return Err(LinalgError::NotHermitian(asym));
        }
        Ok(m.hermitized())
    }

    /// Builds without validation; the caller guarantees Hermiticity.
    pub fn from_entries_unchecked(dim: usize, entries: Vec<Complex64>) -> Self {
        assert_eq!(entries.len(), dim * dim);
        Self { dim, entries }
    }

    /// Hermitian part (X + X†)/2 of an arbitrary complex square matrix.
    pub fn hermitian_part(dim: usize, entries: &[Complex64]) -> Self {
        let mut out = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                out[i * dim + j] = (entries[i * dim + j] + entries[j * dim + i].conj()) * 0.5;
            }
        }
        Self { dim, entries: out }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { dim, entries: vec![Complex64::new(0.0, 0.0); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.entries[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m.entries[i * values.len() + i] = Complex64::new(v, 0.0);
        }
        m
    }

    pub fn from_real(dim: usize, entries: &[f64]) -> Self {
        assert_eq!(entries.len(), dim * dim);
        Self {
            dim,
            entries: entries.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        }
    }

    /// Rank-1 projector |v⟩⟨v| from a complex vector.
    pub fn outer(v: &[Complex64]) -> Self {
        let dim = v.len();
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.entries[i * dim + j] = v[i] * v[j].conj();
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.entries[i * self.dim + j] = v;
    }

    fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in i..self.dim {
                let d = (self.get(i, j) - self.get(j, i).conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    fn hermitized(&self) -> Self {
        Self::hermitian_part(self.dim, &self.entries)
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim);
        Self {
            dim: self.dim,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim);
        Self {
            dim: self.dim,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, a: f64) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|x| x * a).collect(),
        }
    }

    /// Plain matrix product; the result is generally not Hermitian.
    pub fn matmul_raw(&self, rhs: &Self) -> Vec<Complex64> {
        assert_eq!(self.dim, rhs.dim);
        let n = self.dim;
        let mut out = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.entries[i * n + k];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[i * n + j] += a * rhs.entries[k * n + j];
                }
            }
        }
        out
    }

    /// Hermitian part of the product A·B.
    pub fn matmul_herm(&self, rhs: &Self) -> Self {
        Self::hermitian_part(self.dim, &self.matmul_raw(rhs))
    }

    /// The conjugation A·X·A (A self-adjoint sandwich); Hermitian when X is.
    pub fn sandwich(&self, x: &Self) -> Self {
        let ax = self.matmul_raw(x);
        let tmp = Self { dim: self.dim, entries: ax };
        let axa = tmp.matmul_raw(self);
        Self::hermitian_part(self.dim, &axa)
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i).re).sum()
    }

    /// Hilbert-Schmidt inner product Tr(A·B), real for Hermitian operands.
    pub fn hs_inner(&self, rhs: &Self) -> f64 {
        assert_eq!(self.dim, rhs.dim);
        let mut acc = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                acc += (self.get(i, j) * rhs.get(j, i)).re;
            }
        }
        acc
    }

    pub fn kron(&self, rhs: &Self) -> Self {
        let n = self.dim * rhs.dim;
        let mut out = Self::zeros(n);
        for i in 0..self.dim {
            for j in 0..self.dim {
                let a = self.get(i, j);
                for k in 0..rhs.dim {
                    for l in 0..rhs.dim {
                        out.set(i * rhs.dim + k, j * rhs.dim + l, a * rhs.get(k, l));
                    }
                }
            }
        }
        out
    }

    pub fn max_abs_diff(&self, rhs: &Self) -> f64 {
        assert_eq!(self.dim, rhs.dim);
        self.entries
            .iter()
            .zip(&rhs.entries)
            .fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, x| m.max(x.norm()))
    }

    /// Partial transpose on the second (B) factor of a dimA⊗dimB system.
    pub fn partial_transpose(&self, dim_a: usize, dim_b: usize) -> Result<Self, LinalgError> {
        if dim_a * dim_b != self.dim {
            return Err(LinalgError::DimensionMismatch(format!(
                "{}x{} factors do not multiply to dim {}",
                dim_a, dim_b, self.dim
            )));
        }
        let mut out = Self::zeros(self.dim);
        for a in 0..dim_a {
            for b in 0..dim_b {
                for ap in 0..dim_a {
                    for bp in 0..dim_b {
                        out.set(
                            a * dim_b + b,
                            ap * dim_b + bp,
                            self.get(a * dim_b + bp, ap * dim_b + b),
                        );
                    }
                }
            }
        }
        Ok(out)
    }

    /// Partial trace over the first (A) factor.
    pub fn partial_trace_a(&self, dim_a: usize, dim_b: usize) -> Result<Self, LinalgError> {
        if dim_a * dim_b != self.dim {
            return Err(LinalgError::DimensionMismatch(format!(
                "{}x{} factors do not multiply to dim {}",
                dim_a, dim_b, self.dim
            )));
        }
        let mut out = Self::zeros(dim_b);
        for b in 0..dim_b {
            for bp in 0..dim_b {
                let mut acc = Complex64::new(0.0, 0.0);
                for a in 0..dim_a {
                    acc += self.get(a * dim_b + b, a * dim_b + bp);
                }
                out.set(b, bp, acc);
            }
        }
        Ok(out)
    }

    /// Partial trace over the second (B) factor.
    pub fn partial_trace_b(&self, dim_a: usize, dim_b: usize) -> Result<Self, LinalgError> {
        if dim_a * dim_b != self.dim {
            return Err(LinalgError::DimensionMismatch(format!(
                "{}x{} factors do not multiply to dim {}",
                dim_a, dim_b, self.dim
            )));
        }
        let mut out = Self::zeros(dim_a);
        for a in 0..dim_a {
            for ap in 0..dim_a {
                let mut acc = Complex64::new(0.0, 0.0);
                for b in 0..dim_b {
                    acc += self.get(a * dim_b + b, ap * dim_b + b);
                }
                out.set(a, ap, acc);
            }
        }
        Ok(out)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let (vals, _) = eigh(self).expect("Hermitian by construction");
        vals[0]
    }
}

/// Spectral decomposition of a complex Hermitian matrix by cyclic Jacobi.
///
/// Returns eigenvalues in ascending order (ties broken by original diagonal
/// index) and the matching unitary eigenvector columns.
pub fn eigh(h: &HermitianMatrix) -> Result<(Vec<f64>, Vec<Vec<Complex64>>), LinalgError> {
    let asym = h.asymmetry();
    if asym > HERMITICITY_TOL {
        return Err(LinalgError::NotHermitian(asym));
    }
    let n = h.dim;
    let mut a = h.hermitized().entries;
    let mut v = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        v[i * n + i] = Complex64::new(1.0, 0.0);
    }

    let off = |a: &[Complex64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[i * n + j].norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    for _sweep in 0..JACOBI_MAX_SWEEPS {
        if off(&a) < JACOBI_OFF_TOL {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                let beta = apq.norm();
                if beta < JACOBI_OFF_TOL / (n as f64) {
                    continue;
                }
                let phase = apq / beta; // e^{i phi}
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                let tau = (aqq - app) / (2.0 * beta);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // G = I except G[p][p]=c*phase, G[p][q]=s*phase, G[q][p]=-s, G[q][q]=c.
                let gpp = phase * c;
                let gpq = phase * s;
                let gqp = Complex64::new(-s, 0.0);
                let gqq = Complex64::new(c, 0.0);
                // A <- G† A G, applied as row then column updates.
                for j in 0..n {
                    let xp = a[p * n + j];
                    let xq = a[q * n + j];
                    a[p * n + j] = gpp.conj() * xp + gqp.conj() * xq;
                    a[q * n + j] = gpq.conj() * xp + gqq.conj() * xq;
                }
                for i in 0..n {
                    let xp = a[i * n + p];
                    let xq = a[i * n + q];
                    a[i * n + p] = xp * gpp + xq * gqp;
                    a[i * n + q] = xp * gpq + xq * gqq;
                    let vp = v[i * n + p];
                    let vq = v[i * n + q];
                    v[i * n + p] = vp * gpp + vq * gqp;
                    v[i * n + q] = vp * gpq + vq * gqq;
                }
                a[p * n + q] = Complex64::new(0.0, 0.0);
                a[q * n + p] = Complex64::new(0.0, 0.0);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[i * n + i]
            .re
            .partial_cmp(&a[j * n + j].re)
            .unwrap()
            .then(i.cmp(&j))
    });
    let vals: Vec<f64> = order.iter().map(|&i| a[i * n + i].re).collect();
    let vecs: Vec<Vec<Complex64>> = order
        .iter()
        .map(|&k| (0..n).map(|i| v[i * n + k]).collect())
        .collect();
    Ok((vals, vecs))
}

/// Applies a real function on the spectrum: f(H) = Σ f(λ_k)·v_k v_k†.
pub fn matrix_function<F: Fn(f64) -> f64>(
    h: &HermitianMatrix,
    f: F,
) -> Result<HermitianMatrix, LinalgError> {
    let (vals, vecs) = eigh(h)?;
    let mut out = HermitianMatrix::zeros(h.dim);
    for (lam, v) in vals.iter().zip(&vecs) {
        let flam = f(*lam);
        if !flam.is_finite() {
            return Err(LinalgError::Domain(*lam));
        }
        let proj = HermitianMatrix::outer(v);
        out = out.add(&proj.scale(flam));
    }
    Ok(out)
}

/// Pseudo-inverse square root with eigenvalue cutoff.
pub fn pinv_sqrt(h: &HermitianMatrix, cutoff: f64) -> Result<HermitianMatrix, LinalgError> {
    matrix_function(h, |lam| if lam > cutoff { 1.0 / lam.sqrt() } else { 0.0 })
}

/// Sum of absolute eigenvalues.
pub fn trace_norm(h: &HermitianMatrix) -> Result<f64, LinalgError> {
    let (vals, _) = eigh(h)?;
    Ok(vals.iter().map(|x| x.abs()).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reconstruct(vals: &[f64], vecs: &[Vec<Complex64>]) -> HermitianMatrix {
        let n = vecs[0].len();
        let mut out = HermitianMatrix::zeros(n);
        for (lam, v) in vals.iter().zip(vecs) {
            out = out.add(&HermitianMatrix::outer(v).scale(*lam));
        }
        out
    }

    #[test]
    fn kron_identities() {
        let i2 = RealMatrix::identity(2);
        assert_eq!(i2.kron(&i2), RealMatrix::identity(4));
        // scalar-as-1x1 kron is scaling
        let a = RealMatrix::from_vec(1, 1, vec![3.0]);
        let b = RealMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]);
        assert_eq!(a.kron(&b), b.scale(3.0));
    }

    #[test]
    fn kron_index_formula() {
        // X ⊗ Z entry (i,j) = X[i/2][j/2] * Z[i%2][j%2]
        let x = RealMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        let z = RealMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, -1.0]]);
        let k = x.kron(&z);
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(k.get(i, j), x.get(i / 2, j / 2) * z.get(i % 2, j % 2));
            }
        }
    }

    #[test]
    fn eigh_diagonal() {
        let h = HermitianMatrix::diag(&[3.0, 1.0]);
        let (vals, _) = eigh(&h).unwrap();
        assert_eq!(vals, vec![1.0, 3.0]);
    }

    #[test]
    fn eigh_pauli_x() {
        let h = HermitianMatrix::from_real(2, &[0.0, 1.0, 1.0, 0.0]);
        let (vals, vecs) = eigh(&h).unwrap();
        // characteristic polynomial lambda^2 - 1 = 0
        assert!((vals[0] + 1.0).abs() < 1e-12);
        assert!((vals[1] - 1.0).abs() < 1e-12);
        assert!(reconstruct(&vals, &vecs).max_abs_diff(&h) < 1e-12);
    }

    #[test]
    fn eigh_zero() {
        let h = HermitianMatrix::zeros(3);
        let (vals, vecs) = eigh(&h).unwrap();
        assert!(vals.iter().all(|&v| v == 0.0));
        // columns orthonormal
        for i in 0..3 {
            for j in 0..3 {
                let dot: Complex64 = (0..3).map(|k| vecs[i][k].conj() * vecs[j][k]).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((dot - expect).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn eigh_complex_random_reconstruction() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..1000 {
            let n = rng.gen_range(1..=8);
            let mut raw = vec![Complex64::new(0.0, 0.0); n * n];
            for x in raw.iter_mut() {
                *x = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
            let h = HermitianMatrix::hermitian_part(n, &raw);
            let (vals, vecs) = eigh(&h).unwrap();
            assert!(reconstruct(&vals, &vecs).max_abs_diff(&h) <= 1e-10);
            for w in vals.windows(2) {
                assert!(w[0] <= w[1]);
            }
        }
    }

    #[test]
    fn eigh_rejects_non_hermitian() {
        let h = HermitianMatrix::from_entries_unchecked(
            2,
            vec![
                Complex64::new(1.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
            ],
        );
        assert!(matches!(eigh(&h), Err(LinalgError::NotHermitian(_))));
    }

    #[test]
    fn matrix_function_examples() {
        let h = HermitianMatrix::diag(&[4.0, 9.0]);
        let s = matrix_function(&h, f64::sqrt).unwrap();
        assert!(s.max_abs_diff(&HermitianMatrix::diag(&[2.0, 3.0])) < 1e-12);

        // identity function returns the input
        let mut raw = HermitianMatrix::from_real(2, &[1.0, 0.3, 0.3, 2.0]);
        raw.set(0, 1, Complex64::new(0.3, 0.1));
        raw.set(1, 0, Complex64::new(0.3, -0.1));
        let id = matrix_function(&raw, |x| x).unwrap();
        assert!(id.max_abs_diff(&raw) < 1e-12);

        // inverse sqrt on (1/2) I = sqrt(2) I
        let half = HermitianMatrix::identity(2).scale(0.5);
        let inv = matrix_function(&half, |x| 1.0 / x.sqrt()).unwrap();
        assert!(inv.max_abs_diff(&HermitianMatrix::identity(2).scale(2f64.sqrt())) < 1e-12);

        // inverse sqrt of a nonpositive eigenvalue is a domain error
        let neg = HermitianMatrix::diag(&[1.0, -1.0]);
        assert!(matches!(
            matrix_function(&neg, |x| 1.0 / x.sqrt()),
            Err(LinalgError::Domain(_))
        ));
    }

    #[test]
    fn partial_transpose_examples() {
        // product state: rho ⊗ sigma -> rho ⊗ sigma^T
        let rho = HermitianMatrix::from_real(2, &[0.7, 0.2, 0.2, 0.3]);
        let mut sigma = HermitianMatrix::from_real(2, &[0.5, 0.0, 0.0, 0.5]);
        sigma.set(0, 1, Complex64::new(0.1, 0.2));
        sigma.set(1, 0, Complex64::new(0.1, -0.2));
        let prod = rho.kron(&sigma);
        let pt = prod.partial_transpose(2, 2).unwrap();
        let mut sigma_t = sigma.clone();
        sigma_t.set(0, 1, sigma.get(1, 0));
        sigma_t.set(1, 0, sigma.get(0, 1));
        assert!(pt.max_abs_diff(&rho.kron(&sigma_t)) < 1e-14);

        // involution
        assert!(pt.partial_transpose(2, 2).unwrap().max_abs_diff(&prod) < 1e-14);

        // Bell projector spectrum {1/2,1/2,1/2,-1/2}
        let inv_sqrt2 = 1.0 / 2f64.sqrt();
        let phi = vec![
            Complex64::new(inv_sqrt2, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(inv_sqrt2, 0.0),
        ];
        let bell = HermitianMatrix::outer(&phi);
        let (vals, _) = eigh(&bell.partial_transpose(2, 2).unwrap()).unwrap();
        let expect = [-0.5, 0.5, 0.5, 0.5];
        for (v, e) in vals.iter().zip(expect) {
            assert!((v - e).abs() < 1e-12);
        }
    }

    #[test]
    fn trace_norm_examples() {
        let psd = HermitianMatrix::diag(&[0.2, 0.8]);
        assert!((trace_norm(&psd).unwrap() - 1.0).abs() < 1e-12);
        let d = HermitianMatrix::diag(&[1.0, -1.0]);
        assert!((trace_norm(&d).unwrap() - 2.0).abs() < 1e-12);
        // |0><0| - |+><+| has eigenvalues ±1/sqrt(2)
        let zero = HermitianMatrix::from_real(2, &[1.0, 0.0, 0.0, 0.0]);
        let plus = HermitianMatrix::from_real(2, &[0.5, 0.5, 0.5, 0.5]);
        assert!((trace_norm(&zero.sub(&plus)).unwrap() - 2f64.sqrt()).abs() < 1e-12);
    }
}
