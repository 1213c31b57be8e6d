//! Dense real matrices, linear solves, and eigenvalue computation.
//!
//! Sizes here are tiny (the dimension of the ambient space, typically 1-4),
//! so everything is written directly: partial-pivot LU for solves and
//! determinants, closed forms for eigenvalues up to 2x2, and Hessenberg
//! reduction followed by shifted QR iteration above that. Eigenvectors for
//! residual checks come from inverse iteration in complex arithmetic.

use crate::error::{Error, Result};
use num_complex::Complex64;

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Matrix { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput("matrix rows must form a square".into()));
        }
        Ok(Matrix { n, data: rows.concat() })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.data[i * self.n..(i + 1) * self.n].to_vec()).collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    /// Largest absolute entry; cheap scale estimate for tolerances.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |a, x| a.max(x.abs()))
    }

    /// Determinant via partial-pivot LU.
    pub fn det(&self) -> f64 {
        let n = self.n;
        let mut a = self.clone();
        let mut det = 1.0;
        for k in 0..n {
            let mut piv = k;
            for i in k + 1..n {
                if a[(i, k)].abs() > a[(piv, k)].abs() {
                    piv = i;
                }
            }
            if a[(piv, k)] == 0.0 {
                return 0.0;
            }
            if piv != k {
                for j in 0..n {
                    a.data.swap(k * n + j, piv * n + j);
                }
                det = -det;
            }
            det *= a[(k, k)];
            for i in k + 1..n {
                let factor = a[(i, k)] / a[(k, k)];
                for j in k..n {
                    a[(i, j)] -= factor * a[(k, j)];
                }
            }
        }
        det
    }

    /// Solves `self * x = b` by partial-pivot Gaussian elimination.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        if b.len() != n {
            return Err(Error::InvalidInput(format!(
                "rhs has length {}, matrix is {n}x{n}",
                b.len()
            )));
        }
        let mut a = self.clone();
        let mut x = b.to_vec();
        let scale = self.max_abs().max(1.0);
        for k in 0..n {
            let mut piv = k;
            for i in k + 1..n {
                if a[(i, k)].abs() > a[(piv, k)].abs() {
                    piv = i;
                }
            }
            if a[(piv, k)].abs() <= f64::EPSILON * scale * n as f64 {
                return Err(Error::SingularJacobian);
            }
            if piv != k {
                for j in 0..n {
                    a.data.swap(k * n + j, piv * n + j);
                }
                x.swap(k, piv);
            }
            for i in k + 1..n {
                let factor = a[(i, k)] / a[(k, k)];
                for j in k..n {
                    a[(i, j)] -= factor * a[(k, j)];
                }
                x[i] -= factor * x[k];
            }
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= a[(i, j)] * x[j];
            }
            x[i] = s / a[(i, i)];
        }
        Ok(x)
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

/// Total QR sweep budget across all deflation stages.
const QR_ITERATION_BUDGET: usize = 10_000;

/// Eigenvalues of `m`, sorted by descending real part (ties broken by
/// descending imaginary part).
///
/// Closed forms handle n <= 2; larger matrices are reduced to Hessenberg
/// form and driven by shifted QR iteration (first sweep of each deflation
/// window unshifted, then Wilkinson shifts) with a 10 000-iteration budget.
pub fn eigenvalues(m: &Matrix) -> Result<Vec<Complex64>> {
    let n = m.size();
    let mut eigs = match n {
        0 => Vec::new(),
        1 => vec![Complex64::new(m[(0, 0)], 0.0)],
        2 => eig2(m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]).to_vec(),
        _ => qr_eigenvalues(m)?,
    };
    eigs.sort_by(|a, b| {
        b.re.partial_cmp(&a.re)
            .unwrap()
            .then(b.im.partial_cmp(&a.im).unwrap())
    });
    Ok(eigs)
}

/// Closed-form eigenvalues of `[[a, b], [c, d]]`.
fn eig2(a: f64, b: f64, c: f64, d: f64) -> [Complex64; 2] {
    let tr = a + d;
    let det = a * d - b * c;
    let disc = Complex64::new(tr * tr - 4.0 * det, 0.0).sqrt();
    let half = Complex64::new(tr / 2.0, 0.0);
    [half + disc / 2.0, half - disc / 2.0]
}

/// Householder reduction to upper Hessenberg form (complex storage so the
/// QR stage can share arithmetic).
fn to_hessenberg(m: &Matrix) -> Vec<Vec<Complex64>> {
    let n = m.size();
    let mut h: Vec<Vec<Complex64>> = m
        .rows()
        .iter()
        .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
        .collect();
    for k in 0..n.saturating_sub(2) {
        // build the Householder vector for column k below the subdiagonal
        let mut alpha_norm = 0.0f64;
        for i in k + 1..n {
            alpha_norm += h[i][k].norm_sqr();
        }
        let alpha_norm = alpha_norm.sqrt();
        if alpha_norm == 0.0 {
            continue;
        }
        let x0 = h[k + 1][k];
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { Complex64::new(1.0, 0.0) };
        let alpha = -phase * alpha_norm;
        let mut v: Vec<Complex64> = (k + 1..n).map(|i| h[i][k]).collect();
        v[0] -= alpha;
        let vnorm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for z in v.iter_mut() {
            *z /= vnorm;
        }
        // H = I - 2 v v*; apply from the left (rows k+1..n) and right
        for j in 0..n {
            let s: Complex64 = (0..v.len()).map(|i| v[i].conj() * h[k + 1 + i][j]).sum();
            for i in 0..v.len() {
                let update = 2.0 * v[i] * s;
                h[k + 1 + i][j] -= update;
            }
        }
        for row in h.iter_mut() {
            let s: Complex64 = (0..v.len()).map(|i| row[k + 1 + i] * v[i]).sum();
            for i in 0..v.len() {
                let update = 2.0 * s * v[i].conj();
                row[k + 1 + i] -= update;
            }
        }
        // enforce exact zeros below the subdiagonal in column k
        for i in k + 2..n {
            h[i][k] = Complex64::new(0.0, 0.0);
        }
    }
    h
}

/// Shifted QR iteration on the Hessenberg form, via Givens rotations.
fn qr_eigenvalues(m: &Matrix) -> Result<Vec<Complex64>> {
    let n = m.size();
    let mut h = to_hessenberg(m);
    let scale = m.max_abs().max(1.0);
    let mut eigs: Vec<Complex64> = Vec::with_capacity(n);
    let mut hi = n; // active block is rows/cols 0..hi
    let mut iterations = 0usize;
    let mut sweeps_in_window = 0usize;

    while hi > 0 {
        if hi == 1 {
            eigs.push(h[0][0]);
            hi = 0;
            continue;
        }
        // deflate negligible subdiagonals inside the active block
        let mut lo = hi - 1;
        while lo > 0 {
            let mag = h[lo][lo - 1].norm();
            if mag <= f64::EPSILON * (h[lo - 1][lo - 1].norm() + h[lo][lo].norm()).max(scale * 1e-300) {
                h[lo][lo - 1] = Complex64::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }
        if lo == hi - 1 {
            // 1x1 block split off
            eigs.push(h[hi - 1][hi - 1]);
            hi -= 1;
            sweeps_in_window = 0;
            continue;
        }
        if lo == hi - 2 {
            // 2x2 block: closed form
            let [l1, l2] = eig2c(
                h[hi - 2][hi - 2],
                h[hi - 2][hi - 1],
                h[hi - 1][hi - 2],
                h[hi - 1][hi - 1],
            );
            eigs.push(l1);
            eigs.push(l2);
            hi -= 2;
            sweeps_in_window = 0;
            continue;
        }

        if iterations >= QR_ITERATION_BUDGET {
            return Err(Error::Convergence {
                iterations,
                message: "QR iteration budget exhausted".into(),
            });
        }
        iterations += 1;
        sweeps_in_window += 1;

        // first sweep in a window runs unshifted; afterwards use the
        // Wilkinson shift (trailing 2x2 eigenvalue nearest the corner)
        let shift = if sweeps_in_window == 1 {
            Complex64::new(0.0, 0.0)
        } else if sweeps_in_window % 16 == 0 {
            // exceptional shift to break symmetry cycles
            Complex64::new(h[hi - 1][hi - 2].norm() + h[hi - 2][hi - 3].norm(), 0.0)
        } else {
            let [l1, l2] = eig2c(
                h[hi - 2][hi - 2],
                h[hi - 2][hi - 1],
                h[hi - 1][hi - 2],
                h[hi - 1][hi - 1],
            );
            let corner = h[hi - 1][hi - 1];
            if (l1 - corner).norm() <= (l2 - corner).norm() {
                l1
            } else {
                l2
            }
        };

        for i in lo..hi {
            h[i][i] -= shift;
        }
        // QR step on the active window by Givens rotations
        let mut rotations: Vec<(usize, Complex64, Complex64)> = Vec::with_capacity(hi - lo);
        for i in lo..hi - 1 {
            let a = h[i][i];
            let b = h[i + 1][i];
            let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
            if r == 0.0 {
                rotations.push((i, Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)));
                continue;
            }
            let c = a / r;
            let s = b / r;
            // apply G* from the left to rows i, i+1
            for j in i..hi {
                let hij = h[i][j];
                let hi1j = h[i + 1][j];
                h[i][j] = c.conj() * hij + s.conj() * hi1j;
                h[i + 1][j] = -s * hij + c * hi1j;
            }
            rotations.push((i, c, s));
        }
        // multiply R by the rotations from the right (forms RQ)
        for &(i, c, s) in &rotations {
            for row in h.iter_mut().take(hi).skip(lo) {
                let a = row[i];
                let b = row[i + 1];
                row[i] = a * c + b * s;
                row[i + 1] = -a * s.conj() + b * c.conj();
            }
        }
        for i in lo..hi {
            h[i][i] += shift;
        }
    }
    Ok(eigs)
}

/// Closed-form eigenvalues of a complex 2x2 block.
fn eig2c(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> [Complex64; 2] {
    let tr = a + d;
    let det = a * d - b * c;
    let disc = (tr * tr - 4.0 * det).sqrt();
    [(tr + disc) / 2.0, (tr - disc) / 2.0]
}

/// An eigenvector associated with `lambda`, via inverse iteration on a
/// slightly perturbed shift. Returns a unit vector, or `None` if the
/// iteration degenerates.
pub fn eigenvector_for(m: &Matrix, lambda: Complex64) -> Option<Vec<Complex64>> {
    let n = m.size();
    let scale = m.max_abs().max(1.0);
    // perturb the shift so (A - shift I) is invertible even at an exact eigenvalue
    let shift = lambda + Complex64::new(1e-10 * scale, 1e-10 * scale);
    let mut a: Vec<Vec<Complex64>> = m
        .rows()
        .iter()
        .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
        .collect();
    for i in 0..n {
        a[i][i] -= shift;
    }
    let mut v: Vec<Complex64> = (0..n)
        .map(|i| Complex64::new(1.0 + i as f64 * 0.3, 0.25 - i as f64 * 0.1))
        .collect();
    normalize(&mut v)?;
    for _ in 0..50 {
        let mut w = complex_solve(&a, &v)?;
        normalize(&mut w)?;
        let delta: f64 = w
            .iter()
            .zip(v.iter())
            .map(|(x, y)| (x - y).norm_sqr().min((x + y).norm_sqr()))
            .sum();
        v = w;
        if delta < 1e-28 {
            break;
        }
    }
    Some(v)
}

fn normalize(v: &mut [Complex64]) -> Option<()> {
    let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return None;
    }
    for z in v.iter_mut() {
        *z /= norm;
    }
    Some(())
}

/// Partial-pivot Gaussian elimination in complex arithmetic.
fn complex_solve(a: &[Vec<Complex64>], b: &[Complex64]) -> Option<Vec<Complex64>> {
    let n = b.len();
    let mut m: Vec<Vec<Complex64>> = a.to_vec();
    let mut x = b.to_vec();
    for k in 0..n {
        let mut piv = k;
        for i in k + 1..n {
            if m[i][k].norm() > m[piv][k].norm() {
                piv = i;
            }
        }
        if m[piv][k].norm() == 0.0 {
            return None;
        }
        m.swap(k, piv);
        x.swap(k, piv);
        for i in k + 1..n {
            let factor = m[i][k] / m[k][k];
            for j in k..n {
                let sub = factor * m[k][j];
                m[i][j] -= sub;
            }
            let sub = factor * x[k];
            x[i] -= sub;
        }
    }
    for i in (0..n).rev() {
        let mut s = x[i];
        for j in i + 1..n {
            s -= m[i][j] * x[j];
        }
        x[i] = s / m[i][i];
    }
    if x.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Some(x)
    } else {
        None
    }
}

/// Max eigen-residual `max_i ||m v_i - lambda_i v_i||` over all eigenpairs,
/// using inverse-iteration vectors. Exposed for tests and diagnostics.
pub fn eigen_residual(m: &Matrix, eigs: &[Complex64]) -> Option<f64> {
    let n = m.size();
    let mut worst = 0.0f64;
    for &lambda in eigs {
        let v = eigenvector_for(m, lambda)?;
        let mut res = 0.0f64;
        for i in 0..n {
            let mut dot = Complex64::new(0.0, 0.0);
            for j in 0..n {
                dot += Complex64::new(m[(i, j)], 0.0) * v[j];
            }
            res += (dot - lambda * v[i]).norm_sqr();
        }
        worst = worst.max(res.sqrt());
    }
    Some(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn solve_small_system() {
        let m = Matrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 3.0]]).unwrap();
        let x = m.solve(&[5.0, 10.0]).unwrap();
        assert!(close(x[0], 1.0, 1e-12));
        assert!(close(x[1], 3.0, 1e-12));
    }

    #[test]
    fn solve_detects_singularity() {
        let m = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert_eq!(m.solve(&[1.0, 2.0]).unwrap_err(), Error::SingularJacobian);
    }

    #[test]
    fn det_3x3() {
        let m = Matrix::from_rows(&[
            vec![2.0, 0.0, 1.0],
            vec![1.0, 3.0, 2.0],
            vec![0.0, 1.0, 1.0],
        ])
        .unwrap();
        // expansion: 2*(3-2) - 0 + 1*(1-0) = 3
        assert!(close(m.det(), 3.0, 1e-12));
    }

    #[test]
    fn identity_eigenvalues() {
        let eigs = eigenvalues(&Matrix::identity(3)).unwrap();
        for l in eigs {
            assert!(close(l.re, 1.0, 1e-12));
            assert!(close(l.im, 0.0, 1e-12));
        }
    }

    #[test]
    fn rotation_eigenvalues_are_pure_imaginary() {
        let m = Matrix::from_rows(&[vec![0.0, 1.0], vec![-1.0, 0.0]]).unwrap();
        let eigs = eigenvalues(&m).unwrap();
        assert!(close(eigs[0].re, 0.0, 1e-14));
        assert!(close(eigs[0].im, 1.0, 1e-14));
        assert!(close(eigs[1].re, 0.0, 1e-14));
        assert!(close(eigs[1].im, -1.0, 1e-14));
    }

    #[test]
    fn zero_matrix_eigenvalues() {
        let eigs = eigenvalues(&Matrix::zeros(2)).unwrap();
        assert!(eigs.iter().all(|l| l.norm() == 0.0));
    }

    #[test]
    fn known_3x3_spectrum() {
        // upper triangular: eigenvalues are the diagonal
        let m = Matrix::from_rows(&[
            vec![3.0, 1.0, -2.0],
            vec![0.0, -1.0, 4.0],
            vec![0.0, 0.0, 2.0],
        ])
        .unwrap();
        let eigs = eigenvalues(&m).unwrap();
        let mut res: Vec<f64> = eigs.iter().map(|l| l.re).collect();
        res.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!(close(res[0], -1.0, 1e-8));
        assert!(close(res[1], 2.0, 1e-8));
        assert!(close(res[2], 3.0, 1e-8));
    }

    #[test]
    fn companion_matrix_roots() {
        // companion of p(x) = x^3 - 6x^2 + 11x - 6 = (x-1)(x-2)(x-3)
        let m = Matrix::from_rows(&[
            vec![6.0, -11.0, 6.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
        ])
        .unwrap();
        let eigs = eigenvalues(&m).unwrap();
        // sorted descending by real part
        assert!(close(eigs[0].re, 3.0, 1e-7));
        assert!(close(eigs[1].re, 2.0, 1e-7));
        assert!(close(eigs[2].re, 1.0, 1e-7));
        assert!(eigs.iter().all(|l| l.im.abs() < 1e-7));
    }

    #[test]
    fn complex_pair_in_3x3() {
        // block diag(rotation, 5): eigenvalues ±i and 5
        let m = Matrix::from_rows(&[
            vec![0.0, 1.0, 0.0],
            vec![-1.0, 0.0, 0.0],
            vec![0.0, 0.0, 5.0],
        ])
        .unwrap();
        let eigs = eigenvalues(&m).unwrap();
        assert!(close(eigs[0].re, 5.0, 1e-8));
        let mut ims: Vec<f64> = eigs[1..].iter().map(|l| l.im).collect();
        ims.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!(close(ims[0], -1.0, 1e-8));
        assert!(close(ims[1], 1.0, 1e-8));
    }

    #[test]
    fn trace_and_residual_on_fixed_4x4() {
        let m = Matrix::from_rows(&[
            vec![1.0, 2.0, 0.5, -1.0],
            vec![-0.5, 0.0, 2.0, 1.5],
            vec![3.0, -2.0, 1.0, 0.0],
            vec![0.25, 1.0, -1.0, -2.0],
        ])
        .unwrap();
        let eigs = eigenvalues(&m).unwrap();
        let sum: Complex64 = eigs.iter().sum();
        assert!(close(sum.re, m.trace(), 1e-8 * (1.0 + m.trace().abs())));
        assert!(close(sum.im, 0.0, 1e-8));
        let res = eigen_residual(&m, &eigs).unwrap();
        assert!(res <= 1e-8 * m.max_abs().max(1.0), "residual {res}");
    }

    #[test]
    fn sort_order_descending_real_then_imaginary() {
        let m = Matrix::from_rows(&[
            vec![0.0, 2.0, 0.0],
            vec![-2.0, 0.0, 0.0],
            vec![0.0, 0.0, -3.0],
        ])
        .unwrap();
        let eigs = eigenvalues(&m).unwrap();
        // ±2i sort before -3; +2i before -2i
        assert!(close(eigs[0].im, 2.0, 1e-8));
        assert!(close(eigs[1].im, -2.0, 1e-8));
        assert!(close(eigs[2].re, -3.0, 1e-8));
    }
}
