//! Small dense symmetric matrices.
//!
//! Only the operations the design criteria need are implemented: Cholesky
//! factorization for inverses and log-determinants of positive definite
//! information matrices, and cyclic Jacobi sweeps for eigenvalue bounds.
//! Dimensions stay at or below the enumeration cap (q <= 20), so hand-rolled
//! loops are simpler and faster than pulling in a linear algebra dependency.

use serde::Serialize;

/// Dense symmetric matrix, row-major, serialized as `{"dim": n, "data": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymMatrix {
    #[serde(rename = "dim")]
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        SymMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// `ident * I + ones * J` where `J` is the all-ones matrix. Information
    /// matrices of class-symmetric measures all have this compound-symmetric
    /// form, with eigenvalues `ident` (n-1 fold) and `ident + n * ones`.
    pub fn compound_symmetric(n: usize, ident: f64, ones: f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = ones + if i == j { ident } else { 0.0 };
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    /// `self += scale * v v^T`.
    pub fn add_scaled_outer(&mut self, v: &[f64], scale: f64) {
        debug_assert_eq!(v.len(), self.n);
        for (i, &vi) in v.iter().enumerate() {
            let si = scale * vi;
            let row = &mut self.data[i * self.n..(i + 1) * self.n];
            for (slot, &vj) in row.iter_mut().zip(v) {
                *slot += si * vj;
            }
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.data[i * self.n + i]).sum()
    }

    /// `v^T self v`.
    pub fn quadratic_form(&self, v: &[f64]) -> f64 {
        debug_assert_eq!(v.len(), self.n);
        let mut acc = 0.0;
        for (i, &vi) in v.iter().enumerate() {
            let row = &self.data[i * self.n..(i + 1) * self.n];
            let dot: f64 = row.iter().zip(v).map(|(&m, &vj)| m * vj).sum();
            acc += vi * dot;
        }
        acc
    }

    /// Matrix square `self * self`; symmetric whenever `self` is.
    pub fn square(&self) -> SymMatrix {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += self.data[i * n + k] * self.data[k * n + j];
                }
                out.data[i * n + j] = acc;
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &SymMatrix) -> f64 {
        debug_assert_eq!(self.n, other.n);
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// `(self + self^T) / 2`. Construction keeps matrices symmetric already;
    /// this makes the eigenvalue path independent of that assumption.
    pub fn symmetrized(&self) -> SymMatrix {
        let n = self.n;
        let mut out = self.clone();
        for i in 0..n {
            for j in 0..n {
                out.data[i * n + j] = 0.5 * (self.data[i * n + j] + self.data[j * n + i]);
            }
        }
        out
    }

    /// Eigenvalues by cyclic Jacobi rotations, sorted descending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let n = self.n;
        if n == 0 {
            return Vec::new();
        }
        if n == 1 {
            return vec![self.data[0]];
        }
        let mut a = self.symmetrized().data;
        let scale = a
            .iter()
            .map(|x| x.abs())
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE);
        let tol = 1e-15 * scale;
        for _sweep in 0..100 {
            let mut off = 0.0f64;
            for p in 0..n {
                for q in (p + 1)..n {
                    off = off.max(a[p * n + q].abs());
                }
            }
            if off <= tol {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[p * n + q];
                    if apq.abs() <= tol {
                        continue;
                    }
                    let app = a[p * n + p];
                    let aqq = a[q * n + q];
                    let theta = if (app - aqq).abs() < f64::MIN_POSITIVE {
                        std::f64::consts::FRAC_PI_4
                    } else {
                        0.5 * (2.0 * apq / (app - aqq)).atan()
                    };
                    let (s, c) = theta.sin_cos();
                    for i in 0..n {
                        if i != p && i != q {
                            let aip = a[i * n + p];
                            let aiq = a[i * n + q];
                            a[i * n + p] = c * aip + s * aiq;
                            a[p * n + i] = a[i * n + p];
                            a[i * n + q] = -s * aip + c * aiq;
                            a[q * n + i] = a[i * n + q];
                        }
                    }
                    a[p * n + p] = c * c * app + 2.0 * c * s * apq + s * s * aqq;
                    a[q * n + q] = s * s * app - 2.0 * c * s * apq + c * c * aqq;
                    a[p * n + q] = 0.0;
                    a[q * n + p] = 0.0;
                }
            }
        }
        let mut eig: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
        eig.sort_by(|x, y| y.partial_cmp(x).unwrap_or(std::cmp::Ordering::Equal));
        eig
    }

    /// Smallest and largest eigenvalue.
    pub fn eigenvalue_range(&self) -> (f64, f64) {
        let eig = self.eigenvalues();
        (*eig.last().unwrap(), eig[0])
    }

    /// Lower-triangular Cholesky factor, or `None` if the matrix is not
    /// numerically positive definite.
    pub fn cholesky(&self) -> Option<Cholesky> {
        let n = self.n;
        let mut l = vec![0.0f64; n * n];
        for j in 0..n {
            let mut diag = self.data[j * n + j];
            for k in 0..j {
                diag -= l[j * n + k] * l[j * n + k];
            }
            if diag <= 0.0 || !diag.is_finite() {
                return None;
            }
            let root = diag.sqrt();
            l[j * n + j] = root;
            for i in (j + 1)..n {
                let mut v = self.data[i * n + j];
                for k in 0..j {
                    v -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = v / root;
            }
        }
        Some(Cholesky { n, l })
    }
}

/// Lower-triangular factor `L` with `L L^T` equal to the factored matrix.
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    l: Vec<f64>,
}

impl Cholesky {
    pub fn log_det(&self) -> f64 {
        (0..self.n).map(|i| 2.0 * self.l[i * self.n + i].ln()).sum()
    }

    /// Full inverse of the factored matrix, via `L^{-T} L^{-1}`.
    pub fn inverse(&self) -> SymMatrix {
        let n = self.n;
        // Forward-substitute the identity through L to get L^{-1} (lower).
        let mut linv = vec![0.0f64; n * n];
        for col in 0..n {
            for i in col..n {
                let mut v = if i == col { 1.0 } else { 0.0 };
                for k in col..i {
                    v -= self.l[i * n + k] * linv[k * n + col];
                }
                linv[i * n + col] = v / self.l[i * n + i];
            }
        }
        let mut out = SymMatrix::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                let mut acc = 0.0;
                for k in i..n {
                    acc += linv[k * n + i] * linv[k * n + j];
                }
                out.set(i, j, acc);
                out.set(j, i, acc);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compound_symmetric_layout() {
        let m = SymMatrix::compound_symmetric(3, 2.0, 0.5);
        assert_eq!(m.get(0, 0), 2.5);
        assert_eq!(m.get(0, 1), 0.5);
        assert_eq!(m.get(2, 2), 2.5);
    }

    #[test]
    fn cholesky_inverse_recovers_identity() {
        // 3x3 SPD with known structure: 2I + 0.3 J.
        let m = SymMatrix::compound_symmetric(3, 2.0, 0.3);
        let inv = m.cholesky().unwrap().inverse();
        // m * inv == I
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = 0.0;
                for k in 0..3 {
                    acc += m.get(i, k) * inv.get(k, j);
                }
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((acc - want).abs() < 1e-12, "({i},{j}) = {acc}");
            }
        }
    }

    #[test]
    fn log_det_matches_eigenvalue_product() {
        let m = SymMatrix::compound_symmetric(4, 1.5, -0.2);
        let chol = m.cholesky().unwrap();
        let by_eig: f64 = m.eigenvalues().iter().map(|e| e.ln()).sum();
        assert!((chol.log_det() - by_eig).abs() < 1e-12);
    }

    #[test]
    fn eigenvalues_of_compound_symmetric() {
        // aI + bJ has eigenvalues a (n-1 times) and a + n*b.
        let (a, b, n) = (0.7, 0.2, 5);
        let eig = SymMatrix::compound_symmetric(n, a, b).eigenvalues();
        assert!((eig[0] - (a + n as f64 * b)).abs() < 1e-12);
        for e in &eig[1..] {
            assert!((e - a).abs() < 1e-12);
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let mut m = SymMatrix::identity(2);
        m.set(0, 0, -1.0);
        assert!(m.cholesky().is_none());
    }

    #[test]
    fn quadratic_form_and_square_agree() {
        let m = SymMatrix::compound_symmetric(3, 1.0, 0.4);
        let v = [1.0, -2.0, 0.5];
        // v^T M^2 v computed two ways.
        let direct = m.square().quadratic_form(&v);
        let mv: Vec<f64> = (0..3)
            .map(|i| (0..3).map(|j| m.get(i, j) * v[j]).sum())
            .collect();
        let indirect: f64 = mv.iter().map(|x| x * x).sum();
        assert!((direct - indirect).abs() < 1e-12);
    }
}
