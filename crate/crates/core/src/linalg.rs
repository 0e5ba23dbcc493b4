//! Dense complex matrices for qubit and ququart operators.
//!
//! Everything here is sized for the entanglement-swapping network: the largest
//! object is the 16x16 joint operator on Alice's qubit, Bob's two qubits and
//! Charlie's qubit. Storage is row-major and every operation allocates a new
//! matrix; values are immutable once built.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default numerical tolerance for structural checks.
pub const DEFAULT_TOL: f64 = 1e-10;

const C0: Complex64 = Complex64::new(0.0, 0.0);
const C1: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

/// Outcome of [`ComplexMatrix::check_hermitian_psd`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermitianCheck {
    pub is_hermitian: bool,
    /// Largest `|a_ij - conj(a_ji)|`.
    pub max_asymmetry: f64,
    /// Smallest eigenvalue of the Hermitian part `(A + A†)/2`.
    pub min_eigenvalue: f64,
    /// Hermitian and `min_eigenvalue >= -tol`.
    pub is_psd: bool,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                left: (rows, cols),
                right: (data.len(), 1),
            });
        }
        if let Some(k) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite {
                row: k / cols,
                col: k % cols,
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::new(rows, cols, data.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = C1;
        }
        m
    }

    pub fn diag(entries: &[f64]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in entries.iter().enumerate() {
            m.data[i * n + i] = Complex64::new(d, 0.0);
        }
        m
    }

    /// `|ψ⟩⟨φ|` for column vectors given as slices.
    pub fn outer(ket: &[Complex64], bra: &[Complex64]) -> Self {
        let mut data = Vec::with_capacity(ket.len() * bra.len());
        for k in ket {
            for b in bra {
                data.push(k * b.conj());
            }
        }
        Self {
            rows: ket.len(),
            cols: bra.len(),
            data,
        }
    }

    /// Rank-one projector `|ψ⟩⟨ψ|`.
    pub fn projector(ket: &[Complex64]) -> Self {
        Self::outer(ket, ket)
    }

    /// Column vector as an `n x 1` matrix.
    pub fn column(entries: &[Complex64]) -> Self {
        Self {
            rows: entries.len(),
            cols: 1,
            data: entries.to_vec(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.cols + col]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn dagger(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self.get(i, j).conj());
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|z| z * s)
    }

    pub fn scale_complex(&self, s: Complex64) -> Self {
        self.map(|z| z * s)
    }

    fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    fn zip(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                left: (self.rows, self.cols),
                right: (other.rows, other.cols),
            });
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a - b)
    }

    /// Kronecker product; the result has `rows_a * rows_b` rows.
    pub fn kron(&self, other: &Self) -> Self {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut data = vec![C0; rows * cols];
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                if a == C0 {
                    continue;
                }
                for k in 0..other.rows {
                    let row = i * other.rows + k;
                    for l in 0..other.cols {
                        data[row * cols + j * other.cols + l] = a * other.get(k, l);
                    }
                }
            }
        }
        Self { rows, cols, data }
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                left: (self.rows, self.cols),
                right: (other.rows, other.cols),
            });
        }
        let mut data = vec![C0; self.rows * other.cols];
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == C0 {
                    continue;
                }
                for j in 0..other.cols {
                    data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        Ok(Self {
            rows: self.rows,
            cols: other.cols,
            data,
        })
    }

    pub fn trace(&self) -> Result<Complex64> {
        self.require_square()?;
        Ok((0..self.rows).map(|i| self.get(i, i)).sum())
    }

    /// `tr(self · other)` without forming the product.
    pub fn trace_product(&self, other: &Self) -> Result<Complex64> {
        if self.cols != other.rows || self.rows != other.cols {
            return Err(Error::DimensionMismatch {
                left: (self.rows, self.cols),
                right: (other.rows, other.cols),
            });
        }
        let mut acc = C0;
        for i in 0..self.rows {
            for k in 0..self.cols {
                acc += self.get(i, k) * other.get(k, i);
            }
        }
        Ok(acc)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        let d = self.sub(other)?;
        Ok(d.data.iter().map(|z| z.norm()).fold(0.0, f64::max))
    }

    /// `(A + A†)/2`.
    pub fn hermitian_part(&self) -> Result<Self> {
        self.require_square()?;
        Ok(self.add(&self.dagger())?.scale(0.5))
    }

    fn require_square(&self) -> Result<()> {
        if self.is_square() {
            Ok(())
        } else {
            Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    /// Eigenvalues of the Hermitian part, ascending.
    ///
    /// The `n x n` Hermitian matrix `H = S + iK` is embedded as the real
    /// symmetric `2n x 2n` block matrix `[[S, -K], [K, S]]`, whose spectrum is
    /// that of `H` with every eigenvalue doubled. Cyclic Jacobi rotations then
    /// diagonalise the embedding.
    pub fn hermitian_eigenvalues(&self) -> Result<Vec<f64>> {
        let h = self.hermitian_part()?;
        let n = h.rows;
        let m = 2 * n;
        let mut a = vec![0.0; m * m];
        for i in 0..n {
            for j in 0..n {
                let z = h.get(i, j);
                a[i * m + j] = z.re;
                a[(i + n) * m + (j + n)] = z.re;
                a[i * m + (j + n)] = -z.im;
                a[(i + n) * m + j] = z.im;
            }
        }
        jacobi_eigenvalues(&mut a, m);
        let mut eig: Vec<f64> = (0..m).map(|i| a[i * m + i]).collect();
        eig.sort_by(|x, y| x.total_cmp(y));
        Ok(eig.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect())
    }

    pub fn check_hermitian_psd(&self, tol: f64) -> Result<HermitianCheck> {
        self.require_square()?;
        let mut max_asymmetry: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                let d = (self.get(i, j) - self.get(j, i).conj()).norm();
                max_asymmetry = max_asymmetry.max(d);
            }
        }
        let is_hermitian = max_asymmetry <= tol;
        let min_eigenvalue = self.hermitian_eigenvalues()?[0];
        Ok(HermitianCheck {
            is_hermitian,
            max_asymmetry,
            min_eigenvalue,
            is_psd: is_hermitian && min_eigenvalue >= -tol,
        })
    }
}

/// In-place cyclic Jacobi on a dense symmetric matrix; leaves eigenvalues on the diagonal.
fn jacobi_eigenvalues(a: &mut [f64], n: usize) {
    let frob: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    if frob == 0.0 {
        return;
    }
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * frob {
            return;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() <= f64::MIN_POSITIVE {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
}

/// Free-function forms matching the operation names used elsewhere in the crate.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kron(b)
}

pub fn trace(a: &ComplexMatrix) -> Result<Complex64> {
    a.trace()
}

pub fn matmul(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    a.matmul(b)
}

pub fn check_hermitian_psd(a: &ComplexMatrix, tol: f64) -> Result<HermitianCheck> {
    a.check_hermitian_psd(tol)
}

pub mod pauli {
    use super::*;

    pub fn x() -> ComplexMatrix {
        ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap()
    }

    pub fn y() -> ComplexMatrix {
        ComplexMatrix::new(
            2,
            2,
            vec![C0, Complex64::new(0.0, -1.0), Complex64::new(0.0, 1.0), C0],
        )
        .unwrap()
    }

    pub fn z() -> ComplexMatrix {
        ComplexMatrix::diag(&[1.0, -1.0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn phi_plus() -> Vec<Complex64> {
        vec![c(FRAC_1_SQRT_2), c(0.0), c(0.0), c(FRAC_1_SQRT_2)]
    }

    #[test]
    fn kron_of_identities() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(i2.kron(&i2), ComplexMatrix::identity(4));
    }

    #[test]
    fn xx_stabilises_phi_plus() {
        let xx = pauli::x().kron(&pauli::x());
        let ket = ComplexMatrix::column(&phi_plus());
        let out = xx.matmul(&ket).unwrap();
        assert!(out.max_abs_diff(&ket).unwrap() < 1e-15);
    }

    #[test]
    fn kron_dimension_law() {
        let k = ComplexMatrix::identity(2).kron(&ComplexMatrix::identity(4));
        assert_eq!((k.rows(), k.cols()), (8, 8));
    }

    #[test]
    fn trace_examples() {
        assert_eq!(ComplexMatrix::identity(4).trace().unwrap(), c(4.0));
        let proj = ComplexMatrix::projector(&phi_plus());
        assert!((proj.trace().unwrap() - c(1.0)).norm() < 1e-15);
        let rect = ComplexMatrix::zeros(2, 3);
        assert!(matches!(rect.trace(), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn matmul_examples() {
        let x = pauli::x();
        assert_eq!(x.matmul(&x).unwrap(), ComplexMatrix::identity(2));
        let zero = ComplexMatrix::column(&[c(1.0), c(0.0)]);
        assert_eq!(pauli::z().matmul(&zero).unwrap(), zero);
        let h = pauli::z().add(&pauli::x()).unwrap().scale(FRAC_1_SQRT_2);
        let sq = h.matmul(&h).unwrap();
        assert!(sq.max_abs_diff(&ComplexMatrix::identity(2)).unwrap() < 1e-15);
        assert!(ComplexMatrix::zeros(2, 3).matmul(&ComplexMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn hermitian_psd_examples() {
        let mixed = ComplexMatrix::identity(4).scale(0.25);
        let chk = mixed.check_hermitian_psd(DEFAULT_TOL).unwrap();
        assert!(chk.is_hermitian && chk.is_psd);
        assert!((chk.min_eigenvalue - 0.25).abs() < 1e-14);

        let indefinite = ComplexMatrix::diag(&[1.0, -0.1]);
        let chk = indefinite.check_hermitian_psd(DEFAULT_TOL).unwrap();
        assert!(chk.is_hermitian && !chk.is_psd);
        assert!((chk.min_eigenvalue + 0.1).abs() < 1e-14);

        let non_herm = pauli::x()
            .add(&ComplexMatrix::identity(2).scale_complex(Complex64::new(0.0, 1.0)))
            .unwrap();
        let chk = non_herm.check_hermitian_psd(DEFAULT_TOL).unwrap();
        assert!(!chk.is_hermitian);
        assert!((chk.max_asymmetry - 2.0).abs() < 1e-15);
    }

    #[test]
    fn complex_eigenvalues_of_pauli_y() {
        let eig = pauli::y().hermitian_eigenvalues().unwrap();
        assert!((eig[0] + 1.0).abs() < 1e-13 && (eig[1] - 1.0).abs() < 1e-13);
    }

    #[test]
    fn rejects_non_finite_entries() {
        let err = ComplexMatrix::from_real(1, 2, &[1.0, f64::NAN]).unwrap_err();
        assert!(matches!(err, Error::NonFinite { row: 0, col: 1 }));
    }
}
