//! Dense matrices plus the two transition kernels: the permanent (Ryser,
//! Gray-code order) and the determinant (LU with partial pivoting).

use std::f64::consts::PI;
use std::ops::{Add, Div, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::arrangements::ModeOccupation;
use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Largest matrix accepted by [`permanent`].
pub const PERMANENT_MAX: usize = 30;
/// Largest matrix accepted by [`permanent_naive`].
pub const NAIVE_PERMANENT_MAX: usize = 9;
/// Pivots below this fraction of the largest entry count as exact zeros.
pub const PIVOT_NULL_RATIO: f64 = 1e-14;

/// Element type the kernels operate on.
pub trait Scalar:
    Copy
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
{
    fn modulus(self) -> f64;
}

impl Scalar for f64 {
    fn modulus(self) -> f64 {
        self.abs()
    }
}

impl Scalar for C64 {
    fn modulus(self) -> f64 {
        self.norm()
    }
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

pub type ComplexMatrix = Matrix<C64>;
pub type RealMatrix = Matrix<f64>;

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::MatrixFile(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Panics on ragged input.
    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self {
            rows: r,
            cols: c,
            data: rows.concat(),
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

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn max_norm(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.modulus()))
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        Self::from_fn(self.rows, other.cols, |i, j| {
            (0..self.cols).fold(T::zero(), |acc, k| acc + self[(i, k)] * other[(k, j)])
        })
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn require_square(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            })
        }
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

impl ComplexMatrix {
    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    /// Component-wise `|z|^2`.
    pub fn abs_squared(&self) -> RealMatrix {
        self.map(|z| z.norm_sqr())
    }

    pub fn scaled(&self, factor: C64) -> Self {
        self.map(|z| z * factor)
    }
}

/// Symmetric discrete Fourier matrix with entries
/// `exp(2 pi i (j-1)(k-1) / n) / sqrt(n)`, 1-based `j, k`.
pub fn fourier_matrix(n: usize) -> ComplexMatrix {
    let roots: Vec<C64> = (0..n)
        .map(|t| C64::from_polar(1.0, 2.0 * PI * t as f64 / n as f64))
        .collect();
    let norm = 1.0 / (n as f64).sqrt();
    Matrix::from_fn(n, n, |j, k| roots[(j * k) % n] * norm)
}

/// `max |U U^dagger - I| <= tol`.
pub fn is_unitary(u: &ComplexMatrix, tol: f64) -> Result<bool> {
    let n = u.require_square()?;
    let product = u.matmul(&u.adjoint());
    let deviation = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| {
            let target = if i == j { C64::one() } else { C64::zero() };
            (product[(i, j)] - target).norm()
        })
        .fold(0.0, f64::max);
    Ok(deviation <= tol)
}

/// Haar-distributed unitary from a seeded complex Gaussian matrix,
/// orthonormalised column by column (modified Gram-Schmidt, two passes).
pub fn random_unitary(n: usize, seed: u64) -> ComplexMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cols: Vec<Vec<C64>> = (0..n)
        .map(|_| {
            (0..n)
                .map(|_| {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    C64::new(re, im)
                })
                .collect()
        })
        .collect();
    for k in 0..n {
        for _ in 0..2 {
            for prev in 0..k {
                let (done, rest) = cols.split_at_mut(k);
                let q = &done[prev];
                let v = &mut rest[0];
                let overlap: C64 = q.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= overlap * qi;
                }
            }
        }
        let norm = cols[k].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in &mut cols[k] {
            *z /= norm;
        }
    }
    Matrix::from_fn(n, n, |i, j| cols[j][i])
}

/// Permanent via Ryser's formula, visiting column subsets in Gray-code order
/// so each step adds or removes a single column from the running row sums.
/// The outer sum is Kahan-compensated.
pub fn permanent<T: Scalar>(m: &Matrix<T>) -> Result<T> {
    let n = m.require_square()?;
    if n > PERMANENT_MAX {
        return Err(Error::TooLarge {
            op: "permanent",
            size: n,
            max: PERMANENT_MAX,
        });
    }
    if has_zero_line(m) {
        return Ok(T::zero());
    }
    Ok(ryser(m))
}

/// An all-zero row or column makes every permutation product vanish.
fn has_zero_line<T: Scalar>(m: &Matrix<T>) -> bool {
    let zero_row = (0..m.rows).any(|i| m.row(i).iter().all(|x| x.modulus() == 0.0));
    let zero_col = (0..m.cols).any(|j| (0..m.rows).all(|i| m[(i, j)].modulus() == 0.0));
    zero_row || zero_col
}

fn ryser<T: Scalar>(m: &Matrix<T>) -> T {
    let n = m.rows;
    if n == 0 {
        return T::one();
    }
    let mut row_sums = vec![T::zero(); n];
    let mut subset: u64 = 0;
    let mut sum = T::zero();
    let mut carry = T::zero();
    for step in 1u64..(1u64 << n) {
        let col = step.trailing_zeros() as usize;
        let bit = 1u64 << col;
        subset ^= bit;
        if subset & bit != 0 {
            for (i, s) in row_sums.iter_mut().enumerate() {
                *s = *s + m[(i, col)];
            }
        } else {
            for (i, s) in row_sums.iter_mut().enumerate() {
                *s = *s - m[(i, col)];
            }
        }
        let prod = row_sums.iter().fold(T::one(), |acc, &s| acc * s);
        let term = if subset.count_ones() % 2 == 1 {
            -prod
        } else {
            prod
        };
        let y = term - carry;
        let t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    if n % 2 == 1 {
        -sum
    } else {
        sum
    }
}

/// Permanent as the plain sum over all `N!` permutations.
pub fn permanent_naive<T: Scalar>(m: &Matrix<T>) -> Result<T> {
    let n = m.require_square()?;
    if n > NAIVE_PERMANENT_MAX {
        return Err(Error::TooLarge {
            op: "naive permanent",
            size: n,
            max: NAIVE_PERMANENT_MAX,
        });
    }
    fn walk<T: Scalar>(m: &Matrix<T>, row: usize, used: u32, prefix: T) -> T {
        if row == m.rows {
            return prefix;
        }
        (0..m.cols)
            .filter(|c| used & (1 << c) == 0)
            .fold(T::zero(), |acc, c| {
                acc + walk(m, row + 1, used | (1 << c), prefix * m[(row, c)])
            })
    }
    Ok(walk(m, 0, 0, T::one()))
}

/// Determinant through LU with partial pivoting. A pivot column whose
/// largest remaining entry is below `1e-14 * max|M|` yields exactly zero.
pub fn determinant<T: Scalar>(m: &Matrix<T>) -> Result<T> {
    let n = m.require_square()?;
    let scale = m.max_norm();
    if n > 0 && scale == 0.0 {
        return Ok(T::zero());
    }
    let threshold = PIVOT_NULL_RATIO * scale;
    let mut a = m.clone();
    let mut det = T::one();
    for k in 0..n {
        let (pivot_row, pivot_abs) =
            (k..n)
                .map(|i| (i, a[(i, k)].modulus()))
                .fold(
                    (k, -1.0),
                    |best, cur| if cur.1 > best.1 { cur } else { best },
                );
        if pivot_abs <= threshold {
            return Ok(T::zero());
        }
        if pivot_row != k {
            a.swap_rows(pivot_row, k);
            det = -det;
        }
        let pivot = a[(k, k)];
        det = det * pivot;
        let inv = T::one() / pivot;
        for i in k + 1..n {
            let factor = a[(i, k)] * inv;
            if factor.modulus() == 0.0 {
                continue;
            }
            for j in k + 1..n {
                let v = a[(k, j)];
                a[(i, j)] = a[(i, j)] - factor * v;
            }
        }
    }
    Ok(det)
}

/// `M[j][k] = U[d_j(r), d_k(s)]` with the 1-based mode assignment lists of
/// the input `r` and output `s`.
pub fn submatrix_for_transition(
    u: &ComplexMatrix,
    input: &ModeOccupation,
    output: &ModeOccupation,
) -> Result<ComplexMatrix> {
    let n = u.require_square()?;
    for occ in [input, output] {
        if occ.modes() != n {
            return Err(Error::ModeMismatch {
                left: occ.modes(),
                right: n,
            });
        }
    }
    if input.particles() != output.particles() {
        return Err(Error::ParticleMismatch {
            input: input.particles(),
            output: output.particles(),
        });
    }
    let rows = input.assignment();
    let cols = output.assignment();
    Ok(Matrix::from_fn(rows.len(), cols.len(), |j, k| {
        u[(rows.entries()[j] - 1, cols.entries()[k] - 1)]
    }))
}

/// On-disk matrix: `{"n": 2, "entries": [[re, im], ...]}`, row-major.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixFile {
    pub n: usize,
    pub entries: Vec<[f64; 2]>,
}

impl MatrixFile {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        Self {
            n: m.rows(),
            entries: m.data().iter().map(|z| [z.re, z.im]).collect(),
        }
    }

    pub fn into_matrix(self) -> Result<ComplexMatrix> {
        if self.n == 0 {
            return Err(Error::MatrixFile("n must be positive".into()));
        }
        let data = self
            .entries
            .iter()
            .map(|&[re, im]| C64::new(re, im))
            .collect();
        Matrix::from_vec(self.n, self.n, data)
    }
}

pub fn matrix_from_json(text: &str) -> Result<ComplexMatrix> {
    let file: MatrixFile =
        serde_json::from_str(text).map_err(|e| Error::MatrixFile(e.to_string()))?;
    file.into_matrix()
}

pub fn matrix_to_json(m: &ComplexMatrix) -> String {
    serde_json::to_string(&MatrixFile::from_matrix(m)).expect("matrix serialises")
}
