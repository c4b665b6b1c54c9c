//! Small dense complex linear algebra.
//!
//! Everything here operates on matrices of order at most a few dozen: the
//! Gram matrices of the gate problem are 2×2 and the synthesized machine
//! acts on a 6-dimensional space. A cyclic Jacobi eigensolver is plenty.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use serde::ser::{Serialize, SerializeSeq, Serializer};

use crate::error::{Error, Result};

pub type CVector = Vec<Complex64>;

/// Default PSD tolerance, scaled by `max(1, ‖M‖_F)`.
pub const PSD_TOL: f64 = 1e-9;

/// Absolute tolerance of the Hermitian check.
pub const HERMITIAN_TOL: f64 = 1e-12;

const JACOBI_OFF_TOL: f64 = 1e-14;
const JACOBI_MAX_SWEEPS: usize = 100;

const COMPLETION_GRAM_TOL: f64 = 1e-8;
const DEPENDENCE_TOL: f64 = 1e-10;

/// `⟨a|b⟩`, conjugate-linear in the first argument.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Gram matrix `G[i][j] = ⟨v_i|v_j⟩`.
pub fn gram_matrix(vectors: &[CVector]) -> CMatrix {
    let n = vectors.len();
    let mut g = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            g[(i, j)] = inner(&vectors[i], &vectors[j]);
        }
    }
    g
}

/// Dense complex matrix in row-major order.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Builds a matrix from row slices. Panics on ragged input.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        CMatrix {
            rows: r,
            cols: c,
            data: rows.iter().flatten().copied().collect(),
        }
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Self {
        let rows: Vec<CVector> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        CMatrix::from_rows(&rows)
    }

    pub fn from_columns(cols: &[CVector]) -> Self {
        let c = cols.len();
        let r = cols.first().map_or(0, |col| col.len());
        let mut m = CMatrix::zeros(r, c);
        for (j, col) in cols.iter().enumerate() {
            assert_eq!(col.len(), r, "ragged columns");
            for (i, &x) in col.iter().enumerate() {
                m[(i, j)] = x;
            }
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = CMatrix::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        m
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

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> CVector {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn column(&self, j: usize) -> CVector {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        let mut out = CMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> Self {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> CVector {
        assert_eq!(v.len(), self.cols, "dimension mismatch in mul_vec");
        (0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.max_asymmetry() <= tol
    }

    /// `(M + M†) / 2`.
    pub fn hermitian_part(&self) -> Self {
        let half = Complex64::new(0.5, 0.0);
        (self + &self.adjoint()).scale(half)
    }

    /// Extracts the rows/cols listed in `idx` as a square submatrix.
    pub fn submatrix(&self, idx: &[usize]) -> Self {
        let mut out = CMatrix::zeros(idx.len(), idx.len());
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                out[(a, b)] = self[(i, j)];
            }
        }
        out
    }

    /// `‖M†M − I‖_F`.
    pub fn unitarity_defect(&self) -> f64 {
        let p = &self.adjoint() * self;
        (&p - &CMatrix::identity(self.cols)).frobenius_norm()
    }

    fn require_hermitian(&self) -> Result<()> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                found: self.cols,
            });
        }
        let asym = self.max_asymmetry();
        if asym > HERMITIAN_TOL {
            return Err(Error::NonHermitianInput {
                max_asymmetry: asym,
            });
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;

    fn mul(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch in matmul");
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;

    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;

    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Serialized as a list of rows, each entry a `[re, im]` pair.
impl Serialize for CMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.rows))?;
        for i in 0..self.rows {
            let row: Vec<[f64; 2]> = (0..self.cols)
                .map(|j| [self[(i, j)].re, self[(i, j)].im])
                .collect();
            seq.serialize_element(&row)?;
        }
        seq.end()
    }
}

/// Eigenvalues in ascending order with the matching unitary basis (columns).
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub basis: CMatrix,
}

impl EigenDecomposition {
    /// `V diag(f(λ)) V†`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.eigenvalues.len();
        let mut out = CMatrix::zeros(n, n);
        for (k, &lam) in self.eigenvalues.iter().enumerate() {
            let w = f(lam);
            if w == 0.0 {
                continue;
            }
            for i in 0..n {
                let vik = self.basis[(i, k)] * w;
                for j in 0..n {
                    out[(i, j)] += vik * self.basis[(j, k)].conj();
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.reconstruct_with(|x| x)
    }
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.
///
/// Output is deterministic: eigenvalues ascend (ties keep Jacobi order) and
/// each eigenvector is rephased so its first largest-modulus component is
/// real positive.
pub fn hermitian_eig(m: &CMatrix) -> Result<EigenDecomposition> {
    m.require_hermitian()?;
    let n = m.rows();
    let mut a = m.hermitian_part();
    let mut v = CMatrix::identity(n);
    let threshold = JACOBI_OFF_TOL * m.frobenius_norm().max(1.0);

    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(&a) < threshold {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                jacobi_rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re).then(i.cmp(&j)));

    let eigenvalues = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut basis = CMatrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        let mut vec = v.column(src);
        fix_phase(&mut vec);
        for (i, x) in vec.into_iter().enumerate() {
            basis[(i, col)] = x;
        }
    }
    Ok(EigenDecomposition { eigenvalues, basis })
}

fn off_diagonal_norm(a: &CMatrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Annihilates `a[p][q]` with `A ← G†AG`, accumulating `V ← VG`.
///
/// `G = D·R`: `D` rotates the phase of `a[p][q]` onto the real axis and `R`
/// is the real symmetric Jacobi rotation.
fn jacobi_rotate(a: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let phase = (apq / r).conj();
    let theta = (a[(q, q)].re - a[(p, p)].re) / (2.0 * r);
    let t = if theta >= 0.0 {
        1.0 / (theta + (theta * theta + 1.0).sqrt())
    } else {
        -1.0 / (-theta + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    let g_pp = Complex64::new(c, 0.0);
    let g_pq = Complex64::new(s, 0.0);
    let g_qp = phase * (-s);
    let g_qq = phase * c;

    let n = a.rows();
    let right = |m: &mut CMatrix| {
        for k in 0..m.rows() {
            let mkp = m[(k, p)];
            let mkq = m[(k, q)];
            m[(k, p)] = mkp * g_pp + mkq * g_qp;
            m[(k, q)] = mkp * g_pq + mkq * g_qq;
        }
    };
    right(a);
    right(v);
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = g_pp.conj() * apk + g_qp.conj() * aqk;
        a[(q, k)] = g_pq.conj() * apk + g_qq.conj() * aqk;
    }
    a[(p, q)] = Complex64::new(0.0, 0.0);
    a[(q, p)] = Complex64::new(0.0, 0.0);
    a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);
}

fn fix_phase(vec: &mut [Complex64]) {
    let max = vec.iter().map(|x| x.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return;
    }
    let lead = vec
        .iter()
        .position(|x| x.norm() >= max * (1.0 - 1e-12))
        .expect("max is attained");
    let rot = (vec[lead] / vec[lead].norm()).conj();
    for x in vec.iter_mut() {
        *x *= rot;
    }
    vec[lead] = Complex64::new(vec[lead].re, 0.0);
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum PsdTag {
    PositiveDefinite,
    PositiveSemidefinite,
    Indefinite,
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct PsdClass {
    pub tag: PsdTag,
    pub min_eigenvalue: f64,
}

impl PsdClass {
    pub fn is_psd(&self) -> bool {
        self.tag != PsdTag::Indefinite
    }
}

fn scaled_tol(m: &CMatrix, tol: f64) -> f64 {
    tol * m.frobenius_norm().max(1.0)
}

fn classify_min(min_eigenvalue: f64, tol: f64) -> PsdClass {
    let tag = if min_eigenvalue > tol {
        PsdTag::PositiveDefinite
    } else if min_eigenvalue.abs() <= tol {
        PsdTag::PositiveSemidefinite
    } else {
        PsdTag::Indefinite
    };
    PsdClass { tag, min_eigenvalue }
}

/// Classifies `m` by its smallest eigenvalue; `tol` is relative to `max(1, ‖M‖_F)`.
pub fn psd_classify(m: &CMatrix, tol: f64) -> Result<PsdClass> {
    let eig = hermitian_eig(m)?;
    let min = eig.eigenvalues.first().copied().unwrap_or(0.0);
    Ok(classify_min(min, scaled_tol(m, tol)))
}

/// Hermitian PSD square root `V diag(√λ) V†`, clamping eigenvalues in `[−tol, 0)` to zero.
pub fn principal_sqrt_psd(m: &CMatrix) -> Result<CMatrix> {
    principal_sqrt_psd_tol(m, PSD_TOL)
}

pub fn principal_sqrt_psd_tol(m: &CMatrix, tol: f64) -> Result<CMatrix> {
    let eig = hermitian_eig(m)?;
    let min = eig.eigenvalues.first().copied().unwrap_or(0.0);
    if !classify_min(min, scaled_tol(m, tol)).is_psd() {
        return Err(Error::NotPsd {
            min_eigenvalue: min,
        });
    }
    Ok(eig.reconstruct_with(|x| x.max(0.0).sqrt()).hermitian_part())
}

/// Realizes a PSD matrix as the Gram matrix of `n` vectors in `ambient_dim` dimensions.
///
/// Vector `i` has component `k` equal to `√λ_k · conj(V[i][k])`, with
/// eigenpairs taken in descending order and only the numerically nonzero
/// ones kept.
pub fn gram_factor(g: &CMatrix, ambient_dim: usize) -> Result<Vec<CVector>> {
    let eig = hermitian_eig(g)?;
    let tol = scaled_tol(g, PSD_TOL);
    let n = g.rows();
    let min = eig.eigenvalues.first().copied().unwrap_or(0.0);
    if !classify_min(min, tol).is_psd() {
        return Err(Error::NotPsd {
            min_eigenvalue: min,
        });
    }
    let kept: Vec<usize> = (0..n).rev().filter(|&k| eig.eigenvalues[k] > tol).collect();
    if kept.len() > ambient_dim {
        return Err(Error::AmbientTooSmall {
            rank: kept.len(),
            ambient: ambient_dim,
        });
    }
    let mut out = vec![vec![Complex64::new(0.0, 0.0); ambient_dim]; n];
    for (slot, &k) in kept.iter().enumerate() {
        let w = eig.eigenvalues[k].sqrt();
        for (i, vec) in out.iter_mut().enumerate() {
            vec[slot] = eig.basis[(i, k)].conj() * w;
        }
    }
    Ok(out)
}

/// Orthogonalizes `v` against `basis` twice (classical Gram-Schmidt with
/// reorthogonalization) and returns the residual.
fn orthogonalize(v: &[Complex64], basis: &[CVector]) -> CVector {
    let mut r = v.to_vec();
    for _ in 0..2 {
        for q in basis {
            let c = inner(q, &r);
            for (x, y) in r.iter_mut().zip(q) {
                *x -= c * y;
            }
        }
    }
    r
}

fn orthonormal_span(vectors: &[&CVector]) -> Result<Vec<CVector>> {
    let mut basis: Vec<CVector> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let r = orthogonalize(v, &basis);
        let rn = norm(&r);
        if rn <= DEPENDENCE_TOL * norm(v).max(1.0) {
            return Err(Error::DependentInputs);
        }
        basis.push(r.into_iter().map(|x| x / rn).collect());
    }
    Ok(basis)
}

fn complete_basis(mut basis: Vec<CVector>, dim: usize) -> Vec<CVector> {
    for idx in 0..dim {
        if basis.len() == dim {
            break;
        }
        let mut e = vec![Complex64::new(0.0, 0.0); dim];
        e[idx] = Complex64::new(1.0, 0.0);
        let r = orthogonalize(&e, &basis);
        let rn = norm(&r);
        if rn > 1e-6 {
            basis.push(r.into_iter().map(|x| x / rn).collect());
        }
    }
    basis
}

/// Builds a `dim × dim` unitary mapping each input vector to its paired output.
///
/// Both families are Gram-Schmidt orthonormalized (equal Grams give equal
/// triangular factors), then completed with canonical basis vectors in
/// index order; the unitary pairs the two completed bases.
pub fn unitary_completion(partial_map: &[(CVector, CVector)], dim: usize) -> Result<CMatrix> {
    for (x, y) in partial_map {
        for v in [x, y] {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: v.len(),
                });
            }
        }
    }
    if partial_map.len() > dim {
        return Err(Error::DependentInputs);
    }
    let inputs: Vec<CVector> = partial_map.iter().map(|(x, _)| x.clone()).collect();
    let outputs: Vec<CVector> = partial_map.iter().map(|(_, y)| y.clone()).collect();
    let deviation = gram_matrix(&inputs).max_abs_diff(&gram_matrix(&outputs));
    if deviation > COMPLETION_GRAM_TOL {
        return Err(Error::GramMismatch {
            max_deviation: deviation,
        });
    }

    let q_in = complete_basis(orthonormal_span(&inputs.iter().collect::<Vec<_>>())?, dim);
    let q_out = complete_basis(orthonormal_span(&outputs.iter().collect::<Vec<_>>())?, dim);

    let mut u = CMatrix::zeros(dim, dim);
    for (qo, qi) in q_out.iter().zip(&q_in) {
        for i in 0..dim {
            if qo[i] == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..dim {
                u[(i, j)] += qo[i] * qi[j].conj();
            }
        }
    }
    Ok(u)
}
