//! Dense complex matrices and the spectral routines everything else is built on.
//!
//! Matrices are row-major. Tensor products put the left factor on the major
//! index, so `kron(x, y)[(i, s), (j, t)] = x[i, j] * y[s, t]` lives at row
//! `i * y.rows() + s`. The crossed-product code relies on this: the algebra leg
//! is always the left factor and the group (or window) leg the right one.
//!
//! Eigenvalues of Hermitian matrices come from a cyclic complex Jacobi sweep,
//! which is slow compared to LAPACK but deterministic and accurate to a few
//! ulps relative to the Frobenius norm.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

/// Numerical slack used by every check in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceConfig {
    /// Allowed residual for identities (equalities between matrices).
    pub identity_tol: f64,
    /// Allowed negativity of eigenvalues in positivity checks.
    pub psd_tol: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            identity_tol: 1e-9,
            psd_tol: 1e-9,
        }
    }
}

impl ToleranceConfig {
    pub fn new(identity_tol: f64, psd_tol: f64) -> Result<Self> {
        let cfg = Self { identity_tol, psd_tol };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("identity_tol", self.identity_tol), ("psd_tol", self.psd_tol)] {
            if !(0.0..1e-3).contains(&v) {
                return Err(Error::InvalidInput(format!("{name} must lie in [0, 1e-3), got {v}")));
            }
        }
        Ok(())
    }
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidInput(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from real rows. Panics on ragged input.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self::from_fn(r, c, |i, j| C64::new(rows[i][j], 0.0))
    }

    pub fn from_rows(rows: Vec<Vec<C64>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::InvalidInput("ragged matrix rows".into()));
        }
        Ok(Self {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn diag(values: &[C64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    pub fn real_diag(values: &[f64]) -> Self {
        let vals: Vec<C64> = values.iter().map(|&v| C64::new(v, 0.0)).collect();
        Self::diag(&vals)
    }

    /// The matrix unit `e_{i,j}` of size `n`.
    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(n, n);
        m[(i, j)] = ONE;
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

    pub fn is_empty(&self) -> bool {
        self.rows == 0 || self.cols == 0
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(C64::new(factor, 0.0))
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - other`. Panics on shape mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.shape(), other.shape(), "shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// Hilbert-Schmidt inner product `tr(self* other)`.
    pub fn hs_inner(&self, other: &Self) -> C64 {
        assert_eq!(self.shape(), other.shape(), "shape mismatch");
        self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.hermitian_defect() <= tol
    }

    /// Frobenius norm of `self - self*`.
    pub fn hermitian_defect(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                acc += (self[(i, j)] - self[(j, i)].conj()).norm_sqr();
            }
        }
        acc.sqrt()
    }

    /// `(self + self*) / 2`.
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5)
    }

    pub fn kron(&self, other: &Self) -> Self {
        kron(self, other)
    }

    /// Copies the `nr x nc` block starting at `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, nr: usize, nc: usize) -> Self {
        Self::from_fn(nr, nc, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, block: &Self) {
        for i in 0..block.rows {
            for j in 0..block.cols {
                self[(r0 + i, c0 + j)] = block[(i, j)];
            }
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(
            self.cols, other.rows,
            "cannot multiply {}x{} by {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let mut out = Self::zeros(self.rows, other.cols);
        let n = other.cols;
        for i in 0..self.rows {
            let out_row = &mut out.data[i * n..(i + 1) * n];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let other_row = &other.data[k * n..(k + 1) * n];
                for (o, b) in out_row.iter_mut().zip(other_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// `self * x * self^*`.
    pub fn conjugate(&self, x: &Self) -> Self {
        self.matmul(x).matmul(&self.adjoint())
    }

    /// Inverse by Gaussian elimination with partial pivoting.
    pub fn inverse(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::InvalidInput("inverse of a non-square matrix".into()));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&x, &y| a[(x, col)].norm().total_cmp(&a[(y, col)].norm()))
                .expect("nonempty range");
            if a[(pivot, col)].norm() <= 1e-14 * scale {
                return Err(Error::InvalidInput("matrix is singular".into()));
            }
            if pivot != col {
                a.swap_rows(pivot, col);
                inv.swap_rows(pivot, col);
            }
            let p = a[(col, col)].inv();
            for j in 0..n {
                a[(col, j)] *= p;
                inv[(col, j)] *= p;
            }
            for row in 0..n {
                if row == col {
                    continue;
                }
                let f = a[(row, col)];
                if f == ZERO {
                    continue;
                }
                for j in 0..n {
                    let (ac, ic) = (a[(col, j)], inv[(col, j)]);
                    a[(row, j)] -= f * ac;
                    inv[(row, j)] -= f * ic;
                }
            }
        }
        Ok(inv)
    }

    fn swap_rows(&mut self, r1: usize, r2: usize) {
        for j in 0..self.cols {
            self.data.swap(r1 * self.cols + j, r2 * self.cols + j);
        }
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len());
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
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:>9.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl AddAssign<&ComplexMatrix> for ComplexMatrix {
    fn add_assign(&mut self, rhs: &ComplexMatrix) {
        assert_eq!(self.shape(), rhs.shape(), "shape mismatch in addition");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl SubAssign<&ComplexMatrix> for ComplexMatrix {
    fn sub_assign(&mut self, rhs: &ComplexMatrix) {
        assert_eq!(self.shape(), rhs.shape(), "shape mismatch in subtraction");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a -= b;
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn neg(self) -> ComplexMatrix {
        self.scale_real(-1.0)
    }
}

/// Kronecker product with the left factor as the major index.
pub fn kron(x: &ComplexMatrix, y: &ComplexMatrix) -> ComplexMatrix {
    let (xr, xc) = x.shape();
    let (yr, yc) = y.shape();
    let mut out = ComplexMatrix::zeros(xr * yr, xc * yc);
    for i in 0..xr {
        for j in 0..xc {
            let a = x[(i, j)];
            if a == ZERO {
                continue;
            }
            for s in 0..yr {
                for t in 0..yc {
                    out[(i * yr + s, j * yc + t)] = a * y[(s, t)];
                }
            }
        }
    }
    out
}

/// Eigenvalues (ascending) and unit eigenvectors (as columns) of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

const MAX_SWEEPS: usize = 100;

/// Cyclic Jacobi on the Hermitian part of `h`. When `want_vectors` is false the
/// returned vector matrix is empty.
fn jacobi(h: &ComplexMatrix, want_vectors: bool) -> HermitianEigen {
    let n = h.rows();
    let mut a = h.hermitian_part();
    let mut v = if want_vectors {
        ComplexMatrix::identity(n)
    } else {
        ComplexMatrix::zeros(0, 0)
    };
    let total = a.frobenius_norm();
    if n == 0 || total == 0.0 {
        let values = vec![0.0; n];
        return HermitianEigen { values, vectors: v };
    }
    let target = f64::EPSILON * total * 0.5;
    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= target {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let b = apq.norm();
                if b <= f64::MIN_POSITIVE {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                // Skip rotations whose effect is below rounding of the diagonal.
                if b < 1e-3 * f64::EPSILON * (app.abs() + aqq.abs()) {
                    a[(p, q)] = ZERO;
                    a[(q, p)] = ZERO;
                    continue;
                }
                let w = apq / b;
                let wbar = w.conj();
                let theta = (aqq - app) / (2.0 * b);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // Columns: A <- A J with J = diag(1, conj(w)) * [[c, s], [-s, c]].
                for r in 0..n {
                    let arp = a[(r, p)];
                    let arq = a[(r, q)];
                    a[(r, p)] = arp * c - arq * wbar * s;
                    a[(r, q)] = arp * s + arq * wbar * c;
                }
                // Rows: A <- J* A.
                for r in 0..n {
                    let apr = a[(p, r)];
                    let aqr = a[(q, r)];
                    a[(p, r)] = apr * c - aqr * w * s;
                    a[(q, r)] = apr * s + aqr * w * c;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
                if want_vectors {
                    for r in 0..n {
                        let vrp = v[(r, p)];
                        let vrq = v[(r, q)];
                        v[(r, p)] = vrp * c - vrq * wbar * s;
                        v[(r, q)] = vrp * s + vrq * wbar * c;
                    }
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = if want_vectors {
        ComplexMatrix::from_fn(n, n, |r, k| v[(r, order[k])])
    } else {
        v
    };
    HermitianEigen { values, vectors }
}

/// Above this size eigenvalue-only requests go through Householder
/// tridiagonalization and implicit QL instead of Jacobi.
const TRIDIAGONAL_CUTOFF: usize = 24;

fn eigenvalues_only(h: &ComplexMatrix) -> Vec<f64> {
    let blocks = diagonal_blocks(h);
    if blocks.len() > 1 {
        let mut values: Vec<f64> = blocks
            .iter()
            .flat_map(|idx| {
                let sub = ComplexMatrix::from_fn(idx.len(), idx.len(), |i, j| h[(idx[i], idx[j])]);
                dense_eigenvalues(&sub)
            })
            .collect();
        values.sort_by(f64::total_cmp);
        return values;
    }
    dense_eigenvalues(h)
}

/// Index sets of the connected components of the nonzero pattern of `h`.
/// `h` is block diagonal after a permutation with one block per component.
fn diagonal_blocks(h: &ComplexMatrix) -> Vec<Vec<usize>> {
    let n = h.rows();
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    let data = h.as_slice();
    for i in 0..n {
        for j in (i + 1)..n {
            if data[i * n + j] != ZERO || data[j * n + i] != ZERO {
                let (a, b) = (root(&mut parent, i), root(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = root(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = blocks.len();
            blocks.push(Vec::new());
        }
        blocks[slot[r]].push(i);
    }
    blocks
}

fn dense_eigenvalues(h: &ComplexMatrix) -> Vec<f64> {
    if h.rows() <= TRIDIAGONAL_CUTOFF {
        jacobi(h, false).values
    } else {
        let (mut d, mut e) = tridiagonalize(h);
        implicit_ql(&mut d, &mut e);
        d.sort_by(f64::total_cmp);
        d
    }
}

/// Reduces the Hermitian part of `h` to a real symmetric tridiagonal matrix
/// with the same spectrum. Returns the diagonal and the moduli of the
/// subdiagonal (`e[i]` couples `i` and `i + 1`; the last entry is zero).
fn tridiagonalize(h: &ComplexMatrix) -> (Vec<f64>, Vec<f64>) {
    let n = h.rows();
    let mut a = h.hermitian_part();
    let mut e = vec![0.0; n];
    let mut v = vec![ZERO; n];
    let mut w = vec![ZERO; n];
    for k in 0..n.saturating_sub(2) {
        let len = ((k + 1)..n).map(|i| a[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if len == 0.0 {
            continue;
        }
        let x0 = a[(k + 1, k)];
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { ONE };
        let alpha = -phase * len;
        for i in (k + 1)..n {
            v[i] = a[(i, k)];
        }
        v[k + 1] -= alpha;
        let vlen = ((k + 1)..n).map(|i| v[i].norm_sqr()).sum::<f64>().sqrt();
        if vlen == 0.0 {
            continue;
        }
        for x in &mut v[(k + 1)..] {
            *x /= vlen;
        }
        // p = A v on the trailing block, w = p - (v* p) v.
        let data = a.as_mut_slice();
        let vt = &v[(k + 1)..];
        for i in (k + 1)..n {
            let row = &data[i * n + k + 1..(i + 1) * n];
            w[i] = row.iter().zip(vt).map(|(x, y)| x * y).sum();
        }
        let kk: C64 = ((k + 1)..n).map(|i| v[i].conj() * w[i]).sum();
        for i in (k + 1)..n {
            w[i] -= kk.re * v[i];
        }
        let vc: Vec<C64> = v[(k + 1)..].iter().map(|x| 2.0 * x.conj()).collect();
        let wc: Vec<C64> = w[(k + 1)..].iter().map(|x| 2.0 * x.conj()).collect();
        for i in (k + 1)..n {
            let (vi, wi) = (v[i], w[i]);
            let row = &mut data[i * n + k + 1..(i + 1) * n];
            for ((x, wj), vj) in row.iter_mut().zip(&wc).zip(&vc) {
                *x -= vi * wj + wi * vj;
            }
        }
        a[(k + 1, k)] = alpha;
        a[(k, k + 1)] = alpha.conj();
        for i in (k + 2)..n {
            a[(i, k)] = ZERO;
            a[(k, i)] = ZERO;
        }
    }
    let d = (0..n).map(|i| a[(i, i)].re).collect();
    for i in 0..n.saturating_sub(1) {
        e[i] = a[(i + 1, i)].norm();
    }
    (d, e)
}

/// Eigenvalues of a symmetric tridiagonal matrix by QL with implicit shifts;
/// `d` is overwritten with the (unsorted) eigenvalues.
fn implicit_ql(d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    for l in 0..n {
        let mut iterations = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l || iterations == 60 {
                break;
            }
            iterations += 1;
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
}

fn check_hermitian(h: &ComplexMatrix, tol: f64) -> Result<()> {
    if !h.is_square() {
        return Err(Error::InvalidInput(format!(
            "expected a square matrix, got {}x{}",
            h.rows(),
            h.cols()
        )));
    }
    let asymmetry = h.hermitian_defect();
    let allowed = tol * (1.0 + h.frobenius_norm());
    if asymmetry > allowed {
        return Err(Error::NotHermitian { asymmetry, allowed });
    }
    Ok(())
}

/// Full eigendecomposition of a Hermitian matrix (ascending eigenvalues).
pub fn hermitian_eigen(h: &ComplexMatrix, tol: f64) -> Result<HermitianEigen> {
    check_hermitian(h, tol)?;
    Ok(jacobi(h, true))
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn hermitian_eigenvalues(h: &ComplexMatrix, tol: f64) -> Result<Vec<f64>> {
    check_hermitian(h, tol)?;
    Ok(eigenvalues_only(h))
}

/// Smallest eigenvalue of `(H + H*)/2`, after checking that `H` is Hermitian
/// up to `identity_tol * (1 + |H|)` in Frobenius norm.
pub fn min_hermitian_eigenvalue(h: &ComplexMatrix, identity_tol: f64) -> Result<f64> {
    let values = hermitian_eigenvalues(h, identity_tol)?;
    values
        .first()
        .copied()
        .ok_or_else(|| Error::InvalidInput("empty matrix has no eigenvalues".into()))
}

/// Largest singular value.
pub fn spectral_norm(m: &ComplexMatrix) -> Result<f64> {
    if m.is_empty() {
        return Err(Error::InvalidInput("spectral norm of an empty matrix".into()));
    }
    let gram = if m.rows() >= m.cols() {
        m.adjoint().matmul(m)
    } else {
        m.matmul(&m.adjoint())
    };
    let top = eigenvalues_only(&gram).last().copied().unwrap_or(0.0);
    Ok(top.max(0.0).sqrt())
}

/// Spectral norm for callers that have already excluded empty matrices.
pub fn norm(m: &ComplexMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    spectral_norm(m).expect("nonempty matrix")
}

/// Top singular triple `(sigma, u, v)` with `m v = sigma u`.
pub fn top_singular(m: &ComplexMatrix) -> (f64, Vec<C64>, Vec<C64>) {
    let gram = m.adjoint().matmul(m);
    let eig = jacobi(&gram, true);
    let k = m.cols() - 1;
    let v = eig.vectors.column(k);
    let sigma = eig.values[k].max(0.0).sqrt();
    let mv = m.mul_vec(&v);
    let u = if sigma > 0.0 {
        mv.iter().map(|z| z / sigma).collect()
    } else {
        let mut u = vec![ZERO; m.rows()];
        u[0] = ONE;
        u
    };
    (sigma, u, v)
}
