//! Dense complex linear algebra for small square operators.
//!
//! Everything here is sized for dimensions up to a few dozen: cyclic Jacobi
//! for Hermitian eigenproblems, a two-stage simultaneous diagonalization for
//! normal (in practice unitary) matrices, and the exponential/logarithm maps
//! built on top of them.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

pub use num_complex::Complex64 as C64;

use crate::error::{input, Error, Result};

const MAX_SWEEPS: usize = 100;
const CLUSTER_RTOL: f64 = 1e-9;

pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// Square complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<C64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Matrix { n, data: vec![C64::new(0.0, 0.0); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Matrix { n, data }
    }

    /// Build from row-major entries; `entries.len()` must be a perfect square.
    pub fn from_vec(entries: Vec<C64>) -> Result<Self> {
        let n = (entries.len() as f64).sqrt().round() as usize;
        if n * n != entries.len() || n == 0 {
            return input(format!("{} entries do not form a square matrix", entries.len()));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return input("matrix has non-finite entries");
        }
        Ok(Matrix { n, data: entries })
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return input("rows are not square");
        }
        Self::from_vec(rows.iter().flat_map(|r| r.iter().map(|&x| C64::new(x, 0.0))).collect())
    }

    pub fn diag(values: &[C64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n);
        for (i, &v) in values.iter().enumerate() {
            m.data[i * n + i] = v;
        }
        m
    }

    pub fn diag_real(values: &[f64]) -> Self {
        Self::diag(&values.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>())
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[Vec<C64>]) -> Self {
        let n = cols.len();
        Self::from_fn(n, |i, j| cols[j][i])
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.data[i * self.n + j] = v;
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.n).map(|i| self.get(i, j)).collect()
    }

    pub fn set_column(&mut self, j: usize, v: &[C64]) {
        for i in 0..self.n {
            self.set(i, j, v[i]);
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.n, |i, j| self.get(j, i).conj())
    }

    pub fn scale(&self, z: C64) -> Self {
        Matrix { n: self.n, data: self.data.iter().map(|&x| x * z).collect() }
    }

    pub fn scale_re(&self, x: f64) -> Self {
        Matrix { n: self.n, data: self.data.iter().map(|&v| v * x).collect() }
    }

    pub fn trace(&self) -> C64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// (A + A†)/2
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.n, |i, j| (self.get(i, j) + self.get(j, i).conj()) * 0.5)
    }

    /// (A − A†)/(2i), Hermitian for any A.
    pub fn skew_part(&self) -> Self {
        Self::from_fn(self.n, |i, j| (self.get(i, j) - self.get(j, i).conj()) / (2.0 * I))
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        let n = self.n;
        (0..n)
            .map(|i| {
                let row = &self.data[i * n..(i + 1) * n];
                row.iter().zip(v).map(|(a, b)| a * b).sum()
            })
            .collect()
    }

    /// A† v
    pub fn adjoint_mul_vec(&self, v: &[C64]) -> Vec<C64> {
        let n = self.n;
        let mut out = vec![C64::new(0.0, 0.0); n];
        for i in 0..n {
            let vi = v[i];
            for (j, o) in out.iter_mut().enumerate() {
                *o += self.data[i * n + j].conj() * vi;
            }
        }
        out
    }

    /// A B
    pub fn matmul(&self, b: &Matrix) -> Matrix {
        assert_eq!(self.n, b.n, "dimension mismatch");
        let n = self.n;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let brow = &b.data[k * n..(k + 1) * n];
                let orow = &mut out.data[i * n..(i + 1) * n];
                for (o, &bv) in orow.iter_mut().zip(brow) {
                    *o += a * bv;
                }
            }
        }
        out
    }

    /// A† B without forming A†.
    pub fn adjoint_matmul(&self, b: &Matrix) -> Matrix {
        let n = self.n;
        let mut out = Matrix::zeros(n);
        for k in 0..n {
            for i in 0..n {
                let a = self.data[k * n + i].conj();
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let brow = &b.data[k * n..(k + 1) * n];
                let orow = &mut out.data[i * n..(i + 1) * n];
                for (o, &bv) in orow.iter_mut().zip(brow) {
                    *o += a * bv;
                }
            }
        }
        out
    }

    /// A B†
    pub fn matmul_adjoint(&self, b: &Matrix) -> Matrix {
        let n = self.n;
        Matrix::from_fn(n, |i, j| {
            let ar = &self.data[i * n..(i + 1) * n];
            let br = &b.data[j * n..(j + 1) * n];
            ar.iter().zip(br).map(|(x, y)| x * y.conj()).sum()
        })
    }

    /// Left-multiply by a diagonal: diag(d) A.
    pub fn diag_mul(d: &[C64], a: &Matrix) -> Matrix {
        Matrix::from_fn(a.n, |i, j| d[i] * a.get(i, j))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Largest entrywise modulus of A − B.
    pub fn max_diff(&self, b: &Matrix) -> f64 {
        self.data.iter().zip(&b.data).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    /// Copy with everything outside rows `rows` × columns `cols` zeroed.
    pub fn block(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> Matrix {
        Matrix::from_fn(self.n, |i, j| {
            if rows.contains(&i) && cols.contains(&j) {
                self.get(i, j)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }
}

impl Add for &Matrix {
    type Output = Matrix;
    fn add(self, b: &Matrix) -> Matrix {
        assert_eq!(self.n, b.n, "dimension mismatch");
        Matrix { n: self.n, data: self.data.iter().zip(&b.data).map(|(x, y)| x + y).collect() }
    }
}

impl Sub for &Matrix {
    type Output = Matrix;
    fn sub(self, b: &Matrix) -> Matrix {
        assert_eq!(self.n, b.n, "dimension mismatch");
        Matrix { n: self.n, data: self.data.iter().zip(&b.data).map(|(x, y)| x - y).collect() }
    }
}

impl Mul for &Matrix {
    type Output = Matrix;
    fn mul(self, b: &Matrix) -> Matrix {
        self.matmul(b)
    }
}

impl Neg for &Matrix {
    type Output = Matrix;
    fn neg(self) -> Matrix {
        self.scale_re(-1.0)
    }
}

/// [A, B] = AB − BA
pub fn commutator(a: &Matrix, b: &Matrix) -> Matrix {
    &a.matmul(b) - &b.matmul(a)
}

pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Hermitian operator, validated to ‖A − A†‖_max ≤ 1e−12.
#[derive(Clone, Debug)]
pub struct Hermitian(Matrix);

impl Hermitian {
    pub fn new(m: Matrix) -> Result<Self> {
        if !m.is_finite() {
            return input("Hermitian operator has non-finite entries");
        }
        let dev = m.max_diff(&m.adjoint());
        if dev > 1e-12 {
            return Err(Error::NotHermitian(dev));
        }
        Ok(Hermitian(m))
    }

    /// Hermitian part of `m`, for results that are Hermitian up to rounding.
    pub fn symmetrized(m: &Matrix) -> Self {
        Hermitian(m.hermitian_part())
    }

    pub fn from_real_diag(values: &[f64]) -> Self {
        Hermitian(Matrix::diag_real(values))
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.n
    }

    /// Entries with real and imaginary parts uniform in [−1, 1], symmetrized.
    pub fn random<R: rand::Rng + ?Sized>(rng: &mut R, n: usize) -> Self {
        let m = Matrix::from_fn(n, |_, _| C64::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)));
        Hermitian::symmetrized(&m)
    }

    /// (1 − f) A + f B
    pub fn interpolate(a: &Hermitian, b: &Hermitian, f: f64) -> Hermitian {
        Hermitian(&a.0.scale_re(1.0 - f) + &b.0.scale_re(f))
    }
}

/// Unitary operator, validated to ‖U†U − I‖_max ≤ 1e−10.
#[derive(Clone, Debug)]
pub struct Unitary(Matrix);

impl Unitary {
    pub fn new(m: Matrix) -> Result<Self> {
        if !m.is_finite() {
            return input("unitary operator has non-finite entries");
        }
        let dev = m.adjoint_matmul(&m).max_diff(&Matrix::identity(m.n));
        if dev > 1e-10 {
            return Err(Error::NotUnitary(dev));
        }
        Ok(Unitary(m))
    }

    pub(crate) fn trusted(m: Matrix) -> Self {
        debug_assert!(m.adjoint_matmul(&m).max_diff(&Matrix::identity(m.n)) < 1e-9);
        Unitary(m)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.n
    }
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns.
    pub vectors: Matrix,
}

/// Eigendecomposition of a normal matrix.
///
/// For unitary input the eigenvalues are on the unit circle and are ordered
/// by ascending [`eigenphase`].
#[derive(Clone, Debug)]
pub struct NormalEigen {
    pub values: Vec<C64>,
    pub vectors: Matrix,
}

impl NormalEigen {
    pub fn phases(&self) -> Vec<f64> {
        self.values.iter().map(|&z| eigenphase(z)).collect()
    }
}

impl HermitianEigen {
    /// V f(Λ) V†
    pub fn apply_fn(&self, f: impl Fn(f64) -> C64) -> Matrix {
        let d: Vec<C64> = self.values.iter().map(|&x| f(x)).collect();
        let n = d.len();
        let v = &self.vectors;
        Matrix::from_fn(n, |i, j| (0..n).map(|k| v.get(i, k) * d[k] * v.get(j, k).conj()).sum())
    }
}

/// Energy-like phase of a unit complex number: E with z = e^{−iE}, E ∈ (−π, π].
pub fn eigenphase(z: C64) -> f64 {
    let e = -z.arg();
    if e <= -PI {
        e + 2.0 * PI
    } else {
        e
    }
}

fn off_diagonal_norm(a: &Matrix) -> f64 {
    let n = a.n;
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a.get(i, j).norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Cyclic complex Jacobi on the Hermitian part of `a0`.
fn jacobi(a0: &Matrix) -> Result<HermitianEigen> {
    let n = a0.n;
    let mut a = a0.hermitian_part();
    let mut v = Matrix::identity(n);
    let scale = a.frobenius();
    if n == 1 || scale == 0.0 {
        return Ok(finish(a, v));
    }
    let tol = 1e-3 * f64::EPSILON * scale;
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) <= tol {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }
    if !converged {
        let off = off_diagonal_norm(&a);
        if off > 1e-12 * scale {
            return Err(Error::NoConvergence(off));
        }
    }
    Ok(finish(a, v))
}

fn rotate(a: &mut Matrix, v: &mut Matrix, p: usize, q: usize) {
    let n = a.n;
    let apq = a.get(p, q);
    let g = apq.norm();
    if g == 0.0 {
        return;
    }
    // Rephase column/row q so that a_pq becomes real and positive.
    let ph = apq / g;
    let cph = ph.conj();
    for r in 0..n {
        let x = a.get(r, q) * cph;
        a.set(r, q, x);
    }
    for r in 0..n {
        let x = a.get(q, r) * ph;
        a.set(q, r, x);
    }
    for r in 0..n {
        let x = v.get(r, q) * cph;
        v.set(r, q, x);
    }
    let app = a.get(p, p).re;
    let aqq = a.get(q, q).re;
    let theta = (aqq - app) / (2.0 * g);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    for r in 0..n {
        if r == p || r == q {
            continue;
        }
        let arp = a.get(r, p);
        let arq = a.get(r, q);
        let np = arp * c - arq * s;
        let nq = arp * s + arq * c;
        a.set(r, p, np);
        a.set(p, r, np.conj());
        a.set(r, q, nq);
        a.set(q, r, nq.conj());
    }
    a.set(p, p, C64::new(app - t * g, 0.0));
    a.set(q, q, C64::new(aqq + t * g, 0.0));
    a.set(p, q, C64::new(0.0, 0.0));
    a.set(q, p, C64::new(0.0, 0.0));
    for r in 0..n {
        let vrp = v.get(r, p);
        let vrq = v.get(r, q);
        v.set(r, p, vrp * c - vrq * s);
        v.set(r, q, vrp * s + vrq * c);
    }
}

fn finish(a: Matrix, v: Matrix) -> HermitianEigen {
    let n = a.n;
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| a.get(i, i).re.total_cmp(&a.get(j, j).re));
    let values = idx.iter().map(|&i| a.get(i, i).re).collect();
    let cols: Vec<Vec<C64>> = idx.iter().map(|&i| fix_gauge(v.column(i))).collect();
    HermitianEigen { values, vectors: Matrix::from_columns(&cols) }
}

/// Rephase so the first component of non-negligible size is real positive.
pub fn fix_gauge(mut col: Vec<C64>) -> Vec<C64> {
    if let Some(z) = col.iter().copied().find(|z| z.norm() > 1e-8) {
        let ph = z.conj() / z.norm();
        for x in col.iter_mut() {
            *x *= ph;
        }
    }
    col
}

/// Eigendecomposition of a Hermitian operator; eigenvalues ascending.
pub fn hermitian_eig(h: &Hermitian) -> Result<HermitianEigen> {
    jacobi(h.matrix())
}

fn cluster_bounds(values: &[f64]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = 0;
    for k in 1..=values.len() {
        let split = k == values.len() || {
            let (a, b) = (values[k - 1], values[k]);
            (b - a).abs() > CLUSTER_RTOL * a.abs().max(b.abs()).max(1.0)
        };
        if split {
            out.push((start, k));
            start = k;
        }
    }
    out
}

/// One two-stage pass: diagonalize the Hermitian part of e^{−iφ}A, then
/// the skew part within each degenerate cluster of the first stage.
fn two_stage(a: &Matrix, phi: f64) -> Result<Matrix> {
    let b = a.scale(C64::from_polar(1.0, -phi));
    let first = jacobi(&b.hermitian_part())?;
    let mut vecs = first.vectors;
    let skew = b.skew_part();
    for (lo, hi) in cluster_bounds(&first.values) {
        let m = hi - lo;
        if m < 2 {
            continue;
        }
        let basis: Vec<Vec<C64>> = (lo..hi).map(|k| vecs.column(k)).collect();
        let restricted = Matrix::from_fn(m, |i, j| inner(&basis[i], &skew.mul_vec(&basis[j])));
        let inner_eig = jacobi(&restricted)?;
        for c in 0..m {
            let col: Vec<C64> = (0..a.n)
                .map(|r| (0..m).map(|k| basis[k][r] * inner_eig.vectors.get(k, c)).sum())
                .collect();
            vecs.set_column(lo + c, &col);
        }
    }
    Ok(vecs)
}

/// Rotation angle that keeps distinct eigenvalues well separated after
/// projection onto the real axis.
fn separating_angle(values: &[C64]) -> f64 {
    let scale = values.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let dirs: Vec<f64> = values
        .iter()
        .enumerate()
        .flat_map(|(i, &a)| values[i + 1..].iter().map(move |&b| b - a))
        .filter(|d| d.norm() > CLUSTER_RTOL * scale)
        .map(|d| d.arg())
        .collect();
    if dirs.is_empty() {
        return 0.0;
    }
    let score = |phi: f64| dirs.iter().map(|&t| (t - phi).cos().abs()).fold(f64::INFINITY, f64::min);
    let mut best = (score(0.0), 0.0);
    for m in 1..256 {
        let phi = PI * m as f64 / 256.0;
        let s = score(phi);
        if s > best.0 + 1e-12 {
            best = (s, phi);
        }
    }
    best.1
}

/// Eigendecomposition of a normal matrix by simultaneous diagonalization of
/// its Hermitian and skew-Hermitian parts.
///
/// A first pass locates the eigenvalues; a second pass is done after a global
/// phase rotation chosen so that no two distinct eigenvalues project onto
/// nearly the same real part, which keeps eigenvectors accurate for close
/// eigenphases.
pub fn normal_eig(a: &Matrix) -> Result<NormalEigen> {
    let n = a.n;
    let dev = a.matmul_adjoint(a).max_diff(&a.adjoint_matmul(a));
    if dev > 1e-8 {
        return Err(Error::NotNormal(dev));
    }
    let rayleigh = |vecs: &Matrix| -> Vec<C64> {
        (0..n)
            .map(|k| {
                let v = vecs.column(k);
                inner(&v, &a.mul_vec(&v))
            })
            .collect()
    };
    let mut vecs = two_stage(a, 0.0)?;
    let rough = rayleigh(&vecs);
    let phi = separating_angle(&rough);
    if phi != 0.0 {
        vecs = two_stage(a, phi)?;
    }
    let mut values = rayleigh(&vecs);
    for z in values.iter_mut() {
        let r = z.norm();
        if (r - 1.0).abs() < 1e-8 && r > 0.0 {
            *z /= r;
        }
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| {
        eigenphase(values[i]).total_cmp(&eigenphase(values[j])).then(values[i].norm().total_cmp(&values[j].norm()))
    });
    let cols: Vec<Vec<C64>> = idx.iter().map(|&i| fix_gauge(vecs.column(i))).collect();
    Ok(NormalEigen { values: idx.iter().map(|&i| values[i]).collect(), vectors: Matrix::from_columns(&cols) })
}

/// e^{−i·scale·H}
pub fn expm_i_hermitian(h: &Hermitian, scale: f64) -> Result<Unitary> {
    if !scale.is_finite() {
        return input("exponent scale must be finite");
    }
    let e = hermitian_eig(h)?;
    Ok(Unitary::trusted(e.apply_fn(|x| C64::from_polar(1.0, -scale * x))))
}

/// Principal logarithm of a unitary, returned as Θ with U = e^{iΘ}.
#[derive(Clone, Debug)]
pub struct UnitaryLog {
    pub theta: Hermitian,
    /// An eigenvalue sits within 1e−12 of −1, where the branch choice is fragile.
    pub near_branch_cut: bool,
}

/// Θ with U = e^{iΘ} and spectrum in (−π, π]; −1 maps to +π.
pub fn logm_unitary(u: &Unitary) -> Result<UnitaryLog> {
    let e = normal_eig(u.matrix())?;
    let n = u.dim();
    let mut near = false;
    let angles: Vec<f64> = e
        .values
        .iter()
        .map(|&z| {
            if (z + 1.0).norm() < 1e-12 {
                near = true;
            }
            let a = z.arg();
            if a <= -PI {
                a + 2.0 * PI
            } else {
                a
            }
        })
        .collect();
    let v = &e.vectors;
    let theta = Matrix::from_fn(n, |i, j| (0..n).map(|k| v.get(i, k) * angles[k] * v.get(j, k).conj()).sum());
    Ok(UnitaryLog { theta: Hermitian::symmetrized(&theta), near_branch_cut: near })
}

/// Largest singular value.
pub fn operator_norm(a: &Matrix) -> f64 {
    let gram = a.adjoint_matmul(a);
    match jacobi(&gram) {
        Ok(e) => e.values.last().copied().unwrap_or(0.0).max(0.0).sqrt(),
        Err(_) => a.frobenius(),
    }
}

/// Arc length between two points of the unit circle.
pub fn angular_distance(z1: C64, z2: C64) -> Result<f64> {
    if (z1.norm() - 1.0).abs() > 1e-8 || (z2.norm() - 1.0).abs() > 1e-8 {
        return input(format!("angular distance needs unit-modulus inputs, got |z1|={}, |z2|={}", z1.norm(), z2.norm()));
    }
    Ok(2.0 * ((z1 - z2).norm() / 2.0).min(1.0).asin())
}

/// Arc length between two eigenphases.
pub fn phase_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}
