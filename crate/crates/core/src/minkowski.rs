//! Exact-signature linear algebra for R^{3,1} with the (- + + +) form.
//!
//! The basis convention is fixed so that the worked space-form examples are
//! literal: e0 is the timelike direction, and the Euclidean space form vector
//! is (1, 0, 0, -1)^t.

use num_complex::Complex64;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Default tolerance for "is lightlike" checks.
pub const TOL_NULL: f64 = 1e-10;
/// Default tolerance for Minkowski orthogonality defects.
pub const TOL_ORTHO: f64 = 1e-8;
/// Default tolerance for eigenvector residuals.
pub const TOL_EIG: f64 = 1e-8;

/// A 4-vector of R^{3,1} with (v, v) = -v0^2 + v1^2 + v2^2 + v3^2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vec31(pub [f64; 4]);

impl Vec31 {
    pub const fn new(c0: f64, c1: f64, c2: f64, c3: f64) -> Self {
        Vec31([c0, c1, c2, c3])
    }

    pub const fn zero() -> Self {
        Vec31([0.0; 4])
    }

    /// Standard basis vector e_i.
    pub fn basis(i: usize) -> Self {
        let mut c = [0.0; 4];
        c[i] = 1.0;
        Vec31(c)
    }

    /// The signature (- + + +) inner product.
    pub fn inner(&self, other: &Vec31) -> f64 {
        -self.0[0] * other.0[0]
            + self.0[1] * other.0[1]
            + self.0[2] * other.0[2]
            + self.0[3] * other.0[3]
    }

    /// Euclidean norm, used for scale-aware tolerances.
    pub fn norm_eucl(&self) -> f64 {
        self.0.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Lowered-index vector G v with G = diag(-1, 1, 1, 1).
    pub fn lowered(&self) -> Vec31 {
        Vec31([-self.0[0], self.0[1], self.0[2], self.0[3]])
    }

    /// Scale-aware lightlike test: |(v,v)| <= tol * max(1, |v|^2).
    pub fn is_lightlike(&self, tol: f64) -> bool {
        let n2 = self.norm_eucl().powi(2);
        self.inner(self).abs() <= tol * n2.max(1.0)
    }

    pub fn scale(&self, a: f64) -> Vec31 {
        Vec31([a * self.0[0], a * self.0[1], a * self.0[2], a * self.0[3]])
    }
}

impl Add for Vec31 {
    type Output = Vec31;
    fn add(self, o: Vec31) -> Vec31 {
        Vec31([
            self.0[0] + o.0[0],
            self.0[1] + o.0[1],
            self.0[2] + o.0[2],
            self.0[3] + o.0[3],
        ])
    }
}

impl Sub for Vec31 {
    type Output = Vec31;
    fn sub(self, o: Vec31) -> Vec31 {
        Vec31([
            self.0[0] - o.0[0],
            self.0[1] - o.0[1],
            self.0[2] - o.0[2],
            self.0[3] - o.0[3],
        ])
    }
}

impl Neg for Vec31 {
    type Output = Vec31;
    fn neg(self) -> Vec31 {
        self.scale(-1.0)
    }
}

impl Mul<f64> for Vec31 {
    type Output = Vec31;
    fn mul(self, a: f64) -> Vec31 {
        self.scale(a)
    }
}

/// Dense 4x4 real matrix, row major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat4(pub [[f64; 4]; 4]);

impl Mat4 {
    pub const fn zero() -> Self {
        Mat4([[0.0; 4]; 4])
    }

    pub fn identity() -> Self {
        let mut m = [[0.0; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        Mat4(m)
    }

    pub fn transpose(&self) -> Mat4 {
        let mut t = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                t[j][i] = self.0[i][j];
            }
        }
        Mat4(t)
    }

    pub fn trace(&self) -> f64 {
        (0..4).map(|i| self.0[i][i]).sum()
    }

    pub fn frobenius(&self) -> f64 {
        self.0
            .iter()
            .flat_map(|r| r.iter())
            .map(|x| x * x)
            .sum::<f64>()
            .sqrt()
    }

    pub fn apply(&self, v: &Vec31) -> Vec31 {
        let mut out = [0.0; 4];
        for (i, row) in self.0.iter().enumerate() {
            out[i] = row[0] * v.0[0] + row[1] * v.0[1] + row[2] * v.0[2] + row[3] * v.0[3];
        }
        Vec31(out)
    }

    pub fn matmul(&self, o: &Mat4) -> Mat4 {
        let mut out = [[0.0; 4]; 4];
        for i in 0..4 {
            for k in 0..4 {
                let a = self.0[i][k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..4 {
                    out[i][j] += a * o.0[k][j];
                }
            }
        }
        Mat4(out)
    }

    pub fn add_mat(&self, o: &Mat4) -> Mat4 {
        let mut out = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                out[i][j] = self.0[i][j] + o.0[i][j];
            }
        }
        Mat4(out)
    }

    pub fn sub_mat(&self, o: &Mat4) -> Mat4 {
        let mut out = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                out[i][j] = self.0[i][j] - o.0[i][j];
            }
        }
        Mat4(out)
    }

    pub fn scale(&self, a: f64) -> Mat4 {
        let mut out = self.0;
        for row in out.iter_mut() {
            for x in row.iter_mut() {
                *x *= a;
            }
        }
        Mat4(out)
    }

    /// Integer matrix power by repeated multiplication.
    pub fn pow(&self, mut n: u32) -> Mat4 {
        let mut base = *self;
        let mut acc = Mat4::identity();
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.matmul(&base);
            }
            base = base.matmul(&base);
            n >>= 1;
        }
        acc
    }

    /// Determinant by cofactor expansion on 2x2 minors.
    pub fn det(&self) -> f64 {
        let m = &self.0;
        let s0 = m[0][0] * m[1][1] - m[1][0] * m[0][1];
        let s1 = m[0][0] * m[1][2] - m[1][0] * m[0][2];
        let s2 = m[0][0] * m[1][3] - m[1][0] * m[0][3];
        let s3 = m[0][1] * m[1][2] - m[1][1] * m[0][2];
        let s4 = m[0][1] * m[1][3] - m[1][1] * m[0][3];
        let s5 = m[0][2] * m[1][3] - m[1][2] * m[0][3];

        let c5 = m[2][2] * m[3][3] - m[3][2] * m[2][3];
        let c4 = m[2][1] * m[3][3] - m[3][1] * m[2][3];
        let c3 = m[2][1] * m[3][2] - m[3][1] * m[2][2];
        let c2 = m[2][0] * m[3][3] - m[3][0] * m[2][3];
        let c1 = m[2][0] * m[3][2] - m[3][0] * m[2][2];
        let c0 = m[2][0] * m[3][1] - m[3][0] * m[2][1];

        s0 * c5 - s1 * c4 + s2 * c3 + s3 * c2 - s4 * c1 + s5 * c0
    }

    /// Frobenius norm of A^t G A - G.
    pub fn minkowski_defect(&self) -> f64 {
        let g = metric();
        let d = self.transpose().matmul(&g).matmul(self).sub_mat(&g);
        d.frobenius()
    }

    /// Outer product u v^t.
    pub fn outer(u: &Vec31, v: &Vec31) -> Mat4 {
        let mut out = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                out[i][j] = u.0[i] * v.0[j];
            }
        }
        Mat4(out)
    }
}

/// The Minkowski metric G = diag(-1, 1, 1, 1).
pub fn metric() -> Mat4 {
    Mat4([
        [-1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ])
}

/// A linear operator skew-adjoint for the Minkowski form: G^t m antisymmetric.
#[derive(Debug, Clone, Copy)]
pub struct SkewMap(pub Mat4);

impl SkewMap {
    /// The wedge operator (x ^ y) v = (x, v) y - (y, v) x.
    pub fn wedge(x: &Vec31, y: &Vec31) -> SkewMap {
        // matrix form: y (Gx)^t - x (Gy)^t
        let gx = x.lowered();
        let gy = y.lowered();
        SkewMap(Mat4::outer(y, &gx).sub_mat(&Mat4::outer(x, &gy)))
    }

    pub fn apply(&self, v: &Vec31) -> Vec31 {
        self.0.apply(v)
    }

    pub fn scale(&self, a: f64) -> SkewMap {
        SkewMap(self.0.scale(a))
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.0
    }

    /// Skew-adjointness defect ||G m + m^t G||_F; zero for exact members of o(3,1).
    pub fn defect(&self) -> f64 {
        let g = metric();
        g.matmul(&self.0)
            .add_mat(&self.0.transpose().matmul(&g))
            .frobenius()
    }
}

/// A (numerically) Minkowski-orthogonal matrix with its monitored defect.
#[derive(Debug, Clone, Copy)]
pub struct OrthoMatrix {
    mat: Mat4,
    defect: f64,
}

impl OrthoMatrix {
    /// Wraps a matrix and records delta = ||A^t G A - G||_F. The defect is
    /// monitored, never projected away.
    pub fn new(mat: Mat4) -> OrthoMatrix {
        let defect = mat.minkowski_defect();
        OrthoMatrix { mat, defect }
    }

    pub fn identity() -> OrthoMatrix {
        OrthoMatrix::new(Mat4::identity())
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.mat
    }

    pub fn defect(&self) -> f64 {
        self.defect
    }

    pub fn det(&self) -> f64 {
        self.mat.det()
    }

    pub fn apply(&self, v: &Vec31) -> Vec31 {
        self.mat.apply(v)
    }
}

// ---------------------------------------------------------------------------
// quartic characteristic polynomial eigen-solver
// ---------------------------------------------------------------------------

/// Characteristic polynomial coefficients of a 4x4 matrix by the
/// Faddeev-LeVerrier recursion. Returns [a0, a1, a2, a3] for
/// p(l) = l^4 + a3 l^3 + a2 l^2 + a1 l + a0.
pub fn char_poly(a: &Mat4) -> [f64; 4] {
    let c1 = a.trace();
    let m1 = *a;
    let m2 = a.matmul(&m1.sub_mat(&Mat4::identity().scale(c1)));
    let c2 = m2.trace() / 2.0;
    let m3 = a.matmul(&m2.sub_mat(&Mat4::identity().scale(c2)));
    let c3 = m3.trace() / 3.0;
    let m4 = a.matmul(&m3.sub_mat(&Mat4::identity().scale(c3)));
    let c4 = m4.trace() / 4.0;
    // p(l) = l^4 - c1 l^3 - c2 l^2 - c3 l - c4 with the signs folded in:
    [-c4, -c3, -c2, -c1]
}

fn real_cubic_root(b: f64, c: f64, d: f64) -> f64 {
    // Largest real root of z^3 + b z^2 + c z + d.
    let p = c - b * b / 3.0;
    let q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
    let disc = q * q / 4.0 + p * p * p / 27.0;
    let y = if disc >= 0.0 {
        let s = disc.sqrt();
        let u = -q / 2.0 + s;
        let v = -q / 2.0 - s;
        u.cbrt() + v.cbrt()
    } else {
        // three real roots; take the largest
        let r = (-p / 3.0).sqrt();
        let phi = (-q / (2.0 * r * r * r)).clamp(-1.0, 1.0).acos();
        2.0 * r * (phi / 3.0).cos()
    };
    y - b / 3.0
}

/// Roots of the monic quartic l^4 + a3 l^3 + a2 l^2 + a1 l + a0, via Ferrari's
/// factorisation into quadratics, each root then polished by Newton iteration.
pub fn quartic_roots(a0: f64, a1: f64, a2: f64, a3: f64) -> [Complex64; 4] {
    let shift = a3 / 4.0;
    // depressed quartic y^4 + p y^2 + q y + r, l = y - shift
    let p = a2 - 3.0 * a3 * a3 / 8.0;
    let q = a1 - a3 * a2 / 2.0 + a3 * a3 * a3 / 8.0;
    let r = a0 - a3 * a1 / 4.0 + a3 * a3 * a2 / 16.0 - 3.0 * a3 * a3 * a3 * a3 / 256.0;

    let scale = 1.0_f64.max(p.abs()).max(q.abs()).max(r.abs());
    let mut ys: [Complex64; 4] = [Complex64::new(0.0, 0.0); 4];

    if q.abs() <= 1e-14 * scale {
        // biquadratic
        let disc = Complex64::new(p * p / 4.0 - r, 0.0).sqrt();
        let z1 = Complex64::new(-p / 2.0, 0.0) + disc;
        let z2 = Complex64::new(-p / 2.0, 0.0) - disc;
        let s1 = z1.sqrt();
        let s2 = z2.sqrt();
        ys = [s1, -s1, s2, -s2];
    } else {
        // z = u^2 solves z^3 + 2p z^2 + (p^2 - 4r) z - q^2 = 0; the cubic is
        // negative at 0 and positive at infinity, so a nonnegative real root
        // exists.
        let z = real_cubic_root(2.0 * p, p * p - 4.0 * r, -q * q).max(0.0);
        let u = z.sqrt();
        if u > 1e-300 {
            let s = (p + z - q / u) / 2.0;
            let t = (p + z + q / u) / 2.0;
            // (y^2 + u y + s)(y^2 - u y + t)
            let d1 = Complex64::new(u * u - 4.0 * s, 0.0).sqrt();
            ys[0] = (Complex64::new(-u, 0.0) + d1) / 2.0;
            ys[1] = (Complex64::new(-u, 0.0) - d1) / 2.0;
            let d2 = Complex64::new(u * u - 4.0 * t, 0.0).sqrt();
            ys[2] = (Complex64::new(u, 0.0) + d2) / 2.0;
            ys[3] = (Complex64::new(u, 0.0) - d2) / 2.0;
        } else {
            // fully degenerate depressed quartic: y^4 ~ 0
            ys = [Complex64::new(0.0, 0.0); 4];
        }
    }

    let mut roots = [Complex64::new(0.0, 0.0); 4];
    for (i, y) in ys.iter().enumerate() {
        roots[i] = polish_root(*y - shift, a0, a1, a2, a3);
    }
    roots
}

fn polish_root(mut l: Complex64, a0: f64, a1: f64, a2: f64, a3: f64) -> Complex64 {
    for _ in 0..16 {
        let p = (((l + a3) * l + a2) * l + a1) * l + a0;
        let dp = ((4.0 * l + 3.0 * a3) * l + 2.0 * a2) * l + a1;
        if dp.norm() < 1e-300 {
            break;
        }
        let step = p / dp;
        l -= step;
        if step.norm() <= 1e-16 * l.norm().max(1.0) {
            break;
        }
    }
    l
}

/// Snaps the root list of an orthogonal matrix onto its known structure:
/// real roots have their spurious imaginary parts dropped, complex roots are
/// paired with their conjugates, and near-unit-circle conjugate pairs are
/// normalised to exact unit modulus.
fn snap_ortho_roots(roots: &mut [Complex64; 4], snap_tol: f64) {
    for r in roots.iter_mut() {
        if r.im.abs() <= snap_tol * r.norm().max(1.0) {
            r.im = 0.0;
        }
    }
    // enforce conjugate pairing
    let mut used = [false; 4];
    for i in 0..4 {
        if used[i] || roots[i].im == 0.0 {
            continue;
        }
        let mut best = None;
        let mut best_d = f64::INFINITY;
        for j in 0..4 {
            if j == i || used[j] || roots[j].im == 0.0 {
                continue;
            }
            let d = (roots[j] - roots[i].conj()).norm();
            if d < best_d {
                best_d = d;
                best = Some(j);
            }
        }
        if let Some(j) = best {
            let avg = (roots[i] + roots[j].conj()) / 2.0;
            roots[i] = avg;
            roots[j] = avg.conj();
            used[i] = true;
            used[j] = true;
            // unit-circle snap for the conjugate pair
            let m = roots[i].norm();
            if (m - 1.0).abs() <= snap_tol.sqrt() && m > 0.0 {
                roots[i] /= m;
                roots[j] /= m;
            }
        }
    }
    // reciprocal snap for real pairs away from 1
    for i in 0..4 {
        for j in (i + 1)..4 {
            if roots[i].im == 0.0 && roots[j].im == 0.0 {
                let prod = roots[i].re * roots[j].re;
                if prod > 0.0 && (prod - 1.0).abs() <= snap_tol.sqrt() && (roots[i].re - 1.0).abs() > 1e-6 {
                    let g = prod.sqrt();
                    roots[i].re /= g;
                    roots[j].re /= g;
                }
            }
        }
    }
}

/// Null space of a complex 4x4 matrix by Gaussian elimination with full
/// pivoting. `expected_dim` forces at least that many free variables by
/// treating the smallest pivots as zero.
fn complex_kernel(m: [[Complex64; 4]; 4], expected_dim: usize) -> Vec<[Complex64; 4]> {
    let mut a = m;
    let mut col_perm = [0usize, 1, 2, 3];
    let mut pivots: Vec<(usize, f64)> = Vec::new();

    let mut row = 0;
    for _step in 0..4 {
        // full pivot search in the remaining block
        let mut bi = row;
        let mut bj = row;
        let mut bv = 0.0;
        for i in row..4 {
            for j in row..4 {
                let v = a[i][j].norm();
                if v > bv {
                    bv = v;
                    bi = i;
                    bj = j;
                }
            }
        }
        if bv == 0.0 {
            break;
        }
        a.swap(row, bi);
        for r in a.iter_mut() {
            r.swap(row, bj);
        }
        col_perm.swap(row, bj);
        pivots.push((row, bv));
        for i in (row + 1)..4 {
            let f = a[i][row] / a[row][row];
            for j in row..4 {
                a[i][j] = a[i][j] - f * a[row][j];
            }
            a[i][row] = Complex64::new(0.0, 0.0);
        }
        row += 1;
    }

    // decide numerical rank: drop trailing pivots until at least expected_dim
    // free variables remain, plus any pivot below a relative threshold
    let max_piv = pivots.first().map(|p| p.1).unwrap_or(0.0);
    let thresh = max_piv * 1e-7;
    let mut rank = pivots.len();
    while rank > 0 && (4 - rank < expected_dim || pivots[rank - 1].1 < thresh) {
        if 4 - rank >= expected_dim && pivots[rank - 1].1 >= thresh {
            break;
        }
        rank -= 1;
    }

    let mut basis = Vec::new();
    for free in rank..4 {
        let mut x = [Complex64::new(0.0, 0.0); 4];
        x[free] = Complex64::new(1.0, 0.0);
        for i in (0..rank).rev() {
            let mut s = Complex64::new(0.0, 0.0);
            for j in (i + 1)..4 {
                s += a[i][j] * x[j];
            }
            x[i] = -s / a[i][i];
        }
        // undo the column permutation
        let mut out = [Complex64::new(0.0, 0.0); 4];
        for (k, &orig) in col_perm.iter().enumerate() {
            out[orig] = x[k];
        }
        let n = out.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        for c in out.iter_mut() {
            *c /= n;
        }
        basis.push(out);
    }
    basis
}

/// Real null space of a 4x4 matrix; `tol` is the relative pivot threshold.
pub fn real_kernel(m: &Mat4, tol: f64) -> Vec<Vec31> {
    let mut a = [[Complex64::new(0.0, 0.0); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            a[i][j] = Complex64::new(m.0[i][j], 0.0);
        }
    }
    // reuse the complex elimination with rank decided purely by tol
    let mut c = a;
    let mut col_perm = [0usize, 1, 2, 3];
    let mut pivots: Vec<f64> = Vec::new();
    let mut row = 0;
    for _ in 0..4 {
        let mut bi = row;
        let mut bj = row;
        let mut bv = 0.0;
        for i in row..4 {
            for j in row..4 {
                let v = c[i][j].norm();
                if v > bv {
                    bv = v;
                    bi = i;
                    bj = j;
                }
            }
        }
        let max_piv = pivots.first().copied().unwrap_or(bv);
        if bv <= tol * max_piv.max(1e-300) {
            break;
        }
        c.swap(row, bi);
        for r in c.iter_mut() {
            r.swap(row, bj);
        }
        col_perm.swap(row, bj);
        pivots.push(bv);
        for i in (row + 1)..4 {
            let f = c[i][row] / c[row][row];
            for j in row..4 {
                c[i][j] = c[i][j] - f * c[row][j];
            }
        }
        row += 1;
    }
    let rank = row;
    let mut basis = Vec::new();
    for free in rank..4 {
        let mut x = [Complex64::new(0.0, 0.0); 4];
        x[free] = Complex64::new(1.0, 0.0);
        for i in (0..rank).rev() {
            let mut s = Complex64::new(0.0, 0.0);
            for j in (i + 1)..4 {
                s += c[i][j] * x[j];
            }
            x[i] = -s / c[i][i];
        }
        let mut out = [0.0; 4];
        for (k, &orig) in col_perm.iter().enumerate() {
            out[orig] = x[k].re;
        }
        let v = Vec31(out);
        let n = v.norm_eucl();
        basis.push(v.scale(1.0 / n));
    }
    basis
}

/// Eigenvalue/eigenvector pairs of a (numerically) orthogonal 4x4 matrix.
///
/// The four roots of the characteristic polynomial are found in closed form
/// and Newton-polished; eigenvectors come from null-space extraction with full
/// pivoting, with repeated roots handled as a single cluster.
pub fn eigen4(a: &OrthoMatrix, tol_eig: f64) -> Result<Vec<(Complex64, [Complex64; 4])>> {
    let coeffs = char_poly(a.matrix());
    let mut roots = quartic_roots(coeffs[0], coeffs[1], coeffs[2], coeffs[3]);
    let scale = a.matrix().frobenius();
    snap_ortho_roots(&mut roots, 1e-8);

    // cluster roots so a double eigenvalue yields a two-dimensional kernel
    let cluster_tol = 1e-5 * scale.max(1.0);
    let mut assigned = [false; 4];
    let mut out: Vec<(Complex64, [Complex64; 4])> = Vec::with_capacity(4);
    for i in 0..4 {
        if assigned[i] {
            continue;
        }
        let mut cluster = vec![i];
        for j in (i + 1)..4 {
            if !assigned[j] && (roots[j] - roots[i]).norm() <= cluster_tol {
                cluster.push(j);
            }
        }
        for &k in &cluster {
            assigned[k] = true;
        }
        let lambda = cluster.iter().map(|&k| roots[k]).sum::<Complex64>() / cluster.len() as f64;
        // a cluster of width w only defines its joint eigenspace up to O(w):
        // widen the residual tolerance accordingly
        let width = cluster
            .iter()
            .map(|&k| (roots[k] - lambda).norm())
            .fold(0.0_f64, f64::max);
        let res_tol = (tol_eig.max(16.0 * width)) * scale.max(1.0);

        let mut shifted = [[Complex64::new(0.0, 0.0); 4]; 4];
        for r in 0..4 {
            for cix in 0..4 {
                shifted[r][cix] = Complex64::new(a.matrix().0[r][cix], 0.0);
            }
            shifted[r][r] -= lambda;
        }
        let vecs = complex_kernel(shifted, cluster.len());
        for (slot, &k) in cluster.iter().enumerate() {
            let v = vecs.get(slot).or_else(|| vecs.last()).copied().ok_or(
                Error::IllConditioned { residual: f64::INFINITY },
            )?;
            // residual check ||A v - lambda v||
            let mut res = 0.0;
            for r in 0..4 {
                let mut av = Complex64::new(0.0, 0.0);
                for cix in 0..4 {
                    av += Complex64::new(a.matrix().0[r][cix], 0.0) * v[cix];
                }
                res += (av - lambda * v[r]).norm_sqr();
            }
            let res = res.sqrt();
            if res > res_tol {
                return Err(Error::IllConditioned { residual: res });
            }
            out.push((roots[k], v));
        }
    }
    out.sort_by(|x, y| {
        x.0.re
            .partial_cmp(&y.0.re)
            .unwrap()
            .then(x.0.im.partial_cmp(&y.0.im).unwrap())
    });
    Ok(out)
}

/// The two lightlike directions inside a Lorentzian 2-plane span(u, v),
/// each returned with unit Euclidean length.
pub fn null_directions_in_plane(u: &Vec31, v: &Vec31, tol: f64) -> Result<(Vec31, Vec31)> {
    let guu = u.inner(u);
    let guv = u.inner(v);
    let gvv = v.inner(v);
    // Gram test for near-parallel inputs (Euclidean)
    let eu = u.norm_eucl();
    let ev = v.norm_eucl();
    let dot: f64 = (0..4).map(|i| u.0[i] * v.0[i]).sum();
    if (eu * ev).powi(2) - dot * dot <= tol * (eu * ev).powi(2) {
        return Err(Error::Degenerate);
    }
    let disc = guv * guv - guu * gvv;
    let scale2 = (eu * ev).powi(2);
    if disc <= tol * scale2 {
        return Err(Error::NotLorentzian { disc });
    }
    let sq = disc.sqrt();
    // solve a^2 guu + 2ab guv + b^2 gvv = 0
    let (w1, w2) = if guu.abs() >= gvv.abs() {
        if guu.abs() <= tol * scale2.sqrt() {
            // both coefficients tiny: u, v already nearly lightlike
            (*u, *v)
        } else {
            let r1 = (-guv + sq) / guu;
            let r2 = (-guv - sq) / guu;
            (u.scale(r1) + *v, u.scale(r2) + *v)
        }
    } else if gvv.abs() <= tol * scale2.sqrt() {
        (*u, *v)
    } else {
        let r1 = (-guv + sq) / gvv;
        let r2 = (-guv - sq) / gvv;
        (*u + v.scale(r1), *u + v.scale(r2))
    };
    let n1 = w1.norm_eucl();
    let n2 = w2.norm_eucl();
    if n1 == 0.0 || n2 == 0.0 {
        return Err(Error::Degenerate);
    }
    Ok((w1.scale(1.0 / n1), w2.scale(1.0 / n2)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q_check() -> Vec31 {
        Vec31::new(1.0, 0.0, 0.0, -1.0)
    }

    fn o_vec() -> Vec31 {
        Vec31::new(0.5, 0.0, 0.0, 0.5)
    }

    fn rotation(theta: f64) -> Mat4 {
        let (s, c) = theta.sin_cos();
        Mat4([
            [1.0, 0.0, 0.0, 0.0],
            [0.0, c, -s, 0.0],
            [0.0, s, c, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ])
    }

    fn boost(phi: f64) -> Mat4 {
        let (s, c) = (phi.sinh(), phi.cosh());
        Mat4([
            [c, 0.0, 0.0, s],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [s, 0.0, 0.0, c],
        ])
    }

    #[test]
    fn inner_examples() {
        assert_eq!(q_check().inner(&o_vec()), -1.0);
        let e1 = Vec31::basis(1);
        assert_eq!(e1.inner(&e1), 1.0);
        assert_eq!(q_check().inner(&q_check()), 0.0);
    }

    #[test]
    fn wedge_defining_identity() {
        let e1 = Vec31::basis(1);
        let e2 = Vec31::basis(2);
        let w = SkewMap::wedge(&e1, &e2);
        let r = w.apply(&e1);
        assert!((r - e2).norm_eucl() < 1e-15);
        let z = SkewMap::wedge(&e1, &e1);
        assert!(z.matrix().frobenius() < 1e-15);
    }

    #[test]
    fn wedge_nilpotent_on_lightlike() {
        // random lightlike X with X' orthogonal to X: (X ^ X')^3 = 0
        let x = Vec31::new(1.3, 0.3, 0.7, (1.3f64 * 1.3 - 0.3 * 0.3 - 0.7 * 0.7).sqrt());
        assert!(x.inner(&x).abs() < 1e-12);
        // any vector orthogonal to x: project e1
        let e1 = Vec31::basis(1);
        // xp = e1 - ((e1,x)/(x,q)) q with q chosen so (x,q) != 0
        let q = o_vec();
        let xp = e1 - q.scale(e1.inner(&x) / x.inner(&q));
        assert!(xp.inner(&x).abs() < 1e-12);
        let n = SkewMap::wedge(&x, &xp);
        let n2 = n.matrix().matmul(n.matrix());
        let n3 = n2.matmul(n.matrix());
        // N^2 v = -(X',X')(X,v) X, so N^2 has rank 1 and N^3 = 0
        assert!(n3.frobenius() < 1e-12 * n.matrix().frobenius().max(1.0));
        let v = Vec31::new(0.2, -1.0, 0.4, 0.9);
        let lhs = Mat4::apply(&n2, &v);
        let rhs = x.scale(-xp.inner(&xp) * x.inner(&v));
        assert!((lhs - rhs).norm_eucl() < 1e-10);
    }

    #[test]
    fn eigen_identity() {
        let a = OrthoMatrix::identity();
        let eig = eigen4(&a, TOL_EIG).unwrap();
        for (l, _) in eig {
            assert!((l - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn eigen_rotation_block() {
        let theta = 0.83;
        let a = OrthoMatrix::new(rotation(theta));
        let eig = eigen4(&a, TOL_EIG).unwrap();
        let mut ones = 0;
        let mut pair = 0;
        for (l, v) in &eig {
            if (l - Complex64::new(1.0, 0.0)).norm() < 1e-9 {
                ones += 1;
            } else {
                assert!((l.norm() - 1.0).abs() < 1e-10);
                assert!((l.arg().abs() - theta).abs() < 1e-10);
                pair += 1;
            }
            // residual sanity
            let mut res = 0.0;
            for r in 0..4 {
                let mut av = Complex64::new(0.0, 0.0);
                for c in 0..4 {
                    av += Complex64::new(a.matrix().0[r][c], 0.0) * v[c];
                }
                res += (av - l * v[r]).norm_sqr();
            }
            assert!(res.sqrt() < 1e-9);
        }
        assert_eq!(ones, 2);
        assert_eq!(pair, 2);
    }

    #[test]
    fn eigen_boost_block() {
        let phi = 0.6;
        let a = OrthoMatrix::new(boost(phi));
        let eig = eigen4(&a, TOL_EIG).unwrap();
        let mut expected = vec![1.0, 1.0, phi.exp(), (-phi).exp()];
        for (l, _) in &eig {
            assert!(l.im.abs() < 1e-10);
            let pos = expected
                .iter()
                .position(|e| (e - l.re).abs() < 1e-6)
                .expect("unexpected eigenvalue");
            expected.remove(pos);
        }
        assert!(expected.is_empty());
    }

    #[test]
    fn null_directions_standard_plane() {
        let e0 = Vec31::basis(0);
        let e3 = Vec31::basis(3);
        let (w1, w2) = null_directions_in_plane(&e0, &e3, 1e-12).unwrap();
        for w in [w1, w2] {
            assert!(w.inner(&w).abs() < 1e-12);
            // proportional to e0 +- e3
            assert!(w.0[1].abs() < 1e-14 && w.0[2].abs() < 1e-14);
        }
        let e1 = Vec31::basis(1);
        let (w1, w2) = null_directions_in_plane(&e0, &e1, 1e-12).unwrap();
        assert!(w1.inner(&w1).abs() < 1e-12 && w2.inner(&w2).abs() < 1e-12);
    }

    #[test]
    fn null_directions_rejects_spacelike_plane() {
        let e1 = Vec31::basis(1);
        let e2 = Vec31::basis(2);
        assert!(matches!(
            null_directions_in_plane(&e1, &e2, 1e-12),
            Err(Error::NotLorentzian { .. })
        ));
    }

    #[test]
    fn char_poly_matches_det_and_trace() {
        let a = rotation(0.4).matmul(&boost(0.7));
        let c = char_poly(&a);
        assert!((c[3] + a.trace()).abs() < 1e-12);
        assert!((c[0] - a.det()).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn skew_adjointness_of_wedge(ux in -2.0..2.0f64, uy in -2.0..2.0f64, uz in -2.0..2.0f64, ut in -2.0..2.0f64,
                                     vx in -2.0..2.0f64, vy in -2.0..2.0f64, vz in -2.0..2.0f64, vt in -2.0..2.0f64,
                                     wx in -2.0..2.0f64, wy in -2.0..2.0f64, wz in -2.0..2.0f64, wt in -2.0..2.0f64) {
            let u = Vec31::new(ut, ux, uy, uz);
            let v = Vec31::new(vt, vx, vy, vz);
            let w = Vec31::new(wt, wx, wy, wz);
            let m = SkewMap::wedge(&u, &v);
            prop_assert!(m.apply(&w).inner(&w).abs() < 1e-10);
            prop_assert!(m.defect() < 1e-12);
        }

        #[test]
        fn eigen_structure_of_random_ortho(theta in -3.0..3.0f64, phi in -1.5..1.5f64, psi in -3.0..3.0f64) {
            let a = rotation(theta).matmul(&boost(phi)).matmul(&rotation(psi));
            let o = OrthoMatrix::new(a);
            let eig = eigen4(&o, 1e-6).unwrap();
            let prod: Complex64 = eig.iter().map(|(l, _)| l).product();
            let sum: Complex64 = eig.iter().map(|(l, _)| l).sum();
            prop_assert!((prod.re - a.det()).abs() < 1e-8);
            prop_assert!(prod.im.abs() < 1e-8);
            prop_assert!((sum.re - a.trace()).abs() < 1e-8);
            // eigenvalues occur in reciprocal and conjugate pairs
            for (l, _) in &eig {
                let has_recip = eig.iter().any(|(m, _)| (l * m - 1.0).norm() < 1e-6);
                prop_assert!(has_recip);
            }
        }
    }
}
