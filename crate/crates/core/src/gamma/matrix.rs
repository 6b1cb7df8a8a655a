//! Dense 4×4 complex matrices and 4-spinors.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub(crate) const I: Complex64 = Complex64::new(0.0, 1.0);

/// A four-component complex spinor value, ψ₀…ψ₃.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Spinor(pub [Complex64; 4]);

impl Spinor {
    pub const ZERO: Spinor = Spinor([ZERO; 4]);

    pub fn new(c: [Complex64; 4]) -> Self {
        Spinor(c)
    }

    pub fn from_re_im(re: [f64; 4], im: [f64; 4]) -> Self {
        Spinor(std::array::from_fn(|j| Complex64::new(re[j], im[j])))
    }

    /// Positional density ψ†ψ.
    pub fn density(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Euclidean norm √(ψ†ψ).
    pub fn norm(&self) -> f64 {
        self.density().sqrt()
    }

    /// Hermitian inner product ⟨self, other⟩ = self† other.
    pub fn dot(&self, other: &Spinor) -> Complex64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn scale(&self, s: Complex64) -> Spinor {
        Spinor(self.0.map(|c| c * s))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Flattens to eight reals (re₀, im₀, …, re₃, im₃).
    pub fn to_reals(&self) -> [f64; 8] {
        let mut out = [0.0; 8];
        for (j, c) in self.0.iter().enumerate() {
            out[2 * j] = c.re;
            out[2 * j + 1] = c.im;
        }
        out
    }

    pub fn from_reals(v: &[f64; 8]) -> Spinor {
        Spinor(std::array::from_fn(|j| Complex64::new(v[2 * j], v[2 * j + 1])))
    }
}

impl Index<usize> for Spinor {
    type Output = Complex64;
    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for Spinor {
    fn index_mut(&mut self, i: usize) -> &mut Complex64 {
        &mut self.0[i]
    }
}

impl Add for Spinor {
    type Output = Spinor;
    fn add(self, rhs: Spinor) -> Spinor {
        Spinor(std::array::from_fn(|j| self.0[j] + rhs.0[j]))
    }
}

impl AddAssign for Spinor {
    fn add_assign(&mut self, rhs: Spinor) {
        for j in 0..4 {
            self.0[j] += rhs.0[j];
        }
    }
}

impl Sub for Spinor {
    type Output = Spinor;
    fn sub(self, rhs: Spinor) -> Spinor {
        Spinor(std::array::from_fn(|j| self.0[j] - rhs.0[j]))
    }
}

impl Neg for Spinor {
    type Output = Spinor;
    fn neg(self) -> Spinor {
        Spinor(self.0.map(|c| -c))
    }
}

impl Mul<Spinor> for Complex64 {
    type Output = Spinor;
    fn mul(self, rhs: Spinor) -> Spinor {
        rhs.scale(self)
    }
}

impl Mul<Spinor> for f64 {
    type Output = Spinor;
    fn mul(self, rhs: Spinor) -> Spinor {
        Spinor(rhs.0.map(|c| c * self))
    }
}

/// Row-major 4×4 complex matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat4(pub [[Complex64; 4]; 4]);

impl Default for Mat4 {
    fn default() -> Self {
        Mat4::zero()
    }
}

impl Mat4 {
    pub fn zero() -> Self {
        Mat4([[ZERO; 4]; 4])
    }

    pub fn identity() -> Self {
        Mat4::diag([ONE; 4])
    }

    pub fn diag(d: [Complex64; 4]) -> Self {
        let mut m = Mat4::zero();
        for (i, v) in d.into_iter().enumerate() {
            m.0[i][i] = v;
        }
        m
    }

    pub fn from_real(rows: [[f64; 4]; 4]) -> Self {
        Mat4(rows.map(|r| r.map(|v| Complex64::new(v, 0.0))))
    }

    pub fn scale(&self, s: Complex64) -> Mat4 {
        Mat4(self.0.map(|r| r.map(|v| v * s)))
    }

    pub fn adjoint(&self) -> Mat4 {
        Mat4(std::array::from_fn(|i| {
            std::array::from_fn(|j| self.0[j][i].conj())
        }))
    }

    pub fn apply(&self, v: &Spinor) -> Spinor {
        Spinor(std::array::from_fn(|i| {
            (0..4).map(|k| self.0[i][k] * v.0[k]).sum()
        }))
    }

    /// Maximum absolute row sum (the induced ∞-norm).
    pub fn norm_inf(&self) -> f64 {
        self.0
            .iter()
            .map(|r| r.iter().map(|c| c.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Induced 1-norm (maximum absolute column sum).
    pub fn norm_one(&self) -> f64 {
        (0..4)
            .map(|j| (0..4).map(|i| self.0[i][j].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flat_map(|r| r.iter())
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    pub fn anticommutator(&self, other: &Mat4) -> Mat4 {
        *self * *other + *other * *self
    }

    /// Determinant by cofactor expansion along the first row.
    pub fn det(&self) -> Complex64 {
        let m = &self.0;
        let minor = |skip: usize| -> Complex64 {
            let cols: Vec<usize> = (0..4).filter(|&c| c != skip).collect();
            let a = |r: usize, c: usize| m[r][cols[c]];
            a(1, 0) * (a(2, 1) * a(3, 2) - a(2, 2) * a(3, 1))
                - a(1, 1) * (a(2, 0) * a(3, 2) - a(2, 2) * a(3, 0))
                + a(1, 2) * (a(2, 0) * a(3, 1) - a(2, 1) * a(3, 0))
        };
        (0..4)
            .map(|c| {
                let sign = if c % 2 == 0 { 1.0 } else { -1.0 };
                m[0][c] * minor(c) * sign
            })
            .sum()
    }

    /// Solves `self · X = rhs` by Gaussian elimination with partial pivoting.
    /// Returns `None` when a pivot vanishes.
    pub fn solve(&self, rhs: &Mat4) -> Option<Mat4> {
        let mut a = self.0;
        let mut b = rhs.0;
        for col in 0..4 {
            let pivot = (col..4)
                .max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm()))
                .unwrap_or(col);
            if a[pivot][col].norm() == 0.0 {
                return None;
            }
            a.swap(col, pivot);
            b.swap(col, pivot);
            for row in col + 1..4 {
                let f = a[row][col] / a[col][col];
                for k in col..4 {
                    let t = a[col][k];
                    a[row][k] -= f * t;
                }
                for k in 0..4 {
                    let t = b[col][k];
                    b[row][k] -= f * t;
                }
            }
        }
        let mut x = [[ZERO; 4]; 4];
        for k in 0..4 {
            for row in (0..4).rev() {
                let mut acc = b[row][k];
                for c in row + 1..4 {
                    acc -= a[row][c] * x[c][k];
                }
                x[row][k] = acc / a[row][row];
            }
        }
        Some(Mat4(x))
    }

    pub fn inverse(&self) -> Option<Mat4> {
        self.solve(&Mat4::identity())
    }
}

impl Index<(usize, usize)> for Mat4 {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.0[i][j]
    }
}

impl Add for Mat4 {
    type Output = Mat4;
    fn add(self, rhs: Mat4) -> Mat4 {
        Mat4(std::array::from_fn(|i| {
            std::array::from_fn(|j| self.0[i][j] + rhs.0[i][j])
        }))
    }
}

impl Sub for Mat4 {
    type Output = Mat4;
    fn sub(self, rhs: Mat4) -> Mat4 {
        Mat4(std::array::from_fn(|i| {
            std::array::from_fn(|j| self.0[i][j] - rhs.0[i][j])
        }))
    }
}

impl Neg for Mat4 {
    type Output = Mat4;
    fn neg(self) -> Mat4 {
        self.scale(-ONE)
    }
}

impl Mul for Mat4 {
    type Output = Mat4;
    fn mul(self, rhs: Mat4) -> Mat4 {
        Mat4(std::array::from_fn(|i| {
            std::array::from_fn(|j| (0..4).map(|k| self.0[i][k] * rhs.0[k][j]).sum())
        }))
    }
}

impl Mul<Spinor> for Mat4 {
    type Output = Spinor;
    fn mul(self, rhs: Spinor) -> Spinor {
        self.apply(&rhs)
    }
}

impl Mul<Mat4> for Complex64 {
    type Output = Mat4;
    fn mul(self, rhs: Mat4) -> Mat4 {
        rhs.scale(self)
    }
}

impl Mul<Mat4> for f64 {
    type Output = Mat4;
    fn mul(self, rhs: Mat4) -> Mat4 {
        rhs.scale(Complex64::new(self, 0.0))
    }
}

// Padé(13,13) coefficients b₀…b₁₃ for the exponential.
const PADE13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

const THETA13: f64 = 5.371_920_351_148_152;

/// Matrix exponential by scaling and squaring with a degree-13 Padé
/// approximant.
pub fn expm(a: &Mat4) -> Mat4 {
    let norm = a.norm_one();
    let s = if norm > THETA13 {
        (norm / THETA13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let a = a.scale(Complex64::new(0.5f64.powi(s), 0.0));
    let b = |k: usize| Complex64::new(PADE13[k], 0.0);
    let id = Mat4::identity();
    let a2 = a * a;
    let a4 = a2 * a2;
    let a6 = a2 * a4;
    let u_inner = a6 * (a6.scale(b(13)) + a4.scale(b(11)) + a2.scale(b(9)))
        + a6.scale(b(7))
        + a4.scale(b(5))
        + a2.scale(b(3))
        + id.scale(b(1));
    let u = a * u_inner;
    let v = a6 * (a6.scale(b(12)) + a4.scale(b(10)) + a2.scale(b(8)))
        + a6.scale(b(6))
        + a4.scale(b(4))
        + a2.scale(b(2))
        + id.scale(b(0));
    // (V − U)⁻¹(V + U); V − U is well conditioned for ‖A‖ ≤ θ₁₃.
    let mut r = (v - u)
        .solve(&(v + u))
        .expect("Padé denominator is nonsingular for scaled argument");
    for _ in 0..s {
        r = r * r;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    fn taylor_expm(a: &Mat4, terms: usize) -> Mat4 {
        let mut acc = Mat4::identity();
        let mut term = Mat4::identity();
        for k in 1..terms {
            term = (term * *a).scale(Complex64::new(1.0 / k as f64, 0.0));
            acc = acc + term;
        }
        acc
    }

    #[test]
    fn expm_of_zero_is_identity() {
        assert_eq!(expm(&Mat4::zero()), Mat4::identity());
    }

    #[test]
    fn expm_matches_taylor_on_small_matrix() {
        let a = Mat4(std::array::from_fn(|i| {
            std::array::from_fn(|j| Complex64::new(0.1 * (i as f64 - j as f64), 0.05 * (i * j) as f64))
        }));
        let diff = (expm(&a) - taylor_expm(&a, 40)).max_abs();
        assert!(diff < 1e-13, "diff {diff}");
    }

    #[test]
    fn expm_uses_squaring_for_large_norm() {
        // diag entries give an exact oracle
        let d = [
            Complex64::new(3.0, 1.0),
            Complex64::new(-2.0, 4.0),
            Complex64::new(0.5, -6.0),
            Complex64::new(4.0, 0.0),
        ];
        let e = expm(&Mat4::diag(d));
        for k in 0..4 {
            let rel = (e.0[k][k] - d[k].exp()).norm() / d[k].exp().norm();
            assert!(rel < 1e-13, "entry {k}: {rel}");
        }
    }

    #[test]
    fn solve_and_det() {
        let m = Mat4::from_real([
            [2.0, 1.0, 0.0, 0.0],
            [1.0, 3.0, 1.0, 0.0],
            [0.0, 1.0, 4.0, 1.0],
            [0.0, 0.0, 1.0, 5.0],
        ]);
        let inv = m.inverse().unwrap();
        assert!((m * inv - Mat4::identity()).max_abs() < 1e-14);
        // tridiagonal determinant recurrence: 2, 5, 18, 85
        assert!((m.det() - Complex64::new(85.0, 0.0)).norm() < 1e-12);
        assert!(Mat4::zero().inverse().is_none());
    }
}
