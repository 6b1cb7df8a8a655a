use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// The labelling parameters a = ã + iâ and b = b̃ + ib̂ of a local,
/// separable transformation.
///
/// [`KMatrix::matrix`] arranges them as the linear action on the polar
/// exponents, (ln R, S) ↦ (ã ln R + b̃ S, â ln R + b̂ S). In that layout
/// a transformation applied after another has the matrix product
/// `second · first`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KMatrix {
    pub a: Complex64,
    pub b: Complex64,
}

impl KMatrix {
    pub fn new(a: Complex64, b: Complex64) -> Self {
        KMatrix { a, b }
    }

    /// a = 1, b = i.
    pub fn identity() -> Self {
        KMatrix::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0))
    }

    pub fn matrix(&self) -> [[f64; 2]; 2] {
        [[self.a.re, self.b.re], [self.a.im, self.b.im]]
    }

    pub fn from_matrix(m: [[f64; 2]; 2]) -> Self {
        KMatrix::new(Complex64::new(m[0][0], m[1][0]), Complex64::new(m[0][1], m[1][1]))
    }

    pub fn det(&self) -> f64 {
        let m = self.matrix();
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    /// Parameters of "self, then `second`".
    pub fn then(&self, second: &KMatrix) -> KMatrix {
        KMatrix::from_matrix(mat_mul(second.matrix(), self.matrix()))
    }
}

pub fn mat_mul(x: [[f64; 2]; 2], y: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    std::array::from_fn(|i| std::array::from_fn(|j| x[i][0] * y[0][j] + x[i][1] * y[1][j]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_layout() {
        assert_eq!(KMatrix::identity().matrix(), [[1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(KMatrix::identity().det(), 1.0);
    }

    #[test]
    fn product_of_example_matrices() {
        let k1 = KMatrix::from_matrix([[1.0, 2.0], [0.0, 1.0]]);
        let k2 = KMatrix::from_matrix([[1.0, 0.0], [0.0, 3.0]]);
        assert_eq!(k1.then(&k2).matrix(), [[1.0, 2.0], [0.0, 3.0]]);
    }

    #[test]
    fn then_agrees_with_exponent_algebra() {
        // a₃ = a₂ã₁ + b₂â₁, b₃ = a₂b̃₁ + b₂b̂₁
        let k1 = KMatrix::new(Complex64::new(0.7, -1.2), Complex64::new(0.3, 2.0));
        let k2 = KMatrix::new(Complex64::new(1.5, 0.4), Complex64::new(-0.2, 1.0));
        let k3 = k1.then(&k2);
        let a3 = k2.a * k1.a.re + k2.b * k1.a.im;
        let b3 = k2.a * k1.b.re + k2.b * k1.b.im;
        assert!((k3.a - a3).norm() < 1e-15);
        assert!((k3.b - b3).norm() < 1e-15);
    }
}
