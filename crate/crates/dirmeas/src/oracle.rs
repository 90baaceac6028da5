//! Brute-force reference implementation used to validate the closed forms.
//!
//! Everything here works on the full `2d`-dimensional system⊗pointer Hilbert
//! space with dense matrix arithmetic and explicit bra contractions. It shares
//! no code with [`crate::protocol`], which makes it a meaningful independent
//! check: the test suite requires both routes to agree to `1e-12`.

use num_complex::Complex64;

use crate::state::WaveFunction;

/// Joint-space index of `|x⟩ ⊗ |p⟩` with pointer bit `p ∈ {0, 1}`.
fn idx(x: usize, p: usize) -> usize {
    2 * x + p
}

/// Dense `2d × 2d` coupling unitary: the identity everywhere except the
/// pointer block at position `x`, where `|0⟩ ↦ cosθ|0⟩ + sinθ|1⟩` and
/// `|1⟩ ↦ −sinθ|0⟩ + cosθ|1⟩`.
pub fn coupling_matrix(dim: usize, x: usize, theta: f64) -> Vec<Vec<Complex64>> {
    let n = 2 * dim;
    let zero = Complex64::new(0.0, 0.0);
    let mut m = vec![vec![zero; n]; n];
    for xp in 0..dim {
        if xp == x {
            m[idx(xp, 0)][idx(xp, 0)] = Complex64::new(theta.cos(), 0.0);
            m[idx(xp, 1)][idx(xp, 0)] = Complex64::new(theta.sin(), 0.0);
            m[idx(xp, 0)][idx(xp, 1)] = Complex64::new(-theta.sin(), 0.0);
            m[idx(xp, 1)][idx(xp, 1)] = Complex64::new(theta.cos(), 0.0);
        } else {
            m[idx(xp, 0)][idx(xp, 0)] = Complex64::new(1.0, 0.0);
            m[idx(xp, 1)][idx(xp, 1)] = Complex64::new(1.0, 0.0);
        }
    }
    m
}

/// Full-space construction of the unnormalized post-selected pointer state:
/// prepare `ψ ⊗ |0⟩`, apply [`coupling_matrix`] by dense matrix–vector
/// multiplication, then contract with `⟨uniform| ⊗ I`.
pub fn postselected_pointer(psi: &WaveFunction, x: usize, theta: f64) -> (Complex64, Complex64) {
    let d = psi.dim();
    let n = 2 * d;
    let zero = Complex64::new(0.0, 0.0);

    let mut joint = vec![zero; n];
    for xp in 0..d {
        joint[idx(xp, 0)] = psi.amplitude(xp);
    }

    let u = coupling_matrix(d, x, theta);
    let mut coupled = vec![zero; n];
    for (row, out) in coupled.iter_mut().enumerate() {
        for (col, amp) in joint.iter().enumerate() {
            *out += u[row][col] * amp;
        }
    }

    let inv_sqrt_d = (d as f64).sqrt().recip();
    let mut a = zero;
    let mut b = zero;
    for xp in 0..d {
        a += coupled[idx(xp, 0)] * inv_sqrt_d;
        b += coupled[idx(xp, 1)] * inv_sqrt_d;
    }
    (a, b)
}

/// Outcome probability of projecting the (unnormalized) pointer `(a, b)` onto
/// the single-qubit state `bra = (v0, v1)`: `|v0* a + v1* b|²`.
pub fn projection_probability(a: Complex64, b: Complex64, bra: (Complex64, Complex64)) -> f64 {
    (bra.0.conj() * a + bra.1.conj() * b).norm_sqr()
}

/// The six joint outcome probabilities of the pointer at position `x`,
/// computed by explicit projections in the order
/// `[plus, minus, zero, one, left, right]`.
pub fn joint_probabilities(psi: &WaveFunction, x: usize, theta: f64) -> [f64; 6] {
    let (a, b) = postselected_pointer(psi, x, theta);
    let inv_sqrt2 = 0.5f64.sqrt();
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let plus = (one * inv_sqrt2, one * inv_sqrt2);
    let minus = (one * inv_sqrt2, -one * inv_sqrt2);
    let ket0 = (one, Complex64::new(0.0, 0.0));
    let ket1 = (Complex64::new(0.0, 0.0), one);
    let left = (one * inv_sqrt2, i * inv_sqrt2);
    let right = (one * inv_sqrt2, -i * inv_sqrt2);
    [
        projection_probability(a, b, plus),
        projection_probability(a, b, minus),
        projection_probability(a, b, ket0),
        projection_probability(a, b, ket1),
        projection_probability(a, b, left),
        projection_probability(a, b, right),
    ]
}
