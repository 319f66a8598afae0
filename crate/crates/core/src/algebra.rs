//! Operator algebra of one and two two-level atoms.
//!
//! Level convention: index 0 is the ground level |1>, index 1 the excited
//! level |2>. Two-atom operators act on |gg>, |ge>, |eg>, |ee> with atom 1
//! as the left Kronecker factor.

use std::f64::consts::FRAC_1_SQRT_2;
use std::sync::OnceLock;

use nalgebra::{SMatrix, SymmetricEigen};

use crate::{Error, Op2, Op4, Result, Vec16, C64};

pub const STRUCTURE_TOL: f64 = 1e-12;
pub const PSD_TOL: f64 = 1e-10;

/// Number of permutation-symmetric elements at the front of the pair basis.
pub const SYMMETRIC_COUNT: usize = 10;

/// Index pairs used for the mixed symmetric and antisymmetric elements.
pub const MIXED_PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// `|i><j|` on one atom.
pub fn unit2(i: usize, j: usize) -> Op2 {
    let mut m = Op2::zeros();
    m[(i, j)] = c(1.0);
    m
}

/// Kronecker product of two single-atom operators, `a` acting on atom 1.
pub fn kron(a: &Op2, b: &Op2) -> Op4 {
    Op4::from_fn(|r, col| a[(r / 2, col / 2)] * b[(r % 2, col % 2)])
}

/// Embeds a single-atom operator on the given atom (0 or 1).
pub fn on_atom(op: &Op2, atom: usize) -> Op4 {
    match atom {
        0 => kron(op, &Op2::identity()),
        _ => kron(&Op2::identity(), op),
    }
}

/// Unitary that exchanges the two atoms.
pub fn swap_operator() -> Op4 {
    let mut p = Op4::zeros();
    p[(0, 0)] = c(1.0);
    p[(1, 2)] = c(1.0);
    p[(2, 1)] = c(1.0);
    p[(3, 3)] = c(1.0);
    p
}

/// Hilbert–Schmidt product `Tr(a^† b)`.
pub fn hs_inner<const N: usize>(a: &SMatrix<C64, N, N>, b: &SMatrix<C64, N, N>) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Orthonormal single-atom basis: I/√2, (P22−P11)/√2, (P12+P21)/√2, i(P12−P21)/√2.
pub fn single_atom_basis() -> [Op2; 4] {
    let s = FRAC_1_SQRT_2;
    let i = C64::i();
    [
        Op2::identity() * c(s),
        (unit2(1, 1) - unit2(0, 0)) * c(s),
        (unit2(0, 1) + unit2(1, 0)) * c(s),
        (unit2(0, 1) - unit2(1, 0)) * (i * s),
    ]
}

/// The 16-element orthonormal two-atom operator basis.
///
/// Elements 0..4 are `s_i ⊗ s_i`, 4..10 are `(s_i⊗s_j + s_j⊗s_i)/√2` and
/// 10..16 are `(s_i⊗s_j − s_j⊗s_i)/√2`, with `(i, j)` running over
/// [`MIXED_PAIRS`]. The first ten are invariant under exchange of the atoms,
/// the last six change sign.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorBasis {
    elements: [Op4; 16],
}

impl OperatorBasis {
    pub fn elements(&self) -> &[Op4; 16] {
        &self.elements
    }

    pub fn symmetric_count(&self) -> usize {
        SYMMETRIC_COUNT
    }

    pub fn element(&self, k: usize) -> &Op4 {
        &self.elements[k]
    }

    /// Coordinates `(e_k, op)` of `op` in this basis.
    pub fn expand(&self, op: &Op4) -> Vec16 {
        Vec16::from_fn(|k, _| hs_inner(&self.elements[k], op))
    }

    pub fn reconstruct(&self, coeffs: &Vec16) -> Op4 {
        self.elements
            .iter()
            .zip(coeffs.iter())
            .fold(Op4::zeros(), |acc, (e, &w)| acc + e * w)
    }

    /// Gram matrix of the basis under the Hilbert–Schmidt product.
    pub fn gram(&self) -> crate::Mat16 {
        crate::Mat16::from_fn(|i, j| hs_inner(&self.elements[i], &self.elements[j]))
    }
}

pub fn pair_basis() -> OperatorBasis {
    let s = single_atom_basis();
    let h = c(FRAC_1_SQRT_2);
    let mut elements = [Op4::zeros(); 16];
    for i in 0..4 {
        elements[i] = kron(&s[i], &s[i]);
    }
    for (k, &(i, j)) in MIXED_PAIRS.iter().enumerate() {
        let ij = kron(&s[i], &s[j]);
        let ji = kron(&s[j], &s[i]);
        elements[4 + k] = (ij + ji) * h;
        elements[10 + k] = (ij - ji) * h;
    }
    OperatorBasis { elements }
}

/// Shared instance of [`pair_basis`].
pub fn basis() -> &'static OperatorBasis {
    static BASIS: OnceLock<OperatorBasis> = OnceLock::new();
    BASIS.get_or_init(pair_basis)
}

/// Coordinates of `op` in the pair basis.
pub fn expand(op: &Op4) -> Vec16 {
    basis().expand(op)
}

pub fn reconstruct(coeffs: &Vec16) -> Op4 {
    basis().reconstruct(coeffs)
}

/// State of a single two-level atom: excited population `n` and coherence
/// `c = ρ_12 = <ground|ρ|excited>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TlaState {
    n: f64,
    c: C64,
}

impl TlaState {
    pub fn new(n: f64, c: C64) -> Result<Self> {
        if !(n.is_finite() && c.re.is_finite() && c.im.is_finite()) {
            return Err(Error::InvalidTlaState("non-finite input".into()));
        }
        if !(0.0..=1.0).contains(&n) {
            return Err(Error::InvalidTlaState(format!("population {n} outside [0, 1]")));
        }
        if c.norm_sqr() > n * (1.0 - n) + STRUCTURE_TOL {
            return Err(Error::InvalidTlaState(format!(
                "|c|^2 = {} exceeds n(1-n) = {}",
                c.norm_sqr(),
                n * (1.0 - n)
            )));
        }
        Ok(Self { n, c })
    }

    /// Diagonal state with excited population `n`.
    pub fn population(n: f64) -> Result<Self> {
        Self::new(n, C64::new(0.0, 0.0))
    }

    pub fn ground() -> Self {
        Self { n: 0.0, c: C64::new(0.0, 0.0) }
    }

    pub fn excited() -> Self {
        Self { n: 1.0, c: C64::new(0.0, 0.0) }
    }

    /// Excited population ρ_22.
    pub fn n(&self) -> f64 {
        self.n
    }

    /// Coherence ρ_12.
    pub fn coherence(&self) -> C64 {
        self.c
    }

    pub fn matrix(&self) -> Op2 {
        Op2::new(c(1.0 - self.n), self.c, self.c.conj(), c(self.n))
    }
}

/// Unit-trace positive semidefinite Hermitian two-atom state.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: Op4,
}

impl DensityMatrix {
    /// Validates with the default tolerances (Hermiticity and trace 1e-12,
    /// eigenvalues >= -1e-10).
    pub fn new(matrix: Op4) -> Result<Self> {
        Self::with_tolerance(matrix, STRUCTURE_TOL, PSD_TOL)
    }

    pub fn with_tolerance(matrix: Op4, structure_tol: f64, psd_tol: f64) -> Result<Self> {
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidDensityMatrix("non-finite entry".into()));
        }
        let herm = (matrix - matrix.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if herm > structure_tol {
            return Err(Error::InvalidDensityMatrix(format!("not Hermitian (deviation {herm:.3e})")));
        }
        let tr = matrix.trace();
        if (tr - c(1.0)).norm() > structure_tol {
            return Err(Error::InvalidDensityMatrix(format!("trace {tr} differs from 1")));
        }
        let min_eig = min_eigenvalue(&matrix);
        if min_eig < -psd_tol {
            return Err(Error::InvalidDensityMatrix(format!("negative eigenvalue {min_eig:.3e}")));
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &Op4 {
        &self.matrix
    }

    pub fn into_matrix(self) -> Op4 {
        self.matrix
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue(&self.matrix)
    }

    /// Population of the pure state `psi`.
    pub fn population_of(&self, psi: &nalgebra::Vector4<C64>) -> f64 {
        (psi.adjoint() * self.matrix * psi)[(0, 0)].re
    }
}

/// Smallest eigenvalue of the Hermitian part of `m`.
pub fn min_eigenvalue(m: &Op4) -> f64 {
    let herm = (m + m.adjoint()) * c(0.5);
    SymmetricEigen::new(herm).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

/// `ρ_a ⊗ ρ_b` with atom `a` as the left factor.
pub fn product_state(a: &TlaState, b: &TlaState) -> DensityMatrix {
    // Validated TlaStates always give a valid product; skip the re-check.
    DensityMatrix { matrix: kron(&a.matrix(), &b.matrix()) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn max_abs(m: &Op4) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn single_basis_is_orthonormal() {
        let s = single_atom_basis();
        assert!((s[0] - Op2::identity() * c(FRAC_1_SQRT_2)).norm() < 1e-15);
        for i in 0..4 {
            for j in 0..4 {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((hs_inner(&s[i], &s[j]) - c(expected)).norm() < 1e-15);
            }
        }
        let excited = nalgebra::Vector2::new(c(0.0), c(1.0));
        assert!((s[1] * excited - excited * c(FRAC_1_SQRT_2)).norm() < 1e-15);
    }

    #[test]
    fn hs_inner_examples() {
        let a = Op2::identity() * c(FRAC_1_SQRT_2);
        assert!((hs_inner(&a, &a) - c(1.0)).norm() < 1e-15);
        assert_eq!(hs_inner(&unit2(0, 1), &unit2(1, 0)), c(0.0));
        let x = Op2::new(C64::new(1.0, 2.0), C64::new(-0.5, 0.1), C64::new(0.3, 0.0), C64::new(0.0, -1.0));
        let y = Op2::new(C64::new(0.2, 0.0), C64::new(1.0, 1.0), C64::new(-2.0, 0.5), C64::new(0.7, 0.7));
        assert!((hs_inner(&x, &y) - hs_inner(&y, &x).conj()).norm() < 1e-15);
    }

    #[test]
    fn pair_basis_gram_and_symmetry() {
        let basis = pair_basis();
        assert!((basis.element(0) - Op4::identity() * c(0.5)).norm() < 1e-15);
        let gram = basis.gram();
        assert!((gram - crate::Mat16::identity()).iter().all(|z| z.norm() < STRUCTURE_TOL));
        let p = swap_operator();
        for (k, e) in basis.elements().iter().enumerate() {
            let swapped = p * e * p;
            let sign = if k < SYMMETRIC_COUNT { 1.0 } else { -1.0 };
            assert!(max_abs(&(swapped - e * c(sign))) < STRUCTURE_TOL, "element {k}");
        }
    }

    #[test]
    fn expand_examples() {
        let basis = pair_basis();
        for k in 0..16 {
            let coords = basis.expand(basis.element(k));
            for j in 0..16 {
                let expected = if j == k { 1.0 } else { 0.0 };
                assert!((coords[j] - c(expected)).norm() < 1e-14);
            }
        }
        let id = basis.expand(&Op4::identity());
        assert!((id[0] - c(2.0)).norm() < 1e-14);
        assert!(id.iter().skip(1).all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn expand_is_bijective_on_matrix_units() {
        let basis = pair_basis();
        for r in 0..4 {
            for col in 0..4 {
                let mut m = Op4::zeros();
                m[(r, col)] = c(1.0);
                assert!(max_abs(&(basis.reconstruct(&basis.expand(&m)) - m)) < 1e-14);
            }
        }
    }

    #[test]
    fn product_state_examples() {
        let g = TlaState::ground();
        let e = TlaState::excited();
        let gg = product_state(&g, &g);
        assert_eq!(gg.matrix()[(0, 0)], c(1.0));
        assert!((gg.matrix().trace() - c(1.0)).norm() < 1e-15);
        let eg = product_state(&e, &g);
        let mut expected = Op4::zeros();
        expected[(2, 2)] = c(1.0);
        assert_eq!(*eg.matrix(), expected);
    }

    #[test]
    fn tla_state_rejects_invalid() {
        assert!(TlaState::new(1.2, c(0.0)).is_err());
        assert!(TlaState::new(0.5, C64::new(0.6, 0.0)).is_err());
        assert!(TlaState::new(0.5, C64::new(0.5, 0.0)).is_ok());
        assert!(TlaState::new(f64::NAN, c(0.0)).is_err());
    }

    #[test]
    fn density_matrix_rejects_invalid() {
        assert!(DensityMatrix::new(Op4::identity()).is_err());
        let mut m = Op4::zeros();
        m[(0, 0)] = c(1.5);
        m[(1, 1)] = c(-0.5);
        assert!(DensityMatrix::new(m).is_err());
        let mut m = Op4::identity() * c(0.25);
        m[(0, 1)] = C64::new(0.0, 0.1);
        assert!(DensityMatrix::new(m).is_err());
    }

    fn tla() -> impl Strategy<Value = TlaState> {
        (0.0..=1.0f64, 0.0..=1.0f64, 0.0..std::f64::consts::TAU).prop_map(|(n, r, phase)| {
            let radius = r * (n * (1.0 - n)).sqrt();
            TlaState::new(n, C64::from_polar(radius, phase)).unwrap()
        })
    }

    proptest! {
        #[test]
        fn product_states_are_density_matrices(a in tla(), b in tla()) {
            let rho = product_state(&a, &b);
            prop_assert!(DensityMatrix::new(*rho.matrix()).is_ok());
        }

        #[test]
        fn expand_round_trip(entries in proptest::collection::vec(-5.0..5.0f64, 32)) {
            let m = Op4::from_fn(|r, col| C64::new(entries[2 * (4 * r + col)], entries[2 * (4 * r + col) + 1]));
            let basis = pair_basis();
            prop_assert!(max_abs(&(basis.reconstruct(&basis.expand(&m)) - m)) < 1e-12);
        }
    }
}
