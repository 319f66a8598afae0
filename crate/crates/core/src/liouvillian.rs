//! Collective radiative-decay generator of two atoms sharing the vacuum
//! field, its 16×16 representation over the pair basis, the optional
//! dipole–dipole exchange term and spectral analysis.
//!
//! Time is measured in units of the single-atom decay time, so the default
//! decay rate is `gamma = 1`.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, SQRT_2};

use nalgebra::{DMatrix, SMatrix};

use crate::algebra::{self, on_atom, unit2, SYMMETRIC_COUNT};
use crate::verify::Mismatch;
use crate::{Error, Mat16, Op2, Op4, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum Orientation {
    Parallel,
    Antiparallel,
}

/// Placement of the two dipoles: phase delay `phi = ω_a R / c`, relative
/// orientation of the dipole moments and their angle to the interatomic axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    phi: f64,
    orientation: Orientation,
    theta: f64,
}

impl Geometry {
    /// Dipoles perpendicular to the interatomic axis.
    pub fn new(phi: f64, orientation: Orientation) -> Result<Self> {
        Self::with_theta(phi, orientation, FRAC_PI_2)
    }

    /// Only `theta = π/2` is supported.
    pub fn with_theta(phi: f64, orientation: Orientation, theta: f64) -> Result<Self> {
        if !phi.is_finite() || phi < 0.0 {
            return Err(Error::InvalidGeometry(format!("phase delay {phi} must be finite and >= 0")));
        }
        if (theta - FRAC_PI_2).abs() > 1e-12 {
            return Err(Error::InvalidGeometry(format!(
                "dipole angle {theta} not supported, only π/2"
            )));
        }
        Ok(Self { phi, orientation, theta })
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    fn sign(&self) -> f64 {
        match self.orientation {
            Orientation::Parallel => 1.0,
            Orientation::Antiparallel => -1.0,
        }
    }
}

/// Single-atom decay rate and the relative photon-exchange rate `g`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayRates {
    gamma: f64,
    g: f64,
}

impl DecayRates {
    pub fn new(gamma: f64, g: f64) -> Result<Self> {
        if !gamma.is_finite() || gamma <= 0.0 {
            return Err(Error::InvalidArgument(format!("decay rate {gamma} must be positive")));
        }
        if !g.is_finite() || g.abs() > 1.0 {
            return Err(Error::ExchangeOutOfRange(g.abs()));
        }
        Ok(Self { gamma, g })
    }

    /// `gamma = 1`.
    pub fn unit(g: f64) -> Result<Self> {
        Self::new(1.0, g)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    /// `[[γ, gγ], [gγ, γ]]`.
    pub fn rate_matrix(&self) -> [[f64; 2]; 2] {
        let ex = self.g * self.gamma;
        [[self.gamma, ex], [ex, self.gamma]]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Picture {
    Heisenberg,
    Schrodinger,
}

/// Linear map on two-atom operators, stored as its matrix over the pair
/// basis: `matrix[(i, j)] = (e_i, S e_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    matrix: Mat16,
    picture: Picture,
}

impl Superoperator {
    pub fn from_matrix(matrix: Mat16, picture: Picture) -> Self {
        Self { matrix, picture }
    }

    /// Builds the matrix of an action given on 4×4 operators.
    pub fn from_action(picture: Picture, action: impl Fn(&Op4) -> Op4) -> Self {
        let basis = algebra::basis();
        let mut matrix = Mat16::zeros();
        for j in 0..16 {
            let image = action(basis.element(j));
            matrix.set_column(j, &basis.expand(&image));
        }
        Self { matrix, picture }
    }

    pub fn matrix(&self) -> &Mat16 {
        &self.matrix
    }

    pub fn picture(&self) -> Picture {
        self.picture
    }

    pub fn apply(&self, op: &Op4) -> Op4 {
        let basis = algebra::basis();
        basis.reconstruct(&(self.matrix * basis.expand(op)))
    }

    /// Hilbert–Schmidt adjoint, switching picture.
    pub fn adjoint(&self) -> Self {
        let picture = match self.picture {
            Picture::Heisenberg => Picture::Schrodinger,
            Picture::Schrodinger => Picture::Heisenberg,
        };
        Self { matrix: self.matrix.adjoint(), picture }
    }

    /// Largest coupling between the symmetric and antisymmetric sectors.
    pub fn sector_leakage(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..16 {
            for j in 0..16 {
                if (i < SYMMETRIC_COUNT) != (j < SYMMETRIC_COUNT) {
                    worst = worst.max(self.matrix[(i, j)].norm());
                }
            }
        }
        worst
    }

    pub fn symmetric_block(&self) -> SMatrix<C64, 10, 10> {
        self.matrix.fixed_view::<10, 10>(0, 0).into_owned()
    }

    pub fn antisymmetric_block(&self) -> SMatrix<C64, 6, 6> {
        self.matrix.fixed_view::<6, 6>(10, 10).into_owned()
    }
}

impl std::ops::Add for &Superoperator {
    type Output = Superoperator;

    fn add(self, rhs: &Superoperator) -> Superoperator {
        debug_assert_eq!(self.picture, rhs.picture);
        Superoperator { matrix: self.matrix + rhs.matrix, picture: self.picture }
    }
}

/// Raising operator `|e><g|` on the given atom.
pub fn raising(atom: usize) -> Op4 {
    on_atom(&unit2(1, 0), atom)
}

/// Lowering operator `|g><e|` on the given atom.
pub fn lowering(atom: usize) -> Op4 {
    on_atom(&unit2(0, 1), atom)
}

/// Flip-flop operator `σ⁺₁σ⁻₂ + σ⁻₁σ⁺₂`.
pub fn exchange_hamiltonian() -> Op4 {
    raising(0) * lowering(1) + lowering(0) * raising(1)
}

/// Relative exchange rate for dipoles perpendicular to the axis.
pub fn exchange_factor(geom: &Geometry) -> f64 {
    let phi = geom.phi;
    let g = if phi < 0.5 {
        // (3/4) Σ (−φ²)^k / (2k)! · (1/(2k+1) + 1/(2k+3)), truncated below 1e-16
        let mut term = 1.0;
        let mut sum = 0.0;
        for k in 0..8 {
            let m = 2.0 * k as f64;
            sum += term * (1.0 / (m + 1.0) + 1.0 / (m + 3.0));
            term *= -phi * phi / ((m + 1.0) * (m + 2.0));
        }
        0.75 * sum
    } else {
        let (s, c) = phi.sin_cos();
        1.5 * (phi * c - s + phi * phi * s) / (phi * phi * phi)
    };
    geom.sign() * g
}

/// Quadrature estimate of the exchange factor; see
/// [`crate::oracle::sphere_exchange_factor`].
pub fn exchange_factor_integral(geom: &Geometry) -> Result<f64> {
    crate::oracle::sphere_exchange_factor(geom)
}

/// Heisenberg-picture decay generator
/// `X ↦ Σ_km γ_km (σ⁺_k X σ⁻_m − ½{σ⁺_k σ⁻_m, X})`.
pub fn decay_action(rates: &DecayRates, x: &Op4) -> Op4 {
    let gam = rates.rate_matrix();
    let mut out = Op4::zeros();
    for (k, row) in gam.iter().enumerate() {
        for (m, &rate) in row.iter().enumerate() {
            if rate == 0.0 {
                continue;
            }
            let up = raising(k);
            let down = lowering(m);
            let jump = up * down;
            out += (up * x * down - (jump * x + x * jump) * C64::new(0.5, 0.0)) * C64::new(rate, 0.0);
        }
    }
    out
}

pub fn collective_decay_generator(rates: &DecayRates) -> Superoperator {
    Superoperator::from_action(Picture::Heisenberg, |x| decay_action(rates, x))
}

/// `X ↦ i g_C [H_x, X]`, with `H_x` the flip-flop operator.
pub fn coherent_exchange(g_c: f64) -> Superoperator {
    let h = exchange_hamiltonian() * C64::new(g_c, 0.0);
    Superoperator::from_action(Picture::Heisenberg, |x| (h * x - x * h) * C64::i())
}

/// Adds the Heisenberg dipole–dipole term `+i[H_C, ·]`, `H_C = g_C(σ⁺₁σ⁻₂ + σ⁻₁σ⁺₂)`.
pub fn add_coherent_exchange(s: &Superoperator, g_c: f64) -> Result<Superoperator> {
    if s.picture != Picture::Heisenberg {
        return Err(Error::WrongPicture { expected: Picture::Heisenberg });
    }
    if g_c == 0.0 {
        return Ok(s.clone());
    }
    Ok(s + &coherent_exchange(g_c))
}

/// Eigenvalues of the coefficient matrix sorted by real part, descending.
///
/// The matrix is first split into the connected components of its sparsity
/// pattern, so coupled sub-blocks are diagonalized separately.
pub fn spectrum(s: &Superoperator) -> Result<Vec<C64>> {
    let m = s.matrix();
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    let mut eigs = Vec::with_capacity(16);
    for comp in sparsity_components(m, 1e-14 * scale) {
        let sub = DMatrix::from_fn(comp.len(), comp.len(), |i, j| m[(comp[i], comp[j])]);
        eigs.extend(block_eigenvalues(sub)?);
    }
    eigs.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
    Ok(eigs)
}

fn sparsity_components(m: &Mat16, tol: f64) -> Vec<Vec<usize>> {
    let mut label: [Option<usize>; 16] = [None; 16];
    let mut comps = Vec::new();
    for start in 0..16 {
        if label[start].is_some() {
            continue;
        }
        let id = comps.len();
        let mut members = vec![start];
        label[start] = Some(id);
        let mut head = 0;
        while head < members.len() {
            let i = members[head];
            head += 1;
            for j in 0..16 {
                if label[j].is_none() && (m[(i, j)].norm() > tol || m[(j, i)].norm() > tol) {
                    label[j] = Some(id);
                    members.push(j);
                }
            }
        }
        members.sort_unstable();
        comps.push(members);
    }
    comps
}

fn block_eigenvalues(sub: DMatrix<C64>) -> Result<Vec<C64>> {
    match sub.nrows() {
        1 => Ok(vec![sub[(0, 0)]]),
        2 => {
            let (a, b, c, d) = (sub[(0, 0)], sub[(0, 1)], sub[(1, 0)], sub[(1, 1)]);
            let half_tr = (a + d) * 0.5;
            let disc = ((a - d) * 0.5 * ((a - d) * 0.5) + b * c).sqrt();
            Ok(vec![half_tr + disc, half_tr - disc])
        }
        _ => {
            let schur = nalgebra::Schur::try_new(sub, 1e-15, 10_000)
                .ok_or_else(|| Error::Eigensolver("Schur iteration did not converge".into()))?;
            let t = schur.unpack().1;
            Ok((0..t.nrows()).map(|i| t[(i, i)]).collect())
        }
    }
}

/// Right kernel dimension of the coefficient matrix at a singular-value
/// threshold relative to the largest singular value.
pub fn kernel_dimension(m: &Mat16, rel_tol: f64) -> usize {
    let sv = m.singular_values();
    let top = sv.max();
    sv.iter().filter(|&&s| s <= rel_tol * top).count()
}

/// The relaxation blocks as given in the reference tables, in units of γ.
#[derive(Debug, Clone, PartialEq)]
pub struct GoldenBlocks {
    pub ss1: SMatrix<f64, 5, 5>,
    pub ss2: SMatrix<f64, 5, 5>,
    pub aa: SMatrix<f64, 6, 6>,
}

pub fn golden_blocks(g: f64) -> GoldenBlocks {
    let r = SQRT_2;
    let h = FRAC_1_SQRT_2;
    #[rustfmt::skip]
    let ss1 = SMatrix::<f64, 5, 5>::from_row_slice(&[
        0.0,  0.0,    0.0,    0.0,   -r,
        0.0, -2.0,    g,      g,      0.0,
        0.0,  g,     -1.0,    0.0,   -g * h,
        0.0,  g,      0.0,   -1.0,   -g * h,
        0.0, -r,      g * h,  g * h, -1.0,
    ]);
    #[rustfmt::skip]
    let ss2 = SMatrix::<f64, 5, 5>::from_row_slice(&[
        -0.5,     0.0,     -1.0 - g / 2.0, 0.0,            0.0,
         0.0,    -0.5,      0.0,          -1.0 - g / 2.0,  0.0,
         g / 2.0, 0.0,     -1.5 - g,       0.0,            0.0,
         0.0,     g / 2.0,  0.0,          -1.5 - g,        0.0,
         0.0,     0.0,      0.0,           0.0,           -1.0,
    ]);
    #[rustfmt::skip]
    let aa = SMatrix::<f64, 6, 6>::from_row_slice(&[
        -1.0,  0.0,      0.0,      0.0,            0.0,            0.0,
         0.0, -0.5,      0.0,     -1.0 + g / 2.0,  0.0,            0.0,
         0.0,  0.0,     -0.5,      0.0,           -1.0 + g / 2.0,  0.0,
         0.0, -g / 2.0,  0.0,     -1.5 + g,        0.0,            0.0,
         0.0,  0.0,     -g / 2.0,  0.0,           -1.5 + g,        0.0,
         0.0,  0.0,      0.0,      0.0,            0.0,           -1.0,
    ]);
    GoldenBlocks { ss1, ss2, aa }
}

impl GoldenBlocks {
    /// Assembles the blocks into a full 16×16 matrix in the reference ordering.
    pub fn assemble(&self) -> SMatrix<f64, 16, 16> {
        let mut m = SMatrix::<f64, 16, 16>::zeros();
        m.fixed_view_mut::<5, 5>(0, 0).copy_from(&self.ss1);
        m.fixed_view_mut::<5, 5>(5, 5).copy_from(&self.ss2);
        m.fixed_view_mut::<6, 6>(10, 10).copy_from(&self.aa);
        m
    }
}

/// Correspondence between the reference basis ordering and ours: reference
/// element `k` equals `sign[k] * scale[k]` times our element `perm[k]`.
///
/// With the symmetrized mixed elements and unit-norm `s_i ⊗ s_i` the
/// reference tables need no reordering or rescaling, so this is the identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanonicalMap {
    pub perm: [usize; 16],
    pub factor: [f64; 16],
}

pub const CANONICAL_MAP: CanonicalMap = CanonicalMap {
    perm: [0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15],
    factor: [1.0; 16],
};

impl CanonicalMap {
    /// Re-expresses one of our coefficient matrices in the reference basis.
    pub fn to_reference(&self, m: &Mat16) -> Mat16 {
        Mat16::from_fn(|i, j| {
            m[(self.perm[i], self.perm[j])] * (self.factor[j] / self.factor[i])
        })
    }
}

/// Entrywise comparison of a generator against the reference blocks at the
/// given `g`. Returns every entry that differs by more than `tol`.
pub fn golden_mismatches(gen: &Superoperator, rates: &DecayRates, tol: f64) -> Vec<Mismatch> {
    let reference = golden_blocks(rates.g()).assemble() * rates.gamma();
    let ours = CANONICAL_MAP.to_reference(gen.matrix());
    let mut out = Vec::new();
    for i in 0..16 {
        for j in 0..16 {
            let want = C64::new(reference[(i, j)], 0.0);
            let got = ours[(i, j)];
            if (want - got).norm() > tol {
                let block = match (i, j) {
                    (0..=4, 0..=4) => "L_SS1",
                    (5..=9, 5..=9) => "L_SS2",
                    (10..=15, 10..=15) => "L_AA",
                    _ => "off-block",
                };
                out.push(Mismatch {
                    source: format!("relaxation matrix {block} (g = {})", rates.g()),
                    row: i + 1,
                    col: j + 1,
                    expected: want,
                    actual: got,
                });
            }
        }
    }
    out
}

/// Single-atom operator helper for tests and bindings.
pub fn single_atom_lowering() -> Op2 {
    unit2(0, 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::TlaState;

    fn max_abs(m: &Op4) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn parallel(phi: f64) -> Geometry {
        Geometry::new(phi, Orientation::Parallel).unwrap()
    }

    #[test]
    fn exchange_factor_values() {
        assert!((exchange_factor(&parallel(0.0)) - 1.0).abs() < 1e-15);
        assert!((exchange_factor(&parallel(1e-6)) - 1.0).abs() < 1e-12);
        // 1.5 (0.1 cos 0.1 − sin 0.1 + 0.01 sin 0.1) / 0.001
        assert!((exchange_factor(&parallel(0.1)) - 0.998_001_071_164_071_4).abs() < 1e-12);
        let pi = std::f64::consts::PI;
        assert!((exchange_factor(&parallel(pi)) + 3.0 / (2.0 * pi * pi)).abs() < 1e-12);
        let anti = Geometry::new(0.1, Orientation::Antiparallel).unwrap();
        assert_eq!(exchange_factor(&anti), -exchange_factor(&parallel(0.1)));
    }

    #[test]
    fn series_branch_is_continuous() {
        let below = exchange_factor(&parallel(0.5 - 1e-12));
        let above = exchange_factor(&parallel(0.5));
        assert!((below - above).abs() < 1e-9);
    }

    #[test]
    fn small_phi_series_bound() {
        for i in 1..=300 {
            let phi = i as f64 * 1e-3;
            let g = exchange_factor(&parallel(phi));
            assert!((g - (1.0 - phi * phi / 5.0)).abs() <= phi.powi(4), "phi = {phi}");
        }
    }

    #[test]
    fn geometry_rejects_other_angles() {
        assert!(Geometry::with_theta(1.0, Orientation::Parallel, 0.3).is_err());
        assert!(Geometry::new(-1.0, Orientation::Parallel).is_err());
    }

    #[test]
    fn rates_reject_large_g() {
        assert!(matches!(DecayRates::unit(1.01), Err(Error::ExchangeOutOfRange(_))));
        assert!(DecayRates::unit(-1.0).is_ok());
    }

    #[test]
    fn generator_annihilates_identity() {
        for g in [-1.0, -0.5, 0.0, 0.3, 1.0] {
            let rates = DecayRates::unit(g).unwrap();
            assert!(max_abs(&decay_action(&rates, &Op4::identity())) < 1e-15);
            let gen = collective_decay_generator(&rates);
            let full = add_coherent_exchange(&gen, 2.5).unwrap();
            assert!(max_abs(&full.apply(&Op4::identity())) < 1e-14);
        }
    }

    #[test]
    fn single_atom_population_decays() {
        let rates = DecayRates::unit(0.0).unwrap();
        let number = raising(0) * lowering(0);
        let out = collective_decay_generator(&rates).apply(&number);
        assert!(max_abs(&(out + number)) < 1e-14);
    }

    #[test]
    fn generator_is_block_diagonal() {
        for g in [0.0, 0.5, -0.5, 1.0, -1.0] {
            let gen = collective_decay_generator(&DecayRates::unit(g).unwrap());
            assert!(gen.sector_leakage() < 1e-12);
        }
    }

    #[test]
    fn golden_entries() {
        let b = golden_blocks(0.4);
        assert_eq!(b.aa[(0, 0)], -1.0);
        assert_eq!(b.ss1[(0, 4)], -SQRT_2);
        assert_eq!(b.ss2[(2, 0)], 0.2);
    }

    #[test]
    fn generator_matches_reference_blocks() {
        for g in [0.0, 0.5, -0.5, 1.0, -1.0, 0.37] {
            let rates = DecayRates::unit(g).unwrap();
            let gen = collective_decay_generator(&rates);
            assert!(golden_mismatches(&gen, &rates, 1e-12).is_empty(), "g = {g}");
        }
        let rates = DecayRates::new(2.0, 0.5).unwrap();
        assert!(golden_mismatches(&collective_decay_generator(&rates), &rates, 1e-12).is_empty());
    }

    #[test]
    fn coherent_term_properties() {
        let gen = collective_decay_generator(&DecayRates::unit(1.0).unwrap());
        assert_eq!(add_coherent_exchange(&gen, 0.0).unwrap(), gen);
        let coh = coherent_exchange(0.7);
        assert!(max_abs(&coh.apply(&Op4::identity())) < 1e-15);
        for z in spectrum(&coh).unwrap() {
            assert!(z.re.abs() < 1e-12);
        }
        let schr = gen.adjoint();
        assert!(matches!(add_coherent_exchange(&schr, 1.0), Err(Error::WrongPicture { .. })));
    }

    #[test]
    fn spectrum_structure() {
        for g in [0.0, 0.25, 0.5, 0.75, 0.9] {
            let eigs = spectrum(&collective_decay_generator(&DecayRates::unit(g).unwrap())).unwrap();
            assert_eq!(eigs.len(), 16);
            let has = |target: f64| eigs.iter().filter(|z| (*z - C64::new(target, 0.0)).norm() < 1e-9).count();
            assert!(has(-(1.0 - g)) >= 1, "g = {g}: {eigs:?}");
            assert!(has((g - 1.0) / 2.0) >= 2, "g = {g}");
            assert!(eigs.iter().all(|z| z.re <= 1e-12));
            assert!(eigs.windows(2).all(|w| w[0].re >= w[1].re));
        }
        let eigs = spectrum(&collective_decay_generator(&DecayRates::unit(1.0).unwrap())).unwrap();
        assert!(eigs.iter().filter(|z| z.norm() < 1e-10).count() >= 2);
    }

    #[test]
    fn kernel_dimensions_at_unit_exchange() {
        let gen = collective_decay_generator(&DecayRates::unit(1.0).unwrap());
        // ψ0ψ0†, ψaψa† and the two ψ0–ψa coherences.
        assert_eq!(kernel_dimension(gen.matrix(), 1e-10), 4);
        let sym = gen.symmetric_block();
        assert_eq!(sym.singular_values().iter().filter(|&&s| s < 1e-10).count(), 2);
        let half = collective_decay_generator(&DecayRates::unit(0.5).unwrap());
        assert_eq!(kernel_dimension(half.matrix(), 1e-10), 1);
    }

    #[test]
    fn hermiticity_preserved() {
        let gen = collective_decay_generator(&DecayRates::unit(0.8).unwrap());
        let gen = add_coherent_exchange(&gen, 0.3).unwrap();
        let a = TlaState::new(0.3, C64::new(0.2, -0.1)).unwrap();
        let x = Op4::from_fn(|r, c| C64::new((r * 3 + c) as f64 * 0.1, (r as f64 - c as f64) * 0.7))
            + crate::algebra::product_state(&a, &a).into_matrix();
        let lhs = gen.apply(&x.adjoint());
        let rhs = gen.apply(&x).adjoint();
        assert!(max_abs(&(lhs - rhs)) < 1e-13);
    }

    #[test]
    fn canonical_map_is_identity() {
        let m = Mat16::from_fn(|i, j| C64::new((i * 16 + j) as f64, 0.0));
        assert_eq!(CANONICAL_MAP.to_reference(&m), m);
    }
}
