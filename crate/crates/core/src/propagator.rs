//! Finite-time propagators, the quasi-stationary channel left behind once
//! every non-dark excitation has decayed, and their action on states.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::{DMatrix, Vector4};

use crate::algebra::{kron, DensityMatrix, TlaState};
use crate::liouvillian::{coherent_exchange, Picture, Superoperator};
use crate::{Error, Mat16, Op4, Result, C64};

/// Singular values below this fraction of the largest count as zero.
pub const KERNEL_REL_TOL: f64 = 1e-10;
/// Agreement required between the three quasi-stationary constructions.
pub const METHOD_AGREEMENT_TOL: f64 = 1e-8;
/// Tolerance used when re-validating a propagated state.
pub const OUTPUT_TOL: f64 = 1e-9;

const RESOLVENT_SHIFTS: [f64; 5] = [1e-3, 1e-4, 1e-5, 1e-6, 1e-7];
const LONG_TIME: f64 = 1e4;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub enum MapLabel {
    FiniteTime(f64),
    QuasiStationary,
}

/// Heisenberg-picture channel together with how it was obtained.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMap {
    superop: Superoperator,
    label: MapLabel,
}

impl ChannelMap {
    /// No relaxation.
    pub fn identity() -> Self {
        Self {
            superop: Superoperator::from_matrix(Mat16::identity(), Picture::Heisenberg),
            label: MapLabel::FiniteTime(0.0),
        }
    }

    pub fn superop(&self) -> &Superoperator {
        &self.superop
    }

    pub fn label(&self) -> MapLabel {
        self.label
    }

    /// Evolves an observable.
    pub fn heisenberg(&self, x: &Op4) -> Op4 {
        self.superop.apply(x)
    }

    /// Evolves a (possibly unnormalized) state.
    pub fn schrodinger(&self, rho: &Op4) -> Op4 {
        self.superop.adjoint().apply(rho)
    }

    /// Applies `self` to a state and then `next`; the Heisenberg matrix is
    /// `self · next`.
    pub fn then(&self, next: &ChannelMap) -> ChannelMap {
        let label = match (self.label, next.label) {
            (MapLabel::FiniteTime(a), MapLabel::FiniteTime(b)) => MapLabel::FiniteTime(a + b),
            _ => MapLabel::QuasiStationary,
        };
        ChannelMap {
            superop: Superoperator::from_matrix(self.superop.matrix() * next.superop.matrix(), Picture::Heisenberg),
            label,
        }
    }
}

fn require_heisenberg(gen: &Superoperator) -> Result<()> {
    if gen.picture() != Picture::Heisenberg {
        return Err(Error::WrongPicture { expected: Picture::Heisenberg });
    }
    Ok(())
}

/// `exp(t L)`.
pub fn evolve(gen: &Superoperator, t: f64) -> Result<ChannelMap> {
    require_heisenberg(gen)?;
    if !t.is_finite() || t < 0.0 {
        return Err(Error::InvalidArgument(format!("evolution time {t} must be finite and >= 0")));
    }
    let m = if t == 0.0 { Mat16::identity() } else { (gen.matrix() * C64::new(t, 0.0)).exp() };
    Ok(ChannelMap { superop: Superoperator::from_matrix(m, Picture::Heisenberg), label: MapLabel::FiniteTime(t) })
}

/// Ground state `|gg>`.
pub fn ground_vector() -> Vector4<C64> {
    Vector4::new(C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0))
}

/// Singlet `(|eg> − |ge>)/√2`, dark for `g = 1`.
pub fn singlet_vector() -> Vector4<C64> {
    let h = FRAC_1_SQRT_2;
    Vector4::new(C64::new(0.0, 0.0), C64::new(-h, 0.0), C64::new(h, 0.0), C64::new(0.0, 0.0))
}

/// Triplet `(|eg> + |ge>)/√2`, dark for `g = −1`.
pub fn triplet_vector() -> Vector4<C64> {
    let h = FRAC_1_SQRT_2;
    Vector4::new(C64::new(0.0, 0.0), C64::new(h, 0.0), C64::new(h, 0.0), C64::new(0.0, 0.0))
}

/// Block-diagonal projection onto the eigenspaces of the flip-flop operator
/// (`ψ_a`, `ψ_s` and span{|gg>, |ee>}). Self-adjoint, so the same matrix
/// serves both pictures.
pub fn exchange_dephasing() -> Superoperator {
    let proj = |v: Vector4<C64>| v * v.adjoint();
    let mut outer = Op4::zeros();
    outer[(0, 0)] = C64::new(1.0, 0.0);
    outer[(3, 3)] = C64::new(1.0, 0.0);
    let projectors = [proj(singlet_vector()), proj(triplet_vector()), outer];
    Superoperator::from_action(Picture::Heisenberg, |x| projectors.iter().map(|p| p * x * p).sum())
}

fn kernel_columns(m: &DMatrix<C64>) -> DMatrix<C64> {
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested V");
    let top = svd.singular_values.max();
    let cols: Vec<_> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= KERNEL_REL_TOL * top)
        .map(|(i, _)| v_t.row(i).adjoint())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(m.ncols(), 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

fn stacked(a: &Mat16, b: &Mat16) -> DMatrix<C64> {
    DMatrix::from_fn(32, 16, |i, j| if i < 16 { a[(i, j)] } else { b[(i - 16, j)] })
}

/// The three independent constructions of the quasi-stationary map.
#[derive(Debug, Clone)]
pub struct QuasiStationaryMethods {
    /// Spectral projector onto the modes stationary under both the generator
    /// and the flip-flop commutator, along the complementary invariant subspace.
    pub projector: Mat16,
    /// Richardson-extrapolated `λ(λ − L)⁻¹` followed by exchange dephasing.
    pub resolvent: Mat16,
    /// `exp(10⁴ L)` followed by exchange dephasing.
    pub long_time: Mat16,
    pub kernel_dim: usize,
}

impl QuasiStationaryMethods {
    pub fn resolvent_gap(&self) -> f64 {
        max_abs16(&(self.projector - self.resolvent))
    }

    pub fn long_time_gap(&self) -> f64 {
        max_abs16(&(self.projector - self.long_time))
    }
}

pub fn max_abs16(m: &Mat16) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Runs all three constructions without comparing them.
pub fn quasi_stationary_methods(gen: &Superoperator) -> Result<QuasiStationaryMethods> {
    require_heisenberg(gen)?;
    let l = gen.matrix();
    let flip = coherent_exchange(1.0);
    let c = flip.matrix();

    let right = kernel_columns(&stacked(l, c));
    let left = kernel_columns(&stacked(&l.adjoint(), &c.adjoint()));
    let kernel_dim = right.ncols();
    if kernel_dim < 2 || left.ncols() != kernel_dim {
        return Err(Error::NoDarkState { kernel_dim });
    }
    let overlap = left.adjoint() * &right;
    let overlap_inv = overlap
        .try_inverse()
        .ok_or_else(|| Error::Eigensolver("stationary left and right kernels are not dual".into()))?;
    let p = &right * overlap_inv * left.adjoint();
    let projector = Mat16::from_fn(|i, j| p[(i, j)]);

    let dephase = *exchange_dephasing().matrix();
    let id = Mat16::identity();
    let mut table: Vec<Mat16> = Vec::with_capacity(RESOLVENT_SHIFTS.len());
    for &lambda in &RESOLVENT_SHIFTS {
        let shift = C64::new(lambda, 0.0);
        let inv = (id * shift - l)
            .try_inverse()
            .ok_or_else(|| Error::Eigensolver(format!("resolvent singular at λ = {lambda}")))?;
        table.push(inv * shift);
    }
    // Richardson: the error is a power series in λ and each shift is ten
    // times smaller than the previous one.
    for order in 1..table.len() {
        let factor = 10f64.powi(order as i32);
        for i in (order..table.len()).rev() {
            table[i] = table[i] + (table[i] - table[i - 1]) / C64::new(factor - 1.0, 0.0);
        }
    }
    let resolvent = table[table.len() - 1] * dephase;

    let long_time = (l * C64::new(LONG_TIME, 0.0)).exp() * dephase;

    Ok(QuasiStationaryMethods { projector, resolvent, long_time, kernel_dim })
}

/// Channel left after all excitations outside the dark state have decayed.
///
/// Needs a generator with a dark state (`|g| = 1`); for `|g| < 1` use
/// [`evolve`] with `1/γ ≪ t ≪ 1/((1 − g)γ)`. Coherences between the ground
/// state and the dark state are dropped, which is the limit reached with any
/// nonzero dipole–dipole shift. Fails if the three constructions disagree by
/// more than [`METHOD_AGREEMENT_TOL`].
pub fn quasi_stationary_map(gen: &Superoperator) -> Result<ChannelMap> {
    let methods = quasi_stationary_methods(gen)?;
    let (resolvent, long_time) = (methods.resolvent_gap(), methods.long_time_gap());
    if resolvent > METHOD_AGREEMENT_TOL || long_time > METHOD_AGREEMENT_TOL {
        return Err(Error::MethodDisagreement { resolvent, long_time });
    }
    Ok(ChannelMap {
        superop: Superoperator::from_matrix(methods.projector, Picture::Heisenberg),
        label: MapLabel::QuasiStationary,
    })
}

/// The `g = 1` quasi-stationary map as tabulated: only the first five columns
/// are nonzero and rows 2 to 4 coincide.
pub fn golden_quasi_stationary() -> Mat16 {
    let r = std::f64::consts::SQRT_2;
    let first = [1.0, 0.5, -0.25, -0.25, -3.0 / (2.0 * r)];
    let rest = [0.0, 0.5, 0.25, 0.25, -1.0 / (2.0 * r)];
    Mat16::from_fn(|i, j| match (i, j) {
        (0, 0..=4) => C64::new(first[j], 0.0),
        (1..=3, 0..=4) => C64::new(rest[j], 0.0),
        _ => C64::new(0.0, 0.0),
    })
}

/// `ρ_f = S⁺ ρ_i`, re-validated as a density matrix at [`OUTPUT_TOL`].
pub fn apply_to_state(map: &ChannelMap, rho_i: &DensityMatrix) -> Result<DensityMatrix> {
    let out = map.schrodinger(rho_i.matrix());
    // Symmetrize away rounding in the Hermitian part before validating.
    let herm = (out + out.adjoint()) * C64::new(0.5, 0.0);
    if max_abs4(&(out - herm)) > OUTPUT_TOL {
        return Err(Error::InvalidDensityMatrix(format!(
            "propagated state is not Hermitian (deviation {:.3e})",
            max_abs4(&(out - herm))
        )));
    }
    DensityMatrix::with_tolerance(herm, OUTPUT_TOL, OUTPUT_TOL)
}

pub fn max_abs4(m: &Op4) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Weight of the singlet in the `g = 1` quasi-stationary state reached from
/// `a ⊗ b`.
pub fn singlet_probability(a: &TlaState, b: &TlaState) -> f64 {
    let (n1, n2) = (a.n(), b.n());
    // ρ⁽²⁾₂₁ρ⁽¹⁾₁₂ + ρ⁽²⁾₁₂ρ⁽¹⁾₂₁ = 2 Re(c̄₂ c₁)
    let cross = 2.0 * (b.coherence().conj() * a.coherence()).re;
    0.5 * (n2 - cross + n1 - 2.0 * n1 * n2)
}

/// `(1 − A)|gg><gg| + A|ψ_a><ψ_a|`.
pub fn two_term_state(a: f64) -> Op4 {
    let g = ground_vector();
    let s = singlet_vector();
    g * g.adjoint() * C64::new(1.0 - a, 0.0) + s * s.adjoint() * C64::new(a, 0.0)
}

/// Singlet weight of `rho` and the largest deviation from the two-term form.
pub fn two_term_residual(rho: &DensityMatrix) -> (f64, f64) {
    let a = rho.population_of(&singlet_vector());
    (a, max_abs4(&(rho.matrix() - two_term_state(a))))
}

/// `ρ_a ⊗ ρ_b` without validation, for conditional (unnormalized) states.
pub fn raw_product(a: &TlaState, b: &TlaState) -> Op4 {
    kron(&a.matrix(), &b.matrix())
}
