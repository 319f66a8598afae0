//! Brute-force reference implementations for tests and verification.
//!
//! Nothing here goes through the 16×16 superoperator assembly: the master
//! equation is integrated on raw 4×4 matrices, the exchange factor is a
//! direct sphere quadrature, and joint distributions are traced term by term
//! in the Heisenberg picture.

use std::f64::consts::PI;

use crate::algebra::DensityMatrix;
use crate::liouvillian::{Geometry, Orientation};
use crate::measurement::{JointDistribution, FOUR_POINT_AXES, TWO_POINT_AXES};
use crate::propagator::ChannelMap;
use crate::{Error, Op4, Result, C64};

pub const ODE_RTOL: f64 = 1e-10;
pub const ODE_ATOL: f64 = 1e-13;
pub const QUADRATURE_TOL: f64 = 1e-9;

/// `σ⁻` of one atom on the four-dimensional space, index `2·b₁ + b₂` with
/// `b = 1` for the excited level.
fn sigma_minus(atom: usize) -> Op4 {
    let mut m = Op4::zeros();
    for other in 0..2 {
        let (from, to) = if atom == 0 { (2 + other, other) } else { (2 * other + 1, 2 * other) };
        m[(to, from)] = C64::new(1.0, 0.0);
    }
    m
}

/// Right-hand side of the Schrödinger-picture master equation,
/// `Σ_km γ_km (σ⁻_m ρ σ⁺_k − ½{σ⁺_k σ⁻_m, ρ})`.
struct MasterEquation {
    terms: Vec<(f64, Op4, Op4, Op4)>,
}

impl MasterEquation {
    fn new(g: f64) -> Self {
        let lower = [sigma_minus(0), sigma_minus(1)];
        let mut terms = Vec::new();
        for k in 0..2 {
            for m in 0..2 {
                let rate = if k == m { 1.0 } else { g };
                let raise_k = lower[k].adjoint();
                let number = raise_k * lower[m];
                terms.push((rate, lower[m], raise_k, number));
            }
        }
        Self { terms }
    }

    fn rhs(&self, rho: &Op4) -> Op4 {
        let mut out = Op4::zeros();
        for (rate, low_m, raise_k, number) in &self.terms {
            let anti = number * rho + rho * number;
            out += (low_m * rho * raise_k - anti * C64::new(0.5, 0.0)) * C64::new(*rate, 0.0);
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct OdeSolution {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

// Dormand–Prince 5(4) tableau; the equation is autonomous so the nodes are unused.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

fn dopri_step(eq: &MasterEquation, y: &Op4, h: f64) -> (Op4, f64) {
    let mut k = [Op4::zeros(); 7];
    k[0] = eq.rhs(y);
    for s in 1..7 {
        let mut stage = *y;
        for (j, kj) in k.iter().enumerate().take(s) {
            if A[s][j] != 0.0 {
                stage += kj * C64::new(h * A[s][j], 0.0);
            }
        }
        k[s] = eq.rhs(&stage);
    }
    let mut high = *y;
    let mut err = Op4::zeros();
    for s in 0..7 {
        high += k[s] * C64::new(h * B5[s], 0.0);
        err += k[s] * C64::new(h * (B5[s] - B4[s]), 0.0);
    }
    let scaled = err
        .iter()
        .zip(y.iter().zip(high.iter()))
        .map(|(e, (a, b))| e.norm() / (ODE_ATOL + ODE_RTOL * a.norm().max(b.norm())))
        .fold(0.0, f64::max);
    (high, scaled)
}

fn validated(m: Op4) -> Result<DensityMatrix> {
    let sym = (m + m.adjoint()) * C64::new(0.5, 0.0);
    DensityMatrix::with_tolerance(sym, 1e-8, 1e-8)
}

/// Adaptive Dormand–Prince integration, recording the state at each
/// requested time (`times` must be non-decreasing and non-negative).
pub fn ode_trajectory(rho_i: &DensityMatrix, g: f64, times: &[f64]) -> Result<OdeSolution> {
    if !g.is_finite() || g.abs() > 1.0 {
        return Err(Error::ExchangeOutOfRange(g));
    }
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("times must be finite, non-negative and sorted".into()));
    }
    let eq = MasterEquation::new(g);
    let mut y = *rho_i.matrix();
    let mut t = 0.0;
    let mut h: f64 = 1e-3;
    let mut states = Vec::with_capacity(times.len());
    let (mut accepted, mut rejected) = (0, 0);
    for &target in times {
        while t < target {
            let step = h.min(target - t);
            let (next, err) = dopri_step(&eq, &y, step);
            if err <= 1.0 {
                t = if step == target - t { target } else { t + step };
                y = next;
                accepted += 1;
            } else {
                rejected += 1;
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h = step * factor;
            if h < 1e-14 * t.max(1.0) {
                return Err(Error::StepUnderflow(t));
            }
        }
        states.push(validated(y)?);
    }
    Ok(OdeSolution { times: times.to_vec(), states, accepted_steps: accepted, rejected_steps: rejected })
}

/// State at time `t` (in units of 1/γ) for the collective decay with rate
/// ratio `g`.
pub fn ode_evolve(rho_i: &DensityMatrix, g: f64, t: f64) -> Result<DensityMatrix> {
    let mut sol = ode_trajectory(rho_i, g, &[t])?;
    Ok(sol.states.remove(0))
}

/// Ordered `(excited, ground)`; `(raise, lower)` of the cyclic ladder.
fn ladder_pairs() -> [(Op4, Op4, Op4, Op4); 2] {
    // one-atom operators embedded per atom: (π⁺ on atom 1, π⁻ on atom 1, π⁺ on atom 2, π⁻ on atom 2)
    let s1 = sigma_minus(0);
    let s2 = sigma_minus(1);
    [(s1, s1.adjoint(), s2, s2.adjoint()), (s1.adjoint(), s1, s2.adjoint(), s2)]
}

/// Joint distribution built from the literal Heisenberg sandwich
/// `Tr ρ π⁻(k₁) … S[π⁻ … π⁺] … π⁺(k₁)` for every outcome tuple.
pub fn enumerate_joint(rho_i: &DensityMatrix, map: &ChannelMap, arity: usize) -> Result<JointDistribution> {
    let rho = rho_i.matrix();
    let lad = ladder_pairs();
    let trace = |left: Op4, inner: Op4, right: Op4| (rho * left * map.heisenberg(&inner) * right).trace().re;
    match arity {
        2 => {
            let mut probs = Vec::with_capacity(4);
            for (up1, down1, _, _) in &lad {
                for (_, _, up2, down2) in &lad {
                    probs.push(trace(*down1, down2 * up2, *up1));
                }
            }
            JointDistribution::new(TWO_POINT_AXES.to_vec(), probs)
        }
        4 => {
            let mut probs = Vec::with_capacity(16);
            for (up1, down1, _, _) in &lad {
                for (_, _, up2, down2) in &lad {
                    for (up3, down3, _, _) in &lad {
                        for (_, _, up4, down4) in &lad {
                            let inner = down3 * down4 * up4 * up3;
                            probs.push(trace(down1 * down2, inner, up2 * up1));
                        }
                    }
                }
            }
            JointDistribution::new(FOUR_POINT_AXES.to_vec(), probs)
        }
        _ => Err(Error::InvalidArgument(format!("arity must be 2 or 4, got {arity}"))),
    }
}

/// Gauss–Legendre nodes and weights on [−1, 1] by Newton iteration.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = x;
        nodes[n - 1 - i] = -x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// `∫ (d̂₁·d̂₂ − (d̂₁·n)(d̂₂·n)) e^{−iφ n·R̂} dΩ` with `R̂ = z`, `d̂₁ = x`.
fn sphere_integral(phi: f64, d2: [f64; 3], n_u: usize, n_az: usize) -> f64 {
    let (nodes, weights) = gauss_legendre(n_u);
    let d_az = 2.0 * PI / n_az as f64;
    let mut total = 0.0;
    for (&u, &w) in nodes.iter().zip(&weights) {
        let s = (1.0 - u * u).sqrt();
        let phase = (phi * u).cos();
        let mut ring = 0.0;
        for j in 0..n_az {
            let a = j as f64 * d_az;
            let n = [s * a.cos(), s * a.sin(), u];
            let dn2 = d2[0] * n[0] + d2[1] * n[1] + d2[2] * n[2];
            ring += d2[0] - n[0] * dn2;
        }
        total += w * phase * ring * d_az;
    }
    total
}

/// Exchange factor by direct sphere quadrature, normalized by the
/// single-atom (`φ = 0`, same dipole) value. Refinement doubles both grids
/// until successive results differ by less than `1e-9`.
pub fn sphere_exchange_factor(geom: &Geometry) -> Result<f64> {
    let d2 = match geom.orientation() {
        Orientation::Parallel => [1.0, 0.0, 0.0],
        Orientation::Antiparallel => [-1.0, 0.0, 0.0],
    };
    let estimate = |n_u: usize, n_az: usize| {
        sphere_integral(geom.phi(), d2, n_u, n_az) / sphere_integral(0.0, [1.0, 0.0, 0.0], n_u, n_az)
    };
    let (mut n_u, mut n_az) = (8, 8);
    let mut prev = estimate(n_u, n_az);
    let mut change = f64::INFINITY;
    while n_u <= 2048 {
        n_u *= 2;
        n_az *= 2;
        let next = estimate(n_u, n_az);
        change = (next - prev).abs();
        prev = next;
        if change < QUADRATURE_TOL {
            return Ok(prev);
        }
    }
    Err(Error::Quadrature(change))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{on_atom, product_state, unit2, TlaState};
    use crate::liouvillian::{collective_decay_generator, exchange_factor, lowering, DecayRates};
    use crate::measurement::{golden_joint, joint_four_point, joint_two_point};
    use crate::propagator::{evolve, quasi_stationary_map, singlet_probability, two_term_state};

    #[test]
    fn sigma_matches_kronecker_embedding() {
        for atom in 0..2 {
            assert_eq!(sigma_minus(atom), lowering(atom));
            assert_eq!(sigma_minus(atom), on_atom(&unit2(0, 1), atom));
        }
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(6);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        let p10: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(10)).sum();
        assert!((p10 - 2.0 / 11.0).abs() < 1e-14);
    }

    #[test]
    fn ode_single_atom_half_life() {
        let rho = product_state(&TlaState::excited(), &TlaState::ground());
        let out = ode_evolve(&rho, 0.0, std::f64::consts::LN_2).unwrap();
        assert!((out.matrix()[(2, 2)].re - 0.5).abs() < 1e-9);
    }

    #[test]
    fn ode_zero_time_is_identity() {
        let a = TlaState::new(0.4, C64::new(0.1, 0.2)).unwrap();
        let rho = product_state(&a, &TlaState::excited());
        let out = ode_evolve(&rho, 0.7, 0.0).unwrap();
        assert_eq!(out.matrix(), rho.matrix());
    }

    #[test]
    fn ode_long_time_two_term_state() {
        let rho = product_state(&TlaState::excited(), &TlaState::ground());
        let out = ode_evolve(&rho, 1.0, 50.0).unwrap();
        let want = two_term_state(0.5);
        assert!((out.matrix() - want).iter().all(|d| d.norm() < 1e-7));
    }

    #[test]
    fn ode_trajectory_records_requested_times() {
        let rho = product_state(&TlaState::excited(), &TlaState::excited());
        let sol = ode_trajectory(&rho, 0.5, &[0.0, 0.5, 1.0, 3.0]).unwrap();
        assert_eq!(sol.states.len(), 4);
        assert!(sol.accepted_steps > 0);
        assert!(ode_trajectory(&rho, 0.5, &[1.0, 0.5]).is_err());
        assert!(ode_trajectory(&rho, 1.5, &[1.0]).is_err());
    }

    #[test]
    fn ode_agrees_with_matrix_exponential() {
        let a = TlaState::new(0.6, C64::new(0.2, -0.3)).unwrap();
        let b = TlaState::new(0.3, C64::new(-0.1, 0.25)).unwrap();
        let rho = product_state(&a, &b);
        for g in [0.0, 0.5, 0.9, 1.0] {
            let gen = collective_decay_generator(&DecayRates::unit(g).unwrap());
            for t in [0.1, 1.0, 5.0, 10.0] {
                let exact = evolve(&gen, t).unwrap().schrodinger(rho.matrix());
                let ode = ode_evolve(&rho, g, t).unwrap();
                let diff = (exact - ode.matrix()).iter().map(|d| d.norm()).fold(0.0, f64::max);
                assert!(diff < 1e-8, "g={g} t={t} diff={diff:e}");
            }
        }
    }

    #[test]
    fn enumerate_identity_is_product() {
        let a = TlaState::population(0.3).unwrap();
        let b = TlaState::population(0.8).unwrap();
        let j = enumerate_joint(&product_state(&a, &b), &ChannelMap::identity(), 2).unwrap();
        let want = [0.3 * 0.8, 0.3 * 0.2, 0.7 * 0.8, 0.7 * 0.2];
        for (p, w) in j.probs().iter().zip(want) {
            assert!((p - w).abs() < 1e-15);
        }
    }

    #[test]
    fn enumerate_matches_pipeline_and_reference_two_point() {
        let map = quasi_stationary_map(&collective_decay_generator(&DecayRates::unit(1.0).unwrap())).unwrap();
        let a = TlaState::new(0.35, C64::new(0.3, 0.1)).unwrap();
        let b = TlaState::new(0.75, C64::new(-0.2, 0.2)).unwrap();
        let rho = product_state(&a, &b);
        let two = enumerate_joint(&rho, &map, 2).unwrap();
        assert!(two.max_abs_diff(&joint_two_point(&rho, &map).unwrap()) < 1e-12);
        assert!(two.max_abs_diff(&golden_joint(&a, &b, 2).unwrap()) < 1e-12);
        let four = enumerate_joint(&rho, &map, 4).unwrap();
        assert!(four.max_abs_diff(&joint_four_point(&rho, &map).unwrap()) < 1e-12);
        assert!((four.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(enumerate_joint(&rho, &map, 3).is_err());
        assert!(singlet_probability(&a, &b) > 0.0);
    }

    #[test]
    fn quadrature_matches_closed_form() {
        for phi in [0.0, 0.1, 1.0, std::f64::consts::PI, 7.5] {
            for o in [Orientation::Parallel, Orientation::Antiparallel] {
                let geom = Geometry::new(phi, o).unwrap();
                let q = sphere_exchange_factor(&geom).unwrap();
                assert!((q - exchange_factor(&geom)).abs() < 1e-9, "phi={phi} {o:?}");
            }
        }
    }
}
