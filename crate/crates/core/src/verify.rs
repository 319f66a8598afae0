//! Acceptance checks with pinned tolerances, shared by the `verify`
//! subcommand and the acceptance test target.

use std::f64::consts::PI;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::algebra::{min_eigenvalue, product_state, DensityMatrix, TlaState};
use crate::information::{
    closed_form_max, closed_form_population, info_at, info_surface_for, mutual_information, optimize, InfoMode,
};
use crate::liouvillian::{
    add_coherent_exchange, collective_decay_generator, exchange_factor, golden_mismatches, kernel_dimension, spectrum,
    DecayRates, Geometry, Orientation, Superoperator, CANONICAL_MAP,
};
use crate::measurement::{
    derived_joint_four, golden_joint, joint_four_point, joint_two_point, table_mismatches, JointDistribution,
};
use crate::oracle::{enumerate_joint, ode_evolve, sphere_exchange_factor};
use crate::propagator::{
    apply_to_state, evolve, golden_quasi_stationary, max_abs16, max_abs4, quasi_stationary_map,
    quasi_stationary_methods, singlet_probability, two_term_residual, two_term_state, ChannelMap,
};
use crate::{Op4, Result, C64};

pub const SEED: u64 = 0x7a0_a70;

pub const GOLDEN_GENERATOR_TOL: f64 = 1e-12;
pub const ORACLE_TOL: f64 = 1e-8;
pub const METHODS_TOL: f64 = 1e-8;
pub const GOLDEN_MAP_TOL: f64 = 1e-9;
pub const SINGLET_TOL: f64 = 1e-10;
pub const GROUND_TOL: f64 = 1e-8;
pub const JOINT_TOL: f64 = 1e-9;
pub const NORM_TOL: f64 = 1e-10;
pub const REFERENCE_VALUE_TOL: f64 = 0.005;
pub const REFERENCE_LOCATION_TOL: f64 = 1e-3;
pub const CLOSED_FORM_TOL: f64 = 1e-6;
pub const ZERO_INFO_TOL: f64 = 1e-12;
pub const SIGN_SYMMETRY_TOL: f64 = 1e-9;
pub const COHERENT_TOL: f64 = 1e-8;
pub const QUADRATURE_AGREEMENT_TOL: f64 = 1e-6;
pub const SPECTRUM_TOL: f64 = 1e-9;
pub const KERNEL_SV_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-12;
pub const MIN_EIGENVALUE: f64 = -1e-9;

/// One entry of a reference table that the computation does not reproduce.
#[derive(Debug, Clone, PartialEq)]
pub struct Mismatch {
    pub source: String,
    pub row: usize,
    pub col: usize,
    pub expected: C64,
    pub actual: C64,
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} ({}, {}): reference {} computed {}",
            self.source,
            self.row,
            self.col,
            fmt_c(self.expected),
            fmt_c(self.actual)
        )
    }
}

fn fmt_c(z: C64) -> String {
    if z.im == 0.0 {
        format!("{:.9}", z.re)
    } else {
        format!("{:.9}{:+.9}i", z.re, z.im)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionOutcome {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub detail: Vec<String>,
    /// Entries of reference tables or values suspected to be mistyped.
    pub triage: Vec<String>,
}

impl CriterionOutcome {
    fn new(id: u8, title: &'static str) -> Self {
        Self { id, title, passed: true, detail: Vec::new(), triage: Vec::new() }
    }

    fn check(&mut self, ok: bool, line: String) {
        self.passed &= ok;
        self.detail.push(format!("{} {line}", if ok { "ok  " } else { "FAIL" }));
    }

    fn note(&mut self, line: String) {
        self.detail.push(format!("     {line}"));
    }

    fn fail_with(mut self, err: crate::Error) -> Self {
        self.passed = false;
        self.detail.push(format!("FAIL error: {err}"));
        self
    }

    pub fn line(&self) -> String {
        format!("[{}] criterion {:>2}: {}", if self.passed { "PASS" } else { "FAIL" }, self.id, self.title)
    }
}

fn guarded(id: u8, title: &'static str, body: impl FnOnce(&mut CriterionOutcome) -> Result<()>) -> CriterionOutcome {
    let mut out = CriterionOutcome::new(id, title);
    match body(&mut out) {
        Ok(()) => out,
        Err(e) => out.fail_with(e),
    }
}

/// Uniform population, coherence modulus uniform up to the positivity bound.
pub fn random_tla(rng: &mut impl Rng) -> TlaState {
    let n: f64 = rng.gen();
    let bound = (n * (1.0 - n)).sqrt();
    let c = C64::from_polar(bound * rng.gen::<f64>(), 2.0 * PI * rng.gen::<f64>());
    TlaState::new(n, c).expect("coherence within bound")
}

fn random_pairs(count: usize, stream: u64) -> Vec<(TlaState, TlaState)> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    rng.set_stream(stream);
    (0..count).map(|_| (random_tla(&mut rng), random_tla(&mut rng))).collect()
}

fn generator(g: f64) -> Result<Superoperator> {
    Ok(collective_decay_generator(&DecayRates::unit(g)?))
}

fn unit_map(g: f64) -> Result<ChannelMap> {
    quasi_stationary_map(&generator(g)?)
}

pub fn criterion_1() -> CriterionOutcome {
    guarded(1, "relaxation matrix matches the reference blocks", |out| {
        for g in [0.0, 0.5, -0.5, 1.0, -1.0] {
            let rates = DecayRates::unit(g)?;
            let gen = collective_decay_generator(&rates);
            let mism = golden_mismatches(&gen, &rates, GOLDEN_GENERATOR_TOL);
            let reference = crate::liouvillian::golden_blocks(g).assemble();
            let ours = CANONICAL_MAP.to_reference(gen.matrix());
            let dev = (0..256).map(|k| (ours[(k / 16, k % 16)] - C64::new(reference[(k / 16, k % 16)], 0.0)).norm()).fold(0.0, f64::max);
            out.check(mism.is_empty(), format!("g = {g:+}: max deviation {dev:.2e} (tol {GOLDEN_GENERATOR_TOL:.0e}), {} mismatches", mism.len()));
            out.triage.extend(mism.iter().map(|m| m.to_string()));
        }
        Ok(())
    })
}

pub fn criterion_2() -> CriterionOutcome {
    guarded(2, "matrix exponential agrees with direct ODE integration", |out| {
        let times = [0.1, 1.0, 5.0, 10.0];
        let gs = [0.0, 0.5, 0.9, 1.0];
        let states = random_pairs(15, 2);
        let cases: Vec<(f64, f64, usize)> = gs
            .iter()
            .flat_map(|&g| times.iter().flat_map(move |&t| (0..15).map(move |s| (g, t, s))))
            .collect();
        let maps: Vec<((f64, f64), ChannelMap)> = gs
            .iter()
            .flat_map(|&g| times.iter().map(move |&t| (g, t)))
            .map(|(g, t)| Ok(((g, t), evolve(&generator(g)?, t)?)))
            .collect::<Result<_>>()?;
        let diffs: Vec<f64> = cases
            .par_iter()
            .map(|&(g, t, s)| {
                let rho = product_state(&states[s].0, &states[s].1);
                let map = &maps.iter().find(|(k, _)| *k == (g, t)).expect("map for case").1;
                let ode = ode_evolve(&rho, g, t)?;
                Ok(max_abs4(&(map.schrodinger(rho.matrix()) - ode.matrix())))
            })
            .collect::<Result<_>>()?;
        let worst = diffs.iter().copied().fold(0.0, f64::max);
        out.check(worst <= ORACLE_TOL, format!("{} cases, max entrywise difference {worst:.2e} (tol {ORACLE_TOL:.0e})", cases.len()));
        Ok(())
    })
}

pub fn criterion_3() -> CriterionOutcome {
    guarded(3, "quasi-stationary map: three methods agree and match the reference map", |out| {
        let methods = quasi_stationary_methods(&generator(1.0)?)?;
        let (r, l) = (methods.resolvent_gap(), methods.long_time_gap());
        out.check(r <= METHODS_TOL, format!("projector vs λ-extrapolation {r:.2e} (tol {METHODS_TOL:.0e})"));
        out.check(l <= METHODS_TOL, format!("projector vs long-time exponential {l:.2e} (tol {METHODS_TOL:.0e})"));
        let reference = golden_quasi_stationary();
        let ours = CANONICAL_MAP.to_reference(&methods.projector);
        let dev = max_abs16(&(ours - reference));
        out.check(dev <= GOLDEN_MAP_TOL, format!("vs reference map {dev:.2e} (tol {GOLDEN_MAP_TOL:.0e})"));
        for i in 0..16 {
            for j in 0..16 {
                if (ours[(i, j)] - reference[(i, j)]).norm() > GOLDEN_MAP_TOL {
                    out.triage.push(
                        Mismatch { source: "quasi-stationary map".into(), row: i + 1, col: j + 1, expected: reference[(i, j)], actual: ours[(i, j)] }
                            .to_string(),
                    );
                }
            }
        }
        Ok(())
    })
}

pub fn criterion_4() -> CriterionOutcome {
    guarded(4, "stationary states: two-term form at g = 1, ground state at g = 0.5", |out| {
        let map = unit_map(1.0)?;
        let (mut weight_err, mut form_err) = (0.0f64, 0.0f64);
        for (a, b) in random_pairs(100, 4) {
            let rho = apply_to_state(&map, &product_state(&a, &b))?;
            let (weight, residual) = two_term_residual(&rho);
            weight_err = weight_err.max((weight - singlet_probability(&a, &b)).abs());
            form_err = form_err.max(residual);
        }
        out.check(weight_err <= SINGLET_TOL, format!("100 states: singlet weight vs closed formula {weight_err:.2e} (tol {SINGLET_TOL:.0e})"));
        out.check(form_err <= SINGLET_TOL, format!("100 states: deviation from two-term form {form_err:.2e} (tol {SINGLET_TOL:.0e})"));

        let long = evolve(&generator(0.5)?, 100.0)?;
        let mut ground_err = 0.0f64;
        for (a, b) in random_pairs(20, 40) {
            let rho = apply_to_state(&long, &product_state(&a, &b))?;
            ground_err = ground_err.max(max_abs4(&(rho.matrix() - two_term_state(0.0))));
        }
        out.check(ground_err <= GROUND_TOL, format!("g = 0.5, t = 100/γ: distance to |gg><gg| {ground_err:.2e} (tol {GROUND_TOL:.0e})"));
        Ok(())
    })
}

fn normalization_error(j: &JointDistribution) -> f64 {
    (j.probs().iter().sum::<f64>() - 1.0).abs()
}

pub fn criterion_5() -> CriterionOutcome {
    guarded(5, "joint distributions reproduce the reference closed forms", |out| {
        let map = unit_map(1.0)?;
        let (mut two, mut four_reference, mut four_derived, mut oracle, mut norm) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for (a, b) in random_pairs(100, 5) {
            let rho = product_state(&a, &b);
            let j2 = joint_two_point(&rho, &map)?;
            let j4 = joint_four_point(&rho, &map)?;
            two = two.max(j2.max_abs_diff(&golden_joint(&a, &b, 2)?));
            four_reference = four_reference.max(j4.max_abs_diff(&golden_joint(&a, &b, 4)?));
            four_derived = four_derived.max(j4.max_abs_diff(&derived_joint_four(&a, &b)?));
            oracle = oracle.max(j2.max_abs_diff(&enumerate_joint(&rho, &map, 2)?));
            oracle = oracle.max(j4.max_abs_diff(&enumerate_joint(&rho, &map, 4)?));
            norm = norm.max(normalization_error(&j2)).max(normalization_error(&j4));
        }
        out.check(two <= JOINT_TOL, format!("two-point vs reference table {two:.2e} (tol {JOINT_TOL:.0e})"));
        out.check(four_reference <= JOINT_TOL, format!("four-point vs reference table {four_reference:.2e} (tol {JOINT_TOL:.0e})"));
        out.check(norm <= NORM_TOL, format!("normalization {norm:.2e} (tol {NORM_TOL:.0e})"));
        out.note(format!("four-point vs hand-derived table {four_derived:.2e}"));
        out.note(format!("pipeline vs Heisenberg enumeration {oracle:.2e}"));
        if four_reference > JOINT_TOL {
            let a = TlaState::population(0.3)?;
            let b = TlaState::population(0.6)?;
            let computed = joint_four_point(&product_state(&a, &b), &map)?;
            let reference = golden_joint(&a, &b, 4)?;
            out.triage.push(
                "four-point table at n1 = 0.3, n2 = 0.6 (rows k1k2, columns k3k4, each ordered ee, eg, ge, gg); \
                 same multiset of entries in different cells, no relabeling of axes maps one onto the other"
                    .into(),
            );
            out.triage.extend(table_mismatches("four-point table", &reference, &computed, JOINT_TOL).iter().map(|m| m.to_string()));
        }
        Ok(())
    })
}

pub fn criterion_6() -> CriterionOutcome {
    guarded(6, "information maxima", |out| {
        let two = optimize(InfoMode::Two)?;
        let target = closed_form_population();
        out.check((two.value_bits - 0.14).abs() <= REFERENCE_VALUE_TOL, format!("two-point maximum {:.6} bit (0.14 ± {REFERENCE_VALUE_TOL})", two.value_bits));
        for p in &two.points {
            out.note(format!("argmax n1 = {:.6}, n2 = {:.6}", p.n1, p.n2));
        }
        let at_reference = two.points.iter().any(|p| (p.n1 - target).abs() <= REFERENCE_LOCATION_TOL && (p.n2 == 0.0 || p.n2 == 1.0));
        let nearest = two.points.iter().map(|p| (p.n1 - target).abs()).fold(f64::INFINITY, f64::min);
        out.check(at_reference, format!("argmax at n1 = {target:.6} within {REFERENCE_LOCATION_TOL:.0e}, n2 ∈ {{0, 1}} (nearest {nearest:.2e})"));
        let cf = closed_form_max();
        let gap = (cf - two.value_bits).abs();
        out.check(gap <= CLOSED_FORM_TOL, format!("closed form {cf:.9} vs optimum, difference {gap:.2e} (tol {CLOSED_FORM_TOL:.0e})"));
        let four = optimize(InfoMode::Four)?;
        out.check((four.value_bits - 0.322).abs() <= REFERENCE_VALUE_TOL, format!("four-point maximum {:.6} bit (0.322 ± {REFERENCE_VALUE_TOL})", four.value_bits));
        let mixing = |p: &crate::information::SurfacePoint| p.n1 + p.n2 - 2.0 * p.n1 * p.n2;
        let off_ridge = four.points.iter().map(|p| (mixing(p) - 0.4).abs()).fold(0.0, f64::max);
        out.note(format!(
            "four-point maximum is a ridge: {} refined argmax points, all on n1 + n2 − 2 n1 n2 = 2/5 within {off_ridge:.1e}",
            four.points.len()
        ));
        if !at_reference || gap > CLOSED_FORM_TOL {
            let map = unit_map(1.0)?;
            let at = info_at(&map, InfoMode::Two, target, 0.0)?.value_bits;
            out.triage.push(format!(
                "reference optimum population {target:.6} gives {at:.9} bit on the computed surface, equal to the reference closed form; \
                 the surface is still increasing there and peaks at n1 = 175/283 = {:.6} with {:.9} bit",
                175.0 / 283.0,
                two.value_bits
            ));
        }
        Ok(())
    })
}

pub fn criterion_7() -> CriterionOutcome {
    guarded(7, "no relaxation carries no information", |out| {
        let id = ChannelMap::identity();
        let (mut two, mut four) = (0.0f64, 0.0f64);
        let mut four_vs_pair_entropy = 0.0f64;
        for (a, b) in random_pairs(50, 7) {
            let rho = product_state(&a, &b);
            two = two.max(mutual_information(&joint_two_point(&rho, &id)?).value_bits.abs());
            let r = mutual_information(&joint_four_point(&rho, &id)?);
            four = four.max(r.value_bits.abs());
            four_vs_pair_entropy = four_vs_pair_entropy.max((r.value_bits - r.h_first).abs());
        }
        out.check(two <= ZERO_INFO_TOL, format!("50 states, two-point: max |I| {two:.2e} (tol {ZERO_INFO_TOL:.0e})"));
        out.check(four <= ZERO_INFO_TOL, format!("50 states, four-point: max |I| {four:.2e} (tol {ZERO_INFO_TOL:.0e})"));
        if four > ZERO_INFO_TOL {
            out.note(format!("four-point I equals the initial pair entropy H(P12) within {four_vs_pair_entropy:.2e}"));
            out.triage.push(
                "without relaxation the four-point sandwich leaves each counted atom in the other level, so the final count \
                 is fixed by the initial one and I(12)(34) = H(P12); the stated product form with I = 0 does not follow \
                 from the four-point formula"
                    .into(),
            );
        }
        Ok(())
    })
}

pub fn criterion_8() -> CriterionOutcome {
    guarded(8, "antiparallel dipoles give the same distributions and information", |out| {
        let plus = unit_map(1.0)?;
        let minus = unit_map(-1.0)?;
        let n = 51;
        for mode in [InfoMode::Two, InfoMode::Four] {
            let a = info_surface_for(&plus, mode, n)?;
            let b = info_surface_for(&minus, mode, n)?;
            let info = a.iter().zip(&b).map(|(x, y)| (x.info_bits - y.info_bits).abs()).fold(0.0, f64::max);
            let dist = a
                .par_iter()
                .map(|p| {
                    let rho = product_state(&TlaState::population(p.n1)?, &TlaState::population(p.n2)?);
                    let (x, y) = match mode {
                        InfoMode::Two => (joint_two_point(&rho, &plus)?, joint_two_point(&rho, &minus)?),
                        InfoMode::Four => (joint_four_point(&rho, &plus)?, joint_four_point(&rho, &minus)?),
                    };
                    Ok(x.max_abs_diff(&y))
                })
                .collect::<Result<Vec<f64>>>()?
                .into_iter()
                .fold(0.0, f64::max);
            out.check(info <= SIGN_SYMMETRY_TOL, format!("{mode:?} {n}×{n} surface: max difference {info:.2e} (tol {SIGN_SYMMETRY_TOL:.0e})"));
            out.check(dist <= SIGN_SYMMETRY_TOL, format!("{mode:?} distributions: max difference {dist:.2e} (tol {SIGN_SYMMETRY_TOL:.0e})"));
        }
        Ok(())
    })
}

pub fn criterion_9() -> CriterionOutcome {
    guarded(9, "coherent exchange leaves the quasi-stationary map unchanged", |out| {
        let gen = generator(1.0)?;
        let base = quasi_stationary_map(&gen)?;
        for g_c in [0.1, 1.0, 10.0] {
            let with = quasi_stationary_map(&add_coherent_exchange(&gen, g_c)?)?;
            let d = max_abs16(&(with.superop().matrix() - base.superop().matrix()));
            out.check(d <= COHERENT_TOL, format!("g_C = {g_c}: {d:.2e} (tol {COHERENT_TOL:.0e})"));
        }
        Ok(())
    })
}

pub fn criterion_10() -> CriterionOutcome {
    guarded(10, "exchange factor: closed form vs sphere quadrature, small-φ series", |out| {
        for phi in [0.05, 0.3, 1.0, 2.5, PI, 10.0] {
            for o in [Orientation::Parallel, Orientation::Antiparallel] {
                let geom = Geometry::new(phi, o)?;
                let (c, q) = (exchange_factor(&geom), sphere_exchange_factor(&geom)?);
                out.check((c - q).abs() <= QUADRATURE_AGREEMENT_TOL, format!("φ = {phi:.4} {o:?}: {c:.9} vs {q:.9}"));
            }
        }
        let mut worst_ratio = 0.0f64;
        for k in 1..=300 {
            let phi = k as f64 * 1e-3;
            let g = exchange_factor(&Geometry::new(phi, Orientation::Parallel)?);
            worst_ratio = worst_ratio.max((g - (1.0 - phi * phi / 5.0)).abs() / phi.powi(4));
        }
        out.check(worst_ratio <= 1.0, format!("|g − (1 − φ²/5)| / φ⁴ ≤ {worst_ratio:.4} for φ ≤ 0.3"));
        Ok(())
    })
}

pub fn criterion_11() -> CriterionOutcome {
    guarded(11, "spectral structure", |out| {
        for g in [0.0, 0.25, 0.5, 0.75, 0.9] {
            let eigs = spectrum(&generator(g)?)?;
            let count = |target: f64| eigs.iter().filter(|z| (**z - C64::new(target, 0.0)).norm() <= SPECTRUM_TOL).count();
            let (slow, half) = (count(-(1.0 - g)), count((g - 1.0) / 2.0));
            out.check(slow >= 1 && half >= 2, format!("g = {g}: −(1−g)γ ×{slow}, (g−1)γ/2 ×{half}"));
        }
        let gen = generator(1.0)?;
        let dim = kernel_dimension(gen.matrix(), KERNEL_SV_TOL);
        out.check(dim == 2, format!("g = 1: kernel dimension {dim} at threshold {KERNEL_SV_TOL:.0e} (required 2)"));
        let common = quasi_stationary_methods(&gen)?.kernel_dim;
        out.note(format!("kernel shared with the flip-flop commutator: dimension {common}"));
        if dim != 2 {
            out.triage.push(format!(
                "g = 1 generator annihilates |gg><gg|, |ψa><ψa| and both |gg><ψa| coherences ({dim} modes); \
                 only the dephased kernel ({common} modes) is two-dimensional"
            ));
        }
        Ok(())
    })
}

fn output_check(out: &Op4) -> (f64, f64) {
    let herm = (out + out.adjoint()) * C64::new(0.5, 0.0);
    ((out.trace() - C64::new(1.0, 0.0)).norm(), min_eigenvalue(&herm))
}

pub fn criterion_12() -> CriterionOutcome {
    guarded(12, "channel outputs are density matrices", |out| {
        let mut maps = vec![("identity".to_string(), ChannelMap::identity())];
        for g in [0.0, 0.5, 1.0, -1.0] {
            maps.push((format!("exp(L t), g = {g}, t = 1"), evolve(&generator(g)?, 1.0)?));
        }
        maps.push(("quasi-stationary, g = 1".into(), unit_map(1.0)?));
        maps.push(("quasi-stationary, g = -1".into(), unit_map(-1.0)?));
        let n = 50;
        let grid: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        for (name, map) in &maps {
            let (trace, eig) = (0..n * n)
                .into_par_iter()
                .map(|k| {
                    let (n1, n2) = (grid[k / n], grid[k % n]);
                    let phase = 2.0 * PI * k as f64 / (n * n) as f64;
                    let a = TlaState::new(n1, C64::from_polar(0.5 * (n1 * (1.0 - n1)).sqrt(), phase))?;
                    let b = TlaState::new(n2, C64::from_polar((n2 * (1.0 - n2)).sqrt(), -phase))?;
                    Ok(output_check(&map.schrodinger(product_state(&a, &b).matrix())))
                })
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .fold((0.0f64, f64::INFINITY), |(t, e), (dt, de)| (t.max(dt), e.min(de)));
            out.check(
                trace <= TRACE_TOL && eig >= MIN_EIGENVALUE,
                format!("{name}: trace error {trace:.2e}, min eigenvalue {eig:.2e}"),
            );
        }
        Ok(())
    })
}

pub fn run_all() -> Vec<CriterionOutcome> {
    let checks: [fn() -> CriterionOutcome; 12] = [
        criterion_1,
        criterion_2,
        criterion_3,
        criterion_4,
        criterion_5,
        criterion_6,
        criterion_7,
        criterion_8,
        criterion_9,
        criterion_10,
        criterion_11,
        criterion_12,
    ];
    checks.iter().map(|f| f()).collect()
}

pub fn format_report(outcomes: &[CriterionOutcome]) -> String {
    let mut s = String::new();
    for o in outcomes {
        s.push_str(&o.line());
        s.push('\n');
        for d in &o.detail {
            s.push_str("    ");
            s.push_str(d);
            s.push('\n');
        }
    }
    let triage: Vec<_> = outcomes.iter().filter(|o| !o.triage.is_empty()).collect();
    if !triage.is_empty() {
        s.push_str("\ntriage: suspected misprints in reference values\n");
        for o in triage {
            for t in &o.triage {
                s.push_str(&format!("  [{}] {t}\n", o.id));
            }
        }
    }
    let passed = outcomes.iter().filter(|o| o.passed).count();
    s.push_str(&format!("\n{passed}/{} criteria passed\n", outcomes.len()));
    s
}

/// Density matrix of a random product state, for tests and bindings.
pub fn random_product_state(seed: u64) -> DensityMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    product_state(&random_tla(&mut rng), &random_tla(&mut rng))
}
