//! Coincidence-scheme quanta counting: the cyclic ladder operators, and the
//! two-point and four-point joint distributions of found levels.
//!
//! Every outcome axis is ordered `(excited, ground)`.

use crate::algebra::{on_atom, unit2, DensityMatrix, TlaState};
use crate::propagator::ChannelMap;
use crate::verify::Mismatch;
use crate::{Error, Op2, Op4, Result, C64};

/// Entries above `-CLAMP_TOL` are clamped to zero, anything lower is an error.
pub const CLAMP_TOL: f64 = 1e-12;
pub const NORMALIZATION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum Level {
    Excited,
    Ground,
}

impl Level {
    /// Axis order used in every table.
    pub const ORDER: [Level; 2] = [Level::Excited, Level::Ground];

    /// Index of the level in the single-atom matrices (ground is 0).
    fn state_index(self) -> usize {
        match self {
            Level::Ground => 0,
            Level::Excited => 1,
        }
    }

    fn next(self) -> Level {
        match self {
            Level::Ground => Level::Excited,
            Level::Excited => Level::Ground,
        }
    }
}

/// Cyclic ladder on a two-level atom: `π⁺(k) = |k+1><k|`, `π⁻(k) = π⁺(k)†`.
///
/// `π⁺(k) ρ π⁻(k)` keeps the weight of level `k` but relocates it to the
/// other level; this is the conditional state the counting scheme leaves
/// behind, not a projective collapse.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderSet {
    raise: [Op2; 2],
    lower: [Op2; 2],
}

impl LadderSet {
    fn slot(level: Level) -> usize {
        match level {
            Level::Excited => 0,
            Level::Ground => 1,
        }
    }

    pub fn raise(&self, level: Level) -> &Op2 {
        &self.raise[Self::slot(level)]
    }

    pub fn lower(&self, level: Level) -> &Op2 {
        &self.lower[Self::slot(level)]
    }

    /// `π⁻(k)π⁺(k) = |k><k|`.
    pub fn projector(&self, level: Level) -> Op2 {
        self.lower(level) * self.raise(level)
    }

    /// `Σ_k π⁻(k)π⁺(k)`.
    pub fn completeness(&self) -> Op2 {
        Level::ORDER.iter().map(|&k| self.projector(k)).sum()
    }
}

pub fn tla_ladder() -> LadderSet {
    let mut raise = [Op2::zeros(); 2];
    let mut lower = [Op2::zeros(); 2];
    for level in Level::ORDER {
        let up = unit2(level.next().state_index(), level.state_index());
        raise[LadderSet::slot(level)] = up;
        lower[LadderSet::slot(level)] = up.adjoint();
    }
    LadderSet { raise, lower }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Moment {
    Initial,
    Final,
}

/// Meaning of one outcome axis: which atom was counted and when.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct Axis {
    pub atom: u8,
    pub moment: Moment,
}

impl Axis {
    pub const fn new(atom: u8, moment: Moment) -> Self {
        Self { atom, moment }
    }
}

/// Probability table over binary outcome axes, row-major in axis order with
/// each axis ordered `(excited, ground)`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct JointDistribution {
    probs: Vec<f64>,
    axes: Vec<Axis>,
    clamped: usize,
}

impl JointDistribution {
    pub fn new(axes: Vec<Axis>, mut probs: Vec<f64>) -> Result<Self> {
        if axes.is_empty() || axes.len() > 4 || probs.len() != 1 << axes.len() {
            return Err(Error::InvalidDistribution(format!(
                "{} entries for {} axes",
                probs.len(),
                axes.len()
            )));
        }
        let mut clamped = 0;
        for p in probs.iter_mut() {
            if !p.is_finite() || *p < -CLAMP_TOL {
                return Err(Error::InvalidDistribution(format!("entry {p} is negative")));
            }
            if *p < 0.0 {
                *p = 0.0;
                clamped += 1;
            }
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidDistribution(format!("entries sum to {total}")));
        }
        Ok(Self { probs, axes, clamped })
    }

    pub fn arity(&self) -> usize {
        self.axes.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    /// Number of slightly negative entries that were set to zero.
    pub fn clamped(&self) -> usize {
        self.clamped
    }

    pub fn get(&self, outcome: &[Level]) -> f64 {
        let idx = outcome.iter().fold(0, |acc, &l| 2 * acc + LadderSet::slot(l));
        self.probs[idx]
    }

    /// Sums out every axis not listed in `keep` (kept in the given order).
    pub fn marginal(&self, keep: &[usize]) -> JointDistribution {
        let n = self.arity();
        let mut out = vec![0.0; 1 << keep.len()];
        for (idx, &p) in self.probs.iter().enumerate() {
            let bit = |axis: usize| (idx >> (n - 1 - axis)) & 1;
            let target = keep.iter().fold(0, |acc, &axis| 2 * acc + bit(axis));
            out[target] += p;
        }
        JointDistribution {
            probs: out,
            axes: keep.iter().map(|&a| self.axes[a]).collect(),
            clamped: 0,
        }
    }

    /// Square table with the first half of the axes as rows.
    pub fn table(&self) -> Vec<Vec<f64>> {
        let half = 1 << (self.arity() / 2);
        let cols = self.probs.len() / half;
        self.probs.chunks(cols).map(|row| row.to_vec()).collect()
    }

    pub fn max_abs_diff(&self, other: &JointDistribution) -> f64 {
        self.probs.iter().zip(&other.probs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// Splits the axes in half: `(P1, P2)` for two points, `(P(12), P(34))` for four.
pub fn marginalize(j: &JointDistribution) -> (JointDistribution, JointDistribution) {
    let n = j.arity();
    let first: Vec<usize> = (0..n / 2).collect();
    let second: Vec<usize> = (n / 2..n).collect();
    (j.marginal(&first), j.marginal(&second))
}

pub const TWO_POINT_AXES: [Axis; 2] = [Axis::new(1, Moment::Initial), Axis::new(2, Moment::Final)];
pub const FOUR_POINT_AXES: [Axis; 4] = [
    Axis::new(1, Moment::Initial),
    Axis::new(2, Moment::Initial),
    Axis::new(1, Moment::Final),
    Axis::new(2, Moment::Final),
];

fn trace_with(rho: &Op4, obs: &Op4) -> f64 {
    (rho * obs).trace().re
}

/// Atom 1 counted at t = 0, atom 2 counted after the channel.
pub fn joint_two_point(rho_i: &DensityMatrix, map: &ChannelMap) -> Result<JointDistribution> {
    let ladder = tla_ladder();
    let mut probs = Vec::with_capacity(4);
    for k1 in Level::ORDER {
        let up = on_atom(ladder.raise(k1), 0);
        let down = on_atom(ladder.lower(k1), 0);
        let evolved = map.schrodinger(&(up * rho_i.matrix() * down));
        for k2 in Level::ORDER {
            probs.push(trace_with(&evolved, &on_atom(&ladder.projector(k2), 1)));
        }
    }
    JointDistribution::new(TWO_POINT_AXES.to_vec(), probs)
}

/// Both atoms counted at t = 0 and again after the channel.
pub fn joint_four_point(rho_i: &DensityMatrix, map: &ChannelMap) -> Result<JointDistribution> {
    let ladder = tla_ladder();
    let mut probs = Vec::with_capacity(16);
    for k1 in Level::ORDER {
        for k2 in Level::ORDER {
            let up = on_atom(ladder.raise(k2), 1) * on_atom(ladder.raise(k1), 0);
            let down = on_atom(ladder.lower(k1), 0) * on_atom(ladder.lower(k2), 1);
            let evolved = map.schrodinger(&(up * rho_i.matrix() * down));
            for k3 in Level::ORDER {
                for k4 in Level::ORDER {
                    let obs = on_atom(&ladder.projector(k3), 0) * on_atom(&ladder.projector(k4), 1);
                    probs.push(trace_with(&evolved, &obs));
                }
            }
        }
    }
    JointDistribution::new(FOUR_POINT_AXES.to_vec(), probs)
}

/// Closed-form `g = ±1` quasi-stationary distributions as given in the
/// reference tables. Only populations enter; coherences are ignored.
///
/// The four-point table is transcribed literally and is known not to match
/// the computed pipeline; see [`derived_joint_four`].
pub fn golden_joint(a: &TlaState, b: &TlaState, arity: usize) -> Result<JointDistribution> {
    let (e1, g1) = (a.n(), 1.0 - a.n());
    let (e2, g2) = (b.n(), 1.0 - b.n());
    match arity {
        2 => JointDistribution::new(
            TWO_POINT_AXES.to_vec(),
            vec![e2 * e1 / 4.0, (4.0 - e2) * e1 / 4.0, g2 * g1 / 4.0, (3.0 + e2) * g1 / 4.0],
        ),
        4 => {
            #[rustfmt::skip]
            let probs = vec![
                0.0,            0.0,            0.0,           g2 * e1 / 4.0,
                0.0,            e2 * e1,        g2 * e1 / 4.0, g2 * e1 / 2.0,
                0.0,            e2 * g1 / 4.0,  0.0,           0.0,
                e2 * g1 / 4.0,  e2 * g1 / 2.0,  0.0,           g2 * g1,
            ];
            JointDistribution::new(FOUR_POINT_AXES.to_vec(), probs)
        }
        _ => Err(Error::InvalidArgument(format!("arity must be 2 or 4, got {arity}"))),
    }
}

/// Four-point `g = 1` distribution worked out by hand from the two-term
/// stationary state: each counted level is relocated, the relocated product
/// state keeps singlet weight `A`, and the final count sees `|gg>` with
/// probability `1 − A` and each single excitation with `A/2`.
pub fn derived_joint_four(a: &TlaState, b: &TlaState) -> Result<JointDistribution> {
    let (e1, g1) = (a.n(), 1.0 - a.n());
    let (e2, g2) = (b.n(), 1.0 - b.n());
    let mixed = |w: f64| [0.0, w / 4.0, w / 4.0, w / 2.0];
    let mut probs = Vec::with_capacity(16);
    // rows ee, eg, ge, gg; columns ee, eg, ge, gg
    probs.extend([0.0, 0.0, 0.0, e1 * e2]);
    probs.extend(mixed(e1 * g2));
    probs.extend(mixed(g1 * e2));
    probs.extend([0.0, 0.0, 0.0, g1 * g2]);
    JointDistribution::new(FOUR_POINT_AXES.to_vec(), probs)
}

/// Cells where two tables differ by more than `tol`.
pub fn table_mismatches(source: &str, expected: &JointDistribution, actual: &JointDistribution, tol: f64) -> Vec<Mismatch> {
    let cols = 1 << (expected.arity() - expected.arity() / 2);
    expected
        .probs()
        .iter()
        .zip(actual.probs())
        .enumerate()
        .filter(|(_, (e, a))| (*e - *a).abs() > tol)
        .map(|(idx, (&e, &a))| Mismatch {
            source: source.to_string(),
            row: idx / cols + 1,
            col: idx % cols + 1,
            expected: C64::new(e, 0.0),
            actual: C64::new(a, 0.0),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::product_state;
    use crate::liouvillian::{collective_decay_generator, DecayRates};
    use crate::propagator::quasi_stationary_map;

    fn qs(g: f64) -> ChannelMap {
        quasi_stationary_map(&collective_decay_generator(&DecayRates::unit(g).unwrap())).unwrap()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < tol)
    }

    #[test]
    fn ladder_relations() {
        let l = tla_ladder();
        assert_eq!(l.projector(Level::Ground), unit2(0, 0));
        assert_eq!(l.projector(Level::Excited), unit2(1, 1));
        assert!((l.completeness() - Op2::identity()).norm() < 1e-14);
        assert_eq!(*l.raise(Level::Ground), unit2(1, 0));
        assert_eq!(*l.lower(Level::Ground), *l.raise(Level::Excited));
        let relocated = l.raise(Level::Ground) * unit2(0, 0) * l.lower(Level::Ground);
        assert_eq!(relocated, unit2(1, 1));
    }

    #[test]
    fn two_point_examples() {
        let map = qs(1.0);
        let g = TlaState::ground();
        let e = TlaState::excited();
        let gg = joint_two_point(&product_state(&g, &g), &map).unwrap();
        assert!(close(gg.probs(), &[0.0, 0.0, 0.25, 0.75], 1e-12));
        let eg = joint_two_point(&product_state(&e, &g), &map).unwrap();
        assert!(close(eg.probs(), &[0.0, 1.0, 0.0, 0.0], 1e-12));
    }

    #[test]
    fn identity_channel_gives_product_distribution() {
        let a = TlaState::new(0.3, C64::new(0.1, 0.2)).unwrap();
        let b = TlaState::new(0.8, C64::new(0.0, -0.3)).unwrap();
        let rho = product_state(&a, &b);
        let two = joint_two_point(&rho, &ChannelMap::identity()).unwrap();
        let (p1, p2) = marginalize(&two);
        for (i, x) in p1.probs().iter().enumerate() {
            for (j, y) in p2.probs().iter().enumerate() {
                assert!((two.probs()[2 * i + j] - x * y).abs() < 1e-14);
            }
        }
        // the relocated first atom reads back its own initial count
        let four = joint_four_point(&rho, &ChannelMap::identity()).unwrap();
        let (p12, p34) = marginalize(&four);
        assert!(close(p12.probs(), &[0.24, 0.06, 0.56, 0.14], 1e-14));
        assert!(close(p34.probs(), &[0.14, 0.56, 0.06, 0.24], 1e-14));
    }

    #[test]
    fn two_point_matches_reference_table_with_coherences() {
        let map = qs(1.0);
        let a = TlaState::new(0.3, C64::new(0.2, 0.1)).unwrap();
        let b = TlaState::new(0.7, C64::new(-0.1, 0.35)).unwrap();
        let got = joint_two_point(&product_state(&a, &b), &map).unwrap();
        let want = golden_joint(&a, &b, 2).unwrap();
        assert!(got.max_abs_diff(&want) < 1e-12);
        assert!(close(want.probs(), &[0.0525, 0.2475, 0.0525, 0.6475], 1e-12));
    }

    #[test]
    fn four_point_matches_derived_table() {
        let map = qs(1.0);
        for (n1, n2) in [(0.3, 0.6), (0.0, 1.0), (0.9, 0.15)] {
            let a = TlaState::population(n1).unwrap();
            let b = TlaState::new(n2, C64::new(0.0, 0.5 * (n2 * (1.0 - n2)).sqrt())).unwrap();
            let got = joint_four_point(&product_state(&a, &b), &map).unwrap();
            let want = derived_joint_four(&a, &b).unwrap();
            assert!(got.max_abs_diff(&want) < 1e-12, "({n1}, {n2})");
        }
    }

    #[test]
    fn reference_four_point_table_is_normalized_but_differs() {
        let a = TlaState::population(0.3).unwrap();
        let b = TlaState::population(0.6).unwrap();
        let reference = golden_joint(&a, &b, 4).unwrap();
        let derived = derived_joint_four(&a, &b).unwrap();
        let mut p = reference.probs().to_vec();
        let mut d = derived.probs().to_vec();
        p.sort_by(f64::total_cmp);
        d.sort_by(f64::total_cmp);
        // same entries, different cells
        assert!(close(&p, &d, 1e-15));
        assert!(!table_mismatches("four-point", &reference, &derived, 1e-9).is_empty());
    }

    #[test]
    fn antiparallel_gives_same_distributions() {
        let (plus, minus) = (qs(1.0), qs(-1.0));
        let a = TlaState::new(0.45, C64::new(0.3, -0.2)).unwrap();
        let b = TlaState::new(0.2, C64::new(0.1, 0.3)).unwrap();
        let rho = product_state(&a, &b);
        let d = |m: &ChannelMap| joint_four_point(&rho, m).unwrap();
        assert!(d(&plus).max_abs_diff(&d(&minus)) < 1e-12);
    }

    #[test]
    fn marginal_examples() {
        let uniform = JointDistribution::new(TWO_POINT_AXES.to_vec(), vec![0.25; 4]).unwrap();
        let (p1, p2) = marginalize(&uniform);
        assert!(close(p1.probs(), &[0.5, 0.5], 1e-15));
        assert!(close(p2.probs(), &[0.5, 0.5], 1e-15));

        let a = TlaState::population(0.35).unwrap();
        let b = TlaState::population(0.8).unwrap();
        let (first, _) = marginalize(&golden_joint(&a, &b, 2).unwrap());
        assert!(close(first.probs(), &[0.35, 0.65], 1e-15));

        let four = derived_joint_four(&a, &b).unwrap();
        let direct = four.marginal(&[0]);
        let nested = four.marginal(&[0, 1]).marginal(&[0]);
        assert!(close(direct.probs(), nested.probs(), 1e-15));
    }

    #[test]
    fn golden_tables_normalized() {
        for i in 0..=20 {
            for j in 0..=20 {
                let a = TlaState::population(i as f64 / 20.0).unwrap();
                let b = TlaState::population(j as f64 / 20.0).unwrap();
                assert!(golden_joint(&a, &b, 2).is_ok());
                assert!(golden_joint(&a, &b, 4).is_ok());
            }
        }
        assert!(golden_joint(&TlaState::ground(), &TlaState::ground(), 3).is_err());
    }

    #[test]
    fn distribution_validation() {
        let axes = TWO_POINT_AXES.to_vec();
        assert!(JointDistribution::new(axes.clone(), vec![0.5, 0.5, 0.1, 0.0]).is_err());
        assert!(JointDistribution::new(axes.clone(), vec![1.1, -0.1, 0.0, 0.0]).is_err());
        let d = JointDistribution::new(axes.clone(), vec![1.0, -1e-13, 0.0, 1e-13]).unwrap();
        assert_eq!(d.clamped(), 1);
        assert!(JointDistribution::new(axes, vec![1.0]).is_err());
    }
}
