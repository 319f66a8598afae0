//! Shannon information between counted quanta, information surfaces over
//! initial populations, and their maxima.

use rayon::prelude::*;

use crate::algebra::{product_state, TlaState};
use crate::liouvillian::{collective_decay_generator, DecayRates};
use crate::measurement::{joint_four_point, joint_two_point, marginalize, JointDistribution, NORMALIZATION_TOL};
use crate::propagator::{quasi_stationary_map, ChannelMap};
use crate::{Error, Result};

pub const COARSE_GRID: usize = 101;
pub const REFINE_TOL: f64 = 1e-6;

/// Entries closer to the maximum than this are treated as equivalent optima.
const TIE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InfoMode {
    /// First atom at t = 0 against second atom at the end.
    Two,
    /// Both atoms at t = 0 against both atoms at the end.
    Four,
}

impl InfoMode {
    pub fn arity(self) -> usize {
        match self {
            InfoMode::Two => 2,
            InfoMode::Four => 4,
        }
    }
}

/// Base-2 entropy with `0 log 0 = 0`.
pub fn entropy_bits(w: &[f64]) -> Result<f64> {
    if w.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(Error::InvalidDistribution("negative or non-finite entry".into()));
    }
    let total: f64 = w.iter().sum();
    if (total - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::InvalidDistribution(format!("entries sum to {total}")));
    }
    Ok(entropy_unchecked(w))
}

fn entropy_unchecked(w: &[f64]) -> f64 {
    -w.iter().filter(|&&p| p > 0.0).map(|p| p * p.log2()).sum::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct InfoResult {
    pub value_bits: f64,
    pub h_first: f64,
    pub h_second: f64,
    pub h_joint: f64,
}

/// `H(first half) + H(second half) − H(joint)`, accumulated as
/// `Σ p log₂(p / (p₁ p₂))` so independent or deterministic tables give exactly 0.
pub fn mutual_information(j: &JointDistribution) -> InfoResult {
    let (first, second) = marginalize(j);
    let cols = second.probs().len();
    let value_bits = j
        .probs()
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > 0.0)
        .map(|(idx, &p)| p * (p / (first.probs()[idx / cols] * second.probs()[idx % cols])).log2())
        .sum();
    InfoResult {
        value_bits,
        h_first: entropy_unchecked(first.probs()),
        h_second: entropy_unchecked(second.probs()),
        h_joint: entropy_unchecked(j.probs()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SurfacePoint {
    pub n1: f64,
    pub n2: f64,
    pub info_bits: f64,
}

/// Quasi-stationary channel of the `g = 1` collective decay.
pub fn unit_exchange_map() -> Result<ChannelMap> {
    quasi_stationary_map(&collective_decay_generator(&DecayRates::unit(1.0)?))
}

/// Information for diagonal initial states with excited populations `n1`, `n2`.
pub fn info_at(map: &ChannelMap, mode: InfoMode, n1: f64, n2: f64) -> Result<InfoResult> {
    let rho = product_state(&TlaState::population(n1)?, &TlaState::population(n2)?);
    let joint = match mode {
        InfoMode::Two => joint_two_point(&rho, map)?,
        InfoMode::Four => joint_four_point(&rho, map)?,
    };
    Ok(mutual_information(&joint))
}

fn grid_coord(i: usize, grid_n: usize) -> f64 {
    // exact endpoints, and symmetric points stay symmetric
    if 2 * i <= grid_n - 1 {
        i as f64 / (grid_n - 1) as f64
    } else {
        1.0 - (grid_n - 1 - i) as f64 / (grid_n - 1) as f64
    }
}

/// Information over a uniform `grid_n × grid_n` grid, row-major in `n1`.
pub fn info_surface_for(map: &ChannelMap, mode: InfoMode, grid_n: usize) -> Result<Vec<SurfacePoint>> {
    if grid_n < 2 {
        return Err(Error::InvalidArgument(format!("grid must have at least 2 points, got {grid_n}")));
    }
    (0..grid_n * grid_n)
        .into_par_iter()
        .map(|idx| {
            let n1 = grid_coord(idx / grid_n, grid_n);
            let n2 = grid_coord(idx % grid_n, grid_n);
            info_at(map, mode, n1, n2).map(|r| SurfacePoint { n1, n2, info_bits: r.value_bits })
        })
        .collect()
}

/// Surface of the `g = 1` quasi-stationary pipeline.
pub fn info_surface(mode: InfoMode, grid_n: usize) -> Result<Vec<SurfacePoint>> {
    info_surface_for(&unit_exchange_map()?, mode, grid_n)
}

/// Edge of the population square on which the information vanishes.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Plateau {
    pub fixed: &'static str,
    pub at: f64,
    pub range: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct OptimumReport {
    pub mode: InfoMode,
    pub value_bits: f64,
    /// Every argmax, sorted by `n1`. A continuous ridge of maxima shows up as
    /// many points along the ridge.
    pub points: Vec<SurfacePoint>,
    pub zero_plateaus: Vec<Plateau>,
}

/// Maximum of `f` on `[lo, hi]` by golden-section search.
fn golden_max(f: &impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let mid = 0.5 * (a + b);
    // endpoints of the original bracket may sit on the boundary of [0, 1]
    [lo, mid, hi].into_iter().max_by(|x, y| f(*x).total_cmp(&f(*y))).unwrap_or(mid)
}

fn refine(f: &impl Fn(f64, f64) -> f64, start: (f64, f64), half_width: f64) -> (f64, f64) {
    let (mut x, mut y) = start;
    let bracket = |c: f64| ((c - half_width).max(0.0), (c + half_width).min(1.0));
    let tol = REFINE_TOL * 1e-2;
    for _ in 0..100 {
        let (x_lo, x_hi) = bracket(x);
        let nx = golden_max(&|t| f(t, y), x_lo, x_hi, tol);
        let (y_lo, y_hi) = bracket(y);
        let ny = golden_max(&|t| f(nx, t), y_lo, y_hi, tol);
        let moved = (nx - x).abs().max((ny - y).abs());
        x = nx;
        y = ny;
        if moved < tol {
            break;
        }
    }
    (x, y)
}

fn local_maxima(values: &[f64], n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let v = values[i * n + j];
            let mut is_max = true;
            for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    let (a, b) = (i as i64 + di, j as i64 + dj);
                    if (di, dj) == (0, 0) || a < 0 || b < 0 || a >= n as i64 || b >= n as i64 {
                        continue;
                    }
                    if values[a as usize * n + b as usize] > v {
                        is_max = false;
                    }
                }
            }
            if is_max {
                out.push((i, j));
            }
        }
    }
    out
}

fn zero_plateaus(values: &[f64], n: usize) -> Vec<Plateau> {
    let zero = |k: usize| values[k].abs() < 1e-12;
    let edges: [(&'static str, f64, Box<dyn Fn(usize) -> usize>); 4] = [
        ("n1", 0.0, Box::new(|k| k)),
        ("n1", 1.0, Box::new(move |k| (n - 1) * n + k)),
        ("n2", 0.0, Box::new(move |k| k * n)),
        ("n2", 1.0, Box::new(move |k| k * n + n - 1)),
    ];
    edges
        .into_iter()
        .filter(|(_, _, idx)| (0..n).all(|k| zero(idx(k))))
        .map(|(fixed, at, _)| Plateau { fixed, at, range: (0.0, 1.0) })
        .collect()
}

/// Coarse grid scan of the `g = 1` pipeline followed by coordinate-wise
/// golden-section refinement of every competitive local maximum.
pub fn optimize(mode: InfoMode) -> Result<OptimumReport> {
    optimize_for(&unit_exchange_map()?, mode)
}

pub fn optimize_for(map: &ChannelMap, mode: InfoMode) -> Result<OptimumReport> {
    let n = COARSE_GRID;
    let surface = info_surface_for(map, mode, n)?;
    let values: Vec<f64> = surface.iter().map(|p| p.info_bits).collect();
    let best_coarse = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let step = 1.0 / (n - 1) as f64;

    let f = |x: f64, y: f64| info_at(map, mode, x.clamp(0.0, 1.0), y.clamp(0.0, 1.0)).map_or(f64::NEG_INFINITY, |r| r.value_bits);
    let mut refined: Vec<SurfacePoint> = local_maxima(&values, n)
        .into_par_iter()
        .filter(|&(i, j)| values[i * n + j] > best_coarse - 1e-3)
        .map(|(i, j)| {
            let (x, y) = refine(&f, (surface[i * n + j].n1, surface[i * n + j].n2), step);
            SurfacePoint { n1: x, n2: y, info_bits: f(x, y) }
        })
        .collect();
    let value = refined.iter().map(|p| p.info_bits).fold(f64::NEG_INFINITY, f64::max);
    refined.retain(|p| p.info_bits > value - TIE_TOL);
    refined.sort_by(|a, b| a.n1.total_cmp(&b.n1).then(a.n2.total_cmp(&b.n2)));
    refined.dedup_by(|a, b| (a.n1 - b.n1).abs() < 10.0 * REFINE_TOL && (a.n2 - b.n2).abs() < 10.0 * REFINE_TOL);
    Ok(OptimumReport { mode, value_bits: value, points: refined, zero_plateaus: zero_plateaus(&values, n) })
}

/// The reference closed-form expression for the two-point maximum,
/// `(3/2 − 3√37/16) log₂(3/2 − 3√37/16) − (2 − √37/4) log₂(2 − √37/4)
///  − (1/2 + √37/16) log₂(1/2 + √37/16)`.
pub fn closed_form_max() -> f64 {
    let r = 37f64.sqrt();
    let xlog = |x: f64| x * x.log2();
    xlog(1.5 - 3.0 * r / 16.0) - xlog(2.0 - r / 4.0) - xlog(0.5 + r / 16.0)
}

/// Population at which the reference closed form is attained, `−1 + √37/4`.
pub fn closed_form_population() -> f64 {
    -1.0 + 37f64.sqrt() / 4.0
}

/// Exact two-point optimum of the computed pipeline at `n2 = 0`: with
/// `x = 1 − n1` the information is `h(x/4) − x h(1/4)`, stationary at
/// `x = 108/283`.
pub fn derived_two_point_optimum() -> (f64, f64) {
    let h = |p: f64| -(p * p.log2() + (1.0 - p) * (1.0 - p).log2());
    let x = 108.0 / 283.0;
    (1.0 - x, h(x / 4.0) - x * h(0.25))
}

/// Four-point optimum of the computed pipeline, `log₂ 5 − 2`. The four-point
/// information depends on the populations only through
/// `w = n1 + n2 − 2 n1 n2` and peaks at `w = 2/5`, so the maximum is attained
/// on two curves, through `(0, 2/5)`, `(2/5, 0)` and `(3/5, 1)`, `(1, 3/5)`.
pub fn derived_four_point_optimum() -> f64 {
    5f64.log2() - 2.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::{golden_joint, TWO_POINT_AXES};
    use crate::C64;

    fn joint(probs: Vec<f64>) -> JointDistribution {
        JointDistribution::new(TWO_POINT_AXES.to_vec(), probs).unwrap()
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy_bits(&[1.0, 0.0]).unwrap(), 0.0);
        assert!((entropy_bits(&[0.5, 0.5]).unwrap() - 1.0).abs() < 1e-15);
        assert!((entropy_bits(&[0.25, 0.75]).unwrap() - 0.811_278_124_459_132_8).abs() < 1e-12);
        assert!(entropy_bits(&[0.5, 0.6]).is_err());
        assert!(entropy_bits(&[1.5, -0.5]).is_err());
    }

    #[test]
    fn information_examples() {
        let product = joint(vec![0.12, 0.28, 0.18, 0.42]);
        assert!(mutual_information(&product).value_bits.abs() < 1e-12);
        let correlated = joint(vec![0.5, 0.0, 0.0, 0.5]);
        assert!((mutual_information(&correlated).value_bits - 1.0).abs() < 1e-12);
        let r = mutual_information(&correlated);
        assert!((r.value_bits - (r.h_first + r.h_second - r.h_joint)).abs() < 1e-12);
    }

    #[test]
    fn reference_table_at_reference_population() {
        let a = TlaState::population(closed_form_population()).unwrap();
        let b = TlaState::ground();
        let i = mutual_information(&golden_joint(&a, &b, 2).unwrap()).value_bits;
        assert!((i - 0.14).abs() < 0.005);
        assert!((i - closed_form_max()).abs() < 1e-12);
    }

    #[test]
    fn closed_form_value() {
        let v = closed_form_max();
        assert!((v - 0.140_011_156_42).abs() < 1e-10);
        assert!(v > 0.0 && v < 1.0);
    }

    #[test]
    fn derived_optimum_is_stationary() {
        let map = unit_exchange_map().unwrap();
        let (n1, v) = derived_two_point_optimum();
        let at = |x: f64| info_at(&map, InfoMode::Two, x, 0.0).unwrap().value_bits;
        assert!((at(n1) - v).abs() < 1e-12);
        assert!(at(n1 + 1e-4) < v && at(n1 - 1e-4) < v);
        assert!((v - 0.144_658).abs() < 1e-6);
        let four = info_at(&map, InfoMode::Four, 1.0, 0.6).unwrap().value_bits;
        assert!((four - derived_four_point_optimum()).abs() < 1e-12);
    }

    #[test]
    fn optimize_two_point() {
        let r = optimize(InfoMode::Two).unwrap();
        let (n1, v) = derived_two_point_optimum();
        assert!((r.value_bits - v).abs() < 1e-9);
        assert_eq!(r.points.len(), 2);
        assert!((r.points[0].n1 - (1.0 - n1)).abs() < 1e-6 && r.points[0].n2 == 1.0);
        assert!((r.points[1].n1 - n1).abs() < 1e-6 && r.points[1].n2 == 0.0);
        assert!(r.zero_plateaus.iter().any(|p| p.fixed == "n1" && p.at == 0.0));
        assert!(r.zero_plateaus.iter().any(|p| p.fixed == "n1" && p.at == 1.0));
    }

    #[test]
    fn optimize_four_point() {
        let r = optimize(InfoMode::Four).unwrap();
        assert!((r.value_bits - derived_four_point_optimum()).abs() < 1e-9);
        // the maximum is a ridge: every point with n1 + n2 − 2 n1 n2 = 2/5
        assert!(r.points.len() > 2);
        for p in &r.points {
            assert!((p.n1 + p.n2 - 2.0 * p.n1 * p.n2 - 0.4).abs() < 1e-5, "({}, {})", p.n1, p.n2);
        }
        assert!(r.points.iter().any(|p| (p.n1 - 1.0).abs() < 1e-9 && (p.n2 - 0.6).abs() < 1e-6));
        assert!(r.points.iter().any(|p| (p.n1 - 0.6).abs() < 1e-6 && (p.n2 - 1.0).abs() < 1e-9));
    }

    #[test]
    fn four_point_information_depends_on_mixing_only() {
        let map = unit_exchange_map().unwrap();
        let w = |a: f64, b: f64| a + b - 2.0 * a * b;
        let reference = info_at(&map, InfoMode::Four, 1.0, 0.6).unwrap().value_bits;
        for a in [0.0, 0.1, 0.25, 0.7, 0.85] {
            let b = (0.4 - a) / (1.0 - 2.0 * a);
            assert!((w(a, b) - 0.4).abs() < 1e-12);
            let v = info_at(&map, InfoMode::Four, a, b).unwrap().value_bits;
            assert!((v - reference).abs() < 1e-12, "a = {a}");
        }
    }

    #[test]
    fn surface_ordering_and_corner() {
        let s = info_surface(InfoMode::Two, 5).unwrap();
        assert_eq!(s.len(), 25);
        assert_eq!((s[1].n1, s[1].n2), (0.0, 0.25));
        assert_eq!((s[5].n1, s[5].n2), (0.25, 0.0));
        assert!(s[0].info_bits.abs() < 1e-12);
        assert!(info_surface(InfoMode::Two, 1).is_err());
    }

    #[test]
    fn ridges_have_equal_height() {
        let map = unit_exchange_map().unwrap();
        let (n1, _) = derived_two_point_optimum();
        let low = info_at(&map, InfoMode::Two, n1, 0.0).unwrap().value_bits;
        let high = info_at(&map, InfoMode::Two, 1.0 - n1, 1.0).unwrap().value_bits;
        assert!((low - high).abs() < 1e-9);
    }

    #[test]
    fn coherences_do_not_change_two_point_information() {
        let map = unit_exchange_map().unwrap();
        for (n1, n2) in [(0.3, 0.4), (0.62, 0.05), (0.5, 0.9)] {
            let plain = info_at(&map, InfoMode::Two, n1, n2).unwrap().value_bits;
            let bound = |n: f64| (n * (1.0 - n)).sqrt();
            let a = TlaState::new(n1, C64::from_polar(bound(n1), 0.7)).unwrap();
            let b = TlaState::new(n2, C64::from_polar(bound(n2), -2.1)).unwrap();
            let j = joint_two_point(&product_state(&a, &b), &map).unwrap();
            assert!((mutual_information(&j).value_bits - plain).abs() < 1e-9);
        }
    }

    #[test]
    fn information_bounded_by_marginals() {
        let map = unit_exchange_map().unwrap();
        for mode in [InfoMode::Two, InfoMode::Four] {
            for p in info_surface_for(&map, mode, 11).unwrap() {
                let r = info_at(&map, mode, p.n1, p.n2).unwrap();
                assert!(r.value_bits >= -1e-12);
                assert!(r.value_bits <= r.h_first.min(r.h_second) + 1e-12);
            }
        }
    }
}
