//! Mission weight scheduling.
//!
//! The desired weights keep a floor of `1 − γ` on the primary mission and spread
//! the remaining `γ` by a Gibbs distribution over target distances. The applied
//! weights are the closest point to the desired ones that does not increase the
//! scalarized value of the previous plan.

use crate::cost::{CostVector, MissionSet};
use crate::error::{Error, Result};
use crate::num::{dot, Real};

/// Distances are measured either on the planar position or on the full state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DistanceMetric {
    #[default]
    Position,
    FullState,
}

impl DistanceMetric {
    pub fn distance<T: Real>(self, x: &[T], target: &[T]) -> T {
        let dims = match self {
            DistanceMetric::Position => 2.min(x.len()),
            DistanceMetric::FullState => x.len(),
        };
        x[..dims].iter().zip(&target[..dims]).map(|(&a, &b)| (a - b) * (a - b)).sum::<T>().sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightLawParams<T> {
    pub gamma: T,
    pub temperature: T,
    pub metric: DistanceMetric,
}

impl<T: Real> WeightLawParams<T> {
    pub fn new(gamma: T, temperature: T, metric: DistanceMetric) -> Result<Self> {
        if !(gamma >= T::zero() && gamma < T::one()) {
            return Err(Error::Config(format!("gamma must lie in [0, 1), got {gamma}")));
        }
        if !(temperature > T::zero()) {
            return Err(Error::Config(format!("weight temperature must be > 0, got {temperature}")));
        }
        Ok(Self { gamma, temperature, metric })
    }
}

/// A point of the probability simplex over missions.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector<T>(pub Vec<T>);

impl<T: Real> WeightVector<T> {
    /// All weight on the primary mission.
    pub fn primary_only(missions: usize) -> Self {
        let mut v = vec![T::zero(); missions];
        v[0] = T::one();
        Self(v)
    }

    pub fn values(&self) -> &[T] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_on_simplex(&self, tol: T) -> bool {
        on_simplex(&self.0, tol)
    }
}

fn on_simplex<T: Real>(v: &[T], tol: T) -> bool {
    let sum: T = v.iter().copied().sum();
    v.iter().all(|&a| a >= T::zero() && a <= T::one()) && (sum - T::one()).abs() <= tol
}

/// Softmax of `−scores/temperature`, shifted by the minimum score.
pub(crate) fn gibbs<T: Real>(scores: &[T], temperature: T) -> Vec<T> {
    let min = scores.iter().copied().fold(T::infinity(), T::min);
    let mut w: Vec<T> = scores.iter().map(|&s| (-(s - min) / temperature).exp()).collect();
    let total: T = w.iter().copied().sum();
    for x in &mut w {
        *x /= total;
    }
    w
}

/// Desired weights `[1−γ+γw⁰, γw¹, …, γwᵐ]`.
pub fn desired_weights<T: Real>(x: &[T], missions: &MissionSet<T>, params: &WeightLawParams<T>) -> WeightVector<T> {
    let distances: Vec<T> = missions.iter().map(|m| params.metric.distance(x, &m.target)).collect();
    let w = gibbs(&distances, params.temperature);
    let g = params.gamma;
    let mut alpha: Vec<T> = w.iter().map(|&wi| wi * g).collect();
    alpha[0] = T::one() - g + w[0] * g;
    WeightVector(alpha)
}

/// Weight update: the projection of `alpha_d` onto the simplex intersected with the
/// descent halfspace `cᵀα ≤ cᵀα_prev`, `c = Ĵ − F̂`.
pub fn update_weights<T: Real>(
    alpha_prev: &WeightVector<T>,
    alpha_d: &WeightVector<T>,
    j_hat: &CostVector<T>,
    f_hat: &CostVector<T>,
) -> Result<WeightVector<T>> {
    let n = alpha_prev.len();
    if alpha_d.len() != n || j_hat.len() != n || f_hat.len() != n {
        return Err(Error::Contract("weight update operands must share one length".into()));
    }
    let c = j_hat.sub(f_hat);
    let bound = dot(&c.0, &alpha_prev.0);
    project_simplex_halfspace(&alpha_d.0, &c.0, bound).map(WeightVector)
}

/// Euclidean projection onto the probability simplex (sort-based, exact).
pub fn project_simplex<T: Real>(v: &[T]) -> Vec<T> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("finite input"));
    let mut cumulative = T::zero();
    let mut theta = T::zero();
    for (j, &s) in sorted.iter().enumerate() {
        cumulative += s;
        let candidate = (cumulative - T::one()) / T::from_count(j + 1);
        if s - candidate > T::zero() {
            theta = candidate;
        }
    }
    v.iter().map(|&x| (x - theta).max(T::zero())).collect()
}

const BISECTION_TOL: f64 = 1e-10;
const MAX_BRACKET_DOUBLINGS: usize = 200;
const MAX_BISECTIONS: usize = 300;

/// Projection of `v` onto `{α ∈ simplex : cᵀα ≤ b}`.
///
/// If the plain simplex projection violates the halfspace the constraint is active, and the
/// solution is `proj(v − μc)` for the multiplier `μ > 0` making it tight; `μ` is bisected.
/// The returned point is always on the feasible side of the bracket.
pub fn project_simplex_halfspace<T: Real>(v: &[T], c: &[T], b: T) -> Result<Vec<T>> {
    if v.len() != c.len() || v.is_empty() {
        return Err(Error::Contract("projection needs equal, non-empty v and c".into()));
    }
    let min_c = c.iter().copied().fold(T::infinity(), T::min);
    if min_c > b {
        return Err(Error::Infeasible(format!("simplex lies outside cᵀα ≤ {b} (min c = {min_c})")));
    }
    if on_simplex(v, T::lit(1e-12)) && dot(c, v) <= b {
        return Ok(v.to_vec());
    }
    let base = project_simplex(v);
    if dot(c, &base) <= b {
        return Ok(base);
    }

    let at = |mu: T| -> Vec<T> {
        let shifted: Vec<T> = v.iter().zip(c).map(|(&vi, &ci)| vi - mu * ci).collect();
        project_simplex(&shifted)
    };
    let scale = c.iter().fold(T::zero(), |acc, &ci| acc.max(ci.abs()));
    let mut lo = T::zero();
    let mut hi = T::one() / scale;
    let mut best = at(hi);
    let mut doublings = 0;
    while dot(c, &best) > b {
        lo = hi;
        hi = hi + hi;
        best = at(hi);
        doublings += 1;
        if doublings > MAX_BRACKET_DOUBLINGS {
            // only the argmin-c face remains; it is feasible because min_c <= b
            return Ok(vertex_face(c, min_c));
        }
    }
    let tol = T::lit(BISECTION_TOL);
    for _ in 0..MAX_BISECTIONS {
        let gap = dot(c, &best) - b;
        if gap.abs() <= tol || hi - lo <= T::epsilon() * hi {
            break;
        }
        let mid = (lo + hi) / T::lit(2.0);
        let trial = at(mid);
        if dot(c, &trial) > b {
            lo = mid;
        } else {
            hi = mid;
            best = trial;
        }
    }
    Ok(best)
}

fn vertex_face<T: Real>(c: &[T], min_c: T) -> Vec<T> {
    let hits = c.iter().filter(|&&ci| ci == min_c).count();
    c.iter().map(|&ci| if ci == min_c { T::one() / T::from_count(hits) } else { T::zero() }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::Mission;
    use proptest::prelude::*;

    fn missions(targets: &[[f64; 4]]) -> MissionSet<f64> {
        MissionSet::new(targets.iter().map(|t| Mission::new(t.to_vec(), 2)).collect(), 4, 2).unwrap()
    }

    /// Grid search over the 3-simplex, then a finer local grid around the coarse winner.
    fn grid_oracle(v: &[f64], c: &[f64], b: f64) -> Vec<f64> {
        let mut best: Option<(f64, [f64; 3])> = None;
        let consider = |a0: f64, a1: f64, best: &mut Option<(f64, [f64; 3])>| {
            let a2 = 1.0 - a0 - a1;
            if a0 < 0.0 || a1 < 0.0 || a2 < -1e-15 {
                return;
            }
            let a = [a0, a1, a2.max(0.0)];
            if c[0] * a[0] + c[1] * a[1] + c[2] * a[2] > b + 1e-12 {
                return;
            }
            let d = (0..3).map(|i| (a[i] - v[i]).powi(2)).sum::<f64>();
            if best.map_or(true, |(bd, _)| d < bd) {
                *best = Some((d, a));
            }
        };
        for i in 0..=1000 {
            for j in 0..=(1000 - i) {
                consider(i as f64 * 1e-3, j as f64 * 1e-3, &mut best);
            }
        }
        let centre = best.map(|(_, a)| a).unwrap_or([1.0 / 3.0; 3]);
        for i in -300..=300 {
            for j in -300..=300 {
                consider(centre[0] + i as f64 * 1e-5, centre[1] + j as f64 * 1e-5, &mut best);
            }
        }
        best.expect("feasible point").1.to_vec()
    }

    #[test]
    fn simplex_projection_basics() {
        assert_eq!(project_simplex(&[2.0, 0.0]), vec![1.0, 0.0]);
        assert_eq!(project_simplex(&[1.0, 0.0, 0.0]), vec![1.0, 0.0, 0.0]);
        let p = project_simplex(&[0.5f64, 0.5, 0.5]);
        assert!(p.iter().all(|&x| (x - 1.0 / 3.0).abs() < 1e-15));
    }

    #[test]
    fn halfspace_projection_fixed_point_and_vacuous() {
        let v = [0.2, 0.3, 0.5];
        assert_eq!(project_simplex_halfspace(&v, &[1.0, 2.0, 3.0], 10.0).unwrap(), v.to_vec());
        assert_eq!(project_simplex_halfspace(&[2.0, 0.0], &[0.0, 0.0], 0.0).unwrap(), vec![1.0, 0.0]);
        assert!(matches!(project_simplex_halfspace(&v, &[1.0, 1.0, 1.0], 0.5), Err(Error::Infeasible(_))));
    }

    #[test]
    fn update_weights_examples() {
        let prev = WeightVector(vec![1.0 / 3.0; 3]);
        let feasible = WeightVector(vec![0.5, 0.3, 0.2]);
        let j = CostVector(vec![0.0, 1.0, 2.0]);
        let f = CostVector(vec![0.0; 3]);
        assert_eq!(update_weights(&prev, &feasible, &j, &f).unwrap(), feasible);
        assert_eq!(update_weights(&prev, &feasible, &f, &f).unwrap(), feasible);

        let alpha_d = WeightVector(vec![0.1, 0.2, 0.7]);
        let got = update_weights(&prev, &alpha_d, &j, &f).unwrap();
        let want = grid_oracle(&alpha_d.0, &j.0, 1.0);
        for (a, b) in got.0.iter().zip(&want) {
            assert!((a - b).abs() < 1e-3, "{got:?} vs {want:?}");
        }
        assert!(dot(&j.0, &got.0) <= 1.0 + 1e-9);
        // KKT: α = α_d − μc − ν1 with ν = −μ and the constraint tight gives μ = 0.3
        assert!((got.0[0] - 0.4).abs() < 1e-8 && (got.0[1] - 0.2).abs() < 1e-8 && (got.0[2] - 0.4).abs() < 1e-8);
    }

    #[test]
    fn random_instances_match_grid_oracle() {
        let mut s = 0x9e3779b97f4a7c15u64;
        let mut next = || {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            (s >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..12 {
            let prev = project_simplex(&[next(), next(), next()]);
            let v = project_simplex(&[next(), next(), next()]);
            let c = [next() * 10.0 - 5.0, next() * 10.0 - 5.0, next() * 10.0 - 5.0];
            let b = dot(&c, &prev);
            let got = project_simplex_halfspace(&v, &c, b).unwrap();
            let want = grid_oracle(&v, &c, b);
            for (a, w) in got.iter().zip(&want) {
                assert!((a - w).abs() < 1e-3, "{got:?} vs {want:?}");
            }
        }
    }

    #[test]
    fn desired_weights_examples() {
        let set = missions(&[[10.0, 10.0, 0.0, 0.0], [2.0, 6.0, 0.0, 0.0], [8.0, 6.0, 0.0, 0.0]]);
        let zero_gamma = WeightLawParams::new(0.0, 1.0, DistanceMetric::Position).unwrap();
        assert_eq!(desired_weights(&[3.0, 1.0, 0.0, 0.0], &set, &zero_gamma).0, vec![1.0, 0.0, 0.0]);

        let pair = missions(&[[1.0, 0.0, 0.0, 0.0], [-1.0, 0.0, 0.0, 0.0]]);
        let half = WeightLawParams::new(0.5, 1.0, DistanceMetric::Position).unwrap();
        let a = desired_weights(&[0.0, 0.0, 0.0, 0.0], &pair, &half);
        assert!((a.0[0] - 0.75).abs() < 1e-15 && (a.0[1] - 0.25).abs() < 1e-15);

        // distances (1, 2, 3), λ_α = 1, γ = 0.66, evaluated directly from the exponentials
        let row = missions(&[[1.0, 0.0, 0.0, 0.0], [2.0, 0.0, 0.0, 0.0], [3.0, 0.0, 0.0, 0.0]]);
        let p = WeightLawParams::new(0.66, 1.0, DistanceMetric::Position).unwrap();
        let a = desired_weights(&[0.0; 4], &row, &p);
        let e: Vec<f64> = [1.0f64, 2.0, 3.0].iter().map(|d| (-d).exp()).collect();
        let z: f64 = e.iter().sum();
        let want = [1.0 - 0.66 + 0.66 * e[0] / z, 0.66 * e[1] / z, 0.66 * e[2] / z];
        for (g, w) in a.0.iter().zip(&want) {
            assert!((g - w).abs() < 1e-15);
        }
        assert!((want[0] - 0.77898).abs() < 1e-4);
    }

    #[test]
    fn metric_choice() {
        let x = [0.0, 0.0, 3.0, 4.0];
        let t = [3.0, 4.0, 0.0, 0.0];
        assert_eq!(DistanceMetric::Position.distance(&x, &t), 5.0);
        assert!((DistanceMetric::FullState.distance(&x, &t) - 50f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn recursive_feasibility_at_zero_gamma() {
        let set = missions(&[[10.0, 10.0, 0.0, 0.0], [2.0, 6.0, 0.0, 0.0], [8.0, 6.0, 0.0, 0.0]]);
        let p = WeightLawParams::new(0.0, 1.0, DistanceMetric::Position).unwrap();
        let mut alpha = WeightVector::primary_only(3);
        for k in 0..20 {
            let ad = desired_weights(&[k as f64 * 0.3, 0.1, 0.0, 0.0], &set, &p);
            let j = CostVector(vec![100.0 - k as f64, 3.0 * k as f64, 1.0]);
            alpha = update_weights(&alpha, &ad, &j, &CostVector(vec![1.0, 0.5, 0.0])).unwrap();
            assert_eq!(alpha.0, vec![1.0, 0.0, 0.0]);
        }
    }

    #[test]
    fn params_validation() {
        assert!(WeightLawParams::<f64>::new(1.0, 1.0, DistanceMetric::Position).is_err());
        assert!(WeightLawParams::<f64>::new(-0.1, 1.0, DistanceMetric::Position).is_err());
        assert!(WeightLawParams::<f64>::new(0.5, 0.0, DistanceMetric::Position).is_err());
    }

    #[test]
    fn f32_projection() {
        let got = project_simplex_halfspace(&[0.1f32, 0.2, 0.7], &[0.0, 1.0, 2.0], 1.0).unwrap();
        assert!((got[0] - 0.4).abs() < 1e-4 && (got[1] - 0.2).abs() < 1e-4 && (got[2] - 0.4).abs() < 1e-4);
    }

    proptest! {
        #[test]
        fn desired_weights_stay_on_simplex(x in prop::collection::vec(-20.0..20.0f64, 4), gamma in 0.0..0.999f64, temp in 0.05..5.0f64) {
            let set = missions(&[[10.0, 10.0, 0.0, 0.0], [2.0, 6.0, 0.0, 0.0], [-4.0, 8.0, 0.0, 0.0]]);
            let p = WeightLawParams::new(gamma, temp, DistanceMetric::Position).unwrap();
            let a = desired_weights(&x, &set, &p);
            prop_assert!(a.is_on_simplex(1e-12));
            prop_assert!(a.0[0] >= 1.0 - gamma - 1e-15);
        }

        #[test]
        fn closer_primary_means_more_primary_weight(theta in 0.0..3.0f64, step in 0.01..0.1f64, gamma in 0.05..0.95f64) {
            // x on a circle of radius 5 around p¹ keeps d(x, p¹) fixed while d(x, p⁰) grows with θ
            let set = missions(&[[10.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 0.0]]);
            let p = WeightLawParams::new(gamma, 1.0, DistanceMetric::Position).unwrap();
            let on_circle = |t: f64| [5.0 * t.cos(), 5.0 * t.sin(), 0.0, 0.0];
            let near = desired_weights(&on_circle(theta), &set, &p);
            let far = desired_weights(&on_circle(theta + step), &set, &p);
            prop_assert!(near.0[0] > far.0[0]);
        }

        #[test]
        fn update_respects_descent_and_simplex(v in prop::collection::vec(0.0..1.0f64, 3), prev in prop::collection::vec(0.0..1.0f64, 3), c in prop::collection::vec(-50.0..50.0f64, 3)) {
            let prev = WeightVector(project_simplex(&prev));
            let ad = WeightVector(project_simplex(&v));
            let got = update_weights(&prev, &ad, &CostVector(c.clone()), &CostVector(vec![0.0; 3])).unwrap();
            prop_assert!(got.is_on_simplex(1e-9));
            prop_assert!(dot(&c, &got.0) <= dot(&c, &prev.0) + 1e-9);
        }
    }
}
