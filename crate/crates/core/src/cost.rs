//! Quadratic mission costs, obstacle soft constraints and the per-mission cost vector.

use crate::dynamics::ModeId;
use crate::error::{Error, Result};
use crate::multi_horizon::{BranchStates, BranchView, MultiHorizonInput, MultiHorizonTrajectory};
use crate::num::Real;

/// Dense row-major square matrix for the small weights used here.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix<T> {
    dim: usize,
    data: Vec<T>,
}

impl<T: Real> SquareMatrix<T> {
    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![T::one(); dim])
    }

    pub fn diagonal(diag: &[T]) -> Self {
        let dim = diag.len();
        let mut data = vec![T::zero(); dim * dim];
        for (i, &d) in diag.iter().enumerate() {
            data[i * dim + i] = d;
        }
        Self { dim, data }
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::dims("matrix row", dim, row.len()));
            }
            data.extend_from_slice(row);
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        self.data[r * self.dim + c]
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        self.data.chunks(self.dim.max(1)).map(<[T]>::to_vec).collect()
    }

    pub fn scaled(&self, c: T) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|&x| x * c).collect() }
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.dim).all(|r| (0..r).all(|c| self.get(r, c) == self.get(c, r)))
    }

    /// Symmetric and positive semidefinite, tested by a Cholesky factorization of
    /// `M + εI` with `ε` relative to the trace.
    pub fn is_psd(&self) -> bool {
        if !self.is_symmetric() {
            return false;
        }
        let trace: T = (0..self.dim).map(|i| self.get(i, i).abs()).sum();
        let eps = T::lit(1e-12) * (trace + T::one());
        let mut shifted = self.clone();
        for i in 0..self.dim {
            shifted.data[i * self.dim + i] += eps;
        }
        cholesky(&shifted).is_some()
    }

    /// `dᵀ M d` with `d = x − target`.
    #[inline]
    pub fn quad_form_diff(&self, x: &[T], target: &[T]) -> T {
        let n = self.dim;
        let mut acc = T::zero();
        for r in 0..n {
            let dr = x[r] - target[r];
            let row = &self.data[r * n..r * n + n];
            let mut inner = T::zero();
            for c in 0..n {
                inner += row[c] * (x[c] - target[c]);
            }
            acc += dr * inner;
        }
        acc
    }

    #[inline]
    pub fn quad_form(&self, v: &[T]) -> T {
        let n = self.dim;
        let mut acc = T::zero();
        for r in 0..n {
            let row = &self.data[r * n..r * n + n];
            let mut inner = T::zero();
            for c in 0..n {
                inner += row[c] * v[c];
            }
            acc += v[r] * inner;
        }
        acc
    }
}

/// Lower-triangular Cholesky factor (row-major), `None` unless positive definite.
pub fn cholesky<T: Real>(m: &SquareMatrix<T>) -> Option<Vec<T>> {
    let n = m.dim;
    let mut l = vec![T::zero(); n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = m.get(i, j);
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if !(s > T::zero()) {
                    return None;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Some(l)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mission<T> {
    pub target: Vec<T>,
    pub q: SquareMatrix<T>,
    pub r: SquareMatrix<T>,
    pub mode: ModeId,
}

impl<T: Real> Mission<T> {
    /// Mission with identity state and input weights in mode 0.
    pub fn new(target: Vec<T>, input_dim: usize) -> Self {
        let n = target.len();
        Self { target, q: SquareMatrix::identity(n), r: SquareMatrix::identity(input_dim), mode: 0 }
    }

    pub fn with_weights(mut self, q: SquareMatrix<T>, r: SquareMatrix<T>) -> Self {
        self.q = q;
        self.r = r;
        self
    }

    pub fn with_mode(mut self, mode: ModeId) -> Self {
        self.mode = mode;
        self
    }

    /// `(x−p)ᵀQ(x−p)`.
    #[inline]
    pub fn terminal_cost(&self, x: &[T]) -> T {
        self.q.quad_form_diff(x, &self.target)
    }
}

/// Primary mission at index 0, alternatives after.
#[derive(Debug, Clone, PartialEq)]
pub struct MissionSet<T> {
    missions: Vec<Mission<T>>,
}

impl<T: Real> MissionSet<T> {
    pub fn new(missions: Vec<Mission<T>>, state_dim: usize, input_dim: usize) -> Result<Self> {
        if missions.is_empty() {
            return Err(Error::Config("a mission set needs a primary mission".into()));
        }
        for (i, m) in missions.iter().enumerate() {
            if m.target.len() != state_dim {
                return Err(Error::Config(format!(
                    "mission {i}: target has {} components, state dimension is {state_dim}",
                    m.target.len()
                )));
            }
            if m.q.dim() != state_dim || m.r.dim() != input_dim {
                return Err(Error::Config(format!("mission {i}: Q must be {state_dim}x{state_dim}, R {input_dim}x{input_dim}")));
            }
            if !m.q.is_psd() || !m.r.is_psd() {
                return Err(Error::Config(format!("mission {i}: Q and R must be symmetric positive semidefinite")));
            }
        }
        Ok(Self { missions })
    }

    pub fn len(&self) -> usize {
        self.missions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.missions.is_empty()
    }

    pub fn alternatives(&self) -> usize {
        self.missions.len() - 1
    }

    pub fn get(&self, i: usize) -> &Mission<T> {
        &self.missions[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Mission<T>> {
        self.missions.iter()
    }

    pub fn modes(&self) -> Vec<ModeId> {
        self.missions.iter().map(|m| m.mode).collect()
    }
}

/// Axis-aligned box over the two position coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb<T> {
    pub min: [T; 2],
    pub max: [T; 2],
}

impl<T: Real> Aabb<T> {
    pub fn new(min: [T; 2], max: [T; 2]) -> Result<Self> {
        if min[0] > max[0] || min[1] > max[1] {
            return Err(Error::Config("obstacle box min corner must not exceed max corner".into()));
        }
        Ok(Self { min, max })
    }

    /// Closed-box membership of the position `(x[0], x[1])`.
    #[inline]
    pub fn contains(&self, x: &[T]) -> bool {
        x[0] >= self.min[0] && x[0] <= self.max[0] && x[1] >= self.min[1] && x[1] <= self.max[1]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObstacleSet<T> {
    pub boxes: Vec<Aabb<T>>,
    pub penalty: T,
}

impl<T: Real> ObstacleSet<T> {
    pub fn none() -> Self {
        Self { boxes: Vec::new(), penalty: T::zero() }
    }

    pub fn new(boxes: Vec<Aabb<T>>, penalty: T) -> Result<Self> {
        if !(penalty >= T::zero()) {
            return Err(Error::Config("obstacle penalty must be >= 0".into()));
        }
        Ok(Self { boxes, penalty })
    }

    pub fn collides(&self, x: &[T]) -> bool {
        self.boxes.iter().any(|b| b.contains(x))
    }

    #[inline]
    pub fn penalty_at(&self, x: &[T]) -> T {
        if self.collides(x) {
            self.penalty
        } else {
            T::zero()
        }
    }
}

/// `[J⁰, J¹, …, Jᵐ]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostVector<T>(pub Vec<T>);

impl<T: Real> CostVector<T> {
    pub fn values(&self) -> &[T] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn dot(&self, alpha: &[T]) -> T {
        crate::num::dot(alpha, &self.0)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(&a, &b)| a - b).collect())
    }
}

/// Stage cost `(x−p)ᵀQ(x−p) + uᵀRu` plus the obstacle penalty at `x`.
#[inline]
pub fn stage_cost<T: Real>(mission: &Mission<T>, x: &[T], u: &[T], obstacles: &ObstacleSet<T>) -> T {
    mission.q.quad_form_diff(x, &mission.target) + mission.r.quad_form(u) + obstacles.penalty_at(x)
}

/// Cost of one `N`-step trajectory: stage costs at each pair (state after input `k`, input `k`)
/// plus the terminal cost at the final state.
pub fn mission_cost<T: Real>(
    mission: &Mission<T>,
    states: &[Vec<T>],
    inputs: &[Vec<T>],
    obstacles: &ObstacleSet<T>,
) -> Result<T> {
    if inputs.is_empty() || states.len() != inputs.len() + 1 {
        return Err(Error::Contract(format!(
            "mission cost needs N+1 states for N >= 1 inputs (got {} states, {} inputs)",
            states.len(),
            inputs.len()
        )));
    }
    let mut total = T::zero();
    for (k, u) in inputs.iter().enumerate() {
        total += stage_cost(mission, &states[k + 1], u, obstacles);
    }
    Ok(total + mission.terminal_cost(states.last().unwrap()))
}

fn check_shapes<T: Real>(
    traj: &MultiHorizonTrajectory<T>,
    inputs: &MultiHorizonInput<T>,
    missions: &MissionSet<T>,
) -> Result<()> {
    if traj.layout() != inputs.layout() {
        return Err(Error::Contract("trajectory and input layouts differ".into()));
    }
    if missions.len() != inputs.alternatives() + 1 {
        return Err(Error::Config(format!(
            "{} missions supplied for a structure with {} alternatives",
            missions.len(),
            inputs.alternatives()
        )));
    }
    Ok(())
}

/// Mission-`i` cost of the primary horizon up to (including) each step.
fn primary_prefix<T: Real>(
    mission: &Mission<T>,
    traj: &MultiHorizonTrajectory<T>,
    inputs: &MultiHorizonInput<T>,
    obstacles: &ObstacleSet<T>,
    prefix: &mut Vec<T>,
) {
    prefix.clear();
    let mut acc = T::zero();
    for k in 0..inputs.horizon() {
        acc += stage_cost(mission, traj.primary_state(k + 1), inputs.primary_input(k), obstacles);
        prefix.push(acc);
    }
}

/// `Jⁱ(Xⁱ_p, Uⁱ_p)` starting from the shared prefix sum over steps `0..=p`.
fn branch_cost<T: Real>(
    mission: &Mission<T>,
    states: BranchStates<'_, T>,
    view: BranchView<'_, T>,
    prefix: T,
    obstacles: &ObstacleSet<T>,
) -> T {
    let n = view.len();
    let mut total = prefix;
    for k in view.abort_index() + 1..n {
        total += stage_cost(mission, states.state(k + 1), view.input(k), obstacles);
    }
    total + mission.terminal_cost(states.state(n))
}

/// Reusable buffer for cost evaluation in hot loops.
#[derive(Debug, Default, Clone)]
pub struct CostScratch<T> {
    prefix: Vec<T>,
}

/// The `m+1` cost vector: primary cost, then for each alternative the average branch cost.
pub fn cost_vector<T: Real>(
    traj: &MultiHorizonTrajectory<T>,
    inputs: &MultiHorizonInput<T>,
    missions: &MissionSet<T>,
    obstacles: &ObstacleSet<T>,
) -> Result<CostVector<T>> {
    check_shapes(traj, inputs, missions)?;
    let mut out = vec![T::zero(); missions.len()];
    cost_vector_into(traj, inputs, missions, obstacles, &mut CostScratch::default(), &mut out);
    Ok(CostVector(out))
}

pub(crate) fn cost_vector_into<T: Real>(
    traj: &MultiHorizonTrajectory<T>,
    inputs: &MultiHorizonInput<T>,
    missions: &MissionSet<T>,
    obstacles: &ObstacleSet<T>,
    scratch: &mut CostScratch<T>,
    out: &mut [T],
) {
    let n = inputs.horizon();
    let primary = missions.get(0);
    primary_prefix(primary, traj, inputs, obstacles, &mut scratch.prefix);
    out[0] = scratch.prefix[n - 1] + primary.terminal_cost(traj.primary_state(n));
    let branches = T::from_count(n - 1);
    for i in 1..missions.len() {
        let mission = missions.get(i);
        primary_prefix(mission, traj, inputs, obstacles, &mut scratch.prefix);
        let mut sum = T::zero();
        for p in 0..n - 1 {
            let states = traj.branch_view(i, p).expect("in range");
            let view = inputs.branch_view(i, p).expect("in range");
            sum += branch_cost(mission, states, view, scratch.prefix[p], obstacles);
        }
        out[i] = sum / branches;
    }
}

/// The final stage plus terminal term of every horizon, averaged over branches like
/// [`cost_vector`]. Subtracting it removes the contribution of the trailing input.
pub fn tail_cost_vector<T: Real>(
    traj: &MultiHorizonTrajectory<T>,
    inputs: &MultiHorizonInput<T>,
    missions: &MissionSet<T>,
    obstacles: &ObstacleSet<T>,
) -> Result<CostVector<T>> {
    check_shapes(traj, inputs, missions)?;
    let n = inputs.horizon();
    let mut out = Vec::with_capacity(missions.len());
    let primary = missions.get(0);
    out.push(
        stage_cost(primary, traj.primary_state(n), inputs.primary_input(n - 1), obstacles)
            + primary.terminal_cost(traj.primary_state(n)),
    );
    for i in 1..missions.len() {
        let mission = missions.get(i);
        let mut sum = T::zero();
        for p in 0..n - 1 {
            let states = traj.branch_view(i, p)?;
            let view = inputs.branch_view(i, p)?;
            sum += stage_cost(mission, states.state(n), view.input(n - 1), obstacles) + mission.terminal_cost(states.state(n));
        }
        out.push(sum / T::from_count(n - 1));
    }
    Ok(CostVector(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::DynamicsModel;
    use crate::multi_horizon::expand;
    use proptest::prelude::*;

    fn uav_missions(targets: &[[f64; 4]]) -> MissionSet<f64> {
        MissionSet::new(targets.iter().map(|t| Mission::new(t.to_vec(), 2)).collect(), 4, 2).unwrap()
    }

    fn random_input(n: usize, m: usize, seed: u64) -> MultiHorizonInput<f64> {
        let mut u = MultiHorizonInput::zeros(n, m, 2).unwrap();
        let mut s = seed | 1;
        for x in u.as_flat_mut() {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            *x = ((s >> 11) as f64 / (1u64 << 53) as f64) * 4.0 - 2.0;
        }
        u
    }

    #[test]
    fn stage_cost_examples() {
        let none = ObstacleSet::none();
        let m = Mission::new(vec![10.0, 10.0, 0.0, 0.0], 2);
        assert_eq!(stage_cost(&m, &[10.0, 10.0, 0.0, 0.0], &[0.0, 0.0], &none), 0.0);
        assert_eq!(stage_cost(&m, &[0.0; 4], &[1.0, 1.0], &none), 202.0);
        let boxes = ObstacleSet::new(vec![Aabb::new([9.0, 9.0], [11.0, 11.0]).unwrap()], 1e4).unwrap();
        assert_eq!(stage_cost(&m, &[10.0, 10.0, 0.0, 0.0], &[0.0, 0.0], &boxes), 1e4);
    }

    #[test]
    fn mission_cost_matches_hand_summation() {
        // states from u = [1,0],[1,0]: x1 = [0,0,.1,0], x2 = [.01,0,.2,0]
        let model = DynamicsModel::<f64>::double_integrator();
        let inputs = vec![vec![1.0, 0.0], vec![1.0, 0.0]];
        let states = model.rollout(&[0.0; 4], &inputs, 0).unwrap();
        let m = Mission::new(vec![10.0, 10.0, 0.0, 0.0], 2);
        let got = mission_cost(&m, &states, &inputs, &ObstacleSet::none()).unwrap();
        let l1 = 100.0 + 100.0 + 0.01 + 1.0;
        let l2 = 9.99f64.powi(2) + 100.0 + 0.04 + 1.0;
        let f = 9.99f64.powi(2) + 100.0 + 0.04;
        assert!((got - (l1 + l2 + f)).abs() < 1e-9, "{got}");
    }

    #[test]
    fn mission_cost_edges() {
        let m = Mission::new(vec![1.0, 2.0, 0.0, 0.0], 2);
        let on_target = vec![m.target.clone(); 4];
        assert_eq!(mission_cost(&m, &on_target, &vec![vec![0.0; 2]; 3], &ObstacleSet::none()).unwrap(), 0.0);
        let x1 = vec![0.0, 0.0, 1.0, 0.0];
        let single =
            mission_cost(&m, &[vec![0.0; 4], x1.clone()], &[vec![1.0, 0.0]], &ObstacleSet::none()).unwrap();
        assert_eq!(single, stage_cost(&m, &x1, &[1.0, 0.0], &ObstacleSet::none()) + m.terminal_cost(&x1));
        assert!(mission_cost(&m, &on_target, &vec![vec![0.0; 2]; 2], &ObstacleSet::none()).is_err());
    }

    #[test]
    fn cost_vector_averages_branch_costs() {
        let model = DynamicsModel::<f64>::double_integrator();
        let missions = uav_missions(&[[10.0, 10.0, 0.0, 0.0], [2.0, 6.0, 0.0, 0.0]]);
        let u = random_input(3, 1, 99);
        let x0 = [0.5, -0.5, 0.2, 0.1];
        let traj = expand(&model, &x0, &u, &[0, 0]).unwrap();
        let j = cost_vector(&traj, &u, &missions, &ObstacleSet::none()).unwrap();
        let none = ObstacleSet::none();
        let primary_inputs: Vec<Vec<f64>> = (0..3).map(|k| u.primary_input(k).to_vec()).collect();
        let j0 = mission_cost(missions.get(0), &model.rollout(&x0, &primary_inputs, 0).unwrap(), &primary_inputs, &none)
            .unwrap();
        let mut j1 = 0.0;
        for p in 0..2 {
            let inputs = u.branch_view(1, p).unwrap().to_vec();
            j1 += mission_cost(missions.get(1), &model.rollout(&x0, &inputs, 0).unwrap(), &inputs, &none).unwrap();
        }
        assert!((j.0[0] - j0).abs() < 1e-9);
        assert!((j.0[1] - j1 / 2.0).abs() < 1e-9);
    }

    #[test]
    fn cost_vector_single_branch_and_symmetry() {
        let model = DynamicsModel::<f64>::double_integrator();
        let same = uav_missions(&[[3.0, 1.0, 0.0, 0.0], [3.0, 1.0, 0.0, 0.0]]);
        let primary = vec![vec![0.3, -0.1], vec![0.2, 0.4], vec![-0.5, 0.1]];
        let tails = vec![vec![primary[1..].to_vec(), primary[2..].to_vec()]];
        let u = MultiHorizonInput::from_parts(&primary, &tails).unwrap();
        let traj = expand(&model, &[0.0; 4], &u, &[0, 0]).unwrap();
        let j = cost_vector(&traj, &u, &same, &ObstacleSet::none()).unwrap();
        assert!((j.0[0] - j.0[1]).abs() < 1e-12);

        let two = MultiHorizonInput::from_parts(&primary[..2], &[vec![vec![vec![1.0, 1.0]]]]).unwrap();
        let traj = expand(&model, &[0.0; 4], &two, &[0, 0]).unwrap();
        let j = cost_vector(&traj, &two, &same, &ObstacleSet::none()).unwrap();
        let inputs = two.branch_view(1, 0).unwrap().to_vec();
        let direct = mission_cost(same.get(1), &traj.branch_view(1, 0).unwrap().to_vec(), &inputs, &ObstacleSet::none())
            .unwrap();
        assert!((j.0[1] - direct).abs() < 1e-12);
    }

    #[test]
    fn cost_vector_rejects_mismatched_missions() {
        let model = DynamicsModel::<f64>::double_integrator();
        let u = MultiHorizonInput::<f64>::zeros(3, 2, 2).unwrap();
        let traj = expand(&model, &[0.0; 4], &u, &[0, 0, 0]).unwrap();
        let missions = uav_missions(&[[1.0; 4]]);
        assert!(matches!(cost_vector(&traj, &u, &missions, &ObstacleSet::none()), Err(Error::Config(_))));
    }

    #[test]
    fn tail_cost_is_the_dropped_part_of_the_sum() {
        let model = DynamicsModel::<f64>::double_integrator();
        let missions = uav_missions(&[[10.0, 10.0, 0.0, 0.0], [2.0, 6.0, 0.0, 0.0], [8.0, 6.0, 0.0, 0.0]]);
        let obstacles = ObstacleSet::new(vec![Aabb::new([0.0, 0.0], [0.05, 0.05]).unwrap()], 1e4).unwrap();
        let u = random_input(5, 2, 7).shift();
        let x0 = [0.0, 0.0, 0.3, 0.2];
        let traj = expand(&model, &x0, &u, &[0, 0, 0]).unwrap();
        let full = cost_vector(&traj, &u, &missions, &obstacles).unwrap();
        let tail = tail_cost_vector(&traj, &u, &missions, &obstacles).unwrap();
        let diff = full.sub(&tail);
        // truncated oracle: stage costs for steps 0..N-2 only, per branch
        let truncated = |i: usize, states: &[Vec<f64>], inputs: &[Vec<f64>]| -> f64 {
            (0..inputs.len() - 1).map(|k| stage_cost(missions.get(i), &states[k + 1], &inputs[k], &obstacles)).sum()
        };
        let prim: Vec<Vec<f64>> = (0..5).map(|k| u.primary_input(k).to_vec()).collect();
        assert!((diff.0[0] - truncated(0, &traj.primary_states(), &prim)).abs() < 1e-9);
        for i in 1..=2 {
            let mut acc = 0.0;
            for p in 0..4 {
                acc += truncated(i, &traj.branch_view(i, p).unwrap().to_vec(), &u.branch_view(i, p).unwrap().to_vec());
            }
            assert!((diff.0[i] - acc / 4.0).abs() < 1e-9);
        }
        assert!(diff.0.iter().all(|&d| d >= 0.0));
    }

    #[test]
    fn tail_cost_zero_on_target_and_primary_only() {
        let model = DynamicsModel::<f64>::double_integrator();
        let missions = uav_missions(&[[0.0; 4], [0.0; 4]]);
        let u = MultiHorizonInput::<f64>::zeros(4, 1, 2).unwrap();
        let traj = expand(&model, &[0.0; 4], &u, &[0, 0]).unwrap();
        assert_eq!(tail_cost_vector(&traj, &u, &missions, &ObstacleSet::none()).unwrap().0, vec![0.0, 0.0]);
        assert_eq!(cost_vector(&traj, &u, &missions, &ObstacleSet::none()).unwrap().0, vec![0.0, 0.0]);

        let single = uav_missions(&[[1.0, 2.0, 0.0, 0.0]]);
        let u = random_input(4, 0, 5);
        let traj = expand(&model, &[0.0; 4], &u, &[0]).unwrap();
        let tail = tail_cost_vector(&traj, &u, &single, &ObstacleSet::none()).unwrap();
        let m = single.get(0);
        let want = stage_cost(m, traj.primary_state(4), u.primary_input(3), &ObstacleSet::none())
            + m.terminal_cost(traj.primary_state(4));
        assert_eq!(tail.0, vec![want]);
    }

    #[test]
    fn psd_validation() {
        assert!(SquareMatrix::<f64>::identity(3).is_psd());
        assert!(SquareMatrix::<f64>::diagonal(&[1.0, 0.0]).is_psd());
        assert!(!SquareMatrix::<f64>::diagonal(&[1.0, -1.0]).is_psd());
        assert!(!SquareMatrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap().is_psd());
        let bad = vec![Mission::new(vec![0.0; 4], 2).with_weights(SquareMatrix::diagonal(&[1.0, 1.0, -1.0, 1.0]), SquareMatrix::identity(2))];
        assert!(MissionSet::new(bad, 4, 2).is_err());
        assert!(Aabb::new([1.0, 0.0], [0.0, 1.0]).is_err());
    }

    proptest! {
        #[test]
        fn cost_vector_properties(seed in any::<u64>(), n in 2usize..7, scale in 0.1..10.0f64) {
            let model = DynamicsModel::<f64>::double_integrator();
            let missions = uav_missions(&[[10.0, 10.0, 0.0, 0.0], [2.0, 6.0, 0.0, 0.0], [-4.0, 8.0, 0.0, 0.0]]);
            let u = random_input(n, 2, seed);
            let traj = expand(&model, &[0.1, 0.2, 0.0, 0.0], &u, &[0, 0, 0]).unwrap();
            let none = ObstacleSet::none();
            let j = cost_vector(&traj, &u, &missions, &none).unwrap();
            let f = tail_cost_vector(&traj, &u, &missions, &none).unwrap();
            prop_assert!(j.0.iter().all(|&v| v >= 0.0 && v.is_finite()));
            prop_assert!(j.sub(&f).0.iter().all(|&v| v >= -1e-9));

            let scaled = MissionSet::new(
                missions.iter().map(|m| m.clone().with_weights(m.q.scaled(scale), m.r.scaled(scale))).collect(), 4, 2,
            ).unwrap();
            let js = cost_vector(&traj, &u, &scaled, &none).unwrap();
            for (a, b) in js.0.iter().zip(&j.0) {
                prop_assert!((a - scale * b).abs() <= 1e-9 * (1.0 + a.abs()));
            }
        }
    }
}
