use rand::Rng;

use crate::error::{Error, Result};
use crate::mdp::{ActionTable, TabularMdp};
use crate::rng::{self, Purpose};

/// Probability of the intended grid-world move.
const GRID_DIRECTED: f64 = 0.6;

/// Chain of `n` states with absorbing ends; action 0 moves left, 1 right.
///
/// From an interior state `k` the next state `l` on the chosen side is drawn
/// with weight 1/|l − k|. Entering an end pays +1, landing on an interior
/// state pays −1; the expectation over next states is stored as r(x, a).
/// Self-loops of the absorbing ends pay 0.
pub fn make_linear_mdp(n_states: usize, gamma: f64) -> Result<TabularMdp> {
    if n_states < 3 {
        return Err(Error::config(format!("linear MDP needs at least 3 states, got {n_states}")));
    }
    let n = n_states;
    let mut p = vec![0.0; n * 2 * n];
    let mut r = ActionTable::zeros(n, 2);
    for k in 0..n {
        for (a, dir) in [(0usize, -1i64), (1, 1)] {
            let row = &mut p[(k * 2 + a) * n..(k * 2 + a + 1) * n];
            if k == 0 || k == n - 1 {
                row[k] = 1.0;
                continue;
            }
            let mut z = 0.0;
            for (l, w) in row.iter_mut().enumerate() {
                let d = l as i64 - k as i64;
                if d * dir > 0 {
                    *w = 1.0 / d.unsigned_abs() as f64;
                    z += *w;
                }
            }
            row.iter_mut().for_each(|w| *w /= z);
            let to_end = row[0] + row[n - 1];
            r.set(k, a, to_end - (1.0 - to_end));
        }
    }
    TabularMdp::new(n, 2, p, r, gamma)
}

/// Stochastic reset chain: action 1 advances, action 0 resets backwards.
///
/// Advancing from `k` costs 0.01. Every transition into the absorbing goal
/// pays +1, including the goal's own self-loop, so the lock-opened state is
/// worth 1/(1−γ). Resetting from `k` lands on `l < k` with weight
/// 1/(k − l) and pays 0; state 0 has nowhere to reset to and stays put.
pub fn make_combination_lock(n_states: usize, gamma: f64) -> Result<TabularMdp> {
    if n_states < 3 {
        return Err(Error::config(format!(
            "combination lock needs at least 3 states, got {n_states}"
        )));
    }
    let n = n_states;
    let goal = n - 1;
    let mut p = vec![0.0; n * 2 * n];
    let mut r = ActionTable::zeros(n, 2);
    for k in 0..n {
        let reset = &mut p[(k * 2) * n..(k * 2 + 1) * n];
        if k == goal || k == 0 {
            reset[k] = 1.0;
        } else {
            let z: f64 = (0..k).map(|l| 1.0 / (k - l) as f64).sum();
            for (l, w) in reset.iter_mut().enumerate().take(k) {
                *w = 1.0 / (k - l) as f64 / z;
            }
        }
        let advance = &mut p[(k * 2 + 1) * n..(k * 2 + 2) * n];
        if k == goal {
            advance[k] = 1.0;
            r.set(k, 0, 1.0);
            r.set(k, 1, 1.0);
        } else {
            advance[k + 1] = 1.0;
            r.set(k, 1, if k + 1 == goal { 1.0 } else { -0.01 });
        }
    }
    TabularMdp::new(n, 2, p, r, gamma)
}

/// Grid-world actions in index order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridAction {
    Right = 0,
    Up = 1,
    Down = 2,
    Left = 3,
}

impl GridAction {
    pub const ALL: [GridAction; 4] = [Self::Right, Self::Up, Self::Down, Self::Left];

    fn delta(self) -> (i64, i64) {
        match self {
            Self::Right => (1, 0),
            Self::Up => (0, -1),
            Self::Down => (0, 1),
            Self::Left => (-1, 0),
        }
    }
}

/// `side × side` open cells surrounded by an absorbing firewall ring, with an
/// absorbing cell at the centre.
///
/// Cells carry coordinates c = (h, v) in `1..=side + 2`, (1, 1) top-left;
/// the state index is `(v − 1)(side + 2) + (h − 1)`. Firewalls pay
/// −1/‖c‖₂ and the centre −1 on every step; open cells pay 0. From an open
/// cell the chosen move succeeds with probability 0.6 and the remaining 0.4
/// is spread over all other cells with weight 1/‖c_x − c_y‖₂.
pub fn make_grid_world(side: usize, gamma: f64) -> Result<TabularMdp> {
    if side < 3 || side.is_multiple_of(2) {
        return Err(Error::config(format!("grid side must be odd and at least 3, got {side}")));
    }
    let w = side + 2;
    let n = w * w;
    let center = w.div_ceil(2);
    let coord = |i: usize| ((i % w + 1) as i64, (i / w + 1) as i64);
    let index = |h: i64, v: i64| (v as usize - 1) * w + (h as usize - 1);
    let is_wall = |h: i64, v: i64| h == 1 || v == 1 || h == w as i64 || v == w as i64;
    let is_center = |h: i64, v: i64| h == center as i64 && v == center as i64;

    let mut p = vec![0.0; n * 4 * n];
    let mut r = ActionTable::zeros(n, 4);
    let mut spread = vec![0.0; n];
    for x in 0..n {
        let (h, v) = coord(x);
        if is_wall(h, v) || is_center(h, v) {
            let reward = if is_center(h, v) {
                -1.0
            } else {
                -1.0 / ((h * h + v * v) as f64).sqrt()
            };
            for a in 0..4 {
                p[(x * 4 + a) * n + x] = 1.0;
                r.set(x, a, reward);
            }
            continue;
        }
        let mut z = 0.0;
        for (y, s) in spread.iter_mut().enumerate() {
            *s = if y == x {
                0.0
            } else {
                let (hy, vy) = coord(y);
                1.0 / (((h - hy).pow(2) + (v - vy).pow(2)) as f64).sqrt()
            };
            z += *s;
        }
        for action in GridAction::ALL {
            let (dh, dv) = action.delta();
            let target = index(h + dh, v + dv);
            let row = &mut p[(x * 4 + action as usize) * n..(x * 4 + action as usize + 1) * n];
            for (o, s) in row.iter_mut().zip(&spread) {
                *o = (1.0 - GRID_DIRECTED) * s / z;
            }
            row[target] += GRID_DIRECTED;
        }
    }
    TabularMdp::new(n, 4, p, r, gamma)
}

/// Dense random MDP: transition weights U(0, 1) normalized per row,
/// rewards U[−1, 1].
pub fn make_random_mdp(
    n_states: usize,
    n_actions: usize,
    gamma: f64,
    seed: u64,
) -> Result<TabularMdp> {
    if n_states == 0 || n_actions == 0 {
        return Err(Error::config("random MDP needs at least one state and action"));
    }
    let mut rng = rng::stream(seed, Purpose::Mdp);
    let mut p = vec![0.0; n_states * n_actions * n_states];
    for row in p.chunks_exact_mut(n_states) {
        let mut z = 0.0;
        for w in row.iter_mut() {
            *w = rng.random::<f64>() + 1e-3;
            z += *w;
        }
        row.iter_mut().for_each(|w| *w /= z);
    }
    let mut rewards = vec![0.0; n_states * n_actions];
    rng::fill_uniform(&mut rng, &mut rewards, 1.0);
    TabularMdp::new(
        n_states,
        n_actions,
        p,
        ActionTable::from_vec(n_states, n_actions, rewards)?,
        gamma,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::optimal_q;

    #[test]
    fn linear_chain_rows() {
        let m = make_linear_mdp(5, 0.9).unwrap();
        // state x3 (index 2), move right: weights 1 and 1/2 over x4, x5.
        let row = m.transition_row(2, 1);
        assert!((row[3] - 2.0 / 3.0).abs() < 1e-15);
        assert!((row[4] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(&row[..3], &[0.0, 0.0, 0.0]);
        for a in 0..2 {
            assert_eq!(m.transition_row(0, a)[0], 1.0);
            assert_eq!(m.transition_row(4, a)[4], 1.0);
        }
        // expected reward: +1 w.p. 1/3, -1 w.p. 2/3
        assert!((m.reward(2, 1) - (-1.0 / 3.0)).abs() < 1e-15);
        assert!(make_linear_mdp(2, 0.9).is_err());
    }

    #[test]
    fn lock_reset_weights() {
        let m = make_combination_lock(10, 0.9).unwrap();
        // x4 (index 3) resets to x3, x2, x1 with 6/11, 3/11, 2/11.
        let row = m.transition_row(3, 0);
        assert!((row[2] - 6.0 / 11.0).abs() < 1e-15);
        assert!((row[1] - 3.0 / 11.0).abs() < 1e-15);
        assert!((row[0] - 2.0 / 11.0).abs() < 1e-15);
        assert_eq!(m.transition_row(8, 1)[9], 1.0);
        assert_eq!(m.reward(4, 0), 0.0);
        assert_eq!(m.reward(4, 1), -0.01);
        assert_eq!(m.reward(8, 1), 1.0);
        assert_eq!(m.reward(9, 0), 1.0);
        assert_eq!(m.transition_row(9, 0)[9], 1.0);
        assert!(make_combination_lock(2, 0.9).is_err());
    }

    #[test]
    fn grid_rows_match_enumeration() {
        let side = 5;
        let m = make_grid_world(side, 0.9).unwrap();
        let w = side + 2;
        assert_eq!(m.n_states(), w * w);
        let center = (w / 2) * w + w / 2;
        for a in 0..4 {
            assert_eq!(m.reward(center, a), -1.0);
            assert_eq!(m.transition_row(center, a)[center], 1.0);
        }
        assert!((m.reward(0, 0) + 1.0 / 2f64.sqrt()).abs() < 1e-15);
        // brute-force one row: cell (h, v) = (2, 3), action RIGHT.
        let (h, v) = (2i64, 3i64);
        let x = (v as usize - 1) * w + (h as usize - 1);
        let mut weights = vec![0.0; w * w];
        for y in 0..w * w {
            let (hy, vy) = ((y % w + 1) as i64, (y / w + 1) as i64);
            if y != x {
                weights[y] = 1.0 / (((h - hy).pow(2) + (v - vy).pow(2)) as f64).sqrt();
            }
        }
        let z: f64 = weights.iter().sum();
        let row = m.transition_row(x, GridAction::Right as usize);
        for y in 0..w * w {
            let mut expect = 0.4 * weights[y] / z;
            if y == x + 1 {
                expect += 0.6;
            }
            assert!((row[y] - expect).abs() < 1e-15);
        }
        assert!(make_grid_world(4, 0.9).is_err());
        assert!(make_grid_world(1, 0.9).is_err());
    }

    #[test]
    fn generated_mdps_are_valid_at_all_sizes() {
        for &n in &[5usize, 50, 500] {
            let m = make_linear_mdp(n, 0.995).unwrap();
            assert!(m.r_max() <= 1.0);
            let m = make_combination_lock(n, 0.995).unwrap();
            assert!(m.r_max() <= 1.0);
        }
        // the constructor checks every row
        assert_eq!(make_linear_mdp(2500, 0.995).unwrap().n_states(), 2500);
        assert_eq!(make_combination_lock(2500, 0.995).unwrap().n_states(), 2500);
        for side in [3usize, 5, 49] {
            let g = make_grid_world(side, 0.995).unwrap();
            assert!(g.r_max() <= 1.0);
        }
        let rm = make_random_mdp(50, 4, 0.9, 3).unwrap();
        assert!(rm.r_max() <= 1.0);
    }

    #[test]
    fn linear_optimal_policy_heads_to_nearer_end() {
        for n in [5usize, 6, 11, 24, 50] {
            let m = make_linear_mdp(n, 0.995).unwrap();
            let q = optimal_q(&m, 1e-8 * m.v_max()).unwrap();
            for k in 1..n - 1 {
                let (left, right) = (q.get(k, 0), q.get(k, 1));
                let dl = k;
                let dr = n - 1 - k;
                if dl < dr {
                    assert!(left > right, "n={n} k={k}");
                } else if dr < dl {
                    assert!(right > left, "n={n} k={k}");
                } else {
                    assert!((left - right).abs() < 1e-6);
                }
            }
        }
    }

    #[test]
    fn lock_optimal_policy_is_all_ones() {
        for n in [3usize, 10, 25, 50, 500] {
            let m = make_combination_lock(n, 0.995).unwrap();
            let q = optimal_q(&m, 1e-8 * m.v_max()).unwrap();
            for k in 0..n - 1 {
                assert!(q.get(k, 1) > q.get(k, 0), "n={n} k={k}");
            }
        }
    }

    #[test]
    fn random_mdp_is_seeded() {
        let a = make_random_mdp(6, 3, 0.9, 42).unwrap();
        let b = make_random_mdp(6, 3, 0.9, 42).unwrap();
        let c = make_random_mdp(6, 3, 0.9, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
