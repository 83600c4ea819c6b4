//! Light-Dark Tiger: a planar navigation BAMDP whose tiger corner is revealed
//! only by touching the left wall.
//!
//! Positions live in `[0, width] x [0, height]`. Each action moves one unit
//! along an axis plus Gaussian noise truncated at three standard deviations,
//! then clips to the rectangle. Ending within `capture_radius` of a goal corner
//! terminates the episode. Wall contact writes the tiger corner into the state,
//! which collapses the belief through the ordinary Bayes update.

use std::hash::{Hash, Hasher};

use core_bamdp::{Action, Belief, LatentMdpFamily, LatentVar, Stencil};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{invalid, Result};

pub const UP: Action = 0;
pub const DOWN: Action = 1;
pub const LEFT: Action = 2;
pub const RIGHT: Action = 3;

pub const TIGER_TOP: LatentVar = LatentVar(0);
pub const TIGER_BOTTOM: LatentVar = LatentVar(1);

/// Noise is truncated at this many standard deviations.
pub const TRUNCATION: f64 = 3.0;

/// Distance added between states that differ in the revealed corner or in termination.
const FLAG_DISTANCE: f64 = 5.0;

/// Three-point Gauss-Hermite rule for a unit normal.
const QUADRATURE: [(f64, f64); 3] = [
    (-1.732_050_807_568_877_2, 1.0 / 6.0),
    (0.0, 2.0 / 3.0),
    (1.732_050_807_568_877_2, 1.0 / 6.0),
];

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LdState {
    pub x: f64,
    pub y: f64,
    /// Tiger corner observed at the wall, if any.
    pub revealed: Option<LatentVar>,
    pub done: bool,
}

impl LdState {
    pub fn at(x: f64, y: f64) -> Self {
        Self {
            x,
            y,
            revealed: None,
            done: false,
        }
    }

    fn key(&self) -> (u64, u64, Option<LatentVar>, bool) {
        // +0.0 normalizes negative zero so equal positions hash alike.
        (
            (self.x + 0.0).to_bits(),
            (self.y + 0.0).to_bits(),
            self.revealed,
            self.done,
        )
    }
}

impl PartialEq for LdState {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl Eq for LdState {}

impl Hash for LdState {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.key().hash(state);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LightDarkParams {
    pub width: f64,
    pub height: f64,
    pub start: [f64; 2],
    pub goal_top: [f64; 2],
    pub goal_bottom: [f64; 2],
    pub capture_radius: f64,
    pub wall_x: f64,
    pub step: f64,
    pub sigma: f64,
    pub reward_goal: f64,
    pub reward_tiger: f64,
    pub reward_step: f64,
    /// Standard deviation used for the analytic Lipschitz constants when `sigma` is smaller.
    pub sigma_floor: f64,
}

impl Default for LightDarkParams {
    fn default() -> Self {
        Self {
            width: 4.0,
            height: 2.0,
            start: [3.0, 1.0],
            goal_top: [4.0, 2.0],
            goal_bottom: [4.0, 0.0],
            capture_radius: 0.5,
            wall_x: 0.05,
            step: 1.0,
            sigma: 0.0,
            reward_goal: 10.0,
            reward_tiger: -100.0,
            reward_step: 0.0,
            sigma_floor: 1e-3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LightDarkEnv {
    params: LightDarkParams,
    prior: Belief,
    shift: f64,
    r_max: f64,
    l_r: f64,
    l_p: f64,
}

impl LightDarkEnv {
    pub fn new(params: LightDarkParams) -> Result<Self> {
        let p = &params;
        if !(p.sigma >= 0.0) || !p.sigma.is_finite() {
            return Err(invalid(
                "lightdark",
                format!("sigma {} must be a nonnegative number", p.sigma),
            ));
        }
        if !(p.width > 0.0
            && p.height > 0.0
            && p.step > 0.0
            && p.capture_radius > 0.0
            && p.sigma_floor > 0.0)
        {
            return Err(invalid(
                "lightdark",
                "width, height, step, capture_radius and sigma_floor must be positive",
            ));
        }
        let inside =
            |q: [f64; 2]| (0.0..=p.width).contains(&q[0]) && (0.0..=p.height).contains(&q[1]);
        if !inside(p.start) || !inside(p.goal_top) || !inside(p.goal_bottom) {
            return Err(invalid(
                "lightdark",
                "start and goals must lie inside the rectangle",
            ));
        }
        if !(p.wall_x >= 0.0 && p.wall_x < p.start[0]) {
            return Err(invalid("lightdark", "wall_x must lie in [0, start.x)"));
        }
        let natives = [p.reward_goal, p.reward_tiger, p.reward_step, 0.0];
        if natives.iter().any(|r| !r.is_finite()) {
            return Err(invalid("lightdark", "rewards must be finite"));
        }
        let low = natives.iter().cloned().fold(f64::INFINITY, f64::min);
        let high = natives.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let shift = -low;
        let r_max = high + shift;

        // Shifting a product of truncated normals by delta changes it in L1 by at most
        // sqrt(2) * |delta| * 2 * peak density; clipping and the flag updates are
        // deterministic maps of the position and cannot increase that gap.
        let sigma = p.sigma.max(p.sigma_floor);
        let mass = 1.0 - 2.0 * normal_tail(TRUNCATION);
        let peak = 1.0 / (sigma * (2.0 * std::f64::consts::PI).sqrt() * mass);
        let l_p = 2.0 * std::f64::consts::SQRT_2 * peak;
        let l_r = r_max * l_p / 2.0;
        Ok(Self {
            prior: Belief::uniform(2),
            shift,
            r_max,
            l_r,
            l_p,
            params,
        })
    }

    pub fn params(&self) -> &LightDarkParams {
        &self.params
    }

    pub fn is_deterministic(&self) -> bool {
        self.params.sigma == 0.0
    }

    fn tiger_goal(&self, latent: LatentVar) -> [f64; 2] {
        if latent == TIGER_TOP {
            self.params.goal_top
        } else {
            self.params.goal_bottom
        }
    }

    fn captured_goal(&self, x: f64, y: f64) -> Option<[f64; 2]> {
        let r = self.params.capture_radius;
        [self.params.goal_top, self.params.goal_bottom]
            .into_iter()
            .find(|g| (x - g[0]).hypot(y - g[1]) <= r)
    }

    fn displacement(&self, action: Action) -> (f64, f64) {
        let s = self.params.step;
        match action {
            UP => (0.0, s),
            DOWN => (0.0, -s),
            LEFT => (-s, 0.0),
            _ => (s, 0.0),
        }
    }

    /// Apply a move with the given noise, clipping and updating flags.
    fn advance(
        &self,
        state: &LdState,
        latent: LatentVar,
        action: Action,
        noise: (f64, f64),
    ) -> LdState {
        if state.done {
            return *state;
        }
        let (dx, dy) = self.displacement(action);
        let x = (state.x + dx + noise.0).clamp(0.0, self.params.width);
        let y = (state.y + dy + noise.1).clamp(0.0, self.params.height);
        if self.captured_goal(x, y).is_some() {
            return LdState {
                x,
                y,
                revealed: state.revealed,
                done: true,
            };
        }
        let revealed = match state.revealed {
            None if x <= self.params.wall_x => Some(latent),
            other => other,
        };
        LdState {
            x,
            y,
            revealed,
            done: false,
        }
    }

    fn native_transition_reward(&self, state: &LdState, latent: LatentVar, next: &LdState) -> f64 {
        if state.done {
            return 0.0;
        }
        match next
            .done
            .then(|| self.captured_goal(next.x, next.y))
            .flatten()
        {
            Some(g) if g == self.tiger_goal(latent) => self.params.reward_tiger,
            Some(_) => self.params.reward_goal,
            None => self.params.reward_step,
        }
    }

    /// Likelihood of the pre-clip offset along one axis landing on `observed`.
    fn axis_likelihood(&self, mean: f64, observed: f64, upper: f64) -> f64 {
        let sigma = self.params.sigma;
        let tol = 1e-12 * (1.0 + upper);
        if sigma == 0.0 {
            let landed = mean.clamp(0.0, upper);
            return if (landed - observed).abs() <= tol {
                1.0
            } else {
                0.0
            };
        }
        let width = TRUNCATION * sigma;
        let mass = 1.0 - 2.0 * normal_tail(TRUNCATION);
        let cdf = |v: f64| {
            let z = ((v - mean) / sigma).clamp(-TRUNCATION, TRUNCATION);
            (normal_cdf(z) - normal_tail(TRUNCATION)) / mass
        };
        if observed <= tol {
            cdf(0.0)
        } else if observed >= upper - tol {
            1.0 - cdf(upper)
        } else if (observed - mean).abs() > width {
            0.0
        } else {
            let z = (observed - mean) / sigma;
            (-0.5 * z * z).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt() * mass)
        }
    }

    fn truncated_normal<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        loop {
            let z: f64 = rng.sample(StandardNormal);
            if z.abs() <= TRUNCATION {
                return z * self.params.sigma;
            }
        }
    }

    fn grid_shape(&self, resolution: f64) -> (usize, usize) {
        let nx = (self.params.width / resolution).round() as usize + 1;
        let ny = (self.params.height / resolution).round() as usize + 1;
        (nx, ny)
    }
}

impl LatentMdpFamily for LightDarkEnv {
    type State = LdState;

    fn name(&self) -> &str {
        "lightdark"
    }

    fn num_latents(&self) -> usize {
        2
    }

    fn num_actions(&self) -> usize {
        4
    }

    fn action_label(&self, action: Action) -> &'static str {
        ["up", "down", "left", "right"][action]
    }

    fn reward(&self, state: &LdState, latent: LatentVar, action: Action) -> f64 {
        self.successor_support(state, latent, action)
            .iter()
            .map(|(next, w)| w * self.transition_reward(state, latent, action, next))
            .sum()
    }

    fn transition_reward(
        &self,
        state: &LdState,
        latent: LatentVar,
        _action: Action,
        next: &LdState,
    ) -> f64 {
        self.native_transition_reward(state, latent, next) + self.shift
    }

    fn transition_likelihood(
        &self,
        state: &LdState,
        latent: LatentVar,
        action: Action,
        next: &LdState,
    ) -> f64 {
        if state.done {
            return if next == state { 1.0 } else { 0.0 };
        }
        let (dx, dy) = self.displacement(action);
        let px = self.axis_likelihood(state.x + dx, next.x, self.params.width);
        let py = self.axis_likelihood(state.y + dy, next.y, self.params.height);
        if px == 0.0 || py == 0.0 {
            return 0.0;
        }
        // The flags are a deterministic function of the landing point and the latent.
        let landed_done = self.captured_goal(next.x, next.y).is_some();
        let revealed = match state.revealed {
            None if !landed_done && next.x <= self.params.wall_x => Some(latent),
            other => other,
        };
        if next.done == landed_done && next.revealed == revealed {
            px * py
        } else {
            0.0
        }
    }

    fn sample_next<R: Rng + ?Sized>(
        &self,
        state: &LdState,
        latent: LatentVar,
        action: Action,
        rng: &mut R,
    ) -> LdState {
        let noise = if self.params.sigma > 0.0 {
            (self.truncated_normal(rng), self.truncated_normal(rng))
        } else {
            (0.0, 0.0)
        };
        self.advance(state, latent, action, noise)
    }

    fn successor_support(
        &self,
        state: &LdState,
        latent: LatentVar,
        action: Action,
    ) -> Vec<(LdState, f64)> {
        if state.done {
            return vec![(*state, 1.0)];
        }
        let sigma = self.params.sigma;
        if sigma == 0.0 {
            return vec![(self.advance(state, latent, action, (0.0, 0.0)), 1.0)];
        }
        let mut out = Vec::with_capacity(9);
        for (zx, wx) in QUADRATURE {
            for (zy, wy) in QUADRATURE {
                out.push((
                    self.advance(state, latent, action, (zx * sigma, zy * sigma)),
                    wx * wy,
                ));
            }
        }
        out
    }

    fn initial_state(&self) -> LdState {
        LdState::at(self.params.start[0], self.params.start[1])
    }

    fn prior(&self) -> &Belief {
        &self.prior
    }

    fn state_distance(&self, a: &LdState, b: &LdState) -> f64 {
        let mut d = (a.x - b.x).hypot(a.y - b.y);
        if a.revealed != b.revealed {
            d += FLAG_DISTANCE;
        }
        if a.done != b.done {
            d += FLAG_DISTANCE;
        }
        d
    }

    fn is_terminal(&self, state: &LdState) -> bool {
        state.done
    }

    fn r_max(&self) -> f64 {
        self.r_max
    }

    fn reward_shift(&self) -> f64 {
        self.shift
    }

    fn lipschitz_reward(&self) -> f64 {
        self.l_r
    }

    fn lipschitz_transition(&self) -> f64 {
        self.l_p
    }

    fn is_discrete(&self) -> bool {
        false
    }

    /// Regular grid nodes in row-major order (`x` fastest), then one terminal node.
    fn value_nodes(&self, resolution: f64) -> Vec<LdState> {
        let (nx, ny) = self.grid_shape(resolution);
        let mut nodes = Vec::with_capacity(nx * ny + 1);
        for j in 0..ny {
            for i in 0..nx {
                nodes.push(LdState::at(i as f64 * resolution, j as f64 * resolution));
            }
        }
        nodes.push(LdState {
            x: 0.0,
            y: 0.0,
            revealed: None,
            done: true,
        });
        nodes
    }

    /// Bilinear weights; the revealed flag does not enter latent values.
    fn node_weights(&self, resolution: f64, state: &LdState) -> Stencil {
        let (nx, ny) = self.grid_shape(resolution);
        if state.done {
            return vec![(nx * ny, 1.0)];
        }
        let cell = |v: f64, n: usize| {
            let mut t = v / resolution;
            if (t - t.round()).abs() < 1e-9 {
                t = t.round();
            }
            let i = (t.floor().max(0.0) as usize).min(n - 2);
            (i, (t - i as f64).clamp(0.0, 1.0))
        };
        let (i, fx) = cell(state.x, nx);
        let (j, fy) = cell(state.y, ny);
        let mut out = Vec::with_capacity(4);
        for (di, wx) in [(0, 1.0 - fx), (1, fx)] {
            for (dj, wy) in [(0, 1.0 - fy), (1, fy)] {
                let w = wx * wy;
                if w > 0.0 {
                    out.push(((j + dj) * nx + i + di, w));
                }
            }
        }
        out
    }
}

/// Upper tail of the standard normal.
pub(crate) fn normal_tail(z: f64) -> f64 {
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

fn normal_cdf(z: f64) -> f64 {
    1.0 - normal_tail(z)
}
