use core_bamdp::{Action, Belief, LatentMdpFamily, LatentVar, Policy};
use latent_qsolver::{argmax, LatentQTable, LipschitzProfile};

use crate::config::SolverConfig;
use crate::error::{BcpaceError, Result};
use crate::index::{Neighbor, SampleSet};
use crate::sample::Sample;

/// Beliefs with more mass than this on a latent count as supporting it.
pub const SUPPORT_FLOOR: f64 = 1e-9;

/// The optimistic nearest-neighbor action-value estimate over a sample set.
#[derive(Debug, Clone)]
pub struct QEstimate<S> {
    pub(crate) config: SolverConfig,
    pub(crate) profile: LipschitzProfile,
    pub(crate) latent_q: Option<LatentQTable>,
    pub(crate) samples: SampleSet<S>,
}

/// How an estimate was formed for one query.
#[derive(Debug, Clone, PartialEq)]
pub enum Basis {
    /// Absorbing terminal: `reward_shift / (1 - gamma)`.
    Terminal(f64),
    /// Belief close enough to a vertex to use that latent's Q-value.
    Seeded(f64),
    /// Neighbor average with ceiling `upper`; `neighbors` holds `(l_q_tilde * distance, q_value)`.
    Neighbors {
        upper: f64,
        neighbors: Vec<(f64, f64)>,
    },
}

impl<S: Clone + PartialEq> QEstimate<S> {
    /// An estimate with no samples.
    pub fn new<M: LatentMdpFamily<State = S>>(
        model: &M,
        config: SolverConfig,
        latent_q: Option<LatentQTable>,
    ) -> Result<Self> {
        config.validate()?;
        let mut profile = LipschitzProfile::for_model(model, config.gamma, config.alpha)?;
        if let Some(l_q) = config.lipschitz_q {
            profile = profile.with_l_q(l_q)?;
        }
        if config.needs_latent_table() && latent_q.is_none() {
            return Err(BcpaceError::MissingLatentTable);
        }
        if let Some(table) = &latent_q {
            if !table.fits(model) {
                return Err(BcpaceError::LatentTableMismatch);
            }
        }
        let samples = SampleSet::new(profile.alpha, model.num_actions());
        Ok(Self {
            config,
            profile,
            latent_q,
            samples,
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn profile(&self) -> &LipschitzProfile {
        &self.profile
    }

    pub fn latent_q(&self) -> Option<&LatentQTable> {
        self.latent_q.as_ref()
    }

    pub fn samples(&self) -> &SampleSet<S> {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Constant ceiling `r_max + gamma * q_max`.
    pub fn q_tilde_max(&self) -> f64 {
        self.profile.r_max + self.config.gamma * self.profile.q_max()
    }

    /// Largest distance to a vertex at which latent seeding applies.
    pub fn seeding_radius(&self) -> f64 {
        self.config.epsilon / (self.profile.l_q * (1.0 + self.config.gamma))
    }

    /// Compound distance within which a k-th neighbor makes a query known.
    pub fn known_radius(&self) -> f64 {
        self.config.epsilon_d() / self.profile.l_q_tilde
    }

    /// The latent whose Q-value replaces the estimate at `belief`, if any.
    pub fn seeding_latent(&self, belief: &Belief) -> Option<LatentVar> {
        if !self.config.use_latent_init {
            return None;
        }
        let (latent, dist) = belief.nearest_vertex();
        (dist <= self.seeding_radius()).then_some(latent)
    }

    /// Per-query ceiling: the best supported latent value when enabled, else `q_tilde_max`.
    pub fn upper_bound<M: LatentMdpFamily<State = S>>(
        &self,
        model: &M,
        state: &S,
        belief: &Belief,
        action: Action,
    ) -> f64 {
        let ceiling = self.q_tilde_max();
        match (&self.latent_q, self.config.use_best_case_bound) {
            (Some(table), true) => belief
                .support(SUPPORT_FLOOR)
                .map(|l| table.value(model, state, l, action))
                .fold(f64::NEG_INFINITY, f64::max)
                .min(ceiling),
            _ => ceiling,
        }
    }

    pub(crate) fn basis_with<M: LatentMdpFamily<State = S>>(
        &self,
        model: &M,
        state: &S,
        belief: &Belief,
        action: Action,
        pending: &[Sample<S>],
    ) -> Basis {
        if model.is_terminal(state) {
            return Basis::Terminal(model.reward_shift() / (1.0 - self.config.gamma));
        }
        if let Some(latent) = self.seeding_latent(belief) {
            let table = self.latent_q.as_ref().expect("checked at construction");
            return Basis::Seeded(table.value(model, state, latent, action));
        }
        let upper = self.upper_bound(model, state, belief, action);
        let l_tilde = self.profile.l_q_tilde;
        // Anything farther contributes `upper` exactly, so the search can stop there.
        let reach = upper / l_tilde * (1.0 + 1e-12);
        let found = self
            .samples
            .knn(model, state, belief, action, self.config.k, reach, pending);
        let neighbors = found
            .iter()
            .map(|n| {
                (
                    l_tilde * n.distance,
                    self.samples.resolve(n.index, pending).q_value,
                )
            })
            .collect();
        Basis::Neighbors { upper, neighbors }
    }

    /// How the estimate at `(s, b, a)` is formed.
    pub fn basis<M: LatentMdpFamily<State = S>>(
        &self,
        model: &M,
        state: &S,
        belief: &Belief,
        action: Action,
    ) -> Basis {
        self.basis_with(model, state, belief, action, &[])
    }

    /// Value of a basis: a neighbor average counts missing neighbors at the ceiling.
    pub fn evaluate_basis(&self, basis: &Basis) -> f64 {
        match basis {
            Basis::Terminal(v) | Basis::Seeded(v) => *v,
            Basis::Neighbors { upper, neighbors } => {
                let k = self.config.k;
                let found: f64 = neighbors
                    .iter()
                    .map(|(bonus, q)| (bonus + q).min(*upper))
                    .sum();
                (found + (k - neighbors.len()) as f64 * upper) / k as f64
            }
        }
    }

    /// Optimistic estimate of `Q(s, b, a)`.
    pub fn estimate<M: LatentMdpFamily<State = S>>(
        &self,
        model: &M,
        state: &S,
        belief: &Belief,
        action: Action,
    ) -> f64 {
        self.evaluate_basis(&self.basis(model, state, belief, action))
    }

    pub(crate) fn action_values_with<M: LatentMdpFamily<State = S>>(
        &self,
        model: &M,
        state: &S,
        belief: &Belief,
        pending: &[Sample<S>],
    ) -> Vec<f64> {
        (0..model.num_actions())
            .map(|a| self.evaluate_basis(&self.basis_with(model, state, belief, a, pending)))
            .collect()
    }

    pub fn action_values<M: LatentMdpFamily<State = S>>(
        &self,
        model: &M,
        state: &S,
        belief: &Belief,
    ) -> Vec<f64> {
        self.action_values_with(model, state, belief, &[])
    }

    /// Greedy action; ties go to the lowest index.
    pub fn greedy_action<M: LatentMdpFamily<State = S>>(
        &self,
        model: &M,
        state: &S,
        belief: &Belief,
    ) -> Action {
        argmax(&self.action_values(model, state, belief))
    }

    pub(crate) fn is_known_with<M: LatentMdpFamily<State = S>>(
        &self,
        model: &M,
        state: &S,
        belief: &Belief,
        action: Action,
        pending: &[Sample<S>],
    ) -> bool {
        if model.is_terminal(state) || self.seeding_latent(belief).is_some() {
            return true;
        }
        let k = self.config.k;
        self.samples
            .knn(
                model,
                state,
                belief,
                action,
                k,
                self.known_radius(),
                pending,
            )
            .len()
            == k
    }

    /// Whether `(s, b, a)` is seeded or has `k` same-action samples within the known radius.
    pub fn is_known<M: LatentMdpFamily<State = S>>(
        &self,
        model: &M,
        state: &S,
        belief: &Belief,
        action: Action,
    ) -> bool {
        self.is_known_with(model, state, belief, action, &[])
    }

    /// The `k` nearest same-action samples without a radius bound.
    pub fn nearest<M: LatentMdpFamily<State = S>>(
        &self,
        model: &M,
        state: &S,
        belief: &Belief,
        action: Action,
    ) -> Vec<Neighbor> {
        self.samples.knn(
            model,
            state,
            belief,
            action,
            self.config.k,
            f64::INFINITY,
            &[],
        )
    }

    /// Append a sample starting at the optimistic ceiling.
    pub fn add_sample<M: LatentMdpFamily<State = S>>(
        &mut self,
        model: &M,
        mut sample: Sample<S>,
    ) -> usize {
        sample.q_value = self.q_tilde_max();
        self.samples.push(model, sample)
    }
}

impl<M: LatentMdpFamily> Policy<M> for QEstimate<M::State> {
    fn act(&self, model: &M, state: &M::State, belief: &Belief) -> Action {
        self.greedy_action(model, state, belief)
    }
}
