use core_bamdp::{Action, Belief, LatentMdpFamily, Policy};
use latent_qsolver::{qmdp_action, LatentQTable};

/// Greedy on `sum_phi b(phi) Q(s, phi, a)`; never values information.
#[derive(Debug, Clone, Copy)]
pub struct QmdpPolicy<'a> {
    pub table: &'a LatentQTable,
}

impl<'a> QmdpPolicy<'a> {
    pub fn new(table: &'a LatentQTable) -> Self {
        Self { table }
    }
}

/// QMDP action at `(s, b)`, ties broken by action order.
pub fn qmdp_policy<M: LatentMdpFamily>(
    table: &LatentQTable,
    model: &M,
    state: &M::State,
    belief: &Belief,
) -> Action {
    qmdp_action(table, model, state, belief)
}

impl<M: LatentMdpFamily> Policy<M> for QmdpPolicy<'_> {
    fn act(&self, model: &M, state: &M::State, belief: &Belief) -> Action {
        qmdp_action(self.table, model, state, belief)
    }
}
