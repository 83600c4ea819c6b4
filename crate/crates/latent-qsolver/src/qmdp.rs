use core_bamdp::{Action, Belief, LatentMdpFamily, LatentVar};

use crate::table::{argmax, LatentQTable};

/// `sum_phi b(phi) * Q(s, phi, a)`.
pub fn qmdp_value<M: LatentMdpFamily>(
    table: &LatentQTable,
    model: &M,
    state: &M::State,
    belief: &Belief,
    action: Action,
) -> f64 {
    belief
        .weights()
        .iter()
        .enumerate()
        .filter(|(_, w)| **w > 0.0)
        .map(|(l, w)| w * table.value(model, state, LatentVar(l), action))
        .sum()
}

pub fn qmdp_action_values<M: LatentMdpFamily>(
    table: &LatentQTable,
    model: &M,
    state: &M::State,
    belief: &Belief,
) -> Vec<f64> {
    (0..model.num_actions())
        .map(|a| qmdp_value(table, model, state, belief, a))
        .collect()
}

/// Greedy QMDP action, ties broken by action order.
pub fn qmdp_action<M: LatentMdpFamily>(
    table: &LatentQTable,
    model: &M,
    state: &M::State,
    belief: &Belief,
) -> Action {
    argmax(&qmdp_action_values(table, model, state, belief))
}
