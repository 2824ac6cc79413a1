//! Maximum-weight assignment of agents to slots.

use ndarray::Array2;

use crate::error::{AuctionError, Result};
use crate::model::CtrModel;
use crate::scalar::Scalar;

/// Agent shown in each slot and the total weight collected.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment<S> {
    pub agent_in_slot: Vec<usize>,
    pub value: S,
}

/// `sum_j weights[agent_in_slot[j]][j]`, summed in slot order.
pub fn assignment_value<S: Scalar>(weights: &Array2<S>, agent_in_slot: &[usize]) -> S {
    agent_in_slot
        .iter()
        .enumerate()
        .map(|(j, &i)| weights[[i, j]])
        .sum()
}

/// Hungarian algorithm on a `k x m` weight matrix (`k >= m`), maximizing the
/// total weight of an injective slot-to-agent map. O(m^2 k).
pub fn max_weight_assignment<S: Scalar>(weights: &Array2<S>) -> Result<Assignment<S>> {
    let (k, m) = weights.dim();
    if k < m {
        return Err(AuctionError::InvalidConfig(format!(
            "assignment needs at least as many agents ({k}) as slots ({m})"
        )));
    }
    if weights.iter().any(|w| !w.is_finite()) {
        return Err(AuctionError::InvalidValue {
            field: "weights",
            reason: "assignment weights must be finite".into(),
        });
    }
    // Rows are slots, columns agents; potentials u (rows) and v (columns) are 1-based.
    let cost = |slot: usize, agent: usize| -weights[[agent, slot]];
    let inf = S::infinity();
    let mut u = vec![S::zero(); m + 1];
    let mut v = vec![S::zero(); k + 1];
    let mut owner = vec![0usize; k + 1];
    let mut way = vec![0usize; k + 1];

    for row in 1..=m {
        owner[0] = row;
        let mut col0 = 0usize;
        let mut minv = vec![inf; k + 1];
        let mut used = vec![false; k + 1];
        loop {
            used[col0] = true;
            let row0 = owner[col0];
            let mut delta = inf;
            let mut col1 = 0usize;
            for col in 1..=k {
                if used[col] {
                    continue;
                }
                let cur = cost(row0 - 1, col - 1) - u[row0] - v[col];
                if cur < minv[col] {
                    minv[col] = cur;
                    way[col] = col0;
                }
                if minv[col] < delta {
                    delta = minv[col];
                    col1 = col;
                }
            }
            for col in 0..=k {
                if used[col] {
                    u[owner[col]] += delta;
                    v[col] -= delta;
                } else {
                    minv[col] -= delta;
                }
            }
            col0 = col1;
            if owner[col0] == 0 {
                break;
            }
        }
        loop {
            let col1 = way[col0];
            owner[col0] = owner[col1];
            col0 = col1;
            if col0 == 0 {
                break;
            }
        }
    }

    let mut agent_in_slot = vec![0usize; m];
    for col in 1..=k {
        if owner[col] != 0 {
            agent_in_slot[owner[col] - 1] = col - 1;
        }
    }
    let value = assignment_value(weights, &agent_in_slot);
    Ok(Assignment {
        agent_in_slot,
        value,
    })
}

/// Welfare weights `w_ij = mu_ij * v_i`.
pub fn welfare_weights<S: Scalar>(mu: &Array2<S>, values: &[S]) -> Result<Array2<S>> {
    if values.len() != mu.nrows() {
        return Err(AuctionError::DimensionMismatch {
            what: "values",
            expected: mu.nrows(),
            got: values.len(),
        });
    }
    Ok(Array2::from_shape_fn(mu.dim(), |(i, j)| mu[[i, j]] * values[i]))
}

/// Optimal assignment for separable CTRs by sorting: the `m` largest
/// `alpha_i v_i` go to the slots in order of decreasing `beta_j`.
pub fn separable_assignment<S: Scalar>(ctr: &CtrModel<S>, values: &[S]) -> Result<Assignment<S>> {
    let (Some(alpha), Some(beta)) = (ctr.alpha(), ctr.beta()) else {
        return Err(AuctionError::RegimeMismatch {
            regime: "separable",
            reason: "alpha and beta factors are missing".into(),
        });
    };
    let weights = welfare_weights(ctr.mu(), values)?;
    let by_desc = |xs: &[S]| {
        let mut order: Vec<usize> = (0..xs.len()).collect();
        order.sort_by(|&a, &b| xs[b].partial_cmp(&xs[a]).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b)));
        order
    };
    let agent_scores: Vec<S> = alpha.iter().zip(values).map(|(&a, &v)| a * v).collect();
    let agents = by_desc(&agent_scores);
    let slots = by_desc(beta);
    let mut agent_in_slot = vec![0usize; beta.len()];
    for (&slot, &agent) in slots.iter().zip(&agents) {
        agent_in_slot[slot] = agent;
    }
    let value = assignment_value(&weights, &agent_in_slot);
    Ok(Assignment {
        agent_in_slot,
        value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn single_slot_is_argmax() {
        let w = array![[0.2], [0.9], [0.4]];
        let a = max_weight_assignment(&w).unwrap();
        assert_eq!(a.agent_in_slot, vec![1]);
        assert_eq!(a.value, 0.9);
    }

    #[test]
    fn two_by_two_picks_better_diagonal() {
        let w = array![[0.3, 0.25], [0.9, 0.2]];
        let a = max_weight_assignment(&w).unwrap();
        assert_eq!(a.agent_in_slot, vec![1, 0]);
        assert!((a.value - 1.15f64).abs() < 1e-15);
    }

    #[test]
    fn rejects_more_slots_than_agents() {
        assert!(max_weight_assignment(&array![[1.0, 2.0]]).is_err());
        assert!(max_weight_assignment(&array![[f64::NAN]]).is_err());
    }

    #[test]
    fn separable_shortcut_pairs_sorted_factors() {
        let ctr = CtrModel::separable(vec![0.5, 0.9, 0.1], vec![0.8, 0.3]).unwrap();
        let a = separable_assignment(&ctr, &[1.0, 1.0, 10.0]).unwrap();
        assert_eq!(a.agent_in_slot, vec![2, 1]);
        let h = max_weight_assignment(&welfare_weights(ctr.mu(), &[1.0, 1.0, 10.0]).unwrap()).unwrap();
        assert_eq!(a, h);
    }
}
