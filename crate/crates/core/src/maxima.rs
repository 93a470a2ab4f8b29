//! Exact maximization of `Σ gain(x) − Σ pairwise interaction` over small point
//! configurations, by depth-first search with pruning.
//!
//! Candidates with nonpositive gain never enter an optimal configuration
//! (interactions are nonnegative), so the search runs over positive-gain
//! candidates sorted by decreasing gain. A partial configuration is cut as
//! soon as even the best remaining gains cannot beat the incumbent. The empty
//! configuration scores 0, which models filling unused slots with the point at
//! infinity.

#[derive(Debug, Clone, PartialEq)]
pub struct BestConfig {
    pub value: f64,
    /// Indices of the chosen candidates, ascending; fewer than `slots` entries
    /// means the remaining slots are at infinity.
    pub indices: Vec<usize>,
}

/// Maximizes `Σ_{i∈S} gains[i] − Σ_{i<j∈S} pair(i,j)` over sets `S` of at most
/// `slots` distinct candidates. `pair` must be symmetric and nonnegative;
/// `f64::INFINITY` marks a forbidden pair.
pub fn best_configuration(
    gains: &[f64],
    slots: usize,
    pair: &dyn Fn(usize, usize) -> f64,
) -> BestConfig {
    let mut order: Vec<usize> = (0..gains.len()).filter(|&i| gains[i] > 0.0).collect();
    order.sort_by(|&a, &b| gains[b].partial_cmp(&gains[a]).unwrap().then(a.cmp(&b)));

    // prefix[i] = sum of the i largest positive gains
    let mut prefix = Vec::with_capacity(order.len() + 1);
    prefix.push(0.0);
    for &i in &order {
        prefix.push(prefix.last().unwrap() + gains[i]);
    }

    let mut best = BestConfig { value: 0.0, indices: Vec::new() };
    let mut chosen: Vec<usize> = Vec::with_capacity(slots);
    dfs(gains, &order, &prefix, slots, pair, 0, 0.0, &mut chosen, &mut best);
    best.indices.sort_unstable();
    best
}

#[allow(clippy::too_many_arguments)]
fn dfs(
    gains: &[f64],
    order: &[usize],
    prefix: &[f64],
    slots_left: usize,
    pair: &dyn Fn(usize, usize) -> f64,
    start: usize,
    value: f64,
    chosen: &mut Vec<usize>,
    best: &mut BestConfig,
) {
    if value > best.value {
        best.value = value;
        best.indices = chosen.clone();
    }
    if slots_left == 0 {
        return;
    }
    for pos in start..order.len() {
        // Even the largest remaining gains cannot beat the incumbent; gains
        // shrink along `order`, so every later position is cut as well.
        let take = slots_left.min(order.len() - pos);
        if value + (prefix[pos + take] - prefix[pos]) <= best.value {
            break;
        }
        let cand = order[pos];
        let mut add = gains[cand];
        let mut feasible = true;
        for &c in chosen.iter() {
            let w = pair(c, cand);
            if w.is_infinite() {
                feasible = false;
                break;
            }
            add -= w;
        }
        if !feasible {
            continue;
        }
        chosen.push(cand);
        dfs(gains, order, prefix, slots_left - 1, pair, pos + 1, value + add, chosen, best);
        chosen.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Plain enumeration over all subsets of size ≤ slots, no pruning.
    fn brute(gains: &[f64], slots: usize, pair: &dyn Fn(usize, usize) -> f64) -> f64 {
        fn rec(
            gains: &[f64],
            slots: usize,
            pair: &dyn Fn(usize, usize) -> f64,
            start: usize,
            set: &mut Vec<usize>,
            best: &mut f64,
        ) {
            let mut value = 0.0;
            let mut ok = true;
            for (a, &i) in set.iter().enumerate() {
                value += gains[i];
                for &j in &set[a + 1..] {
                    let w = pair(i, j);
                    if w.is_infinite() {
                        ok = false;
                    }
                    value -= w;
                }
            }
            if ok && value > *best {
                *best = value;
            }
            if set.len() == slots {
                return;
            }
            for next in start..gains.len() {
                set.push(next);
                rec(gains, slots, pair, next + 1, set, best);
                set.pop();
            }
        }
        let mut best = 0.0;
        rec(gains, slots, pair, 0, &mut Vec::new(), &mut best);
        best
    }

    #[test]
    fn matches_brute_force_on_random_instances() {
        let mut state = 0x9E3779B97F4A7C15u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for trial in 0..50 {
            let n = 3 + (trial % 6);
            let gains: Vec<f64> = (0..n).map(|_| next() * 4.0 - 1.0).collect();
            let costs: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..n).map(|_| next() * 2.0).collect())
                .collect();
            let pair = |i: usize, j: usize| {
                let (a, b) = if i < j { (i, j) } else { (j, i) };
                if (a + b) % 7 == 0 { f64::INFINITY } else { costs[a][b] }
            };
            for slots in 1..=4 {
                let fast = best_configuration(&gains, slots, &pair);
                let slow = brute(&gains, slots, &pair);
                assert!(
                    (fast.value - slow).abs() < 1e-12,
                    "trial {trial} slots {slots}: {} vs {slow}",
                    fast.value
                );
            }
        }
    }

    #[test]
    fn empty_configuration_wins_for_nonpositive_gains() {
        let gains = [-1.0, 0.0, -0.5];
        let out = best_configuration(&gains, 2, &|_, _| 1.0);
        assert_eq!(out.value, 0.0);
        assert!(out.indices.is_empty());
    }

    #[test]
    fn slots_cap_is_respected() {
        let gains = [1.0, 1.0, 1.0];
        let out = best_configuration(&gains, 2, &|_, _| 0.0);
        assert_eq!(out.value, 2.0);
        assert_eq!(out.indices.len(), 2);
    }
}
