use alloc::collections::{BTreeSet, VecDeque};
use alloc::format;
use alloc::vec::Vec;
use num_integer::Integer;
use num_traits::Zero;

use super::{ExactError, TruncatedChain};
use crate::graph::tarjan_scc;
use crate::model::GwiModel;
use crate::structure::affine_dimension;
use crate::vector::CountVector;

/// The recurrent class reached from 0, as seen inside the truncation.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassReport {
    /// Chain indices of the class states, ascending.
    pub indices: Vec<usize>,
    pub states: Vec<CountVector>,
    pub period: u64,
    pub aperiodic: bool,
    /// Least `n` with `P_{e_i}(Y_n = 0) > 0` for every type `i`, where `Y` is
    /// the immigration-free process.
    pub n_star: usize,
    /// Shortest positive-probability path from 0 into the class.
    pub entry_path: Vec<CountVector>,
    /// Largest one-step probability of leaving the class inside the
    /// truncation, escape included.
    pub max_escape: f64,
    pub leaking_states: usize,
    /// Boundary states discarded because every path from them leaves the
    /// truncation; moves into them count as escape.
    pub pruned: usize,
}

impl ClassReport {
    pub fn contains(&self, chain_index: usize) -> bool {
        self.indices.binary_search(&chain_index).is_ok()
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Dimension of the affine hull of the class states.
    pub fn affine_dimension(&self) -> usize {
        affine_dimension(&self.states)
    }
}

/// Finds the unique terminal strongly connected component among the states
/// reachable from 0, its period, and the extinction-step bound `n*`.
pub fn communication_class(chain: &TruncatedChain, model: &GwiModel) -> Result<ClassReport, ExactError> {
    let zero = chain.require_index(&model.zero_state())?;
    let n = chain.len();

    // Reachability from 0 with BFS parents.
    let mut parent = alloc::vec![usize::MAX; n];
    let mut seen = alloc::vec![false; n];
    let mut order = Vec::new();
    let mut queue = VecDeque::from([zero]);
    seen[zero] = true;
    while let Some(u) = queue.pop_front() {
        order.push(u);
        for v in chain.successors(u) {
            if !seen[v] {
                seen[v] = true;
                parent[v] = u;
                queue.push_back(v);
            }
        }
    }

    // A terminal component in which every state leaks is an artifact of the
    // boundary: its successors lie outside the truncation. Drop such
    // components and repeat; edges into dropped states count as escape.
    let mut alive = seen;
    let (comp, class_comp) = loop {
        let live: Vec<usize> = order.iter().copied().filter(|&u| alive[u]).collect();
        if live.is_empty() {
            return Err(ExactError::RadiusTooSmall(format!(
                "every closed component reachable from 0 leaks out of radius {}",
                chain.radius()
            )));
        }
        let mut local = alloc::vec![usize::MAX; n];
        for (k, &u) in live.iter().enumerate() {
            local[u] = k;
        }
        let succ = |u: usize| chain.successors(u).filter(|&v| alive[v]);
        let (ncomp, comp) = tarjan_scc(live.len(), |k| succ(live[k]).map(|v| local[v]).collect::<Vec<_>>());
        let mut terminal = alloc::vec![true; ncomp];
        let mut all_leak = alloc::vec![true; ncomp];
        for (k, &u) in live.iter().enumerate() {
            if succ(u).any(|v| comp[local[v]] != comp[k]) {
                terminal[comp[k]] = false;
            }
            if chain.row(u).escape.is_zero() {
                all_leak[comp[k]] = false;
            }
        }
        let spurious: Vec<usize> = (0..ncomp).filter(|&c| terminal[c] && all_leak[c]).collect();
        if !spurious.is_empty() {
            for (k, &u) in live.iter().enumerate() {
                if spurious.contains(&comp[k]) {
                    alive[u] = false;
                }
            }
            continue;
        }
        let terminals: Vec<usize> = (0..ncomp).filter(|&c| terminal[c]).collect();
        if terminals.len() != 1 {
            return Err(ExactError::NoClosedClass { terminal: terminals.len() });
        }
        let by_state: Vec<usize> = (0..n).map(|u| if alive[u] { comp[local[u]] } else { usize::MAX }).collect();
        break (by_state, terminals[0]);
    };
    let mut indices: Vec<usize> = (0..n).filter(|&u| comp[u] == class_comp).collect();
    indices.sort_unstable();

    // BFS order visits nearer states first, so the first class state in
    // `order` has the shortest entry path.
    let first = *order.iter().find(|&&u| comp[u] == class_comp).expect("class is non-empty");
    let mut entry = alloc::vec![first];
    let mut cur = first;
    while cur != zero {
        cur = parent[cur];
        entry.push(cur);
    }
    entry.reverse();

    let period = class_period(chain, &indices);
    let outflow: Vec<f64> = indices.iter().map(|&i| class_outflow(chain, i, |j| comp[j] == class_comp)).collect();
    let max_escape = outflow.iter().copied().fold(0.0, f64::max);
    let leaking_states = outflow.iter().filter(|&&w| w > 0.0).count();
    let pruned = order.iter().filter(|&&u| !alive[u]).count();
    let n_star = extinction_bound(model, chain.radius())?;

    Ok(ClassReport {
        states: indices.iter().map(|&i| chain.state(i).clone()).collect(),
        indices,
        period,
        aperiodic: period == 1,
        n_star,
        entry_path: entry.into_iter().map(|i| chain.state(i).clone()).collect(),
        max_escape,
        leaking_states,
        pruned,
    })
}

/// One-step probability of leaving `member` from state `i`, escape included.
pub(crate) fn class_outflow(chain: &TruncatedChain, i: usize, member: impl Fn(usize) -> bool) -> f64 {
    chain.escape(i) + chain.float_row(i).iter().filter(|(j, _)| !member(*j)).map(|(_, w)| w).sum::<f64>()
}

/// gcd of `level(u) + 1 − level(v)` over all edges inside the class, with
/// levels from a BFS rooted in the class.
fn class_period(chain: &TruncatedChain, indices: &[usize]) -> u64 {
    let member = |i: usize| indices.binary_search(&i).is_ok();
    let mut level = alloc::collections::BTreeMap::new();
    let root = indices[0];
    level.insert(root, 0i64);
    let mut queue = VecDeque::from([root]);
    let mut g: u64 = 0;
    while let Some(u) = queue.pop_front() {
        let lu = level[&u];
        for v in chain.successors(u).filter(|&v| member(v)) {
            match level.get(&v) {
                Some(&lv) => g = g.gcd(&(lu + 1 - lv).unsigned_abs()),
                None => {
                    level.insert(v, lu + 1);
                    queue.push_back(v);
                }
            }
        }
    }
    g
}

/// Support of `S(y)` restricted to norm `≤ radius`.
fn offspring_support(supports: &[Vec<CountVector>], y: &CountVector, radius: u64) -> BTreeSet<CountVector> {
    let p = y.dim();
    let mut set = BTreeSet::from([CountVector::zeros(p)]);
    for (i, &count) in y.entries().iter().enumerate() {
        for _ in 0..count {
            let mut next = BTreeSet::new();
            for s in &set {
                for t in &supports[i] {
                    let u = s + t;
                    if u.norm() <= radius {
                        next.insert(u);
                    }
                }
            }
            set = next;
        }
    }
    set
}

/// `n* = max_i` (shortest path from `e_i` to 0 in the support digraph of the
/// immigration-free process inside the truncation).
fn extinction_bound(model: &GwiModel, radius: u64) -> Result<usize, ExactError> {
    let p = model.dim();
    let supports: Vec<Vec<CountVector>> = model.offspring_laws().iter().map(|l| l.support().cloned().collect()).collect();
    let zero = CountVector::zeros(p);
    let mut worst = 0;
    for i in 0..p {
        let start = CountVector::unit(p, i);
        if start.norm() > radius {
            return Err(ExactError::RadiusTooSmall(format!("e_{} lies outside radius {radius}", i + 1)));
        }
        let mut dist = alloc::collections::BTreeMap::from([(start.clone(), 0usize)]);
        let mut queue = VecDeque::from([start]);
        let mut found = None;
        'bfs: while let Some(y) = queue.pop_front() {
            let d = dist[&y];
            for z in offspring_support(&supports, &y, radius) {
                if z == zero {
                    found = Some(d + 1);
                    break 'bfs;
                }
                if !dist.contains_key(&z) {
                    dist.insert(z.clone(), d + 1);
                    queue.push_back(z);
                }
            }
        }
        let steps = found.ok_or_else(|| {
            ExactError::RadiusTooSmall(format!(
                "extinction of the type-{} lineage cannot be certified inside radius {radius}",
                i + 1
            ))
        })?;
        worst = worst.max(steps);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{build_truncated_chain, ChainOptions};
    use crate::fixtures;
    use crate::law::FiniteLaw;

    fn class_of(model: &GwiModel, radius: u64) -> ClassReport {
        let chain = build_truncated_chain(model, radius, &ChainOptions::default()).unwrap();
        communication_class(&chain, model).unwrap()
    }

    #[test]
    fn immigration_only_class_is_a_fixed_point() {
        let report = class_of(&fixtures::immigration_only(&[1, 0]), 5);
        assert_eq!(report.states, alloc::vec![CountVector::new(alloc::vec![1, 0])]);
        assert!(report.aperiodic);
        assert_eq!(report.n_star, 1);
        assert_eq!(report.entry_path.len(), 2);
        assert_eq!(report.max_escape, 0.0);
    }

    #[test]
    fn model_b_class_lies_on_the_certificate_line() {
        let report = class_of(&fixtures::model_b(), 15);
        assert!(report.aperiodic);
        assert!(report.states.iter().all(|x| x[0] == x[1] + 1));
        assert_eq!(report.affine_dimension(), 1);
    }

    #[test]
    fn model_a_class_has_no_type_two() {
        let report = class_of(&fixtures::model_a(), 12);
        assert!(report.states.iter().all(|x| x[1] == 0));
        assert_eq!(report.len(), 13);
    }

    #[test]
    fn class_entered_after_two_steps() {
        // 0 → (1,0) → (1,1) → (1,1) → …
        let xi1 = FiniteLaw::point(CountVector::new(alloc::vec![0, 1]));
        let xi2 = FiniteLaw::point(CountVector::new(alloc::vec![0, 0]));
        let eta = FiniteLaw::point(CountVector::new(alloc::vec![1, 0]));
        let model = GwiModel::new(alloc::vec![xi1, xi2], eta).unwrap();
        let report = class_of(&model, 4);
        assert_eq!(report.states, alloc::vec![CountVector::new(alloc::vec![1, 1])]);
        assert_eq!(report.period, 1);
        assert_eq!(report.entry_path.len(), 3);
    }

    #[test]
    fn n_star_counts_generations() {
        // Type 1 always has exactly one type-2 child; type 2 has none.
        let xi1 = FiniteLaw::point(CountVector::new(alloc::vec![0, 1]));
        let xi2 = FiniteLaw::point(CountVector::new(alloc::vec![0, 0]));
        let eta = FiniteLaw::from_triples(2, &[(&[0, 0], 1, 2), (&[1, 0], 1, 2)]);
        let model = GwiModel::new(alloc::vec![xi1, xi2], eta).unwrap();
        assert_eq!(class_of(&model, 6).n_star, 2);
    }

    #[test]
    fn immortal_lineage_cannot_be_certified() {
        let xi = FiniteLaw::point(CountVector::new(alloc::vec![1]));
        let model = GwiModel::new(alloc::vec![xi], FiniteLaw::point(CountVector::new(alloc::vec![0]))).unwrap();
        let chain = build_truncated_chain(&model, 5, &ChainOptions::default()).unwrap();
        assert!(matches!(communication_class(&chain, &model), Err(ExactError::RadiusTooSmall(_))));
    }
}
