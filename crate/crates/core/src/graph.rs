//! Explicit-graph helpers shared by the solvers: SCCs, reachability and
//! cycle conditions over priority labellings.

/// Strongly connected components of the subgraph induced by `alive`
/// (iterative Tarjan). Components come out in reverse topological order.
pub fn sccs(adj: &[Vec<usize>], alive: &[bool]) -> Vec<Vec<usize>> {
    let n = adj.len();
    const UNSEEN: usize = usize::MAX;
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut out = Vec::new();
    let mut counter = 0;

    for root in 0..n {
        if !alive[root] || index[root] != UNSEEN {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut next)) = call.last_mut() {
            if *next < adj[v].len() {
                let w = adj[v][*next];
                *next += 1;
                if !alive[w] {
                    continue;
                }
                if index[w] == UNSEEN {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    out.push(comp);
                }
            }
        }
    }
    out
}

/// Whether a component carries at least one cycle inside `alive`.
pub fn is_nontrivial(adj: &[Vec<usize>], comp: &[usize]) -> bool {
    comp.len() > 1 || adj[comp[0]].contains(&comp[0])
}

/// Forward reachability from `roots` inside `alive`.
pub fn reachable(adj: &[Vec<usize>], roots: impl IntoIterator<Item = usize>, alive: &[bool]) -> Vec<bool> {
    let mut seen = vec![false; adj.len()];
    let mut stack: Vec<usize> = Vec::new();
    for r in roots {
        if alive[r] && !seen[r] {
            seen[r] = true;
            stack.push(r);
        }
    }
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if alive[w] && !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen
}

/// Nodes from which some node of `targets` is reachable inside `alive`.
pub fn can_reach(adj: &[Vec<usize>], targets: &[bool], alive: &[bool]) -> Vec<bool> {
    let n = adj.len();
    let mut pred = vec![Vec::new(); n];
    for v in 0..n {
        if !alive[v] {
            continue;
        }
        for &w in &adj[v] {
            if alive[w] {
                pred[w].push(v);
            }
        }
    }
    let roots = (0..n).filter(|v| targets[*v] && alive[*v]);
    reachable(&pred, roots, alive)
}

/// Nodes lying on a cycle (inside `alive`) whose minimal priority is odd.
///
/// For every odd `k` the subgraph of priorities `>= k` is decomposed into
/// SCCs; a nontrivial SCC containing priority `k` carries such a cycle.
pub fn odd_cycle_nodes(adj: &[Vec<usize>], prio: &[u32], alive: &[bool]) -> Vec<bool> {
    let n = adj.len();
    let mut marked = vec![false; n];
    let max = (0..n).filter(|v| alive[*v]).map(|v| prio[v]).max().unwrap_or(0);
    let mut k = 1;
    while k <= max {
        let sub: Vec<bool> = (0..n).map(|v| alive[v] && prio[v] >= k).collect();
        for comp in sccs(adj, &sub) {
            if is_nontrivial(adj, &comp) && comp.iter().any(|v| prio[*v] == k) {
                for v in comp {
                    marked[v] = true;
                }
            }
        }
        k += 2;
    }
    marked
}

/// Whether some cycle inside `alive` has odd minimal priority.
pub fn has_odd_cycle(adj: &[Vec<usize>], prio: &[u32], alive: &[bool]) -> bool {
    odd_cycle_nodes(adj, prio, alive).iter().any(|b| *b)
}

/// Nodes lying on a cycle that is good for every priority column at once
/// (minimal priority even in each), following the usual Streett-emptiness
/// decomposition: an SCC whose minimum is odd for some column loses the
/// nodes carrying that minimum and is split again.
pub fn good_cycle_nodes(adj: &[Vec<usize>], prios: &[&[u32]], alive: &[bool]) -> Vec<bool> {
    let n = adj.len();
    let mut good = vec![false; n];
    let mut work: Vec<Vec<usize>> = sccs(adj, alive);
    while let Some(comp) = work.pop() {
        if !is_nontrivial(adj, &comp) {
            continue;
        }
        let bad = prios.iter().find_map(|p| {
            let m = comp.iter().map(|v| p[*v]).min().unwrap();
            (m % 2 == 1).then_some((p, m))
        });
        match bad {
            None => {
                for v in comp {
                    good[v] = true;
                }
            }
            Some((p, m)) => {
                let mut sub = vec![false; n];
                for &v in &comp {
                    sub[v] = p[v] != m;
                }
                work.extend(sccs(adj, &sub));
            }
        }
    }
    good
}

/// Maximal end components for a controller owning the nodes with
/// `controlled[v]`; the remaining nodes must keep all their edges inside.
/// Only nodes in `alive` are considered.
pub fn maximal_end_components(adj: &[Vec<usize>], controlled: &[bool], alive: &[bool]) -> Vec<Vec<usize>> {
    let n = adj.len();
    let mut live = alive.to_vec();
    loop {
        let comps = sccs(adj, &live);
        let mut comp_of = vec![usize::MAX; n];
        for (i, c) in comps.iter().enumerate() {
            for &v in c {
                comp_of[v] = i;
            }
        }
        let mut changed = false;
        for v in 0..n {
            if !live[v] {
                continue;
            }
            let inside = |w: &usize| live[*w] && comp_of[*w] == comp_of[v];
            let keep = if controlled[v] {
                adj[v].iter().any(inside)
            } else {
                adj[v].iter().all(inside)
            };
            if !keep {
                live[v] = false;
                changed = true;
            }
        }
        if !changed {
            return comps
                .into_iter()
                .filter(|c| {
                    c.iter().all(|v| live[*v]) && {
                        let id = comp_of[c[0]];
                        c.iter().any(|v| adj[*v].iter().any(|w| live[*w] && comp_of[*w] == id))
                    }
                })
                .collect();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scc_of_cycle_and_tail() {
        let adj = vec![vec![1], vec![2], vec![1]];
        let mut c = sccs(&adj, &[true; 3]);
        c.sort();
        assert_eq!(c, vec![vec![0], vec![1, 2]]);
    }

    #[test]
    fn odd_cycle_detection() {
        // 0 <-> 1 with priorities 1 and 2: min 1 is odd.
        let adj = vec![vec![1], vec![0]];
        assert!(has_odd_cycle(&adj, &[1, 2], &[true, true]));
        assert!(!has_odd_cycle(&adj, &[0, 1], &[true, true]));
    }

    #[test]
    fn good_cycle_needs_both_columns() {
        // two self loops: node 0 good for a only, node 1 good for both.
        let adj = vec![vec![0, 1], vec![1]];
        let a = [0, 2];
        let b = [1, 0];
        let g = good_cycle_nodes(&adj, &[&a, &b], &[true, true]);
        assert_eq!(g, vec![false, true]);
    }

    #[test]
    fn mec_drops_leaking_random_nodes() {
        // 0 (controlled) -> 0 | 1 ; 1 (random) -> 0 | 2 ; 2 (random) -> 2
        let adj = vec![vec![0, 1], vec![0, 2], vec![2]];
        let ctrl = [true, false, false];
        let mut m = maximal_end_components(&adj, &ctrl, &[true; 3]);
        m.sort();
        assert_eq!(m, vec![vec![0], vec![2]]);
    }
}
