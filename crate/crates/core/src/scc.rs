//! Strongly connected components (iterative Tarjan).

use alloc::vec;
use alloc::vec::Vec;

/// Components of a graph over nodes `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Components {
    /// Component of each node.
    pub component_of: Vec<usize>,
    /// Members of each component. Components are numbered in reverse
    /// topological order: every edge leaving component `c` goes to a
    /// component numbered lower than `c`.
    pub members: Vec<Vec<usize>>,
}

const UNVISITED: usize = usize::MAX;

/// Tarjan's algorithm without recursion, so deep call chains cannot
/// overflow the stack.
pub fn tarjan<I, F>(n: usize, mut successors: F) -> Components
where
    F: FnMut(usize) -> I,
    I: Iterator<Item = usize>,
{
    let mut index = vec![UNVISITED; n];
    let mut lowlink = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut component_of = vec![UNVISITED; n];
    let mut members: Vec<Vec<usize>> = Vec::new();
    let mut next_index = 0;
    // (node, its remaining successors)
    let mut call_stack: Vec<(usize, I)> = Vec::new();

    for root in 0..n {
        if index[root] != UNVISITED {
            continue;
        }
        index[root] = next_index;
        lowlink[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;
        call_stack.push((root, successors(root)));

        while let Some((v, iter)) = call_stack.last_mut() {
            let v = *v;
            match iter.next() {
                Some(w) if index[w] == UNVISITED => {
                    index[w] = next_index;
                    lowlink[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call_stack.push((w, successors(w)));
                }
                Some(w) => {
                    if on_stack[w] {
                        lowlink[v] = lowlink[v].min(index[w]);
                    }
                }
                None => {
                    call_stack.pop();
                    if let Some((parent, _)) = call_stack.last() {
                        let p = *parent;
                        lowlink[p] = lowlink[p].min(lowlink[v]);
                    }
                    if lowlink[v] == index[v] {
                        let id = members.len();
                        let mut comp = Vec::new();
                        loop {
                            let w = stack.pop().expect("tarjan stack underflow");
                            on_stack[w] = false;
                            component_of[w] = id;
                            comp.push(w);
                            if w == v {
                                break;
                            }
                        }
                        comp.sort_unstable();
                        members.push(comp);
                    }
                }
            }
        }
    }
    Components { component_of, members }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(n: usize, edges: &[(usize, usize)]) -> Components {
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in edges {
            adj[a].push(b);
        }
        tarjan(n, |v| adj[v].clone().into_iter())
    }

    #[test]
    fn cycle_and_tail() {
        // 0 -> 1 -> 2 -> 0, 2 -> 3
        let c = run(4, &[(0, 1), (1, 2), (2, 0), (2, 3)]);
        assert_eq!(c.members.len(), 2);
        assert_eq!(c.component_of[0], c.component_of[2]);
        assert!(c.component_of[3] < c.component_of[0]);
    }

    #[test]
    fn edges_point_to_lower_components() {
        let edges = [(0, 1), (1, 2), (2, 1), (3, 0), (3, 4), (4, 5), (5, 3), (2, 6)];
        let c = run(7, &edges);
        for (a, b) in edges {
            assert!(c.component_of[b] <= c.component_of[a]);
        }
        assert_eq!(c.members.iter().map(Vec::len).sum::<usize>(), 7);
    }

    #[test]
    fn long_chain_does_not_recurse() {
        let n = 200_000;
        let c = tarjan(n, |v| (v + 1 < n).then_some(v + 1).into_iter());
        assert_eq!(c.members.len(), n);
    }
}
