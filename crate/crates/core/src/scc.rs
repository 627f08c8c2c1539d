//! Strongly connected components and condensation for small dense-index
//! graphs. Nodes are `0..n`; edges are adjacency lists.

/// Tarjan's algorithm, iterative to keep deep chains off the call stack.
/// Components come out in reverse topological order of the condensation
/// (every edge leaving a component points to an earlier component).
pub fn tarjan(n: usize, adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    const UNSET: usize = usize::MAX;
    let mut index = vec![UNSET; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut next_index = 0usize;
    let mut components: Vec<Vec<usize>> = Vec::new();

    // (node, next child position) frames of the simulated recursion
    let mut frames: Vec<(usize, usize)> = Vec::new();
    for start in 0..n {
        if index[start] != UNSET {
            continue;
        }
        frames.push((start, 0));
        index[start] = next_index;
        low[start] = next_index;
        next_index += 1;
        stack.push(start);
        on_stack[start] = true;

        while let Some(frame) = frames.last_mut() {
            let v = frame.0;
            if let Some(&w) = adj[v].get(frame.1) {
                frame.1 += 1;
                if index[w] == UNSET {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    frames.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                frames.pop();
                if let Some(&(parent, _)) = frames.last() {
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
                    components.push(comp);
                }
            }
        }
    }
    components
}

/// Component membership and the condensed edge lists, with components in
/// topological order (edges point from lower to higher component id).
pub struct Condensation {
    pub components: Vec<Vec<usize>>,
    pub component_of: Vec<usize>,
    pub edges: Vec<Vec<usize>>,
}

pub fn condense(n: usize, adj: &[Vec<usize>]) -> Condensation {
    let mut components = tarjan(n, adj);
    components.reverse();
    let mut component_of = vec![0usize; n];
    for (c, comp) in components.iter().enumerate() {
        for &v in comp {
            component_of[v] = c;
        }
    }
    let mut edges: Vec<Vec<usize>> = vec![Vec::new(); components.len()];
    for v in 0..n {
        for &w in &adj[v] {
            let (a, b) = (component_of[v], component_of[w]);
            if a != b && !edges[a].contains(&b) {
                edges[a].push(b);
            }
        }
    }
    for e in &mut edges {
        e.sort_unstable();
    }
    Condensation { components, component_of, edges }
}
