//! Reachability and strongly connected components on small adjacency-list
//! graphs, optionally restricted to a node mask.

/// Nodes reachable from `root` (including `root`) through nodes in `mask`.
pub(crate) fn reachable(succ: &[Vec<usize>], root: usize, mask: &[bool]) -> Vec<bool> {
    let mut seen = vec![false; succ.len()];
    if !mask[root] {
        return seen;
    }
    let mut stack = vec![root];
    seen[root] = true;
    while let Some(v) = stack.pop() {
        for &w in &succ[v] {
            if mask[w] && !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen
}

/// Strongly connected components of the subgraph induced by `mask`.
#[derive(Debug)]
pub(crate) struct Sccs {
    /// Component index per node; `usize::MAX` outside the mask.
    pub comp: Vec<usize>,
    /// Whether the component contains an edge (size > 1 or a self-loop).
    pub cyclic: Vec<bool>,
}

impl Sccs {
    pub fn count(&self) -> usize {
        self.cyclic.len()
    }

    /// True iff `v` lies on a cycle of the masked subgraph.
    pub fn on_cycle(&self, v: usize) -> bool {
        self.comp[v] != usize::MAX && self.cyclic[self.comp[v]]
    }
}

/// Iterative Tarjan.
pub(crate) fn tarjan(succ: &[Vec<usize>], mask: &[bool]) -> Sccs {
    const NONE: usize = usize::MAX;
    let n = succ.len();
    let mut index = vec![NONE; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comp = vec![NONE; n];
    let mut cyclic = Vec::new();
    let mut counter = 0;
    // (node, next edge position)
    let mut call: Vec<(usize, usize)> = Vec::new();

    for start in 0..n {
        if !mask[start] || index[start] != NONE {
            continue;
        }
        call.push((start, 0));
        while let Some(&(v, start_pos)) = call.last() {
            if start_pos == 0 && index[v] == NONE {
                index[v] = counter;
                low[v] = counter;
                counter += 1;
                stack.push(v);
                on_stack[v] = true;
            }
            let mut pos = start_pos;
            let mut child = None;
            while pos < succ[v].len() {
                let w = succ[v][pos];
                pos += 1;
                if !mask[w] {
                    continue;
                }
                if index[w] == NONE {
                    child = Some(w);
                    break;
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            }
            call.last_mut().expect("frame").1 = pos;
            if let Some(w) = child {
                call.push((w, 0));
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let id = cyclic.len();
                let mut size = 0;
                loop {
                    let w = stack.pop().expect("tarjan stack");
                    on_stack[w] = false;
                    comp[w] = id;
                    size += 1;
                    if w == v {
                        break;
                    }
                }
                cyclic.push(size > 1 || succ[v].contains(&v));
            }
        }
    }
    Sccs { comp, cyclic }
}
