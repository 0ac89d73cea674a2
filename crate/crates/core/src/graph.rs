//! Strongly connected components of sparse digraphs (iterative Tarjan).

use alloc::vec::Vec;

/// Component id per node; ids are assigned in reverse topological order of
/// the condensation (sink components first).
pub(crate) fn tarjan_scc<F, I>(n: usize, mut successors: F) -> (usize, Vec<usize>)
where
    F: FnMut(usize) -> I,
    I: IntoIterator<Item = usize>,
{
    const UNSEEN: usize = usize::MAX;
    let mut index = alloc::vec![UNSEEN; n];
    let mut low = alloc::vec![0usize; n];
    let mut on_stack = alloc::vec![false; n];
    let mut comp = alloc::vec![UNSEEN; n];
    let mut stack = Vec::new();
    let mut next_index = 0;
    let mut ncomp = 0;
    // (node, materialized successor list, cursor)
    let mut call: Vec<(usize, Vec<usize>, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;
        call.push((root, successors(root).into_iter().collect(), 0));

        while let Some((v, succ, cursor)) = call.last_mut() {
            let v = *v;
            if *cursor < succ.len() {
                let w = succ[*cursor];
                *cursor += 1;
                if index[w] == UNSEEN {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    let ws = successors(w).into_iter().collect();
                    call.push((w, ws, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some((parent, _, _)) = call.last() {
                let parent = *parent;
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                loop {
                    let w = stack.pop().expect("tarjan stack underflow");
                    on_stack[w] = false;
                    comp[w] = ncomp;
                    if w == v {
                        break;
                    }
                }
                ncomp += 1;
            }
        }
    }
    (ncomp, comp)
}
