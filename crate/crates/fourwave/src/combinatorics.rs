//! Set partitions and multiset permutations.
//!
//! Both the moment→cumulant conversion and the interference-pattern
//! enumeration walk set partitions of at most six elements, so the
//! brute-force generators here are plenty fast and run once at table-build
//! time.

/// All partitions of `{0, .., n-1}` into unordered nonempty blocks.
/// Blocks and elements within blocks come out sorted, and the partition list
/// itself is in a deterministic order.
pub fn set_partitions(n: usize) -> Vec<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    let mut current: Vec<Vec<usize>> = Vec::new();
    recurse(0, n, &mut current, &mut out);
    out
}

fn recurse(i: usize, n: usize, current: &mut Vec<Vec<usize>>, out: &mut Vec<Vec<Vec<usize>>>) {
    if i == n {
        out.push(current.clone());
        return;
    }
    for b in 0..current.len() {
        current[b].push(i);
        recurse(i + 1, n, current, out);
        current[b].pop();
    }
    current.push(vec![i]);
    recurse(i + 1, n, current, out);
    current.pop();
}

/// Partitions of `{0, .., n-1}` whose blocks all have even size.
pub fn even_set_partitions(n: usize) -> Vec<Vec<Vec<usize>>> {
    set_partitions(n)
        .into_iter()
        .filter(|p| p.iter().all(|b| b.len() % 2 == 0))
        .collect()
}

/// Distinct permutations of a multiset, in lexicographic order.
pub fn distinct_permutations<T: Ord + Clone>(items: &[T]) -> Vec<Vec<T>> {
    let mut v: Vec<T> = items.to_vec();
    v.sort();
    let mut out = vec![v.clone()];
    while next_permutation(&mut v) {
        out.push(v.clone());
    }
    out
}

/// In-place lexicographic next permutation; false once the sequence is the
/// last one.
fn next_permutation<T: Ord>(v: &mut [T]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}
