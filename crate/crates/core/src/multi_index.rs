//! Enumeration of the antisymmetric mode multi-indices.
//!
//! For compound order `m` with modes `-N..=N`, the measurement and control
//! directions are labelled by strictly increasing `(m-1)`-tuples of mode
//! numbers; there are `C(2N+1, m-1)` of them and they are enumerated in
//! lexicographic order, which makes the matrix for a smaller `N` an exact
//! sub-block of the matrix for a larger one.

/// Strictly increasing `(m-1)`-tuples over `-N..=N`, lexicographic.
pub fn ordered_tuples(n_modes: usize, m: usize) -> Vec<Vec<i32>> {
    assert!(m >= 1);
    let k = m - 1;
    let n = n_modes as i32;
    let labels: Vec<i32> = (-n..=n).collect();
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k);
    fn rec(labels: &[i32], start: usize, k: usize, current: &mut Vec<i32>, out: &mut Vec<Vec<i32>>) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        let needed = k - current.len();
        for i in start..=labels.len().saturating_sub(needed) {
            current.push(labels[i]);
            rec(labels, i + 1, k, current, out);
            current.pop();
        }
    }
    rec(&labels, 0, k, &mut current, &mut out);
    out
}

/// Positions (in the enumeration for `n_big`) of the tuples whose entries all
/// lie in `-n_small..=n_small` — the index set that carves the smaller
/// truncation's matrix out of the bigger one.
pub fn restriction_positions(n_big: usize, n_small: usize, m: usize) -> Vec<usize> {
    assert!(n_small <= n_big);
    let bound = n_small as i32;
    ordered_tuples(n_big, m)
        .iter()
        .enumerate()
        .filter(|(_, t)| t.iter().all(|&k| k.abs() <= bound))
        .map(|(i, _)| i)
        .collect()
}
