//! Ratcliff/Obershelp gestalt pattern matching.
//!
//! The ratio is `2 * M / (|query| + |candidate|)` where `M` is the number of
//! characters covered by the matching blocks: the longest common substring,
//! then recursively the longest common substrings to its left and right.
//! Lengths are counted in Unicode scalar values.
//!
//! Longest-match ties pick the block starting earliest in `query`, then
//! earliest in `candidate`. Because of that tie rule the measure is not
//! symmetric in general, so argument order is part of the contract.

/// Similarity of `query` against `candidate`, in `[0, 1]`.
pub fn similarity(query: &str, candidate: &str) -> f64 {
    let a: Vec<char> = query.chars().collect();
    let b: Vec<char> = candidate.chars().collect();
    let total = a.len() + b.len();
    if total == 0 {
        return 1.0;
    }
    2.0 * matched_chars(&a, &b) as f64 / total as f64
}

/// Total size of the recursive matching blocks.
pub fn matched_chars(a: &[char], b: &[char]) -> usize {
    let mut matched = 0;
    let mut stack = vec![(0, a.len(), 0, b.len())];
    let mut row = vec![0usize; b.len() + 1];
    while let Some((alo, ahi, blo, bhi)) = stack.pop() {
        let (i, j, k) = longest_match(a, b, alo, ahi, blo, bhi, &mut row);
        if k == 0 {
            continue;
        }
        matched += k;
        if alo < i && blo < j {
            stack.push((alo, i, blo, j));
        }
        if i + k < ahi && j + k < bhi {
            stack.push((i + k, ahi, j + k, bhi));
        }
    }
    matched
}

/// Longest common substring of `a[alo..ahi]` and `b[blo..bhi]` as
/// `(start_a, start_b, len)`.
fn longest_match(
    a: &[char],
    b: &[char],
    alo: usize,
    ahi: usize,
    blo: usize,
    bhi: usize,
    row: &mut [usize],
) -> (usize, usize, usize) {
    let (mut best_i, mut best_j, mut best_k) = (alo, blo, 0);
    // row[j + 1] holds the length of the common suffix ending at (i - 1, j)
    row[blo..=bhi].iter_mut().for_each(|v| *v = 0);
    for i in alo..ahi {
        // walk b backwards so row[j] still refers to the previous i
        for j in (blo..bhi).rev() {
            if a[i] == b[j] {
                let k = row[j] + 1;
                row[j + 1] = k;
                let (si, sj) = (i + 1 - k, j + 1 - k);
                if k > best_k || (k == best_k && (si, sj) < (best_i, best_j)) {
                    best_i = si;
                    best_j = sj;
                    best_k = k;
                }
            } else {
                row[j + 1] = 0;
            }
        }
        row[blo] = 0;
    }
    (best_i, best_j, best_k)
}
