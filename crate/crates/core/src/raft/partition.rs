//! Multiset partitions of a color multiset.
//!
//! A color multiset is given as counts over distinct colors `0..k`; a block is
//! a count vector of the same length. A partition lists its blocks in
//! nonincreasing lexicographic order, which makes every multiset of blocks
//! appear exactly once.

pub type Block = Vec<usize>;
pub type Partition = Vec<Block>;

pub fn multiset_partitions(counts: &[usize]) -> Vec<Partition> {
    let mut out = Vec::new();
    if counts.iter().all(|&c| c == 0) {
        out.push(Vec::new());
        return out;
    }
    let mut current = Vec::new();
    extend(counts.to_vec(), None, &mut current, &mut out);
    out
}

fn extend(
    remaining: Vec<usize>,
    bound: Option<&Block>,
    current: &mut Partition,
    out: &mut Vec<Partition>,
) {
    let Some(first) = remaining.iter().position(|&c| c > 0) else {
        out.push(current.clone());
        return;
    };
    // The largest remaining block must hold the first remaining color.
    let mut block = vec![0; remaining.len()];
    blocks_from(&remaining, first, 0, &mut block, &mut |b| {
        if bound.is_none_or(|bound| b <= bound) {
            let rest = remaining.iter().zip(b).map(|(r, x)| r - x).collect();
            current.push(b.clone());
            let top = current.last().cloned().unwrap();
            extend(rest, Some(&top), current, out);
            current.pop();
        }
    });
}

/// Every block `b <= remaining` with `b[first] >= 1`, in decreasing lex order.
fn blocks_from(
    remaining: &[usize],
    first: usize,
    idx: usize,
    block: &mut Block,
    f: &mut dyn FnMut(&Block),
) {
    if idx == remaining.len() {
        f(block);
        return;
    }
    let lo = usize::from(idx == first);
    for x in (lo..=remaining[idx]).rev() {
        block[idx] = x;
        blocks_from(remaining, first, idx + 1, block, f);
    }
    block[idx] = 0;
}

/// Sorts blocks into the canonical order used by [`multiset_partitions`].
pub fn canonical(mut partition: Partition) -> Partition {
    partition.sort_unstable_by(|a, b| b.cmp(a));
    partition
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    /// Labeled set partitions via restricted growth strings, then quotient by
    /// color symmetry.
    fn oracle(colors: &[usize], k: usize) -> BTreeSet<Partition> {
        let n = colors.len();
        let mut set = BTreeSet::new();
        let mut rgs = vec![0usize; n];
        loop {
            let blocks = rgs.iter().max().map_or(0, |m| m + 1);
            let mut p = vec![vec![0; k]; blocks];
            for (i, &b) in rgs.iter().enumerate() {
                p[b][colors[i]] += 1;
            }
            set.insert(canonical(p));
            // next restricted growth string
            let mut i = n;
            loop {
                if i <= 1 {
                    return set;
                }
                i -= 1;
                let max_prefix = rgs[..i].iter().max().copied().unwrap_or(0);
                if rgs[i] <= max_prefix {
                    rgs[i] += 1;
                    for x in &mut rgs[i + 1..] {
                        *x = 0;
                    }
                    break;
                }
            }
        }
    }

    #[test]
    fn small_cases() {
        assert_eq!(multiset_partitions(&[1]), vec![vec![vec![1]]]);
        assert_eq!(multiset_partitions(&[1, 1]).len(), 2);
        assert_eq!(multiset_partitions(&[2, 1]).len(), 4);
        assert_eq!(multiset_partitions(&[3]).len(), 3);
    }

    #[test]
    fn matches_labeled_oracle() {
        for k in 1..=3usize {
            for size in 1..=4usize {
                // every count vector over k colors with all colors present
                let mut counts = vec![1; k];
                if size < k {
                    continue;
                }
                fn each(
                    counts: &mut Vec<usize>,
                    left: usize,
                    idx: usize,
                    f: &mut dyn FnMut(&[usize]),
                ) {
                    if idx == counts.len() - 1 {
                        counts[idx] += left;
                        f(counts);
                        counts[idx] -= left;
                        return;
                    }
                    for x in 0..=left {
                        counts[idx] += x;
                        each(counts, left - x, idx + 1, f);
                        counts[idx] -= x;
                    }
                }
                each(&mut counts, size - k, 0, &mut |c| {
                    let colors: Vec<usize> = c
                        .iter()
                        .enumerate()
                        .flat_map(|(i, &n)| std::iter::repeat_n(i, n))
                        .collect();
                    let got = multiset_partitions(c);
                    let unique: BTreeSet<Partition> = got.iter().cloned().collect();
                    assert_eq!(unique.len(), got.len(), "duplicates for {c:?}");
                    assert!(got.iter().all(|p| *p == canonical(p.clone())));
                    assert_eq!(unique, oracle(&colors, k), "{c:?}");
                });
            }
        }
    }
}
