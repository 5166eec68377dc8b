//! Line matcher compatible with Python's `difflib.SequenceMatcher`.
//!
//! The matcher finds the longest contiguous matching block, then recurses on
//! the pieces to its left and right. With no junk predicate and `autojunk`
//! enabled, lines occurring more than `1% + 1` times in a sequence of at least
//! 200 lines are treated as "popular" and never start a match, although they
//! may extend one.

use std::collections::{HashMap, HashSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Tag {
    Equal,
    Replace,
    Delete,
    Insert,
}

/// `(tag, a_lo, a_hi, b_lo, b_hi)` in the style of `get_opcodes`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Opcode {
    pub tag: Tag,
    pub a_lo: usize,
    pub a_hi: usize,
    pub b_lo: usize,
    pub b_hi: usize,
}

const AUTOJUNK_MIN_LEN: usize = 200;

pub(crate) struct Matcher<'a> {
    a: &'a [&'a str],
    b: &'a [&'a str],
    b2j: HashMap<&'a str, Vec<usize>>,
}

impl<'a> Matcher<'a> {
    pub fn new(a: &'a [&'a str], b: &'a [&'a str]) -> Self {
        let mut b2j: HashMap<&'a str, Vec<usize>> = HashMap::new();
        for (j, line) in b.iter().enumerate() {
            b2j.entry(*line).or_default().push(j);
        }
        if b.len() >= AUTOJUNK_MIN_LEN {
            let threshold = b.len() / 100 + 1;
            let popular: HashSet<&str> = b2j
                .iter()
                .filter(|(_, idxs)| idxs.len() > threshold)
                .map(|(line, _)| *line)
                .collect();
            for line in popular {
                b2j.remove(line);
            }
        }
        Self { a, b, b2j }
    }

    fn longest_match(&self, a_lo: usize, a_hi: usize, b_lo: usize, b_hi: usize) -> (usize, usize, usize) {
        let (mut best_i, mut best_j, mut best_size) = (a_lo, b_lo, 0usize);
        // j2len[j] = length of the match ending at a[i-1], b[j]
        let mut j2len: HashMap<usize, usize> = HashMap::new();
        for i in a_lo..a_hi {
            let mut next: HashMap<usize, usize> = HashMap::new();
            if let Some(js) = self.b2j.get(self.a[i]) {
                for &j in js {
                    if j < b_lo {
                        continue;
                    }
                    if j >= b_hi {
                        break;
                    }
                    let k = j
                        .checked_sub(1)
                        .and_then(|prev| j2len.get(&prev))
                        .copied()
                        .unwrap_or(0)
                        + 1;
                    next.insert(j, k);
                    if k > best_size {
                        best_i = i + 1 - k;
                        best_j = j + 1 - k;
                        best_size = k;
                    }
                }
            }
            j2len = next;
        }

        // Popular lines are not junk, so the match may still grow across them.
        while best_i > a_lo && best_j > b_lo && self.a[best_i - 1] == self.b[best_j - 1] {
            best_i -= 1;
            best_j -= 1;
            best_size += 1;
        }
        while best_i + best_size < a_hi
            && best_j + best_size < b_hi
            && self.a[best_i + best_size] == self.b[best_j + best_size]
        {
            best_size += 1;
        }
        (best_i, best_j, best_size)
    }

    fn matching_blocks(&self) -> Vec<(usize, usize, usize)> {
        let (la, lb) = (self.a.len(), self.b.len());
        let mut queue = vec![(0, la, 0, lb)];
        let mut blocks = Vec::new();
        while let Some((a_lo, a_hi, b_lo, b_hi)) = queue.pop() {
            let (i, j, k) = self.longest_match(a_lo, a_hi, b_lo, b_hi);
            if k > 0 {
                blocks.push((i, j, k));
                if a_lo < i && b_lo < j {
                    queue.push((a_lo, i, b_lo, j));
                }
                if i + k < a_hi && j + k < b_hi {
                    queue.push((i + k, a_hi, j + k, b_hi));
                }
            }
        }
        blocks.sort_unstable();

        let mut collapsed = Vec::with_capacity(blocks.len() + 1);
        let (mut i1, mut j1, mut k1) = (0, 0, 0);
        for (i2, j2, k2) in blocks {
            if i1 + k1 == i2 && j1 + k1 == j2 {
                k1 += k2;
            } else {
                if k1 > 0 {
                    collapsed.push((i1, j1, k1));
                }
                (i1, j1, k1) = (i2, j2, k2);
            }
        }
        if k1 > 0 {
            collapsed.push((i1, j1, k1));
        }
        collapsed.push((la, lb, 0));
        collapsed
    }

    pub fn opcodes(&self) -> Vec<Opcode> {
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        for (ai, bj, size) in self.matching_blocks() {
            let tag = match (i < ai, j < bj) {
                (true, true) => Some(Tag::Replace),
                (true, false) => Some(Tag::Delete),
                (false, true) => Some(Tag::Insert),
                (false, false) => None,
            };
            if let Some(tag) = tag {
                out.push(Opcode { tag, a_lo: i, a_hi: ai, b_lo: j, b_hi: bj });
            }
            i = ai + size;
            j = bj + size;
            if size > 0 {
                out.push(Opcode { tag: Tag::Equal, a_lo: ai, a_hi: i, b_lo: bj, b_hi: j });
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ops(a: &[&str], b: &[&str]) -> Vec<(Tag, usize, usize, usize, usize)> {
        Matcher::new(a, b)
            .opcodes()
            .into_iter()
            .map(|o| (o.tag, o.a_lo, o.a_hi, o.b_lo, o.b_hi))
            .collect()
    }

    #[test]
    fn identical_is_single_equal() {
        assert_eq!(ops(&["a", "b"], &["a", "b"]), vec![(Tag::Equal, 0, 2, 0, 2)]);
    }

    #[test]
    fn empty_sides() {
        assert_eq!(ops(&[], &[]), vec![]);
        assert_eq!(ops(&[], &["x"]), vec![(Tag::Insert, 0, 0, 0, 1)]);
        assert_eq!(ops(&["x"], &[]), vec![(Tag::Delete, 0, 1, 0, 0)]);
    }

    #[test]
    fn prefers_longest_block_over_lcs() {
        // difflib anchors on the longest contiguous block "b c d"; the lone
        // "a" match before it is then out of order and dropped.
        let a = ["b", "c", "d", "a"];
        let b = ["a", "b", "c", "d"];
        assert_eq!(
            ops(&a, &b),
            vec![
                (Tag::Insert, 0, 0, 0, 1),
                (Tag::Equal, 0, 3, 1, 4),
                (Tag::Delete, 3, 4, 4, 4)
            ]
        );
    }
}
