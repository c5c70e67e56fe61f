//! Ordered index sequences over `[r] = {1, ..., r}`, lexicographic subset
//! enumeration and the relabeling used to evaluate mixed second moments.
//!
//! Indices are 1-based throughout. An [`IndexSeq`] carries both a set and an
//! ordering; the ordering decides the row/column order of a submatrix and
//! therefore the sign of a minor.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexSeq {
    entries: Vec<usize>,
    r: usize,
}

impl IndexSeq {
    pub fn new(entries: Vec<usize>, r: usize) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for &e in &entries {
            if e == 0 || e > r {
                return Err(Error::IndexOutOfRange { index: e, dim: r });
            }
            if !seen.insert(e) {
                return Err(Error::DuplicateIndex(e));
            }
        }
        Ok(IndexSeq { entries, r })
    }

    pub fn empty(r: usize) -> Self {
        IndexSeq { entries: Vec::new(), r }
    }

    /// `{1, ..., m}` in ascending order.
    pub fn leading(m: usize, r: usize) -> Result<Self> {
        IndexSeq::new((1..=m).collect(), r)
    }

    /// Parses comma-separated 1-based integers, e.g. `"1,2,3"`. An empty or
    /// blank string is the empty sequence.
    pub fn parse(s: &str, r: usize) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(IndexSeq::empty(r));
        }
        let entries = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Parse(format!("invalid index {t:?} in {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        IndexSeq::new(entries, r)
    }

    pub fn entries(&self) -> &[usize] {
        &self.entries
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.entries.contains(&i)
    }

    pub fn max(&self) -> usize {
        self.entries.iter().copied().max().unwrap_or(0)
    }

    pub fn to_set(&self) -> BTreeSet<usize> {
        self.entries.iter().copied().collect()
    }

    pub fn sorted(&self) -> IndexSeq {
        let mut entries = self.entries.clone();
        entries.sort_unstable();
        IndexSeq { entries, r: self.r }
    }

    pub fn is_sorted(&self) -> bool {
        self.entries.windows(2).all(|w| w[0] < w[1])
    }

    pub fn same_set(&self, other: &IndexSeq) -> bool {
        self.len() == other.len() && self.entries.iter().all(|&e| other.contains(e))
    }

    /// Sign of the permutation that sorts this sequence ascending.
    pub fn parity(&self) -> i8 {
        permutation_parity(&self.entries)
    }

    /// Zero-based positions, for addressing matrix rows and columns.
    pub fn zero_based(&self) -> Vec<usize> {
        self.entries.iter().map(|&e| e - 1).collect()
    }

    pub fn intersection(&self, other: &IndexSeq) -> IndexSeq {
        self.filter_sorted(|e| other.contains(e))
    }

    pub fn difference(&self, other: &IndexSeq) -> IndexSeq {
        self.filter_sorted(|e| !other.contains(e))
    }

    pub fn union(&self, other: &IndexSeq) -> IndexSeq {
        let mut set = self.to_set();
        set.extend(other.entries.iter().copied());
        IndexSeq {
            entries: set.into_iter().collect(),
            r: self.r.max(other.r),
        }
    }

    /// `[r]` minus this set, ascending.
    pub fn complement(&self) -> IndexSeq {
        IndexSeq {
            entries: (1..=self.r).filter(|&e| !self.contains(e)).collect(),
            r: self.r,
        }
    }

    /// Concatenation; fails if the two sequences share an index.
    pub fn concat(&self, other: &IndexSeq) -> Result<IndexSeq> {
        let mut entries = self.entries.clone();
        entries.extend_from_slice(&other.entries);
        IndexSeq::new(entries, self.r.max(other.r))
    }

    /// Applies a relabeling of `[r]` given as `sigma[x - 1] = image of x`.
    pub fn relabel(&self, sigma: &[usize]) -> IndexSeq {
        IndexSeq {
            entries: self.entries.iter().map(|&e| sigma[e - 1]).collect(),
            r: self.r,
        }
    }

    fn filter_sorted(&self, keep: impl Fn(usize) -> bool) -> IndexSeq {
        let mut entries: Vec<usize> = self.entries.iter().copied().filter(|&e| keep(e)).collect();
        entries.sort_unstable();
        IndexSeq { entries, r: self.r }
    }
}

impl fmt::Display for IndexSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.entries.iter().map(|e| e.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

/// Sign of the permutation sorting `seq` ascending (entries distinct).
pub fn permutation_parity(seq: &[usize]) -> i8 {
    let mut inversions = 0usize;
    for a in 0..seq.len() {
        for b in a + 1..seq.len() {
            if seq[a] > seq[b] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

/// `(I \ J) ∪ (J \ I)`, ascending.
pub fn sym_diff(i: &IndexSeq, j: &IndexSeq) -> Result<IndexSeq> {
    if i.r != j.r {
        return Err(Error::AmbientMismatch { left: i.r, right: j.r });
    }
    let mut entries: Vec<usize> = i
        .entries
        .iter()
        .copied()
        .filter(|&e| !j.contains(e))
        .chain(j.entries.iter().copied().filter(|&e| !i.contains(e)))
        .collect();
    entries.sort_unstable();
    Ok(IndexSeq { entries, r: i.r })
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for t in 0..k {
        acc = acc * (n - t) as u128 / (t + 1) as u128;
    }
    acc as usize
}

/// All `m`-subsets of `[r]` in lexicographic order, each ascending.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubsetEnumeration {
    r: usize,
    m: usize,
}

impl SubsetEnumeration {
    pub fn new(r: usize, m: usize) -> Result<Self> {
        if m > r {
            return Err(Error::Precondition(format!("subset size {m} exceeds r = {r}")));
        }
        Ok(SubsetEnumeration { r, m })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        binomial(self.r, self.m)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Position of the sorted subset `s` in lexicographic order.
    pub fn rank(&self, s: &[usize]) -> Result<usize> {
        if s.len() != self.m {
            return Err(Error::Cardinality(format!(
                "subset has {} entries, expected {}",
                s.len(),
                self.m
            )));
        }
        let mut prev = 0;
        let mut rank = 0;
        for (pos, &x) in s.iter().enumerate() {
            if x <= prev || x > self.r {
                return Err(if x > self.r || x == 0 {
                    Error::IndexOutOfRange { index: x, dim: self.r }
                } else {
                    Error::Precondition(format!("subset {s:?} is not strictly increasing"))
                });
            }
            // subsets whose entry at `pos` is smaller than x come first
            for t in prev + 1..x {
                rank += binomial(self.r - t, self.m - pos - 1);
            }
            prev = x;
        }
        Ok(rank)
    }

    pub fn unrank(&self, mut rank: usize) -> Result<Vec<usize>> {
        if rank >= self.len() {
            return Err(Error::Precondition(format!(
                "rank {rank} out of range for C({}, {})",
                self.r, self.m
            )));
        }
        let mut out = Vec::with_capacity(self.m);
        let mut x = 1;
        for pos in 0..self.m {
            loop {
                let block = binomial(self.r - x, self.m - pos - 1);
                if rank < block {
                    break;
                }
                rank -= block;
                x += 1;
            }
            out.push(x);
            x += 1;
        }
        Ok(out)
    }

    pub fn iter(&self) -> SubsetIter {
        SubsetIter {
            r: self.r,
            current: if self.m <= self.r {
                Some((1..=self.m).collect())
            } else {
                None
            },
        }
    }

    /// Subsets as [`IndexSeq`] values in lexicographic order.
    pub fn seqs(&self) -> Vec<IndexSeq> {
        self.iter()
            .map(|entries| IndexSeq { entries, r: self.r })
            .collect()
    }
}

pub struct SubsetIter {
    r: usize,
    current: Option<Vec<usize>>,
}

impl Iterator for SubsetIter {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.take()?;
        let m = out.len();
        let mut next = out.clone();
        let mut pos = m;
        while pos > 0 {
            pos -= 1;
            if next[pos] < self.r - (m - 1 - pos) {
                next[pos] += 1;
                for q in pos + 1..m {
                    next[q] = next[q - 1] + 1;
                }
                self.current = Some(next);
                return Some(out);
            }
        }
        Some(out)
    }
}

/// Result of [`canonical_relabeling`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relabeling {
    /// `sigma[x - 1]` is the new label of index `x`.
    pub sigma: Vec<usize>,
    pub i: IndexSeq,
    pub j: IndexSeq,
    pub k: IndexSeq,
    pub l: IndexSeq,
    /// Product of the sorting parities of the four relabeled sequences.
    pub sign: i8,
}

/// Relabels `[r]` so that, listed in ascending label order, the four sets
/// satisfy
///
/// ```text
/// (I∩J)∖(K∩L) < Ī < J̄ < (K∩L)∖(I∩J),   Ī∩K̄ < Ī∩L̄,   J̄∩K̄ < J̄∩L̄
/// ```
///
/// where `Ī = I∖(I∩J)` and similarly for the others. Labels are handed out
/// block by block in the order `(I∩J)∖(K∩L)`, `Ī∩K̄`, `Ī∩L̄`, `J̄∩K̄`, `J̄∩L̄`,
/// `(K∩L)∖(I∩J)`, `I∩J∩K∩L`, then everything else, each block ascending.
///
/// The returned sequences are the relabeled sets sorted ascending, and
/// `sign` is the parity needed to go from the caller's orderings to them.
pub fn canonical_relabeling(
    i: &IndexSeq,
    j: &IndexSeq,
    k: &IndexSeq,
    l: &IndexSeq,
) -> Result<Relabeling> {
    let r = i.r;
    for s in [j, k, l] {
        if s.r != r {
            return Err(Error::AmbientMismatch { left: r, right: s.r });
        }
    }
    let m = i.len();
    if j.len() != m || k.len() != m || l.len() != m {
        return Err(Error::Cardinality(format!(
            "index sequences have lengths {}, {}, {}, {}",
            i.len(),
            j.len(),
            k.len(),
            l.len()
        )));
    }
    if sym_diff(i, j)? != sym_diff(k, l)? {
        return Err(Error::Precondition(
            "symmetric differences I△J and K△L differ".into(),
        ));
    }

    let ij = i.intersection(j);
    let kl = k.intersection(l);
    let i_bar = i.difference(&ij);
    let j_bar = j.difference(&ij);
    let k_bar = k.difference(&kl);
    let l_bar = l.difference(&kl);
    let blocks = [
        ij.difference(&kl),
        i_bar.intersection(&k_bar),
        i_bar.intersection(&l_bar),
        j_bar.intersection(&k_bar),
        j_bar.intersection(&l_bar),
        kl.difference(&ij),
        ij.intersection(&kl),
    ];

    let mut sigma = vec![0usize; r];
    let mut next = 1;
    for block in &blocks {
        for &x in block.entries() {
            sigma[x - 1] = next;
            next += 1;
        }
    }
    for x in 1..=r {
        if sigma[x - 1] == 0 {
            sigma[x - 1] = next;
            next += 1;
        }
    }

    let images = [i.relabel(&sigma), j.relabel(&sigma), k.relabel(&sigma), l.relabel(&sigma)];
    let sign = images.iter().map(IndexSeq::parity).product();
    let [i2, j2, k2, l2] = images.map(|s| s.sorted());
    Ok(Relabeling {
        sigma,
        i: i2,
        j: j2,
        k: k2,
        l: l2,
        sign,
    })
}

fn precedes(a: &IndexSeq, b: &IndexSeq) -> bool {
    match (a.entries.iter().max(), b.entries.iter().min()) {
        (Some(x), Some(y)) => x < y,
        _ => true,
    }
}

/// Checks the three block-order conditions on sets listed in natural order.
pub fn satisfies_block_order(i: &IndexSeq, j: &IndexSeq, k: &IndexSeq, l: &IndexSeq) -> bool {
    let ij = i.intersection(j);
    let kl = k.intersection(l);
    let i_bar = i.difference(&ij);
    let j_bar = j.difference(&ij);
    let k_bar = k.difference(&kl);
    let l_bar = l.difference(&kl);
    let head = ij.difference(&kl);
    let tail = kl.difference(&ij);
    precedes(&head, &i_bar)
        && precedes(&i_bar, &j_bar)
        && precedes(&j_bar, &tail)
        && precedes(&head, &j_bar)
        && precedes(&head, &tail)
        && precedes(&i_bar, &tail)
        && precedes(&i_bar.intersection(&k_bar), &i_bar.intersection(&l_bar))
        && precedes(&j_bar.intersection(&k_bar), &j_bar.intersection(&l_bar))
}
