//! Closed-form first and second moments of minors of a standard Wishart
//! matrix `W ~ W_r(n, I_r)`.
//!
//! All factorial ratios are evaluated as running products of at most `m`
//! terms ([`falling_product`]), which is exact in `f64` for desk-scale
//! arguments.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::index::{canonical_relabeling, sym_diff, IndexSeq, SubsetEnumeration};
use crate::matrix::{CompoundMatrix, DenseMatrix};

/// A row/column index pair selecting one minor.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MinorPair {
    pub i: IndexSeq,
    pub j: IndexSeq,
}

impl MinorPair {
    pub fn new(i: IndexSeq, j: IndexSeq) -> Result<Self> {
        check_pair(&i, &j)?;
        if i.is_empty() {
            return Err(Error::Cardinality("minor order must be at least 1".into()));
        }
        Ok(MinorPair { i, j })
    }

    pub fn order(&self) -> usize {
        self.i.len()
    }

    /// `"I|J"`, e.g. `"1,2|3,4"`.
    pub fn label(&self) -> String {
        format!("{}|{}", self.i, self.j)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentKind {
    Expectation,
    SecondMoment,
    Variance,
    CrossMoment,
    Covariance,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentValue {
    pub value: f64,
    pub kind: MomentKind,
}

/// `n (n - 1) ... (n - m + 1)`.
pub fn falling_product(n: usize, m: usize) -> Result<f64> {
    if m > n {
        return Err(Error::Precondition(format!(
            "falling product needs m <= n (got n = {n}, m = {m})"
        )));
    }
    Ok((0..m).map(|i| (n - i) as f64).product())
}

/// Factorial as a product, for the small arguments appearing here.
pub(crate) fn factorial(k: usize) -> f64 {
    (1..=k).map(|x| x as f64).product()
}

/// True when the formulas are evaluated for `n` below the ambient dimension,
/// outside the range where the Bartlett construction applies directly.
pub fn formula_extrapolated(n: usize, r: usize) -> bool {
    n < r
}

pub(crate) fn check_pair(i: &IndexSeq, j: &IndexSeq) -> Result<()> {
    if i.len() != j.len() {
        return Err(Error::Cardinality(format!(
            "row set {{{i}}} and column set {{{j}}} differ in size"
        )));
    }
    if i.r() != j.r() {
        return Err(Error::AmbientMismatch { left: i.r(), right: j.r() });
    }
    Ok(())
}

pub(crate) fn check_df(n: usize, m: usize) -> Result<()> {
    if m > n {
        return Err(Error::Precondition(format!(
            "moment formulas need n >= m (got n = {n}, m = {m})"
        )));
    }
    Ok(())
}

/// `E[det(W_{I×J})]`: `n!/(n-m)!` when `I = J` as sets, otherwise zero.
pub fn e_minor_std(n: usize, i: &IndexSeq, j: &IndexSeq) -> Result<f64> {
    check_pair(i, j)?;
    check_df(n, i.len())?;
    if i.same_set(j) {
        // principal minor of a symmetric matrix: simultaneous reordering
        // leaves it unchanged, a mismatched one flips the sign
        let sign = f64::from(i.parity() * j.parity());
        Ok(sign * falling_product(n, i.len())?)
    } else {
        Ok(0.0)
    }
}

/// `E[det(W_{I×J})²]` for `|I| = |J| = m`, `|I ∩ J| = c`.
pub fn second_moment_std(n: usize, m: usize, c: usize) -> Result<f64> {
    if !(c <= m && m <= n) {
        return Err(Error::Precondition(format!(
            "need n >= m >= c (got n = {n}, m = {m}, c = {c})"
        )));
    }
    Ok(falling_product(n, m)? * falling_product(n + 2, c)? * factorial(m - c))
}

/// `Var[det(W_{I×J})]` for `|I| = |J| = m`, `|I ∩ J| = c`.
pub fn var_minor_std(n: usize, m: usize, c: usize) -> Result<f64> {
    let second = second_moment_std(n, m, c)?;
    if c == m {
        let mean = falling_product(n, m)?;
        Ok(mean * (falling_product(n + 2, m)? - mean))
    } else {
        Ok(second)
    }
}

/// `E[det(W_{I×J}) det(W_{K×L})]` for the orderings as given.
///
/// Zero unless `I △ J = K △ L`. Otherwise the four sets are relabeled into
/// the block order of [`canonical_relabeling`], where the moment equals
///
/// ```text
/// n!/(n-m)! · (n+2)!/(n+2-|I∩J∩K∩L|)! · (n-m+|(I∩J)∖(K∩L)|)!/(n-m)! · |Ī∩K̄|! · |Ī∩L̄|!
/// ```
///
/// and the sign of the relabeling accounts for the caller's orderings.
pub fn cross_moment_std(
    n: usize,
    i: &IndexSeq,
    j: &IndexSeq,
    k: &IndexSeq,
    l: &IndexSeq,
) -> Result<f64> {
    check_pair(i, j)?;
    check_pair(k, l)?;
    check_pair(i, k)?;
    let m = i.len();
    check_df(n, m)?;
    if sym_diff(i, j)? != sym_diff(k, l)? {
        return Ok(0.0);
    }
    let rl = canonical_relabeling(i, j, k, l)?;
    let ij = rl.i.intersection(&rl.j);
    let kl = rl.k.intersection(&rl.l);
    let common = ij.intersection(&kl).len();
    let head = ij.difference(&kl).len();
    let i_bar = rl.i.difference(&ij);
    let k_bar = rl.k.difference(&kl);
    let l_bar = rl.l.difference(&kl);
    let p = i_bar.intersection(&k_bar).len();
    let q = i_bar.intersection(&l_bar).len();
    let magnitude = falling_product(n, m)?
        * falling_product(n + 2, common)?
        * falling_product(n - m + head, head)?
        * factorial(p)
        * factorial(q);
    Ok(f64::from(rl.sign) * magnitude)
}

/// `E[W^(m)] = n!/(n-m)! · I`.
pub fn e_compound_std(n: usize, r: usize, m: usize) -> Result<CompoundMatrix> {
    check_df(n, m)?;
    let e = SubsetEnumeration::new(r, m)?;
    let scale = falling_product(n, m)?;
    Ok(CompoundMatrix::from_parts(r, m, DenseMatrix::identity(e.len()).scale(scale)))
}

/// One nonzero block of `Cov[W^(m)]`: all ordered pairs `(I, J)` sharing a
/// symmetric difference.
#[derive(Debug, Clone)]
pub struct CovBlock {
    pub sym_diff: IndexSeq,
    /// `(rank(I), rank(J))` for each pair, in lexicographic order.
    pub pairs: Vec<(usize, usize)>,
    pub values: DenseMatrix,
}

/// `Cov[W^(m)]` stored by symmetric-difference blocks. Minors are taken
/// with ascending row and column orderings.
///
/// The dense view is indexed by pairs: `(I, J)` sits at
/// `rank(I) * C(r, m) + rank(J)`, so entry `((I,J), (K,L))` is
/// `Cov[det(W_{I×J}), det(W_{K×L})]`.
#[derive(Debug, Clone)]
pub struct CompoundCovariance {
    n: usize,
    enumeration: SubsetEnumeration,
    blocks: Vec<CovBlock>,
    position: HashMap<(usize, usize), (usize, usize)>,
}

pub fn cov_compound_std(n: usize, r: usize, m: usize) -> Result<CompoundCovariance> {
    check_df(n, m)?;
    let e = SubsetEnumeration::new(r, m)?;
    let sets = e.seqs();
    let mut grouped: BTreeMap<(usize, Vec<usize>), Vec<(usize, usize)>> = BTreeMap::new();
    for (a, i) in sets.iter().enumerate() {
        for (b, j) in sets.iter().enumerate() {
            let d = sym_diff(i, j)?;
            grouped.entry((d.len(), d.entries().to_vec())).or_default().push((a, b));
        }
    }
    let mean = falling_product(n, m)?;
    let mut blocks = Vec::with_capacity(grouped.len());
    let mut position = HashMap::new();
    for ((_, key), pairs) in grouped {
        let size = pairs.len();
        let mut values = DenseMatrix::zeros(size, size);
        for (x, &(a, b)) in pairs.iter().enumerate() {
            for (y, &(c, d)) in pairs.iter().enumerate().skip(x) {
                let mut v = cross_moment_std(n, &sets[a], &sets[b], &sets[c], &sets[d])?;
                if a == b && c == d {
                    v -= mean * mean;
                }
                values.set(x, y, v);
                values.set(y, x, v);
            }
        }
        for (x, &pair) in pairs.iter().enumerate() {
            position.insert(pair, (blocks.len(), x));
        }
        blocks.push(CovBlock {
            sym_diff: IndexSeq::new(key, r)?,
            pairs,
            values,
        });
    }
    Ok(CompoundCovariance { n, enumeration: e, blocks, position })
}

impl CompoundCovariance {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.enumeration.r()
    }

    pub fn m(&self) -> usize {
        self.enumeration.m()
    }

    pub fn blocks(&self) -> &[CovBlock] {
        &self.blocks
    }

    /// `Cov[det(W_{I×J}), det(W_{K×L})]` for the orderings as given.
    pub fn get(&self, i: &IndexSeq, j: &IndexSeq, k: &IndexSeq, l: &IndexSeq) -> Result<f64> {
        let e = &self.enumeration;
        let sign = f64::from(i.parity() * j.parity() * k.parity() * l.parity());
        let p = (e.rank(i.sorted().entries())?, e.rank(j.sorted().entries())?);
        let q = (e.rank(k.sorted().entries())?, e.rank(l.sorted().entries())?);
        let (bp, xp) = self.position[&p];
        let (bq, xq) = self.position[&q];
        if bp != bq {
            return Ok(0.0);
        }
        Ok(sign * self.blocks[bp].values[(xp, xq)])
    }

    /// Entry lookup by pair rank, `rank(I) * C(r, m) + rank(J)`.
    pub fn get_by_pair_index(&self, p: usize, q: usize) -> f64 {
        let size = self.enumeration.len();
        let (bp, xp) = self.position[&(p / size, p % size)];
        let (bq, xq) = self.position[&(q / size, q % size)];
        if bp != bq {
            0.0
        } else {
            self.blocks[bp].values[(xp, xq)]
        }
    }

    /// Full `C(r,m)² × C(r,m)²` matrix in pair order.
    pub fn to_dense(&self) -> DenseMatrix {
        let size = self.enumeration.len();
        let mut out = DenseMatrix::zeros(size * size, size * size);
        for block in &self.blocks {
            for (x, &(a, b)) in block.pairs.iter().enumerate() {
                for (y, &(c, d)) in block.pairs.iter().enumerate() {
                    out.set(a * size + b, c * size + d, block.values[(x, y)]);
                }
            }
        }
        out
    }

    /// Pair labels `"I|J"` in dense order.
    pub fn pair_labels(&self) -> Vec<String> {
        let sets = self.enumeration.seqs();
        sets.iter()
            .flat_map(|i| sets.iter().map(move |j| format!("{i}|{j}")))
            .collect()
    }

    /// The table restricted to unordered pairs `rank(I) <= rank(J)`, with
    /// labels. For `r = 4, m = 2` this is the 21 × 21 table.
    pub fn unordered_table(&self) -> (Vec<String>, DenseMatrix) {
        pair_table(&self.enumeration, &self.to_dense(), true)
    }
}

/// Labels and entries of a pair-layout matrix, optionally restricted to
/// pairs with `rank(I) <= rank(J)`.
pub fn pair_table(
    e: &SubsetEnumeration,
    dense: &DenseMatrix,
    unordered: bool,
) -> (Vec<String>, DenseMatrix) {
    let size = e.len();
    let sets = e.seqs();
    let pairs: Vec<(usize, usize)> = (0..size)
        .flat_map(|a| (0..size).map(move |b| (a, b)))
        .filter(|&(a, b)| !unordered || a <= b)
        .collect();
    let labels = pairs.iter().map(|&(a, b)| format!("{}|{}", sets[a], sets[b])).collect();
    let index: Vec<usize> = pairs.iter().map(|&(a, b)| a * size + b).collect();
    let table = DenseMatrix::from_fn(pairs.len(), pairs.len(), |x, y| dense[(index[x], index[y])]);
    (labels, table)
}
