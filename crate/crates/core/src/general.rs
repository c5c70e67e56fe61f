//! Moments of minors of `S ~ W_r(n, Σ)` for an arbitrary positive definite
//! scale matrix.
//!
//! Two independent routes are provided. The compound route transfers the
//! standard moments through `S^(m) = (Σ^{1/2})^(m) W^(m) (Σ^{1/2})^(m)`. The
//! explicit route computes variances of off-diagonal minors by conditioning
//! on `S_{J×J}`, and of general minors by splitting off the common block
//! `C = I ∩ J` through a Schur complement:
//! `det(S_{I×J}) = det(S_{C×C}) · det(S̄_{Ī×J̄})` with the two factors
//! independent and `S̄ ~ W_{r-c}(n - c, Σ̄)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::index::{IndexSeq, SubsetEnumeration};
use crate::matrix::{
    compound, compound_trace, kronecker, minor_det, partitioned_inverse_block, schur_complement,
    sym_sqrt, CompoundMatrix, DenseMatrix, SymPDMatrix,
};
use crate::standard::{
    check_df, check_pair, cov_compound_std, factorial, falling_product, pair_table,
};

fn check_indices(sigma: &SymPDMatrix, sets: &[&IndexSeq]) -> Result<()> {
    for s in sets {
        if IndexSeq::max(s) > sigma.dim() {
            return Err(Error::IndexOutOfRange { index: IndexSeq::max(s), dim: sigma.dim() });
        }
    }
    Ok(())
}

/// `E[S^(m)] = n!/(n-m)! · Σ^(m)`.
pub fn e_compound_general(n: usize, sigma: &SymPDMatrix, m: usize) -> Result<CompoundMatrix> {
    check_df(n, m)?;
    let c = compound(sigma.matrix(), m)?;
    let scale = falling_product(n, m)?;
    Ok(CompoundMatrix::from_parts(sigma.dim(), m, c.into_matrix().scale(scale)))
}

/// `E[det(S_{I×J})] = n!/(n-m)! · det(Σ_{I×J})`.
pub fn e_minor_general(n: usize, sigma: &SymPDMatrix, i: &IndexSeq, j: &IndexSeq) -> Result<f64> {
    check_pair(i, j)?;
    check_indices(sigma, &[i, j])?;
    check_df(n, i.len())?;
    Ok(falling_product(n, i.len())? * minor_det(sigma.matrix(), i, j)?)
}

/// `(Σ^{1/2})^(m)`.
pub fn root_compound(sigma: &SymPDMatrix, m: usize) -> Result<DenseMatrix> {
    Ok(compound(sym_sqrt(sigma)?.matrix(), m)?.into_matrix())
}

/// `Cov[S^(m)]` in the pair layout of
/// [`CompoundCovariance`](crate::standard::CompoundCovariance): the standard
/// covariance sandwiched by `(Σ^{1/2})^(m) ⊗ (Σ^{1/2})^(m)`.
pub fn cov_compound_general(n: usize, sigma: &SymPDMatrix, m: usize) -> Result<DenseMatrix> {
    check_df(n, m)?;
    let cov = cov_compound_std(n, sigma.dim(), m)?.to_dense();
    let root = root_compound(sigma, m)?;
    let k = kronecker(&root, &root);
    k.matmul(&cov)?.matmul(&k)
}

/// [`cov_compound_general`] with `"I|J"` labels, optionally restricted to
/// pairs with `rank(I) <= rank(J)`.
pub fn cov_table_general(
    n: usize,
    sigma: &SymPDMatrix,
    m: usize,
    unordered: bool,
) -> Result<(Vec<String>, DenseMatrix)> {
    let dense = cov_compound_general(n, sigma, m)?;
    let e = SubsetEnumeration::new(sigma.dim(), m)?;
    Ok(pair_table(&e, &dense, unordered))
}

/// `E[det(S_{I×J}) det(S_{K×L})]` for the orderings as given, through the
/// compound transfer of the standard second moments.
pub fn cross_moment_general(
    n: usize,
    sigma: &SymPDMatrix,
    i: &IndexSeq,
    j: &IndexSeq,
    k: &IndexSeq,
    l: &IndexSeq,
) -> Result<f64> {
    check_pair(i, j)?;
    check_pair(k, l)?;
    check_pair(i, k)?;
    check_indices(sigma, &[i, j, k, l])?;
    let m = i.len();
    check_df(n, m)?;
    let r = sigma.dim();
    let e = SubsetEnumeration::new(r, m)?;
    let root = root_compound(sigma, m)?;
    let cov = cov_compound_std(n, r, m)?;
    let mean = falling_product(n, m)?;
    let rank = |s: &IndexSeq| e.rank(s.sorted().entries());
    let (pi, pj, pk, pl) = (rank(i)?, rank(j)?, rank(k)?, rank(l)?);
    let sign = f64::from(i.parity() * j.parity() * k.parity() * l.parity());

    let mut total = 0.0;
    for block in cov.blocks() {
        for (x, &(a, b)) in block.pairs.iter().enumerate() {
            let left = root[(pi, a)] * root[(b, pj)];
            if left == 0.0 {
                continue;
            }
            for (y, &(c, d)) in block.pairs.iter().enumerate() {
                let mut second = block.values[(x, y)];
                if a == b && c == d {
                    second += mean * mean;
                }
                total += left * root[(pk, c)] * root[(d, pl)] * second;
            }
        }
    }
    Ok(sign * total)
}

/// `Var[det(S_{I×I})] = n!/(n-m)! {(n+2)!/(n+2-m)! − n!/(n-m)!} det(Σ_{I×I})²`.
pub fn var_principal_minor(n: usize, sigma: &SymPDMatrix, i: &IndexSeq) -> Result<f64> {
    check_indices(sigma, &[i])?;
    let m = i.len();
    check_df(n, m)?;
    let d = minor_det(sigma.matrix(), i, i)?;
    let mean = falling_product(n, m)?;
    Ok(mean * (falling_product(n + 2, m)? - mean) * d * d)
}

/// Variance split by conditioning: `Var[E[· | ·]] + E[Var[· | ·]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VarianceBreakdown {
    pub total: f64,
    /// The part proportional to `det(Σ_{I×J})²`.
    #[serde(rename = "mean_part")]
    pub conditional_mean_part: f64,
    #[serde(rename = "var_part")]
    pub conditional_var_part: f64,
}

impl VarianceBreakdown {
    fn new(mean_part: f64, var_part: f64) -> Self {
        VarianceBreakdown {
            total: mean_part + var_part,
            conditional_mean_part: mean_part,
            conditional_var_part: var_part,
        }
    }
}

/// Which closed form produced a variance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum VarianceFormula {
    #[serde(rename = "prop5.1")]
    Principal,
    #[serde(rename = "prop5.5")]
    OffDiagonal,
    #[serde(rename = "thm5.7")]
    General,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MinorVariance {
    #[serde(flatten)]
    pub breakdown: VarianceBreakdown,
    pub formula: VarianceFormula,
}

/// `Var[det(S_{I×J})]` for disjoint `I`, `J`.
///
/// The conditional-mean part is
/// `n!/(n-m)! {(n+2)!/(n+2-m)! − n!/(n-m)!} det(Σ_{I×J})²` and the
/// conditional-variance part is
/// `det(Σ_{IJ×IJ}) Σ_{k<m} (m-k)! n!/(n-m)! (n+2)!/(n+2-k)! (−1)^k tr{(Σ_{J×I} Σ^{IJ})^(k)}`,
/// with `Σ^{IJ}` the `I×J` block of `(Σ_{IJ×IJ})^{-1}`.
pub fn var_offdiag_minor(
    n: usize,
    sigma: &SymPDMatrix,
    i: &IndexSeq,
    j: &IndexSeq,
) -> Result<VarianceBreakdown> {
    check_pair(i, j)?;
    check_indices(sigma, &[i, j])?;
    if !i.intersection(j).is_empty() {
        return Err(Error::Precondition(format!(
            "off-diagonal minor needs disjoint sets, got {{{i}}} and {{{j}}}"
        )));
    }
    let m = i.len();
    check_df(n, m)?;
    let s = sigma.matrix();
    let d_ij = minor_det(s, i, j)?;
    let ij = i.concat(j)?;
    let d_block = minor_det(s, &ij, &ij)?;
    let falling_n = falling_product(n, m)?;
    let mean_part = falling_n * (falling_product(n + 2, m)? - falling_n) * d_ij * d_ij;

    let inv_block = partitioned_inverse_block(sigma, i, j)?;
    let prod = s.submatrix(j, i)?.matmul(&inv_block)?;
    let mut sum = 0.0;
    for k in 0..m {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += factorial(m - k) * falling_product(n + 2, k)? * sign * compound_trace(&prod, k)?;
    }
    let var_part = d_block * falling_n * sum;
    Ok(VarianceBreakdown::new(mean_part, var_part))
}

/// Variance of an arbitrary minor with the closed form that applies.
pub fn var_minor_breakdown(
    n: usize,
    sigma: &SymPDMatrix,
    i: &IndexSeq,
    j: &IndexSeq,
) -> Result<MinorVariance> {
    check_pair(i, j)?;
    check_indices(sigma, &[i, j])?;
    let m = i.len();
    check_df(n, m)?;
    let common = i.intersection(j);
    let c = common.len();
    if c == 0 {
        return Ok(MinorVariance {
            breakdown: var_offdiag_minor(n, sigma, i, j)?,
            formula: VarianceFormula::OffDiagonal,
        });
    }
    let d_cc = minor_det(sigma.matrix(), &common, &common)?;
    let first_c = falling_product(n, c)?;
    let second_c = first_c * falling_product(n + 2, c)? * d_cc * d_cc;
    let mean_c = first_c * d_cc;
    if c == m {
        return Ok(MinorVariance {
            breakdown: VarianceBreakdown::new(second_c - mean_c * mean_c, 0.0),
            formula: VarianceFormula::Principal,
        });
    }

    // Σ̄ lives on D = [r] ∖ C; re-express Ī, J̄ as positions within D.
    let r = sigma.dim();
    let bar = schur_complement(sigma, &common)?;
    let rest: Vec<usize> = (1..=r).filter(|&x| !common.contains(x)).collect();
    let position = |x: usize| rest.iter().position(|&y| y == x).expect("index outside C") + 1;
    let i_bar = IndexSeq::new(
        i.entries().iter().filter(|&&x| !common.contains(x)).map(|&x| position(x)).collect(),
        r - c,
    )?;
    let j_bar = IndexSeq::new(
        j.entries().iter().filter(|&&x| !common.contains(x)).map(|&x| position(x)).collect(),
        r - c,
    )?;
    let inner = var_offdiag_minor(n - c, &bar, &i_bar, &j_bar)?;
    let mean_inner = falling_product(n - c, m - c)? * minor_det(bar.matrix(), &i_bar, &j_bar)?;

    let mean_part = second_c * inner.conditional_mean_part
        + (second_c - mean_c * mean_c) * mean_inner * mean_inner;
    let var_part = second_c * inner.conditional_var_part;
    Ok(MinorVariance {
        breakdown: VarianceBreakdown::new(mean_part, var_part),
        formula: VarianceFormula::General,
    })
}

/// `Var[det(S_{I×J})]` for any `I`, `J` of equal size.
pub fn var_minor_general(n: usize, sigma: &SymPDMatrix, i: &IndexSeq, j: &IndexSeq) -> Result<f64> {
    Ok(var_minor_breakdown(n, sigma, i, j)?.breakdown.total)
}

/// Tetrad variance
/// `n(n-1)[(n+2) det(Σ_II) det(Σ_JJ) − n det(Σ_{IJ×IJ}) + 3n det(Σ_IJ)²]`.
pub fn tetrad_variance(n: usize, sigma: &SymPDMatrix, i: &IndexSeq, j: &IndexSeq) -> Result<f64> {
    if i.len() != 2 || j.len() != 2 {
        return Err(Error::Cardinality(format!(
            "a tetrad needs two rows and two columns, got {{{i}}} and {{{j}}}"
        )));
    }
    check_indices(sigma, &[i, j])?;
    if !i.intersection(j).is_empty() {
        return Err(Error::Precondition(format!(
            "tetrad rows {{{i}}} and columns {{{j}}} overlap"
        )));
    }
    check_df(n, 2)?;
    let s = sigma.matrix();
    let nf = n as f64;
    let d_ii = minor_det(s, i, i)?;
    let d_jj = minor_det(s, j, j)?;
    let d_ij = minor_det(s, i, j)?;
    let ij = i.concat(j)?;
    let d_block = minor_det(s, &ij, &ij)?;
    Ok(nf * (nf - 1.0) * ((nf + 2.0) * d_ii * d_jj - nf * d_block + 3.0 * nf * d_ij * d_ij))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoncentralMoments {
    pub mean: f64,
    pub second_moment: f64,
    pub variance: f64,
}

/// Moments of `det(X)` for `X` with independent `N(a_ij, 1)` entries:
/// `E[det X] = det A` and `E[det(X)²] = Σ_{k=0}^{m} (m-k)! tr[(AAᵀ)^(k)]`.
pub fn noncentral_det_moments(a: &DenseMatrix) -> Result<NoncentralMoments> {
    if !a.is_square() {
        return Err(Error::Dimension(format!(
            "noncentral determinant needs a square mean, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let m = a.rows();
    let gram = a.matmul(&a.transpose())?;
    let terms: Vec<f64> = (0..=m)
        .map(|k| Ok(factorial(m - k) * compound_trace(&gram, k)?))
        .collect::<Result<_>>()?;
    let variance: f64 = terms[..m].iter().sum();
    Ok(NoncentralMoments {
        mean: a.det()?,
        second_moment: variance + terms[m],
        variance,
    })
}
