//! Vanishing-minor constraints implied by conditional independence, and
//! random members of the hidden-variable family `C_m`.
//!
//! `X_I ⊥ X_J | X_K` holds for a Gaussian vector iff every
//! `(|K|+1)`-minor of `Σ_{(I∪K)×(J∪K)}` vanishes. The family `C_m` consists of
//! `Σ = Ω + ΛΛᵀ` with `Λ` of size `2m × (m-1)` and `Ω` block diagonal with two
//! `m × m` blocks; its defining constraint is `det(Σ_{[m]×{m+1..2m}}) = 0`.

use crate::error::{Error, Result};
use crate::index::{binomial, IndexSeq, SubsetEnumeration};
use crate::matrix::{minor_det, DenseMatrix, SymPDMatrix};
use crate::rng::Generator;

/// `X_I ⊥ X_J | X_K`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CIStatement {
    i: IndexSeq,
    j: IndexSeq,
    k: IndexSeq,
}

impl CIStatement {
    pub fn new(i: IndexSeq, j: IndexSeq, k: IndexSeq) -> Result<Self> {
        if i.is_empty() || j.is_empty() {
            return Err(Error::Cardinality(
                "both sides of a conditional independence must be nonempty".into(),
            ));
        }
        for other in [&j, &k] {
            if other.r() != i.r() {
                return Err(Error::AmbientMismatch { left: i.r(), right: other.r() });
            }
        }
        for (a, b) in [(&i, &j), (&i, &k), (&j, &k)] {
            if let Some(&x) = a.intersection(b).entries().first() {
                return Err(Error::DuplicateIndex(x));
            }
        }
        Ok(CIStatement { i: i.sorted(), j: j.sorted(), k: k.sorted() })
    }

    pub fn i(&self) -> &IndexSeq {
        &self.i
    }

    pub fn j(&self) -> &IndexSeq {
        &self.j
    }

    pub fn k(&self) -> &IndexSeq {
        &self.k
    }

    /// `C(|I|+|K|, |K|+1) · C(|J|+|K|, |K|+1)`.
    pub fn constraint_count(&self) -> usize {
        let c = self.k.len();
        binomial(self.i.len() + c, c + 1) * binomial(self.j.len() + c, c + 1)
    }
}

fn subsets_of(ground: &IndexSeq, size: usize) -> Result<Vec<IndexSeq>> {
    let e = SubsetEnumeration::new(ground.len(), size)?;
    e.iter()
        .map(|pos| IndexSeq::new(pos.iter().map(|&p| ground.entries()[p - 1]).collect(), ground.r()))
        .collect()
}

/// All `(G, H)` with `G ⊆ I∪K`, `H ⊆ J∪K`, `|G| = |H| = |K|+1`, each
/// standing for `det(Σ_{G×H}) = 0`. Sorted lexicographically by `G`, then `H`.
pub fn ci_to_minors(stmt: &CIStatement, r: usize) -> Result<Vec<(IndexSeq, IndexSeq)>> {
    if stmt.i.r() != r {
        return Err(Error::AmbientMismatch { left: stmt.i.r(), right: r });
    }
    let size = stmt.k.len() + 1;
    let rows = subsets_of(&stmt.i.union(&stmt.k), size)?;
    let cols = subsets_of(&stmt.j.union(&stmt.k), size)?;
    let mut out = Vec::with_capacity(rows.len() * cols.len());
    for g in &rows {
        for h in &cols {
            out.push((g.clone(), h.clone()));
        }
    }
    Ok(out)
}

/// Cardinality condition `|K| + |I2| + |J2| ≤ |K1| + m − 1` under which
/// `X_{I1} ⊥ X_{J} | X_{K}`-type statements with the given splits force
/// `det(Σ_{I×J}) = 0` for `I = I1 ∪ I2`, `J = J1 ∪ J2`. The statements
/// themselves are not checked.
pub fn offdiag_minor_implied(
    i1: &IndexSeq,
    i2: &IndexSeq,
    j1: &IndexSeq,
    j2: &IndexSeq,
    k: &IndexSeq,
    k1: &IndexSeq,
    r: usize,
) -> Result<bool> {
    for s in [i1, i2, j1, j2, k, k1] {
        if s.r() != r {
            return Err(Error::AmbientMismatch { left: s.r(), right: r });
        }
    }
    if i1.is_empty() || j1.is_empty() {
        return Err(Error::Cardinality("I1 and J1 must be nonempty".into()));
    }
    let parts = [i1, i2, j1, j2, k];
    for a in 0..parts.len() {
        for b in a + 1..parts.len() {
            if let Some(&x) = parts[a].intersection(parts[b]).entries().first() {
                return Err(Error::DuplicateIndex(x));
            }
        }
    }
    if !k1.difference(k).is_empty() {
        return Err(Error::Precondition(format!("K1 = {{{k1}}} is not contained in K = {{{k}}}")));
    }
    let m = i1.len() + i2.len();
    if j1.len() + j2.len() != m {
        return Err(Error::Cardinality(format!(
            "|I| = {m} but |J| = {}",
            j1.len() + j2.len()
        )));
    }
    Ok(k.len() + i2.len() + j2.len() < k1.len() + m)
}

/// Scales for drawing from `C_m`: `Λ` entries are `N(0, lambda²)` and each
/// `Ω` block is `I_m + omega · G Gᵀ / m` with `G` standard normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CmSpread {
    pub lambda: f64,
    pub omega: f64,
}

impl Default for CmSpread {
    fn default() -> Self {
        CmSpread { lambda: 1.0, omega: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HiddenFactorCov {
    pub m: usize,
    pub lambda: DenseMatrix,
    pub omega: SymPDMatrix,
    pub sigma: SymPDMatrix,
}

impl HiddenFactorCov {
    /// Builds `Σ = Ω + ΛΛᵀ` from explicit factors.
    pub fn from_parts(lambda: DenseMatrix, omega: SymPDMatrix) -> Result<Self> {
        let r = omega.dim();
        if r % 2 != 0 || r < 4 {
            return Err(Error::Dimension(format!("Ω must be 2m x 2m with m >= 2, got {r}x{r}")));
        }
        let m = r / 2;
        if lambda.rows() != r || lambda.cols() != m - 1 {
            return Err(Error::Dimension(format!(
                "Λ must be {r}x{}, got {}x{}",
                m - 1,
                lambda.rows(),
                lambda.cols()
            )));
        }
        let o = omega.matrix();
        for a in 0..m {
            for b in m..r {
                if o[(a, b)] != 0.0 {
                    return Err(Error::Precondition(format!(
                        "Ω must be block diagonal, entry ({}, {}) is {}",
                        a + 1,
                        b + 1,
                        o[(a, b)]
                    )));
                }
            }
        }
        let ll = lambda.matmul(&lambda.transpose())?;
        let sigma = SymPDMatrix::new(DenseMatrix::from_fn(r, r, |a, b| o[(a, b)] + ll[(a, b)]))?;
        Ok(HiddenFactorCov { m, lambda, omega, sigma })
    }

    /// `[m]`.
    pub fn rows(&self) -> IndexSeq {
        IndexSeq::leading(self.m, 2 * self.m).expect("m <= 2m")
    }

    /// `{m+1, ..., 2m}`.
    pub fn cols(&self) -> IndexSeq {
        IndexSeq::new((self.m + 1..=2 * self.m).collect(), 2 * self.m).expect("valid columns")
    }

    /// `det(Σ_{[m]×{m+1..2m}})`.
    pub fn vanishing_minor(&self) -> f64 {
        minor_det(self.sigma.matrix(), &self.rows(), &self.cols()).expect("valid minor")
    }

    /// Product of Euclidean norms of the rows of `Σ_{I×J}`, the Hadamard
    /// bound on `|det(Σ_{I×J})|`.
    pub fn row_norm_product(&self) -> f64 {
        row_norm_product(self.sigma.matrix(), &self.rows(), &self.cols())
    }
}

/// `∏_{i∈I} ‖Σ_{i×J}‖₂`.
pub fn row_norm_product(a: &DenseMatrix, i: &IndexSeq, j: &IndexSeq) -> f64 {
    i.entries()
        .iter()
        .map(|&x| j.entries().iter().map(|&y| a[(x - 1, y - 1)].powi(2)).sum::<f64>().sqrt())
        .product()
}

/// Draws a random member of `C_m`.
pub fn sample_cm_cov(m: usize, g: &mut Generator, spread: CmSpread) -> Result<HiddenFactorCov> {
    if m < 2 {
        return Err(Error::Precondition(format!("C_m needs m >= 2, got {m}")));
    }
    let r = 2 * m;
    let mut omega = DenseMatrix::zeros(r, r);
    for start in [0, m] {
        let gm = DenseMatrix::from_fn(m, m, |_, _| g.normal());
        let ggt = gm.matmul(&gm.transpose())?;
        for a in 0..m {
            for b in 0..m {
                let id = if a == b { 1.0 } else { 0.0 };
                omega.set(start + a, start + b, id + spread.omega * ggt[(a, b)] / m as f64);
            }
        }
    }
    let lambda = DenseMatrix::from_fn(r, m - 1, |_, _| spread.lambda * g.normal());
    HiddenFactorCov::from_parts(lambda, SymPDMatrix::new(omega)?)
}
