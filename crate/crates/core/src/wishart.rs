//! Wishart sampling through the Bartlett (Choleski) construction, plus
//! square Gaussian matrices with arbitrary mean.
//!
//! A standard Wishart `W ~ W_r(n, I)` is drawn as `T Tᵀ` with `T` lower
//! triangular, `t_ii² ~ χ²_{n-i+1}` and `t_ij ~ N(0, 1)` below the diagonal.
//! Entries of `T` are filled row by row, left to right, diagonal last in each
//! row. A general Wishart is `Σ^{1/2} W Σ^{1/2}` with the symmetric root.

use crate::error::{Error, Result};
use crate::matrix::{sym_sqrt, DenseMatrix, SymPDMatrix};
use crate::rng::Generator;

#[derive(Debug, Clone, PartialEq)]
pub struct WishartSpec {
    n: usize,
    sigma: SymPDMatrix,
}

impl WishartSpec {
    pub fn new(n: usize, sigma: SymPDMatrix) -> Result<Self> {
        if n == 0 {
            return Err(Error::Precondition("degrees of freedom must be at least 1".into()));
        }
        Ok(WishartSpec { n, sigma })
    }

    pub fn standard(n: usize, r: usize) -> Result<Self> {
        WishartSpec::new(n, SymPDMatrix::identity(r))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.sigma.dim()
    }

    pub fn sigma(&self) -> &SymPDMatrix {
        &self.sigma
    }
}

/// Lower-triangular Bartlett factor with positive diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct CholeskiFactor(DenseMatrix);

impl CholeskiFactor {
    pub fn matrix(&self) -> &DenseMatrix {
        &self.0
    }

    /// `T Tᵀ`.
    pub fn gram(&self) -> DenseMatrix {
        self.0.matmul(&self.0.transpose()).expect("square factor")
    }
}

fn check_full_rank(n: usize, r: usize) -> Result<()> {
    if n < r {
        return Err(Error::Precondition(format!(
            "sampling needs n >= r (got n = {n}, r = {r})"
        )));
    }
    Ok(())
}

/// Fills the row-major `r`x`r` buffer `t` with a Bartlett factor.
fn fill_bartlett(n: usize, r: usize, g: &mut Generator, t: &mut [f64]) {
    for i in 0..r {
        for j in 0..i {
            t[i * r + j] = g.normal();
        }
        let d = g.chi_square((n - i) as f64).sqrt();
        assert!(d > 0.0, "Bartlett diagonal must be positive");
        t[i * r + i] = d;
        for j in i + 1..r {
            t[i * r + j] = 0.0;
        }
    }
}

pub fn sample_bartlett(n: usize, r: usize, g: &mut Generator) -> Result<CholeskiFactor> {
    check_full_rank(n, r)?;
    let mut t = vec![0.0; r * r];
    fill_bartlett(n, r, g, &mut t);
    Ok(CholeskiFactor(DenseMatrix::from_row_slice(r, r, &t)?))
}

pub fn sample_standard(n: usize, r: usize, g: &mut Generator) -> Result<SymPDMatrix> {
    let t = sample_bartlett(n, r, g)?;
    SymPDMatrix::new(t.gram())
}

pub fn sample_general(spec: &WishartSpec, g: &mut Generator) -> Result<SymPDMatrix> {
    let mut sampler = WishartSampler::new(spec)?;
    let mut out = vec![0.0; spec.r() * spec.r()];
    sampler.sample_into(g, &mut out);
    SymPDMatrix::new(DenseMatrix::from_row_slice(spec.r(), spec.r(), &out)?)
}

/// Draws `X` with independent `N(a_ij, 1)` entries.
pub fn sample_gaussian_square(a: &DenseMatrix, g: &mut Generator) -> Result<DenseMatrix> {
    if !a.is_square() {
        return Err(Error::Dimension(format!(
            "mean matrix must be square, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let m = a.rows();
    let data: Vec<f64> = a.to_row_major().into_iter().map(|x| x + g.normal()).collect();
    DenseMatrix::from_row_slice(m, m, &data)
}

/// Reusable buffers for repeated draws from one Wishart distribution.
#[derive(Debug, Clone)]
pub struct WishartSampler {
    n: usize,
    r: usize,
    root: Option<Vec<f64>>,
    t: Vec<f64>,
    w: Vec<f64>,
    tmp: Vec<f64>,
}

impl WishartSampler {
    pub fn new(spec: &WishartSpec) -> Result<Self> {
        let r = spec.r();
        check_full_rank(spec.n, r)?;
        let root = if spec.sigma.is_diagonal() && (0..r).all(|i| spec.sigma.matrix()[(i, i)] == 1.0)
        {
            None
        } else {
            Some(sym_sqrt(&spec.sigma)?.matrix().to_row_major())
        };
        Ok(WishartSampler {
            n: spec.n,
            r,
            root,
            t: vec![0.0; r * r],
            w: vec![0.0; r * r],
            tmp: vec![0.0; r * r],
        })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    /// Writes one draw, row-major, into `out` (length `r * r`).
    pub fn sample_into(&mut self, g: &mut Generator, out: &mut [f64]) {
        let r = self.r;
        fill_bartlett(self.n, r, g, &mut self.t);
        let t = &self.t;
        let w = if self.root.is_some() { &mut self.w[..] } else { &mut out[..] };
        for i in 0..r {
            for j in 0..=i {
                let mut acc = 0.0;
                for k in 0..=j {
                    acc += t[i * r + k] * t[j * r + k];
                }
                w[i * r + j] = acc;
                w[j * r + i] = acc;
            }
        }
        if let Some(root) = &self.root {
            // tmp = R W, out = tmp R
            for i in 0..r {
                for j in 0..r {
                    let mut acc = 0.0;
                    for k in 0..r {
                        acc += root[i * r + k] * self.w[k * r + j];
                    }
                    self.tmp[i * r + j] = acc;
                }
            }
            for i in 0..r {
                for j in 0..=i {
                    let mut acc = 0.0;
                    for k in 0..r {
                        acc += self.tmp[i * r + k] * root[k * r + j];
                    }
                    out[i * r + j] = acc;
                    out[j * r + i] = acc;
                }
            }
        }
    }
}
