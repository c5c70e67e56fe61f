//! Dense real linear algebra: minors, compound matrices, Kronecker products,
//! symmetric square roots, Schur complements and partitioned inverses.
//!
//! Storage is an [`nalgebra::DMatrix`]; determinants of minors use a small
//! in-place LU factorization with partial pivoting.

use std::fmt;
use std::io::{Read, Write};
use std::ops::Index;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::index::{IndexSeq, SubsetEnumeration};

/// Relative tolerance for accepting a matrix as symmetric.
pub const SYMMETRY_TOLERANCE: f64 = 1e-9;
/// Eigenvalues must exceed this multiple of the largest diagonal entry.
pub const PD_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix(DMatrix<f64>);

impl DenseMatrix {
    pub fn from_row_slice(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries supplied for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { row: pos / cols.max(1), col: pos % cols.max(1) });
        }
        Ok(DenseMatrix(DMatrix::from_row_slice(rows, cols, data)))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::Dimension("rows have differing lengths".into()));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        DenseMatrix::from_row_slice(n_rows, n_cols, &flat)
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> f64) -> Self {
        DenseMatrix(DMatrix::from_fn(rows, cols, f))
    }

    pub fn from_nalgebra(m: DMatrix<f64>) -> Self {
        DenseMatrix(m)
    }

    pub fn identity(n: usize) -> Self {
        DenseMatrix(DMatrix::identity(n, n))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix(DMatrix::zeros(rows, cols))
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let n = d.len();
        DenseMatrix::from_fn(n, n, |i, j| if i == j { d[i] } else { 0.0 })
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn as_nalgebra(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_nalgebra(self) -> DMatrix<f64> {
        self.0
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.0[(i, j)] = v;
    }

    pub fn transpose(&self) -> DenseMatrix {
        DenseMatrix(self.0.transpose())
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols() != other.rows() {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows(),
                self.cols(),
                other.rows(),
                other.cols()
            )));
        }
        Ok(DenseMatrix(&self.0 * &other.0))
    }

    pub fn scale(&self, factor: f64) -> DenseMatrix {
        DenseMatrix(&self.0 * factor)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &DenseMatrix) -> f64 {
        assert_eq!(self.0.shape(), other.0.shape());
        self.0
            .iter()
            .zip(other.0.iter())
            .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()))
    }

    /// Row-major copy of the entries.
    pub fn to_row_major(&self) -> Vec<f64> {
        (0..self.rows())
            .flat_map(|i| (0..self.cols()).map(move |j| (i, j)))
            .map(|(i, j)| self.0[(i, j)])
            .collect()
    }

    /// Submatrix with zero-based rows and columns taken in the given order.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> DenseMatrix {
        DenseMatrix::from_fn(rows.len(), cols.len(), |a, b| self.0[(rows[a], cols[b])])
    }

    /// Submatrix with 1-based index sequences, respecting their orderings.
    pub fn submatrix(&self, rows: &IndexSeq, cols: &IndexSeq) -> Result<DenseMatrix> {
        self.check_indices(rows, cols)?;
        Ok(self.select(&rows.zero_based(), &cols.zero_based()))
    }

    pub fn det(&self) -> Result<f64> {
        if !self.is_square() {
            return Err(Error::Dimension(format!(
                "determinant of a non-square {}x{} matrix",
                self.rows(),
                self.cols()
            )));
        }
        let n = self.rows();
        let mut buf = self.to_row_major();
        Ok(lu_det(&mut buf, n))
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows().min(self.cols())).map(|i| self.0[(i, i)]).sum()
    }

    fn check_indices(&self, rows: &IndexSeq, cols: &IndexSeq) -> Result<()> {
        if rows.max() > self.rows() {
            return Err(Error::IndexOutOfRange { index: rows.max(), dim: self.rows() });
        }
        if cols.max() > self.cols() {
            return Err(Error::IndexOutOfRange { index: cols.max(), dim: self.cols() });
        }
        Ok(())
    }

    /// Reads a numeric CSV matrix. A first row that does not parse as
    /// numbers is treated as a header and skipped.
    pub fn from_csv_reader(reader: impl Read) -> Result<DenseMatrix> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(reader);
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (line, record) in rdr.records().enumerate() {
            let record = record.map_err(|e| Error::Parse(e.to_string()))?;
            if record.iter().all(|f| f.is_empty()) {
                continue;
            }
            let parsed: std::result::Result<Vec<f64>, _> =
                record.iter().map(|f| f.parse::<f64>()).collect();
            match parsed {
                Ok(row) => rows.push(row),
                Err(_) if line == 0 => continue,
                Err(_) => {
                    return Err(Error::Parse(format!(
                        "non-numeric entry on CSV line {}",
                        line + 1
                    )))
                }
            }
        }
        if rows.is_empty() {
            return Err(Error::Parse("CSV contains no numeric rows".into()));
        }
        DenseMatrix::from_rows(&rows)
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<DenseMatrix> {
        let path = path.as_ref();
        let file = std::fs::File::open(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        DenseMatrix::from_csv_reader(file)
            .map_err(|e| match e {
                Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
                other => other,
            })
    }

    /// Writes the matrix as CSV, optionally with row and column labels.
    pub fn write_csv(&self, out: impl Write, labels: Option<&[String]>) -> Result<()> {
        let mut w = csv::WriterBuilder::new().from_writer(out);
        let csv_err = |e: csv::Error| Error::Io(e.to_string());
        if let Some(labels) = labels {
            let mut header = vec![String::new()];
            header.extend(labels.iter().cloned());
            w.write_record(&header).map_err(csv_err)?;
        }
        for i in 0..self.rows() {
            let mut record: Vec<String> = Vec::with_capacity(self.cols() + 1);
            if let Some(labels) = labels {
                record.push(labels[i].clone());
            }
            record.extend((0..self.cols()).map(|j| format_scalar(self.0[(i, j)])));
            w.write_record(&record).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self, labels: Option<&[String]>) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf, labels).expect("writing CSV to memory");
        String::from_utf8(buf).expect("CSV output is UTF-8")
    }
}

/// Shortest decimal representation that round-trips to the same `f64`.
pub fn format_scalar(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else {
        format!("{x}")
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    fn index(&self, idx: (usize, usize)) -> &f64 {
        &self.0[idx]
    }
}

impl fmt::Display for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows() {
            let row: Vec<String> = (0..self.cols()).map(|j| format!("{:>12.6}", self.0[(i, j)])).collect();
            writeln!(f, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

/// Determinant of the `n`x`n` row-major matrix in `buf`, destroying it.
pub(crate) fn lu_det(buf: &mut [f64], n: usize) -> f64 {
    let mut det = 1.0;
    for col in 0..n {
        let mut pivot = col;
        let mut best = buf[col * n + col].abs();
        for row in col + 1..n {
            let v = buf[row * n + col].abs();
            if v > best {
                best = v;
                pivot = row;
            }
        }
        if best == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for c in col..n {
                buf.swap(col * n + c, pivot * n + c);
            }
            det = -det;
        }
        let p = buf[col * n + col];
        det *= p;
        for row in col + 1..n {
            let factor = buf[row * n + col] / p;
            if factor != 0.0 {
                for c in col + 1..n {
                    buf[row * n + c] -= factor * buf[col * n + c];
                }
            }
        }
    }
    det
}

/// Determinant of the minor of a row-major `dim`x`dim` buffer, with zero-based
/// rows and columns in the given order. Allocation-free for `m <= 8`.
pub(crate) fn minor_det_raw(data: &[f64], dim: usize, rows: &[usize], cols: &[usize]) -> f64 {
    let m = rows.len();
    match m {
        0 => 1.0,
        1 => data[rows[0] * dim + cols[0]],
        2 => {
            data[rows[0] * dim + cols[0]] * data[rows[1] * dim + cols[1]]
                - data[rows[0] * dim + cols[1]] * data[rows[1] * dim + cols[0]]
        }
        _ if m <= 8 => {
            let mut buf = [0.0f64; 64];
            for (a, &i) in rows.iter().enumerate() {
                for (b, &j) in cols.iter().enumerate() {
                    buf[a * m + b] = data[i * dim + j];
                }
            }
            lu_det(&mut buf[..m * m], m)
        }
        _ => {
            let mut buf: Vec<f64> = rows
                .iter()
                .flat_map(|&i| cols.iter().map(move |&j| data[i * dim + j]))
                .collect();
            lu_det(&mut buf, m)
        }
    }
}

/// `det(A_{I×J})`, rows listed in the order of `I` and columns in the order
/// of `J`.
pub fn minor_det(a: &DenseMatrix, i: &IndexSeq, j: &IndexSeq) -> Result<f64> {
    if i.len() != j.len() {
        return Err(Error::Cardinality(format!(
            "minor rows {} and columns {} differ in size",
            i, j
        )));
    }
    let sub = a.submatrix(i, j)?;
    let m = i.len();
    let mut buf = sub.to_row_major();
    Ok(lu_det(&mut buf, m))
}

/// The `m`-th compound `A^(m)`, rows and columns indexed by `m`-subsets in
/// lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct CompoundMatrix {
    r: usize,
    m: usize,
    matrix: DenseMatrix,
}

impl CompoundMatrix {
    pub(crate) fn from_parts(r: usize, m: usize, matrix: DenseMatrix) -> Self {
        CompoundMatrix { r, m, matrix }
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn enumeration(&self) -> SubsetEnumeration {
        SubsetEnumeration::new(self.r, self.m).expect("m <= r by construction")
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> DenseMatrix {
        self.matrix
    }

    /// Entry for the minor with rows `I` and columns `J`; non-ascending
    /// orderings pick up the corresponding sign.
    pub fn entry(&self, i: &IndexSeq, j: &IndexSeq) -> Result<f64> {
        let e = self.enumeration();
        let a = e.rank(i.sorted().entries())?;
        let b = e.rank(j.sorted().entries())?;
        Ok(f64::from(i.parity() * j.parity()) * self.matrix[(a, b)])
    }

    /// Subset labels (`"1,2"`, ...) in row order.
    pub fn labels(&self) -> Vec<String> {
        self.enumeration().seqs().iter().map(IndexSeq::to_string).collect()
    }
}

pub fn compound(a: &DenseMatrix, m: usize) -> Result<CompoundMatrix> {
    if !a.is_square() {
        return Err(Error::Dimension(format!(
            "compound of a non-square {}x{} matrix",
            a.rows(),
            a.cols()
        )));
    }
    let r = a.rows();
    let e = SubsetEnumeration::new(r, m)?;
    let subsets: Vec<Vec<usize>> = e
        .iter()
        .map(|s| s.into_iter().map(|x| x - 1).collect())
        .collect();
    let data = a.to_row_major();
    let n = subsets.len();
    let mut out = DenseMatrix::zeros(n, n);
    for (p, rows) in subsets.iter().enumerate() {
        for (q, cols) in subsets.iter().enumerate() {
            out.set(p, q, minor_det_raw(&data, r, rows, cols));
        }
    }
    Ok(CompoundMatrix { r, m, matrix: out })
}

pub fn kronecker(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    let (ar, ac, br, bc) = (a.rows(), a.cols(), b.rows(), b.cols());
    DenseMatrix::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

/// Symmetric positive definite matrix, validated at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SymPDMatrix(DenseMatrix);

impl SymPDMatrix {
    pub fn new(m: DenseMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Dimension(format!(
                "covariance matrix must be square, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        let n = m.rows();
        if n == 0 {
            return Err(Error::Dimension("empty matrix".into()));
        }
        let scale = m.max_abs();
        let mut asym = 0.0f64;
        for i in 0..n {
            for j in 0..i {
                asym = asym.max((m[(i, j)] - m[(j, i)]).abs());
            }
        }
        if asym > SYMMETRY_TOLERANCE * scale {
            return Err(Error::NotSymmetric(asym));
        }
        let max_diag = (0..n).map(|i| m[(i, i)]).fold(f64::NEG_INFINITY, f64::max);
        let tolerance = PD_TOLERANCE * max_diag.max(0.0);
        let sym = (m.as_nalgebra() + m.as_nalgebra().transpose()) * 0.5;
        let min_eigenvalue = sym.symmetric_eigenvalues().min();
        if !(min_eigenvalue > tolerance) || max_diag <= 0.0 {
            return Err(Error::NotPositiveDefinite { min_eigenvalue, tolerance });
        }
        Ok(SymPDMatrix(m))
    }

    pub fn identity(r: usize) -> Self {
        SymPDMatrix(DenseMatrix::identity(r))
    }

    pub fn diagonal(d: &[f64]) -> Result<Self> {
        SymPDMatrix::new(DenseMatrix::diagonal(d))
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> DenseMatrix {
        self.0
    }

    pub fn is_diagonal(&self) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..n).all(|j| i == j || self.0[(i, j)] == 0.0))
    }

    /// Principal submatrix on an index set (ordering kept).
    pub fn principal(&self, idx: &IndexSeq) -> Result<SymPDMatrix> {
        Ok(SymPDMatrix(self.0.submatrix(idx, idx)?))
    }

    /// `D Σ D` for a positive diagonal `D = diag(d)`.
    pub fn rescale(&self, d: &[f64]) -> Result<SymPDMatrix> {
        if d.len() != self.dim() {
            return Err(Error::Dimension(format!(
                "{} scale factors for a {}-dimensional matrix",
                d.len(),
                self.dim()
            )));
        }
        if d.iter().any(|&x| !(x > 0.0)) {
            return Err(Error::Precondition("scale factors must be positive".into()));
        }
        let n = self.dim();
        Ok(SymPDMatrix(DenseMatrix::from_fn(n, n, |i, j| d[i] * self.0[(i, j)] * d[j])))
    }

    /// The correlation matrix `D^{-1/2} Σ D^{-1/2}`.
    pub fn correlation(&self) -> SymPDMatrix {
        let n = self.dim();
        let s: Vec<f64> = (0..n).map(|i| self.0[(i, i)].sqrt()).collect();
        SymPDMatrix(DenseMatrix::from_fn(n, n, |i, j| {
            if i == j {
                1.0
            } else {
                self.0[(i, j)] / (s[i] * s[j])
            }
        }))
    }

    pub(crate) fn cholesky(&self) -> Result<nalgebra::Cholesky<f64, nalgebra::Dyn>> {
        nalgebra::Cholesky::new(self.0.as_nalgebra().clone())
            .ok_or_else(|| Error::Singular("Cholesky factorization failed".into()))
    }
}

/// The unique symmetric positive definite square root, via a symmetric
/// eigendecomposition. Diagonal inputs take the entrywise square root.
pub fn sym_sqrt(s: &SymPDMatrix) -> Result<SymPDMatrix> {
    let n = s.dim();
    if s.is_diagonal() {
        let d: Vec<f64> = (0..n).map(|i| s.matrix()[(i, i)].sqrt()).collect();
        return Ok(SymPDMatrix(DenseMatrix::diagonal(&d)));
    }
    let sym = (s.matrix().as_nalgebra() + s.matrix().as_nalgebra().transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let max_diag = (0..n).map(|i| s.matrix()[(i, i)]).fold(0.0, f64::max);
    let tol = PD_TOLERANCE * max_diag;
    let min = eig.eigenvalues.min();
    if !(min > tol) {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: min, tolerance: tol });
    }
    let roots = eig.eigenvalues.map(f64::sqrt);
    let v = &eig.eigenvectors;
    let root = v * DMatrix::from_diagonal(&roots) * v.transpose();
    let root = (&root + root.transpose()) * 0.5;
    Ok(SymPDMatrix(DenseMatrix(root)))
}

/// `Σ_{D×D} − Σ_{D×C} Σ_{C×C}^{-1} Σ_{C×D}` with `D = [r] ∖ C` ascending.
pub fn schur_complement(s: &SymPDMatrix, c: &IndexSeq) -> Result<SymPDMatrix> {
    let r = s.dim();
    if c.is_empty() || c.len() >= r {
        return Err(Error::Precondition(format!(
            "conditioning set {{{c}}} must be a nonempty proper subset of [{r}]"
        )));
    }
    if c.max() > r {
        return Err(Error::IndexOutOfRange { index: c.max(), dim: r });
    }
    let c = c.sorted();
    let d = IndexSeq::new((1..=r).filter(|&x| !c.contains(x)).collect(), r)?;
    let m = s.matrix();
    let s_cc = SymPDMatrix(m.submatrix(&c, &c)?);
    let chol = s_cc
        .cholesky()
        .map_err(|_| Error::Singular(format!("Σ restricted to {{{c}}} is singular")))?;
    let s_cd = m.submatrix(&c, &d)?.into_nalgebra();
    let s_dd = m.submatrix(&d, &d)?.into_nalgebra();
    let solved = chol.solve(&s_cd);
    let out = s_dd - s_cd.transpose() * solved;
    let out = (&out + out.transpose()) * 0.5;
    Ok(SymPDMatrix(DenseMatrix(out)))
}

/// The `I×J` block of `(Σ_{IJ×IJ})^{-1}` for disjoint `I`, `J`, where the
/// rows of `Σ_{IJ×IJ}` list `I` first and then `J`.
pub fn partitioned_inverse_block(s: &SymPDMatrix, i: &IndexSeq, j: &IndexSeq) -> Result<DenseMatrix> {
    if !i.intersection(j).is_empty() {
        return Err(Error::Precondition(format!("index sets {{{i}}} and {{{j}}} overlap")));
    }
    let ij = i.concat(j)?;
    let block = SymPDMatrix(s.matrix().submatrix(&ij, &ij)?);
    let chol = block
        .cholesky()
        .map_err(|_| Error::Singular(format!("Σ restricted to {{{ij}}} is singular")))?;
    let inv = chol.inverse();
    let (p, q) = (i.len(), j.len());
    Ok(DenseMatrix::from_fn(p, q, |a, b| inv[(a, p + b)]))
}

/// `tr(M^(k))`: the sum of all principal `k`-minors of a square matrix.
pub fn compound_trace(mat: &DenseMatrix, k: usize) -> Result<f64> {
    if !mat.is_square() {
        return Err(Error::Dimension("trace of a non-square compound".into()));
    }
    let n = mat.rows();
    let data = mat.to_row_major();
    let e = SubsetEnumeration::new(n, k)?;
    Ok(e
        .iter()
        .map(|s| {
            let idx: Vec<usize> = s.iter().map(|x| x - 1).collect();
            minor_det_raw(&data, n, &idx, &idx)
        })
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(v: &[usize], r: usize) -> IndexSeq {
        IndexSeq::new(v.to_vec(), r).unwrap()
    }

    fn sample_matrix() -> DenseMatrix {
        DenseMatrix::from_row_slice(
            4,
            4,
            &[
                2.0, -1.0, 0.5, 3.0, //
                1.0, 4.0, -2.0, 0.25, //
                -0.5, 1.5, 3.0, 1.0, //
                0.75, -2.5, 1.0, 5.0,
            ],
        )
        .unwrap()
    }

    #[test]
    fn identity_minors() {
        let a = DenseMatrix::identity(4);
        assert_eq!(minor_det(&a, &seq(&[1, 3], 4), &seq(&[1, 3], 4)).unwrap(), 1.0);
        assert_eq!(minor_det(&a, &seq(&[1, 2], 4), &seq(&[3, 4], 4)).unwrap(), 0.0);
    }

    #[test]
    fn column_swap_negates_minor() {
        let a = sample_matrix();
        let x = minor_det(&a, &seq(&[1, 2], 4), &seq(&[3, 4], 4)).unwrap();
        let y = minor_det(&a, &seq(&[1, 2], 4), &seq(&[4, 3], 4)).unwrap();
        assert_eq!(x, -y);
        assert_eq!(x, 0.5 * 0.25 - 3.0 * -2.0);
    }

    #[test]
    fn minor_det_errors() {
        let a = sample_matrix();
        assert!(matches!(
            minor_det(&a, &seq(&[1, 2], 4), &seq(&[3], 4)),
            Err(Error::Cardinality(_))
        ));
        let small = DenseMatrix::identity(2);
        assert!(matches!(
            minor_det(&small, &seq(&[1, 3], 4), &seq(&[1, 2], 4)),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn compound_edge_orders() {
        let a = sample_matrix();
        let c0 = compound(&a, 0).unwrap();
        assert_eq!(c0.matrix().rows(), 1);
        assert_eq!(c0.matrix()[(0, 0)], 1.0);
        let c4 = compound(&a, 4).unwrap();
        let det = a.det().unwrap();
        assert!((c4.matrix()[(0, 0)] - det).abs() <= 1e-10 * det.abs());
        assert!(compound(&a, 5).is_err());
        assert!(compound(&DenseMatrix::zeros(2, 3), 1).is_err());
    }

    #[test]
    fn identity_and_diagonal_compounds() {
        let id = compound(&DenseMatrix::identity(5), 3).unwrap();
        assert_eq!(id.matrix(), &DenseMatrix::identity(10));
        let d = [2.0, 3.0, 5.0, 7.0];
        let c = compound(&DenseMatrix::diagonal(&d), 2).unwrap();
        for (p, s) in c.enumeration().iter().enumerate() {
            for q in 0..6 {
                let expect = if p == q { s.iter().map(|&x| d[x - 1]).product() } else { 0.0 };
                assert_eq!(c.matrix()[(p, q)], expect);
            }
        }
    }

    #[test]
    fn compound_entry_matches_minor_det_with_sign() {
        let a = sample_matrix();
        let c = compound(&a, 2).unwrap();
        let i = seq(&[2, 4], 4);
        let j = seq(&[1, 3], 4);
        assert_eq!(c.entry(&i, &j).unwrap(), minor_det(&a, &i, &j).unwrap());
        let j_rev = seq(&[3, 1], 4);
        assert_eq!(c.entry(&i, &j_rev).unwrap(), -minor_det(&a, &i, &j).unwrap());
    }

    #[test]
    fn kronecker_basics() {
        assert_eq!(
            kronecker(&DenseMatrix::identity(2), &DenseMatrix::identity(3)),
            DenseMatrix::identity(6)
        );
        let a = DenseMatrix::from_row_slice(1, 1, &[3.0]).unwrap();
        let b = DenseMatrix::from_row_slice(1, 1, &[-2.5]).unwrap();
        assert_eq!(kronecker(&a, &b)[(0, 0)], -7.5);
        let a = DenseMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        let b = DenseMatrix::from_row_slice(2, 2, &[0.0, 5.0, 6.0, 7.0]).unwrap();
        let k = kronecker(&a, &b);
        assert_eq!(k[(0, 1)], 5.0);
        assert_eq!(k[(3, 2)], 4.0 * 6.0);
        assert_eq!(k[(2, 1)], 3.0 * 5.0);
    }

    #[test]
    fn sym_sqrt_examples() {
        let id = SymPDMatrix::identity(3);
        assert_eq!(sym_sqrt(&id).unwrap().matrix(), &DenseMatrix::identity(3));
        let d = SymPDMatrix::diagonal(&[4.0, 9.0]).unwrap();
        assert_eq!(sym_sqrt(&d).unwrap().matrix(), &DenseMatrix::diagonal(&[2.0, 3.0]));
        let s = SymPDMatrix::new(
            DenseMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.5, 1.0, 3.0, -0.2, 0.5, -0.2, 2.0])
                .unwrap(),
        )
        .unwrap();
        let r = sym_sqrt(&s).unwrap();
        let rr = r.matrix().matmul(r.matrix()).unwrap();
        assert!(rr.max_abs_diff(s.matrix()) <= 1e-10 * s.matrix().max_abs());
    }

    #[test]
    fn spd_validation() {
        let asym = DenseMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.4, 1.0]).unwrap();
        assert!(matches!(SymPDMatrix::new(asym), Err(Error::NotSymmetric(_))));
        let indefinite = DenseMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]).unwrap();
        assert!(matches!(
            SymPDMatrix::new(indefinite),
            Err(Error::NotPositiveDefinite { .. })
        ));
        let singular = DenseMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]).unwrap();
        assert!(SymPDMatrix::new(singular).is_err());
        assert!(DenseMatrix::from_row_slice(1, 1, &[f64::NAN]).is_err());
    }

    #[test]
    fn schur_complement_examples() {
        let id = SymPDMatrix::identity(5);
        let out = schur_complement(&id, &seq(&[2, 4], 5)).unwrap();
        assert_eq!(out.matrix(), &DenseMatrix::identity(3));

        // block diagonal: conditioning inside the first block leaves the second
        let m = DenseMatrix::from_row_slice(
            4,
            4,
            &[2.0, 0.5, 0.0, 0.0, 0.5, 1.0, 0.0, 0.0, 0.0, 0.0, 3.0, 1.0, 0.0, 0.0, 1.0, 2.0],
        )
        .unwrap();
        let s = SymPDMatrix::new(m).unwrap();
        let out = schur_complement(&s, &seq(&[1], 4)).unwrap();
        assert_eq!(out.matrix()[(1, 1)], 3.0);
        assert_eq!(out.matrix()[(1, 2)], 1.0);
        assert_eq!(out.matrix()[(2, 2)], 2.0);
        assert!((out.matrix()[(0, 0)] - (1.0 - 0.25 / 2.0)).abs() < 1e-15);

        assert!(schur_complement(&s, &IndexSeq::empty(4)).is_err());
        assert!(schur_complement(&s, &seq(&[1, 2, 3, 4], 4)).is_err());
    }

    #[test]
    fn partitioned_inverse_examples() {
        let id = SymPDMatrix::identity(4);
        let b = partitioned_inverse_block(&id, &seq(&[1, 2], 4), &seq(&[3, 4], 4)).unwrap();
        assert_eq!(b.max_abs(), 0.0);

        let s = SymPDMatrix::new(DenseMatrix::from_row_slice(2, 2, &[2.0, 0.6, 0.6, 1.5]).unwrap())
            .unwrap();
        let b = partitioned_inverse_block(&s, &seq(&[1], 2), &seq(&[2], 2)).unwrap();
        let det = 2.0 * 1.5 - 0.36;
        assert!((b[(0, 0)] + 0.6 / det).abs() < 1e-15);

        assert!(partitioned_inverse_block(&id, &seq(&[1, 2], 4), &seq(&[2, 3], 4)).is_err());
    }

    #[test]
    fn compound_trace_is_elementary_symmetric_on_diagonal() {
        let d = DenseMatrix::diagonal(&[1.0, 2.0, 3.0]);
        assert_eq!(compound_trace(&d, 0).unwrap(), 1.0);
        assert_eq!(compound_trace(&d, 1).unwrap(), 6.0);
        assert_eq!(compound_trace(&d, 2).unwrap(), 2.0 + 3.0 + 6.0);
        assert_eq!(compound_trace(&d, 3).unwrap(), 6.0);
    }

    #[test]
    fn csv_round_trip_with_header() {
        let text = "a,b\n1,2.5\n-3,4e-1\n";
        let m = DenseMatrix::from_csv_reader(text.as_bytes()).unwrap();
        assert_eq!(m.to_row_major(), vec![1.0, 2.5, -3.0, 0.4]);
        let back = DenseMatrix::from_csv_reader(m.to_csv_string(None).as_bytes()).unwrap();
        assert_eq!(back, m);
        assert!(DenseMatrix::from_csv_reader("1,2\n3,x\n".as_bytes()).is_err());
        assert!(DenseMatrix::from_csv_reader("1,2\n3\n".as_bytes()).is_err());
    }
}
