// Compound matrices, the Binet–Cauchy identity, Kronecker products and
// Schur complements.

use minor_moments::matrix::{compound, kronecker, schur_complement, sym_sqrt};
use minor_moments::{DenseMatrix, IndexSeq, RngStream, SymPDMatrix};

type BoxError = Box<dyn std::error::Error>;

pub fn run_example() -> Result<(), BoxError> {
    let mut g = RngStream::new(7).generator();
    let a = DenseMatrix::from_fn(4, 4, |_, _| g.normal());
    let b = DenseMatrix::from_fn(4, 4, |_, _| g.normal());

    let ab2 = compound(&a.matmul(&b)?, 2)?;
    let a2b2 = compound(&a, 2)?.matrix().matmul(compound(&b, 2)?.matrix())?;
    let err = ab2.matrix().max_abs_diff(&a2b2) / ab2.matrix().max_abs();
    println!("(AB)^(2) vs A^(2) B^(2): relative error {err:e}");
    if err > 1e-12 {
        return Err(format!("Binet–Cauchy mismatch {err:e}").into());
    }
    println!("labels of A^(2): {:?}", ab2.labels());

    let top = compound(&a, 4)?.matrix()[(0, 0)];
    println!("A^(4) = det A: {top} vs {}", a.det()?);

    let k = kronecker(&DenseMatrix::identity(2), &DenseMatrix::diagonal(&[1.0, 2.0]));
    println!("I_2 ⊗ diag(1, 2):\n{k}");

    let x = DenseMatrix::from_fn(4, 6, |_, _| g.normal());
    let sigma = SymPDMatrix::new(x.matmul(&x.transpose())?)?;
    let root = sym_sqrt(&sigma)?;
    let back = root.matrix().matmul(root.matrix())?;
    println!("‖Σ^(1/2) Σ^(1/2) − Σ‖ = {:e}", back.max_abs_diff(sigma.matrix()));

    let c = IndexSeq::new(vec![1, 3], 4)?;
    let bar = schur_complement(&sigma, &c)?;
    println!("Schur complement of Σ on {{2, 4}} given {{{c}}}:\n{}", bar.matrix());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
