// Closed-form moments of minors of a standard Wishart matrix W ~ W_4(10, I).

use minor_moments::standard::{
    cov_compound_std, cross_moment_std, e_minor_std, falling_product, var_minor_std,
};
use minor_moments::IndexSeq;

type BoxError = Box<dyn std::error::Error>;

pub fn run_example() -> Result<(), BoxError> {
    let (n, r) = (10, 4);
    let s = |v: &[usize]| IndexSeq::new(v.to_vec(), r);

    // E[det W_IJ] is n!/(n-m)! on the diagonal and zero elsewhere.
    let principal = e_minor_std(n, &s(&[1, 2])?, &s(&[1, 2])?)?;
    let swapped = e_minor_std(n, &s(&[2, 1])?, &s(&[1, 2])?)?;
    let off = e_minor_std(n, &s(&[1, 2])?, &s(&[3, 4])?)?;
    println!("E[det W_12x12] = {principal}, E[det W_21x12] = {swapped}, E[det W_12x34] = {off}");
    assert_eq!(principal, falling_product(n, 2)?);
    assert_eq!(swapped, -principal);

    println!("variances of 2x2 minors by overlap c = |I ∩ J|:");
    for c in 0..=2 {
        println!("  c = {c}: {}", var_minor_std(n, 2, c)?);
    }

    let cross = cross_moment_std(n, &s(&[1, 2])?, &s(&[1, 4])?, &s(&[2, 3])?, &s(&[3, 4])?)?;
    println!("E[det W_12x14 det W_23x34] = {cross}");

    let cov = cov_compound_std(n, r, 2)?;
    println!("Cov[W^(2)] has {} nonzero blocks:", cov.blocks().len());
    for block in cov.blocks() {
        println!(
            "  I △ J = {{{}}}: {} pairs",
            block.sym_diff,
            block.pairs.len()
        );
    }
    let (labels, table) = cov.unordered_table();
    println!("unordered table is {}x{}; first row label {}", table.rows(), table.cols(), labels[0]);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
