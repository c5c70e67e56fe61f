// Variances of minors of S ~ W_5(12, Σ) for a random Σ by two independent
// routes: the compound sandwich and the conditional closed forms.

use minor_moments::general::{
    cov_compound_general, tetrad_variance, var_minor_breakdown, var_offdiag_minor,
};
use minor_moments::{DenseMatrix, IndexSeq, RngStream, SubsetEnumeration, SymPDMatrix};

type BoxError = Box<dyn std::error::Error>;

pub fn run_example() -> Result<(), BoxError> {
    let (n, r, m) = (12, 5, 2);
    let mut g = RngStream::new(2024).generator();
    let x = DenseMatrix::from_fn(r, r + 3, |_, _| g.normal());
    let sigma = SymPDMatrix::new(x.matmul(&x.transpose())?)?;
    let s = |v: &[usize]| IndexSeq::new(v.to_vec(), r);

    for (i, j) in [(s(&[1, 2])?, s(&[3, 4])?), (s(&[1, 2])?, s(&[1, 5])?), (s(&[2, 4])?, s(&[4, 2])?)] {
        let v = var_minor_breakdown(n, &sigma, &i, &j)?;
        println!(
            "Var det S_{{{i}}}x{{{j}}} = {:.6} (mean part {:.6}, var part {:.6}, {:?})",
            v.breakdown.total, v.breakdown.conditional_mean_part, v.breakdown.conditional_var_part, v.formula
        );
    }

    let (i, j) = (s(&[1, 3])?, s(&[2, 5])?);
    let tetrad = tetrad_variance(n, &sigma, &i, &j)?;
    let offdiag = var_offdiag_minor(n, &sigma, &i, &j)?.total;
    println!("tetrad variance {tetrad:.6} vs off-diagonal formula {offdiag:.6}");

    let cov = cov_compound_general(n, &sigma, m)?;
    let e = SubsetEnumeration::new(r, m)?;
    let size = e.len();
    let mut worst: f64 = 0.0;
    for (a, ia) in e.seqs().iter().enumerate() {
        for (b, jb) in e.seqs().iter().enumerate() {
            let p = a * size + b;
            let direct = var_minor_breakdown(n, &sigma, ia, jb)?.breakdown.total;
            worst = worst.max((cov[(p, p)] - direct).abs() / direct);
        }
    }
    println!("max relative gap between the two routes over {} minors: {worst:e}", size * size);
    if worst > 1e-8 {
        return Err(format!("routes disagree by {worst:e}").into());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
