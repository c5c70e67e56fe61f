// Minor constraints from conditional independence, and random members of
// the hidden-variable family C_m.

use minor_moments::constraints::{
    ci_to_minors, offdiag_minor_implied, sample_cm_cov, CIStatement, CmSpread,
};
use minor_moments::{IndexSeq, RngStream};

type BoxError = Box<dyn std::error::Error>;

pub fn run_example() -> Result<(), BoxError> {
    let r = 5;
    let s = |v: &[usize]| IndexSeq::new(v.to_vec(), r);
    let stmt = CIStatement::new(s(&[1, 2])?, s(&[3, 4])?, s(&[5])?)?;
    let minors = ci_to_minors(&stmt, r)?;
    println!("X_12 ⊥ X_34 | X_5 gives {} vanishing 2x2 minors:", minors.len());
    for (g, h) in &minors {
        println!("  det Σ_{{{g}}}x{{{h}}} = 0");
    }

    let empty = IndexSeq::empty(r);
    let implied = offdiag_minor_implied(&s(&[1, 2])?, &empty, &s(&[3, 4])?, &empty, &s(&[5])?, &empty, r)?;
    println!("X_12 ⊥ X_34 | X_5 forces det Σ_12x34 = 0: {implied}");

    for m in [2, 3] {
        let h = sample_cm_cov(m, &mut RngStream::new(m as u64).generator(), CmSpread::default())?;
        println!(
            "C_{m} draw: det Σ_{{{}}}x{{{}}} = {:e} (Hadamard bound {:.3})",
            h.rows(),
            h.cols(),
            h.vanishing_minor(),
            h.row_norm_product()
        );
        if h.vanishing_minor().abs() > 1e-9 * h.row_norm_product() {
            return Err("constraint violated".into());
        }
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
