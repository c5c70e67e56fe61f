// Checking closed forms against the seeded Monte Carlo oracle.

use minor_moments::oracle::{mc_minor_moments, MomentQuery};
use minor_moments::standard::{cross_moment_std, e_minor_std, var_minor_std, MinorPair};
use minor_moments::wishart::WishartSpec;
use minor_moments::{IndexSeq, RngStream};

type BoxError = Box<dyn std::error::Error>;

pub fn run_example() -> Result<(), BoxError> {
    let (n, r, reps) = (10, 4, 100_000);
    let s = |v: &[usize]| IndexSeq::new(v.to_vec(), r);
    let pair = |i: &[usize], j: &[usize]| MinorPair::new(s(i)?, s(j)?);

    let queries = vec![
        MomentQuery::Mean(pair(&[1, 2], &[1, 2])?),
        MomentQuery::Product(pair(&[1, 2], &[1, 4])?, pair(&[2, 3], &[3, 4])?),
        MomentQuery::Variance(pair(&[1, 2], &[3, 4])?),
    ];
    let exact = [
        e_minor_std(n, &s(&[1, 2])?, &s(&[1, 2])?)?,
        cross_moment_std(n, &s(&[1, 2])?, &s(&[1, 4])?, &s(&[2, 3])?, &s(&[3, 4])?)?,
        var_minor_std(n, 2, 0)?,
    ];
    let spec = WishartSpec::standard(n, r)?;
    let estimates = mc_minor_moments(&spec, &queries, reps, RngStream::new(1))?;
    for (est, exact) in estimates.iter().zip(exact) {
        let z = (est.estimate - exact) / est.std_error;
        println!(
            "{:<22} exact {exact:>10.3}  estimate {:>10.3} ± {:.3}  (z = {z:+.2})",
            est.query, est.estimate, est.std_error
        );
        if z.abs() > 5.0 {
            return Err(format!("{} is {z:.1} standard errors off", est.query).into());
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
