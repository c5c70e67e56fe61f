// Moments of det X for a square Gaussian matrix with mean A and unit
// variances.

use minor_moments::general::noncentral_det_moments;
use minor_moments::oracle::mc_noncentral_det;
use minor_moments::{DenseMatrix, RngStream};

type BoxError = Box<dyn std::error::Error>;

pub fn run_example() -> Result<(), BoxError> {
    let means = [
        DenseMatrix::zeros(2, 2),
        DenseMatrix::identity(2),
        DenseMatrix::from_row_slice(3, 3, &[1.0, 0.5, 0.0, -0.3, 2.0, 0.4, 0.2, 0.1, 1.5])?,
    ];
    for (idx, a) in means.iter().enumerate() {
        let exact = noncentral_det_moments(a)?;
        let (mean, second) = mc_noncentral_det(a, 50_000, RngStream::with_stream(3, idx as u64))?;
        println!(
            "{}x{} mean: E[det X] = {:.4} (MC {:.4} ± {:.4}), E[det X²] = {:.4} (MC {:.4} ± {:.4}), Var = {:.4}",
            a.rows(),
            a.cols(),
            exact.mean,
            mean.estimate,
            mean.std_error,
            exact.second_moment,
            second.estimate,
            second.std_error,
            exact.variance
        );
        for (e, x) in [(&mean, exact.mean), (&second, exact.second_moment)] {
            if (e.estimate - x).abs() > 5.0 * e.std_error {
                return Err(format!("{} off by more than 5 SE", e.query).into());
            }
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
