// Reproducible Wishart draws through the Bartlett factor.

use minor_moments::wishart::{sample_bartlett, sample_general, WishartSampler, WishartSpec};
use minor_moments::{DenseMatrix, RngStream, SymPDMatrix};

type BoxError = Box<dyn std::error::Error>;

pub fn run_example() -> Result<(), BoxError> {
    let stream = RngStream::with_stream(42, 3);
    let t = sample_bartlett(6, 3, &mut stream.generator())?;
    println!("Bartlett factor T:\n{}", t.matrix());
    println!("W = T Tᵀ:\n{}", t.gram());

    let sigma = SymPDMatrix::new(DenseMatrix::from_row_slice(2, 2, &[2.0, 0.6, 0.6, 1.0])?)?;
    let spec = WishartSpec::new(8, sigma.clone())?;
    let a = sample_general(&spec, &mut stream.generator())?;
    let b = sample_general(&spec, &mut stream.generator())?;
    assert_eq!(a, b);

    // Average of many draws approaches n Σ.
    let reps = 20_000;
    let mut sampler = WishartSampler::new(&spec)?;
    let mut g = RngStream::new(1).generator();
    let mut buf = [0.0; 4];
    let mut sum = [0.0; 4];
    for _ in 0..reps {
        sampler.sample_into(&mut g, &mut buf);
        for (s, x) in sum.iter_mut().zip(buf) {
            *s += x / reps as f64;
        }
    }
    println!("mean of {reps} draws: {sum:?}; n Σ = {:?}", sigma.matrix().scale(8.0).to_row_major());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
