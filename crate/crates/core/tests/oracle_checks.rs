use std::process::Command;

use minor_moments::oracle::{
    combine_chunks, mc_minor_chunks, mc_minor_moments, mc_minor_moments_with_plan, mc_noncentral_det, ChunkPlan,
    MomentQuery, THREADS_ENV,
};
use minor_moments::standard::MinorPair;
use minor_moments::wishart::WishartSpec;
use minor_moments::{DenseMatrix, IndexSeq, RngStream};

fn pair(i: &[usize], j: &[usize]) -> MinorPair {
    MinorPair::new(IndexSeq::new(i.to_vec(), 4).unwrap(), IndexSeq::new(j.to_vec(), 4).unwrap()).unwrap()
}

fn within(est: f64, se: f64, exact: f64) -> bool {
    (est - exact).abs() <= 4.0 * se
}

#[test]
fn principal_mean_and_signed_product() {
    let spec = WishartSpec::standard(10, 4).unwrap();
    let queries = [
        MomentQuery::Mean(pair(&[1, 2], &[1, 2])),
        MomentQuery::Product(pair(&[1, 2], &[1, 4]), pair(&[2, 3], &[3, 4])),
        MomentQuery::Variance(pair(&[1, 2], &[3, 4])),
    ];
    let est = mc_minor_moments(&spec, &queries, 1_000_000, RngStream::new(7)).unwrap();
    assert!(within(est[0].estimate, est[0].std_error, 90.0), "{:?}", est[0]);
    assert!(within(est[1].estimate, est[1].std_error, -810.0), "{:?}", est[1]);
    assert!(within(est[2].estimate, est[2].std_error, 180.0), "{:?}", est[2]);
}

#[test]
fn chunk_ranges_concatenate() {
    let spec = WishartSpec::standard(6, 4).unwrap();
    let queries = [MomentQuery::Mean(pair(&[1, 3], &[2, 4])), MomentQuery::Variance(pair(&[1], &[1]))];
    let rng = RngStream::with_stream(3, 9);
    let plan = ChunkPlan { chunk_size: 1000 };
    let reps = 20_500;
    let whole = mc_minor_moments_with_plan(&spec, &queries, reps, rng, plan).unwrap();
    let n = plan.chunk_count(reps);
    let mut chunks = mc_minor_chunks(&spec, &queries, reps, rng, plan, 0..n / 2).unwrap();
    chunks.extend(mc_minor_chunks(&spec, &queries, reps, rng, plan, n / 2..n).unwrap());
    let split = combine_chunks(&queries, &chunks, rng).unwrap();
    assert_eq!(whole, split);
    assert_eq!(whole[0].reps, reps);
}

#[test]
fn std_error_halves_with_four_times_reps() {
    let spec = WishartSpec::standard(10, 4).unwrap();
    let q = [MomentQuery::Mean(pair(&[1, 2], &[1, 2]))];
    let small = mc_minor_moments(&spec, &q, 100_000, RngStream::new(1)).unwrap();
    let large = mc_minor_moments(&spec, &q, 400_000, RngStream::new(2)).unwrap();
    let ratio = small[0].std_error / large[0].std_error;
    assert!((ratio - 2.0).abs() <= 0.4, "ratio {ratio}");
}

#[test]
fn noncentral_determinant_examples() {
    let (mean, second) = mc_noncentral_det(&DenseMatrix::zeros(2, 2), 1_000_000, RngStream::new(4)).unwrap();
    assert!(within(mean.estimate, mean.std_error, 0.0));
    assert!(within(second.estimate, second.std_error, 2.0), "{second:?}");
    let (mean, second) = mc_noncentral_det(&DenseMatrix::identity(2), 1_000_000, RngStream::new(5)).unwrap();
    assert!(within(mean.estimate, mean.std_error, 1.0));
    assert!(within(second.estimate, second.std_error, 5.0), "{second:?}");
}

#[test]
fn output_independent_of_thread_count() {
    let run = |threads: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_minor-moments"))
            .env(THREADS_ENV, threads)
            .args([
                "oracle", "--identity", "4", "--df", "8", "--pairs", "1,2|3,4;1,2|1,2|3,4|3,4", "--reps", "50000",
                "--seed", "21",
            ])
            .output()
            .unwrap();
        assert!(out.status.success());
        String::from_utf8(out.stdout).unwrap()
    };
    let one = run("1");
    assert_eq!(one, run("4"));
    assert_eq!(one, run("3"));
}
