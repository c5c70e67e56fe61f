//! Seeded Monte Carlo estimates of moments of minors.
//!
//! Replications are split into chunks of [`ChunkPlan::chunk_size`] (default
//! 10 000). Chunk `k` draws from `rng.child(k)`, so its output depends only on
//! the base stream and `k`. Chunk summaries are merged left to right in chunk
//! order, so the estimate depends only on `(seed, stream, reps, chunk plan)`
//! and not on the number of threads. Concatenating the summaries of two
//! disjoint chunk ranges gives bit-identical results to running the union.
//!
//! The thread count can be capped with `MINOR_MOMENTS_THREADS`.

use std::ops::Range;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::index::IndexSeq;
use crate::matrix::{lu_det, minor_det_raw, DenseMatrix};
use crate::rng::{Generator, RngStream};
use crate::standard::MinorPair;
use crate::wishart::{WishartSampler, WishartSpec};

pub const DEFAULT_CHUNK_SIZE: usize = 10_000;
pub const MIN_REPS: usize = 100;
pub const THREADS_ENV: &str = "MINOR_MOMENTS_THREADS";

/// A quantity to estimate from draws of `S`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MomentQuery {
    /// `E[det(S_{I×J})]`.
    Mean(MinorPair),
    /// `E[det(S_{I×J}) det(S_{K×L})]`.
    Product(MinorPair, MinorPair),
    /// `Var[det(S_{I×J})]`, plug-in with a delta-method standard error.
    Variance(MinorPair),
}

impl MomentQuery {
    pub fn label(&self) -> String {
        match self {
            MomentQuery::Mean(p) => p.label(),
            MomentQuery::Product(p, q) => format!("{}|{}", p.label(), q.label()),
            MomentQuery::Variance(p) => format!("var:{}", p.label()),
        }
    }

    /// `"I|J"` is a mean, `"I|J|K|L"` a product; `variance` turns a
    /// two-part query into a variance.
    pub fn parse(s: &str, r: usize, variance: bool) -> Result<Self> {
        let parts: Vec<&str> = s.split('|').collect();
        let seqs = parts
            .iter()
            .map(|p| IndexSeq::parse(p, r))
            .collect::<Result<Vec<_>>>()?;
        match (seqs.len(), variance) {
            (2, false) => Ok(MomentQuery::Mean(MinorPair::new(seqs[0].clone(), seqs[1].clone())?)),
            (2, true) => Ok(MomentQuery::Variance(MinorPair::new(seqs[0].clone(), seqs[1].clone())?)),
            (4, false) => Ok(MomentQuery::Product(
                MinorPair::new(seqs[0].clone(), seqs[1].clone())?,
                MinorPair::new(seqs[2].clone(), seqs[3].clone())?,
            )),
            (4, true) => Err(Error::Parse(format!("variance query {s:?} must have the form I|J"))),
            _ => Err(Error::Parse(format!("query {s:?} must have the form I|J or I|J|K|L"))),
        }
    }

    fn minors(&self) -> Vec<&MinorPair> {
        match self {
            MomentQuery::Mean(p) | MomentQuery::Variance(p) => vec![p],
            MomentQuery::Product(p, q) => vec![p, q],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleEstimate {
    pub query: String,
    pub estimate: f64,
    pub std_error: f64,
    pub reps: usize,
    pub seed: u64,
    pub stream: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChunkPlan {
    pub chunk_size: usize,
}

impl Default for ChunkPlan {
    fn default() -> Self {
        ChunkPlan { chunk_size: DEFAULT_CHUNK_SIZE }
    }
}

impl ChunkPlan {
    pub fn chunk_count(&self, reps: usize) -> usize {
        reps.div_ceil(self.chunk_size)
    }

    fn chunk_len(&self, reps: usize, index: usize) -> usize {
        self.chunk_size.min(reps - index * self.chunk_size)
    }
}

/// Count, mean and central moment sums `M_k = Σ (x - mean)^k`, `k = 2..4`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CentralMoments {
    pub count: f64,
    pub mean: f64,
    pub m2: f64,
    pub m3: f64,
    pub m4: f64,
}

impl CentralMoments {
    fn from_shifted_sums(count: f64, shift: f64, s: [f64; 4]) -> Self {
        let d = s[0] / count;
        CentralMoments {
            count,
            mean: shift + d,
            m2: s[1] - count * d * d,
            m3: s[2] - 3.0 * d * s[1] + 2.0 * count * d * d * d,
            m4: s[3] - 4.0 * d * s[2] + 6.0 * d * d * s[1] - 3.0 * count * d.powi(4),
        }
    }

    /// Pairwise update of Pébay.
    pub fn merge(&self, other: &CentralMoments) -> CentralMoments {
        if self.count == 0.0 {
            return *other;
        }
        if other.count == 0.0 {
            return *self;
        }
        let (na, nb) = (self.count, other.count);
        let n = na + nb;
        let delta = other.mean - self.mean;
        let d2 = delta * delta;
        CentralMoments {
            count: n,
            mean: self.mean + delta * nb / n,
            m2: self.m2 + other.m2 + d2 * na * nb / n,
            m3: self.m3
                + other.m3
                + d2 * delta * na * nb * (na - nb) / (n * n)
                + 3.0 * delta * (na * other.m2 - nb * self.m2) / n,
            m4: self.m4
                + other.m4
                + d2 * d2 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n)
                + 6.0 * d2 * (na * na * other.m2 + nb * nb * self.m2) / (n * n)
                + 4.0 * delta * (na * other.m3 - nb * self.m3) / n,
        }
    }

    pub fn sample_variance(&self) -> f64 {
        self.m2 / (self.count - 1.0)
    }

    /// `sd / sqrt(count)`.
    pub fn mean_std_error(&self) -> f64 {
        (self.sample_variance() / self.count).sqrt()
    }

    /// Delta-method standard error of [`sample_variance`](Self::sample_variance):
    /// `sqrt((μ₄ − σ⁴) / count)`.
    pub fn variance_std_error(&self) -> f64 {
        let mu2 = self.m2 / self.count;
        let mu4 = self.m4 / self.count;
        ((mu4 - mu2 * mu2).max(0.0) / self.count).sqrt()
    }
}

/// Per-chunk summaries, one [`CentralMoments`] per tracked value.
#[derive(Debug, Clone, PartialEq)]
pub struct ChunkSummary {
    pub index: usize,
    pub moments: Vec<CentralMoments>,
}

fn with_pool<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    let threads = std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok());
    match threads {
        Some(k) if k > 0 => match rayon::ThreadPoolBuilder::new().num_threads(k).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        },
        _ => f(),
    }
}

fn check_range(reps: usize, plan: ChunkPlan, range: &Range<usize>) -> Result<()> {
    if plan.chunk_size == 0 {
        return Err(Error::Precondition("chunk size must be positive".into()));
    }
    if reps < MIN_REPS {
        return Err(Error::Precondition(format!("reps must be at least {MIN_REPS}, got {reps}")));
    }
    let count = plan.chunk_count(reps);
    if range.start > range.end || range.end > count {
        return Err(Error::Precondition(format!(
            "chunk range {}..{} outside 0..{count}",
            range.start, range.end
        )));
    }
    Ok(())
}

/// Runs chunks in `range`; `make` builds a per-chunk sampler that writes
/// `width` values per replication.
fn run_chunks<F, S>(
    reps: usize,
    rng: RngStream,
    plan: ChunkPlan,
    range: Range<usize>,
    width: usize,
    make: F,
) -> Vec<ChunkSummary>
where
    F: Fn() -> S + Sync,
    S: FnMut(&mut Generator, &mut [f64]),
{
    with_pool(|| {
        range
            .into_par_iter()
            .map(|index| {
                let mut sample = make();
                let mut g = rng.child(index as u64).generator();
                let len = plan.chunk_len(reps, index);
                let mut values = vec![0.0; width];
                let mut shift = vec![0.0; width];
                let mut sums = vec![[0.0f64; 4]; width];
                for rep in 0..len {
                    sample(&mut g, &mut values);
                    if rep == 0 {
                        shift.copy_from_slice(&values);
                    }
                    for ((s, &x), &c) in sums.iter_mut().zip(&values).zip(&shift) {
                        let d = x - c;
                        let d2 = d * d;
                        s[0] += d;
                        s[1] += d2;
                        s[2] += d2 * d;
                        s[3] += d2 * d2;
                    }
                }
                let moments = sums
                    .iter()
                    .zip(&shift)
                    .map(|(s, &c)| CentralMoments::from_shifted_sums(len as f64, c, *s))
                    .collect();
                ChunkSummary { index, moments }
            })
            .collect()
    })
}

fn fold_chunks(chunks: &[ChunkSummary], width: usize) -> Result<Vec<CentralMoments>> {
    if chunks.is_empty() {
        return Err(Error::Precondition("no chunks to combine".into()));
    }
    let mut acc = vec![CentralMoments::default(); width];
    for c in chunks {
        if c.moments.len() != width {
            return Err(Error::Dimension(format!(
                "chunk {} tracks {} values, expected {width}",
                c.index,
                c.moments.len()
            )));
        }
        for (a, m) in acc.iter_mut().zip(&c.moments) {
            *a = a.merge(m);
        }
    }
    Ok(acc)
}

/// Distinct minors and, per query, the position of its value(s).
struct MinorLayout {
    minors: Vec<(Vec<usize>, Vec<usize>)>,
    queries: Vec<Vec<usize>>,
}

impl MinorLayout {
    fn new(queries: &[MomentQuery]) -> Self {
        let mut minors: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
        let queries = queries
            .iter()
            .map(|q| {
                q.minors()
                    .into_iter()
                    .map(|p| {
                        let key = (p.i.zero_based(), p.j.zero_based());
                        match minors.iter().position(|k| *k == key) {
                            Some(pos) => pos,
                            None => {
                                minors.push(key);
                                minors.len() - 1
                            }
                        }
                    })
                    .collect()
            })
            .collect();
        MinorLayout { minors, queries }
    }
}

fn check_queries(spec: &WishartSpec, queries: &[MomentQuery]) -> Result<()> {
    if queries.is_empty() {
        return Err(Error::Precondition("no queries given".into()));
    }
    let r = spec.r();
    for q in queries {
        for p in q.minors() {
            for s in [&p.i, &p.j] {
                if s.max() > r {
                    return Err(Error::IndexOutOfRange { index: s.max(), dim: r });
                }
            }
        }
    }
    if spec.n() < r {
        return Err(Error::Precondition(format!(
            "simulation needs n >= r (got n = {}, r = {r})",
            spec.n()
        )));
    }
    Ok(())
}

/// Chunk summaries for the chunks in `range` of the plan.
pub fn mc_minor_chunks(
    spec: &WishartSpec,
    queries: &[MomentQuery],
    reps: usize,
    rng: RngStream,
    plan: ChunkPlan,
    range: Range<usize>,
) -> Result<Vec<ChunkSummary>> {
    check_queries(spec, queries)?;
    check_range(reps, plan, &range)?;
    let layout = MinorLayout::new(queries);
    WishartSampler::new(spec)?;
    let r = spec.r();
    let chunks = run_chunks(reps, rng, plan, range, queries.len(), || {
        let mut sampler = WishartSampler::new(spec).expect("validated spec");
        let mut s = vec![0.0; r * r];
        let mut dets = vec![0.0; layout.minors.len()];
        let layout = &layout;
        move |g: &mut Generator, out: &mut [f64]| {
            sampler.sample_into(g, &mut s);
            for (d, (rows, cols)) in dets.iter_mut().zip(&layout.minors) {
                *d = minor_det_raw(&s, r, rows, cols);
            }
            for (o, pos) in out.iter_mut().zip(&layout.queries) {
                *o = pos.iter().map(|&p| dets[p]).product();
            }
        }
    });
    Ok(chunks)
}

/// Merges chunk summaries (in the order given) into estimates.
pub fn combine_chunks(
    queries: &[MomentQuery],
    chunks: &[ChunkSummary],
    rng: RngStream,
) -> Result<Vec<OracleEstimate>> {
    let acc = fold_chunks(chunks, queries.len())?;
    Ok(queries
        .iter()
        .zip(acc)
        .map(|(q, m)| {
            let (estimate, std_error) = match q {
                MomentQuery::Variance(_) => (m.sample_variance(), m.variance_std_error()),
                _ => (m.mean, m.mean_std_error()),
            };
            OracleEstimate {
                query: q.label(),
                estimate,
                std_error,
                reps: m.count as usize,
                seed: rng.seed,
                stream: rng.stream,
            }
        })
        .collect())
}

pub fn mc_minor_moments_with_plan(
    spec: &WishartSpec,
    queries: &[MomentQuery],
    reps: usize,
    rng: RngStream,
    plan: ChunkPlan,
) -> Result<Vec<OracleEstimate>> {
    let range = 0..plan.chunk_count(reps.max(1));
    let chunks = mc_minor_chunks(spec, queries, reps, rng, plan, range)?;
    combine_chunks(queries, &chunks, rng)
}

/// Estimates every query from `reps` draws of `S ~ W_r(n, Σ)` with the
/// default chunk plan. All queries share the same draws.
pub fn mc_minor_moments(
    spec: &WishartSpec,
    queries: &[MomentQuery],
    reps: usize,
    rng: RngStream,
) -> Result<Vec<OracleEstimate>> {
    mc_minor_moments_with_plan(spec, queries, reps, rng, ChunkPlan::default())
}

/// Estimates `E[det X]` and `E[det(X)²]` for `X` with independent
/// `N(a_ij, 1)` entries.
pub fn mc_noncentral_det(
    a: &DenseMatrix,
    reps: usize,
    rng: RngStream,
) -> Result<(OracleEstimate, OracleEstimate)> {
    if !a.is_square() {
        return Err(Error::Dimension(format!(
            "noncentral determinant needs a square mean, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let plan = ChunkPlan::default();
    let range = 0..plan.chunk_count(reps.max(1));
    check_range(reps, plan, &range)?;
    let m = a.rows();
    let mean = a.to_row_major();
    let chunks = run_chunks(reps, rng, plan, range, 2, || {
        let mut buf = vec![0.0; m * m];
        let mean = &mean;
        move |g: &mut Generator, out: &mut [f64]| {
            for (b, &mu) in buf.iter_mut().zip(mean) {
                *b = mu + g.normal();
            }
            let d = lu_det(&mut buf, m);
            out[0] = d;
            out[1] = d * d;
        }
    });
    let acc = fold_chunks(&chunks, 2)?;
    let make = |query: &str, m: &CentralMoments| OracleEstimate {
        query: query.to_string(),
        estimate: m.mean,
        std_error: m.mean_std_error(),
        reps: m.count as usize,
        seed: rng.seed,
        stream: rng.stream,
    };
    Ok((make("mean", &acc[0]), make("second_moment", &acc[1])))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(i: &[usize], j: &[usize], r: usize) -> MinorPair {
        MinorPair::new(IndexSeq::new(i.to_vec(), r).unwrap(), IndexSeq::new(j.to_vec(), r).unwrap()).unwrap()
    }

    fn serial_moments(xs: &[f64]) -> (f64, f64, f64) {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let m2: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum();
        let m4: f64 = xs.iter().map(|x| (x - mean).powi(4)).sum();
        (mean, m2, m4)
    }

    #[test]
    fn merge_matches_two_pass() {
        let mut g = RngStream::new(1).generator();
        let xs: Vec<f64> = (0..3000).map(|_| 5.0 + g.gamma(2.0)).collect();
        let mut acc = CentralMoments::default();
        for chunk in xs.chunks(700) {
            let c = chunk[0];
            let mut s = [0.0; 4];
            for &x in chunk {
                let d = x - c;
                s[0] += d;
                s[1] += d * d;
                s[2] += d * d * d;
                s[3] += d * d * d * d;
            }
            acc = acc.merge(&CentralMoments::from_shifted_sums(chunk.len() as f64, c, s));
        }
        let (mean, m2, m4) = serial_moments(&xs);
        assert!((acc.mean - mean).abs() < 1e-12 * mean.abs());
        assert!((acc.m2 - m2).abs() < 1e-9 * m2);
        assert!((acc.m4 - m4).abs() < 1e-8 * m4);
    }

    #[test]
    fn parse_queries() {
        assert_eq!(
            MomentQuery::parse("1,2|1,3", 4, false).unwrap(),
            MomentQuery::Mean(pair(&[1, 2], &[1, 3], 4))
        );
        assert_eq!(
            MomentQuery::parse("1,2|1,4|2,3|3,4", 4, false).unwrap().label(),
            "1,2|1,4|2,3|3,4"
        );
        assert!(matches!(MomentQuery::parse("1|2", 2, true).unwrap(), MomentQuery::Variance(_)));
        assert!(MomentQuery::parse("1,2|3", 4, false).is_err());
        assert!(MomentQuery::parse("1|2|3", 4, false).is_err());
        assert!(MomentQuery::parse("1|2|3|4", 4, true).is_err());
    }

    #[test]
    fn deterministic_and_splittable() {
        let spec = WishartSpec::standard(6, 3).unwrap();
        let q = vec![
            MomentQuery::Mean(pair(&[1, 2], &[1, 2], 3)),
            MomentQuery::Product(pair(&[1], &[2], 3), pair(&[2], &[3], 3)),
            MomentQuery::Variance(pair(&[1], &[3], 3)),
        ];
        let rng = RngStream::new(42);
        let plan = ChunkPlan { chunk_size: 500 };
        let a = mc_minor_moments_with_plan(&spec, &q, 4000, rng, plan).unwrap();
        let b = mc_minor_moments_with_plan(&spec, &q, 4000, rng, plan).unwrap();
        assert_eq!(a, b);
        let mut chunks = mc_minor_chunks(&spec, &q, 4000, rng, plan, 0..3).unwrap();
        chunks.extend(mc_minor_chunks(&spec, &q, 4000, rng, plan, 3..8).unwrap());
        assert_eq!(combine_chunks(&q, &chunks, rng).unwrap(), a);
        assert_eq!(a[0].reps, 4000);
    }

    #[test]
    fn thread_count_does_not_change_estimates() {
        let spec = WishartSpec::standard(5, 2).unwrap();
        let q = vec![MomentQuery::Mean(pair(&[1], &[1], 2))];
        let plan = ChunkPlan { chunk_size: 100 };
        let parallel = mc_minor_moments_with_plan(&spec, &q, 1000, RngStream::new(3), plan).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let serial = pool
            .install(|| mc_minor_moments_with_plan(&spec, &q, 1000, RngStream::new(3), plan))
            .unwrap();
        assert_eq!(parallel, serial);
    }

    #[test]
    fn std_error_shrinks_with_reps() {
        let spec = WishartSpec::standard(8, 3).unwrap();
        let q = vec![MomentQuery::Mean(pair(&[1, 2], &[1, 3], 3))];
        let small = mc_minor_moments(&spec, &q, 20_000, RngStream::new(5)).unwrap();
        let large = mc_minor_moments(&spec, &q, 80_000, RngStream::new(6)).unwrap();
        let ratio = small[0].std_error / large[0].std_error;
        assert!((ratio - 2.0).abs() < 0.4, "ratio {ratio}");
    }

    #[test]
    fn rejects_bad_input() {
        let spec = WishartSpec::standard(6, 3).unwrap();
        let q = vec![MomentQuery::Mean(pair(&[1], &[1], 3))];
        assert!(mc_minor_moments(&spec, &q, 50, RngStream::new(0)).is_err());
        assert!(mc_minor_moments(&spec, &[], 1000, RngStream::new(0)).is_err());
        let big = vec![MomentQuery::Mean(pair(&[4], &[1], 4))];
        assert!(mc_minor_moments(&spec, &big, 1000, RngStream::new(0)).is_err());
        assert!(mc_minor_moments(&WishartSpec::standard(2, 3).unwrap(), &q, 1000, RngStream::new(0)).is_err());
        assert!(mc_noncentral_det(&DenseMatrix::zeros(2, 3), 1000, RngStream::new(0)).is_err());
    }

    #[test]
    fn noncentral_smoke() {
        let (mean, second) = mc_noncentral_det(&DenseMatrix::identity(2), 40_000, RngStream::new(9)).unwrap();
        assert!((mean.estimate - 1.0).abs() < 4.0 * mean.std_error);
        assert!((second.estimate - 5.0).abs() < 4.0 * second.std_error);
    }
}
