// Exact moments of products of standard Wishart entries by Wick's formula,
// used as an oracle independent of the closed forms.
//
// With W = Σ_k x_k x_kᵀ, x_k iid N(0, I), a product of t entries expands
// over assignments of sample indices k_1..k_t. Grouping assignments by the
// set partition they induce, a partition with b blocks occurs n(n-1)...(n-b+1)
// times and contributes the product over blocks of Gaussian moments.

#![allow(dead_code)]

use minor_moments::{DenseMatrix, RngStream, SymPDMatrix};

/// E[z_{i1} ... z_{i2k}] for z ~ N(0, I): number of matchings of equal indices.
pub fn gaussian_moment(idx: &[usize]) -> i128 {
    if idx.is_empty() {
        return 1;
    }
    if idx.len() % 2 == 1 {
        return 0;
    }
    let first = idx[0];
    let rest = &idx[1..];
    let mut total = 0;
    for p in 0..rest.len() {
        if rest[p] == first {
            let mut remaining = rest.to_vec();
            remaining.remove(p);
            total += gaussian_moment(&remaining);
        }
    }
    total
}

fn set_partitions(t: usize) -> Vec<Vec<usize>> {
    // restricted growth strings
    let mut out = Vec::new();
    let mut labels = vec![0usize; t];
    fn rec(pos: usize, max: usize, labels: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if pos == labels.len() {
            out.push(labels.clone());
            return;
        }
        for l in 0..=max + 1 {
            labels[pos] = l;
            rec(pos + 1, max.max(l), labels, out);
        }
    }
    if t == 0 {
        return vec![vec![]];
    }
    labels[0] = 0;
    rec(1, 0, &mut labels, &mut out);
    out
}

/// E[W_{a1 b1} ... W_{at bt}] for W ~ W_r(n, I), indices zero-based.
pub fn wishart_entry_moment(n: i128, entries: &[(usize, usize)]) -> i128 {
    let mut total = 0;
    for labels in set_partitions(entries.len()) {
        let blocks = labels.iter().max().map_or(0, |&b| b + 1);
        let mut count: i128 = 1;
        for b in 0..blocks as i128 {
            count *= n - b;
        }
        if count == 0 {
            continue;
        }
        let mut prod = 1;
        for b in 0..blocks {
            let idx: Vec<usize> = entries
                .iter()
                .zip(&labels)
                .filter(|(_, &l)| l == b)
                .flat_map(|(&(x, y), _)| [x, y])
                .collect();
            prod *= gaussian_moment(&idx);
            if prod == 0 {
                break;
            }
        }
        total += count * prod;
    }
    total
}

fn permutations(m: usize) -> Vec<(Vec<usize>, i128)> {
    fn rec(prefix: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<(Vec<usize>, i128)>) {
        let m = used.len();
        if prefix.len() == m {
            let mut inv = 0;
            for a in 0..m {
                for b in a + 1..m {
                    if prefix[a] > prefix[b] {
                        inv += 1;
                    }
                }
            }
            out.push((prefix.clone(), if inv % 2 == 0 { 1 } else { -1 }));
            return;
        }
        for x in 0..m {
            if !used[x] {
                used[x] = true;
                prefix.push(x);
                rec(prefix, used, out);
                prefix.pop();
                used[x] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; m], &mut out);
    out
}

/// E[Π_t det(W_{I_t × J_t})] for 1-based ordered index lists, by expanding
/// every determinant with the Leibniz formula.
pub fn minor_product_moment(n: i128, minors: &[(&[usize], &[usize])]) -> i128 {
    let mut terms: Vec<(i128, Vec<(usize, usize)>)> = vec![(1, vec![])];
    for (rows, cols) in minors {
        let mut next = Vec::new();
        for (sign, entries) in &terms {
            for (perm, s) in permutations(rows.len()) {
                let mut e = entries.clone();
                e.extend(rows.iter().zip(&perm).map(|(&i, &p)| (i - 1, cols[p] - 1)));
                next.push((sign * s, e));
            }
        }
        terms = next;
    }
    terms.iter().map(|(s, e)| s * wishart_entry_moment(n, e)).sum()
}

/// Seeded random positive definite matrix: X Xᵀ / (r + 2) + 0.2 I.
pub fn random_pd(r: usize, seed: u64, stream: u64) -> SymPDMatrix {
    let mut g = RngStream::with_stream(seed, stream).generator();
    let x = DenseMatrix::from_fn(r, r + 2, |_, _| g.normal());
    let xxt = x.matmul(&x.transpose()).unwrap();
    SymPDMatrix::new(DenseMatrix::from_fn(r, r, |a, b| {
        xxt[(a, b)] / (r + 2) as f64 + if a == b { 0.2 } else { 0.0 }
    }))
    .unwrap()
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}
