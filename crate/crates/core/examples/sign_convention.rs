// Row and column orderings change the sign of mixed second moments.

use minor_moments::index::{canonical_relabeling, sym_diff};
use minor_moments::standard::cross_moment_std;
use minor_moments::IndexSeq;

type BoxError = Box<dyn std::error::Error>;

pub fn run_example() -> Result<(), BoxError> {
    let (n, r) = (10usize, 4);
    let s = |v: &[usize]| IndexSeq::new(v.to_vec(), r);
    let nf = n as f64;
    let expected = nf * (nf - 1.0).powi(2);

    let plus = cross_moment_std(n, &s(&[1, 2])?, &s(&[1, 3])?, &s(&[2, 4])?, &s(&[3, 4])?)?;
    let minus = cross_moment_std(n, &s(&[1, 2])?, &s(&[1, 4])?, &s(&[2, 3])?, &s(&[3, 4])?)?;
    let reordered = cross_moment_std(n, &s(&[1, 2])?, &s(&[1, 4])?, &s(&[2, 3])?, &s(&[4, 3])?)?;
    println!("E[det W_12x13 det W_24x34] = {plus}");
    println!("E[det W_12x14 det W_23x34] = {minus}");
    println!("E[det W_12x14 det W_23x43] = {reordered}");
    assert_eq!(plus, expected);
    assert_eq!(minus, -expected);
    assert_eq!(reordered, expected);

    let (i, j, k, l) = (s(&[1, 2])?, s(&[1, 4])?, s(&[2, 3])?, s(&[3, 4])?);
    println!("I △ J = {{{}}}, K △ L = {{{}}}", sym_diff(&i, &j)?, sym_diff(&k, &l)?);
    let relabel = canonical_relabeling(&i, &j, &k, &l)?;
    println!(
        "relabeled to ({}) x ({}), ({}) x ({}) with sign {}",
        relabel.i, relabel.j, relabel.k, relabel.l, relabel.sign
    );
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
