//! Helpers for the acceptance target: the report line format and an
//! exact nullspace used as an independent oracle.

use std::io::Write;

use num_rational::BigRational;
use num_traits::{One, Zero};

/// Writes `PASS criterion n: …` or `FAIL criterion n: …` to stderr, which
/// the test harness does not capture.
pub fn report(n: usize, pass: bool, text: &str) {
    let line = format!("{} criterion {n}: {text}", if pass { "PASS" } else { "FAIL" });
    let _ = writeln!(std::io::stderr(), "{line}");
}

/// Nullspace of an exact matrix with `cols` columns by Gauss-Jordan
/// elimination.
pub fn exact_nullspace(mut a: Vec<Vec<BigRational>>, cols: usize) -> Vec<Vec<BigRational>> {
    let mut pivots = Vec::new();
    let mut row = 0;
    for c in 0..cols {
        let Some(p) = (row..a.len()).find(|&r| !a[r][c].is_zero()) else {
            continue;
        };
        a.swap(row, p);
        let inv = BigRational::one() / a[row][c].clone();
        for x in a[row].iter_mut() {
            *x = x.clone() * inv.clone();
        }
        for r in 0..a.len() {
            if r != row && !a[r][c].is_zero() {
                let f = a[r][c].clone();
                for k in 0..cols {
                    let v = a[row][k].clone() * f.clone();
                    a[r][k] = a[r][k].clone() - v;
                }
            }
        }
        pivots.push(c);
        row += 1;
    }
    (0..cols)
        .filter(|c| !pivots.contains(c))
        .map(|fc| {
            let mut v = vec![BigRational::zero(); cols];
            v[fc] = BigRational::one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = -a[r][fc].clone();
            }
            v
        })
        .collect()
}
