//! Geometry of the truncations. Vertex ids are nested: the vertices of level
//! `n` are a prefix of the vertices of level `n + 1`.

use std::collections::HashMap;

use crate::model::{Coordinate, Framework, Member};

/// Hexagonal patch of the equilateral triangle lattice,
/// `max(|a|, |b|, |a + b|) ≤ radius`, all members unit cables.
pub fn triangle_tiling(radius: usize) -> Framework {
    let r = radius as i64;
    let mut sites: Vec<(i64, i64, i64)> = Vec::new();
    for a in -r..=r {
        for b in -r..=r {
            let ring = a.abs().max(b.abs()).max((a + b).abs());
            if ring <= r {
                sites.push((ring, a, b));
            }
        }
    }
    sites.sort();
    let index: HashMap<(i64, i64), usize> = sites.iter().enumerate().map(|(i, &(_, a, b))| ((a, b), i)).collect();
    let half_sqrt3 = 3f64.sqrt() / 2.0;
    let vertices = sites
        .iter()
        .map(|&(_, a, b)| {
            vec![
                Coordinate::ratio(2 * a + b, 2),
                Coordinate::inexact(b as f64 * half_sqrt3),
            ]
        })
        .collect();
    let mut members = Vec::new();
    for &(_, a, b) in &sites {
        for (da, db) in [(1, 0), (0, 1), (-1, 1)] {
            if let Some(&j) = index.get(&(a + da, b + db)) {
                members.push(Member::cable(index[&(a, b)], j));
            }
        }
    }
    Framework::from_parts(2, vertices, members)
}

/// Column order: `0, 1, −1, 2, −2, …` (two-sided) or `0, 1, 2, …`.
pub fn strip_columns(level: usize, one_sided: bool) -> Vec<i64> {
    let mut cols = vec![0];
    for k in 1..=level as i64 {
        cols.push(k);
        if !one_sided {
            cols.push(-k);
        }
    }
    cols
}

/// Three rows at `y = 0, 1, 2`; the lower band and the verticals are
/// cable-strut pairs, the top row and the rising diagonals are cables.
pub fn strip(level: usize, one_sided: bool) -> Framework {
    let cols = strip_columns(level, one_sided);
    let pos: HashMap<i64, usize> = cols.iter().enumerate().map(|(i, &k)| (k, i)).collect();
    let v = |k: i64, row: usize| pos[&k] * 3 + row;
    let mut vertices = Vec::new();
    for &k in &cols {
        for row in 0..3 {
            vertices.push(vec![Coordinate::from(k), Coordinate::from(row as i64)]);
        }
    }
    let mut members = Vec::new();
    let pair = |a: usize, b: usize, out: &mut Vec<Member>| {
        out.push(Member::cable(a, b));
        out.push(Member::strut(a, b));
    };
    for &k in &cols {
        pair(v(k, 0), v(k, 1), &mut members);
        pair(v(k, 1), v(k, 2), &mut members);
        if pos.contains_key(&(k + 1)) {
            let n = k + 1;
            pair(v(k, 0), v(n, 0), &mut members);
            pair(v(k, 1), v(n, 1), &mut members);
            pair(v(k, 0), v(n, 1), &mut members);
            pair(v(k, 1), v(n, 0), &mut members);
            members.push(Member::cable(v(k, 2), v(n, 2)));
            members.push(Member::cable(v(k, 1), v(n, 2)));
        }
    }
    Framework::from_parts(2, vertices, members)
}

pub const SQUARE_CORNERS: [(i64, i64); 4] = [(-1, 1), (1, 1), (1, -1), (-1, -1)];

/// Squares `k = 0..=level` of half-width `2^{−k}`; vertex `4k + c` is corner
/// `c` of square `k`, and corner `c` of square `k` is joined to corner `c` of
/// square `k + 1`.
pub fn dyadic_squares(level: usize) -> Framework {
    let mut vertices = Vec::new();
    let mut members = Vec::new();
    for k in 0..=level {
        let den = 1i64 << k;
        for (x, y) in SQUARE_CORNERS {
            vertices.push(vec![Coordinate::ratio(x, den), Coordinate::ratio(y, den)]);
        }
        for c in 0..4 {
            members.push(Member::bar(4 * k + c, 4 * k + (c + 1) % 4));
            if k < level {
                members.push(Member::bar(4 * k + c, 4 * (k + 1) + c));
            }
        }
    }
    Framework::from_parts(2, vertices, members)
}

/// Collinear bars over `[2^k − 1, 2^{k+1} − 1]` and their mirror images for
/// `k = 0..=level`, placed on the x-axis of the plane.
pub fn lacunary(level: usize) -> Framework {
    let mut vertices = vec![vec![Coordinate::from(0), Coordinate::from(0)]];
    let mut members = Vec::new();
    for k in 0..=level {
        let x = (1i64 << (k + 1)) - 1;
        vertices.push(vec![Coordinate::from(x), Coordinate::from(0)]);
        vertices.push(vec![Coordinate::from(-x), Coordinate::from(0)]);
        let (right, left) = (2 * k + 1, 2 * k + 2);
        let (prev_right, prev_left) = if k == 0 { (0, 0) } else { (2 * k - 1, 2 * k) };
        members.push(Member::bar(prev_right, right));
        members.push(Member::bar(prev_left, left));
    }
    Framework::from_parts(2, vertices, members)
}
