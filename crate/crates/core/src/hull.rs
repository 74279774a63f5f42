//! Exact rational geometry of small weight configurations: ranks, positive
//! circuits and minimum-norm points of convex hulls.

use num::rational::BigRational;
use num::{BigInt, One, Signed, Zero};

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn dot(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).fold(Q::zero(), |acc, (x, y)| acc + x * y)
}

/// Row echelon form in place; returns the pivot columns.
fn echelon(m: &mut [Vec<Q>]) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..cols {
                    let sub = &f * &m[r][j];
                    m[i][j] = &m[i][j] - sub;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Rank of a list of vectors.
pub fn rank(vectors: &[Vec<Q>]) -> usize {
    let mut m = vectors.to_vec();
    echelon(&mut m).len()
}

/// Basis of `{c : sum_i c_i v_i = 0}`.
pub fn dependencies(vectors: &[Vec<Q>]) -> Vec<Vec<Q>> {
    let n = vectors.len();
    let k = vectors.first().map_or(0, |v| v.len());
    // matrix with the vectors as columns
    let mut m: Vec<Vec<Q>> = (0..k).map(|i| (0..n).map(|j| vectors[j][i].clone()).collect()).collect();
    let pivots = echelon(&mut m);
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut c = vec![Q::zero(); n];
            c[f] = Q::one();
            for (row, &p) in pivots.iter().enumerate() {
                c[p] = -m[row][f].clone();
            }
            c
        })
        .collect()
}

/// Marks every vector lying in the support of a strictly positive linear
/// dependency. The union of such supports is the union of positive circuits.
pub fn positive_circuit_union(vectors: &[Vec<Q>]) -> Vec<bool> {
    let n = vectors.len();
    let mut mark = vec![false; n];
    for mask in 1u32..(1u32 << n) {
        let idx: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
        let sub: Vec<Vec<Q>> = idx.iter().map(|&i| vectors[i].clone()).collect();
        let deps = dependencies(&sub);
        if deps.len() != 1 {
            continue;
        }
        let c = &deps[0];
        if c.iter().all(|x| x.is_positive()) || c.iter().all(|x| x.is_negative()) {
            for &i in &idx {
                mark[i] = true;
            }
        }
    }
    mark
}

/// Solves a square linear system exactly; `None` when singular.
fn solve(mut a: Vec<Vec<Q>>, b: Vec<Q>) -> Option<Vec<Q>> {
    let n = a.len();
    for (row, rhs) in a.iter_mut().zip(b) {
        row.push(rhs);
    }
    let pivots = echelon(&mut a);
    if pivots.len() != n || pivots.iter().enumerate().any(|(i, &p)| p != i) {
        return None;
    }
    Some(a.into_iter().map(|row| row[n].clone()).collect())
}

/// The point of minimum Euclidean norm in the convex hull of `points`.
pub fn min_norm_point(points: &[Vec<Q>]) -> Vec<Q> {
    let n = points.len();
    let k = points.first().map_or(0, |p| p.len());
    let mut best: Option<(Q, Vec<Q>)> = None;
    for mask in 1u32..(1u32 << n) {
        let idx: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
        let m = idx.len();
        if m > k + 1 {
            continue;
        }
        let mut sys = vec![vec![Q::zero(); m + 1]; m + 1];
        for a in 0..m {
            for b in 0..m {
                sys[a][b] = dot(&points[idx[a]], &points[idx[b]]);
            }
            sys[a][m] = Q::one();
            sys[m][a] = Q::one();
        }
        let mut rhs = vec![Q::zero(); m + 1];
        rhs[m] = Q::one();
        let Some(sol) = solve(sys, rhs) else { continue };
        if sol[..m].iter().any(|l| !l.is_positive()) {
            continue;
        }
        let point: Vec<Q> = (0..k)
            .map(|i| idx.iter().zip(&sol).fold(Q::zero(), |acc, (&j, l)| acc + l * &points[j][i]))
            .collect();
        let norm = dot(&point, &point);
        if best.as_ref().map_or(true, |(b, _)| norm < *b) {
            best = Some((norm, point));
        }
    }
    best.map(|(_, p)| p).unwrap_or_else(|| vec![Q::zero(); k])
}

/// Orthogonal projection of each point onto the complement of `span`.
pub fn project_out(points: &[Vec<Q>], span: &[Vec<Q>]) -> Vec<Vec<Q>> {
    let mut basis: Vec<Vec<Q>> = Vec::new();
    for v in span {
        let mut w = v.clone();
        for b in &basis {
            let f = dot(b, &w) / dot(b, b);
            for (wi, bi) in w.iter_mut().zip(b) {
                *wi = &*wi - &f * bi;
            }
        }
        if w.iter().any(|x| !x.is_zero()) {
            basis.push(w);
        }
    }
    points
        .iter()
        .map(|p| {
            let mut w = p.clone();
            for b in &basis {
                let f = dot(b, &w) / dot(b, b);
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi = &*wi - &f * bi;
                }
            }
            w
        })
        .collect()
}
