//! Direct reference implementations used to check the FFT-based code paths.
#![allow(dead_code)]

use cscb_core::{CoefficientSet, FilterBank, SignalGrid};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use std::f64::consts::PI;

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

pub fn random_grid(rng: &mut ChaCha20Rng, rows: usize, cols: usize) -> SignalGrid {
    SignalGrid::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0)).unwrap()
}

pub fn random_set(rng: &mut ChaCha20Rng, m: usize, rows: usize, cols: usize) -> CoefficientSet {
    CoefficientSet::new((0..m).map(|_| random_grid(rng, rows, cols)).collect()).unwrap()
}

/// Random bank on a grid of at most `max_dim` per side with up to `max_m`
/// filters whose supports fit the grid.
pub fn random_bank(rng: &mut ChaCha20Rng, max_dim: usize, max_m: usize) -> FilterBank {
    let rows = rng.random_range(1..=max_dim);
    let cols = rng.random_range(1..=max_dim);
    let m = rng.random_range(1..=max_m);
    let filters = (0..m)
        .map(|_| {
            let fr = rng.random_range(1..=rows);
            let fc = rng.random_range(1..=cols);
            random_grid(rng, fr, fc)
        })
        .collect();
    let weights = (0..m).map(|_| rng.random_range(0.0..2.0)).collect();
    FilterBank::from_filters(filters, weights, rows, cols).unwrap()
}

/// Full 2-D DFT by direct summation, row-major output.
pub fn naive_dft(g: &SignalGrid) -> Vec<Complex64> {
    let (rows, cols) = g.dims();
    let mut out = vec![Complex64::new(0.0, 0.0); rows * cols];
    for k in 0..rows {
        for l in 0..cols {
            let mut acc = Complex64::new(0.0, 0.0);
            for r in 0..rows {
                for c in 0..cols {
                    let phase = -2.0 * PI * ((k * r) as f64 / rows as f64 + (l * c) as f64 / cols as f64);
                    acc += g.get(r, c) * Complex64::from_polar(1.0, phase);
                }
            }
            out[k * cols + l] = acc;
        }
    }
    out
}

/// `(f * x)[i, j] = sum_{p, q} f[p, q] x[i - p, j - q]` with indices modulo
/// the grid size; `f` is anchored at the origin.
pub fn naive_circ_conv(f: &SignalGrid, x: &SignalGrid) -> SignalGrid {
    let (rows, cols) = x.dims();
    SignalGrid::from_fn(rows, cols, |i, j| {
        let mut acc = 0.0;
        for p in 0..f.rows() {
            for q in 0..f.cols() {
                acc += f.get(p, q) * x.get((i + rows * f.rows() - p) % rows, (j + cols * f.cols() - q) % cols);
            }
        }
        acc
    })
    .unwrap()
}

/// Dense `N x MN` synthesis matrix, row-major, with coefficient maps
/// stacked in order.
pub fn dense_d(bank: &FilterBank) -> Vec<Vec<f64>> {
    let (rows, cols) = (bank.rows(), bank.cols());
    let n = rows * cols;
    let mut d = vec![vec![0.0; n * bank.len()]; n];
    for m in 0..bank.len() {
        for j in 0..n {
            let unit = SignalGrid::impulse(rows, cols, j / cols, j % cols).unwrap();
            let col = naive_circ_conv(bank.filter(m), &unit);
            for (i, v) in col.as_slice().iter().enumerate() {
                d[i][m * n + j] = *v;
            }
        }
    }
    d
}

pub fn mat_vec(a: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    a.iter().map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum()).collect()
}

/// `D^T D + I` built from the dense synthesis matrix.
pub fn dense_normal_matrix(d: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let k = d[0].len();
    let mut a = vec![vec![0.0; k]; k];
    for (i, ai) in a.iter_mut().enumerate() {
        for (j, aij) in ai.iter_mut().enumerate() {
            *aij = d.iter().map(|row| row[i] * row[j]).sum::<f64>() + if i == j { 1.0 } else { 0.0 };
        }
    }
    a
}

/// Gaussian elimination with partial pivoting.
pub fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
        a.swap(k, p);
        b.swap(k, p);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            if f != 0.0 {
                let (top, bottom) = a.split_at_mut(i);
                for (x, &p) in bottom[0][k..].iter_mut().zip(&top[k][k..]) {
                    *x -= f * p;
                }
                b[i] -= f * b[k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| a[k][j] * x[j]).sum();
        x[k] = (b[k] - s) / a[k][k];
    }
    x
}

pub fn flatten(set: &CoefficientSet) -> Vec<f64> {
    set.maps().iter().flat_map(|m| m.as_slice().iter().copied()).collect()
}

pub fn unflatten(v: &[f64], m: usize, rows: usize, cols: usize) -> CoefficientSet {
    let n = rows * cols;
    CoefficientSet::new((0..m).map(|i| SignalGrid::from_vec(rows, cols, v[i * n..(i + 1) * n].to_vec()).unwrap()).collect())
        .unwrap()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
