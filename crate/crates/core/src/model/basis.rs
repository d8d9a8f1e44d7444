//! Basis combinatorics for spectral models on the flat torus.
//!
//! Sector bases are indexed `(monomial J, frame, Fourier mode)` with the
//! monomial slowest and the mode fastest. Conventions fixed here and used
//! everywhere (the sign ledger):
//! - contraction eats the leftmost (1,0) slot; the contracting form's
//!   antiholomorphic indices are written leftmost in the result
//! - a fresh dz-bar produced by the Dolbeault operator is wedged from the
//!   left
//! - modes are lattice points `k` in `[-K, K]^{2n}` laid out as
//!   `[a_1, b_1, ..., a_n, b_n]` for `e_k = exp(i * sum_j (a_j x_j + b_j y_j))`
//!   with `z_j = x_j + i y_j`

use crate::scalar::{Real, C};

/// Antiholomorphic index monomials `dz-bar^J` for `J` a sorted subset of
/// `{0, .., n-1}` of size `q`, in lexicographic order.
pub fn monomials(n: usize, q: usize) -> Vec<Vec<usize>> {
    match (n, q) {
        (_, 0) => vec![vec![]],
        (1, 1) => vec![vec![0]],
        (2, 1) => vec![vec![0], vec![1]],
        (2, 2) => vec![vec![0, 1]],
        _ => vec![],
    }
}

pub fn num_monomials(n: usize, q: usize) -> usize {
    monomials(n, q).len()
}

/// Wedge `dz-bar^I /\ dz-bar^J` with `I` kept to the left.
/// Returns the sign and the index of the merged monomial, or `None` when a
/// factor repeats.
pub fn wedge_concat(n: usize, i_mono: &[usize], j_mono: &[usize]) -> Option<(f64, usize)> {
    let mut merged: Vec<usize> = Vec::with_capacity(i_mono.len() + j_mono.len());
    merged.extend_from_slice(i_mono);
    merged.extend_from_slice(j_mono);
    // Count inversions of the concatenation relative to sorted order.
    let mut sign = 1.0;
    for a in 0..merged.len() {
        for b in (a + 1)..merged.len() {
            if merged[a] == merged[b] {
                return None;
            }
            if merged[a] > merged[b] {
                sign = -sign;
            }
        }
    }
    merged.sort_unstable();
    let table = monomials(n, merged.len());
    let idx = table.iter().position(|m| m == &merged)?;
    Some((sign, idx))
}

/// Wedge a single `dz-bar^j` from the left onto `dz-bar^J`.
pub fn wedge_left(n: usize, j: usize, mono: &[usize]) -> Option<(f64, usize)> {
    wedge_concat(n, &[j], mono)
}

/// Fourier lattice `[-K, K]^{2n}` with odometer indexing (first coordinate
/// slowest).
#[derive(Debug, Clone, PartialEq)]
pub struct ModeBox {
    pub n: usize,
    pub k_cut: i32,
    pub count: usize,
}

impl ModeBox {
    pub fn new(n: usize, k_cut: u32) -> Self {
        let side = 2 * k_cut as usize + 1;
        ModeBox {
            n,
            k_cut: k_cut as i32,
            count: side.pow(2 * n as u32),
        }
    }

    pub fn dim_components(&self) -> usize {
        2 * self.n
    }

    pub fn mode(&self, index: usize) -> Vec<i32> {
        let side = (2 * self.k_cut + 1) as usize;
        let mut rem = index;
        let mut out = vec![0i32; self.dim_components()];
        for slot in (0..self.dim_components()).rev() {
            out[slot] = (rem % side) as i32 - self.k_cut;
            rem /= side;
        }
        out
    }

    pub fn index(&self, mode: &[i32]) -> Option<usize> {
        let side = (2 * self.k_cut + 1) as usize;
        let mut idx = 0usize;
        for &c in mode {
            if c.abs() > self.k_cut {
                return None;
            }
            idx = idx * side + (c + self.k_cut) as usize;
        }
        Some(idx)
    }

    pub fn add(&self, k1: &[i32], k2: &[i32]) -> Vec<i32> {
        k1.iter().zip(k2).map(|(a, b)| a + b).collect()
    }

    /// Sup-norm band of a lattice point.
    pub fn band(mode: &[i32]) -> u32 {
        mode.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0)
    }
}

/// `d/dz^j` symbol on mode `k`: `(b_j + i a_j) / 2`.
pub fn hol_symbol<R: Real>(mode: &[i32], j: usize) -> C<R> {
    let a = mode[2 * j] as f64;
    let b = mode[2 * j + 1] as f64;
    C::new(R::from_f64_lossy(b / 2.0), R::from_f64_lossy(a / 2.0))
}

/// `d/dz-bar^j` symbol on mode `k`: `(-b_j + i a_j) / 2`.
pub fn antihol_symbol<R: Real>(mode: &[i32], j: usize) -> C<R> {
    let a = mode[2 * j] as f64;
    let b = mode[2 * j + 1] as f64;
    C::new(R::from_f64_lossy(-b / 2.0), R::from_f64_lossy(a / 2.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    /// Ground the derivative symbols with central finite differences on
    /// the actual exponential, independent of the symbol formulas.
    #[test]
    fn symbols_match_finite_differences() {
        let mode = vec![2i32, -1, 0, 3];
        let point = [0.3f64, 1.1, -0.4, 0.9]; // (x1, y1, x2, y2)
        let eval = |p: &[f64]| -> Complex64 {
            let phase: f64 = mode
                .iter()
                .zip(p)
                .map(|(&k, &x)| k as f64 * x)
                .sum();
            Complex64::new(0.0, phase).exp()
        };
        let h = 1e-6;
        for j in 0..2 {
            let mut px = point;
            px[2 * j] += h;
            let mut mx = point;
            mx[2 * j] -= h;
            let ddx = (eval(&px) - eval(&mx)) / (2.0 * h);
            let mut py = point;
            py[2 * j + 1] += h;
            let mut my = point;
            my[2 * j + 1] -= h;
            let ddy = (eval(&py) - eval(&my)) / (2.0 * h);
            let ddz = (ddx - Complex64::i() * ddy) / 2.0;
            let ddzbar = (ddx + Complex64::i() * ddy) / 2.0;
            let lam: Complex64 = hol_symbol::<f64>(&mode, j) * eval(&point);
            let mu: Complex64 = antihol_symbol::<f64>(&mode, j) * eval(&point);
            assert!((ddz - lam).norm() < 1e-6, "hol symbol j={j}");
            assert!((ddzbar - mu).norm() < 1e-6, "antihol symbol j={j}");
        }
    }

    #[test]
    fn mode_box_round_trip() {
        let mb = ModeBox::new(2, 1);
        assert_eq!(mb.count, 81);
        for i in 0..mb.count {
            let k = mb.mode(i);
            assert_eq!(mb.index(&k), Some(i));
        }
        assert_eq!(mb.index(&[2, 0, 0, 0]), None);
    }

    #[test]
    fn wedge_signs() {
        // dz-bar^1 /\ dz-bar^2 = +dz-bar^{12}; dz-bar^2 /\ dz-bar^1 = -.
        assert_eq!(wedge_concat(2, &[0], &[1]), Some((1.0, 0)));
        assert_eq!(wedge_concat(2, &[1], &[0]), Some((-1.0, 0)));
        assert_eq!(wedge_concat(2, &[0], &[0]), None);
        assert_eq!(wedge_left(2, 1, &[0]), Some((-1.0, 0)));
        assert_eq!(wedge_concat(2, &[], &[1]), Some((1.0, 1)));
    }
}
