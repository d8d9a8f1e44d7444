//! Shared oracles for integration tests: pointwise evaluation of model
//! forms as trigonometric polynomials, finite-difference holomorphic
//! derivatives, and derivation-style operator application. These paths
//! avoid the library's symbol tables and wedge machinery so they can catch
//! sign and ordering bugs in them.

#![allow(dead_code)]

use holopair::model::{Sector, SpectralModel};
use nalgebra::DVector;
use num_complex::Complex64;

pub type C64 = Complex64;

/// Evaluate one Fourier mode at a real point of the torus.
pub fn mode_value(mode: &[i32], x: &[f64]) -> C64 {
    let phase: f64 = mode.iter().zip(x).map(|(&k, &xi)| k as f64 * xi).sum();
    C64::new(0.0, phase).exp()
}

/// Pointwise value of a sector form: `out[mono][frame]`.
pub fn eval_sector(
    model: &SpectralModel<f64>,
    sector: Sector,
    q: usize,
    v: &DVector<C64>,
    x: &[f64],
) -> Vec<Vec<C64>> {
    let torus = model.torus_data().expect("torus model");
    let layout = model.layout(sector, q);
    let monos = holopair::model::basis::num_monomials(model.n(), q);
    let mut out = vec![vec![C64::new(0.0, 0.0); layout.frames]; monos];
    for (idx, z) in v.iter().enumerate() {
        if z.norm() == 0.0 {
            continue;
        }
        let (mono, frame, mode_idx) = layout.decode(idx);
        out[mono][frame] += z * mode_value(&torus.modes.mode(mode_idx), x);
    }
    out
}

/// Holomorphic derivative of a pointwise-evaluable function by central
/// differences: `d/dz^j = (d/dx_j - i d/dy_j) / 2`.
pub fn fd_dz<F>(f: F, j: usize, x: &[f64]) -> C64
where
    F: Fn(&[f64]) -> C64,
{
    let h = 1e-5;
    let mut xp = x.to_vec();
    let mut xm = x.to_vec();
    xp[2 * j] += h;
    xm[2 * j] -= h;
    let ddx = (f(&xp) - f(&xm)) / (2.0 * h);
    let mut yp = x.to_vec();
    let mut ym = x.to_vec();
    yp[2 * j + 1] += h;
    ym[2 * j + 1] -= h;
    let ddy = (f(&yp) - f(&ym)) / (2.0 * h);
    (ddx - C64::i() * ddy) / 2.0
}

/// Apply a degree-0 tangent form as a derivation to a scalar function,
/// with finite-difference derivatives: `(phi f)(x) = sum_i phi^i(x) d_i f(x)`.
pub fn derivation_apply<F>(
    model: &SpectralModel<f64>,
    phi: &DVector<C64>,
    f: F,
    x: &[f64],
) -> C64
where
    F: Fn(&[f64]) -> C64 + Copy,
{
    let vals = eval_sector(model, Sector::T, 0, phi, x);
    (0..model.n())
        .map(|i| vals[0][i] * fd_dz(f, i, x))
        .sum()
}

/// Deterministic sample points on the torus.
pub fn sample_points(n: usize, count: usize) -> Vec<Vec<f64>> {
    let mut pts = Vec::new();
    let mut state = 0.734f64;
    for _ in 0..count {
        let mut p = Vec::new();
        for _ in 0..2 * n {
            state = (state * 997.13 + 0.417).fract();
            p.push(state * std::f64::consts::TAU);
        }
        pts.push(p);
    }
    pts
}

/// Max modulus over a vector.
pub fn max_abs(v: &DVector<C64>) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
