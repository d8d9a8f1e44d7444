//! Structural validation of a spectral model.
//!
//! Five identities are measured on seeded band-limited samples:
//! dbar^2 = 0, Bianchi closure of the curvature coupling, compatibility of
//! dbar with the connection contraction, flatness of the (1,0) part, and
//! positivity of the Gram pairings. Identities whose exactness would need
//! products beyond the Fourier cutoff are reported as band overflow rather
//! than asserted.

use nalgebra::DVector;

use crate::model::{Pairing, Sector, SpectralModel};
use crate::report::{CheckLine, CheckReport};
use crate::sampling::{sample_vector, seeded_rng};
use crate::scalar::{c, cabs, czero, Real};

fn max_abs<R: Real>(v: &DVector<crate::scalar::C<R>>) -> f64 {
    v.iter().map(cabs).fold(0.0, f64::max)
}

/// Per-identity sample band that keeps products inside the cutoff, or
/// `None` when even band-0 inputs overflow. Abstract models have no band
/// bookkeeping and always sample the full space.
fn budget_band<R: Real>(model: &SpectralModel<R>, factors: u32, metric_uses: u32) -> Option<u32> {
    match model.fourier_cutoff() {
        None => Some(u32::MAX),
        Some(k) => {
            let reserve = metric_uses * model.metric_band();
            let k = k as i64 - reserve as i64;
            if k < 0 {
                None
            } else {
                Some((k as u32) / factors.max(1))
            }
        }
    }
}

/// Effective sample band: the budget, or the caller's request if it fits.
/// A request beyond the budget yields `None` (reported as band overflow,
/// never as a spurious failure).
fn effective_band(budget: Option<u32>, requested: Option<u32>) -> Option<u32> {
    match (budget, requested) {
        (None, _) => None,
        (Some(b), None) => Some(b),
        (Some(b), Some(r)) if r <= b => Some(r),
        (Some(_), Some(_)) => None,
    }
}

fn band_detail<R: Real>(model: &SpectralModel<R>, band: u32) -> String {
    match model.fourier_cutoff() {
        Some(k) if k > 0 => format!("sample band {band}"),
        _ => "full space".to_string(),
    }
}

/// Validate all model invariants; always returns a report. `requested_band`
/// caps the sample band; requests beyond an identity's exactness budget are
/// reported as band overflow.
pub fn validate_model<R: Real>(
    model: &SpectralModel<R>,
    samples: usize,
    tol: f64,
    seed: u64,
    requested_band: Option<u32>,
) -> CheckReport {
    let n = model.n();
    let mut rng = seeded_rng(seed);
    let mut lines = Vec::new();

    // dbar^2 = 0, as a matrix identity per sector.
    for sector in Sector::ALL {
        for q in 0..n.saturating_sub(1) {
            let d1 = model.dbar(sector, q);
            let d2 = model.dbar(sector, q + 1);
            let prod = &d2 * &d1;
            let residual = prod.iter().map(cabs).fold(0.0, f64::max);
            lines.push(CheckLine::measured(
                "dbar_squared",
                format!("{} degree {}", sector.name(), q),
                residual,
                tol,
            ));
        }
        if n == 1 {
            lines.push(CheckLine::vacuous(
                "dbar_squared",
                format!("{} (top degree at n=1)", sector.name()),
            ));
        }
    }

    // Curvature contraction raises degree by exactly one: shape bookkeeping.
    let mut type_ok = true;
    for p in 0..n {
        let m = model.curvature_matrix(p);
        if m.nrows() != model.dim(Sector::Q, p + 1) || m.ncols() != model.dim(Sector::T, p) {
            type_ok = false;
        }
    }
    lines.push(CheckLine {
        name: "curvature_type".into(),
        detail: "(0,p) -> (0,p+1)".into(),
        residual: if type_ok { 0.0 } else { 1.0 },
        status: if type_ok {
            crate::report::Status::Pass
        } else {
            crate::report::Status::Fail
        },
    });

    // Bianchi closure: dbar_Q(v . F) - (dbar_T v) . F = 0 on degree-0
    // tangent basis vectors whose band stays inside the budget.
    if n >= 2 {
        match effective_band(budget_band(model, 1, 1), requested_band) {
            None => lines.push(CheckLine::band_overflow(
                "bianchi",
                "requested band exceeds the exactness budget".into(),
            )),
            Some(band) => {
                let mut residual = 0.0f64;
                let dim_t0 = model.dim(Sector::T, 0);
                for i in 0..dim_t0 {
                    let mut v = DVector::from_element(dim_t0, czero());
                    v[i] = c(1.0, 0.0);
                    if let Some(b) = model.measured_band(Sector::T, 0, &v) {
                        if b > band {
                            continue;
                        }
                    }
                    let lhs = model.apply_dbar(Sector::Q, 1, &model.apply_curvature(0, &v));
                    let rhs = model.apply_curvature(1, &model.apply_dbar(Sector::T, 0, &v));
                    residual = residual.max(max_abs(&(lhs - rhs)));
                }
                lines.push(CheckLine::measured(
                    "bianchi",
                    "degree-0 tangent basis".into(),
                    residual,
                    tol,
                ));
            }
        }
    } else {
        lines.push(CheckLine::vacuous(
            "bianchi",
            "needs (0,2)-forms (n >= 2)".into(),
        ));
    }

    // Compatibility: dbar_Q(phi . grad alpha)
    //   = (dbar_T phi) . grad alpha + (-1)^p phi . grad (dbar_Q alpha)
    //     + [phi . F, alpha].
    {
        let mut any = false;
        match effective_band(budget_band(model, 2, 1), requested_band) {
            None => lines.push(CheckLine::band_overflow(
                "compatibility",
                "requested band exceeds the exactness budget".into(),
            )),
            Some(band) => {
                let mut residual = 0.0f64;
                for p in 0..n {
                    for q in 0..n {
                        if p + q + 1 > n {
                            continue;
                        }
                        any = true;
                        for _ in 0..samples {
                            let phi = sample_vector(model, Sector::T, p, band, &mut rng);
                            let alpha = sample_vector(model, Sector::Q, q, band, &mut rng);
                            let lhs = model.apply_dbar(
                                Sector::Q,
                                p + q,
                                &model.apply_pairing(Pairing::Conn10, p, q, &phi, &alpha),
                            );
                            let sign = if p % 2 == 1 { -1.0 } else { 1.0 };
                            let mut rhs = model.apply_pairing(
                                Pairing::Conn10,
                                p + 1,
                                q,
                                &model.apply_dbar(Sector::T, p, &phi),
                                &alpha,
                            );
                            rhs += model
                                .apply_pairing(
                                    Pairing::Conn10,
                                    p,
                                    q + 1,
                                    &phi,
                                    &model.apply_dbar(Sector::Q, q, &alpha),
                                )
                                * c::<R>(sign, 0.0);
                            rhs += model.apply_pairing(
                                Pairing::BracketQ,
                                p + 1,
                                q,
                                &model.apply_curvature(p, &phi),
                                &alpha,
                            );
                            residual = residual.max(max_abs(&(lhs - rhs)));
                        }
                    }
                }
                if any {
                    lines.push(CheckLine::measured(
                        "compatibility",
                        band_detail(model, band),
                        residual,
                        tol,
                    ));
                } else {
                    lines.push(CheckLine::vacuous("compatibility", "no admissible degrees".into()));
                }
            }
        }
    }

    // (1,0)-flatness:
    // phi.grad(psi.grad alpha) - (-1)^{pq} psi.grad(phi.grad alpha)
    //   = [phi, psi].grad alpha.
    {
        let mut any = false;
        match effective_band(budget_band(model, 3, 0), requested_band) {
            None => lines.push(CheckLine::band_overflow(
                "flatness_10",
                "requested band exceeds the exactness budget".into(),
            )),
            Some(band) => {
                let mut residual = 0.0f64;
                for p in 0..=n {
                    for q in 0..=n {
                        for s in 0..=n {
                            if p + q + s > n {
                                continue;
                            }
                            any = true;
                            for _ in 0..samples {
                                let phi = sample_vector(model, Sector::T, p, band, &mut rng);
                                let psi = sample_vector(model, Sector::T, q, band, &mut rng);
                                let alpha = sample_vector(model, Sector::Q, s, band, &mut rng);
                                let t1 = model.apply_pairing(
                                    Pairing::Conn10,
                                    p,
                                    q + s,
                                    &phi,
                                    &model.apply_pairing(Pairing::Conn10, q, s, &psi, &alpha),
                                );
                                let t2 = model.apply_pairing(
                                    Pairing::Conn10,
                                    q,
                                    p + s,
                                    &psi,
                                    &model.apply_pairing(Pairing::Conn10, p, s, &phi, &alpha),
                                );
                                let t3 = model.apply_pairing(
                                    Pairing::Conn10,
                                    p + q,
                                    s,
                                    &model.apply_pairing(Pairing::BracketT, p, q, &phi, &psi),
                                    &alpha,
                                );
                                let sign = if (p * q) % 2 == 1 { 1.0 } else { -1.0 };
                                let resid = t1 + t2 * c::<R>(sign, 0.0) - t3;
                                residual = residual.max(max_abs(&resid));
                            }
                        }
                    }
                }
                if any {
                    lines.push(CheckLine::measured(
                        "flatness_10",
                        band_detail(model, band),
                        residual,
                        tol,
                    ));
                } else {
                    lines.push(CheckLine::vacuous("flatness_10", "no admissible degrees".into()));
                }
            }
        }
    }

    // Gram matrices hermitian positive definite.
    {
        let mut residual = 0.0f64;
        let mut pd = true;
        for sector in Sector::ALL {
            for q in 0..=n {
                let g = model.gram(sector, q);
                if g.nrows() == 0 {
                    continue;
                }
                let herm = (&g - g.adjoint()).iter().map(cabs).fold(0.0, f64::max);
                residual = residual.max(herm);
                if nalgebra::Cholesky::new(g).is_none() {
                    pd = false;
                }
            }
        }
        let status = if pd && residual < tol {
            crate::report::Status::Pass
        } else {
            crate::report::Status::Fail
        };
        lines.push(CheckLine {
            name: "gram_positive".into(),
            detail: if pd { "Cholesky ok".into() } else { "not positive definite".into() },
            residual,
            status,
        });
    }

    CheckReport::new("model invariants", seed, samples, tol, lines)
}
