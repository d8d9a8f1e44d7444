//! The algebraic-side graded Lie algebra on first-order operators with
//! scalar principal symbol, and the intertwiner onto the extension sector.
//!
//! Elements are carried by their `(symbol, endomorphism)` data in the
//! global torus frame; transition-function compatibility is vacuous there.
//! The isomorphism reads `p = g + d  ->  (g - d . (du), d)` for the metric
//! `e^u` on the trivial bundle (the conjugate-metric correction reduces to
//! the potential derivative because `u` is real). In the constant-frame
//! decomposition the displayed three-term bracket (operator commutator
//! plus the two Lie-derivative terms, with the Lie derivative acting as
//! `i_X d' omega` on antiholomorphic forms) lands on the same kernels as
//! the extension-sector bracket; the metric content of the intertwiner
//! identity sits entirely in the isomorphism, and the check compares the
//! two bracket routes across it.

use nalgebra::DVector;

use crate::dgla::{AEForm, Dgla, DglaSector};
use crate::error::OpError;
use crate::model::{basis::hol_symbol, Pairing, Sector, SpectralModel};
use crate::report::{CheckLine, CheckReport};
use crate::sampling::{sample_vector, seeded_rng};
use crate::scalar::{c, cabs, czero, Real, C};

/// A (0,q)-form valued in first-order operators with scalar symbol:
/// tangent-sector symbol part, endomorphism-sector zeroth-order part.
#[derive(Debug, Clone, PartialEq)]
pub struct D1Element<R: Real = f64> {
    pub degree: usize,
    pub symbol: DVector<C<R>>,
    pub endo: DVector<C<R>>,
}

impl<R: Real> D1Element<R> {
    pub fn zero(model: &SpectralModel<R>, degree: usize) -> Self {
        D1Element {
            degree,
            symbol: DVector::from_element(model.dim(Sector::T, degree), czero()),
            endo: DVector::from_element(model.dim(Sector::Q, degree), czero()),
        }
    }

    pub fn norm(&self, model: &SpectralModel<R>) -> f64 {
        let ns = model.gram_norm(Sector::T, self.degree, &self.symbol);
        let ne = model.gram_norm(Sector::Q, self.degree, &self.endo);
        ns.hypot(ne)
    }
}

fn require_torus<R: Real>(model: &SpectralModel<R>) -> Result<(), OpError> {
    if model.is_torus() {
        Ok(())
    } else {
        Err(OpError::Model(
            "operator-side algebra needs a torus model with a global frame".into(),
        ))
    }
}

/// Contraction of a symbol part with the potential derivative:
/// `d . (du)`, a scalar function times the identity endomorphism.
fn symbol_du_contract<R: Real>(
    model: &SpectralModel<R>,
    degree: usize,
    symbol: &DVector<C<R>>,
) -> DVector<C<R>> {
    let torus = model.torus_data().expect("torus checked");
    let r = model.rank();
    let lay_t = model.layout(Sector::T, degree);
    let lay_q = model.layout(Sector::Q, degree);
    let mut out = DVector::from_element(model.dim(Sector::Q, degree), czero());
    for (idx, z) in symbol.iter().enumerate() {
        if cabs(z) == 0.0 {
            continue;
        }
        let (mono, j, mode_idx) = lay_t.decode(idx);
        let mode = torus.modes.mode(mode_idx);
        for (m, u_hat) in &torus.u_modes {
            let lam = hol_symbol::<R>(m, j);
            if cabs(&lam) == 0.0 && cabs(u_hat) == 0.0 {
                continue;
            }
            let sum = torus.modes.add(&mode, m);
            let Some(mode_out) = torus.modes.index(&sum) else {
                continue;
            };
            let val = *z * lam * *u_hat;
            for a in 0..r {
                out[lay_q.encode(mono, a * r + a, mode_out)] += val;
            }
        }
    }
    out
}

/// The isomorphism onto the extension sector:
/// `(g, d) -> (g - d . (du), d)`.
pub fn phi_iso<R: Real>(model: &SpectralModel<R>, p: &D1Element<R>) -> Result<AEForm<R>, OpError> {
    require_torus(model)?;
    let correction = symbol_du_contract(model, p.degree, &p.symbol);
    Ok(AEForm {
        degree: p.degree,
        a: &p.endo - correction,
        phi: p.symbol.clone(),
    })
}

/// Inverse isomorphism: `(A, phi) -> (A + phi . (du), phi)`.
pub fn phi_iso_inv<R: Real>(
    model: &SpectralModel<R>,
    w: &AEForm<R>,
) -> Result<D1Element<R>, OpError> {
    require_torus(model)?;
    let correction = symbol_du_contract(model, w.degree, &w.phi);
    Ok(D1Element {
        degree: w.degree,
        symbol: w.phi.clone(),
        endo: &w.a + correction,
    })
}

/// The graded bracket on operator-valued forms, realized in the
/// constant-frame decomposition:
/// endo part `d . d'(g') - (-1)^{pq} d' . d(g) + [g, g']`, symbol part the
/// tangent bracket.
pub fn bracket_d1<R: Real>(
    model: &SpectralModel<R>,
    x: &D1Element<R>,
    y: &D1Element<R>,
) -> Result<D1Element<R>, OpError> {
    require_torus(model)?;
    let (p, q) = (x.degree, y.degree);
    let sign = if (p * q) % 2 == 1 { -1.0 } else { 1.0 };
    let mut endo = model.apply_pairing(Pairing::Conn10, p, q, &x.symbol, &y.endo);
    endo += model
        .apply_pairing(Pairing::Conn10, q, p, &y.symbol, &x.endo)
        * c::<R>(-sign, 0.0);
    endo += model.apply_pairing(Pairing::BracketQ, p, q, &x.endo, &y.endo);
    let symbol = model.apply_pairing(Pairing::BracketT, p, q, &x.symbol, &y.symbol);
    Ok(D1Element {
        degree: p + q,
        symbol,
        endo,
    })
}

/// Sample a band-limited operator-valued form.
pub fn random_d1<R: Real>(
    model: &SpectralModel<R>,
    degree: usize,
    band: u32,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> D1Element<R> {
    D1Element {
        degree,
        symbol: sample_vector(model, Sector::T, degree, band, rng),
        endo: sample_vector(model, Sector::Q, degree, band, rng),
    }
}

/// Max residual of `Phi[x, y] = [Phi x, Phi y]` over seeded band-limited
/// pairs, per degree pair. The report echoes the metric potential.
pub fn intertwiner_check<R: Real>(
    model: &SpectralModel<R>,
    samples: usize,
    tol: f64,
    seed: u64,
) -> Result<CheckReport, OpError> {
    require_torus(model)?;
    let n = model.n();
    let k_cut = model.fourier_cutoff().unwrap_or(0);
    let band_u = model.metric_band();
    let mut rng = seeded_rng(seed);
    let dgla = Dgla::new(model, DglaSector::AE);
    let mut lines = Vec::new();

    let budget = k_cut as i64 - 2 * band_u as i64;
    if budget < 0 {
        lines.push(CheckLine::band_overflow(
            "intertwiner",
            "metric band exceeds the cutoff budget".into(),
        ));
        return Ok(CheckReport::new("bracket intertwiner", seed, samples, tol, lines));
    }
    let band = (budget as u32) / 2;

    let mut residual = 0.0f64;
    let mut any = false;
    for p in 0..=n {
        for q in 0..=n {
            if p + q > n {
                continue;
            }
            any = true;
            for _ in 0..samples {
                let x = random_d1(model, p, band, &mut rng);
                let y = random_d1(model, q, band, &mut rng);
                let lhs = phi_iso(model, &bracket_d1(model, &x, &y)?)?;
                let rhs_x = phi_iso(model, &x)?;
                let rhs_y = phi_iso(model, &y)?;
                let rhs = AEForm::from_concat(
                    model,
                    p + q,
                    &dgla.bracket(p, q, &rhs_x.concat(), &rhs_y.concat()),
                );
                let diff = lhs.concat() - rhs.concat();
                residual = residual.max(diff.iter().map(cabs).fold(0.0, f64::max));
            }
        }
    }
    if any {
        lines.push(CheckLine::measured(
            "intertwiner",
            format!("sample band {band}, metric band {band_u}"),
            residual,
            tol,
        ));
    } else {
        lines.push(CheckLine::vacuous("intertwiner", "no admissible degrees".into()));
    }
    Ok(CheckReport::new("bracket intertwiner", seed, samples, tol, lines))
}

/// Metric potential echo for the intertwiner report JSON.
pub fn metric_potential_echo<R: Real>(model: &SpectralModel<R>) -> serde_json::Value {
    let modes: Vec<serde_json::Value> = model
        .torus_data()
        .map(|t| {
            t.u_modes
                .iter()
                .map(|(m, z)| {
                    serde_json::json!({
                        "k": m,
                        "re": z.re.to_f64(),
                        "im": z.im.to_f64(),
                    })
                })
                .collect()
        })
        .unwrap_or_default();
    serde_json::json!(modes)
}
