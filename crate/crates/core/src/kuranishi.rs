//! Order-by-order solution of the Kuranishi fixed-point equation
//! `eps = eps_1 - (1/2) adj G [eps, eps]`, the obstruction series, and the
//! characterizations that come with it.
//!
//! The base ring is nilpotent-truncated, so the order-k coefficient is
//! determined by lower orders and no contraction-mapping argument is
//! needed: re-running with a larger order extends, never changes, lower
//! coefficients. One solver serves the endomorphism, tangent and extension
//! sectors.

use nalgebra::{DMatrix, DVector};
use serde_json::{json, Value};

use crate::dgla::{AEForm, AESeriesForm, Dgla, DglaSector};
use crate::error::OpError;
use crate::hodge::HodgeData;
use crate::model::SpectralModel;
use crate::scalar::{c, cabs, Real, C};
use crate::series::{Exp, TruncatedSeries, VecSeries};

/// Solver output: directions, the series solution and its obstruction.
#[derive(Debug, Clone)]
pub struct KuranishiSolution<R: Real = f64> {
    pub sector: DglaSector,
    /// Degree-1 harmonic direction vectors (ambient coordinates, one per
    /// deformation parameter).
    pub eta: Vec<DVector<C<R>>>,
    /// Degree-1 series solution over the concatenated sector coordinates.
    pub epsilon: VecSeries<R>,
    /// Obstruction polynomial per canonical degree-2 harmonic coordinate.
    pub obstruction: Vec<TruncatedSeries<R>>,
    pub order: u32,
}

impl<R: Real> KuranishiSolution<R> {
    pub fn num_params(&self) -> usize {
        self.eta.len()
    }

    /// Whether every obstruction coordinate vanishes below a tolerance.
    pub fn obstruction_is_zero(&self, tol: f64) -> bool {
        self.obstruction.iter().all(|s| s.max_abs() < tol)
    }

    /// The extension-sector solution as a pair series form.
    pub fn epsilon_ae(&self, model: &SpectralModel<R>) -> AESeriesForm<R> {
        debug_assert_eq!(self.sector, DglaSector::AE);
        AESeriesForm::from_series(model, 1, self.epsilon.clone())
    }

    pub fn to_json(&self, model: &SpectralModel<R>) -> Value {
        let eta: Vec<Value> = self
            .eta
            .iter()
            .map(|v| match self.sector {
                DglaSector::AE => AEForm::from_concat(model, 1, v).to_json(),
                _ => json!({
                    "degree": 1,
                    "sector": self.sector.name(),
                    "coeffs": v.iter()
                        .map(|z| json!({"re": z.re.to_f64(), "im": z.im.to_f64()}))
                        .collect::<Vec<_>>(),
                }),
            })
            .collect();
        let epsilon = match self.sector {
            DglaSector::AE => AESeriesForm::from_series(model, 1, self.epsilon.clone()).to_json(),
            _ => {
                let comps: Vec<Value> = (0..self.epsilon.dim())
                    .map(|i| self.epsilon.component(i).to_json())
                    .collect();
                json!({"degree": 1, "sector": self.sector.name(), "coeffs": comps})
            }
        };
        json!({
            "eta": eta,
            "epsilon": epsilon,
            "obstruction": self.obstruction.iter().enumerate().map(|(i, s)| json!({
                "h2_index": i,
                "poly": s.to_json(),
            })).collect::<Vec<_>>(),
            "order": self.order,
        })
    }
}

fn band_overflow_check<R: Real>(
    dgla: &Dgla<'_, R>,
    bands: &[Option<u32>],
    k: usize,
    out_dim: usize,
) -> Result<(), OpError> {
    let Some(cutoff) = dgla.model.fourier_cutoff() else {
        return Ok(());
    };
    if out_dim == 0 {
        return Ok(());
    }
    for i in 1..k {
        let j = k - i;
        match (bands.get(i).copied().flatten(), bands.get(j).copied().flatten()) {
            (Some(bi), Some(bj)) if bi + bj > cutoff => {
                return Err(OpError::BandOverflow { order: k });
            }
            _ => {}
        }
    }
    Ok(())
}

/// Solve the fixed-point equation from an arbitrary degree-1 seed series.
/// Order-k output is `seed_k - (1/2) adj G (order-k part of [eps, eps])`.
pub fn solve_from_seed<R: Real>(
    dgla: &Dgla<'_, R>,
    hodge: &HodgeData<R>,
    seed: &VecSeries<R>,
    order: u32,
) -> Result<VecSeries<R>, OpError> {
    let sector_hodge = hodge.sector(dgla.sector);
    let dim1 = dgla.dim(1);
    let dim2 = dgla.dim(2);
    if seed.dim() != dim1 {
        return Err(OpError::Shape(format!(
            "seed dimension {} does not match degree-1 space (dim {dim1})",
            seed.dim()
        )));
    }
    let mut eps = VecSeries::zero(seed.num_params(), order, dim1);
    for (e, v) in seed.terms() {
        eps.add_term(e.clone(), v);
    }
    if dim2 == 0 {
        return Ok(eps); // top degree: the bracket lands in the zero space
    }
    let correction: DMatrix<C<R>> =
        (&sector_hodge.adjoint[1] * &sector_hodge.green[2]) * c::<R>(-0.5, 0.0);

    // Bands of the homogeneous parts seen so far (torus models only).
    let mut bands: Vec<Option<u32>> = vec![None; order as usize + 1];
    let measure = |vs: &VecSeries<R>, deg: u32| -> Option<u32> {
        let mut band = 0u32;
        let mut seen = false;
        for (e, v) in vs.terms() {
            if e.total_degree() == deg {
                seen = true;
                band = band.max(dgla.measured_band(1, v)?);
            }
        }
        if seen {
            Some(band)
        } else {
            Some(0)
        }
    };
    bands[1] = measure(&eps, 1);

    for k in 2..=order {
        band_overflow_check(dgla, &bands, k as usize, dim2)?;
        let sk = VecSeries::convolve(&eps, &eps, dim2, Some(k), |x, y| dgla.bracket(1, 1, x, y));
        for (e, v) in sk.terms() {
            eps.add_term(e.clone(), &(&correction * v));
        }
        eps.prune();
        bands[k as usize] = measure(&eps, k);
    }
    Ok(eps)
}

/// Coordinates of `H[eps, eps]` in the canonical degree-2 harmonic basis.
pub fn obstruction_series<R: Real>(
    dgla: &Dgla<'_, R>,
    hodge: &HodgeData<R>,
    eps: &VecSeries<R>,
) -> Vec<TruncatedSeries<R>> {
    let sector_hodge = hodge.sector(dgla.sector);
    let h2_basis = &sector_hodge.harmonic[2.min(sector_hodge.harmonic.len() - 1)];
    if dgla.dim(2) == 0 || h2_basis.is_empty() {
        return Vec::new();
    }
    let bracket = VecSeries::convolve(eps, eps, dgla.dim(2), None, |x, y| {
        dgla.bracket(1, 1, x, y)
    });
    let mut out =
        vec![TruncatedSeries::zero(eps.num_params(), eps.max_degree()); h2_basis.len()];
    for (e, v) in bracket.terms() {
        for (i, eta2) in h2_basis.iter().enumerate() {
            // The basis is orthonormal and harmonic, so pairing against it
            // already implements the harmonic projection.
            out[i].add_term(e.clone(), dgla.gram_ip(2, v, eta2));
        }
    }
    out
}

/// Solve the Kuranishi equation on a sector from chosen harmonic
/// directions (`None` takes the full canonical degree-1 harmonic basis).
pub fn solve_kuranishi_sector<R: Real>(
    model: &SpectralModel<R>,
    hodge: &HodgeData<R>,
    sector: DglaSector,
    directions: Option<&[usize]>,
    order: u32,
) -> Result<KuranishiSolution<R>, OpError> {
    if order < 1 {
        return Err(OpError::Precondition("order must be at least 1".into()));
    }
    let dgla = Dgla::new(model, sector);
    let sector_hodge = hodge.sector(sector);
    let basis = &sector_hodge.harmonic[1];
    let eta: Vec<DVector<C<R>>> = match directions {
        None => basis.clone(),
        Some(idx) => {
            let mut out = Vec::with_capacity(idx.len());
            for &i in idx {
                let v = basis.get(i).ok_or_else(|| {
                    OpError::Shape(format!(
                        "direction index {i} out of range (H^1 dim {})",
                        basis.len()
                    ))
                })?;
                out.push(v.clone());
            }
            out
        }
    };
    let m = eta.len();
    let mut seed = VecSeries::zero(m, order, dgla.dim(1));
    for (j, v) in eta.iter().enumerate() {
        seed.add_term(Exp::unit(m, j), v);
    }
    let epsilon = solve_from_seed(&dgla, hodge, &seed, order)?;
    let obstruction = obstruction_series(&dgla, hodge, &epsilon);
    Ok(KuranishiSolution {
        sector,
        eta,
        epsilon,
        obstruction,
        order,
    })
}

/// Extension-sector Kuranishi solve.
pub fn solve_kuranishi<R: Real>(
    model: &SpectralModel<R>,
    hodge: &HodgeData<R>,
    directions: Option<&[usize]>,
    order: u32,
) -> Result<KuranishiSolution<R>, OpError> {
    solve_kuranishi_sector(model, hodge, DglaSector::AE, directions, order)
}

/// Recompute the obstruction coordinates of a solution.
pub fn obstruction_map<R: Real>(
    model: &SpectralModel<R>,
    hodge: &HodgeData<R>,
    sol: &KuranishiSolution<R>,
) -> Vec<TruncatedSeries<R>> {
    let dgla = Dgla::new(model, sol.sector);
    obstruction_series(&dgla, hodge, &sol.epsilon)
}

/// Residuals of the three solution invariants, as max coefficient moduli:
/// linear term against the seed, coclosedness, and the fixed-point
/// equation.
#[derive(Debug, Clone)]
pub struct SolutionInvariants {
    pub linear_term: f64,
    pub coclosed: f64,
    pub fixed_point: f64,
}

pub fn solution_invariants<R: Real>(
    model: &SpectralModel<R>,
    hodge: &HodgeData<R>,
    sol: &KuranishiSolution<R>,
) -> SolutionInvariants {
    let dgla = Dgla::new(model, sol.sector);
    let sector_hodge = hodge.sector(sol.sector);
    let m = sol.num_params();

    let mut linear_term = 0.0f64;
    for (j, v) in sol.eta.iter().enumerate() {
        let diff = sol.epsilon.coefficient(&Exp::unit(m, j)) - v;
        linear_term = linear_term.max(diff.iter().map(cabs).fold(0.0, f64::max));
    }
    for (e, v) in sol.epsilon.terms() {
        if e.total_degree() == 1 && !sol.eta.iter().enumerate().any(|(j, _)| e == &Exp::unit(m, j))
        {
            linear_term = linear_term.max(v.iter().map(cabs).fold(0.0, f64::max));
        }
    }

    let adj = &sector_hodge.adjoint[0];
    let coclosed = sol
        .epsilon
        .map_linear(dgla.dim(0), |v| adj * v)
        .max_abs();

    let dim2 = dgla.dim(2);
    let fixed_point = if dim2 == 0 {
        let mut seed = VecSeries::zero(m, sol.order, dgla.dim(1));
        for (j, v) in sol.eta.iter().enumerate() {
            seed.add_term(Exp::unit(m, j), v);
        }
        sol.epsilon.max_diff(&seed)
    } else {
        let bracket = VecSeries::convolve(&sol.epsilon, &sol.epsilon, dim2, None, |x, y| {
            dgla.bracket(1, 1, x, y)
        });
        let correction_mat = &sector_hodge.adjoint[1] * &sector_hodge.green[2];
        let correction = bracket
            .map_linear(dgla.dim(1), |v| &correction_mat * v)
            .scale(c::<R>(0.5, 0.0));
        let mut rhs = VecSeries::zero(m, sol.order, dgla.dim(1));
        for (j, v) in sol.eta.iter().enumerate() {
            rhs.add_term(Exp::unit(m, j), v);
        }
        let lhs = sol.epsilon.add(&correction);
        lhs.max_diff(&rhs)
    };

    SolutionInvariants {
        linear_term,
        coclosed,
        fixed_point,
    }
}

/// Report of a Maurer-Cartan point check.
#[derive(Debug, Clone)]
pub struct McCheckReport {
    pub t_point: Vec<(f64, f64)>,
    pub mc_norm: f64,
    pub h_bracket_norm: f64,
    pub tol: f64,
    /// `C * |t|^{N+1}` with `C` the measured norm of the order-N
    /// coefficient block.
    pub truncation_budget: f64,
    pub order_n_coeff_norm: f64,
    /// Both norms fall under `tol + budget`, or both exceed it.
    pub consistent: bool,
}

impl McCheckReport {
    pub fn to_json(&self) -> Value {
        json!({
            "t_point": self.t_point.iter().map(|(re, im)| json!({"re": re, "im": im})).collect::<Vec<_>>(),
            "mc_residual_norm": self.mc_norm,
            "h_bracket_norm": self.h_bracket_norm,
            "tol": self.tol,
            "truncation_budget": self.truncation_budget,
            "order_n_coeff_norm": self.order_n_coeff_norm,
            "consistent": self.consistent,
        })
    }
}

/// Evaluate the solution at a parameter point and compare the vanishing of
/// the Maurer-Cartan residual with the vanishing of `H[eps, eps]`
/// (both should vanish together).
pub fn mc_check<R: Real>(
    model: &SpectralModel<R>,
    hodge: &HodgeData<R>,
    sol: &KuranishiSolution<R>,
    t_point: &[C<R>],
    tol: f64,
) -> Result<McCheckReport, OpError> {
    if t_point.len() != sol.num_params() {
        return Err(OpError::Shape(format!(
            "t point has {} entries, solution has {} parameters",
            t_point.len(),
            sol.num_params()
        )));
    }
    let dgla = Dgla::new(model, sol.sector);
    let sector_hodge = hodge.sector(sol.sector);
    let eps_t = sol.epsilon.eval(t_point);

    // Maurer-Cartan residual at the point.
    let mut resid = dgla.apply_dbar(1, &eps_t);
    if dgla.dim(2) > 0 {
        resid += dgla.bracket(1, 1, &eps_t, &eps_t) * c::<R>(0.5, 0.0);
    }
    let mc_norm = dgla.gram_norm(2, &resid);

    // Harmonic part of the bracket.
    let h_norm = if dgla.dim(2) > 0 {
        let br = dgla.bracket(1, 1, &eps_t, &eps_t);
        dgla.gram_norm(2, &(&sector_hodge.h_proj[2] * br))
    } else {
        0.0
    };

    let t_sup = t_point.iter().map(cabs).fold(0.0f64, f64::max);
    let order_n = sol.epsilon.homogeneous(sol.order);
    let mut order_n_norm = 0.0f64;
    for (_, v) in order_n.terms() {
        order_n_norm += dgla.gram_norm(1, v);
    }
    let budget = order_n_norm * t_sup.powi(sol.order as i32 + 1);
    let threshold = tol + budget;
    let consistent = (mc_norm < threshold) == (h_norm < threshold);

    Ok(McCheckReport {
        t_point: t_point
            .iter()
            .map(|z| (z.re.to_f64().unwrap_or(0.0), z.im.to_f64().unwrap_or(0.0)))
            .collect(),
        mc_norm,
        h_bracket_norm: h_norm,
        tol,
        truncation_budget: budget,
        order_n_coeff_norm: order_n_norm,
        consistent,
    })
}

/// Outcome of the completeness identity check.
#[derive(Debug, Clone)]
pub enum CompletenessOutcome {
    /// Identity verified; both residuals and the resolve round trip.
    Verified {
        identity_residual: f64,
        resolve_max_diff: f64,
    },
    NotCoclosed { residual: f64 },
    NotMaurerCartan { residual: f64 },
}

impl CompletenessOutcome {
    pub fn passed(&self, tol: f64) -> bool {
        match self {
            CompletenessOutcome::Verified {
                identity_residual,
                resolve_max_diff,
            } => *identity_residual < tol && *resolve_max_diff < tol,
            _ => false,
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            CompletenessOutcome::Verified {
                identity_residual,
                resolve_max_diff,
            } => json!({
                "status": "verified",
                "identity_residual": identity_residual,
                "resolve_max_diff": resolve_max_diff,
            }),
            CompletenessOutcome::NotCoclosed { residual } => {
                json!({"status": "not coclosed", "residual": residual})
            }
            CompletenessOutcome::NotMaurerCartan { residual } => {
                json!({"status": "not MC", "residual": residual})
            }
        }
    }
}

/// Check that a coclosed Maurer-Cartan solution satisfies
/// `eps = H eps - (1/2) adj G [eps, eps]` and that re-solving from its
/// harmonic part reproduces it coefficient-wise (the small-solution
/// uniqueness statement at finite order).
pub fn completeness_check<R: Real>(
    model: &SpectralModel<R>,
    hodge: &HodgeData<R>,
    eps_prime: &AESeriesForm<R>,
    tol: f64,
) -> Result<CompletenessOutcome, OpError> {
    if eps_prime.degree != 1 {
        return Err(OpError::Shape("completeness check needs a degree-1 form".into()));
    }
    let dgla = Dgla::new(model, DglaSector::AE);
    let sector_hodge = hodge.sector(DglaSector::AE);
    let eps = eps_prime.series();

    // Precondition: coclosed.
    let adj0 = &sector_hodge.adjoint[0];
    let coclosed = eps.map_linear(dgla.dim(0), |v| adj0 * v).max_abs();
    if coclosed >= tol {
        return Ok(CompletenessOutcome::NotCoclosed { residual: coclosed });
    }

    // Precondition: Maurer-Cartan as a series.
    let mc = crate::dgla::mc_residual(model, eps_prime)?;
    let mc_resid = mc.series().max_abs();
    if mc_resid >= tol {
        return Ok(CompletenessOutcome::NotMaurerCartan { residual: mc_resid });
    }

    // Identity eps = H eps - (1/2) adj G [eps, eps].
    let h1 = &sector_hodge.h_proj[1];
    let h_eps = eps.map_linear(dgla.dim(1), |v| h1 * v);
    let dim2 = dgla.dim(2);
    let rhs = if dim2 == 0 {
        h_eps.clone()
    } else {
        let bracket = VecSeries::convolve(eps, eps, dim2, None, |x, y| dgla.bracket(1, 1, x, y));
        let corr_mat = (&sector_hodge.adjoint[1] * &sector_hodge.green[2]) * c::<R>(-0.5, 0.0);
        h_eps.add(&bracket.map_linear(dgla.dim(1), |v| &corr_mat * v))
    };
    let identity_residual = eps.max_diff(&rhs);

    // Re-solve from the harmonic part.
    let resolved = solve_from_seed(&dgla, hodge, &h_eps, eps.max_degree())?;
    let resolve_max_diff = resolved.max_diff(eps);

    Ok(CompletenessOutcome::Verified {
        identity_residual,
        resolve_max_diff,
    })
}

/// Coordinates of a closed degree-1 pair form in the canonical harmonic
/// basis; two closed forms get equal coordinates exactly when they differ
/// by an exact form.
pub fn first_order_class<R: Real>(
    model: &SpectralModel<R>,
    hodge: &HodgeData<R>,
    w: &AEForm<R>,
    tol: f64,
) -> Result<Vec<C<R>>, OpError> {
    if w.degree != 1 {
        return Err(OpError::Shape("first-order classes live in degree 1".into()));
    }
    let dgla = Dgla::new(model, DglaSector::AE);
    let v = w.concat();
    let closed_resid = dgla.gram_norm(2, &dgla.apply_dbar(1, &v));
    let scale = dgla.gram_norm(1, &v).max(1.0);
    if closed_resid > tol * scale {
        return Err(OpError::NotClosed(format!(
            "dbar residual {closed_resid:.3e} exceeds tolerance"
        )));
    }
    let basis = &hodge.sector(DglaSector::AE).harmonic[1];
    Ok(basis.iter().map(|eta| dgla.gram_ip(1, &v, eta)).collect())
}

/// Format class coordinates the way reports print them: components below
/// 1e-12 snap to zero, then 12 significant digits. Gauge-equivalent
/// representatives format identically.
pub fn format_class<R: Real>(coords: &[C<R>]) -> Vec<String> {
    let snap = |x: f64| if x.abs() < 1e-12 { 0.0 } else { x };
    coords
        .iter()
        .map(|z| {
            format!(
                "{:+.12e}{:+.12e}i",
                snap(z.re.to_f64().unwrap_or(0.0)),
                snap(z.im.to_f64().unwrap_or(0.0))
            )
        })
        .collect()
}
