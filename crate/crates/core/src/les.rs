//! The long exact sequence of the extension, its connecting map, and the
//! obstruction diagram.
//!
//! The short exact sequence of complexes `0 -> Q -> Q + T -> T -> 0`
//! induces maps between harmonic spaces: inclusion `iota(A) = (A, 0)`,
//! projection `pi(A, phi) = phi`, and the connecting map realized on
//! harmonic representatives by the curvature coupling,
//! `delta(phi) = H(B /\ phi)` (contraction with the curvature class up to
//! the ledger sign). Exactness is checked by rank-nullity at every node,
//! and the three sector obstruction maps are compared on the diagram at
//! sampled parameter points.

use nalgebra::{DMatrix, DVector};
use serde_json::{json, Value};

use crate::dgla::{Dgla, DglaSector};
use crate::error::OpError;
use crate::hodge::HodgeData;
use crate::kuranishi::KuranishiSolution;
use crate::model::{Sector, SpectralModel};
use crate::scalar::{c, cabs, czero, Real, C};
use crate::series::TruncatedSeries;

/// Rank tolerance for the numeric rank computations.
const RANK_EPS: f64 = 1e-8;

/// Harmonic-basis matrices of the sequence maps.
#[derive(Debug, Clone)]
pub struct LESData<R: Real = f64> {
    /// `iota[q]`: H^q(Q) -> H^q(A(E)).
    pub iota: Vec<DMatrix<C<R>>>,
    /// `pi[q]`: H^q(A(E)) -> H^q(T).
    pub pi: Vec<DMatrix<C<R>>>,
    /// `delta[q]`: H^q(T) -> H^{q+1}(Q).
    pub delta: Vec<DMatrix<C<R>>>,
}

fn coords<R: Real>(
    dgla: &Dgla<'_, R>,
    q: usize,
    basis: &[DVector<C<R>>],
    v: &DVector<C<R>>,
) -> DVector<C<R>> {
    DVector::from_iterator(basis.len(), basis.iter().map(|eta| dgla.gram_ip(q, v, eta)))
}

/// The curvature coupling `B /\ phi = -(-1)^q phi . F` at degree q.
pub fn curvature_coupling<R: Real>(
    model: &SpectralModel<R>,
    q: usize,
    phi: &DVector<C<R>>,
) -> DVector<C<R>> {
    let sign = if q % 2 == 0 { -1.0 } else { 1.0 };
    model.apply_curvature(q, phi) * c::<R>(sign, 0.0)
}

/// Build the sequence maps in the canonical harmonic bases.
pub fn les_maps<R: Real>(model: &SpectralModel<R>, hodge: &HodgeData<R>) -> LESData<R> {
    let n = model.n();
    let dgla_q = Dgla::new(model, DglaSector::Q);
    let dgla_t = Dgla::new(model, DglaSector::T);
    let dgla_ae = Dgla::new(model, DglaSector::AE);
    let hq = &hodge.q_sector.harmonic;
    let ht = &hodge.t_sector.harmonic;
    let hae = &hodge.ae_sector.harmonic;

    let mut iota = Vec::new();
    let mut pi = Vec::new();
    let mut delta = Vec::new();
    for q in 0..=n {
        // iota: include a harmonic Q-representative as (A, 0), project.
        let mut m = DMatrix::from_element(hae[q].len(), hq[q].len(), czero());
        for (j, eta) in hq[q].iter().enumerate() {
            let mut amb = DVector::from_element(model.dim_ae(q), czero());
            amb.rows_mut(0, eta.len()).copy_from(eta);
            let proj = &hodge.ae_sector.h_proj[q] * amb;
            m.set_column(j, &coords(&dgla_ae, q, &hae[q], &proj));
        }
        iota.push(m);

        // pi: tangent component of a harmonic pair representative.
        let mut m = DMatrix::from_element(ht[q].len(), hae[q].len(), czero());
        let dq = model.dim(Sector::Q, q);
        for (j, eta) in hae[q].iter().enumerate() {
            let phi = eta.rows(dq, eta.len() - dq).into_owned();
            let proj = &hodge.t_sector.h_proj[q] * phi;
            m.set_column(j, &coords(&dgla_t, q, &ht[q], &proj));
        }
        pi.push(m);

        // delta: connecting map via the curvature coupling.
        let target = if q + 1 <= n { hq[q + 1].len() } else { 0 };
        let mut m = DMatrix::from_element(target, ht[q].len(), czero());
        if target > 0 {
            for (j, eta) in ht[q].iter().enumerate() {
                let coupled = curvature_coupling(model, q, eta);
                let proj = &hodge.q_sector.h_proj[q + 1] * coupled;
                m.set_column(j, &coords(&dgla_q, q + 1, &hq[q + 1], &proj));
            }
        }
        delta.push(m);
    }
    LESData { iota, pi, delta }
}

/// One node of the exactness report.
#[derive(Debug, Clone)]
pub struct LESNode {
    pub node: String,
    pub dim: usize,
    pub rank_in: usize,
    pub dim_ker: usize,
    pub residual: f64,
    pub exact: bool,
}

/// Exactness report over all interior nodes.
#[derive(Debug, Clone)]
pub struct LESReport {
    pub nodes: Vec<LESNode>,
    pub pass: bool,
}

impl LESReport {
    pub fn to_json(&self) -> Value {
        json!(self
            .nodes
            .iter()
            .map(|n| json!({
                "node": n.node,
                "dim": n.dim,
                "rank_in": n.rank_in,
                "dim_ker": n.dim_ker,
                "residual": n.residual,
                "exact": n.exact,
            }))
            .collect::<Vec<_>>())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("node          dim  rank_in  dim_ker     residual  exact\n");
        for n in &self.nodes {
            out.push_str(&format!(
                "{:<12} {:>4} {:>8} {:>8} {:>12.3e}  {}\n",
                n.node, n.dim, n.rank_in, n.dim_ker, n.residual, n.exact
            ));
        }
        out
    }
}

fn rank<R: Real>(m: &DMatrix<C<R>>) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    m.clone().rank(R::from_f64_lossy(RANK_EPS))
}

fn max_entry<R: Real>(m: &DMatrix<C<R>>) -> f64 {
    m.iter().map(cabs).fold(0.0, f64::max)
}

/// Verify image = kernel at every interior node by rank-nullity plus the
/// composite-residual test.
pub fn exactness_check<R: Real>(les: &LESData<R>, tol: f64) -> LESReport {
    let n = les.iota.len() - 1;
    let mut nodes = Vec::new();
    let zero = |rows: usize, cols: usize| DMatrix::<C<R>>::from_element(rows, cols, czero());
    for q in 0..=n {
        // Node H^q(Q): incoming delta_{q-1} (zero for q = 0), outgoing iota_q.
        let incoming = if q == 0 {
            zero(les.iota[q].ncols(), 0)
        } else {
            les.delta[q - 1].clone()
        };
        let outgoing = &les.iota[q];
        nodes.push(node_check(&format!("H{q}(Q)"), &incoming, outgoing, tol));

        // Node H^q(A(E)): incoming iota_q, outgoing pi_q.
        nodes.push(node_check(
            &format!("H{q}(A(E))"),
            &les.iota[q],
            &les.pi[q],
            tol,
        ));

        // Node H^q(T): incoming pi_q, outgoing delta_q.
        nodes.push(node_check(&format!("H{q}(T)"), &les.pi[q], &les.delta[q], tol));
    }
    let pass = nodes.iter().all(|n| n.exact);
    LESReport { nodes, pass }
}

fn node_check<R: Real>(
    name: &str,
    incoming: &DMatrix<C<R>>,
    outgoing: &DMatrix<C<R>>,
    tol: f64,
) -> LESNode {
    let dim = outgoing.ncols();
    let rank_in = rank(incoming);
    let dim_ker = dim - rank(outgoing);
    let residual = if incoming.ncols() == 0 || outgoing.nrows() == 0 {
        0.0
    } else {
        max_entry(&(outgoing * incoming))
    };
    LESNode {
        node: name.to_string(),
        dim,
        rank_in,
        dim_ker,
        residual,
        exact: rank_in == dim_ker && residual < tol,
    }
}

/// Verdict of the surjectivity-based unobstructedness criterion.
#[derive(Debug, Clone)]
pub struct UnobstructedReport {
    pub delta1_rank: usize,
    pub h2_q_dim: usize,
    pub delta1_surjective: bool,
    /// Tangent-sector obstruction vanishes through the solve order.
    pub t_obstruction_zero: bool,
    pub criterion_satisfied: bool,
    /// Direct extension-sector obstruction vanishes through the order.
    pub ae_obstruction_zero: bool,
    pub order: u32,
    pub note: String,
}

impl UnobstructedReport {
    pub fn to_json(&self) -> Value {
        json!({
            "delta1_rank": self.delta1_rank,
            "h2_q_dim": self.h2_q_dim,
            "delta1_surjective": self.delta1_surjective,
            "t_obstruction_zero": self.t_obstruction_zero,
            "criterion_satisfied": self.criterion_satisfied,
            "ae_obstruction_zero": self.ae_obstruction_zero,
            "order": self.order,
            "note": self.note,
        })
    }
}

/// Evidence for the criterion: the connecting map at degree 1 surjective
/// and the tangent-sector obstruction vanishing imply the pair obstruction
/// vanishes; the direct solve is reported alongside. The criterion is
/// sufficient, not necessary, and the note says which side failed.
pub fn unobstructed_criterion<R: Real>(
    model: &SpectralModel<R>,
    hodge: &HodgeData<R>,
    les: &LESData<R>,
    sol_t: &KuranishiSolution<R>,
    sol_ae: &KuranishiSolution<R>,
    tol: f64,
) -> UnobstructedReport {
    let _ = (model, hodge);
    let h2_q_dim = les.delta[1].nrows();
    let delta1_rank = rank(&les.delta[1]);
    let delta1_surjective = delta1_rank == h2_q_dim;
    let t_obstruction_zero = sol_t.obstruction_is_zero(tol);
    let criterion_satisfied = delta1_surjective && t_obstruction_zero;
    let ae_obstruction_zero = sol_ae.obstruction_is_zero(tol);
    let note = if criterion_satisfied && ae_obstruction_zero {
        "criterion satisfied; direct obstruction vanishes as implied".to_string()
    } else if criterion_satisfied && !ae_obstruction_zero {
        "criterion satisfied but direct obstruction nonzero: inconsistency".to_string()
    } else if ae_obstruction_zero {
        "criterion not satisfied, yet direct obstruction vanishes (criterion is sufficient, not necessary)".to_string()
    } else {
        "criterion not satisfied and direct obstruction nonzero".to_string()
    };
    UnobstructedReport {
        delta1_rank,
        h2_q_dim,
        delta1_surjective,
        t_obstruction_zero,
        criterion_satisfied,
        ae_obstruction_zero,
        order: sol_ae.order,
        note,
    }
}

/// Numeric commutativity of the obstruction diagram at one parameter point.
#[derive(Debug, Clone)]
pub struct DiagramReport {
    pub iota_path_norm: f64,
    pub iota_direct_norm: f64,
    pub iota_residual: f64,
    pub pi_path_norm: f64,
    pub pi_direct_norm: f64,
    pub pi_residual: f64,
    pub budget: f64,
    pub pass: bool,
}

impl DiagramReport {
    pub fn to_json(&self) -> Value {
        json!({
            "iota_path_norm": self.iota_path_norm,
            "iota_direct_norm": self.iota_direct_norm,
            "iota_residual": self.iota_residual,
            "pi_path_norm": self.pi_path_norm,
            "pi_direct_norm": self.pi_direct_norm,
            "pi_residual": self.pi_residual,
            "budget": self.budget,
            "pass": self.pass,
        })
    }
}

fn eval_obstruction<R: Real>(
    obstruction: &[TruncatedSeries<R>],
    t: &[C<R>],
) -> DVector<C<R>> {
    DVector::from_iterator(obstruction.len(), obstruction.iter().map(|s| s.eval(t)))
}

/// Check that the three sector obstruction maps commute with the sequence
/// maps at a parameter point. `sol_q` directions must be the first block
/// of `sol_ae` directions under `iota`, and `sol_t` directions the last
/// block under `pi` (checked; violations are reported as errors).
#[allow(clippy::too_many_arguments)]
pub fn obstruction_diagram_check<R: Real>(
    model: &SpectralModel<R>,
    hodge: &HodgeData<R>,
    les: &LESData<R>,
    sol_q: &KuranishiSolution<R>,
    sol_ae: &KuranishiSolution<R>,
    sol_t: &KuranishiSolution<R>,
    t_point: &[C<R>],
    tol: f64,
) -> Result<DiagramReport, OpError> {
    let m_q = sol_q.num_params();
    let m_t = sol_t.num_params();
    if sol_ae.num_params() != m_q + m_t {
        return Err(OpError::Shape(format!(
            "incompatible bases: extension solve has {} directions, sectors have {} + {}",
            sol_ae.num_params(),
            m_q,
            m_t
        )));
    }
    if t_point.len() != m_q + m_t {
        return Err(OpError::Shape("t point length mismatch".into()));
    }
    let dgla_ae = Dgla::new(model, DglaSector::AE);
    let dim_q1 = model.dim(Sector::Q, 1);

    // Compatibility: the extension directions are harmonic lifts of the
    // sector directions.
    for (j, eta_q) in sol_q.eta.iter().enumerate() {
        let mut amb = DVector::from_element(model.dim_ae(1), czero());
        amb.rows_mut(0, dim_q1).copy_from(eta_q);
        let lifted = &hodge.ae_sector.h_proj[1] * amb;
        let diff = (&lifted - &sol_ae.eta[j]).iter().map(cabs).fold(0.0, f64::max);
        if diff > 1e-8 {
            return Err(OpError::Shape(format!(
                "incompatible bases: extension direction {j} is not the lift of the Q direction"
            )));
        }
    }
    for (j, eta_t) in sol_t.eta.iter().enumerate() {
        let mut amb = DVector::from_element(model.dim_ae(1), czero());
        amb.rows_mut(dim_q1, eta_t.len()).copy_from(eta_t);
        let lifted = &hodge.ae_sector.h_proj[1] * amb;
        let diff = (&lifted - &sol_ae.eta[m_q + j])
            .iter()
            .map(cabs)
            .fold(0.0, f64::max);
        if diff > 1e-8 {
            return Err(OpError::Shape(format!(
                "incompatible bases: extension direction {} is not the lift of the T direction {j}",
                m_q + j
            )));
        }
    }

    let t_q: Vec<C<R>> = t_point[..m_q].to_vec();
    let t_t: Vec<C<R>> = t_point[m_q..].to_vec();
    let zero_t = vec![czero::<R>(); m_t];
    let zero_q = vec![czero::<R>(); m_q];

    // iota side: iota(Ob_E(t_q)) vs Ob_AE(t_q, 0).
    let ob_e = eval_obstruction(&sol_q.obstruction, &t_q);
    let iota_path = &les.iota[2] * ob_e;
    let mut t_ae: Vec<C<R>> = t_q.clone();
    t_ae.extend_from_slice(&zero_t);
    let iota_direct = eval_obstruction(&sol_ae.obstruction, &t_ae);
    let iota_residual = (&iota_path - &iota_direct)
        .iter()
        .map(cabs)
        .fold(0.0, f64::max);

    // pi side: pi(Ob_AE(0, t_t)) vs Ob_X(t_t).
    let mut t_ae: Vec<C<R>> = zero_q.clone();
    t_ae.extend_from_slice(&t_t);
    let ob_ae = eval_obstruction(&sol_ae.obstruction, &t_ae);
    let pi_path = &les.pi[2] * ob_ae;
    let pi_direct = eval_obstruction(&sol_t.obstruction, &t_t);
    let pi_residual = (&pi_path - &pi_direct)
        .iter()
        .map(cabs)
        .fold(0.0, f64::max);

    // Truncation budget from the order-N blocks of the three solves.
    let t_sup = t_point.iter().map(cabs).fold(0.0f64, f64::max);
    let mut coeff_norm = 0.0f64;
    for sol in [sol_q, sol_ae, sol_t] {
        let sector = Dgla::new(model, sol.sector);
        for (_, v) in sol.epsilon.homogeneous(sol.order).terms() {
            coeff_norm += sector.gram_norm(1, v);
        }
    }
    let budget = coeff_norm * t_sup.powi(sol_ae.order as i32 + 1);
    let _ = dgla_ae;

    let norm = |v: &DVector<C<R>>| v.iter().map(cabs).fold(0.0, f64::max);
    let pass = iota_residual < tol + budget && pi_residual < tol + budget;
    Ok(DiagramReport {
        iota_path_norm: norm(&iota_path),
        iota_direct_norm: norm(&iota_direct),
        iota_residual,
        pi_path_norm: norm(&pi_path),
        pi_direct_norm: norm(&pi_direct),
        pi_residual,
        budget,
        pass,
    })
}

/// Max modulus of the fiberwise trace of the endomorphism-sector
/// obstruction (torus models): commutators are trace-free, so the
/// obstruction lies in the trace-free part.
pub fn q_obstruction_trace_residual<R: Real>(
    model: &SpectralModel<R>,
    hodge: &HodgeData<R>,
    sol_q: &KuranishiSolution<R>,
) -> Option<f64> {
    model.torus_data()?;
    let r = model.rank();
    let layout = model.layout(Sector::Q, 2);
    let basis = &hodge.q_sector.harmonic[2];
    let mut residual = 0.0f64;
    for (i, series) in sol_q.obstruction.iter().enumerate() {
        let eta = &basis[i];
        // Trace of the ambient representative, weighted by the series
        // coefficient with the largest modulus.
        let mut trace_amp = 0.0f64;
        for idx in 0..eta.len() {
            let (mono, frame, mode) = layout.decode(idx);
            if frame / r == frame % r {
                // Accumulate per (monomial, mode) diagonal sums.
                let mut tr = czero::<R>();
                for a in 0..r {
                    tr += eta[layout.encode(mono, a * r + a, mode)];
                }
                trace_amp = trace_amp.max(cabs(&tr));
            }
        }
        residual = residual.max(trace_amp * series.max_abs());
    }
    Some(residual)
}
