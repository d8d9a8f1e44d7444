//! Finite-dimensional Hodge theory per sector and degree.
//!
//! For each of the three DGLA sectors the builder produces the adjoint of
//! the differential with respect to the Gram pairing, the Laplacian, the
//! orthogonal harmonic projector `H`, and the Green operator `G` defined as
//! the pseudo-inverse of the Laplacian off its kernel, so that
//! `I = H + Lap G = H + G Lap`, `G` commutes with the differential and its
//! adjoint, and `H G = G H = 0`.
//!
//! Kernels are detected by a relative eigenvalue cutoff. Harmonic bases are
//! canonicalized (reduced echelon form of the kernel subspace followed by
//! Gram-Schmidt), so basis vectors are deterministic: sector blocks keep Q
//! before T, and within a block the first nonzero basis coefficient rules.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use serde_json::{json, Value};

use crate::dgla::{AEForm, Dgla, DglaSector};
use crate::error::{ModelError, OpError};
use crate::model::SpectralModel;
use crate::report::{CheckLine, CheckReport};
use crate::scalar::{cabs, czero, Real, C};

/// Relative eigenvalue threshold deciding kernel membership.
pub const KERNEL_CUTOFF: f64 = 1e-8;

/// Operators of one sector at all degrees.
#[derive(Debug, Clone)]
pub struct SectorHodge<R: Real = f64> {
    pub dims: Vec<usize>,
    /// `adjoint[q]`: the adjoint of the degree-q differential, mapping
    /// (q+1)-forms to q-forms.
    pub adjoint: Vec<DMatrix<C<R>>>,
    pub laplacian: Vec<DMatrix<C<R>>>,
    pub h_proj: Vec<DMatrix<C<R>>>,
    pub green: Vec<DMatrix<C<R>>>,
    /// Canonical Gram-orthonormal harmonic basis per degree.
    pub harmonic: Vec<Vec<DVector<C<R>>>>,
}

impl<R: Real> SectorHodge<R> {
    pub fn kernel_dim(&self, q: usize) -> usize {
        self.harmonic.get(q).map(Vec::len).unwrap_or(0)
    }
}

/// Hodge data for the Q, T and extension sectors of one model.
#[derive(Debug, Clone)]
pub struct HodgeData<R: Real = f64> {
    pub kernel_cutoff: f64,
    pub q_sector: SectorHodge<R>,
    pub t_sector: SectorHodge<R>,
    pub ae_sector: SectorHodge<R>,
}

impl<R: Real> HodgeData<R> {
    pub fn sector(&self, s: DglaSector) -> &SectorHodge<R> {
        match s {
            DglaSector::Q => &self.q_sector,
            DglaSector::T => &self.t_sector,
            DglaSector::AE => &self.ae_sector,
        }
    }
}

/// Which operator to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HodgeOp {
    Harmonic,
    Green,
    Adjoint,
}

fn upper_inverse<R: Real>(u: &DMatrix<C<R>>) -> DMatrix<C<R>> {
    let n = u.nrows();
    u.solve_upper_triangular(&DMatrix::identity(n, n))
        .expect("triangular inverse")
}

/// Cholesky that actually verifies positive definiteness: the complex
/// factorization happily takes square roots of negative pivots, so the
/// reconstruction is checked explicitly.
fn checked_cholesky<R: Real>(g: &DMatrix<C<R>>) -> Option<Cholesky<C<R>, nalgebra::Dyn>> {
    let herm = (g - g.adjoint()).iter().map(cabs).fold(0.0, f64::max);
    let scale = g.iter().map(cabs).fold(0.0, f64::max).max(1.0);
    if herm > 1e-8 * scale {
        return None;
    }
    let chol = Cholesky::new(g.clone())?;
    let l = chol.l();
    for i in 0..l.nrows() {
        let d = l[(i, i)].re.to_f64().unwrap_or(f64::NAN);
        if !(d > 0.0) || !d.is_finite() {
            return None;
        }
    }
    let recon = (&l * l.adjoint() - g).iter().map(cabs).fold(0.0, f64::max);
    if recon > 1e-8 * scale {
        return None;
    }
    Some(chol)
}

/// Build the Hodge package of one sector.
fn build_sector<R: Real>(
    dgla: &Dgla<'_, R>,
    cutoff: f64,
) -> Result<SectorHodge<R>, ModelError> {
    let n = dgla.n();
    let dims: Vec<usize> = (0..=n).map(|q| dgla.dim(q)).collect();

    // Adjoints from the Gram pairings: adj_q = G_q^{-1} dbar_q^H G_{q+1}.
    let mut adjoint = Vec::new();
    let mut chol_l: Vec<DMatrix<C<R>>> = Vec::new();
    let mut chol_linv_h: Vec<DMatrix<C<R>>> = Vec::new();
    let mut chols = Vec::new();
    for q in 0..=n {
        let g = dgla.gram(q);
        if g.nrows() == 0 {
            chol_l.push(DMatrix::from_element(0, 0, czero()));
            chol_linv_h.push(DMatrix::from_element(0, 0, czero()));
            chols.push(None);
            continue;
        }
        let chol = checked_cholesky(&g).ok_or_else(|| {
            ModelError::Model(format!(
                "Gram matrix not positive definite in sector {} at degree {q}",
                dgla.sector.name()
            ))
        })?;
        let l = chol.l();
        chol_linv_h.push(upper_inverse(&l.adjoint()));
        chol_l.push(l);
        chols.push(Some(chol));
    }
    for q in 0..n {
        let d = dgla.dbar_matrix(q);
        let g_out = dgla.gram(q + 1);
        let adj = match &chols[q] {
            Some(chol) => chol.solve(&(d.adjoint() * g_out)),
            None => DMatrix::from_element(dims[q], dims[q + 1], czero()),
        };
        adjoint.push(adj);
    }

    let mut laplacian = Vec::new();
    for q in 0..=n {
        let mut lap = DMatrix::from_element(dims[q], dims[q], czero());
        if q < n {
            lap += &adjoint[q] * dgla.dbar_matrix(q);
        }
        if q > 0 {
            lap += dgla.dbar_matrix(q - 1) * &adjoint[q - 1];
        }
        laplacian.push(lap);
    }

    let mut h_proj = Vec::new();
    let mut green = Vec::new();
    let mut harmonic = Vec::new();
    for q in 0..=n {
        let dim = dims[q];
        if dim == 0 {
            h_proj.push(DMatrix::from_element(0, 0, czero()));
            green.push(DMatrix::from_element(0, 0, czero()));
            harmonic.push(Vec::new());
            continue;
        }
        // Transform to Gram-orthonormal coordinates, where the Laplacian is
        // hermitian, then split off the kernel by the relative eigenvalue
        // cutoff. The projector comes from the kernel eigenvectors; the
        // Green operator from a Cholesky solve of (Lap + H), which inverts
        // the Laplacian off its kernel and kills the kernel:
        // G = (Lap + H)^{-1} (I - H).
        let lh = chol_l[q].adjoint();
        let linv_h = &chol_linv_h[q];
        let mut b = &lh * &laplacian[q] * linv_h;
        let bh = b.adjoint();
        b = (&b + bh) * C::new(R::from_f64_lossy(0.5), R::zero());
        let eig = SymmetricEigen::new(b.clone());
        let lam_max = eig
            .eigenvalues
            .iter()
            .map(|x| x.to_f64().unwrap_or(0.0))
            .fold(0.0f64, f64::max);
        let kernel_cols: Vec<usize> = (0..dim)
            .filter(|&i| eig.eigenvalues[i].to_f64().unwrap_or(0.0) <= cutoff * lam_max)
            .collect();
        let mut u0 = DMatrix::from_element(dim, kernel_cols.len(), czero());
        for (j, &i) in kernel_cols.iter().enumerate() {
            u0.set_column(j, &eig.eigenvectors.column(i));
        }
        // The eigensolver's vectors are only good to ~1e-9 on clustered
        // complex spectra; polish the kernel subspace by orthogonal
        // iteration with (I + c Lap)^{-1}, which contracts everything
        // outside the kernel by 1/(1 + c lam).
        if !kernel_cols.is_empty() && kernel_cols.len() < dim {
            let lam2 = (0..dim)
                .map(|i| eig.eigenvalues[i].to_f64().unwrap_or(0.0))
                .filter(|&l| l > cutoff * lam_max)
                .fold(f64::INFINITY, f64::min);
            if lam2.is_finite() && lam2 > 0.0 {
                let c_shift = R::from_f64_lossy(4.0 / lam2);
                let shifted = DMatrix::<C<R>>::identity(dim, dim)
                    + &b * C::new(c_shift, R::zero());
                if let Some(chol) = Cholesky::new(shifted) {
                    for _ in 0..30 {
                        u0 = chol.solve(&u0);
                        orthonormalize_columns(&mut u0);
                    }
                }
            }
        }
        let h_tilde = &u0 * u0.adjoint();
        let eye = DMatrix::<C<R>>::identity(dim, dim);
        let g_tilde = match Cholesky::new(&b + &h_tilde) {
            Some(chol) => chol.solve(&(&eye - &h_tilde)),
            None => {
                return Err(ModelError::Model(format!(
                    "Laplacian plus projector not invertible in sector {} at degree {q}",
                    dgla.sector.name()
                )))
            }
        };
        h_proj.push(linv_h * &h_tilde * &lh);
        green.push(linv_h * &g_tilde * &lh);

        // Kernel vectors back in ambient coordinates, then canonicalized.
        let kernel_vecs: Vec<DVector<C<R>>> = (0..u0.ncols())
            .map(|j| linv_h * u0.column(j).into_owned())
            .collect();
        harmonic.push(canonical_basis(dgla, q, kernel_vecs));
    }

    Ok(SectorHodge {
        dims,
        adjoint,
        laplacian,
        h_proj,
        green,
        harmonic,
    })
}

/// Modified Gram-Schmidt on the columns (plain hermitian inner product).
fn orthonormalize_columns<R: Real>(m: &mut DMatrix<C<R>>) {
    let cols = m.ncols();
    for j in 0..cols {
        for i in 0..j {
            let vi = m.column(i).into_owned();
            let dot = vi.dotc(&m.column(j).into_owned());
            let vj = m.column(j).into_owned() - &vi * dot;
            m.set_column(j, &vj);
        }
        let norm = m.column(j).norm();
        if norm > R::from_f64_lossy(1e-300) {
            let scaled = m.column(j).into_owned() / C::new(norm, R::zero());
            m.set_column(j, &scaled);
        }
    }
}

/// Deterministic basis of a subspace: reduced echelon form over the span,
/// then Gram-Schmidt in the sector pairing.
fn canonical_basis<R: Real>(
    dgla: &Dgla<'_, R>,
    q: usize,
    vecs: Vec<DVector<C<R>>>,
) -> Vec<DVector<C<R>>> {
    if vecs.is_empty() {
        return vecs;
    }
    let dim = vecs[0].len();
    let mut rows: Vec<DVector<C<R>>> = vecs;
    let scale = rows
        .iter()
        .flat_map(|v| v.iter().map(cabs))
        .fold(0.0f64, f64::max);
    let tol = 1e-8 * scale.max(1.0);
    let mut pivots: Vec<(usize, usize)> = Vec::new(); // (col, row)
    let mut used = vec![false; rows.len()];
    for col in 0..dim {
        // Best unused row for this column.
        let mut best: Option<(usize, f64)> = None;
        for (ri, row) in rows.iter().enumerate() {
            if used[ri] {
                continue;
            }
            let a = cabs(&row[col]);
            if a > tol && best.map(|(_, b)| a > b).unwrap_or(true) {
                best = Some((ri, a));
            }
        }
        let Some((ri, _)) = best else { continue };
        used[ri] = true;
        pivots.push((col, ri));
        let inv = C::new(R::one(), R::zero()) / rows[ri][col];
        rows[ri] = &rows[ri] * inv;
        let pivot_row = rows[ri].clone();
        for (rj, row) in rows.iter_mut().enumerate() {
            if rj == ri {
                continue;
            }
            let f = row[col];
            if cabs(&f) > 0.0 {
                *row -= &pivot_row * f;
            }
        }
    }
    pivots.sort_by_key(|&(col, _)| col);
    let ordered: Vec<DVector<C<R>>> = pivots.iter().map(|&(_, ri)| rows[ri].clone()).collect();

    // Gram-Schmidt in the sector pairing, order preserved.
    let mut out: Vec<DVector<C<R>>> = Vec::new();
    for mut v in ordered {
        for w in &out {
            let coeff = dgla.gram_ip(q, &v, w);
            v -= w * coeff;
        }
        let norm = dgla.gram_norm(q, &v);
        if norm > 1e-12 {
            let inv = C::new(R::from_f64_lossy(1.0 / norm), R::zero());
            out.push(&v * inv);
        }
    }
    out
}

/// Build Hodge data for the Q, T and extension sectors; reports kernel
/// dimensions through [`HodgeData`] and fails if a Gram pairing is not
/// positive definite.
pub fn build_hodge<R: Real>(model: &SpectralModel<R>) -> Result<HodgeData<R>, ModelError> {
    let q_sector = build_sector(&Dgla::new(model, DglaSector::Q), KERNEL_CUTOFF)?;
    let t_sector = build_sector(&Dgla::new(model, DglaSector::T), KERNEL_CUTOFF)?;
    let ae_sector = build_sector(&Dgla::new(model, DglaSector::AE), KERNEL_CUTOFF)?;
    Ok(HodgeData {
        kernel_cutoff: KERNEL_CUTOFF,
        q_sector,
        t_sector,
        ae_sector,
    })
}

/// Apply `H`, `G` or the adjoint to a coefficient vector of a given degree.
pub fn hodge_apply<R: Real>(
    hodge: &HodgeData<R>,
    sector: DglaSector,
    op: HodgeOp,
    degree: usize,
    v: &DVector<C<R>>,
) -> Result<DVector<C<R>>, OpError> {
    let s = hodge.sector(sector);
    let check = |expected: usize| -> Result<(), OpError> {
        if v.len() != expected {
            Err(OpError::Shape(format!(
                "vector length {} does not match sector {} degree {degree} (dim {expected})",
                v.len(),
                sector.name()
            )))
        } else {
            Ok(())
        }
    };
    match op {
        HodgeOp::Harmonic => {
            let m = s.h_proj.get(degree).ok_or_else(|| {
                OpError::Shape(format!("degree {degree} out of range for H"))
            })?;
            check(m.ncols())?;
            Ok(m * v)
        }
        HodgeOp::Green => {
            let m = s.green.get(degree).ok_or_else(|| {
                OpError::Shape(format!("degree {degree} out of range for G"))
            })?;
            check(m.ncols())?;
            Ok(m * v)
        }
        HodgeOp::Adjoint => {
            if degree == 0 {
                return Err(OpError::Shape("adjoint undefined on degree 0".into()));
            }
            let m = s.adjoint.get(degree - 1).ok_or_else(|| {
                OpError::Shape(format!("degree {degree} out of range for the adjoint"))
            })?;
            check(m.ncols())?;
            Ok(m * v)
        }
    }
}

/// Harmonic projection of a pair form.
pub fn harmonic_ae<R: Real>(
    model: &SpectralModel<R>,
    hodge: &HodgeData<R>,
    w: &AEForm<R>,
) -> AEForm<R> {
    let v = hodge_apply(hodge, DglaSector::AE, HodgeOp::Harmonic, w.degree, &w.concat())
        .expect("shape checked by construction");
    AEForm::from_concat(model, w.degree, &v)
}

/// Cohomology dimension table (kernel of the Laplacian per sector/degree),
/// plus the deterministically ordered harmonic basis of the extension
/// sector.
#[derive(Debug, Clone)]
pub struct CohomologyTable<R: Real = f64> {
    pub rows: Vec<(DglaSector, usize, usize)>,
    pub ae_harmonic: Vec<Vec<AEForm<R>>>,
}

pub fn cohomology_dims<R: Real>(
    model: &SpectralModel<R>,
    hodge: &HodgeData<R>,
) -> CohomologyTable<R> {
    let mut rows = Vec::new();
    for sector in [DglaSector::Q, DglaSector::T, DglaSector::AE] {
        let s = hodge.sector(sector);
        for q in 0..s.dims.len() {
            rows.push((sector, q, s.kernel_dim(q)));
        }
    }
    let ae_harmonic = hodge
        .ae_sector
        .harmonic
        .iter()
        .enumerate()
        .map(|(q, basis)| {
            basis
                .iter()
                .map(|v| AEForm::from_concat(model, q, v))
                .collect()
        })
        .collect();
    CohomologyTable { rows, ae_harmonic }
}

impl<R: Real> CohomologyTable<R> {
    pub fn dim(&self, sector: DglaSector, q: usize) -> usize {
        self.rows
            .iter()
            .find(|(s, d, _)| *s == sector && *d == q)
            .map(|(_, _, dim)| *dim)
            .unwrap_or(0)
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|(s, q, dim)| json!({"sector": s.name(), "q": q, "dim": dim}))
            .collect();
        json!(rows)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("sector      q   dim\n");
        for (s, q, dim) in &self.rows {
            out.push_str(&format!("{:<10} {:>2} {:>5}\n", s.name(), q, dim));
        }
        out
    }
}

/// Measure the Hodge identities on every sector and degree:
/// `H^2 = H`, self-adjointness of `H`, `I = H + Lap G = H + G Lap`,
/// `HG = GH = 0`, and commutation of `G` with the differential and the
/// adjoint.
pub fn validate_hodge<R: Real>(
    model: &SpectralModel<R>,
    hodge: &HodgeData<R>,
    tol: f64,
) -> CheckReport {
    let mut lines = Vec::new();
    let n = model.n();
    for sector in [DglaSector::Q, DglaSector::T, DglaSector::AE] {
        let dgla = Dgla::new(model, sector);
        let s = hodge.sector(sector);
        let mut idempotent = 0.0f64;
        let mut selfadj = 0.0f64;
        let mut identity = 0.0f64;
        let mut hg = 0.0f64;
        let mut commute = 0.0f64;
        for q in 0..=n {
            let dim = s.dims[q];
            if dim == 0 {
                continue;
            }
            let h = &s.h_proj[q];
            let g = &s.green[q];
            let lap = &s.laplacian[q];
            let max_entry = |m: &DMatrix<C<R>>| m.iter().map(cabs).fold(0.0f64, f64::max);
            idempotent = idempotent.max(max_entry(&(h * h - h)));
            // Self-adjointness w.r.t. the Gram pairing: Gram * H hermitian.
            let gm = dgla.gram(q);
            let gh = &gm * h;
            selfadj = selfadj.max(max_entry(&(&gh - gh.adjoint())));
            let eye = DMatrix::<C<R>>::identity(dim, dim);
            identity = identity.max(max_entry(&(&eye - h - lap * g)));
            identity = identity.max(max_entry(&(&eye - h - g * lap)));
            hg = hg.max(max_entry(&(h * g))).max(max_entry(&(g * h)));
            if q < n {
                let d = dgla.dbar_matrix(q);
                let g_up = &s.green[q + 1];
                commute = commute.max(max_entry(&(g_up * &d - &d * g)));
                let adj = &s.adjoint[q];
                commute = commute.max(max_entry(&(g * adj - adj * g_up)));
            }
        }
        let name = sector.name();
        lines.push(CheckLine::measured("h_idempotent", name.into(), idempotent, tol));
        lines.push(CheckLine::measured("h_self_adjoint", name.into(), selfadj, tol));
        lines.push(CheckLine::measured("identity_decomposition", name.into(), identity, tol));
        lines.push(CheckLine::measured("hg_zero", name.into(), hg, tol));
        lines.push(CheckLine::measured("g_commutes", name.into(), commute, tol));
    }
    CheckReport::new("hodge identities", 0, 0, tol, lines)
}
