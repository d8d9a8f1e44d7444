//! Finite spectral models of the geometric data a holomorphic pair lives on.
//!
//! A [`SpectralModel`] presents the complexes of (0,q)-forms valued in the
//! bundle `E`, its endomorphisms `Q = End(E)` and the tangent sheaf `T` by
//! explicit bases, together with the Dolbeault matrices, the
//! connection-contraction and curvature-contraction tensors, the graded
//! brackets and the L2 Gram pairings. The extension sector is derived from
//! `Q` and `T` plus the curvature coupling and lives in `dgla`.
//!
//! Two generators exist: flat-torus models (Fourier bases, exact tensors on
//! band-limited inputs) and abstract models (tensors installed verbatim).

pub mod basis;
pub mod io;
pub mod validate;

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::error::ModelError;
use crate::scalar::{c, cabs, czero, Real, C};
use basis::{antihol_symbol, hol_symbol, monomials, wedge_concat, wedge_left, ModeBox};

/// Sectors of the model: `E` itself, `Q = End(E)` and the tangent sector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Sector {
    E,
    Q,
    T,
}

impl Sector {
    pub const ALL: [Sector; 3] = [Sector::E, Sector::Q, Sector::T];

    pub fn name(&self) -> &'static str {
        match self {
            Sector::E => "E",
            Sector::Q => "Q",
            Sector::T => "T",
        }
    }
}

/// Bilinear pairings stored in a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Pairing {
    /// `(phi, alpha) -> phi . grad alpha` (T x Q -> Q).
    Conn10,
    /// Graded commutator on Q-valued forms.
    BracketQ,
    /// Extension of the Lie bracket to T-valued forms.
    BracketT,
}

impl Pairing {
    pub fn name(&self) -> &'static str {
        match self {
            Pairing::Conn10 => "conn10",
            Pairing::BracketQ => "bracket_Q",
            Pairing::BracketT => "bracket_T",
        }
    }

    pub fn input_sectors(&self) -> (Sector, Sector) {
        match self {
            Pairing::Conn10 => (Sector::T, Sector::Q),
            Pairing::BracketQ => (Sector::Q, Sector::Q),
            Pairing::BracketT => (Sector::T, Sector::T),
        }
    }

    pub fn output_sector(&self) -> Sector {
        match self {
            Pairing::Conn10 | Pairing::BracketQ => Sector::Q,
            Pairing::BracketT => Sector::T,
        }
    }
}

/// Explicit bilinear tensor: entries `(out, in1, in2, coeff)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseBilinear<R: Real = f64> {
    pub in1_dim: usize,
    pub in2_dim: usize,
    pub out_dim: usize,
    pub entries: Vec<(u32, u32, u32, C<R>)>,
}

impl<R: Real> SparseBilinear<R> {
    pub fn zero(in1_dim: usize, in2_dim: usize, out_dim: usize) -> Self {
        SparseBilinear {
            in1_dim,
            in2_dim,
            out_dim,
            entries: Vec::new(),
        }
    }

    pub fn apply(&self, x: &DVector<C<R>>, y: &DVector<C<R>>) -> DVector<C<R>> {
        debug_assert_eq!(x.len(), self.in1_dim);
        debug_assert_eq!(y.len(), self.in2_dim);
        let mut out = DVector::from_element(self.out_dim, czero());
        for &(o, i, j, coeff) in &self.entries {
            let xi = x[i as usize];
            if xi == czero() {
                continue;
            }
            let yj = y[j as usize];
            if yj == czero() {
                continue;
            }
            out[o as usize] += coeff * xi * yj;
        }
        out
    }
}

/// Fourier data of the torus generator.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusData<R: Real = f64> {
    pub k_cut: u32,
    pub modes: ModeBox,
    /// Fourier coefficients of the real metric potential `u`.
    pub u_modes: Vec<(Vec<i32>, C<R>)>,
    /// Central constant curvature injection, one complex scalar per
    /// complex dimension.
    pub twist: Vec<C<R>>,
    /// Fourier coefficients of the curvature functions `F_{ij}`, stored as
    /// `(i, j, mode, coeff)`.
    pub f_modes: Vec<(usize, usize, Vec<i32>, C<R>)>,
    /// Sup-norm band of the metric potential.
    pub band_u: u32,
}

/// Generator configuration.
#[derive(Debug, Clone)]
pub enum ModelConfig<R: Real = f64> {
    Torus {
        n: usize,
        r: usize,
        fourier_cutoff: u32,
        /// Fourier coefficients of the real potential `u` (conjugate
        /// symmetric: the coefficient at `-m` is the conjugate of the one
        /// at `m`).
        metric_potential: Vec<(Vec<i32>, C<R>)>,
        curvature_twist: Vec<C<R>>,
    },
    Abstract(Box<AbstractConfig<R>>),
}

/// Explicit tensors for an abstract model.
#[derive(Debug, Clone)]
pub struct AbstractConfig<R: Real = f64> {
    pub n: usize,
    pub r: usize,
    /// Per sector, dims at degrees `0..=n`.
    pub dims: BTreeMap<Sector, Vec<usize>>,
    /// Dolbeault matrices per sector and degree `0..n`.
    pub dbar: BTreeMap<(Sector, usize), DMatrix<C<R>>>,
    /// Curvature contraction per degree `0..n` (T_p -> Q_{p+1}).
    pub curvature: BTreeMap<usize, DMatrix<C<R>>>,
    /// Bilinear tensors per pairing and degree pair.
    pub pairings: BTreeMap<(Pairing, usize, usize), SparseBilinear<R>>,
    /// Gram matrices per sector and degree `0..=n`.
    pub gram: BTreeMap<(Sector, usize), DMatrix<C<R>>>,
}

/// A validated finite-dimensional presentation of the geometric data.
#[derive(Debug, Clone)]
pub struct SpectralModel<R: Real = f64> {
    n: usize,
    r: usize,
    torus: Option<TorusData<R>>,
    dims: BTreeMap<Sector, Vec<usize>>,
    dbar: BTreeMap<(Sector, usize), DMatrix<C<R>>>,
    curvature: BTreeMap<usize, DMatrix<C<R>>>,
    pairings: BTreeMap<(Pairing, usize, usize), SparseBilinear<R>>,
    gram: BTreeMap<(Sector, usize), DMatrix<C<R>>>,
}

impl<R: Real> SpectralModel<R> {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.r
    }

    pub fn is_torus(&self) -> bool {
        self.torus.is_some()
    }

    pub fn torus_data(&self) -> Option<&TorusData<R>> {
        self.torus.as_ref()
    }

    /// Fourier cutoff, `None` for abstract models.
    pub fn fourier_cutoff(&self) -> Option<u32> {
        self.torus.as_ref().map(|t| t.k_cut)
    }

    /// Band of the metric potential (0 for abstract or flat models).
    pub fn metric_band(&self) -> u32 {
        self.torus.as_ref().map(|t| t.band_u).unwrap_or(0)
    }

    /// Dimension of the model of `Omega^{0,q}(sector)`; zero above degree n.
    pub fn dim(&self, sector: Sector, q: usize) -> usize {
        if q > self.n {
            return 0;
        }
        self.dims[&sector][q]
    }

    /// Dimension of the extension sector `Q + T` at a degree.
    pub fn dim_ae(&self, q: usize) -> usize {
        self.dim(Sector::Q, q) + self.dim(Sector::T, q)
    }

    /// Dolbeault matrix from degree `q` to `q+1` (zero-row matrix at top
    /// degree).
    pub fn dbar(&self, sector: Sector, q: usize) -> DMatrix<C<R>> {
        if q >= self.n {
            return DMatrix::from_element(0, self.dim(sector, q), czero());
        }
        self.dbar[&(sector, q)].clone()
    }

    pub fn apply_dbar(&self, sector: Sector, q: usize, v: &DVector<C<R>>) -> DVector<C<R>> {
        if q >= self.n {
            return DVector::from_element(0, czero());
        }
        &self.dbar[&(sector, q)] * v
    }

    /// Curvature contraction `phi -> phi . F` at degree `p` (T_p -> Q_{p+1}).
    pub fn apply_curvature(&self, p: usize, v: &DVector<C<R>>) -> DVector<C<R>> {
        if p >= self.n {
            return DVector::from_element(0, czero());
        }
        &self.curvature[&p] * v
    }

    pub fn curvature_matrix(&self, p: usize) -> DMatrix<C<R>> {
        if p >= self.n {
            return DMatrix::from_element(0, self.dim(Sector::T, p), czero());
        }
        self.curvature[&p].clone()
    }

    /// Apply a bilinear pairing at degrees `(p, q)`; degrees past `n` clamp
    /// to the zero form.
    pub fn apply_pairing(
        &self,
        pairing: Pairing,
        p: usize,
        q: usize,
        x: &DVector<C<R>>,
        y: &DVector<C<R>>,
    ) -> DVector<C<R>> {
        let out_dim = self.dim(pairing.output_sector(), p + q);
        if out_dim == 0 {
            return DVector::from_element(0, czero());
        }
        if self.torus.is_some() {
            self.torus_pairing(pairing, p, q, x, y)
        } else {
            self.pairings[&(pairing, p, q)].apply(x, y)
        }
    }

    pub fn gram(&self, sector: Sector, q: usize) -> DMatrix<C<R>> {
        if q > self.n {
            return DMatrix::from_element(0, 0, czero());
        }
        self.gram[&(sector, q)].clone()
    }

    /// Gram pairing `<x, y>` on a sector/degree.
    pub fn gram_ip(&self, sector: Sector, q: usize, x: &DVector<C<R>>, y: &DVector<C<R>>) -> C<R> {
        if q > self.n {
            return czero();
        }
        let gx = &self.gram[&(sector, q)] * x;
        let mut acc = czero();
        for i in 0..gx.len() {
            acc += gx[i] * y[i].conj();
        }
        acc
    }

    pub fn gram_norm(&self, sector: Sector, q: usize, x: &DVector<C<R>>) -> f64 {
        let ip = self.gram_ip(sector, q, x, x);
        ip.re.to_f64().unwrap_or(f64::NAN).max(0.0).sqrt()
    }

    /// Measured sup-norm mode band of a coefficient vector (torus models).
    pub fn measured_band(&self, sector: Sector, q: usize, v: &DVector<C<R>>) -> Option<u32> {
        let torus = self.torus.as_ref()?;
        let layout = self.layout(sector, q);
        let mut band = 0u32;
        for (idx, z) in v.iter().enumerate() {
            if cabs(z) == 0.0 {
                continue;
            }
            let (_, _, mode_idx) = layout.decode(idx);
            band = band.max(ModeBox::band(&torus.modes.mode(mode_idx)));
        }
        Some(band)
    }

    /// Number of frame elements per sector.
    pub fn frames(&self, sector: Sector) -> usize {
        match sector {
            Sector::E => self.r,
            Sector::Q => self.r * self.r,
            Sector::T => self.n,
        }
    }

    /// Basis layout of a torus sector/degree.
    pub fn layout(&self, sector: Sector, q: usize) -> Layout {
        let torus = self.torus.as_ref().expect("layout requires torus model");
        Layout {
            n: self.n,
            frames: self.frames(sector),
            n_modes: torus.modes.count,
            q,
        }
    }

    /// Materialize a bilinear pairing as an explicit tensor (for export and
    /// for re-entering torus models as abstract ones). Intended for small
    /// models; cost is `dim1 * dim2` kernel applications.
    pub fn materialize_pairing(&self, pairing: Pairing, p: usize, q: usize) -> SparseBilinear<R> {
        let (s1, s2) = pairing.input_sectors();
        let (d1, d2) = (self.dim(s1, p), self.dim(s2, q));
        let out_dim = self.dim(pairing.output_sector(), p + q);
        let mut out = SparseBilinear::zero(d1, d2, out_dim);
        if out_dim == 0 {
            return out;
        }
        for i in 0..d1 {
            let mut x = DVector::from_element(d1, czero());
            x[i] = c(1.0, 0.0);
            for j in 0..d2 {
                let mut y = DVector::from_element(d2, czero());
                y[j] = c(1.0, 0.0);
                let w = self.apply_pairing(pairing, p, q, &x, &y);
                for (o, z) in w.iter().enumerate() {
                    if cabs(z) != 0.0 {
                        out.entries.push((o as u32, i as u32, j as u32, *z));
                    }
                }
            }
        }
        out
    }

    /// Re-enter this model as an abstract configuration (tensors expanded).
    pub fn to_abstract_config(&self) -> AbstractConfig<R> {
        let mut pairings = BTreeMap::new();
        for pairing in [Pairing::Conn10, Pairing::BracketQ, Pairing::BracketT] {
            for p in 0..=self.n {
                for q in 0..=self.n {
                    if p + q <= self.n {
                        pairings.insert((pairing, p, q), self.materialize_pairing(pairing, p, q));
                    }
                }
            }
        }
        let mut dbar = BTreeMap::new();
        let mut gram = BTreeMap::new();
        for sector in Sector::ALL {
            for q in 0..self.n {
                dbar.insert((sector, q), self.dbar(sector, q));
            }
            for q in 0..=self.n {
                gram.insert((sector, q), self.gram(sector, q));
            }
        }
        let mut curvature = BTreeMap::new();
        for p in 0..self.n {
            curvature.insert(p, self.curvature_matrix(p));
        }
        AbstractConfig {
            n: self.n,
            r: self.r,
            dims: self.dims.clone(),
            dbar,
            curvature,
            pairings,
            gram: gram.clone(),
        }
    }

    // ---- torus kernels ----------------------------------------------

    fn torus_pairing(
        &self,
        pairing: Pairing,
        p: usize,
        q: usize,
        x: &DVector<C<R>>,
        y: &DVector<C<R>>,
    ) -> DVector<C<R>> {
        let torus = self.torus.as_ref().unwrap();
        let (s1, s2) = pairing.input_sectors();
        let lay1 = self.layout(s1, p);
        let lay2 = self.layout(s2, q);
        let lay_out = self.layout(pairing.output_sector(), p + q);
        let out_dim = self.dim(pairing.output_sector(), p + q);
        let mut out = DVector::from_element(out_dim, czero());
        let monos_p = monomials(self.n, p);
        let monos_q = monomials(self.n, q);
        let r = self.r;
        for (i1, z1) in x.iter().enumerate() {
            if cabs(z1) == 0.0 {
                continue;
            }
            let (m1, f1, k1) = lay1.decode(i1);
            let mode1 = torus.modes.mode(k1);
            for (i2, z2) in y.iter().enumerate() {
                if cabs(z2) == 0.0 {
                    continue;
                }
                let (m2, f2, k2) = lay2.decode(i2);
                let mode2 = torus.modes.mode(k2);
                let sum = torus.modes.add(&mode1, &mode2);
                let Some(mode_out) = torus.modes.index(&sum) else {
                    continue; // band truncation
                };
                let coeff = *z1 * *z2;
                match pairing {
                    Pairing::Conn10 => {
                        // (f dzb^I x d_i) . d(A dzb^J) = f lam_i(k2) A dzb^I /\ dzb^J
                        if let Some((sign, mono_out)) =
                            wedge_concat(self.n, &monos_p[m1], &monos_q[m2])
                        {
                            let lam = hol_symbol::<R>(&mode2, f1);
                            let idx = lay_out.encode(mono_out, f2, mode_out);
                            out[idx] += coeff * lam * c(sign, 0.0);
                        }
                    }
                    Pairing::BracketT => {
                        // [f dzb^I d_i, g dzb^J d_j]
                        //   = f (d_i g) dzb^I/\dzb^J d_j
                        //     - (-1)^{pq} g (d_j f) dzb^J/\dzb^I d_i
                        let sign_pq = if (p * q) % 2 == 1 { -1.0 } else { 1.0 };
                        if let Some((sign, mono_out)) =
                            wedge_concat(self.n, &monos_p[m1], &monos_q[m2])
                        {
                            let lam = hol_symbol::<R>(&mode2, f1);
                            let idx = lay_out.encode(mono_out, f2, mode_out);
                            out[idx] += coeff * lam * c(sign, 0.0);
                        }
                        if let Some((sign, mono_out)) =
                            wedge_concat(self.n, &monos_q[m2], &monos_p[m1])
                        {
                            let lam = hol_symbol::<R>(&mode1, f2);
                            let idx = lay_out.encode(mono_out, f1, mode_out);
                            out[idx] += coeff * lam * c(-sign_pq * sign, 0.0);
                        }
                    }
                    Pairing::BracketQ => {
                        // [A dzb^I, B dzb^J] = AB dzb^I/\dzb^J
                        //                      - (-1)^{pq} BA dzb^J/\dzb^I
                        let sign_pq = if (p * q) % 2 == 1 { -1.0 } else { 1.0 };
                        let (a1, b1) = (f1 / r, f1 % r);
                        let (a2, b2) = (f2 / r, f2 % r);
                        if b1 == a2 {
                            if let Some((sign, mono_out)) =
                                wedge_concat(self.n, &monos_p[m1], &monos_q[m2])
                            {
                                let idx = lay_out.encode(mono_out, a1 * r + b2, mode_out);
                                out[idx] += coeff * c(sign, 0.0);
                            }
                        }
                        if b2 == a1 {
                            if let Some((sign, mono_out)) =
                                wedge_concat(self.n, &monos_q[m2], &monos_p[m1])
                            {
                                let idx = lay_out.encode(mono_out, a2 * r + b1, mode_out);
                                out[idx] += coeff * c(-sign_pq * sign, 0.0);
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

/// Index layout of one torus sector/degree: `(monomial, frame, mode)` with
/// the mode fastest.
#[derive(Debug, Clone, Copy)]
pub struct Layout {
    pub n: usize,
    pub frames: usize,
    pub n_modes: usize,
    pub q: usize,
}

impl Layout {
    pub fn dim(&self) -> usize {
        basis::num_monomials(self.n, self.q) * self.frames * self.n_modes
    }

    pub fn encode(&self, mono: usize, frame: usize, mode: usize) -> usize {
        (mono * self.frames + frame) * self.n_modes + mode
    }

    pub fn decode(&self, idx: usize) -> (usize, usize, usize) {
        let mode = idx % self.n_modes;
        let rest = idx / self.n_modes;
        (rest / self.frames, rest % self.frames, mode)
    }
}

/// Build a flat-torus model from Fourier data.
pub fn build_torus_model<R: Real>(cfg: &ModelConfig<R>) -> Result<SpectralModel<R>, ModelError> {
    let ModelConfig::Torus {
        n,
        r,
        fourier_cutoff,
        metric_potential,
        curvature_twist,
    } = cfg
    else {
        return Err(ModelError::Config("expected a torus config".into()));
    };
    let (n, r, k_cut) = (*n, *r, *fourier_cutoff);
    if n == 0 || n > 2 {
        return Err(ModelError::Unsupported(format!(
            "complex dimension n={n} (supported: 1, 2)"
        )));
    }
    if r < 1 {
        return Err(ModelError::Unsupported("bundle rank r=0".into()));
    }
    if curvature_twist.len() != n {
        return Err(ModelError::Config(format!(
            "curvature twist needs {n} entries, got {}",
            curvature_twist.len()
        )));
    }

    let modes = ModeBox::new(n, k_cut);

    // Metric potential: inside the band, conjugate-symmetric (u real).
    let mut band_u = 0u32;
    for (m, coeff) in metric_potential {
        if m.len() != 2 * n {
            return Err(ModelError::Config(format!(
                "potential mode has {} components, expected {}",
                m.len(),
                2 * n
            )));
        }
        if modes.index(m).is_none() {
            return Err(ModelError::Config(format!(
                "potential mode {m:?} outside the Fourier band K={k_cut}"
            )));
        }
        band_u = band_u.max(ModeBox::band(m));
        let neg: Vec<i32> = m.iter().map(|x| -x).collect();
        let conj_coeff = metric_potential
            .iter()
            .find(|(mm, _)| mm == &neg)
            .map(|(_, cc)| *cc)
            .unwrap_or_else(czero);
        if cabs(&(conj_coeff - coeff.conj())) > 1e-12 {
            return Err(ModelError::Config(
                "metric potential is not real (coefficients not conjugate-symmetric)".into(),
            ));
        }
    }

    // Curvature Fourier data: F_{ij} = -d^2 u / dz^i dzbar^j + c_i delta_ij.
    let mut f_modes: Vec<(usize, usize, Vec<i32>, C<R>)> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for (m, coeff) in metric_potential {
                let lam = hol_symbol::<R>(m, i);
                let mu = antihol_symbol::<R>(m, j);
                let val = -(lam * mu * *coeff);
                if cabs(&val) > 0.0 {
                    f_modes.push((i, j, m.clone(), val));
                }
            }
            if i == j && cabs(&curvature_twist[i]) > 0.0 {
                f_modes.push((i, j, vec![0; 2 * n], curvature_twist[i]));
            }
        }
    }

    let torus = TorusData {
        k_cut,
        modes: modes.clone(),
        u_modes: metric_potential.clone(),
        twist: curvature_twist.clone(),
        f_modes,
        band_u,
    };

    // Dims.
    let mut dims = BTreeMap::new();
    for sector in Sector::ALL {
        let frames = match sector {
            Sector::E => r,
            Sector::Q => r * r,
            Sector::T => n,
        };
        let v: Vec<usize> = (0..=n)
            .map(|q| basis::num_monomials(n, q) * frames * modes.count)
            .collect();
        dims.insert(sector, v);
    }

    // Dolbeault matrices: frames are constant, so dbar acts mode-wise.
    let mut dbar = BTreeMap::new();
    for sector in Sector::ALL {
        let frames = match sector {
            Sector::E => r,
            Sector::Q => r * r,
            Sector::T => n,
        };
        for q in 0..n {
            let lay_in = Layout {
                n,
                frames,
                n_modes: modes.count,
                q,
            };
            let lay_out = Layout {
                n,
                frames,
                n_modes: modes.count,
                q: q + 1,
            };
            let monos = monomials(n, q);
            let mut m = DMatrix::from_element(lay_out.dim(), lay_in.dim(), czero());
            for idx in 0..lay_in.dim() {
                let (mono, frame, mode_idx) = lay_in.decode(idx);
                let mode = modes.mode(mode_idx);
                for j in 0..n {
                    let mu = antihol_symbol::<R>(&mode, j);
                    if cabs(&mu) == 0.0 {
                        continue;
                    }
                    if let Some((sign, mono_out)) = wedge_left(n, j, &monos[mono]) {
                        let row = lay_out.encode(mono_out, frame, mode_idx);
                        m[(row, idx)] += mu * c::<R>(sign, 0.0);
                    }
                }
            }
            dbar.insert((sector, q), m);
        }
    }

    // Curvature contraction per degree p: T_p -> Q_{p+1},
    // phi . F = sum_j f F_{ij} dzb^J /\ dzb^j (x) identity.
    let mut curvature = BTreeMap::new();
    for p in 0..n {
        let lay_in = Layout {
            n,
            frames: n,
            n_modes: modes.count,
            q: p,
        };
        let lay_out = Layout {
            n,
            frames: r * r,
            n_modes: modes.count,
            q: p + 1,
        };
        let monos = monomials(n, p);
        let mut m = DMatrix::from_element(lay_out.dim(), lay_in.dim(), czero());
        for idx in 0..lay_in.dim() {
            let (mono, i_frame, mode_idx) = lay_in.decode(idx);
            let mode = modes.mode(mode_idx);
            for (fi, fj, fm, fc) in &torus.f_modes {
                if *fi != i_frame {
                    continue;
                }
                let sum = modes.add(&mode, fm);
                let Some(mode_out) = modes.index(&sum) else {
                    continue;
                };
                if let Some((sign, mono_out)) = wedge_concat(n, &monos[mono], &[*fj]) {
                    for a in 0..r {
                        let row = lay_out.encode(mono_out, a * r + a, mode_out);
                        m[(row, idx)] += *fc * c::<R>(sign, 0.0);
                    }
                }
            }
        }
        curvature.insert(p, m);
    }

    // Gram: the Hodge metric is the flat L2 pairing in which the
    // mode/frame/monomial basis is orthonormal.
    let mut gram = BTreeMap::new();
    for sector in Sector::ALL {
        for q in 0..=n {
            let d = dims[&sector][q];
            gram.insert((sector, q), DMatrix::identity(d, d));
        }
    }

    Ok(SpectralModel {
        n,
        r,
        torus: Some(torus),
        dims,
        dbar,
        curvature,
        pairings: BTreeMap::new(),
        gram,
    })
}

/// Install user tensors verbatim after shape checks.
pub fn build_abstract_model<R: Real>(cfg: &ModelConfig<R>) -> Result<SpectralModel<R>, ModelError> {
    let ModelConfig::Abstract(ac) = cfg else {
        return Err(ModelError::Config("expected an abstract config".into()));
    };
    let (n, r) = (ac.n, ac.r);
    if n == 0 || n > 2 {
        return Err(ModelError::Unsupported(format!(
            "complex dimension n={n} (supported: 1, 2)"
        )));
    }
    for sector in Sector::ALL {
        let dims = ac
            .dims
            .get(&sector)
            .ok_or_else(|| ModelError::Config(format!("missing dims for sector {}", sector.name())))?;
        if dims.len() != n + 1 {
            return Err(ModelError::Config(format!(
                "sector {} needs {} degree dims, got {}",
                sector.name(),
                n + 1,
                dims.len()
            )));
        }
        for q in 0..n {
            let m = ac.dbar.get(&(sector, q)).ok_or_else(|| {
                ModelError::Config(format!("missing dbar for {}, degree {q}", sector.name()))
            })?;
            if m.nrows() != dims[q + 1] || m.ncols() != dims[q] {
                return Err(ModelError::Config(format!(
                    "dbar shape mismatch for {} at degree {q}: {}x{} vs expected {}x{}",
                    sector.name(),
                    m.nrows(),
                    m.ncols(),
                    dims[q + 1],
                    dims[q]
                )));
            }
        }
        for q in 0..=n {
            let g = ac.gram.get(&(sector, q)).ok_or_else(|| {
                ModelError::Config(format!("missing gram for {}, degree {q}", sector.name()))
            })?;
            if g.nrows() != dims[q] || g.ncols() != dims[q] {
                return Err(ModelError::Config(format!(
                    "gram shape mismatch for {} at degree {q}",
                    sector.name()
                )));
            }
        }
    }
    for p in 0..n {
        let m = ac
            .curvature
            .get(&p)
            .ok_or_else(|| ModelError::Config(format!("missing curvature_contract at degree {p}")))?;
        if m.nrows() != ac.dims[&Sector::Q][p + 1] || m.ncols() != ac.dims[&Sector::T][p] {
            return Err(ModelError::Config(format!(
                "curvature_contract shape mismatch at degree {p}"
            )));
        }
    }
    for pairing in [Pairing::Conn10, Pairing::BracketQ, Pairing::BracketT] {
        let (s1, s2) = pairing.input_sectors();
        for p in 0..=n {
            for q in 0..=n {
                if p + q > n {
                    continue;
                }
                let t = ac.pairings.get(&(pairing, p, q)).ok_or_else(|| {
                    ModelError::Config(format!("missing {} at degrees ({p},{q})", pairing.name()))
                })?;
                if t.in1_dim != ac.dims[&s1][p]
                    || t.in2_dim != ac.dims[&s2][q]
                    || t.out_dim != ac.dims[&pairing.output_sector()][p + q]
                {
                    return Err(ModelError::Config(format!(
                        "{} shape mismatch at degrees ({p},{q})",
                        pairing.name()
                    )));
                }
            }
        }
    }
    Ok(SpectralModel {
        n,
        r,
        torus: None,
        dims: ac.dims.clone(),
        dbar: ac.dbar.clone(),
        curvature: ac.curvature.clone(),
        pairings: ac.pairings.clone(),
        gram: ac.gram.clone(),
    })
}

/// Build from either config kind.
pub fn build_model<R: Real>(cfg: &ModelConfig<R>) -> Result<SpectralModel<R>, ModelError> {
    match cfg {
        ModelConfig::Torus { .. } => build_torus_model(cfg),
        ModelConfig::Abstract(_) => build_abstract_model(cfg),
    }
}
