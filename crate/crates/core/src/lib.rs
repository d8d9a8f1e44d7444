//! Desk-scale deformation theory of holomorphic pairs on finite spectral
//! models.
//!
//! The crate builds finite-dimensional presentations of the Dolbeault
//! complexes attached to a pair (manifold, bundle), assembles the extension
//! DGLA that governs pair deformations, runs Hodge theory on it, solves the
//! Kuranishi fixed-point equation order by order over a truncated parameter
//! ring, and verifies the algebraic identities of the theory numerically:
//! bracket axioms, the two-component Maurer-Cartan split, the long exact
//! sequence with its connecting map, the obstruction diagram, and the
//! operator-side bracket intertwiner.
//!
//! Everything is generic over the real scalar (`f32` / `f64`); the `f64`
//! instantiations are aliased below and are what the CLI uses.

pub mod d1;
pub mod dgla;
pub mod error;
pub mod hodge;
pub mod kuranishi;
pub mod les;
pub mod model;
pub mod report;
pub mod sampling;
pub mod scalar;
pub mod series;

pub use error::{ModelError, OpError, SeriesError};
pub use scalar::{Real, C};

/// `f64` instantiations of the main types.
pub type TruncatedSeries64 = series::TruncatedSeries<f64>;
pub type VecSeries64 = series::VecSeries<f64>;
pub type SpectralModel64 = model::SpectralModel<f64>;
pub type ModelConfig64 = model::ModelConfig<f64>;
pub type AEForm64 = dgla::AEForm<f64>;
pub type AESeriesForm64 = dgla::AESeriesForm<f64>;
pub type HodgeData64 = hodge::HodgeData<f64>;
pub type KuranishiSolution64 = kuranishi::KuranishiSolution<f64>;
pub type LESData64 = les::LESData<f64>;
pub type D1Element64 = d1::D1Element<f64>;

/// `f32` instantiations (reduced-precision smoke use).
pub type SpectralModel32 = model::SpectralModel<f32>;
pub type TruncatedSeries32 = series::TruncatedSeries<f32>;

/// Named built-in torus generators used across tests and reports.
pub mod builtin {
    use crate::model::{build_torus_model, ModelConfig, SpectralModel};
    use crate::scalar::{c, Real};

    /// Line bundle on the one-dimensional torus, cutoff 2.
    pub fn t1_r1_k2<R: Real>() -> SpectralModel<R> {
        build_torus_model(&ModelConfig::Torus {
            n: 1,
            r: 1,
            fourier_cutoff: 2,
            metric_potential: vec![],
            curvature_twist: vec![c(0.0, 0.0)],
        })
        .expect("builtin model")
    }

    /// Rank-2 constant-mode model on the two-dimensional torus.
    pub fn t2_r2_k0<R: Real>() -> SpectralModel<R> {
        build_torus_model(&ModelConfig::Torus {
            n: 2,
            r: 2,
            fourier_cutoff: 0,
            metric_potential: vec![],
            curvature_twist: vec![c(0.0, 0.0), c(0.0, 0.0)],
        })
        .expect("builtin model")
    }

    /// Twisted line bundle on the two-dimensional torus: central constant
    /// curvature `(1, 1)`, cutoff 1.
    pub fn t2_r1_k1_c11<R: Real>() -> SpectralModel<R> {
        build_torus_model(&ModelConfig::Torus {
            n: 2,
            r: 1,
            fourier_cutoff: 1,
            metric_potential: vec![],
            curvature_twist: vec![c(1.0, 0.0), c(1.0, 0.0)],
        })
        .expect("builtin model")
    }

    /// Rank-2 bundle on the one-dimensional torus with a nonzero low-band
    /// metric potential, cutoff 4. The potential is
    /// `u = 0.6 cos(x) + 0.4 sin(y)`, entered through its conjugate-
    /// symmetric Fourier coefficients.
    pub fn t1_r2_k4_metric<R: Real>() -> SpectralModel<R> {
        build_torus_model(&ModelConfig::Torus {
            n: 1,
            r: 2,
            fourier_cutoff: 4,
            metric_potential: vec![
                (vec![1, 0], c(0.3, 0.0)),
                (vec![-1, 0], c(0.3, 0.0)),
                (vec![0, 1], c(0.0, -0.2)),
                (vec![0, -1], c(0.0, 0.2)),
            ],
            curvature_twist: vec![c(0.0, 0.0)],
        })
        .expect("builtin model")
    }

    /// All built-in generators with their registry names.
    pub fn all_builtin<R: Real>() -> Vec<(&'static str, SpectralModel<R>)> {
        vec![
            ("t1r1k2", t1_r1_k2()),
            ("t2r2k0", t2_r2_k0()),
            ("t2r1k1c11", t2_r1_k1_c11()),
            ("t1r2k4u", t1_r2_k4_metric()),
        ]
    }
}
