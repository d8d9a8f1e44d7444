//! Hodge operators: kernels, projectors, Green operators, cohomology dims.

mod support;

use holopair::builtin;
use holopair::dgla::{random_ae_form, Dgla, DglaSector};
use holopair::hodge::{build_hodge, cohomology_dims, hodge_apply, validate_hodge, HodgeOp};
use holopair::model::basis::antihol_symbol;
use holopair::model::{build_abstract_model, ModelConfig, Sector};
use holopair::sampling::seeded_rng;
use holopair::scalar::c;
use nalgebra::DVector;
use support::max_abs;

#[test]
fn kernel_dims_on_the_line_bundle_torus() {
    let m = builtin::t1_r1_k2::<f64>();
    let h = build_hodge(&m).unwrap();
    // Only the constant mode is harmonic, in every sector and degree.
    assert_eq!(h.q_sector.kernel_dim(0), 1);
    assert_eq!(h.q_sector.kernel_dim(1), 1);
    assert_eq!(h.t_sector.kernel_dim(0), 1);
    assert_eq!(h.t_sector.kernel_dim(1), 1);
    // The extension splits when F = 0.
    assert_eq!(h.ae_sector.kernel_dim(0), 2);
    assert_eq!(h.ae_sector.kernel_dim(1), 2);
}

#[test]
fn constant_mode_model_has_identity_projector_and_zero_green() {
    let m = builtin::t2_r2_k0::<f64>();
    let h = build_hodge(&m).unwrap();
    for q in 0..=2 {
        let s = &h.ae_sector;
        let dim = s.dims[q];
        let eye = nalgebra::DMatrix::<num_complex::Complex64>::identity(dim, dim);
        assert!((&s.h_proj[q] - eye).iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-14);
        assert!(s.green[q].iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-14);
        assert_eq!(s.kernel_dim(q), dim);
    }
}

#[test]
fn green_divides_by_the_mode_eigenvalue() {
    // On the flat line-bundle torus, G e_k dzb = e_k dzb / |mu(k)|^2.
    let m = builtin::t1_r1_k2::<f64>();
    let h = build_hodge(&m).unwrap();
    let torus = m.torus_data().unwrap();
    let layout = m.layout(Sector::Q, 1);
    for mode_idx in [0usize, 7, 13] {
        let mode = torus.modes.mode(mode_idx);
        let mu: num_complex::Complex64 = antihol_symbol::<f64>(&mode, 0);
        let mut v = DVector::from_element(m.dim(Sector::Q, 1), c(0.0, 0.0));
        v[layout.encode(0, 0, mode_idx)] = c(1.0, 0.0);
        let g = hodge_apply(&h, DglaSector::Q, HodgeOp::Green, 1, &v).unwrap();
        if mu.norm() == 0.0 {
            assert!(max_abs(&g) < 1e-12);
        } else {
            let expect = &v * c(1.0 / mu.norm_sqr(), 0.0);
            assert!(max_abs(&(g - expect)) < 1e-12);
        }
    }
}

#[test]
fn hodge_identities_on_all_builtin_models() {
    for (name, m) in builtin::all_builtin::<f64>() {
        let h = build_hodge(&m).unwrap();
        let report = validate_hodge(&m, &h, 1e-10);
        assert!(report.pass, "{name}:\n{}", report.to_text());
    }
}

#[test]
fn hodge_decomposition_of_random_forms() {
    for (name, m) in builtin::all_builtin::<f64>() {
        let h = build_hodge(&m).unwrap();
        let dgla = Dgla::new(&m, DglaSector::AE);
        let mut rng = seeded_rng(23);
        for q in 0..=m.n() {
            let w = random_ae_form(&m, q, m.fourier_cutoff().unwrap_or(0), &mut rng).concat();
            let mut acc = hodge_apply(&h, DglaSector::AE, HodgeOp::Harmonic, q, &w).unwrap();
            let gw = hodge_apply(&h, DglaSector::AE, HodgeOp::Green, q, &w).unwrap();
            if q < m.n() {
                let d_gw = dgla.apply_dbar(q, &gw);
                acc += hodge_apply(&h, DglaSector::AE, HodgeOp::Adjoint, q + 1, &d_gw).unwrap();
            }
            if q > 0 {
                let adj_gw = hodge_apply(&h, DglaSector::AE, HodgeOp::Adjoint, q, &gw).unwrap();
                acc += dgla.apply_dbar(q - 1, &adj_gw);
            }
            assert!(max_abs(&(acc - w)) < 1e-10, "{name} degree {q}");
        }
    }
}

#[test]
fn adjoint_kills_coclosed_constants() {
    let m = builtin::t1_r1_k2::<f64>();
    let h = build_hodge(&m).unwrap();
    let torus = m.torus_data().unwrap();
    let center = torus.modes.index(&[0, 0]).unwrap();
    let layout = m.layout(Sector::Q, 1);
    let mut v = DVector::from_element(m.dim(Sector::Q, 1), c(0.0, 0.0));
    v[layout.encode(0, 0, center)] = c(1.0, 0.0);
    let out = hodge_apply(&h, DglaSector::Q, HodgeOp::Adjoint, 1, &v).unwrap();
    assert!(max_abs(&out) < 1e-13);
}

#[test]
fn projector_fixes_harmonics_and_green_kills_them() {
    let m = builtin::t2_r1_k1_c11::<f64>();
    let h = build_hodge(&m).unwrap();
    for (i, eta) in h.ae_sector.harmonic[1].iter().enumerate() {
        let hv = hodge_apply(&h, DglaSector::AE, HodgeOp::Harmonic, 1, eta).unwrap();
        assert!(max_abs(&(hv - eta.clone())) < 1e-10, "H eta_{i}");
        let gv = hodge_apply(&h, DglaSector::AE, HodgeOp::Green, 1, eta).unwrap();
        assert!(max_abs(&gv) < 1e-10, "G eta_{i}");
    }
}

#[test]
fn twisted_model_cohomology_counts() {
    // The coupling kills classes: H^q(A(L)) is smaller than the direct sum.
    let m = builtin::t2_r1_k1_c11::<f64>();
    let h = build_hodge(&m).unwrap();
    let table = cohomology_dims(&m, &h);
    assert_eq!(table.dim(DglaSector::Q, 0), 1);
    assert_eq!(table.dim(DglaSector::Q, 1), 2);
    assert_eq!(table.dim(DglaSector::Q, 2), 1);
    assert_eq!(table.dim(DglaSector::T, 0), 2);
    assert_eq!(table.dim(DglaSector::T, 1), 4);
    assert_eq!(table.dim(DglaSector::T, 2), 2);
    assert_eq!(table.dim(DglaSector::AE, 0), 1);
    assert_eq!(table.dim(DglaSector::AE, 1), 3);
    assert_eq!(table.dim(DglaSector::AE, 2), 2);
    assert!(table.dim(DglaSector::AE, 2) < table.dim(DglaSector::Q, 2) + table.dim(DglaSector::T, 2));
    // The identity endomorphism is dbar-closed: H^0(Q) is nonempty.
    assert!(table.dim(DglaSector::Q, 0) >= 1);
}

#[test]
fn split_model_cohomology_is_additive() {
    let m = builtin::t1_r1_k2::<f64>();
    let h = build_hodge(&m).unwrap();
    let table = cohomology_dims(&m, &h);
    assert_eq!(
        table.dim(DglaSector::AE, 1),
        table.dim(DglaSector::Q, 1) + table.dim(DglaSector::T, 1)
    );
    assert_eq!(table.dim(DglaSector::AE, 0), 2);
    assert_eq!(table.dim(DglaSector::AE, 1), 2);
}

#[test]
fn harmonic_basis_is_deterministic_and_canonical() {
    // On the constant-mode model everything is harmonic and the canonical
    // basis is the standard basis, Q block before T block.
    let m = builtin::t2_r2_k0::<f64>();
    let h = build_hodge(&m).unwrap();
    let basis = &h.ae_sector.harmonic[1];
    assert_eq!(basis.len(), m.dim_ae(1));
    for (i, v) in basis.iter().enumerate() {
        for (j, z) in v.iter().enumerate() {
            let expect = if i == j { 1.0 } else { 0.0 };
            assert!((z - c(expect, 0.0)).norm() < 1e-12);
        }
    }
    // Rebuild gives identical vectors.
    let h2 = build_hodge(&m).unwrap();
    for (a, b) in h.ae_sector.harmonic[1].iter().zip(&h2.ae_sector.harmonic[1]) {
        assert_eq!(a, b);
    }
}

#[test]
fn kernel_dims_stable_under_tiny_gram_perturbation() {
    let base = builtin::t2_r1_k1_c11::<f64>();
    let h_base = build_hodge(&base).unwrap();
    let mut ac = base.to_abstract_config();
    for q in 0..=2 {
        let g = ac.gram.get_mut(&(Sector::Q, q)).unwrap();
        let dim = g.nrows();
        for i in 0..dim {
            g[(i, i)] += c(1e-12 * ((i % 3) as f64), 0.0);
        }
    }
    let m = build_abstract_model(&ModelConfig::Abstract(Box::new(ac))).unwrap();
    let h = build_hodge(&m).unwrap();
    for q in 0..=2 {
        assert_eq!(h.q_sector.kernel_dim(q), h_base.q_sector.kernel_dim(q));
        assert_eq!(h.ae_sector.kernel_dim(q), h_base.ae_sector.kernel_dim(q));
    }
}

#[test]
fn wrong_shape_is_rejected() {
    let m = builtin::t1_r1_k2::<f64>();
    let h = build_hodge(&m).unwrap();
    let v = DVector::from_element(7, c(0.0, 0.0));
    assert!(hodge_apply(&h, DglaSector::Q, HodgeOp::Harmonic, 1, &v).is_err());
    assert!(hodge_apply(&h, DglaSector::Q, HodgeOp::Adjoint, 0, &v).is_err());
}

#[test]
fn gram_not_positive_definite_is_a_model_error() {
    let base = builtin::t2_r2_k0::<f64>();
    let mut ac = base.to_abstract_config();
    let g = ac.gram.get_mut(&(Sector::Q, 0)).unwrap();
    g[(0, 0)] = c(-1.0, 0.0);
    let m = build_abstract_model(&ModelConfig::Abstract(Box::new(ac))).unwrap();
    assert!(build_hodge(&m).is_err());
}

#[test]
fn cohomology_table_renders() {
    let m = builtin::t1_r1_k2::<f64>();
    let h = build_hodge(&m).unwrap();
    let table = cohomology_dims(&m, &h);
    let text = table.to_text();
    assert!(text.contains("A(E)"));
    let json = table.to_json();
    assert!(json.as_array().unwrap().len() >= 6);
}
