//! Extension-DGLA operations: differential, bracket, Maurer-Cartan
//! residuals, and the axiom validator.

mod support;

use holopair::builtin;
use holopair::dgla::{
    bracket_ae, dbar_ae, dbar_t_square_residual, mc_residual, random_ae_form, validate_dgla,
    AEForm, AESeriesForm, Dgla, DglaSector,
};
use holopair::model::{build_abstract_model, ModelConfig, Pairing, Sector, SparseBilinear};
use holopair::report::Status;
use holopair::sampling::{sample_vector, seeded_rng, DEFAULT_SEED};
use holopair::scalar::c;
use holopair::series::{Exp, VecSeries};
use nalgebra::DVector;
use num_complex::Complex64;
use support::max_abs;

/// Index of `E_{ab} (x) dzb^{mono}` in the constant-mode rank-2 model.
fn q_idx_k0(mono: usize, a: usize, b: usize) -> usize {
    mono * 4 + (a * 2 + b)
}

#[test]
fn dbar_ae_on_flat_constants_vanishes() {
    let m = builtin::t2_r2_k0::<f64>();
    let mut w = AEForm::zero(&m, 0);
    w.phi[0] = c(1.0, 0.0); // constant d_1-valued section, F = 0
    let out = dbar_ae(&m, &w);
    assert_eq!(max_abs(&out.concat()), 0.0);
}

#[test]
fn dbar_ae_couples_curvature_with_ledger_sign() {
    // (0, dzb^2 (x) d_1) -> Q part -(-1)^1 phi.F = -dzb^1/\dzb^2.
    let m = builtin::t2_r1_k1_c11::<f64>();
    let torus = m.torus_data().unwrap();
    let center = torus.modes.index(&[0, 0, 0, 0]).unwrap();
    let lay_t1 = m.layout(Sector::T, 1);
    let lay_q2 = m.layout(Sector::Q, 2);
    let mut w = AEForm::zero(&m, 1);
    w.phi[lay_t1.encode(1, 0, center)] = c(1.0, 0.0);
    let out = dbar_ae(&m, &w);
    let idx = lay_q2.encode(0, 0, center);
    assert!((out.a[idx] - c(-1.0, 0.0)).norm() < 1e-15);
    assert_eq!(out.a.iter().filter(|z| z.norm() > 0.0).count(), 1);
    assert_eq!(max_abs(&out.phi), 0.0);
}

#[test]
fn dbar_ae_squares_to_zero_on_samples() {
    for (name, m) in builtin::all_builtin::<f64>() {
        let mut rng = seeded_rng(DEFAULT_SEED);
        let band = m.fourier_cutoff().unwrap_or(0);
        let w = random_ae_form(&m, 0, band, &mut rng);
        let out = dbar_ae(&m, &dbar_ae(&m, &w));
        assert!(max_abs(&out.concat()) < 1e-12, "{name}");
    }
}

#[test]
fn bracket_of_constant_endomorphisms_is_the_commutator() {
    let m = builtin::t2_r2_k0::<f64>();
    let mut x = AEForm::zero(&m, 1);
    x.a[q_idx_k0(0, 0, 1)] = c(1.0, 0.0); // e12 (x) dzb^1
    let mut y = AEForm::zero(&m, 1);
    y.a[q_idx_k0(1, 1, 0)] = c(1.0, 0.0); // e21 (x) dzb^2
    let out = bracket_ae(&m, &x, &y);
    // [e12, e21] = e11 - e22 on dzb^1/\dzb^2.
    assert!((out.a[q_idx_k0(0, 0, 0)] - c(1.0, 0.0)).norm() < 1e-15);
    assert!((out.a[q_idx_k0(0, 1, 1)] - c(-1.0, 0.0)).norm() < 1e-15);
    assert!((out.a[q_idx_k0(0, 0, 1)]).norm() < 1e-15);
    assert!((out.a[q_idx_k0(0, 1, 0)]).norm() < 1e-15);
    assert_eq!(max_abs(&out.phi), 0.0);
}

#[test]
fn self_bracket_of_even_degree_vanishes() {
    let m = builtin::t1_r1_k2::<f64>();
    let mut rng = seeded_rng(4);
    let w = random_ae_form(&m, 0, 1, &mut rng);
    let out = bracket_ae(&m, &w, &w);
    assert!(max_abs(&out.concat()) < 1e-13);
}

#[test]
fn mixed_bracket_on_flat_constants_vanishes() {
    let m = builtin::t2_r2_k0::<f64>();
    let mut x = AEForm::zero(&m, 1);
    x.phi[0] = c(1.0, 0.0);
    let mut y = AEForm::zero(&m, 1);
    y.a[q_idx_k0(0, 0, 1)] = c(1.0, 0.0);
    let out = bracket_ae(&m, &x, &y);
    assert_eq!(max_abs(&out.concat()), 0.0);
}

#[test]
fn mc_residual_of_zero_is_zero() {
    let m = builtin::t2_r2_k0::<f64>();
    let e = AESeriesForm::zero(&m, 1, 2, 3);
    let out = mc_residual(&m, &e).unwrap();
    assert_eq!(out.series().max_abs(), 0.0);
}

#[test]
fn mc_residual_is_empty_at_top_degree_n1() {
    // No (0,2)-forms on the one-dimensional torus: the residual lives in a
    // zero-dimensional space.
    let m = builtin::t1_r1_k2::<f64>();
    let mut e = AESeriesForm::zero(&m, 1, 1, 3);
    let mut lin = DVector::from_element(m.dim_ae(1), c(0.0, 0.0));
    lin[0] = c(1.0, 0.0);
    e.series_mut().add_term(Exp::unit(1, 0), &lin);
    let out = mc_residual(&m, &e).unwrap();
    assert_eq!(out.series().dim(), 0);
    assert_eq!(out.series().max_abs(), 0.0);
}

#[test]
fn mc_residual_matches_hand_commutator() {
    // e = t1 e12 dzb^1 + t2 e21 dzb^2 -> (t1 t2 [e12,e21] dzb^1/\dzb^2, 0).
    let m = builtin::t2_r2_k0::<f64>();
    let mut e = AESeriesForm::zero(&m, 1, 2, 4);
    let dim = m.dim_ae(1);
    let mut v1 = DVector::from_element(dim, c(0.0, 0.0));
    v1[q_idx_k0(0, 0, 1)] = c(1.0, 0.0);
    let mut v2 = DVector::from_element(dim, c(0.0, 0.0));
    v2[q_idx_k0(1, 1, 0)] = c(1.0, 0.0);
    e.series_mut().add_term(Exp::unit(2, 0), &v1);
    e.series_mut().add_term(Exp::unit(2, 1), &v2);
    let out = mc_residual(&m, &e).unwrap();
    let t1t2 = Exp(vec![1, 1]);
    let coeff = out.series().coefficient(&t1t2);
    assert!((coeff[q_idx_k0(0, 0, 0)] - c(1.0, 0.0)).norm() < 1e-14);
    assert!((coeff[q_idx_k0(0, 1, 1)] - c(-1.0, 0.0)).norm() < 1e-14);
    // No other multi-index carries anything.
    for (exp, v) in out.series().terms() {
        if *exp != t1t2 {
            assert!(max_abs(v) < 1e-14, "unexpected term at {exp:?}");
        }
    }
}

#[test]
fn two_component_split_equals_mc_residual() {
    // The displayed two-equation expansion agrees with the pair-form
    // Maurer-Cartan residual coefficient-wise on random series.
    for (name, m) in builtin::all_builtin::<f64>() {
        let mut rng = seeded_rng(DEFAULT_SEED ^ 0xae);
        let band = match m.fourier_cutoff() {
            Some(k) => (k.saturating_sub(m.metric_band())) / 2,
            None => 0,
        };
        for _ in 0..5 {
            let mut a = VecSeries::<f64>::zero(2, 3, m.dim(Sector::Q, 1));
            let mut phi = VecSeries::<f64>::zero(2, 3, m.dim(Sector::T, 1));
            for (j, exp) in [Exp(vec![1, 0]), Exp(vec![0, 1]), Exp(vec![1, 1])]
                .into_iter()
                .enumerate()
            {
                let _ = j;
                a.add_term(exp.clone(), &sample_vector(&m, Sector::Q, 1, band, &mut rng));
                phi.add_term(exp, &sample_vector(&m, Sector::T, 1, band, &mut rng));
            }
            let (q_out, t_out) = dbar_t_square_residual(&m, &a, &phi).unwrap();

            let mut e = AESeriesForm::zero(&m, 1, 2, 3);
            let dq = m.dim(Sector::Q, 1);
            let dim = m.dim_ae(1);
            for exp in [Exp(vec![1, 0]), Exp(vec![0, 1]), Exp(vec![1, 1])] {
                let mut v = DVector::from_element(dim, c(0.0, 0.0));
                v.rows_mut(0, dq).copy_from(&a.coefficient(&exp));
                v.rows_mut(dq, dim - dq).copy_from(&phi.coefficient(&exp));
                e.series_mut().add_term(exp, &v);
            }
            let mc = mc_residual(&m, &e).unwrap();
            let dq2 = m.dim(Sector::Q, 2);
            let mut diff = 0.0f64;
            for (exp, v) in mc.series().terms() {
                let vq = v.rows(0, dq2).into_owned();
                let vt = v.rows(dq2, v.len() - dq2).into_owned();
                diff = diff.max(max_abs(&(vq - q_out.coefficient(exp))));
                diff = diff.max(max_abs(&(vt - t_out.coefficient(exp))));
            }
            assert!(diff < 1e-12, "{name}: {diff}");
        }
    }
}

#[test]
fn restriction_to_single_sectors() {
    // With phi = 0 the Q component reduces to dbar A + [A,A]/2; with A = 0
    // and F = 0 the T component reduces to the manifold equation.
    let m = builtin::t2_r2_k0::<f64>();
    let mut rng = seeded_rng(17);
    let a = sample_vector(&m, Sector::Q, 1, 0, &mut rng);
    let phi0 = DVector::from_element(m.dim(Sector::T, 1), c(0.0, 0.0));
    let mut e = AEForm::zero(&m, 1);
    e.a = a.clone();
    e.phi = phi0;
    let mc = holopair::dgla::mc_residual_point(&m, &e);
    let expect = m.apply_dbar(Sector::Q, 1, &a)
        + m.apply_pairing(Pairing::BracketQ, 1, 1, &a, &a) * c(0.5, 0.0);
    assert!(max_abs(&(mc.a - expect)) < 1e-14);
    assert_eq!(max_abs(&mc.phi), 0.0);

    let phi = sample_vector(&m, Sector::T, 1, 0, &mut rng);
    let mut e = AEForm::zero(&m, 1);
    e.phi = phi.clone();
    let mc = holopair::dgla::mc_residual_point(&m, &e);
    let expect = m.apply_dbar(Sector::T, 1, &phi)
        + m.apply_pairing(Pairing::BracketT, 1, 1, &phi, &phi) * c(0.5, 0.0);
    assert!(max_abs(&(mc.phi - expect)) < 1e-14);
    assert_eq!(max_abs(&mc.a), 0.0);
}

#[test]
fn dgla_axioms_hold_on_all_builtin_models() {
    for (name, m) in builtin::all_builtin::<f64>() {
        let report = validate_dgla(&m, 8, 1e-12, DEFAULT_SEED, None);
        assert!(report.pass, "{name}:\n{}", report.to_text());
    }
}

#[test]
fn leibniz_sees_nonconstant_samples_on_the_metric_model() {
    // The metric model must exercise Leibniz at band >= 1 so the curvature
    // coupling terms are nontrivial.
    let m = builtin::t1_r2_k4_metric::<f64>();
    let report = validate_dgla(&m, 8, 1e-12, 3, None);
    let leibniz = report.lines.iter().find(|l| l.name == "leibniz").unwrap();
    assert_eq!(leibniz.status, Status::Pass);
    assert!(leibniz.detail.contains("band 1"), "{}", leibniz.detail);
}

#[test]
fn perturbed_bracket_tensor_breaks_jacobi() {
    let base = builtin::t2_r2_k0::<f64>();
    let mut ac = base.to_abstract_config();
    // Corrupt one bracket entry.
    let t = ac.pairings.get_mut(&(Pairing::BracketQ, 0, 1)).unwrap();
    let mut entries = std::mem::take(&mut t.entries);
    entries.push((0, 1, 2, Complex64::new(0.37, 0.11)));
    *t = SparseBilinear {
        in1_dim: t.in1_dim,
        in2_dim: t.in2_dim,
        out_dim: t.out_dim,
        entries,
    };
    let m = build_abstract_model(&ModelConfig::Abstract(Box::new(ac))).unwrap();
    let report = validate_dgla(&m, 8, 1e-12, 3, None);
    assert!(!report.pass);
    let jacobi = report.lines.iter().find(|l| l.name == "jacobi").unwrap();
    assert_eq!(jacobi.status, Status::Fail);
}

#[test]
fn degree_overflow_brackets_land_in_zero_space() {
    let m = builtin::t1_r1_k2::<f64>();
    let mut rng = seeded_rng(5);
    let x = random_ae_form(&m, 1, 1, &mut rng);
    let y = random_ae_form(&m, 1, 1, &mut rng);
    let out = bracket_ae(&m, &x, &y);
    assert_eq!(out.degree, 2);
    assert_eq!(out.concat().len(), 0);
}

#[test]
fn series_form_eval_and_serialization() {
    let m = builtin::t2_r2_k0::<f64>();
    let mut e = AESeriesForm::zero(&m, 1, 2, 2);
    let dim = m.dim_ae(1);
    let mut v = DVector::from_element(dim, c(0.0, 0.0));
    v[0] = c(2.0, -1.0);
    e.series_mut().add_term(Exp(vec![1, 1]), &v);
    let at = e.eval(&m, &[c(0.5, 0.0), c(0.5, 0.0)]);
    assert!((at.a[0] - c(0.5, -0.25)).norm() < 1e-15);
    let j = e.to_json();
    assert_eq!(j["degree"], 1);
    assert_eq!(j["Q"].as_array().unwrap().len(), m.dim(Sector::Q, 1));
    assert_eq!(j["T"].as_array().unwrap().len(), m.dim(Sector::T, 1));
    assert_eq!(j["Q"][0]["terms"][0]["exp"], serde_json::json!([1, 1]));
}

#[test]
fn gram_norm_on_pair_forms() {
    let m = builtin::t2_r2_k0::<f64>();
    let dgla = Dgla::new(&m, DglaSector::AE);
    let mut w = AEForm::zero(&m, 1);
    w.a[0] = c(3.0, 0.0);
    w.phi[0] = c(4.0, 0.0);
    assert!((w.norm(&m) - 5.0).abs() < 1e-13);
    assert!((dgla.gram_norm(1, &w.concat()) - 5.0).abs() < 1e-13);
}
