use fnn_workbench::born::validate_no_signaling;
use fnn_workbench::models::{
    inflation_identities, maximize_witness, model_to_distribution, random_model, validate_model, HybridModel, NsBox,
};
use fnn_workbench::stats::derive_seed;
use fnn_workbench::witness::Witness;

fn point_mass_box() -> NsBox {
    let mut bx = NsBox::default();
    bx.q[0][0] = [1.0, 1.0];
    bx
}

fn all_zero(kind: Witness) -> HybridModel {
    HybridModel {
        kind,
        weights: vec![1.0],
        responses: vec![[0, 0]],
        boxes: vec![point_mass_box()],
        partner_marginal: [[1.0, 1.0], [0.0, 0.0]],
    }
}

#[test]
fn lambda_dependent_partner_marginal_fails_by_name() {
    let mut other = NsBox::default();
    other.q[0][1] = [1.0, 1.0];
    let m = HybridModel {
        kind: Witness::Cns,
        weights: vec![0.5, 0.5],
        responses: vec![[0, 0], [0, 0]],
        boxes: vec![point_mass_box(), other],
        partner_marginal: [[1.0, 1.0], [0.0, 0.0]],
    };
    let v = validate_model(&m, 1e-9).unwrap();
    assert!(!v.passed);
    assert_eq!(v.violations, vec!["box.partner_marginal".to_string()]);
    assert!((v.max_partner_mismatch - 1.0).abs() < 1e-15);
}

#[test]
fn all_zero_model_is_valid_point_mass() {
    for kind in [Witness::Cns, Witness::Nsc] {
        let m = all_zero(kind);
        assert!(validate_model(&m, 1e-12).unwrap().passed);
        let d = model_to_distribution(&m).unwrap();
        for x in 0..2 {
            for z in 0..2 {
                assert_eq!(d.p[x][z][0][0][0], 1.0);
            }
        }
        assert_eq!(m.witness_value().unwrap(), 3.0);
    }
}

#[test]
fn uniform_box_gives_minus_third() {
    let mut bx = NsBox::default();
    for b in 0..3 {
        for o in 0..2 {
            bx.q[b][o] = [1.0 / 6.0, 1.0 / 6.0];
        }
    }
    for kind in [Witness::Cns, Witness::Nsc] {
        let m = HybridModel {
            kind,
            weights: vec![1.0],
            responses: vec![[1, 0]],
            boxes: vec![bx],
            partner_marginal: [[0.5, 0.5], [0.5, 0.5]],
        };
        assert!((m.witness_value().unwrap() + 1.0 / 3.0).abs() < 1e-12);
    }
}

#[test]
fn random_models_of_all_sizes_stay_below_bound() {
    for kind in [Witness::Cns, Witness::Nsc] {
        let mut max = f64::NEG_INFINITY;
        for i in 0..1000u64 {
            let n = 1 + (i % 8) as usize;
            let m = random_model(kind, n, derive_seed(7, i)).unwrap();
            let d = model_to_distribution(&m).unwrap();
            assert!(validate_no_signaling(&d, 1e-10).passed);
            max = max.max(m.witness_value().unwrap());
        }
        assert!(max <= 3.0, "{kind:?}: {max}");
    }
}

#[test]
fn seven_is_a_valid_seed() {
    let m = random_model(Witness::Cns, 4, 7).unwrap();
    assert!(validate_model(&m, 1e-9).unwrap().passed);
}

#[test]
fn single_iteration_search_is_deterministic() {
    let a = maximize_witness(Witness::Nsc, 4, 1, 1, 3).unwrap();
    let b = maximize_witness(Witness::Nsc, 4, 1, 1, 3).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.restarts.len(), 1);
}

#[test]
fn search_with_more_hidden_values() {
    for kind in [Witness::Cns, Witness::Nsc] {
        let r = maximize_witness(kind, 6, 8, 60, 5).unwrap();
        assert!(r.best_value <= 3.0 + 1e-7);
        assert!(r.best_value >= 3.0 - 1e-6, "{kind:?}: {}", r.best_value);
    }
}

#[test]
fn all_zero_decomposition_is_exact() {
    for kind in [Witness::Cns, Witness::Nsc] {
        let r = inflation_identities(&all_zero(kind)).unwrap();
        let total: f64 = r.outcomes.iter().map(|t| t.weighted_value).sum();
        assert_eq!(total, 3.0);
        assert_eq!(r.outcomes[0].probability, 1.0);
        assert_eq!(r.outcomes[0].value, Some(3.0));
        assert_eq!(r.decomposition_residual, 0.0);
    }
}

#[test]
fn per_outcome_bounds_hold_on_optimised_models() {
    for kind in [Witness::Cns, Witness::Nsc] {
        let best = maximize_witness(kind, 4, 4, 40, 11).unwrap().best_model;
        let r = inflation_identities(&best).unwrap();
        assert!(r.max_bound_excess <= 1e-10);
        assert!(r.decomposition_residual <= 1e-10);
    }
}
