//! Cross-module properties of the constraint systems and canonical maps at
//! seeded sample points: composed symplectomorphisms, involutivity surviving
//! pullback, reconstruction consistency, and contact round trips.

use darboux::eos::{map_ideal_to_vdw, LegendreTransform};
use darboux::field::grad;
use darboux::symplectic::{check_symplectomorphism, poisson_bracket};
use darboux::{
    ConstraintSystem, DomainBox, IdealGasParams, LegendreSubmanifold, ScalarField, VdwParams,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn vdw_params() -> VdwParams {
    VdwParams::new(1.0, 0.5).unwrap()
}

#[test]
fn composed_canonical_maps_stay_symplectic() {
    let pullback = map_ideal_to_vdw(&vdw_params());
    let exchange = LegendreTransform::new(pullback.system.chart(), 0)
        .unwrap()
        .map();
    let composed = pullback.map.then(&exchange);
    let region = pullback
        .system
        .default_box()
        .product(&DomainBox::new(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap());
    let report = check_symplectomorphism(&composed, &region.grid(3), 1e-9);
    assert!(report.pass, "{report:?}");
}

#[test]
fn involutivity_survives_the_pullback() {
    let sys = ConstraintSystem::paper_vdw(&vdw_params());
    let phi1 = sys.constraint(0);
    let phi2 = sys.constraint(1);
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..100 {
        let q = sys.default_box().sample(&mut rng);
        let x = sys.lift(&q).unwrap();
        let pb = poisson_bracket(&phi1, &phi2, sys.chart(), &x).unwrap();
        assert!(pb.abs() < 1e-10, "at q = {q:?}: {pb}");
    }
    let report = sys.involutivity_report(sys.default_box(), 5, 1e-9);
    assert!(report.pass, "{report:?}");
    let report = sys.maxwell_isotropy_report(sys.default_box(), 5, 1e-9);
    assert!(report.pass, "{report:?}");
}

#[test]
fn pulled_back_scalars_compose_pointwise() {
    let pullback = map_ideal_to_vdw(&vdw_params());
    let ideal = ConstraintSystem::ideal_gas(&IdealGasParams::new(1.0).unwrap());
    let f = ideal.constraint(1);
    let pulled = darboux::eos::pullback_scalar(&pullback.map, &f);
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    let region = pullback
        .system
        .default_box()
        .product(&DomainBox::new(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap());
    for _ in 0..50 {
        let x = region.sample(&mut rng);
        let direct = f.value(&pullback.map.apply(&x).unwrap()).unwrap();
        let composed = pulled.value(&x).unwrap();
        assert!((direct - composed).abs() < 1e-14);
    }
}

#[test]
fn reconstructed_potential_matches_the_state_functions() {
    let sys = ConstraintSystem::ideal_gas(&IdealGasParams::new(1.0).unwrap());
    let u = sys.potential().unwrap();
    let q_ref = vec![0.0, 1.0];
    let rebuilt = sys
        .reconstructed_potential(&q_ref, u.value(&q_ref).unwrap())
        .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    for _ in 0..20 {
        let q = sys.default_box().sample(&mut rng);
        let direct = u.value(&q).unwrap();
        let integrated = rebuilt.value(&q).unwrap();
        assert!(
            (direct - integrated).abs() < 1e-9,
            "at {q:?}: {direct} vs {integrated}"
        );
        let gd = grad(u, &q).unwrap();
        let gi = grad(&rebuilt, &q).unwrap();
        for i in 0..2 {
            assert!((gd[i] - gi[i]).abs() < 1e-7, "∂{i} at {q:?}");
        }
    }
}

#[test]
fn reconstruction_is_path_independent_at_random_endpoints() {
    let sys = ConstraintSystem::ideal_gas(&IdealGasParams::new(1.0).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(45);
    for _ in 0..20 {
        let a = sys.default_box().sample(&mut rng);
        let b = sys.default_box().sample(&mut rng);
        let elbow = vec![a[0], b[1]];
        let straight = sys.reconstruct_energy(&[a.clone(), b.clone()]).unwrap();
        let bent = sys.reconstruct_energy(&[a, elbow, b]).unwrap();
        assert!(
            (straight - bent).abs() < 1e-9,
            "straight {straight} vs bent {bent}"
        );
    }
}

#[test]
fn exchange_residual_vanishes_at_random_endpoints() {
    let sys = ConstraintSystem::ideal_gas(&IdealGasParams::new(1.0).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(46);
    for index in [0usize, 1] {
        let transform = LegendreTransform::new(sys.chart(), index).unwrap();
        for _ in 0..10 {
            let q0 = sys.default_box().sample(&mut rng);
            let q1 = sys.default_box().sample(&mut rng);
            let res = transform.exchange_residual(&sys, &q0, &q1).unwrap();
            assert!(res < 1e-8, "index {index}, {q0:?} -> {q1:?}: {res}");
        }
    }
}

#[test]
fn contact_round_trip_is_exact_at_random_base_points() {
    let u = ScalarField::new(2, |x| {
        Ok((x[0] * (2.0 / 3.0)).exp() * x[1].powf(-2.0 / 3.0)? * 1.5)
    });
    let sub = LegendreSubmanifold::from_generating(u);
    let the_box = DomainBox::new(vec![-1.0, 0.5], vec![1.0, 4.0]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(47);
    for _ in 0..50 {
        let q = the_box.sample(&mut rng);
        let pt = sub.immerse(&q).unwrap();
        let (qq, pp) = sub.project(&pt);
        let back = sub.unproject(&qq, &pp).unwrap();
        assert_eq!(back, pt);
    }
}
