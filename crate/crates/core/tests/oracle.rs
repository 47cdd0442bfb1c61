use oscspin_core::dynamics::{joint_generator, OscillatorSpec, TlsJointSpec};
use oscspin_core::operators::FockSpace;
use oscspin_core::oracle::{
    coherence_comparison, equivalence_defect, liouvillian_of, ohmic_crosscheck, trend_spec,
    ComparisonOptions, CROSSCHECK_TOL,
};
use oscspin_core::quadrature::QuadratureSpec;
use oscspin_core::spin_bath::OhmicDensity;

#[test]
fn weak_coupling_coherence_trend() {
    let cmp = coherence_comparison(&trend_spec(), &ComparisonOptions::default()).unwrap();
    println!(
        "exact rate {:.4e} bm rate {:.4e} ratio {:.3} shifts {:.3e} {:.3e}",
        cmp.exact_rate,
        cmp.bm_rate,
        cmp.rate_ratio(),
        cmp.exact_shift,
        cmp.bm_shift
    );
    assert!(cmp.trend_agrees(3.0));
    assert!(cmp.energy_drift < 1e-9);
}

#[test]
fn joint_liouvillian_at_dimension_forty() {
    let spec = TlsJointSpec::from_nbar(1.0, 1.0, 1.0, 10.0, 1.0).unwrap();
    let gen = joint_generator(FockSpace::new(20).unwrap(), &spec).unwrap();
    let l = liouvillian_of(&gen).unwrap();
    assert_eq!(l.dim_sq(), 1600);
    assert!(equivalence_defect(&gen, &l, 4, 11).unwrap() < 1e-12);
}

#[test]
fn ohmic_crosscheck_passes() {
    let d = OhmicDensity::new(1.0, 1.0, 10.0).unwrap();
    let osc = OscillatorSpec::new(1.0, 1.0).unwrap();
    for t in [0.0, 0.1, 1.0, 3.0] {
        let r = ohmic_crosscheck(&d, t, &osc, &QuadratureSpec::default()).unwrap();
        assert!(r.check(CROSSCHECK_TOL).is_ok(), "T = {t}: {r:?}");
    }
}
