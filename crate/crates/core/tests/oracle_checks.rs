use layered_kac::coarse::{extract_contours, CoarseFields, FrameSpec};
use layered_kac::model::Scales;
use layered_kac::oracle::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn enumeration_matches_transfer_matrix_on_fixtures() {
    for f in lattice_fixtures() {
        let (lat, kernel) = f.lattice().unwrap();
        let sys = LatticeSystem::all_free(lat, kernel.clone(), f.beta, f.epsilon);
        let e = enumerate_z(&sys, &ConstraintSpec::none()).unwrap();
        let t = transfer_matrix_log_z(&lat, &kernel, f.beta, f.epsilon).unwrap();
        let rel = (e.log_z - t).exp_m1().abs();
        assert!(rel < 1e-10, "{f:?}: rel {rel:e}");
        if e.direct_z.is_finite() {
            assert!((e.direct_z.ln() - e.log_z).abs() < 1e-10);
        }
    }
}

#[test]
fn toy_contour_weight_below_one_and_decreasing_in_beta() {
    let mut last = f64::INFINITY;
    for beta in [1.5, 2.0, 2.5, 3.0] {
        let toy = toy_contour(beta).unwrap();
        let w = contour_weight(&toy.system, &toy.numerator, &toy.denominator).unwrap();
        assert!(w.weight > 0.0 && w.weight < 1.0, "beta {beta}: {w:?}");
        assert!(w.weight < last);
        last = w.weight;
        let same = contour_weight(&toy.system, &toy.denominator, &toy.denominator).unwrap();
        assert_eq!(same.weight, 1.0);
    }
}

#[test]
fn toy_contour_flip_invariance() {
    let toy = toy_contour(2.0).unwrap();
    let w = contour_weight(&toy.system, &toy.numerator, &toy.denominator).unwrap();
    let flipped = toy.system.flipped();
    let wf = contour_weight(&flipped, &toy.numerator.flipped(), &toy.denominator.flipped()).unwrap();
    assert!((w.weight / wf.weight - 1.0).abs() < 1e-12);
}

#[test]
fn toy_numerator_configs_produce_the_contour() {
    let toy = toy_contour(2.0).unwrap();
    // a configuration meeting the numerator: one +- pair in the zero block
    let mut free = vec![1i8; toy.system.free.len()];
    let lat = *toy.system.lattice();
    let pos = toy.system.free.iter().position(|&i| i == lat.index(8, 0)).unwrap();
    free[pos] = -1;
    let cfg = toy.system.config(&free);
    let fields = CoarseFields::compute(&cfg, Scales::new(2, 4, 0.3).unwrap(), toy.numerator.m_beta).unwrap();
    let contours = extract_contours(&fields, FrameSpec::default()).unwrap();
    assert_eq!(contours.len(), 1);
    let cells: Vec<(usize, usize)> = contours[0].support.iter().map(|c| (c.layer, c.block)).collect();
    assert_eq!(cells, toy.support);
    assert_eq!(contours[0].specification, toy.specification);
}

#[test]
fn constraint_monotonicity() {
    let toy = toy_contour(2.0).unwrap();
    let partial = ConstraintSpec::new(
        toy.numerator.scales.unwrap(),
        toy.numerator.m_beta,
        toy.numerator.predicates[..3].to_vec(),
    );
    let a = enumerate_z(&toy.system, &toy.numerator).unwrap();
    let b = enumerate_z(&toy.system, &partial).unwrap();
    assert!(a.log_z <= b.log_z);
    assert!(a.admissible <= b.admissible);
}

#[test]
fn holley_with_large_m_and_report_for_zero_m() {
    let family = block_family(6);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut zero_m_violations = 0;
    for _ in 0..20 {
        let inst = family.sample(&mut rng).unwrap();
        let r = check_holley(&inst, 3.0).unwrap();
        assert!(r.holds(), "{r:?}");
        zero_m_violations += check_holley(&inst, 0.0).unwrap().upper_violations;
    }
    println!("violations with M = 0: {zero_m_violations}");
}

#[test]
fn fkg_sandwich_on_small_blocks() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for n in [6, 8] {
        let inst = block_family(n).sample(&mut rng).unwrap();
        let r = check_fkg_sandwich(&inst, 3.0, EventFamily::AllSubsets).unwrap();
        assert!(r.holds(), "{r:?}");
    }
    let inst = block_family(12).sample(&mut rng).unwrap();
    let r = check_fkg_sandwich(&inst, 3.0, EventFamily::Windows { extra: 64, seed: 1 }).unwrap();
    assert!(r.holds(), "{r:?}");
}

#[test]
fn deviation_tails_on_twelve_spin_blocks() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..5 {
        let inst = block_family(12).sample(&mut rng).unwrap();
        let r = check_deviation_bound(&inst, &DEVIATION_B_GRID, &[0.01, 0.1, 1.0]).unwrap();
        assert!(r.all_nonzero() && r.monotone && r.all_feasible(), "{r:?}");
    }
}

#[test]
fn interpolation_identity_on_shipped_instances() {
    for inst in stripe_fixtures() {
        let r = check_interpolation(&inst, inst.epsilon(), 1e-11).unwrap();
        println!("{}: lhs {:.3e} residual {:.2e}", r.name, r.lhs, r.residual);
        assert!(r.converged && r.residual < 1e-8, "{r:?}");
        if inst.constraint == StripeConstraint::Mixed {
            assert!(r.lhs < 0.0);
        }
    }
}

#[test]
fn conditional_law_fifty_instances() {
    let (template, kernel) = conditional_law_template().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let verdicts = run_conditional_law(&template, &kernel, 50, &mut rng).unwrap();
    let worst = verdicts.iter().map(|v| v.discrepancy()).fold(0.0, f64::max);
    assert!(verdicts.iter().all(|v| v.is_checked()));
    assert!(worst < 1e-12, "{worst:e}");
}
