use layered_kac::functional::*;
use layered_kac::meanfield::solve_mbeta;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn two_layer(objective: Objective) -> Problem {
    let grid = FunctionalGrid::new(1.0 / 64.0).unwrap();
    let r = grid.reach();
    let mut open = vec![Some(0.4); r];
    open.extend(vec![None; 12]);
    open.extend(vec![Some(-0.7); r]);
    Problem {
        grid,
        beta: 2.0,
        m_beta: solve_mbeta(2.0).m_beta,
        zeta: 0.3,
        layers: vec![
            LayerCells { cells: open, periodic: false },
            LayerCells { cells: vec![None; 20], periodic: true },
        ],
        constraints: Vec::new(),
        objective,
    }
}

fn max_relative_fd_error(p: &Problem, rng: &mut ChaCha8Rng) -> f64 {
    let m = p.filled(|_, _| rng.gen_range(-0.95..0.95));
    let g = p.gradient(&m);
    let h = 1e-6;
    let scale = g.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max).max(1e-300);
    let mut worst = 0.0f64;
    for (l, layer) in p.layers.iter().enumerate() {
        for i in 0..layer.cells.len() {
            if layer.cells[i].is_some() {
                continue;
            }
            let (mut up, mut down) = (m.clone(), m.clone());
            up[l][i] += h;
            down[l][i] -= h;
            let fd = (p.value(&up) - p.value(&down)) / (2.0 * h);
            worst = worst.max((fd - g[l][i]).abs() / scale);
        }
    }
    worst
}

#[test]
fn gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for objective in [Objective::Conditioned, Objective::Excess] {
        let p = two_layer(objective);
        let worst = (0..100).map(|_| max_relative_fd_error(&p, &mut rng)).fold(0.0, f64::max);
        println!("{objective:?}: worst relative error {worst:.3e}");
        assert!(worst < 1e-5);
    }
}

#[test]
fn value_is_flip_symmetric() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for objective in [Objective::Conditioned, Objective::Excess] {
        let p = two_layer(objective);
        let q = p.flipped();
        let m = p.filled(|_, _| rng.gen_range(-0.9..0.9));
        let neg = q.filled(|l, i| -m[l][i]);
        assert!((p.value(&m) - q.value(&neg)).abs() < 1e-12);
    }
}

fn decay(ell_plus: usize, left: i8, right: i8) -> DecayReport {
    let inst = DecayInstance {
        gamma: 1.0 / 64.0,
        beta: 2.0,
        zeta: 0.3,
        ell_minus: 32,
        ell_plus,
        left,
        right,
        etas: Vec::new(),
    };
    check_decay(&inst, &MinimizeOptions::default()).unwrap()
}

#[test]
fn decay_all_plus_is_flat() {
    let r = decay(256, 1, 1);
    assert!(r.mid_deviation < 1e-6 && r.edge_deviation < 1e-6, "{} {}", r.mid_deviation, r.edge_deviation);
}

#[test]
fn decay_with_mixed_flanks() {
    let reports: Vec<DecayReport> = [256, 384, 512].iter().map(|&l| decay(l, -1, 1)).collect();
    for r in &reports {
        println!(
            "ell_plus {}: mid {:.3e} edge {:.3e} iterations {} converged {}",
            r.ell_plus, r.mid_deviation, r.edge_deviation, r.minimum.iterations, r.minimum.converged
        );
        assert!(r.minimum.monotone);
        assert!(r.mid_deviation < r.edge_deviation);
    }
    for w in reports.windows(2) {
        assert!(w[1].mid_deviation <= w[0].mid_deviation);
    }
    let pts: Vec<(usize, f64)> = reports.iter().map(|r| (r.ell_plus, r.mid_deviation)).collect();
    if let Some(fit) = fit_decay(1.0 / 64.0, &pts, 1e-12) {
        println!("fitted omega {:.4}, prefactor {:.3e}", fit.omega, fit.prefactor);
    }
}

fn excess(etas: Vec<i8>) -> ExcessReport {
    let inst = ExcessInstance { gamma: 1.0 / 64.0, beta: 2.0, zeta: 0.3, ell_minus: 32, etas };
    excess_bound_check(&inst, &[0.01, 0.1, 1.0], &MinimizeOptions::default()).unwrap()
}

#[test]
fn excess_signs() {
    let flat = excess(vec![1; 6]);
    println!("n=0 p=0: excess {:.3e}", flat.excess);
    assert!(flat.excess.abs() < 1e-9);
    let wall = excess(vec![1, 1, 1, -1, -1, -1]);
    println!("n=1: excess {:.6} largest c {:?}", wall.excess, wall.largest_c);
    assert!(wall.excess > 0.0);
    let zero = excess(vec![1, 1, 0, 1, 1, 1]);
    println!("n=0 p=1: excess {:.6}", zero.excess);
    assert!(zero.excess >= flat.excess);
    let both = excess(vec![1, 0, 1, 1, -1, -1, -1]);
    let wall7 = excess(vec![1, 1, 1, 1, -1, -1, -1]);
    println!("n=1 p=1: excess {:.6} vs n=1 p=0 {:.6}", both.excess, wall7.excess);
    assert!(both.excess >= wall7.excess);
}
