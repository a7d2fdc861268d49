use std::collections::HashSet;

use layered_kac::bounds::{find_gamma0, peierls_sum_check, BoundConstants, BoundExponents};
use layered_kac::coarse::{check_frame, extract_contours, BlockCell, CoarseFields, FrameSpec, Phase};
use layered_kac::functional::{ExcessInstance, Problem};
use layered_kac::io::{expand_runs, params_hash, read_spins, run_length, write_spins};
use layered_kac::mc::{heat_bath_sweep, FieldCache};
use layered_kac::meanfield::{solve_mbeta, tbeta};
use layered_kac::model::{
    conditional_gibbs, hamiltonian_with_epsilon, local_field, HorizontalBc, KacKernel, Lattice, ModelParams, Scales,
    SpinConfig, VerticalBc,
};
use layered_kac::numerics::{compensated_sum, LogSumExp};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const LM: usize = 2;
const LP: usize = 4;
const BLOCKS: usize = 8;
const HEIGHT: usize = 5;
const M_BETA: f64 = 0.957504024077269;

fn scales() -> Scales {
    Scales::new(LM, LP, 0.3).unwrap()
}

/// One code per ℓ- block: mostly plus, some minus, some mixed.
fn block_codes() -> impl Strategy<Value = Vec<u8>> {
    prop::collection::vec(0u8..7, BLOCKS * LP / LM * HEIGHT)
}

fn config_from(codes: &[u8], h: HorizontalBc, v: VerticalBc) -> SpinConfig {
    let lat = Lattice::with_blocks(BLOCKS * LP, HEIGHT, h, v, 2, LP).unwrap();
    let per_layer = BLOCKS * LP / LM;
    SpinConfig::from_fn(lat, |x, layer| match codes[layer * per_layer + x / LM] {
        0..=3 => 1,
        4 | 5 => -1,
        _ if x % LM == 0 => 1,
        _ => -1,
    })
}

fn phases(f: &CoarseFields) -> Vec<Vec<Phase>> {
    (0..HEIGHT)
        .map(|layer| (0..BLOCKS).map(|block| f.phase_cell(BlockCell { layer, block })).collect())
        .collect()
}

fn no_plus_minus_contact(p: &[Vec<Phase>], wrap: bool) -> bool {
    let (h, w) = (p.len() as isize, p[0].len() as isize);
    for l in 0..h {
        for b in 0..w {
            if p[l as usize][b as usize] != Phase::Plus {
                continue;
            }
            for dl in -1..=1 {
                for db in -1..=1 {
                    let (mut nl, mut nb) = (l + dl, b + db);
                    if wrap {
                        nl = nl.rem_euclid(h);
                        nb = nb.rem_euclid(w);
                    }
                    if (0..h).contains(&nl) && (0..w).contains(&nb) && p[nl as usize][nb as usize] == Phase::Minus {
                        return false;
                    }
                }
            }
        }
    }
    true
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn coarse_partition_and_separation(codes in block_codes()) {
        let cfg = config_from(&codes, HorizontalBc::Plus, VerticalBc::Plus);
        let f = CoarseFields::compute(&cfg, scales(), M_BETA).unwrap();
        let p = phases(&f);
        prop_assert!(no_plus_minus_contact(&p, false));
        let undetermined: HashSet<BlockCell> = f.cells().filter(|&c| f.phase_cell(c) == Phase::Undetermined).collect();
        let plus = f.cells().filter(|&c| f.phase_cell(c) == Phase::Plus).count();
        let minus = f.cells().filter(|&c| f.phase_cell(c) == Phase::Minus).count();
        prop_assert_eq!(plus + minus + undetermined.len(), BLOCKS * HEIGHT);
        prop_assert_eq!(f.cells().count(), BLOCKS * HEIGHT);
        if check_frame(&f, FrameSpec::default()).is_ok() {
            let contours = extract_contours(&f, FrameSpec::default()).unwrap();
            let mut seen = HashSet::new();
            for c in &contours {
                for cell in &c.support {
                    prop_assert!(seen.insert(*cell), "supports overlap at {:?}", cell);
                }
            }
            prop_assert_eq!(&seen, &undetermined);
            for c in &contours {
                for int in &c.interiors {
                    for cell in &int.cells {
                        prop_assert!(!c.support.contains(cell));
                    }
                }
            }
        }
    }

    #[test]
    fn coarse_flip_covariance(codes in block_codes()) {
        let cfg = config_from(&codes, HorizontalBc::Plus, VerticalBc::Minus);
        let f = CoarseFields::compute(&cfg, scales(), M_BETA).unwrap();
        let g = CoarseFields::compute(&cfg.flipped(), scales(), M_BETA).unwrap();
        for c in f.cells() {
            prop_assert_eq!(f.phase_cell(c).sign(), -g.phase_cell(c).sign());
            let (a, b) = (f.eta_of(c), g.eta_of(c));
            prop_assert!(a.iter().zip(b).all(|(x, y)| *x == -*y));
        }
    }

    #[test]
    fn coarse_translation_covariance(codes in block_codes(), k in 1usize..BLOCKS) {
        let cfg = config_from(&codes, HorizontalBc::Periodic, VerticalBc::Periodic);
        let f = CoarseFields::compute(&cfg, scales(), M_BETA).unwrap();
        let g = CoarseFields::compute(&cfg.shifted((k * LP) as isize), scales(), M_BETA).unwrap();
        prop_assert!(no_plus_minus_contact(&phases(&f), true));
        for c in f.cells() {
            let moved = BlockCell { layer: c.layer, block: (c.block + k) % BLOCKS };
            prop_assert_eq!(f.phase_cell(c), g.phase_cell(moved));
        }
    }
}

fn small_lattice() -> impl Strategy<Value = (f64, usize, usize, HorizontalBc, VerticalBc)> {
    (
        prop::sample::select(vec![0.5, 0.3, 0.25]),
        8usize..14,
        1usize..4,
        prop::sample::select(vec![HorizontalBc::Plus, HorizontalBc::Minus, HorizontalBc::Periodic]),
        prop::sample::select(vec![VerticalBc::Plus, VerticalBc::Minus, VerticalBc::Periodic, VerticalBc::MixedDobrushin]),
    )
        .prop_filter("periodic vertical needs two layers", |(_, _, h, _, v)| *v != VerticalBc::Periodic || *h >= 2)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn energy_flip_covariance((gamma, w, h, hb, vb) in small_lattice(), seed in any::<u64>(), eps in 0.0f64..0.5) {
        let k = KacKernel::new(gamma).unwrap();
        let lat = Lattice::new(w, h, hb, vb, k.range()).unwrap();
        let cfg = SpinConfig::random(lat, &mut ChaCha8Rng::seed_from_u64(seed));
        let flip = cfg.flipped();
        let (a, b) = (hamiltonian_with_epsilon(&cfg, &k, eps), hamiltonian_with_epsilon(&flip, &k, eps));
        prop_assert!((a - b).abs() < 1e-10 * (1.0 + a.abs()));
        for layer in 0..h {
            for x in 0..w {
                prop_assert!((local_field(&cfg, &k, x, layer) + local_field(&flip, &k, x, layer)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn energy_translation_invariance((gamma, w, h, _, vb) in small_lattice(), seed in any::<u64>(), shift in 1isize..8) {
        let k = KacKernel::new(gamma).unwrap();
        let lat = Lattice::new(w, h, HorizontalBc::Periodic, vb, k.range()).unwrap();
        let cfg = SpinConfig::random(lat, &mut ChaCha8Rng::seed_from_u64(seed));
        let moved = cfg.shifted(shift);
        let (a, b) = (hamiltonian_with_epsilon(&cfg, &k, 0.2), hamiltonian_with_epsilon(&moved, &k, 0.2));
        prop_assert!((a - b).abs() < 1e-10 * (1.0 + a.abs()));
        for layer in 0..h {
            for x in 0..w {
                let y = (x as isize + shift).rem_euclid(w as isize) as usize;
                prop_assert!((local_field(&cfg, &k, x, layer) - local_field(&moved, &k, y, layer)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn gibbs_complement(f in -50.0f64..50.0, beta in 0.0f64..10.0) {
        prop_assert!((conditional_gibbs(f, beta) + conditional_gibbs(-f, beta) - 1.0).abs() <= 1e-15);
    }

    #[test]
    fn mean_field_fixed_point_is_stable(beta in 1.05f64..5.0, d in 1e-4f64..0.05) {
        let m = solve_mbeta(beta).m_beta;
        prop_assert!((m - (beta * m).tanh()).abs() < 1e-12);
        prop_assert!(tbeta(m + d, beta) < m + d);
        prop_assert!(tbeta(m - d, beta) > m - d);
        prop_assert!(solve_mbeta(beta + 0.01).m_beta > m);
    }

    #[test]
    fn spin_files_round_trip((gamma, w, h, hb, vb) in small_lattice(), seed in any::<u64>()) {
        let k = KacKernel::new(gamma).unwrap();
        let lat = Lattice::new(w, h, hb, vb, k.range()).unwrap();
        let cfg = SpinConfig::random(lat, &mut ChaCha8Rng::seed_from_u64(seed));
        let params = ModelParams::new(2.0, 0.15, 2.0, 0.3, 0.05).unwrap();
        let mut bytes = Vec::new();
        write_spins(&mut bytes, &cfg, &params_hash(&params)).unwrap();
        let (back, hash) = read_spins(bytes.as_slice()).unwrap();
        prop_assert_eq!(back, cfg);
        prop_assert_eq!(hash, params_hash(&params));
    }

    #[test]
    fn block_runs_round_trip(cells in prop::collection::btree_set((0usize..6, 0usize..40), 0..60)) {
        let cells: Vec<BlockCell> = cells.into_iter().map(|(layer, block)| BlockCell { layer, block }).collect();
        prop_assert_eq!(expand_runs(&run_length(&cells)), cells);
    }

    #[test]
    fn compensated_sum_is_exact_on_integers(xs in prop::collection::vec(-1_000_000i64..1_000_000, 1..200), big in 1e15f64..1e16) {
        let mut values: Vec<f64> = vec![big];
        values.extend(xs.iter().map(|&x| x as f64));
        values.push(-big);
        prop_assert_eq!(compensated_sum(&values), xs.iter().sum::<i64>() as f64);
    }

    #[test]
    fn log_sum_exp_matches_direct(ws in prop::collection::vec(-30.0f64..30.0, 1..50), shift in -600.0f64..600.0) {
        let mut acc = LogSumExp::new(0);
        for &w in &ws {
            acc.push(w + shift);
        }
        let direct = ws.iter().map(|w| w.exp()).sum::<f64>().ln() + shift;
        prop_assert!((acc.log_sum() - direct).abs() < 1e-10 * direct.abs().max(1.0));
    }

    #[test]
    fn projection_is_feasible_and_idempotent(etas in prop::collection::vec(-1i8..=1, 2..6), seed in any::<u64>()) {
        let inst = ExcessInstance { gamma: 1.0 / 64.0, beta: 2.0, zeta: 0.3, ell_minus: 32, etas };
        let problem: Problem = inst.problem().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = problem.filled(|_, _| rand::Rng::gen_range(&mut rng, -1.0..1.0));
        problem.project(&mut m);
        prop_assert!(problem.is_feasible(&m, 1e-9));
        let once = m.clone();
        problem.project(&mut m);
        for (a, b) in once.iter().flatten().zip(m.iter().flatten()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
        let flipped = problem.flipped();
        let neg: Vec<Vec<f64>> = m.iter().map(|l| l.iter().map(|v| -v).collect()).collect();
        let (va, vb) = (problem.value(&m), flipped.value(&neg));
        prop_assert!((va - vb).abs() < 1e-9 * (1.0 + va.abs()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gamma0_monotone_in_constants(c in 0.9f64..3.0, dc in 0.05f64..1.0, a_big in 1.2f64..2.5, da in 0.05f64..0.5) {
        let scan = |c: f64, a_big: f64| {
            let exps = BoundExponents::new(0.1, 0.01, a_big).unwrap();
            find_gamma0(&exps, &BoundConstants::new(c, 0.2), 1e-9, 1.0, 91).map(|r| r.gamma0).unwrap_or(0.0)
        };
        let base = scan(c, a_big);
        prop_assert!(scan(c + dc, a_big) >= base * (1.0 - 1e-9));
        prop_assert!(scan(c, a_big + da) <= base * (1.0 + 1e-9));
    }

    #[test]
    fn peierls_passing_is_downward_closed(gamma in 1e-7f64..1e-4) {
        let exps = BoundExponents::new(0.1, 0.01, 2.0).unwrap();
        let consts = BoundConstants::new(1.0, 0.2);
        prop_assert!(peierls_sum_check(gamma, &exps, &consts).unwrap().passes);
        prop_assert!(peierls_sum_check(gamma / 10.0, &exps, &consts).unwrap().passes);
    }
}

#[test]
fn heat_bath_stationary_law_matches_boltzmann() {
    let (gamma, beta, eps) = (0.5, 1.5, 0.3);
    let kernel = KacKernel::new(gamma).unwrap();
    let lat = Lattice::new(5, 2, HorizontalBc::Plus, VerticalBc::Minus, kernel.range()).unwrap();
    let n = lat.sites();
    let config = |bits: usize| SpinConfig::from_spins(lat, (0..n).map(|i| if bits >> i & 1 == 1 { 1 } else { -1 }).collect()).unwrap();
    let log_w: Vec<f64> = (0..1usize << n).map(|b| -beta * hamiltonian_with_epsilon(&config(b), &kernel, eps)).collect();
    let mut acc = LogSumExp::new(0);
    log_w.iter().for_each(|&w| acc.push(w));
    let exact: Vec<f64> = log_w.iter().map(|w| (w - acc.log_sum()).exp()).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut cfg = SpinConfig::random(lat, &mut rng);
    let mut cache = FieldCache::new(&cfg, &kernel);
    let mut order = Vec::new();
    let mut counts = vec![0u64; 1 << n];
    let (burn, samples) = (1_000, 400_000);
    for sweep in 0..burn + samples {
        heat_bath_sweep(&mut cfg, &mut cache, &kernel, beta, eps, &mut order, &mut rng);
        if sweep >= burn {
            let bits = cfg.spins().iter().enumerate().fold(0usize, |b, (i, &s)| b | (usize::from(s > 0) << i));
            counts[bits] += 1;
        }
    }
    let tv: f64 = 0.5 * counts.iter().zip(&exact).map(|(&c, &p)| (c as f64 / samples as f64 - p).abs()).sum::<f64>();
    println!("total variation {tv:.4}");
    assert!(tv < 0.02);
}
