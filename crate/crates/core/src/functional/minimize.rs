use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::problem::{Problem, Profile};
use crate::error::Result;

pub const PG_TOLERANCE: f64 = 1e-8;
pub const MAX_ITERATIONS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinimizeOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        MinimizeOptions {
            tolerance: PG_TOLERANCE,
            max_iterations: MAX_ITERATIONS,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Seed {
    /// `η·m_β` on constrained windows, `+m_β` elsewhere.
    Eta,
    Plus,
    Minus,
    Random,
}

impl Seed {
    pub const ALL: [Seed; 4] = [Seed::Eta, Seed::Plus, Seed::Minus, Seed::Random];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Minimum {
    pub profile: Profile,
    pub value: f64,
    pub iterations: usize,
    /// `‖m - P(m - ∇F/δ)‖_∞` at exit.
    pub pg_norm: f64,
    pub converged: bool,
    /// Every accepted step lowered the value.
    pub monotone: bool,
    pub seed: Seed,
}

fn step(problem: &Problem, m: &Profile, g: &Profile, t: f64) -> Profile {
    let mut next: Profile = m
        .iter()
        .zip(g)
        .map(|(row, grow)| row.iter().zip(grow).map(|(v, d)| v - t * d).collect())
        .collect();
    problem.project(&mut next);
    next
}

fn sup_diff(a: &Profile, b: &Profile) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Projected gradient descent with Armijo backtracking from `start`.
pub fn descend(problem: &Problem, start: Profile, opts: &MinimizeOptions) -> Minimum {
    let delta = problem.grid.delta();
    let mut m = start;
    problem.project(&mut m);
    let mut value = problem.value(&m);
    let mut t: f64 = 0.5;
    let mut monotone = true;
    let mut pg_norm = f64::INFINITY;
    let mut iterations = 0;
    while iterations < opts.max_iterations {
        let g: Profile = problem
            .gradient(&m)
            .into_iter()
            .map(|row| row.into_iter().map(|v| v / delta).collect())
            .collect();
        pg_norm = sup_diff(&m, &step(problem, &m, &g, 1.0));
        if pg_norm < opts.tolerance {
            break;
        }
        iterations += 1;
        t = (t * 2.0).min(1e3);
        let mut accepted = false;
        while t > 1e-18 {
            let next = step(problem, &m, &g, t);
            let (mut lin, mut quad) = (0.0, 0.0);
            for ((a, b), d) in next.iter().flatten().zip(m.iter().flatten()).zip(g.iter().flatten()) {
                lin += d * (a - b);
                quad += (a - b) * (a - b);
            }
            let candidate = problem.value(&next);
            if candidate <= value + delta * (lin + quad / (2.0 * t)) {
                if candidate > value {
                    monotone = false;
                }
                m = next;
                value = candidate;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Minimum {
        profile: m,
        value,
        iterations,
        pg_norm,
        converged: pg_norm < opts.tolerance,
        monotone,
        seed: Seed::Eta,
    }
}

pub fn seed_profile(problem: &Problem, seed: Seed, rng_seed: u64) -> Profile {
    let mb = problem.m_beta;
    match seed {
        Seed::Plus => problem.filled(|_, _| mb),
        Seed::Minus => problem.filled(|_, _| -mb),
        Seed::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
            let mut p = problem.filled(|_, _| 0.0);
            for (layer, row) in problem.layers.iter().zip(p.iter_mut()) {
                for (v, c) in row.iter_mut().zip(&layer.cells) {
                    if c.is_none() {
                        *v = rng.gen_range(-1.0..1.0);
                    }
                }
            }
            p
        }
        Seed::Eta => {
            let mut p = problem.filled(|_, _| mb);
            for c in &problem.constraints {
                for v in &mut p[c.layer][c.cells.clone()] {
                    *v = c.eta as f64 * mb;
                }
            }
            p
        }
    }
}

/// Best of the descents from every [`Seed`].
pub fn minimize(problem: &Problem, opts: &MinimizeOptions) -> Result<Minimum> {
    problem.validate()?;
    let best = Seed::ALL
        .iter()
        .map(|&s| Minimum {
            seed: s,
            ..descend(problem, seed_profile(problem, s, opts.seed), opts)
        })
        .filter(|r| problem.is_feasible(&r.profile, 1e-9))
        .min_by(|a, b| a.value.total_cmp(&b.value));
    best.ok_or_else(|| crate::error::Error::Infeasible("no seed reached a feasible profile".into()))
}
