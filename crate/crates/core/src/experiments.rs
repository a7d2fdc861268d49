//! Replica scenarios: magnetization under fixed boundaries, symmetry under
//! periodic closure, and contour censuses of sampled configurations.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coarse::{check_frame, contour_stats, extract_contours, CoarseFields, FrameSpec, PhaseRule};
use crate::error::Result;
use crate::io::{write_csv, SweepBc, SWEEP_SCHEMA};
use crate::mc::{batch_means_se, heat_bath_sweep, run, FieldCache, RunSpec};
use crate::meanfield::solve_mbeta;
use crate::model::{KacKernel, Lattice, ModelParams};

/// Settings shared by every cell of a magnetization sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPlan {
    pub alpha: f64,
    pub a: f64,
    pub width: usize,
    pub height: usize,
    pub sweeps: usize,
    pub burn_in: usize,
    pub measure_every: usize,
    pub replicas: usize,
    pub seed: u64,
    pub max_site_sweeps: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub beta: f64,
    pub gamma: f64,
    #[serde(rename = "A")]
    pub vertical_exponent: f64,
    pub bc: SweepBc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellStatus {
    Ok,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MagnetizationRow {
    pub cell: SweepCell,
    pub m_beta: f64,
    /// Per-replica time averages.
    pub replica_means: Vec<f64>,
    pub mean: f64,
    pub se: f64,
    /// `|mean - s m_β|` with `s` the boundary sign (0 for periodic).
    pub deviation: f64,
    pub status: CellStatus,
}

fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

impl SweepPlan {
    pub fn run_spec(&self, cell: &SweepCell) -> Result<RunSpec> {
        let params = ModelParams::new(cell.beta, cell.gamma, cell.vertical_exponent, self.alpha, self.a)?;
        let (h, v) = cell.bc.boundaries();
        let lattice = Lattice::new(self.width, self.height, h, v, params.kac_range())?;
        let mut spec = RunSpec::new(params, lattice, self.sweeps, self.burn_in, self.seed);
        spec.replicas = self.replicas;
        spec.measure_every = self.measure_every;
        Ok(spec)
    }

    fn cost(&self) -> f64 {
        (self.width * self.height) as f64 * self.sweeps as f64 * self.replicas as f64
    }
}

pub fn magnetization_cell(plan: &SweepPlan, cell: &SweepCell) -> Result<MagnetizationRow> {
    let spec = plan.run_spec(cell)?;
    let m_beta = solve_mbeta(cell.beta).m_beta;
    if plan.max_site_sweeps.is_some_and(|max| plan.cost() > max) {
        return Ok(MagnetizationRow {
            cell: *cell,
            m_beta,
            replica_means: Vec::new(),
            mean: f64::NAN,
            se: f64::NAN,
            deviation: f64::NAN,
            status: CellStatus::Skipped,
        });
    }
    let out = run(&spec)?;
    let replica_means: Vec<f64> = (0..spec.replicas)
        .map(|r| out.time_average(r, crate::mc::Channel::Magnetization).unwrap_or(f64::NAN))
        .collect();
    let (mean, mut se) = mean_and_se(&replica_means);
    if spec.replicas == 1 {
        se = batch_means_se(&out.magnetization_series(0), 20);
    }
    Ok(MagnetizationRow {
        cell: *cell,
        m_beta,
        deviation: (mean - cell.bc.sign() * m_beta).abs(),
        replica_means,
        mean,
        se,
        status: CellStatus::Ok,
    })
}

/// Runs every cell in order; replicas inside a cell run in parallel.
pub fn scenario_magnetization(plan: &SweepPlan, cells: &[SweepCell]) -> Result<Vec<MagnetizationRow>> {
    cells.iter().map(|c| magnetization_cell(plan, c)).collect()
}

/// Cartesian product of the grids, in the order β, γ, A, bc.
pub fn sweep_cells(betas: &[f64], gammas: &[f64], exponents: &[f64], bcs: &[SweepBc]) -> Vec<SweepCell> {
    let mut cells = Vec::new();
    for &beta in betas {
        for &gamma in gammas {
            for &vertical_exponent in exponents {
                for &bc in bcs {
                    cells.push(SweepCell { beta, gamma, vertical_exponent, bc });
                }
            }
        }
    }
    cells
}

pub fn magnetization_csv(plan: &SweepPlan, rows: &[MagnetizationRow]) -> Vec<u8> {
    write_csv(
        SWEEP_SCHEMA,
        &["beta", "gamma", "A", "bc", "width", "height", "replicas", "mean", "se", "deviation", "m_beta", "status"],
        rows.iter().map(|r| {
            vec![
                r.cell.beta.to_string(),
                r.cell.gamma.to_string(),
                r.cell.vertical_exponent.to_string(),
                r.cell.bc.name().to_string(),
                plan.width.to_string(),
                plan.height.to_string(),
                plan.replicas.to_string(),
                r.mean.to_string(),
                r.se.to_string(),
                r.deviation.to_string(),
                r.m_beta.to_string(),
                match r.status {
                    CellStatus::Ok => "ok",
                    CellStatus::Skipped => "skipped",
                }
                .to_string(),
            ]
        }),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetryReport {
    pub replica_means: Vec<f64>,
    pub mean: f64,
    pub se: f64,
    /// Moments of the pooled magnetization samples.
    pub samples: usize,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    /// `(g² + 1) / (k + 3(n-1)²/((n-2)(n-3)))`; above 5/9 hints at two modes.
    pub bimodality_coefficient: f64,
    pub dip: f64,
    /// `(lower edge, upper edge, count)` on `[-1, 1]`.
    pub histogram: Vec<(f64, f64, usize)>,
}

pub fn scenario_periodic_symmetry(spec: &RunSpec, bins: usize) -> Result<SymmetryReport> {
    let out = run(spec)?;
    let replica_means: Vec<f64> = (0..spec.replicas)
        .map(|r| out.time_average(r, crate::mc::Channel::Magnetization).unwrap_or(f64::NAN))
        .collect();
    let (mean, se) = mean_and_se(&replica_means);
    let pooled: Vec<f64> = (0..spec.replicas).flat_map(|r| out.magnetization_series(r)).collect();
    let m = moments(&pooled);
    let bins = bins.max(1);
    let mut counts = vec![0usize; bins];
    for &v in &pooled {
        let k = (((v + 1.0) / 2.0) * bins as f64).floor() as isize;
        counts[k.clamp(0, bins as isize - 1) as usize] += 1;
    }
    let width = 2.0 / bins as f64;
    Ok(SymmetryReport {
        replica_means,
        mean,
        se,
        samples: pooled.len(),
        skewness: m.skewness,
        excess_kurtosis: m.excess_kurtosis,
        bimodality_coefficient: m.bimodality,
        dip: dip_statistic(&pooled),
        histogram: counts
            .into_iter()
            .enumerate()
            .map(|(k, c)| (-1.0 + k as f64 * width, -1.0 + (k + 1) as f64 * width, c))
            .collect(),
    })
}

struct Moments {
    skewness: f64,
    excess_kurtosis: f64,
    bimodality: f64,
}

fn moments(x: &[f64]) -> Moments {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let m2 = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let m3 = x.iter().map(|v| (v - mean).powi(3)).sum::<f64>() / n;
    let m4 = x.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / n;
    if m2 == 0.0 || x.len() < 4 {
        return Moments { skewness: 0.0, excess_kurtosis: 0.0, bimodality: f64::NAN };
    }
    let g = m3 / m2.powf(1.5);
    let k = m4 / (m2 * m2) - 3.0;
    let bimodality = (g * g + 1.0) / (k + 3.0 * (n - 1.0).powi(2) / ((n - 2.0) * (n - 3.0)));
    Moments { skewness: g, excess_kurtosis: k, bimodality }
}

/// Hull of `(x, F)` points: lower convex when `convex`, upper concave otherwise.
fn hull(points: &[(f64, f64)], convex: bool) -> Vec<(f64, f64)> {
    let mut h: Vec<(f64, f64)> = Vec::new();
    for &p in points {
        while h.len() >= 2 {
            let (a, b) = (h[h.len() - 2], h[h.len() - 1]);
            let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
            if (convex && cross <= 0.0) || (!convex && cross >= 0.0) {
                h.pop();
            } else {
                break;
            }
        }
        h.push(p);
    }
    h
}

/// Sup distance between the points and their hull, and the slope of the
/// hull segment touching the modal side (last for `convex`, first otherwise).
fn hull_fit(points: &[(f64, f64)], convex: bool) -> (f64, f64) {
    if points.len() < 2 {
        return (0.0, 0.0);
    }
    let h = hull(points, convex);
    let slope = |a: (f64, f64), b: (f64, f64)| if b.0 == a.0 { f64::INFINITY } else { (b.1 - a.1) / (b.0 - a.0) };
    let mut j = 0;
    let mut worst: f64 = 0.0;
    for &(x, f) in points {
        while j + 2 < h.len() && h[j + 1].0 <= x {
            j += 1;
        }
        let (a, b) = (h[j], h[(j + 1).min(h.len() - 1)]);
        let y = if b.0 == a.0 { a.1 } else { a.1 + (b.1 - a.1) * (x - a.0) / (b.0 - a.0) };
        worst = worst.max((f - y).abs());
    }
    let edge = if h.len() < 2 {
        0.0
    } else if convex {
        slope(h[h.len() - 2], h[h.len() - 1])
    } else {
        slope(h[0], h[1])
    };
    (worst, edge)
}

/// Dip-type unimodality statistic: half the smallest sup distance between
/// the empirical CDF and a fit that is convex left of a modal interval,
/// linear on it with the largest slope, and concave right of it. Near zero
/// for unimodal samples, large when mass sits in separated groups. Samples
/// above 400 points are thinned to evenly spaced order statistics.
pub fn dip_statistic(samples: &[f64]) -> f64 {
    if samples.len() < 3 {
        return 0.0;
    }
    let mut x = samples.to_vec();
    x.sort_by(f64::total_cmp);
    const MAX: usize = 400;
    if x.len() > MAX {
        let n = x.len();
        x = (0..MAX).map(|i| x[i * (n - 1) / (MAX - 1)]).collect();
    }
    let n = x.len();
    let pts: Vec<(f64, f64)> = (0..n).map(|i| (x[i], (i + 1) as f64 / n as f64)).collect();
    let left: Vec<(f64, f64)> = (0..n).map(|a| hull_fit(&pts[..=a], true)).collect();
    let right: Vec<(f64, f64)> = (0..n).map(|b| hull_fit(&pts[b..], false)).collect();
    let mut best = f64::INFINITY;
    for a in 0..n {
        for b in a + 1..n {
            let (pa, pb) = (pts[a], pts[b]);
            let s = if pb.0 == pa.0 { f64::INFINITY } else { (pb.1 - pa.1) / (pb.0 - pa.0) };
            let tol = 1e-12 * s.abs().max(1.0);
            if (a > 0 && left[a].1 > s + tol) || (b + 1 < n && right[b].1 > s + tol) {
                continue;
            }
            let mut mid: f64 = 0.0;
            for &(xv, f) in &pts[a..=b] {
                let y = if pb.0 == pa.0 { pa.1 } else { pa.1 + s * (xv - pa.0) };
                mid = mid.max((f - y).abs());
            }
            best = best.min(left[a].0.max(right[b].0).max(mid));
        }
    }
    best / 2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusPlan {
    pub samples: usize,
    pub sample_every: usize,
    pub frame: FrameSpec,
    pub rule: PhaseRule,
    /// Site whose contour membership frequency is reported.
    pub site: (usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContourSample {
    pub replica: usize,
    pub sweep: usize,
    pub sign: i8,
    pub n0: usize,
    pub stripes: usize,
    pub s_total: usize,
    pub support_size: usize,
    pub contains_site: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusReport {
    /// Snapshots examined, including frame violations.
    pub snapshots: usize,
    pub frame_violations: usize,
    pub contours: Vec<ContourSample>,
    pub contours_per_site: f64,
    pub covered_fraction: f64,
    /// Contours per framed snapshot with N₀ ≥ 1.
    pub frequency_n0_at_least_1: f64,
    pub frequency_n0_at_least_2: f64,
    /// Fraction of framed snapshots where the chosen site lies in a contour.
    pub site_frequency: f64,
}

impl CensusReport {
    pub fn total_support(&self) -> usize {
        self.contours.iter().map(|c| c.support_size).sum()
    }
}

/// Samples `plan.samples` snapshots per replica after burn-in and
/// extracts contours from each.
pub fn scenario_contour_census(spec: &RunSpec, plan: &CensusPlan) -> Result<CensusReport> {
    spec.validate()?;
    crate::model::check_block_width(spec.lattice.width, spec.block_scales().ell_plus)?;
    let kernel = KacKernel::new(spec.params.gamma())?;
    let m_beta = solve_mbeta(spec.params.beta()).m_beta;
    let per_replica = (0..spec.replicas)
        .into_par_iter()
        .map(|replica| census_replica(spec, plan, &kernel, m_beta, replica))
        .collect::<Result<Vec<_>>>()?;
    let sites = spec.lattice.sites() as f64;
    let (mut snapshots, mut violations, mut framed, mut site_hits) = (0, 0, 0, 0);
    let mut contours = Vec::new();
    for r in per_replica {
        snapshots += r.snapshots;
        violations += r.violations;
        framed += r.snapshots - r.violations;
        site_hits += r.site_hits;
        contours.extend(r.contours);
    }
    let denom = (framed as f64).max(1.0);
    let count = |pred: &dyn Fn(&ContourSample) -> bool| contours.iter().filter(|c| pred(c)).count() as f64;
    let covered: usize = contours.iter().map(|c| c.support_size).sum();
    Ok(CensusReport {
        snapshots,
        frame_violations: violations,
        contours_per_site: contours.len() as f64 / (denom * sites),
        covered_fraction: covered as f64 / (denom * sites),
        frequency_n0_at_least_1: count(&|c| c.n0 >= 1) / denom,
        frequency_n0_at_least_2: count(&|c| c.n0 >= 2) / denom,
        site_frequency: site_hits as f64 / denom,
        contours,
    })
}

struct ReplicaCensus {
    snapshots: usize,
    violations: usize,
    site_hits: usize,
    contours: Vec<ContourSample>,
}

fn census_replica(spec: &RunSpec, plan: &CensusPlan, kernel: &KacKernel, m_beta: f64, replica: usize) -> Result<ReplicaCensus> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(replica as u64);
    let mut cfg = spec.init.build(spec.lattice, &mut rng);
    let mut cache = FieldCache::new(&cfg, kernel);
    let mut order = Vec::new();
    let (beta, eps) = (spec.params.beta(), spec.epsilon());
    let scales = spec.block_scales();
    let site_cell = (plan.site.1, plan.site.0 / scales.ell_plus);
    let mut out = ReplicaCensus { snapshots: 0, violations: 0, site_hits: 0, contours: Vec::new() };
    let total = spec.burn_in + plan.samples * plan.sample_every.max(1);
    for sweep in 1..=total {
        heat_bath_sweep(&mut cfg, &mut cache, kernel, beta, eps, &mut order, &mut rng);
        if sweep % spec.resync_every == 0 {
            cache.resync(&cfg, kernel, crate::mc::CACHE_TOLERANCE)?;
        }
        if sweep <= spec.burn_in || !(sweep - spec.burn_in).is_multiple_of(plan.sample_every.max(1)) {
            continue;
        }
        out.snapshots += 1;
        let fields = CoarseFields::compute_with_rule(&cfg, scales, m_beta, plan.rule)?;
        if check_frame(&fields, plan.frame).is_err() {
            out.violations += 1;
            continue;
        }
        let mut hit = false;
        for c in extract_contours(&fields, plan.frame)? {
            let stats = contour_stats(&fields, &c.support, false);
            let contains = c.support.iter().any(|b| (b.layer, b.block) == site_cell);
            hit |= contains;
            out.contours.push(ContourSample {
                replica,
                sweep,
                sign: c.sign,
                n0: stats.n0,
                stripes: stats.stripes,
                s_total: stats.s_total,
                support_size: stats.support_size,
                contains_site: contains,
            });
        }
        if hit {
            out.site_hits += 1;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn dip_separates_one_and_two_modes() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let uni: Vec<f64> = (0..2000).map(|_| rng.gen_range(-0.3..0.3) + rng.gen_range(-0.3..0.3)).collect();
        let bi: Vec<f64> = (0..2000)
            .map(|i| if i % 2 == 0 { 0.9 } else { -0.9 } + rng.gen_range(-0.05..0.05))
            .collect();
        let (du, db) = (dip_statistic(&uni), dip_statistic(&bi));
        assert!(du < 0.03 && db > 0.2, "{du} {db}");
        assert!(moments(&bi).bimodality > 5.0 / 9.0);
        assert!(moments(&uni).bimodality < 5.0 / 9.0);
    }

    #[test]
    fn skipped_cells_are_marked() {
        let plan = SweepPlan {
            alpha: 0.3,
            a: 0.05,
            width: 256,
            height: 4,
            sweeps: 100,
            burn_in: 10,
            measure_every: 1,
            replicas: 2,
            seed: 1,
            max_site_sweeps: Some(1.0),
        };
        let cell = SweepCell { beta: 2.0, gamma: 0.25, vertical_exponent: 2.0, bc: SweepBc::Plus };
        assert_eq!(magnetization_cell(&plan, &cell).unwrap().status, CellStatus::Skipped);
    }

    #[test]
    fn small_plus_run_is_magnetized() {
        let plan = SweepPlan {
            alpha: 0.3,
            a: 0.05,
            width: 128,
            height: 2,
            sweeps: 300,
            burn_in: 50,
            measure_every: 1,
            replicas: 2,
            seed: 4,
            max_site_sweeps: None,
        };
        let cells = sweep_cells(&[2.0], &[0.25], &[2.0], &[SweepBc::Plus, SweepBc::Minus]);
        let rows = scenario_magnetization(&plan, &cells).unwrap();
        assert!(rows[0].mean > 0.7 && rows[1].mean < -0.7);
        let csv = magnetization_csv(&plan, &rows);
        let (_, parsed) = crate::io::read_csv(&csv, SWEEP_SCHEMA).unwrap();
        assert_eq!(parsed.len(), 2);
    }
}
