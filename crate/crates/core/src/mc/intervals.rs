use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::coarse::CoarseFields;
use crate::error::Result;
use crate::model::{Scales, SpinConfig};

/// Run-length histograms (lengths in sites) of maximal same-sign η runs.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalHistogram {
    pub per_layer: Vec<BTreeMap<usize, usize>>,
}

impl IntervalHistogram {
    pub fn total_runs(&self) -> usize {
        self.per_layer.iter().flat_map(|h| h.values()).sum()
    }

    pub fn merged(&self) -> BTreeMap<usize, usize> {
        let mut out = BTreeMap::new();
        for h in &self.per_layer {
            for (&len, &n) in h {
                *out.entry(len).or_insert(0) += n;
            }
        }
        out
    }

    pub fn mean_length(&self) -> f64 {
        let (mut n, mut s) = (0usize, 0usize);
        for (len, c) in self.merged() {
            n += c;
            s += len * c;
        }
        if n == 0 {
            0.0
        } else {
            s as f64 / n as f64
        }
    }

    /// Lower median of all run lengths, 0 with no runs.
    pub fn median_length(&self) -> usize {
        let merged = self.merged();
        let n: usize = merged.values().sum();
        if n == 0 {
            return 0;
        }
        let target = n.div_ceil(2);
        let mut acc = 0;
        for (len, c) in merged {
            acc += c;
            if acc >= target {
                return len;
            }
        }
        unreachable!()
    }
}

/// Runs of η = +1 or η = -1 along each layer; periodic layers join a run
/// across the seam.
pub fn interval_length_stats(cfg: &SpinConfig, scales: Scales, m_beta: f64) -> Result<IntervalHistogram> {
    let fields = CoarseFields::compute(cfg, scales, m_beta)?;
    Ok(interval_histogram(&fields))
}

pub fn interval_histogram(fields: &CoarseFields) -> IntervalHistogram {
    let lat = fields.lattice();
    let periodic = lat.margin_spin(0).is_none();
    let lm = fields.scales().ell_minus;
    let per_layer = (0..lat.height)
        .map(|layer| {
            let mut runs = sign_runs(fields.eta_row(layer), periodic);
            let mut h = BTreeMap::new();
            for len in runs.drain(..) {
                *h.entry(len * lm).or_insert(0) += 1;
            }
            h
        })
        .collect();
    IntervalHistogram { per_layer }
}

fn sign_runs(row: &[i8], periodic: bool) -> Vec<usize> {
    let mut runs: Vec<(i8, usize)> = Vec::new();
    for &v in row {
        match runs.last_mut() {
            Some((s, n)) if *s == v => *n += 1,
            _ => runs.push((v, 1)),
        }
    }
    if periodic && runs.len() > 1 && runs[0].0 == runs[runs.len() - 1].0 {
        let (_, n) = runs.pop().unwrap();
        runs[0].1 += n;
    }
    runs.into_iter().filter(|&(s, _)| s != 0).map(|(_, n)| n).collect()
}
