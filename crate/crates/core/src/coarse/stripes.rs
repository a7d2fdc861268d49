use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::contours::{undetermined_components, Contour};
use super::fields::{BlockCell, CoarseFields};

/// `+-` means Θ = +1 on the upper layer and -1 on the lower one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StripeKind {
    #[serde(rename = "+-")]
    PlusOverMinus,
    #[serde(rename = "-+")]
    MinusOverPlus,
}

/// A maximal run of blocks carrying opposite Θ on two adjacent layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stripe {
    pub kind: StripeKind,
    pub lower_layer: usize,
    pub upper_layer: usize,
    pub start_block: usize,
    pub blocks: usize,
}

impl Stripe {
    /// Number of sites covered on both layers.
    pub fn sites(&self, ell_plus: usize) -> usize {
        2 * self.blocks * ell_plus
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContourStats {
    /// Support cells not covered by any stripe.
    pub n0: usize,
    pub stripes: usize,
    /// Sites covered by stripes.
    pub s_total: usize,
    /// Sites in the support.
    pub support_size: usize,
}

fn kind_of(upper: i8, lower: i8) -> Option<StripeKind> {
    match (upper, lower) {
        (1, -1) => Some(StripeKind::PlusOverMinus),
        (-1, 1) => Some(StripeKind::MinusOverPlus),
        _ => None,
    }
}

/// Stripes whose cells all lie in `cells`. With `wrap`, periodic
/// boundaries are followed in both directions.
pub fn stripes_in(fields: &CoarseFields, cells: &HashSet<BlockCell>, wrap: bool) -> Vec<Stripe> {
    let lat = fields.lattice();
    let (w, h) = (fields.blocks_per_layer(), lat.height);
    let wrap_x = wrap && lat.margin_spin(0).is_none();
    let wrap_y = wrap && lat.vertical.frozen_layer(true).is_none() && h > 1;
    let pairs = if wrap_y { h } else { h.saturating_sub(1) };
    let mut out = Vec::new();
    for lower in 0..pairs {
        let upper = (lower + 1) % h;
        let marks: Vec<Option<StripeKind>> = (0..w)
            .map(|block| {
                let lo = BlockCell { layer: lower, block };
                let up = BlockCell { layer: upper, block };
                if cells.contains(&lo) && cells.contains(&up) {
                    kind_of(fields.big_theta_of(up), fields.big_theta_of(lo))
                } else {
                    None
                }
            })
            .collect();
        for (start, len, kind) in runs(&marks, wrap_x) {
            out.push(Stripe {
                kind,
                lower_layer: lower,
                upper_layer: upper,
                start_block: start,
                blocks: len,
            });
        }
    }
    out
}

fn runs(marks: &[Option<StripeKind>], wrap: bool) -> Vec<(usize, usize, StripeKind)> {
    let n = marks.len();
    if n == 0 {
        return Vec::new();
    }
    if let Some(k) = marks[0] {
        if marks.iter().all(|&m| m == Some(k)) {
            return vec![(0, n, k)];
        }
    }
    // start scanning at a run boundary so wrapped runs are not split
    let offset = if wrap {
        (0..n).find(|&i| marks[i] != marks[(i + n - 1) % n]).unwrap_or(0)
    } else {
        0
    };
    let mut out = Vec::new();
    let mut i = 0;
    while i < n {
        let idx = (offset + i) % n;
        match marks[idx] {
            None => i += 1,
            Some(k) => {
                let mut len = 1;
                while i + len < n && marks[(offset + i + len) % n] == Some(k) {
                    len += 1;
                }
                out.push((idx, len, k));
                i += len;
            }
        }
    }
    out.sort_by_key(|r| r.0);
    out
}

/// Stripes inside one contour's support.
pub fn contour_stripes(fields: &CoarseFields, contour: &Contour) -> Vec<Stripe> {
    let cells: HashSet<BlockCell> = contour.support.iter().copied().collect();
    stripes_in(fields, &cells, false)
}

pub fn contour_stats(fields: &CoarseFields, support: &[BlockCell], wrap: bool) -> ContourStats {
    let cells: HashSet<BlockCell> = support.iter().copied().collect();
    let stripes = stripes_in(fields, &cells, wrap);
    let lp = fields.scales().ell_plus;
    let mut covered: HashSet<BlockCell> = HashSet::new();
    let w = fields.blocks_per_layer();
    for s in &stripes {
        for k in 0..s.blocks {
            let block = (s.start_block + k) % w;
            covered.insert(BlockCell { layer: s.lower_layer, block });
            covered.insert(BlockCell { layer: s.upper_layer, block });
        }
    }
    ContourStats {
        n0: cells.len() - covered.len(),
        stripes: stripes.len(),
        s_total: covered.len() * lp,
        support_size: cells.len() * lp,
    }
}

/// Stripes of the whole undetermined region, following periodic wrap.
/// Available for any boundary condition.
pub fn extract_stripes(fields: &CoarseFields) -> Vec<Stripe> {
    let cells: HashSet<BlockCell> = undetermined_components(fields, true).into_iter().flatten().collect();
    stripes_in(fields, &cells, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{HorizontalBc, Lattice, Scales, SpinConfig, VerticalBc};

    const M: f64 = 0.957_504_024_077_268_8;

    #[test]
    fn dobrushin_interface_is_one_stripe() {
        let lat = Lattice::new(64, 6, HorizontalBc::Periodic, VerticalBc::MixedDobrushin, 2).unwrap();
        let upper = lat.vertical.frozen_layer(true).unwrap();
        let cfg = SpinConfig::from_fn(lat, |_, l| if l >= 3 { upper } else { -upper });
        let f = CoarseFields::compute(&cfg, Scales::new(2, 4, 0.3).unwrap(), M).unwrap();
        let stripes = extract_stripes(&f);
        assert_eq!(stripes.len(), 1);
        let s = stripes[0];
        assert_eq!((s.lower_layer, s.upper_layer), (2, 3));
        assert_eq!(s.blocks, 16);
        assert_eq!(s.sites(4), 128);
        let kind = if upper == 1 { StripeKind::PlusOverMinus } else { StripeKind::MinusOverPlus };
        assert_eq!(s.kind, kind);
    }

    #[test]
    fn wrapped_run_is_not_split() {
        use StripeKind::*;
        let m = [Some(PlusOverMinus), None, None, Some(PlusOverMinus), Some(PlusOverMinus)];
        assert_eq!(runs(&m, true), vec![(3, 3, PlusOverMinus)]);
        assert_eq!(runs(&m, false), vec![(0, 1, PlusOverMinus), (3, 2, PlusOverMinus)]);
    }
}
