use std::collections::{BTreeSet, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::fields::{BlockCell, CoarseFields, Phase};
use crate::error::{Error, Result};

/// Thickness of the frame on which the phase must be uniform for contour
/// anatomy. A thickness of 0 uses the frozen boundary in that direction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameSpec {
    pub blocks: usize,
    pub layers: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Interior {
    pub cells: Vec<BlockCell>,
    /// Cells of the interior 8-adjacent to the support.
    pub boundary: Vec<BlockCell>,
    pub sign: i8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contour {
    /// Undetermined ℓ+ cells, sorted by `(layer, block)`.
    pub support: Vec<BlockCell>,
    /// η of the ℓ- sub-blocks of every support cell, aligned with `support`.
    pub specification: Vec<Vec<i8>>,
    pub sign: i8,
    pub exterior_boundary: Vec<BlockCell>,
    pub interiors: Vec<Interior>,
}

impl Contour {
    /// Smallest `(layer, block)` cell of the support.
    pub fn anchor(&self) -> BlockCell {
        self.support[0]
    }

    /// Support together with all interiors.
    pub fn region(&self) -> Vec<BlockCell> {
        let mut all: Vec<BlockCell> = self.support.clone();
        for int in &self.interiors {
            all.extend_from_slice(&int.cells);
        }
        all.sort();
        all
    }
}

fn neighbours8(
    cell: BlockCell,
    width: usize,
    height: usize,
    wrap_x: bool,
    wrap_y: bool,
) -> impl Iterator<Item = BlockCell> {
    let (w, h) = (width as isize, height as isize);
    let (b, l) = (cell.block as isize, cell.layer as isize);
    (-1..=1).flat_map(move |dl| (-1..=1).map(move |db| (dl, db))).filter_map(move |(dl, db)| {
        if dl == 0 && db == 0 {
            return None;
        }
        let mut nb = b + db;
        let mut nl = l + dl;
        if wrap_x {
            nb = nb.rem_euclid(w);
        }
        if wrap_y {
            nl = nl.rem_euclid(h);
        }
        ((0..w).contains(&nb) && (0..h).contains(&nl)).then_some(BlockCell {
            layer: nl as usize,
            block: nb as usize,
        })
    })
}

/// 8-connected components of the undetermined cells, each sorted, ordered
/// by their smallest cell. `wrap` follows periodic boundaries.
pub fn undetermined_components(fields: &CoarseFields, wrap: bool) -> Vec<Vec<BlockCell>> {
    let lat = fields.lattice();
    let (w, h) = (fields.blocks_per_layer(), lat.height);
    let wrap_x = wrap && lat.margin_spin(0).is_none();
    let wrap_y = wrap && lat.vertical.frozen_layer(true).is_none();
    let mut seen = vec![false; w * h];
    let mut out = Vec::new();
    for cell in fields.cells() {
        let i = cell.layer * w + cell.block;
        if seen[i] || fields.phase_cell(cell) != Phase::Undetermined {
            continue;
        }
        seen[i] = true;
        let mut comp = vec![cell];
        let mut queue = VecDeque::from([cell]);
        while let Some(c) = queue.pop_front() {
            for n in neighbours8(c, w, h, wrap_x, wrap_y) {
                let j = n.layer * w + n.block;
                if !seen[j] && fields.phase_cell(n) == Phase::Undetermined {
                    seen[j] = true;
                    comp.push(n);
                    queue.push_back(n);
                }
            }
        }
        comp.sort();
        out.push(comp);
    }
    out.sort_by_key(|c| c[0]);
    out
}

/// Checks that the frame carries a single determined phase and returns
/// its sign.
pub fn check_frame(fields: &CoarseFields, frame: FrameSpec) -> Result<i8> {
    let lat = fields.lattice();
    let (w, h) = (fields.blocks_per_layer(), lat.height);
    if 2 * frame.blocks >= w || 2 * frame.layers >= h {
        return Err(Error::FrameNotUniform(format!(
            "frame of {} blocks x {} layers leaves no interior in a {w} x {h} block grid",
            frame.blocks, frame.layers
        )));
    }
    let mut sign: Option<i8> = None;
    let mut agree = |s: Option<i8>, what: &dyn Fn() -> String| -> Result<()> {
        match s {
            Some(v) if v != 0 && *sign.get_or_insert(v) == v => Ok(()),
            _ => Err(Error::FrameNotUniform(what())),
        }
    };
    if frame.blocks == 0 {
        for layer in 0..h {
            agree(fields.margin_theta(layer), &|| {
                format!("horizontal margin of layer {layer} is not a uniform frozen phase")
            })?;
        }
    }
    if frame.layers == 0 {
        for upper in [false, true] {
            agree(fields.frozen_big_theta(upper), &|| {
                format!("{} boundary is not a frozen uniform layer", if upper { "upper" } else { "lower" })
            })?;
        }
    }
    for cell in fields.cells() {
        let in_frame = cell.block < frame.blocks
            || cell.block + frame.blocks >= w
            || cell.layer < frame.layers
            || cell.layer + frame.layers >= h;
        if !in_frame {
            continue;
        }
        agree(Some(fields.phase_cell(cell).sign()), &|| {
            format!(
                "cell (layer {}, block {}) has Θ = {} and phase {:?}",
                cell.layer,
                cell.block,
                fields.big_theta_of(cell),
                fields.phase_cell(cell)
            )
        })?;
    }
    Ok(sign.unwrap_or(1))
}

/// Contours with exterior and interiors. Requires a uniform frame.
pub fn extract_contours(fields: &CoarseFields, frame: FrameSpec) -> Result<Vec<Contour>> {
    let outside = check_frame(fields, frame)?;
    let mut contours = Vec::new();
    for support in undetermined_components(fields, false) {
        contours.push(anatomy(fields, support, outside)?);
    }
    Ok(contours)
}

type Pos = (isize, isize);

fn anatomy(fields: &CoarseFields, support: Vec<BlockCell>, outside: i8) -> Result<Contour> {
    let (w, h) = (fields.blocks_per_layer() as isize, fields.lattice().height as isize);
    let pos = |c: BlockCell| (c.layer as isize, c.block as isize);
    let in_support: HashSet<Pos> = support.iter().map(|&c| pos(c)).collect();
    // bounding box padded by one cell, possibly into the frozen boundary
    let l0 = support.iter().map(|c| c.layer as isize).min().unwrap() - 1;
    let l1 = support.iter().map(|c| c.layer as isize).max().unwrap() + 1;
    let b0 = support.iter().map(|c| c.block as isize).min().unwrap() - 1;
    let b1 = support.iter().map(|c| c.block as isize).max().unwrap() + 1;
    let in_box = |(l, b): Pos| (l0..=l1).contains(&l) && (b0..=b1).contains(&b);
    let on_rim = |(l, b): Pos| l == l0 || l == l1 || b == b0 || b == b1;
    let in_grid = |(l, b): Pos| (0..h).contains(&l) && (0..w).contains(&b);
    let nbrs = |(l, b): Pos| {
        (-1..=1).flat_map(move |dl| (-1..=1).map(move |db| (l + dl, b + db))).filter(move |&p| p != (l, b))
    };
    let theta = |p: Pos| -> i8 {
        if in_grid(p) {
            fields.big_theta_of(BlockCell { layer: p.0 as usize, block: p.1 as usize })
        } else {
            outside
        }
    };
    let cell = |(l, b): Pos| BlockCell { layer: l as usize, block: b as usize };

    let mut seen: HashSet<Pos> = HashSet::new();
    let mut exterior_boundary = BTreeSet::new();
    let mut exterior_thetas = Vec::new();
    let mut interiors = Vec::new();
    for l in l0..=l1 {
        for b in b0..=b1 {
            let start = (l, b);
            if in_support.contains(&start) || !seen.insert(start) {
                continue;
            }
            let mut comp = vec![start];
            let mut queue = VecDeque::from([start]);
            let mut exterior = false;
            while let Some(c) = queue.pop_front() {
                exterior |= on_rim(c) || !in_grid(c);
                for n in nbrs(c) {
                    if in_box(n) && !in_support.contains(&n) && seen.insert(n) {
                        comp.push(n);
                        queue.push_back(n);
                    }
                }
            }
            let boundary: Vec<Pos> = comp
                .iter()
                .copied()
                .filter(|&c| nbrs(c).any(|n| in_support.contains(&n)))
                .collect();
            if exterior {
                for p in boundary {
                    exterior_thetas.push(theta(p));
                    if in_grid(p) {
                        exterior_boundary.insert(cell(p));
                    }
                }
            } else {
                let mut cells: Vec<BlockCell> = comp.into_iter().map(cell).collect();
                cells.sort();
                let mut boundary: Vec<BlockCell> = boundary.into_iter().map(cell).collect();
                boundary.sort();
                let thetas: Vec<i8> = boundary.iter().map(|&c| fields.big_theta_of(c)).collect();
                let sign = uniform(&thetas, "interior boundary")?;
                interiors.push(Interior { cells, boundary, sign });
            }
        }
    }
    let sign = uniform(&exterior_thetas, "exterior boundary")?;
    interiors.sort_by_key(|i| i.cells[0]);
    let specification = support.iter().map(|&c| fields.eta_of(c).to_vec()).collect();
    Ok(Contour {
        support,
        specification,
        sign,
        exterior_boundary: exterior_boundary.into_iter().collect(),
        interiors,
    })
}

fn uniform(thetas: &[i8], what: &str) -> Result<i8> {
    match thetas.first() {
        Some(&t) if t != 0 && thetas.iter().all(|&u| u == t) => Ok(t),
        Some(_) => Err(Error::Numerical(format!("Θ is not constant and nonzero on the {what}"))),
        None => Err(Error::Numerical(format!("empty {what}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{HorizontalBc, Lattice, Scales, SpinConfig, VerticalBc};

    const M: f64 = 0.957_504_024_077_268_8;

    fn fields(w: usize, h: usize, minus: impl Fn(usize, usize) -> bool) -> CoarseFields {
        let lat = Lattice::new(w, h, HorizontalBc::Plus, VerticalBc::Plus, 2).unwrap();
        let cfg = SpinConfig::from_fn(lat, |x, l| if minus(x, l) { -1 } else { 1 });
        CoarseFields::compute(&cfg, Scales::new(2, 4, 0.3).unwrap(), M).unwrap()
    }

    #[test]
    fn single_defect_contour() {
        let f = fields(64, 7, |x, l| l == 3 && x == 30);
        let cs = extract_contours(&f, FrameSpec::default()).unwrap();
        assert_eq!(cs.len(), 1);
        let c = &cs[0];
        assert_eq!(c.sign, 1);
        // blocks 6..=8, layers 2..=4
        assert_eq!(c.support.len(), 9);
        assert_eq!(c.anchor(), BlockCell { layer: 2, block: 6 });
        assert!(c.interiors.is_empty());
        assert_eq!(c.exterior_boundary.len(), 5 * 5 - 9);
        assert_eq!(c.region(), c.support);
        assert_eq!(c.specification[4], vec![1, 0]);
    }

    #[test]
    fn minus_island_has_interior() {
        // a minus rectangle large enough to have a minus-phase core
        let f = fields(128, 11, |x, l| (40..88).contains(&x) && (3..8).contains(&l));
        let cs = extract_contours(&f, FrameSpec::default()).unwrap();
        assert_eq!(cs.len(), 1);
        let c = &cs[0];
        assert_eq!(c.sign, 1);
        assert_eq!(c.interiors.len(), 1);
        assert_eq!(c.interiors[0].sign, -1);
        for cell in &c.interiors[0].cells {
            assert_ne!(f.phase_cell(*cell), Phase::Undetermined);
        }
        let region = c.region();
        assert_eq!(region.len(), c.support.len() + c.interiors[0].cells.len());
    }

    #[test]
    fn frame_violation_reported() {
        let f = fields(64, 5, |x, l| l == 0 && x == 30);
        let frame = FrameSpec { blocks: 1, layers: 1 };
        assert!(matches!(extract_contours(&f, frame), Err(Error::FrameNotUniform(_))));
        // the frozen boundary frame accepts a contour touching it
        let cs = extract_contours(&f, FrameSpec::default()).unwrap();
        assert_eq!(cs.len(), 1);
        assert_eq!(cs[0].sign, 1);
    }

    #[test]
    fn periodic_needs_explicit_frame() {
        let lat = Lattice::new(64, 5, HorizontalBc::Periodic, VerticalBc::Plus, 2).unwrap();
        let cfg = SpinConfig::uniform(lat, 1);
        let f = CoarseFields::compute(&cfg, Scales::new(2, 4, 0.3).unwrap(), M).unwrap();
        assert!(extract_contours(&f, FrameSpec::default()).is_err());
        assert!(extract_contours(&f, FrameSpec { blocks: 1, layers: 0 }).unwrap().is_empty());
    }

    #[test]
    fn components_ordered_by_anchor() {
        let f = fields(128, 9, |x, l| (l == 5 && x == 20) || (l == 2 && x == 100));
        let comps = undetermined_components(&f, false);
        assert_eq!(comps.len(), 2);
        assert!(comps[0][0] < comps[1][0]);
        assert_eq!(comps[0][0].layer, 1);
    }
}
