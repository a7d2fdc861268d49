//! Coarse-graining a minus droplet in a plus sea: η/θ/Θ fields, the
//! contour around the droplet and its stripes.
//!
//! ```bash
//! cargo run --example coarse_grain
//! ```

use layered_kac::coarse::{contour_stats, contour_stripes, extract_contours, CoarseFields, FrameSpec, Phase};
use layered_kac::meanfield::solve_mbeta;
use layered_kac::model::{HorizontalBc, Lattice, ModelParams, SpinConfig, VerticalBc};

fn main() -> layered_kac::Result<()> {
    let params = ModelParams::new(2.0, 0.15, 2.0, 0.3, 0.05)?;
    let scales = params.scales();
    let (lp, height) = (scales.ell_plus, 6);
    let width = 12 * lp;
    let lattice = Lattice::with_blocks(width, height, HorizontalBc::Plus, VerticalBc::Plus, params.kac_range(), lp)?;
    let cfg = SpinConfig::from_fn(lattice, |x, layer| {
        if (4 * lp..8 * lp).contains(&x) && (2..4).contains(&layer) {
            -1
        } else {
            1
        }
    });

    let fields = CoarseFields::compute(&cfg, scales, solve_mbeta(params.beta()).m_beta)?;
    println!("ℓ- = {}, ℓ+ = {}, ζ = {:.3}", scales.ell_minus, lp, scales.zeta);
    for layer in (0..height).rev() {
        let row: String = (0..width / lp)
            .map(|b| match fields.phase_cell(layered_kac::coarse::BlockCell { layer, block: b }) {
                Phase::Plus => '+',
                Phase::Minus => '-',
                Phase::Undetermined => '.',
            })
            .collect();
        println!("layer {layer}: {row}");
    }

    for c in extract_contours(&fields, FrameSpec::default())? {
        let stats = contour_stats(&fields, &c.support, false);
        println!(
            "contour at {:?}: {} cells, sign {:+}, N0 = {}, interiors {}, stripes {}",
            c.anchor(),
            c.support.len(),
            c.sign,
            stats.n0,
            c.interiors.len(),
            contour_stripes(&fields, &c).len(),
        );
    }
    Ok(())
}
