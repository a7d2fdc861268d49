//! Block coarse graining: η, θ, Θ, phases, contours and stripes.

mod contours;
mod fields;
mod stripes;

pub use contours::{check_frame, extract_contours, undetermined_components, Contour, FrameSpec, Interior};
pub use fields::{eta_from_average, BlockCell, CoarseFields, Phase, PhaseRule};
pub use stripes::{contour_stats, contour_stripes, extract_stripes, stripes_in, ContourStats, Stripe, StripeKind};
