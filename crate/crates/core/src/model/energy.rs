use super::kernel::KacKernel;
use super::lattice::SpinConfig;
use super::params::ModelParams;

/// Horizontal Kac field `h(x,i) = Σ_{y≠x} w(x-y) σ(y,i)`.
pub fn local_field(cfg: &SpinConfig, kernel: &KacKernel, x: usize, layer: usize) -> f64 {
    let (x, layer) = (x as isize, layer as isize);
    let mut h = 0.0;
    for (d, w) in kernel.offsets() {
        h += w * cfg.at(x + d, layer) as f64;
    }
    h
}

/// Sum of the two vertical neighbours, `σ(x,i+1) + σ(x,i-1)`.
#[inline]
pub fn vertical_neighbours(cfg: &SpinConfig, x: usize, layer: usize) -> i8 {
    let (x, layer) = (x as isize, layer as isize);
    cfg.at(x, layer + 1) + cfg.at(x, layer - 1)
}

/// Horizontal plus vertical field felt by one spin.
pub fn total_field(
    cfg: &SpinConfig,
    kernel: &KacKernel,
    epsilon: f64,
    x: usize,
    layer: usize,
) -> f64 {
    local_field(cfg, kernel, x, layer) + epsilon * vertical_neighbours(cfg, x, layer) as f64
}

/// `H_γ` (or the decoupled `H⁰_γ` when `include_vertical` is false).
///
/// Interior pairs carry the usual factor ½ over ordered pairs; bonds to
/// frozen margin spins are counted once.
pub fn hamiltonian(
    cfg: &SpinConfig,
    kernel: &KacKernel,
    params: &ModelParams,
    include_vertical: bool,
) -> f64 {
    hamiltonian_with_epsilon(
        cfg,
        kernel,
        if include_vertical { params.epsilon() } else { 0.0 },
    )
}

pub fn hamiltonian_with_epsilon(cfg: &SpinConfig, kernel: &KacKernel, epsilon: f64) -> f64 {
    let lat = *cfg.lattice();
    let (w, h) = (lat.width as isize, lat.height as isize);
    let periodic_x = lat.margin_spin(0).is_none();
    let mut horizontal = crate::numerics::NeumaierSum::new();
    let mut vertical = 0i64;
    for layer in 0..h {
        for x in 0..w {
            let s = cfg.get(x as usize, layer as usize) as f64;
            let mut inner = 0.0;
            let mut outer = 0.0;
            for (d, wd) in kernel.offsets() {
                let y = x + d;
                let t = cfg.at(y, layer) as f64;
                if periodic_x || (0..w).contains(&y) {
                    inner += wd * t;
                } else {
                    outer += wd * t;
                }
            }
            horizontal += -s * (0.5 * inner + outer);
            if epsilon != 0.0 {
                let si = s as i64;
                vertical += si * cfg.at(x, layer + 1) as i64;
                if layer == 0 && lat.vertical.frozen_layer(false).is_some() {
                    vertical += si * cfg.at(x, -1) as i64;
                }
            }
        }
    }
    horizontal.value() - epsilon * vertical as f64
}

/// Single-site Gibbs probability of `σ = +1` in a total field.
#[inline]
pub fn conditional_gibbs(total_field: f64, beta: f64) -> f64 {
    0.5 * (1.0 + (beta * total_field).tanh())
}
