use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HorizontalBc {
    Periodic,
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerticalBc {
    Periodic,
    Plus,
    Minus,
    /// +1 above the top layer, -1 below the bottom layer.
    MixedDobrushin,
    /// Spin-flip image of [`VerticalBc::MixedDobrushin`].
    MixedDobrushinInverted,
}

impl HorizontalBc {
    pub fn flipped(self) -> Self {
        match self {
            HorizontalBc::Periodic => HorizontalBc::Periodic,
            HorizontalBc::Plus => HorizontalBc::Minus,
            HorizontalBc::Minus => HorizontalBc::Plus,
        }
    }

    pub fn code(self) -> u8 {
        match self {
            HorizontalBc::Periodic => 0,
            HorizontalBc::Plus => 1,
            HorizontalBc::Minus => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Some(match code {
            0 => HorizontalBc::Periodic,
            1 => HorizontalBc::Plus,
            2 => HorizontalBc::Minus,
            _ => return None,
        })
    }
}

impl VerticalBc {
    pub fn flipped(self) -> Self {
        match self {
            VerticalBc::Periodic => VerticalBc::Periodic,
            VerticalBc::Plus => VerticalBc::Minus,
            VerticalBc::Minus => VerticalBc::Plus,
            VerticalBc::MixedDobrushin => VerticalBc::MixedDobrushinInverted,
            VerticalBc::MixedDobrushinInverted => VerticalBc::MixedDobrushin,
        }
    }

    pub fn code(self) -> u8 {
        match self {
            VerticalBc::Periodic => 0,
            VerticalBc::Plus => 1,
            VerticalBc::Minus => 2,
            VerticalBc::MixedDobrushin => 3,
            VerticalBc::MixedDobrushinInverted => 4,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Some(match code {
            0 => VerticalBc::Periodic,
            1 => VerticalBc::Plus,
            2 => VerticalBc::Minus,
            3 => VerticalBc::MixedDobrushin,
            4 => VerticalBc::MixedDobrushinInverted,
            _ => return None,
        })
    }

    /// Spins of the frozen layer above the top (`upper = true`) or below the
    /// bottom; `None` when periodic.
    pub fn frozen_layer(self, upper: bool) -> Option<i8> {
        match self {
            VerticalBc::Periodic => None,
            VerticalBc::Plus => Some(1),
            VerticalBc::Minus => Some(-1),
            VerticalBc::MixedDobrushin => Some(if upper { 1 } else { -1 }),
            VerticalBc::MixedDobrushinInverted => Some(if upper { -1 } else { 1 }),
        }
    }

    pub fn is_dobrushin(self) -> bool {
        matches!(self, VerticalBc::MixedDobrushin | VerticalBc::MixedDobrushinInverted)
    }
}

macro_rules! kebab_from_str {
    ($t:ty, $what:literal) => {
        impl FromStr for $t {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                serde_json::from_value(serde_json::Value::String(s.to_string()))
                    .map_err(|_| Error::invalid($what, format!("unknown boundary condition `{s}`")))
            }
        }

        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                let v = serde_json::to_value(self).map_err(|_| fmt::Error)?;
                f.write_str(v.as_str().unwrap_or_default())
            }
        }
    };
}

kebab_from_str!(HorizontalBc, "horizontal_bc");
kebab_from_str!(VerticalBc, "vertical_bc");

/// `width` sites per layer, `height` layers, with boundary conditions.
///
/// Non-periodic boundaries are a frozen margin: every site outside the box
/// has a fixed spin, so every interior site sees a complete neighbourhood.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Lattice {
    pub width: usize,
    pub height: usize,
    pub horizontal: HorizontalBc,
    pub vertical: VerticalBc,
}

impl Lattice {
    /// Checks that do not depend on the coarse-graining scales.
    pub fn new(
        width: usize,
        height: usize,
        horizontal: HorizontalBc,
        vertical: VerticalBc,
        kac_range: usize,
    ) -> Result<Self> {
        if width == 0 {
            return Err(Error::invalid("width", "must be positive"));
        }
        if height == 0 {
            return Err(Error::invalid("height", "must be positive"));
        }
        if horizontal == HorizontalBc::Periodic && width + 1 < 2 * kac_range {
            return Err(Error::invalid(
                "width",
                format!(
                    "periodic layers need width >= 2*kac_range - 1 = {}, got {width}",
                    2 * kac_range - 1
                ),
            ));
        }
        if vertical == VerticalBc::Periodic && height < 2 {
            return Err(Error::invalid("height", "periodic vertical boundary needs height >= 2"));
        }
        Ok(Lattice {
            width,
            height,
            horizontal,
            vertical,
        })
    }

    /// As [`Lattice::new`], additionally requiring `ell_plus | width`.
    pub fn with_blocks(
        width: usize,
        height: usize,
        horizontal: HorizontalBc,
        vertical: VerticalBc,
        kac_range: usize,
        ell_plus: usize,
    ) -> Result<Self> {
        check_block_width(width, ell_plus)?;
        Self::new(width, height, horizontal, vertical, kac_range)
    }

    pub fn sites(&self) -> usize {
        self.width * self.height
    }

    #[inline]
    pub fn index(&self, x: usize, layer: usize) -> usize {
        layer * self.width + x
    }

    #[inline]
    pub fn coords(&self, index: usize) -> (usize, usize) {
        (index % self.width, index / self.width)
    }

    pub fn flipped(&self) -> Lattice {
        Lattice {
            horizontal: self.horizontal.flipped(),
            vertical: self.vertical.flipped(),
            ..*self
        }
    }

    /// Spin of the frozen horizontal margin of `layer`, `None` if periodic.
    ///
    /// With a mixed vertical boundary the margin follows the mid-height
    /// line: the upper half takes the upper frozen sign.
    pub fn margin_spin(&self, layer: usize) -> Option<i8> {
        let sign = match self.horizontal {
            HorizontalBc::Periodic => return None,
            HorizontalBc::Plus => 1,
            HorizontalBc::Minus => -1,
        };
        if self.vertical.is_dobrushin() {
            let upper = self.vertical.frozen_layer(true).unwrap_or(1);
            Some(if 2 * layer >= self.height { upper } else { -upper })
        } else {
            Some(sign)
        }
    }
}

pub fn check_block_width(width: usize, ell_plus: usize) -> Result<()> {
    if !width.is_multiple_of(ell_plus) {
        let lower = (width / ell_plus) * ell_plus;
        let upper = lower + ell_plus;
        let suggest = if lower > 0 && width - lower <= upper - width { lower } else { upper };
        return Err(Error::invalid(
            "width",
            format!("must be a multiple of ell_plus = {ell_plus}; nearest valid width is {suggest}"),
        ));
    }
    Ok(())
}

/// A ±1 spin field on a [`Lattice`], stored layer-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpinConfig {
    lattice: Lattice,
    spins: Vec<i8>,
}

impl SpinConfig {
    pub fn uniform(lattice: Lattice, spin: i8) -> Self {
        assert!(spin == 1 || spin == -1);
        SpinConfig {
            lattice,
            spins: vec![spin; lattice.sites()],
        }
    }

    pub fn random<R: Rng + ?Sized>(lattice: Lattice, rng: &mut R) -> Self {
        let spins = (0..lattice.sites())
            .map(|_| if rng.gen::<bool>() { 1 } else { -1 })
            .collect();
        SpinConfig { lattice, spins }
    }

    pub fn from_fn(lattice: Lattice, mut f: impl FnMut(usize, usize) -> i8) -> Self {
        let mut spins = Vec::with_capacity(lattice.sites());
        for layer in 0..lattice.height {
            for x in 0..lattice.width {
                let s = f(x, layer);
                assert!(s == 1 || s == -1, "spins must be ±1");
                spins.push(s);
            }
        }
        SpinConfig { lattice, spins }
    }

    pub fn from_spins(lattice: Lattice, spins: Vec<i8>) -> Result<Self> {
        if spins.len() != lattice.sites() {
            return Err(Error::invalid(
                "spins",
                format!("expected {} spins, got {}", lattice.sites(), spins.len()),
            ));
        }
        if spins.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::invalid("spins", "entries must be exactly +1 or -1"));
        }
        Ok(SpinConfig { lattice, spins })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    #[inline]
    pub fn get(&self, x: usize, layer: usize) -> i8 {
        self.spins[self.lattice.index(x, layer)]
    }

    #[inline]
    pub fn set(&mut self, x: usize, layer: usize, spin: i8) {
        debug_assert!(spin == 1 || spin == -1);
        let i = self.lattice.index(x, layer);
        self.spins[i] = spin;
    }

    #[inline]
    pub fn set_index(&mut self, index: usize, spin: i8) {
        self.spins[index] = spin;
    }

    /// Spin at arbitrary coordinates, resolving boundaries: periodic
    /// directions wrap, frozen ones return the margin spin.
    #[inline]
    pub fn at(&self, x: isize, layer: isize) -> i8 {
        let lat = &self.lattice;
        let (w, h) = (lat.width as isize, lat.height as isize);
        let layer = if (0..h).contains(&layer) {
            layer
        } else {
            match lat.vertical.frozen_layer(layer >= h) {
                Some(s) => return s,
                None => layer.rem_euclid(h),
            }
        };
        let x = if (0..w).contains(&x) {
            x
        } else {
            match lat.margin_spin(layer as usize) {
                Some(s) => return s,
                None => x.rem_euclid(w),
            }
        };
        self.spins[layer as usize * lat.width + x as usize]
    }

    /// Global spin flip: negates every spin and swaps the boundary signs.
    pub fn flipped(&self) -> SpinConfig {
        SpinConfig {
            lattice: self.lattice.flipped(),
            spins: self.spins.iter().map(|s| -s).collect(),
        }
    }

    /// Cyclic horizontal shift `σ'(x) = σ(x - shift)`.
    pub fn shifted(&self, shift: isize) -> SpinConfig {
        let w = self.lattice.width as isize;
        SpinConfig::from_fn(self.lattice, |x, layer| {
            self.get((x as isize - shift).rem_euclid(w) as usize, layer)
        })
    }

    pub fn magnetization(&self) -> f64 {
        self.spins.iter().map(|&s| s as i64).sum::<i64>() as f64 / self.spins.len() as f64
    }

    pub fn layer_magnetization(&self, layer: usize) -> f64 {
        let w = self.lattice.width;
        let row = &self.spins[layer * w..(layer + 1) * w];
        row.iter().map(|&s| s as i64).sum::<i64>() as f64 / w as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lat(h: HorizontalBc, v: VerticalBc) -> Lattice {
        Lattice::new(8, 4, h, v, 2).unwrap()
    }

    #[test]
    fn boundary_resolution() {
        let cfg = SpinConfig::uniform(lat(HorizontalBc::Minus, VerticalBc::Plus), 1);
        assert_eq!(cfg.at(-1, 0), -1);
        assert_eq!(cfg.at(8, 2), -1);
        assert_eq!(cfg.at(3, -1), 1);
        assert_eq!(cfg.at(3, 4), 1);

        let mut cfg = SpinConfig::uniform(lat(HorizontalBc::Periodic, VerticalBc::Periodic), 1);
        cfg.set(7, 3, -1);
        assert_eq!(cfg.at(-1, -1), -1);
        assert_eq!(cfg.at(15, 7), -1);
    }

    #[test]
    fn dobrushin_margins_follow_mid_height() {
        let cfg = SpinConfig::uniform(lat(HorizontalBc::Plus, VerticalBc::MixedDobrushin), 1);
        assert_eq!(cfg.at(0, 4), 1);
        assert_eq!(cfg.at(0, -1), -1);
        assert_eq!(cfg.at(-1, 3), 1);
        assert_eq!(cfg.at(-1, 2), 1);
        assert_eq!(cfg.at(-1, 1), -1);
        let f = cfg.flipped();
        assert_eq!(f.at(0, 4), -1);
        assert_eq!(f.at(-1, 1), 1);
    }

    #[test]
    fn flip_swaps_decorations() {
        let l = lat(HorizontalBc::Plus, VerticalBc::Minus);
        let f = l.flipped();
        assert_eq!(f.horizontal, HorizontalBc::Minus);
        assert_eq!(f.vertical, VerticalBc::Plus);
        assert_eq!(f.flipped(), l);
    }

    #[test]
    fn width_must_tile_blocks() {
        let err = check_block_width(101, 8).unwrap_err().to_string();
        assert!(err.contains("nearest valid width is 104"), "{err}");
        let err = check_block_width(99, 8).unwrap_err().to_string();
        assert!(err.contains("nearest valid width is 96"), "{err}");
        assert!(check_block_width(96, 8).is_ok());
        assert!(Lattice::new(4, 2, HorizontalBc::Periodic, VerticalBc::Plus, 4).is_err());
    }

    #[test]
    fn bc_names_parse() {
        assert_eq!("mixed-dobrushin".parse::<VerticalBc>().unwrap(), VerticalBc::MixedDobrushin);
        assert_eq!(HorizontalBc::Plus.to_string(), "plus");
        assert!("sideways".parse::<HorizontalBc>().is_err());
    }
}
