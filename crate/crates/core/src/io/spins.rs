use std::io::{Read, Write};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::{HorizontalBc, Lattice, ModelParams, SpinConfig, VerticalBc};

pub const SPIN_MAGIC: &[u8; 4] = b"KACS";
pub const SPIN_VERSION: u8 = 1;

/// SHA-256 of the JSON form of `params`.
pub fn params_hash(params: &ModelParams) -> [u8; 32] {
    let json = serde_json::to_vec(params).expect("params serialize");
    Sha256::digest(&json).into()
}

/// Layout: magic, version byte, width and height as little-endian `u32`,
/// horizontal and vertical bc codes, 32-byte parameter hash, then the
/// spins layer-major packed eight per byte, least significant bit first,
/// a set bit meaning `+1`.
pub fn write_spins<W: Write>(mut out: W, cfg: &SpinConfig, hash: &[u8; 32]) -> std::io::Result<()> {
    let lat = cfg.lattice();
    out.write_all(SPIN_MAGIC)?;
    out.write_all(&[SPIN_VERSION])?;
    out.write_all(&(lat.width as u32).to_le_bytes())?;
    out.write_all(&(lat.height as u32).to_le_bytes())?;
    out.write_all(&[lat.horizontal.code(), lat.vertical.code()])?;
    out.write_all(hash)?;
    let mut packed = vec![0u8; cfg.spins().len().div_ceil(8)];
    for (i, &s) in cfg.spins().iter().enumerate() {
        if s > 0 {
            packed[i / 8] |= 1 << (i % 8);
        }
    }
    out.write_all(&packed)
}

pub fn read_spins<R: Read>(mut input: R) -> Result<(SpinConfig, [u8; 32])> {
    let bad = |m: &str| Error::parse("spin file", m.to_string());
    let mut head = [0u8; 4 + 1 + 4 + 4 + 2 + 32];
    input.read_exact(&mut head).map_err(|_| bad("truncated header"))?;
    if &head[0..4] != SPIN_MAGIC {
        return Err(bad("bad magic"));
    }
    if head[4] != SPIN_VERSION {
        return Err(bad(&format!("unsupported version {}", head[4])));
    }
    let width = u32::from_le_bytes(head[5..9].try_into().unwrap()) as usize;
    let height = u32::from_le_bytes(head[9..13].try_into().unwrap()) as usize;
    let horizontal = HorizontalBc::from_code(head[13]).ok_or_else(|| bad("unknown horizontal bc code"))?;
    let vertical = VerticalBc::from_code(head[14]).ok_or_else(|| bad("unknown vertical bc code"))?;
    let hash: [u8; 32] = head[15..47].try_into().unwrap();
    let n = width * height;
    let mut packed = vec![0u8; n.div_ceil(8)];
    input.read_exact(&mut packed).map_err(|_| bad("truncated spin data"))?;
    let spins = (0..n)
        .map(|i| if packed[i / 8] >> (i % 8) & 1 == 1 { 1 } else { -1 })
        .collect();
    let lattice = Lattice { width, height, horizontal, vertical };
    Ok((SpinConfig::from_spins(lattice, spins)?, hash))
}
