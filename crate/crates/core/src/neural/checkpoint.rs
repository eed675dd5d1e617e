//! Flat binary parameter files.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! magic        8 bytes  "FRLNET01"
//! activation   u32      0 = relu, 1 = tanh
//! n_sizes      u32      number of layer sizes (>= 2)
//! sizes        u32 x n_sizes
//! n_params     u64
//! params       f64 x n_params, layer order: weights (out x in, row-major) then biases
//! ```

use std::io::{Read, Write};

use super::{Activation, MlpSpec, ParamSet, Role};
use crate::{Error, Result};

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"FRLNET01";

pub fn write_params<W: Write>(p: &ParamSet, w: &mut W) -> Result<()> {
    let spec = p.spec();
    w.write_all(CHECKPOINT_MAGIC)?;
    w.write_all(&spec.activation.code().to_le_bytes())?;
    w.write_all(&(spec.layer_sizes.len() as u32).to_le_bytes())?;
    for &s in &spec.layer_sizes {
        w.write_all(&(s as u32).to_le_bytes())?;
    }
    w.write_all(&(p.values().len() as u64).to_le_bytes())?;
    for v in p.values() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub(crate) fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

pub(crate) fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

pub(crate) fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

pub fn read_params<R: Read>(r: &mut R, role: Role) -> Result<ParamSet> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != CHECKPOINT_MAGIC {
        return Err(Error::Checkpoint("bad network magic".into()));
    }
    let activation = Activation::from_code(read_u32(r)?)
        .ok_or_else(|| Error::Checkpoint("unknown activation code".into()))?;
    let n_sizes = read_u32(r)? as usize;
    if !(2..=64).contains(&n_sizes) {
        return Err(Error::Checkpoint(format!("implausible layer count {n_sizes}")));
    }
    let sizes = (0..n_sizes)
        .map(|_| read_u32(r).map(|s| s as usize))
        .collect::<Result<Vec<_>>>()?;
    let spec = MlpSpec::new(sizes, activation)?;
    let n_params = read_u64(r)? as usize;
    if n_params != spec.n_params() {
        return Err(Error::Checkpoint(format!(
            "parameter count {n_params} does not match layer sizes ({})",
            spec.n_params()
        )));
    }
    let values = (0..n_params).map(|_| read_f64(r)).collect::<Result<Vec<_>>>()?;
    ParamSet::from_values(spec, values, role)
}
