//! Checkpoint file format.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic            8 bytes  "MGDCKPT1"
//! n_params         u32
//! per parameter:   u32 name_len, name bytes (utf-8),
//!                  u32 rank (always 2), u64 dims[rank],
//!                  f32 data (row-major, little-endian)
//! has_moments      u8 (0|1)
//! if has_moments, per parameter in the same order:
//!                  f32 m data, then f32 v data
//! adam_step        u64
//! rng_seed         u64
//! ```
//!
//! Values are stored as f32 regardless of the in-memory scalar, so
//! save -> load -> save is byte-identical for both f32 and f64 states.

use crate::error::CoreError;
use crate::scalar::{real, Real};
use crate::state::ModelState;
use crate::tensor::Tensor;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

pub const MAGIC: &[u8; 8] = b"MGDCKPT1";

pub fn save<T: Real>(state: &ModelState<T>, path: &Path) -> Result<(), CoreError> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&(state.len() as u32).to_le_bytes())?;
    for p in state.params() {
        let name = p.name.as_bytes();
        w.write_all(&(name.len() as u32).to_le_bytes())?;
        w.write_all(name)?;
        w.write_all(&2u32.to_le_bytes())?;
        w.write_all(&(p.value.rows() as u64).to_le_bytes())?;
        w.write_all(&(p.value.cols() as u64).to_le_bytes())?;
        write_f32s(&mut w, &p.value)?;
    }
    let has_moments = !state.adam_m.is_empty();
    w.write_all(&[u8::from(has_moments)])?;
    if has_moments {
        for i in 0..state.len() {
            write_f32s(&mut w, &state.adam_m[i])?;
            write_f32s(&mut w, &state.adam_v[i])?;
        }
    }
    w.write_all(&state.adam_step.to_le_bytes())?;
    w.write_all(&state.rng_seed.to_le_bytes())?;
    w.flush()?;
    Ok(())
}

pub fn load<T: Real>(path: &Path) -> Result<ModelState<T>, CoreError> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(CoreError::Checkpoint(format!("bad magic {magic:?}")));
    }
    let n_params = read_u32(&mut r)? as usize;
    let mut state = ModelState::new(0);
    let mut shapes = Vec::with_capacity(n_params);
    for _ in 0..n_params {
        let name_len = read_u32(&mut r)? as usize;
        let mut name = vec![0u8; name_len];
        r.read_exact(&mut name)?;
        let name = String::from_utf8(name)
            .map_err(|e| CoreError::Checkpoint(format!("bad parameter name: {e}")))?;
        let rank = read_u32(&mut r)?;
        if rank != 2 {
            return Err(CoreError::Checkpoint(format!("unsupported rank {rank}")));
        }
        let rows = read_u64(&mut r)? as usize;
        let cols = read_u64(&mut r)? as usize;
        let value = read_f32s::<T>(&mut r, rows, cols)?;
        shapes.push((rows, cols));
        state.add_param(&name, value);
    }
    let mut flag = [0u8; 1];
    r.read_exact(&mut flag)?;
    if flag[0] == 1 {
        for &(rows, cols) in &shapes {
            state.adam_m.push(read_f32s::<T>(&mut r, rows, cols)?);
            state.adam_v.push(read_f32s::<T>(&mut r, rows, cols)?);
        }
    }
    state.adam_step = read_u64(&mut r)?;
    state.rng_seed = read_u64(&mut r)?;
    Ok(state)
}

fn write_f32s<T: Real>(w: &mut impl Write, t: &Tensor<T>) -> Result<(), CoreError> {
    for &v in t.data() {
        let f = v.to_f64().expect("scalar to f64") as f32;
        w.write_all(&f.to_le_bytes())?;
    }
    Ok(())
}

fn read_f32s<T: Real>(r: &mut impl Read, rows: usize, cols: usize) -> Result<Tensor<T>, CoreError> {
    let mut buf = vec![0u8; rows * cols * 4];
    r.read_exact(&mut buf)?;
    let data = buf
        .chunks_exact(4)
        .map(|c| real::<T>(f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64))
        .collect();
    Ok(Tensor::from_vec(rows, cols, data))
}

fn read_u32(r: &mut impl Read) -> Result<u32, CoreError> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64(r: &mut impl Read) -> Result<u64, CoreError> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}
