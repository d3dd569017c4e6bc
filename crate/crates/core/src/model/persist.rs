//! Versioned binary model container.
//!
//! ```text
//! magic "FLAEMDL\0" | version u32 | header_len u64 | header JSON
//! | n_tensors u32 | per tensor: rows u64, cols u64, rows*cols f64   (params)
//! | same again                                                      (accumulators)
//! | epoch u64 | best_val_loss f64 | crc32 u32 over everything before it
//! ```
//! All integers and floats are little-endian.

use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::config::AeConfig;
use super::network::{layout, Params};
use super::ModelState;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"FLAEMDL\0";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Header {
    config: AeConfig,
    #[serde(default)]
    provenance: Option<String>,
}

fn put_params(buf: &mut Vec<u8>, p: &Params) {
    buf.extend((p.tensors.len() as u32).to_le_bytes());
    for t in &p.tensors {
        buf.extend((t.nrows() as u64).to_le_bytes());
        buf.extend((t.ncols() as u64).to_le_bytes());
        for v in t.iter() {
            buf.extend(v.to_le_bytes());
        }
    }
}

pub fn to_bytes(model: &ModelState) -> Result<Vec<u8>> {
    let header = serde_json::to_vec(&Header {
        config: model.config.clone(),
        provenance: model.provenance.clone(),
    })?;
    let mut buf = Vec::with_capacity(64 + header.len() + 16 * model.params.len());
    buf.extend_from_slice(MAGIC);
    buf.extend(FORMAT_VERSION.to_le_bytes());
    buf.extend((header.len() as u64).to_le_bytes());
    buf.extend(&header);
    put_params(&mut buf, &model.params);
    put_params(&mut buf, &model.accumulators);
    buf.extend((model.epoch as u64).to_le_bytes());
    buf.extend(model.best_val_loss.to_le_bytes());
    let crc = crc32fast::hash(&buf);
    buf.extend(crc.to_le_bytes());
    Ok(buf)
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| Error::Integrity("unexpected end of model data".into()))?;
        let out = &self.buf[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(
            self.take(4)?.try_into().expect("4 bytes"),
        ))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(
            self.take(8)?.try_into().expect("8 bytes"),
        ))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(
            self.take(8)?.try_into().expect("8 bytes"),
        ))
    }

    fn params(&mut self, expected: &[(usize, usize)]) -> Result<Params> {
        let count = self.u32()? as usize;
        if count != expected.len() {
            return Err(Error::Integrity(format!(
                "expected {} tensors, found {count}",
                expected.len()
            )));
        }
        let mut tensors = Vec::with_capacity(count);
        for &(er, ec) in expected {
            let (rows, cols) = (self.u64()? as usize, self.u64()? as usize);
            if (rows, cols) != (er, ec) {
                return Err(Error::Integrity(format!(
                    "tensor shape {rows}x{cols} does not match the configuration ({er}x{ec})"
                )));
            }
            let raw = self.take(rows * cols * 8)?;
            let data = raw
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
                .collect();
            tensors.push(Array2::from_shape_vec((rows, cols), data).expect("shape checked"));
        }
        Ok(Params { tensors })
    }
}

pub fn from_bytes(buf: &[u8]) -> Result<ModelState> {
    if buf.len() < MAGIC.len() + 4 || &buf[..MAGIC.len()] != MAGIC {
        return Err(Error::Integrity("not a model file (bad magic)".into()));
    }
    let version = u32::from_le_bytes(buf[8..12].try_into().expect("4 bytes"));
    if version != FORMAT_VERSION {
        return Err(Error::UnsupportedVersion {
            found: version,
            supported: FORMAT_VERSION,
        });
    }
    if buf.len() < 16 {
        return Err(Error::Integrity("truncated model file".into()));
    }
    let (body, tail) = buf.split_at(buf.len() - 4);
    let stored = u32::from_le_bytes(tail.try_into().expect("4 bytes"));
    if crc32fast::hash(body) != stored {
        return Err(Error::Integrity("checksum mismatch".into()));
    }
    let mut r = Reader { buf: body, pos: 12 };
    let header_len = r.u64()? as usize;
    let header: Header = serde_json::from_slice(r.take(header_len)?)
        .map_err(|e| Error::Integrity(format!("bad header: {e}")))?;
    header.config.validate()?;
    let shapes = layout(&header.config);
    let params = r.params(&shapes)?;
    let accumulators = r.params(&shapes)?;
    let epoch = r.u64()? as usize;
    let best_val_loss = r.f64()?;
    if r.pos != body.len() {
        return Err(Error::Integrity("trailing bytes after model data".into()));
    }
    Ok(ModelState {
        config: header.config,
        params,
        accumulators,
        epoch,
        best_val_loss,
        provenance: header.provenance,
    })
}

pub fn save(model: &ModelState, path: &Path) -> Result<()> {
    std::fs::write(path, to_bytes(model)?)?;
    Ok(())
}

pub fn load(path: &Path) -> Result<ModelState> {
    from_bytes(&std::fs::read(path)?)
}
