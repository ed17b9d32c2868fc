//! Binary checkpoint: magic, version, head kind, output count, shape table,
//! little-endian f32 data, then a trailing u64 checksum (first 8 bytes of
//! SHA-256 over everything before it).

use std::fs;
use std::io::Write;
use std::path::Path;

use sha2::{Digest, Sha256};
use thiserror::Error;

use super::{HeadKind, Network, NetworkSpec};

const MAGIC: &[u8; 8] = b"GWNNCKPT";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("checkpoint i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a checkpoint file (bad magic)")]
    BadMagic,
    #[error("checkpoint is truncated or corrupt (checksum mismatch)")]
    Checksum,
    #[error("unsupported checkpoint version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },
    #[error("checkpoint shape mismatch: {0}")]
    ShapeMismatch(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckpointHeader {
    pub version: u32,
    pub head: HeadKind,
    pub n_outputs: usize,
    pub shapes: Vec<Vec<usize>>,
}

fn checksum(bytes: &[u8]) -> u64 {
    let digest = Sha256::digest(bytes);
    u64::from_le_bytes(digest[..8].try_into().unwrap())
}

pub fn save_params(net: &Network<f32>, path: &Path) -> Result<(), CheckpointError> {
    let shapes = net.spec.param_shapes();
    let mut buf = Vec::with_capacity(64 + 4 * net.n_params());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    buf.push(net.spec.head.code());
    buf.extend_from_slice(&(net.spec.n_outputs as u32).to_le_bytes());
    buf.extend_from_slice(&(shapes.len() as u32).to_le_bytes());
    for s in &shapes {
        buf.extend_from_slice(&(s.len() as u32).to_le_bytes());
        for &d in s {
            buf.extend_from_slice(&(d as u32).to_le_bytes());
        }
    }
    for p in &net.params {
        for v in p {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    let sum = checksum(&buf);
    buf.extend_from_slice(&sum.to_le_bytes());

    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(&buf)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8], CheckpointError> {
        let end = self.at.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or(CheckpointError::Checksum)?;
        let s = &self.bytes[self.at..end];
        self.at = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, CheckpointError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
}

/// Validates magic and checksum, returning the body (without checksum).
fn verified_body(bytes: &[u8]) -> Result<&[u8], CheckpointError> {
    if bytes.len() < MAGIC.len() || &bytes[..MAGIC.len()] != MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    if bytes.len() < MAGIC.len() + 8 {
        return Err(CheckpointError::Checksum);
    }
    let (body, tail) = bytes.split_at(bytes.len() - 8);
    if checksum(body) != u64::from_le_bytes(tail.try_into().unwrap()) {
        return Err(CheckpointError::Checksum);
    }
    Ok(body)
}

fn parse_header(r: &mut Reader) -> Result<CheckpointHeader, CheckpointError> {
    r.take(MAGIC.len())?;
    let version = r.u32()?;
    if version != FORMAT_VERSION {
        return Err(CheckpointError::Version { found: version, expected: FORMAT_VERSION });
    }
    let head_code = r.take(1)?[0];
    let head = HeadKind::from_code(head_code)
        .ok_or_else(|| CheckpointError::ShapeMismatch(format!("unknown head kind {head_code}")))?;
    let n_outputs = r.u32()? as usize;
    let n = r.u32()? as usize;
    let mut shapes = Vec::with_capacity(n.min(64));
    for _ in 0..n {
        let nd = r.u32()? as usize;
        let mut s = Vec::with_capacity(nd.min(8));
        for _ in 0..nd {
            s.push(r.u32()? as usize);
        }
        shapes.push(s);
    }
    Ok(CheckpointHeader { version, head, n_outputs, shapes })
}

pub fn read_header(path: &Path) -> Result<CheckpointHeader, CheckpointError> {
    let bytes = fs::read(path)?;
    let body = verified_body(&bytes)?;
    parse_header(&mut Reader { bytes: body, at: 0 })
}

/// Loads a checkpoint that must match `expected` exactly.
pub fn load_params(path: &Path, expected: &NetworkSpec) -> Result<Network<f32>, CheckpointError> {
    let bytes = fs::read(path)?;
    let body = verified_body(&bytes)?;
    let mut r = Reader { bytes: body, at: 0 };
    let header = parse_header(&mut r)?;
    if header.head != expected.head {
        return Err(CheckpointError::ShapeMismatch(format!(
            "head {:?} in file, {:?} expected",
            header.head, expected.head
        )));
    }
    if header.n_outputs != expected.n_outputs {
        return Err(CheckpointError::ShapeMismatch(format!(
            "{} outputs in file, {} expected",
            header.n_outputs, expected.n_outputs
        )));
    }
    let want = expected.param_shapes();
    if header.shapes != want {
        return Err(CheckpointError::ShapeMismatch("layer shape table differs".into()));
    }
    let mut net = Network::<f32>::zeros(expected.clone());
    for p in &mut net.params {
        let raw = r.take(4 * p.len())?;
        for (v, chunk) in p.iter_mut().zip(raw.chunks_exact(4)) {
            *v = f32::from_le_bytes(chunk.try_into().unwrap());
        }
    }
    if r.at != body.len() {
        return Err(CheckpointError::ShapeMismatch("trailing data after parameters".into()));
    }
    Ok(net)
}
