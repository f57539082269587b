//! Binary model checkpoints.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic        8 bytes  b"SDAECKPT"
//! version      u32      1
//! layer_count  u32
//! manifest     per layer: kind u8 (0 conv2d, 1 relu, 2 maxpool2x2,
//!              3 upsample2x2, 4 sigmoid); conv2d adds out, in, kh, kw as u32
//! parameters   per conv2d in manifest order: weight then bias, raw f64 LE
//! ```

use std::io::{Read, Write};

use super::{Conv2d, Layer, MaxPool2x2, NnError, Relu, Sequential, Sigmoid, Tensor, Upsample2x2};

pub const MAGIC: &[u8; 8] = b"SDAECKPT";
pub const VERSION: u32 = 1;

fn io_err(e: std::io::Error) -> NnError {
    NnError::Checkpoint(e.to_string())
}

pub fn write<W: Write>(model: &Sequential, mut out: W) -> Result<(), NnError> {
    let mut buf = Vec::new();
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(model.layers().len() as u32).to_le_bytes());
    for layer in model.layers() {
        match layer {
            Layer::Conv2d(c) => {
                buf.push(0);
                for d in c.weight.shape() {
                    buf.extend_from_slice(&(*d as u32).to_le_bytes());
                }
            }
            Layer::Relu(_) => buf.push(1),
            Layer::MaxPool2x2(_) => buf.push(2),
            Layer::UpsampleNearest2x2(_) => buf.push(3),
            Layer::Sigmoid(_) => buf.push(4),
        }
    }
    for p in model.params() {
        for v in p.data() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    out.write_all(&buf).map_err(io_err)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8], NnError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| NnError::Checkpoint("truncated file".into()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8, NnError> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32, NnError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>, NnError> {
        let raw = self.take(n.checked_mul(8).ok_or_else(|| NnError::Checkpoint("size overflow".into()))?)?;
        Ok(raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
    }
}

pub fn read<R: Read>(mut input: R) -> Result<Sequential, NnError> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes).map_err(io_err)?;
    let mut cur = Cursor { bytes: &bytes, pos: 0 };
    if cur.take(8)? != MAGIC {
        return Err(NnError::Checkpoint("bad magic".into()));
    }
    let version = cur.u32()?;
    if version != VERSION {
        return Err(NnError::Checkpoint(format!("unsupported version {version}")));
    }
    let count = cur.u32()? as usize;
    let mut layers = Vec::with_capacity(count.min(1024));
    for _ in 0..count {
        let layer = match cur.u8()? {
            0 => {
                let (o, i, kh, kw) = (cur.u32()?, cur.u32()?, cur.u32()?, cur.u32()?);
                if kh != kw {
                    return Err(NnError::Checkpoint(format!("non-square kernel {kh}x{kw}")));
                }
                Layer::Conv2d(Conv2d::new(i as usize, o as usize, kh as usize))
            }
            1 => Layer::Relu(Relu::default()),
            2 => Layer::MaxPool2x2(MaxPool2x2::default()),
            3 => Layer::UpsampleNearest2x2(Upsample2x2),
            4 => Layer::Sigmoid(Sigmoid::default()),
            k => return Err(NnError::Checkpoint(format!("unknown layer kind {k}"))),
        };
        layers.push(layer);
    }
    let mut model = Sequential::new(layers);
    for p in model.params_mut() {
        let shape = p.shape().to_vec();
        *p = Tensor::from_vec(&shape, cur.f64s(p.len())?)?;
    }
    if cur.pos != bytes.len() {
        return Err(NnError::Checkpoint("trailing bytes after parameters".into()));
    }
    Ok(model)
}
