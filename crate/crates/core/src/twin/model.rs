//! Model file layout (all integers and floats little-endian):
//!
//! | bytes            | content                                            |
//! |------------------|----------------------------------------------------|
//! | 8                | magic `PTWINMDL`                                   |
//! | 4                | format version (u32)                               |
//! | 8                | header length H (u64)                              |
//! | H                | UTF-8 TOML header: config, system, criterion,      |
//! |                  | normalization, training parameters, residual, nnz |
//! | 8·N·M            | W_in, column-major                                 |
//! | 8·N              | W_p                                                |
//! | 8·N              | bias                                               |
//! | 8·(N+1)          | W_r row pointers (u64)                             |
//! | 8·nnz            | W_r column indices (u64)                           |
//! | 8·nnz            | W_r values                                         |
//! | 8·L·N            | W_out, column-major                                |
//!
//! Floats in the header are written in shortest round-trip form, so
//! `from_bytes(to_bytes(x)) == x` bit for bit.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::diagram::CollapseCriterion;
use crate::dynsys::SystemSpec;
use crate::error::{Error, Result};
use crate::reservoir::{CsrMatrix, Readout, ReservoirConfig, ReservoirMatrices};

use super::{Normalization, TrainedTwin};

pub const MODEL_MAGIC: &[u8; 8] = b"PTWINMDL";
pub const MODEL_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    train_params: Vec<f64>,
    residual: f64,
    nnz: usize,
    config: ReservoirConfig,
    criterion: CollapseCriterion,
    normalization: Normalization,
    system: Option<SystemSpec>,
}

fn bad(detail: impl Into<String>) -> Error {
    Error::format("model file", detail)
}

struct Reader<'a> {
    bytes: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.bytes.len() < n {
            return Err(bad("truncated"));
        }
        let (head, rest) = self.bytes.split_at(n);
        self.bytes = rest;
        Ok(head)
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let len = n.checked_mul(8).ok_or_else(|| bad("array length overflows"))?;
        Ok(self.take(len)?.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
    }

    fn usizes(&mut self, n: usize) -> Result<Vec<usize>> {
        (0..n).map(|_| self.u64().and_then(|v| usize::try_from(v).map_err(|_| bad("index out of range")))).collect()
    }
}

impl TrainedTwin {
    pub fn to_bytes(&self) -> Vec<u8> {
        let header = Header {
            train_params: self.train_params.clone(),
            residual: self.residual,
            nnz: self.matrices.w_r.nnz(),
            config: self.config.clone(),
            criterion: self.criterion,
            normalization: self.normalization.clone(),
            system: self.system,
        };
        let text = toml::to_string(&header).expect("header is plain data");
        let m = &self.matrices;
        let mut out =
            Vec::with_capacity(20 + text.len() + 8 * (m.w_in.len() + 3 * m.size() + 3 * m.w_r.nnz() + self.readout.w_out.len() + 1));
        out.extend_from_slice(MODEL_MAGIC);
        out.extend_from_slice(&MODEL_VERSION.to_le_bytes());
        out.extend_from_slice(&(text.len() as u64).to_le_bytes());
        out.extend_from_slice(text.as_bytes());
        let floats = |out: &mut Vec<u8>, xs: &[f64]| xs.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes()));
        let ints = |out: &mut Vec<u8>, xs: &[usize]| xs.iter().for_each(|&x| out.extend_from_slice(&(x as u64).to_le_bytes()));
        floats(&mut out, m.w_in.as_slice());
        floats(&mut out, m.w_p.as_slice());
        floats(&mut out, m.bias.as_slice());
        ints(&mut out, m.w_r.row_ptr());
        ints(&mut out, m.w_r.col_indices());
        floats(&mut out, m.w_r.values());
        floats(&mut out, self.readout.w_out.as_slice());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut rd = Reader { bytes };
        if rd.take(8)? != MODEL_MAGIC {
            return Err(bad("not a model file (bad magic)"));
        }
        let version = u32::from_le_bytes(rd.take(4)?.try_into().unwrap());
        if version != MODEL_VERSION {
            return Err(bad(format!("unsupported format version {version}")));
        }
        let len = usize::try_from(rd.u64()?).map_err(|_| bad("header too large"))?;
        let text = std::str::from_utf8(rd.take(len)?).map_err(|_| bad("header is not UTF-8"))?;
        let h: Header = toml::from_str(text).map_err(|e| bad(format!("header: {e}")))?;
        h.config.validate_for_twin()?;
        let (n, dim) = (h.config.size, h.config.input_dim);
        if h.normalization.mean.len() != dim || h.normalization.scale.len() != dim {
            return Err(bad("normalization does not match the input dimension"));
        }
        let w_in = DMatrix::from_vec(n, dim, rd.f64s(n * dim)?);
        let w_p = DVector::from_vec(rd.f64s(n)?);
        let bias = DVector::from_vec(rd.f64s(n)?);
        let row_ptr = rd.usizes(n + 1)?;
        let cols = rd.usizes(h.nnz)?;
        let values = rd.f64s(h.nnz)?;
        let w_r = CsrMatrix::from_parts(n, row_ptr, cols, values).ok_or_else(|| bad("inconsistent sparse recurrent matrix"))?;
        let w_out = DMatrix::from_vec(h.config.output_dim, n, rd.f64s(h.config.output_dim * n)?);
        if !rd.bytes.is_empty() {
            return Err(bad(format!("{} trailing bytes", rd.bytes.len())));
        }
        let matrices = ReservoirMatrices { w_in, w_p, w_r, bias };
        matrices.check()?;
        Ok(TrainedTwin {
            config: h.config,
            matrices,
            readout: Readout { w_out },
            normalization: h.normalization,
            train_params: h.train_params,
            residual: h.residual,
            system: h.system,
            criterion: h.criterion,
        })
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        crate::files::write_atomic(path.as_ref(), &self.to_bytes())
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}
