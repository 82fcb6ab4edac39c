use std::path::Path;

use serde::{Deserialize, Serialize};

use super::lstm::{LstmParams, LstmShape};
use crate::error::{Error, Result};

/// Leading bytes of every checkpoint file.
pub const MAGIC: &[u8; 4] = b"PGM1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

/// A self-describing model snapshot: the magic bytes followed by one JSON
/// object holding the configuration and the tensors in declared order.
///
/// Floats are written in shortest round-trip form, so `from_bytes` followed
/// by `to_bytes` reproduces the input byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub kind: String,
    pub seed: u64,
    pub config: serde_json::Value,
    pub tensors: Vec<Tensor>,
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut out = MAGIC.to_vec();
        serde_json::to_writer(&mut out, self)?;
        out.push(b'\n');
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let body = bytes
            .strip_prefix(MAGIC.as_slice())
            .ok_or_else(|| Error::invalid("not a checkpoint (bad magic)"))?;
        let ck: Checkpoint = serde_json::from_slice(body)?;
        for t in &ck.tensors {
            if t.shape.iter().product::<usize>() != t.data.len() {
                return Err(Error::invalid(format!("tensor {} does not match its shape", t.name)));
            }
        }
        Ok(ck)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }

    pub fn tensor(&self, name: &str) -> Result<&Tensor> {
        self.tensors
            .iter()
            .find(|t| t.name == name)
            .ok_or_else(|| Error::invalid(format!("checkpoint lacks tensor {name}")))
    }
}

/// Tensors of an LSTM, names prefixed with `prefix.`.
pub fn lstm_tensors(p: &LstmParams, prefix: &str) -> Vec<Tensor> {
    let s = p.shape();
    p.layout()
        .tensors(s)
        .into_iter()
        .map(|(name, shape, range)| Tensor {
            name: format!("{prefix}.{name}"),
            shape,
            data: p.as_slice()[range].to_vec(),
        })
        .collect()
}

/// Rebuilds an LSTM from the tensors written by [`lstm_tensors`].
pub fn lstm_from_checkpoint(ck: &Checkpoint, prefix: &str) -> Result<LstmParams> {
    let w = ck.tensor(&format!("{prefix}.w"))?;
    let v = ck.tensor(&format!("{prefix}.v"))?;
    let (Some(&four_h), Some(&input), Some(&output)) = (w.shape.first(), w.shape.get(1), v.shape.first()) else {
        return Err(Error::invalid("malformed lstm tensors"));
    };
    let shape = LstmShape::new(input, four_h / 4, output);
    let mut data = Vec::with_capacity(shape.param_count());
    for (name, dims, _) in super::lstm::Layout::of(shape).tensors(shape) {
        let t = ck.tensor(&format!("{prefix}.{name}"))?;
        if t.shape != dims {
            return Err(Error::invalid(format!("tensor {} has shape {:?}, expected {dims:?}", t.name, t.shape)));
        }
        data.extend_from_slice(&t.data);
    }
    LstmParams::from_vec(shape, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neuralcore::init::init_lstm;

    #[test]
    fn byte_stable_round_trip() {
        let p = init_lstm(LstmShape::new(3, 4, 2), 1.1, 5).unwrap();
        let ck = Checkpoint {
            kind: "test".into(),
            seed: 5,
            config: serde_json::json!({"hidden": 4}),
            tensors: lstm_tensors(&p, "lstm"),
        };
        let bytes = ck.to_bytes().unwrap();
        assert!(bytes.starts_with(b"PGM1{"));
        let back = Checkpoint::from_bytes(&bytes).unwrap();
        assert_eq!(back.to_bytes().unwrap(), bytes);
        assert_eq!(lstm_from_checkpoint(&back, "lstm").unwrap(), p);
        assert!(Checkpoint::from_bytes(b"XXXX{}").is_err());
    }
}
