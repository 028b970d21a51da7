//! Checkpoints and CSV output.
//!
//! Checkpoint layout: the 8-byte magic `LRCKPT01`, a little-endian `u64`
//! header length, a JSON header, then each array listed in the header as
//! column-major complex numbers (`re`, `im` as little-endian `f64`).

use crate::linalg::C64;
use faer::Mat;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::path::Path;
use thiserror::Error;

pub const MAGIC: &[u8; 8] = b"LRCKPT01";

#[derive(Debug, Error)]
pub enum IoError {
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a checkpoint (bad magic)")]
    BadMagic,
    #[error("checkpoint header: {0}")]
    Header(#[from] serde_json::Error),
    #[error("checkpoint truncated while reading `{0}`")]
    Truncated(String),
    #[error("checkpoint has no array `{0}`")]
    MissingArray(String),
    #[error("checkpoint kind `{got}` where `{expected}` was required")]
    WrongKind { got: String, expected: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArraySpec {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    /// `ground` or `matrix`.
    pub kind: String,
    pub statistics: String,
    pub particles: usize,
    pub orbitals: Vec<usize>,
    pub points: usize,
    pub energy: f64,
    pub residual_orb: f64,
    pub residual_c: f64,
    pub mu_hermiticity: f64,
    pub iterations: usize,
    pub converged: bool,
    pub config: String,
    pub config_hash: String,
    pub arrays: Vec<ArraySpec>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub header: CheckpointHeader,
    pub arrays: Vec<Mat<C64>>,
}

impl Checkpoint {
    pub fn new(header: CheckpointHeader) -> Checkpoint {
        Checkpoint { header: CheckpointHeader { arrays: Vec::new(), ..header }, arrays: Vec::new() }
    }

    pub fn push(&mut self, name: &str, m: Mat<C64>) {
        self.header.arrays.push(ArraySpec { name: name.to_string(), rows: m.nrows(), cols: m.ncols() });
        self.arrays.push(m);
    }

    pub fn push_vector(&mut self, name: &str, v: &[C64]) {
        self.push(name, Mat::from_fn(v.len(), 1, |i, _| v[i]));
    }

    pub fn get(&self, name: &str) -> Result<&Mat<C64>, IoError> {
        self.header
            .arrays
            .iter()
            .position(|a| a.name == name)
            .map(|i| &self.arrays[i])
            .ok_or_else(|| IoError::MissingArray(name.to_string()))
    }

    pub fn vector(&self, name: &str) -> Result<Vec<C64>, IoError> {
        let m = self.get(name)?;
        Ok((0..m.nrows() * m.ncols()).map(|i| m[(i % m.nrows(), i / m.nrows())]).collect())
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<(), IoError> {
        let header = serde_json::to_vec(&self.header)?;
        w.write_all(MAGIC)?;
        w.write_all(&(header.len() as u64).to_le_bytes())?;
        w.write_all(&header)?;
        for m in &self.arrays {
            let mut buf = Vec::with_capacity(16 * m.nrows() * m.ncols());
            for j in 0..m.ncols() {
                for i in 0..m.nrows() {
                    buf.extend_from_slice(&m[(i, j)].re.to_le_bytes());
                    buf.extend_from_slice(&m[(i, j)].im.to_le_bytes());
                }
            }
            w.write_all(&buf)?;
        }
        Ok(())
    }

    pub fn read_from(mut r: impl Read) -> Result<Checkpoint, IoError> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic).map_err(|_| IoError::BadMagic)?;
        if &magic != MAGIC {
            return Err(IoError::BadMagic);
        }
        let mut len = [0u8; 8];
        r.read_exact(&mut len).map_err(|_| IoError::Truncated("header length".into()))?;
        let mut header = vec![0u8; u64::from_le_bytes(len) as usize];
        r.read_exact(&mut header).map_err(|_| IoError::Truncated("header".into()))?;
        let header: CheckpointHeader = serde_json::from_slice(&header)?;
        let mut arrays = Vec::with_capacity(header.arrays.len());
        for spec in &header.arrays {
            let mut buf = vec![0u8; 16 * spec.rows * spec.cols];
            r.read_exact(&mut buf).map_err(|_| IoError::Truncated(spec.name.clone()))?;
            let f = |k: usize| f64::from_le_bytes(buf[8 * k..8 * k + 8].try_into().unwrap());
            arrays.push(Mat::from_fn(spec.rows, spec.cols, |i, j| {
                let k = 2 * (j * spec.rows + i);
                C64::new(f(k), f(k + 1))
            }));
        }
        Ok(Checkpoint { header, arrays })
    }

    pub fn save(&self, path: &Path) -> Result<(), IoError> {
        let f = std::fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(f);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Checkpoint, IoError> {
        Checkpoint::read_from(std::io::BufReader::new(std::fs::File::open(path)?))
    }
}

/// 17 significant digits in scientific notation.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV with `#`-prefixed provenance lines (full config and its hash) before the column header.
pub fn write_csv(path: &Path, config: &str, hash: &str, columns: &[&str], rows: &[Vec<String>]) -> Result<(), IoError> {
    let mut s = String::new();
    for line in config.lines() {
        s.push_str("# ");
        s.push_str(line);
        s.push('\n');
    }
    s.push_str(&format!("# config_sha256 = {hash}\n"));
    s.push_str(&columns.join(","));
    s.push('\n');
    for r in rows {
        s.push_str(&r.join(","));
        s.push('\n');
    }
    std::fs::write(path, s)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn header() -> CheckpointHeader {
        CheckpointHeader {
            kind: "ground".into(),
            statistics: "boson".into(),
            particles: 2,
            orbitals: vec![2],
            points: 3,
            energy: 1.0 / 3.0,
            residual_orb: 1e-9,
            residual_c: 0.0,
            mu_hermiticity: 2.2e-16,
            iterations: 7,
            converged: true,
            config: "[system]\n".into(),
            config_hash: "ab".into(),
            arrays: vec![],
        }
    }

    #[test]
    fn bit_exact_round_trip() {
        let mut ck = Checkpoint::new(header());
        ck.push("orbitals", Mat::from_fn(3, 2, |i, j| C64::new((i as f64 + 0.1).sqrt(), -(j as f64) / 7.0)));
        ck.push_vector("coefficients", &[C64::new(f64::MIN_POSITIVE, -0.0), C64::new(1e300, std::f64::consts::E)]);
        let mut buf = Vec::new();
        ck.write_to(&mut buf).unwrap();
        let back = Checkpoint::read_from(&buf[..]).unwrap();
        assert_eq!(back.header, ck.header);
        for (a, b) in back.arrays.iter().zip(&ck.arrays) {
            for j in 0..a.ncols() {
                for i in 0..a.nrows() {
                    assert_eq!(a[(i, j)].re.to_bits(), b[(i, j)].re.to_bits());
                    assert_eq!(a[(i, j)].im.to_bits(), b[(i, j)].im.to_bits());
                }
            }
        }
        assert_eq!(back.vector("coefficients").unwrap().len(), 2);
        assert!(matches!(back.get("nope"), Err(IoError::MissingArray(_))));
    }

    #[test]
    fn rejects_garbage_and_truncation() {
        assert!(matches!(Checkpoint::read_from(&b"NOTACKPTxxxxxxxx"[..]), Err(IoError::BadMagic)));
        let mut ck = Checkpoint::new(header());
        ck.push("a", Mat::from_fn(4, 4, |i, j| C64::new(i as f64, j as f64)));
        let mut buf = Vec::new();
        ck.write_to(&mut buf).unwrap();
        buf.truncate(buf.len() - 5);
        assert!(matches!(Checkpoint::read_from(&buf[..]), Err(IoError::Truncated(_))));
    }

    #[test]
    fn number_format_has_17_digits() {
        let s = fmt_num(1.0 / 3.0);
        assert_eq!(s, "3.3333333333333331e-1");
        assert_eq!(s.parse::<f64>().unwrap(), 1.0 / 3.0);
    }
}
