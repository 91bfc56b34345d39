//! Binary field dumps and CSV tables.
//!
//! A dump is `"ODF1"`, a kind byte (scalar 0, vector 1, tensor 2), `n1`,
//! `n2` as little-endian `u32`, `len1`, `len2`, `time` as little-endian
//! `f64`, then the components one after another, each row-major.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::{Grid2D, ScalarField, TensorField, VectorField};
use crate::stationary::{NodeField, NodeVectorField};

pub const MAGIC: &[u8; 4] = b"ODF1";
const HEADER_LEN: usize = 4 + 1 + 4 + 4 + 3 * 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    Scalar = 0,
    Vector = 1,
    Tensor = 2,
}

impl FieldKind {
    pub fn components(self) -> usize {
        match self {
            Self::Scalar => 1,
            Self::Vector => 2,
            Self::Tensor => 4,
        }
    }

    fn from_tag(tag: u8) -> Result<Self> {
        match tag {
            0 => Ok(Self::Scalar),
            1 => Ok(Self::Vector),
            2 => Ok(Self::Tensor),
            t => Err(Error::Dump(format!("unknown field kind tag {t}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldDump {
    pub kind: FieldKind,
    pub n1: u32,
    pub n2: u32,
    pub len1: f64,
    pub len2: f64,
    pub time: f64,
    pub data: Vec<f64>,
}

fn dim(n: usize) -> Result<u32> {
    u32::try_from(n).map_err(|_| Error::Dump(format!("dimension {n} does not fit in u32")))
}

impl FieldDump {
    pub fn new(kind: FieldKind, n1: usize, n2: usize, len1: f64, len2: f64, time: f64, data: Vec<f64>) -> Result<Self> {
        let expected = kind.components() * n1 * n2;
        if data.len() != expected {
            return Err(Error::ShapeMismatch {
                expected,
                actual: data.len(),
            });
        }
        Ok(Self {
            kind,
            n1: dim(n1)?,
            n2: dim(n2)?,
            len1,
            len2,
            time,
            data,
        })
    }

    pub fn from_scalar(f: &ScalarField, time: f64) -> Result<Self> {
        let g = f.grid();
        Self::new(FieldKind::Scalar, g.n1(), g.n2(), g.len1(), g.len2(), time, f.values().to_vec())
    }

    pub fn from_vector(f: &VectorField, time: f64) -> Result<Self> {
        let g = f.grid();
        let data = [f.comp1(), f.comp2()].concat();
        Self::new(FieldKind::Vector, g.n1(), g.n2(), g.len1(), g.len2(), time, data)
    }

    pub fn from_tensor(f: &TensorField, time: f64) -> Result<Self> {
        let g = f.grid();
        Self::new(FieldKind::Tensor, g.n1(), g.n2(), g.len1(), g.len2(), time, f.entries().concat())
    }

    /// Nodes of a stationary field, boundary included.
    pub fn from_nodes(f: &NodeField) -> Result<Self> {
        let d = f.domain();
        Self::new(FieldKind::Scalar, d.nx() + 2, d.ny() + 2, d.lx(), d.ly(), 0.0, f.values().to_vec())
    }

    pub fn from_node_vector(f: &NodeVectorField) -> Result<Self> {
        let d = f.domain();
        let data = [f.c1.values(), f.c2.values()].concat();
        Self::new(FieldKind::Vector, d.nx() + 2, d.ny() + 2, d.lx(), d.ly(), 0.0, data)
    }

    fn expect(&self, kind: FieldKind) -> Result<Grid2D> {
        if self.kind != kind {
            return Err(Error::Dump(format!("expected a {kind:?} field, found {:?}", self.kind)));
        }
        Grid2D::new(self.n1 as usize, self.n2 as usize, self.len1, self.len2)
    }

    fn component(&self, k: usize) -> Vec<f64> {
        let m = self.n1 as usize * self.n2 as usize;
        self.data[k * m..(k + 1) * m].to_vec()
    }

    pub fn to_scalar(&self) -> Result<ScalarField> {
        let g = self.expect(FieldKind::Scalar)?;
        ScalarField::new(g, self.data.clone())
    }

    pub fn to_vector(&self) -> Result<VectorField> {
        let g = self.expect(FieldKind::Vector)?;
        VectorField::new(g, self.component(0), self.component(1))
    }

    pub fn to_tensor(&self) -> Result<TensorField> {
        let g = self.expect(FieldKind::Tensor)?;
        TensorField::new(g, self.component(0), self.component(1), self.component(2), self.component(3))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + 8 * self.data.len());
        out.extend_from_slice(MAGIC);
        out.push(self.kind as u8);
        out.extend_from_slice(&self.n1.to_le_bytes());
        out.extend_from_slice(&self.n2.to_le_bytes());
        for v in [self.len1, self.len2, self.time] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for v in &self.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(Error::Dump(format!("truncated header: expected {HEADER_LEN} bytes, got {}", bytes.len())));
        }
        if &bytes[..4] != MAGIC {
            return Err(Error::Dump(format!("bad magic {:?}, expected \"ODF1\"", &bytes[..4])));
        }
        let kind = FieldKind::from_tag(bytes[4])?;
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().expect("4 bytes"));
        let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().expect("8 bytes"));
        let (n1, n2) = (u32_at(5), u32_at(9));
        let (len1, len2, time) = (f64_at(13), f64_at(21), f64_at(29));
        let count = kind.components() as u64 * n1 as u64 * n2 as u64;
        let expected = HEADER_LEN as u64 + 8 * count;
        if bytes.len() as u64 != expected {
            return Err(Error::Dump(format!("payload length mismatch: expected {expected} bytes, got {}", bytes.len())));
        }
        let data = bytes[HEADER_LEN..].chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
        Ok(Self {
            kind,
            n1,
            n2,
            len1,
            len2,
            time,
            data,
        })
    }
}

pub fn write_field(path: impl AsRef<Path>, dump: &FieldDump) -> Result<()> {
    fs::write(path, dump.to_bytes())?;
    Ok(())
}

pub fn read_field(path: impl AsRef<Path>) -> Result<FieldDump> {
    FieldDump::from_bytes(&fs::read(path)?)
}

/// CSV with a header line and every number in 17-digit scientific notation.
pub fn write_csv(path: impl AsRef<Path>, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    let mut f = fs::File::create(path)?;
    f.write_all(out.as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{random_bandlimited_scalar, random_divfree_field};

    #[test]
    fn round_trip_is_bitwise() {
        let g = Grid2D::new(16, 12, 1.5, 2.0).unwrap();
        let s = random_bandlimited_scalar(g, 3, 3).unwrap();
        let v = random_divfree_field(g, 4, 3).unwrap();
        let t = v.outer(&v.perp());
        for d in [
            FieldDump::from_scalar(&s, 0.25).unwrap(),
            FieldDump::from_vector(&v, -1.0).unwrap(),
            FieldDump::from_tensor(&t, 3.0).unwrap(),
        ] {
            let back = FieldDump::from_bytes(&d.to_bytes()).unwrap();
            assert_eq!(back.to_bytes(), d.to_bytes());
            assert!(back.data.iter().zip(&d.data).all(|(a, b)| a.to_bits() == b.to_bits()));
        }
        let back = FieldDump::from_bytes(&FieldDump::from_vector(&v, 0.0).unwrap().to_bytes()).unwrap();
        assert_eq!(back.to_vector().unwrap(), v);
        assert_eq!(FieldDump::from_tensor(&t, 0.0).unwrap().to_tensor().unwrap(), t);
    }

    #[test]
    fn header_layout() {
        let g = Grid2D::new(4, 6, 1.0, 1.0).unwrap();
        let b = FieldDump::from_scalar(&ScalarField::constant(g, 1.0), 0.5).unwrap().to_bytes();
        assert_eq!(&b[..4], b"ODF1");
        assert_eq!(b[4], 0);
        assert_eq!(&b[5..9], &4u32.to_le_bytes());
        assert_eq!(&b[9..13], &6u32.to_le_bytes());
        assert_eq!(&b[29..37], &0.5f64.to_le_bytes());
        assert_eq!(b.len(), HEADER_LEN + 24 * 8);
    }

    #[test]
    fn malformed_dumps() {
        let g = Grid2D::new(4, 4, 1.0, 1.0).unwrap();
        let b = FieldDump::from_scalar(&ScalarField::constant(g, 2.0), 0.0).unwrap().to_bytes();
        let e = FieldDump::from_bytes(&b[..b.len() - 3]).unwrap_err().to_string();
        assert!(e.contains(&format!("expected {}", b.len())) && e.contains(&format!("got {}", b.len() - 3)), "{e}");
        let mut bad = b.clone();
        bad[0] = b'X';
        assert!(FieldDump::from_bytes(&bad).unwrap_err().to_string().contains("magic"));
        let d = FieldDump::from_bytes(&b).unwrap();
        assert!(d.to_vector().is_err());
        let mut bad = b;
        bad[4] = 7;
        assert!(FieldDump::from_bytes(&bad).is_err());
    }
}
