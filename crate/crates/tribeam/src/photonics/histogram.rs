use std::collections::BTreeMap;
use std::io::{BufRead, Read, Write};

use crate::error::{Error, Result};

/// Joint count histogram f(c₁, c₂, c₃) over N realizations.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PhotocountHistogram {
    counts: BTreeMap<[u32; 3], u64>,
    total: u64,
}

const BINARY_MAGIC: &[u8; 8] = b"TBHIST01";

impl PhotocountHistogram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_counts(counts: BTreeMap<[u32; 3], u64>) -> Self {
        let counts: BTreeMap<_, _> = counts.into_iter().filter(|&(_, n)| n > 0).collect();
        let total = counts.values().sum();
        PhotocountHistogram { counts, total }
    }

    pub fn add(&mut self, cell: [u32; 3], n: u64) {
        if n > 0 {
            *self.counts.entry(cell).or_insert(0) += n;
            self.total += n;
        }
    }

    pub fn merge(&mut self, other: &PhotocountHistogram) {
        for (&c, &n) in &other.counts {
            self.add(c, n);
        }
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    /// Number of occupied cells.
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn get(&self, cell: [u32; 3]) -> u64 {
        self.counts.get(&cell).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = ([u32; 3], u64)> + '_ {
        self.counts.iter().map(|(&c, &n)| (c, n))
    }

    /// Largest count per beam.
    pub fn max_counts(&self) -> [u32; 3] {
        let mut m = [0; 3];
        for c in self.counts.keys() {
            for j in 0..3 {
                m[j] = m[j].max(c[j]);
            }
        }
        m
    }

    /// Marginal frequencies of one beam.
    pub fn marginal(&self, beam: usize) -> Vec<u64> {
        let mut out = vec![0; self.max_counts()[beam] as usize + 1];
        for (c, n) in self.iter() {
            out[c[beam] as usize] += n;
        }
        out
    }

    pub fn mean(&self, beam: usize) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        self.iter().map(|(c, n)| c[beam] as f64 * n as f64).sum::<f64>() / self.total as f64
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "c1,c2,c3,count")?;
        for (c, n) in self.iter() {
            writeln!(w, "{},{},{},{}", c[0], c[1], c[2], n)?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut hist = PhotocountHistogram::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || (lineno == 0 && line.starts_with("c1")) {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 4 {
                return Err(Error::Data(format!("line {}: expected 4 fields", lineno + 1)));
            }
            let bad = |s: &str| Error::Data(format!("line {}: bad integer {s:?}", lineno + 1));
            let mut cell = [0u32; 3];
            for (v, f) in cell.iter_mut().zip(&fields) {
                *v = f.parse().map_err(|_| bad(f))?;
            }
            hist.add(cell, fields[3].parse().map_err(|_| bad(fields[3]))?);
        }
        Ok(hist)
    }

    /// Little-endian binary cache: magic, cell count, then (c₁, c₂, c₃: u32, count: u64) records.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(BINARY_MAGIC)?;
        w.write_all(&(self.counts.len() as u64).to_le_bytes())?;
        for (c, n) in self.iter() {
            for v in c {
                w.write_all(&v.to_le_bytes())?;
            }
            w.write_all(&n.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != BINARY_MAGIC {
            return Err(Error::Data("not a histogram cache file".into()));
        }
        let mut b8 = [0u8; 8];
        let mut b4 = [0u8; 4];
        r.read_exact(&mut b8)?;
        let cells = u64::from_le_bytes(b8);
        let mut hist = PhotocountHistogram::new();
        for _ in 0..cells {
            let mut c = [0u32; 3];
            for v in c.iter_mut() {
                r.read_exact(&mut b4)?;
                *v = u32::from_le_bytes(b4);
            }
            r.read_exact(&mut b8)?;
            hist.add(c, u64::from_le_bytes(b8));
        }
        Ok(hist)
    }
}
