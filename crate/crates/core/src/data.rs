//! Observation containers and seeded random streams.

use std::io::{Read, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An i.i.d. sample of `r`-variate points stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    dim: usize,
    data: Vec<f64>,
}

impl Sample {
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Dimension("sample dimension must be positive".into()));
        }
        if data.len() % dim != 0 {
            return Err(Error::Dimension(format!(
                "{} values do not split into rows of {dim}",
                data.len()
            )));
        }
        Ok(Self { dim, data })
    }

    pub fn univariate(data: Vec<f64>) -> Self {
        Self { dim: 1, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Reorder the points by `perm` (a permutation of `0..len`).
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for &i in perm {
            data.extend_from_slice(self.point(i));
        }
        Self { dim: self.dim, data }
    }

    /// Mean of a scalar function of the points.
    pub fn mean_of<F: Fn(&[f64]) -> f64>(&self, f: F) -> f64 {
        self.points().map(f).sum::<f64>() / self.len() as f64
    }
}

/// Headerless CSV, one observation per line. Values are written in the
/// shortest form that parses back to the same f64.
pub fn write_csv<W: Write>(sample: &Sample, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    for p in sample.points() {
        w.write_record(p.iter().map(|v| v.to_string()))
            .map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv_file(sample: &Sample, path: &Path) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    write_csv(sample, std::io::BufWriter::new(f))
}

/// Parse headerless CSV. Every row must have the same number of columns;
/// errors name the 1-based line.
pub fn read_csv<R: Read>(input: R) -> Result<Sample> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut dim = 0;
    let mut data = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            if line == 0 {
                Error::Io(e.to_string())
            } else {
                Error::Parse {
                    line,
                    message: e.to_string(),
                }
            }
        })?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        if dim == 0 {
            dim = rec.len();
        } else if rec.len() != dim {
            return Err(Error::Parse {
                line,
                message: format!("expected {dim} columns, found {}", rec.len()),
            });
        }
        for field in rec.iter() {
            let v: f64 = field.parse().map_err(|_| Error::Parse {
                line,
                message: format!("not a number: {field:?}"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line,
                    message: format!("non-finite value {field:?}"),
                });
            }
            data.push(v);
        }
    }
    if data.is_empty() {
        return Err(Error::Parse {
            line: 1,
            message: "no observations".into(),
        });
    }
    Sample::new(dim, data)
}

pub fn read_csv_file(path: &Path) -> Result<Sample> {
    let f = std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    read_csv(std::io::BufReader::new(f))
}

/// Counter-based stream: the pair (seed, stream) fully determines the draws.
pub fn rng_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream indices used across the crate.
pub mod streams {
    pub const DATA: u64 = 0;
    pub const STARTS: u64 = 1;
    pub const PROBES: u64 = 2;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_exact() {
        let vals = vec![0.1, -1.0 / 3.0, 1e-300, 123456789.123456789, f64::MIN_POSITIVE, 2.0];
        let s = Sample::new(2, vals).unwrap();
        let mut buf = Vec::new();
        write_csv(&s, &mut buf).unwrap();
        assert_eq!(read_csv(&buf[..]).unwrap(), s);
    }

    #[test]
    fn csv_errors_name_the_line() {
        match read_csv("1.0\n2.0\nabc\n".as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        match read_csv("1,2\n3\n".as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(matches!(read_csv("".as_bytes()), Err(Error::Parse { .. })));
    }
}
