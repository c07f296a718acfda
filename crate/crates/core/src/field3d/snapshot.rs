// Copyright 2026 The capacitary Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Grid snapshots: a text header of `key = value` lines closed by
//! `end_header`, then `n³` little-endian `f64` values with `x` fastest.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use super::{Excision, Grid, ScalarField3D};
use crate::error::{Error, Result};

const MAGIC: &str = "capacitary-grid 1";

/// Contents of a snapshot file.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub grid: Grid,
    pub excisions: Vec<Excision>,
    /// `(center, mass)` pairs of the conformal factor.
    pub masses: Vec<([f64; 3], f64)>,
    pub values: Vec<f64>,
}

impl From<&ScalarField3D> for Snapshot {
    fn from(f: &ScalarField3D) -> Self {
        Snapshot {
            grid: f.grid,
            excisions: f.spec.excisions.clone(),
            masses: f.spec.centers.iter().copied().zip(f.spec.masses.iter().copied()).collect(),
            values: f.values.clone(),
        }
    }
}

impl Snapshot {
    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        let g = self.grid;
        writeln!(out, "{MAGIC}")?;
        writeln!(out, "dims = {} {} {}", g.n, g.n, g.n)?;
        writeln!(out, "spacing = {:e}", g.h())?;
        writeln!(out, "extent = {:e}", g.half_extent)?;
        writeln!(out, "byte_order = little-endian")?;
        writeln!(out, "dtype = f64")?;
        for e in &self.excisions {
            writeln!(out, "excision = {:e} {:e} {:e} {:e}", e.center[0], e.center[1], e.center[2], e.radius)?;
        }
        for (c, m) in &self.masses {
            writeln!(out, "mass = {:e} {:e} {:e} {:e}", c[0], c[1], c[2], m)?;
        }
        writeln!(out, "end_header")?;
        let mut bytes = Vec::with_capacity(8 * self.values.len());
        for v in &self.values {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        out.write_all(&bytes)?;
        Ok(())
    }

    pub fn read_from<R: Read>(input: R) -> Result<Self> {
        let mut input = BufReader::new(input);
        let mut line = String::new();
        let mut next_line = |input: &mut BufReader<R>| -> Result<String> {
            line.clear();
            if input.read_line(&mut line)? == 0 {
                return Err(Error::Format("header ends before end_header".into()));
            }
            Ok(line.trim_end().to_string())
        };
        if next_line(&mut input)? != MAGIC {
            return Err(Error::Format("missing magic line".into()));
        }
        let (mut n, mut extent) = (None, None);
        let mut excisions = Vec::new();
        let mut masses = Vec::new();
        loop {
            let l = next_line(&mut input)?;
            if l == "end_header" {
                break;
            }
            let (key, value) =
                l.split_once(" = ").ok_or_else(|| Error::Format(format!("malformed header line {l:?}")))?;
            let nums = || -> Result<Vec<f64>> {
                value
                    .split_whitespace()
                    .map(|s| s.parse::<f64>().map_err(|e| Error::Format(format!("{key}: {e}"))))
                    .collect()
            };
            match key {
                "dims" => {
                    let d = nums()?;
                    if d.len() != 3 || d[0] != d[1] || d[1] != d[2] {
                        return Err(Error::Format(format!("unsupported dims {value}")));
                    }
                    n = Some(d[0] as usize);
                }
                "extent" => extent = Some(nums()?[0]),
                "byte_order" if value != "little-endian" => {
                    return Err(Error::Format(format!("unsupported byte order {value}")))
                }
                "dtype" if value != "f64" => return Err(Error::Format(format!("unsupported dtype {value}"))),
                "excision" | "mass" => {
                    let v = nums()?;
                    if v.len() != 4 {
                        return Err(Error::Format(format!("{key} needs four numbers")));
                    }
                    if key == "excision" {
                        excisions.push(Excision { center: [v[0], v[1], v[2]], radius: v[3] });
                    } else {
                        masses.push(([v[0], v[1], v[2]], v[3]));
                    }
                }
                _ => {}
            }
        }
        let (Some(n), Some(extent)) = (n, extent) else {
            return Err(Error::Format("header lacks dims or extent".into()));
        };
        let grid = Grid::new(n, extent).map_err(|e| Error::Format(e.to_string()))?;
        let mut bytes = Vec::new();
        input.read_to_end(&mut bytes)?;
        if bytes.len() != 8 * grid.len() {
            return Err(Error::Format(format!("expected {} values, found {} bytes", grid.len(), bytes.len())));
        }
        let values = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
        Ok(Snapshot { grid, excisions, masses, values })
    }
}

pub fn write_snapshot(path: &Path, field: &ScalarField3D) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut out = std::io::BufWriter::new(file);
    Snapshot::from(field).write_to(&mut out)?;
    out.flush()?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot> {
    Snapshot::read_from(std::fs::File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bitwise() {
        let grid = Grid::new(8, 1.5).unwrap();
        let snap = Snapshot {
            grid,
            excisions: vec![Excision { center: [0.1, 0.0, -0.2], radius: 0.3 }],
            masses: vec![([0.1, 0.0, -0.2], 0.6)],
            values: (0..grid.len()).map(|i| (i as f64).sin() / 3.0).collect(),
        };
        let mut buf = Vec::new();
        snap.write_to(&mut buf).unwrap();
        assert_eq!(Snapshot::read_from(buf.as_slice()).unwrap(), snap);
    }

    #[test]
    fn truncated_payload_is_rejected() {
        let grid = Grid::new(8, 1.0).unwrap();
        let snap = Snapshot { grid, excisions: vec![], masses: vec![], values: vec![0.0; grid.len()] };
        let mut buf = Vec::new();
        snap.write_to(&mut buf).unwrap();
        buf.truncate(buf.len() - 8);
        assert!(matches!(Snapshot::read_from(buf.as_slice()), Err(Error::Format(_))));
    }
}
