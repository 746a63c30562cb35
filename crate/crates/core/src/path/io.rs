use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::GridPath;
use crate::emit::fmt_float;
use crate::error::{domain, Error, Result};

/// JSON form of a [`GridPath`]: grid metadata plus one array per node.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PathEnvelope {
    pub t0: f64,
    pub mesh: f64,
    pub dim: usize,
    pub values: Vec<Vec<f64>>,
}

impl TryFrom<PathEnvelope> for GridPath {
    type Error = Error;

    fn try_from(env: PathEnvelope) -> Result<Self> {
        if env.values.iter().any(|r| r.len() != env.dim) {
            return Err(domain(format!("every node must have dimension {}", env.dim)));
        }
        GridPath::new(env.t0, env.mesh, env.dim, env.values.concat())
    }
}

impl From<GridPath> for PathEnvelope {
    fn from(p: GridPath) -> Self {
        PathEnvelope {
            t0: p.t0(),
            mesh: p.mesh(),
            dim: p.dim(),
            values: p.rows().map(<[f64]>::to_vec).collect(),
        }
    }
}

/// Writes `t,x_1..x_d` with one row per node.
pub fn write_csv<W: Write>(path: &GridPath, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t".to_string()];
    header.extend((1..=path.dim()).map(|i| format!("x_{i}")));
    w.write_record(&header)?;
    for (k, row) in path.rows().enumerate() {
        let mut rec = vec![fmt_float(path.time(k))];
        rec.extend(row.iter().map(|&v| fmt_float(v)));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a CSV written by [`write_csv`]; the mesh is recovered from the
/// first two time stamps and every later stamp must sit on that grid.
pub fn read_csv<R: Read>(input: R) -> Result<GridPath> {
    let mut r = csv::Reader::from_reader(input);
    let dim = r.headers()?.len().saturating_sub(1);
    if dim == 0 {
        return Err(domain("CSV path needs a time column and at least one value column"));
    }
    let mut times = Vec::new();
    let mut values = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        let parsed = parsed.map_err(|e| domain(format!("bad number in CSV: {e}")))?;
        times.push(parsed[0]);
        values.extend_from_slice(&parsed[1..]);
    }
    if times.len() < 2 {
        return Err(domain("CSV path needs at least two rows"));
    }
    let mesh = times[1] - times[0];
    let p = GridPath::new(times[0], mesh, dim, values)?;
    for (k, &t) in times.iter().enumerate() {
        if p.index_of(t)? != k {
            return Err(domain(format!("row {k} has time {t}, not on a uniform grid")));
        }
    }
    Ok(p)
}
