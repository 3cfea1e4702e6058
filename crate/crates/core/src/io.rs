//! CSV interchange: measures (`location,amplitude`), samples
//! (`location[,is_noise]`), certificates (`sample_location,q`) and solutions
//! (`grid_location,coefficient[,w]`). Lines starting with `#` are comments.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::signal::{AtomicMeasure, Grid, SampleSet};

fn reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(r)
}

fn columns<R: Read>(rd: &mut csv::Reader<R>, required: &[&str]) -> Result<Vec<usize>> {
    let h = rd.headers()?.clone();
    required
        .iter()
        .map(|name| {
            h.iter()
                .position(|c| c == *name)
                .ok_or_else(|| Error::Parse(format!("missing column '{name}' (header: {})", h.iter().collect::<Vec<_>>().join(","))))
        })
        .collect()
}

fn field(rec: &csv::StringRecord, i: usize, line: usize) -> Result<f64> {
    let s = rec.get(i).ok_or_else(|| Error::Parse(format!("row {line}: missing field")))?;
    s.parse::<f64>().map_err(|_| Error::Parse(format!("row {line}: '{s}' is not a number")))
}

fn parse_bool(s: &str, line: usize) -> Result<bool> {
    match s.to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" => Ok(true),
        "0" | "false" | "no" | "" => Ok(false),
        _ => Err(Error::Parse(format!("row {line}: '{s}' is not a boolean"))),
    }
}

pub fn read_measure<R: Read>(r: R) -> Result<AtomicMeasure> {
    let mut rd = reader(r);
    let c = columns(&mut rd, &["location", "amplitude"])?;
    let mut spikes = Vec::new();
    for (k, rec) in rd.records().enumerate() {
        let rec = rec?;
        spikes.push((field(&rec, c[0], k + 1)?, field(&rec, c[1], k + 1)?));
    }
    AtomicMeasure::new(spikes)
}

pub fn write_measure<W: Write>(mut w: W, mu: &AtomicMeasure) -> Result<()> {
    writeln!(w, "location,amplitude")?;
    for &(t, a) in mu.spikes() {
        writeln!(w, "{t},{a}")?;
    }
    Ok(())
}

pub fn read_samples<R: Read>(r: R) -> Result<SampleSet> {
    let mut rd = reader(r);
    let c = columns(&mut rd, &["location"])?;
    let noise_col = rd.headers()?.iter().position(|h| h == "is_noise");
    let mut locs = Vec::new();
    let mut noise = Vec::new();
    for (k, rec) in rd.records().enumerate() {
        let rec = rec?;
        locs.push(field(&rec, c[0], k + 1)?);
        if let Some(j) = noise_col {
            if parse_bool(rec.get(j).unwrap_or(""), k + 1)? {
                noise.push(k);
            }
        }
    }
    SampleSet::with_noise(locs, noise)
}

pub fn write_samples<W: Write>(mut w: W, s: &SampleSet) -> Result<()> {
    let noisy = !s.noise_indices().is_empty();
    writeln!(w, "{}", if noisy { "location,is_noise" } else { "location" })?;
    for (i, &x) in s.locations().iter().enumerate() {
        if noisy {
            writeln!(w, "{x},{}", u8::from(s.is_noise(i)))?;
        } else {
            writeln!(w, "{x}")?;
        }
    }
    Ok(())
}

/// Measurements: `value` column, one row per sample.
pub fn read_values<R: Read>(r: R) -> Result<Vec<f64>> {
    let mut rd = reader(r);
    let c = columns(&mut rd, &["value"])?;
    rd.records().enumerate().map(|(k, rec)| field(&rec?, c[0], k + 1)).collect()
}

pub fn write_values<W: Write>(mut w: W, y: &[f64]) -> Result<()> {
    writeln!(w, "value")?;
    for v in y {
        writeln!(w, "{v}")?;
    }
    Ok(())
}

pub fn read_grid<R: Read>(r: R) -> Result<Grid> {
    let mut rd = reader(r);
    let c = columns(&mut rd, &["location"])?;
    let pts = rd.records().enumerate().map(|(k, rec)| field(&rec?, c[0], k + 1)).collect::<Result<Vec<_>>>()?;
    Grid::new(pts)
}

pub fn write_certificate<W: Write>(mut w: W, samples: &[f64], q: &[f64]) -> Result<()> {
    writeln!(w, "sample_location,q")?;
    for (s, v) in samples.iter().zip(q) {
        writeln!(w, "{s},{v}")?;
    }
    Ok(())
}

pub fn read_certificate<R: Read>(r: R) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut rd = reader(r);
    let c = columns(&mut rd, &["sample_location", "q"])?;
    let mut s = Vec::new();
    let mut q = Vec::new();
    for (k, rec) in rd.records().enumerate() {
        let rec = rec?;
        s.push(field(&rec, c[0], k + 1)?);
        q.push(field(&rec, c[1], k + 1)?);
    }
    Ok((s, q))
}

/// Writes `grid_location,coefficient` plus a `w` column when a noise estimate
/// is given (one w per row; rows beyond the shorter vector are left empty).
pub fn write_solution<W: Write>(mut w: W, grid: &Grid, x: &[f64], noise: Option<&[f64]>) -> Result<()> {
    match noise {
        None => {
            writeln!(w, "grid_location,coefficient")?;
            for (g, v) in grid.points.iter().zip(x) {
                writeln!(w, "{g},{v}")?;
            }
        }
        Some(nv) => {
            writeln!(w, "grid_location,coefficient,w")?;
            for i in 0..grid.len().max(nv.len()) {
                let g = grid.points.get(i).map(|v| v.to_string()).unwrap_or_default();
                let c = x.get(i).map(|v| v.to_string()).unwrap_or_default();
                let n = nv.get(i).map(|v| v.to_string()).unwrap_or_default();
                writeln!(w, "{g},{c},{n}")?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn measure_round_trip() {
        let mu = AtomicMeasure::new(vec![(0.0, 1.5), (2.25, -0.5)]).unwrap();
        let mut buf = Vec::new();
        write_measure(&mut buf, &mu).unwrap();
        assert_eq!(read_measure(&buf[..]).unwrap(), mu);
    }

    #[test]
    fn samples_with_noise_and_comments() {
        let text = "# hash abc\nlocation,is_noise\n-0.1,0\n0.1,1\n0.3,false\n";
        let s = read_samples(text.as_bytes()).unwrap();
        assert_eq!(s.locations(), &[-0.1, 0.1, 0.3]);
        assert_eq!(s.noise_indices(), &[1]);
        let mut buf = Vec::new();
        write_samples(&mut buf, &s).unwrap();
        assert_eq!(read_samples(&buf[..]).unwrap(), s);
    }

    #[test]
    fn malformed_rows_are_parse_errors() {
        assert!(matches!(read_measure("location,amplitude\n0.1,abc\n".as_bytes()), Err(Error::Parse(_))));
        assert!(matches!(read_measure("loc,amp\n0.1,1\n".as_bytes()), Err(Error::Parse(_))));
        assert!(read_values("value\n1\n2,3\n".as_bytes()).is_err());
    }
}
