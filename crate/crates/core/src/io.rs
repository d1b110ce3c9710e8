//! Field snapshots.
//!
//! Binary: `b"QGF1"`, `u32` format version, `u32` n, `f64` period, then the
//! `n²` samples as `f64`, all little-endian, row-major with `idx = iy·n + ix`.
//!
//! CSV: `# format_version: 1`, `# n: <n>`, `# period: <L>` followed by `n`
//! rows of `n` comma-separated samples (row `iy`, column `ix`).

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::spectral::{GridSpec, RealField};

pub const MAGIC: &[u8; 4] = b"QGF1";
pub const FORMAT_VERSION: u32 = 1;

pub fn write_snapshot(mut w: impl Write, f: &RealField) -> Result<()> {
    let g = f.grid();
    w.write_all(MAGIC)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    w.write_all(&(g.n() as u32).to_le_bytes())?;
    w.write_all(&g.period().to_le_bytes())?;
    let mut buf = Vec::with_capacity(8 * g.len());
    for v in f.samples() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_snapshot(mut r: impl Read) -> Result<RealField> {
    let mut head = [0u8; 20];
    r.read_exact(&mut head).map_err(|e| Error::Format(format!("snapshot header: {e}")))?;
    if &head[..4] != MAGIC {
        return Err(Error::Format("not a QGF1 snapshot".into()));
    }
    let version = u32::from_le_bytes(head[4..8].try_into().unwrap());
    if version != FORMAT_VERSION {
        return Err(Error::Format(format!("unsupported snapshot version {version}")));
    }
    let n = u32::from_le_bytes(head[8..12].try_into().unwrap()) as usize;
    let period = f64::from_le_bytes(head[12..20].try_into().unwrap());
    let grid = GridSpec::new(n, period)?;
    let mut body = Vec::new();
    r.read_to_end(&mut body)?;
    if body.len() != 8 * grid.len() {
        return Err(Error::Format(format!("snapshot body has {} bytes, expected {}", body.len(), 8 * grid.len())));
    }
    let samples = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    RealField::new(grid, samples)
}

pub fn snapshot_csv(f: &RealField) -> String {
    let g = f.grid();
    let mut out = format!("# format_version: {FORMAT_VERSION}\n# n: {}\n# period: {:?}\n", g.n(), g.period());
    for row in f.samples().chunks(g.n()) {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.17e}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn parse_snapshot_csv(s: &str) -> Result<RealField> {
    let mut n = None;
    let mut period = None;
    let mut version = None;
    let mut samples = Vec::new();
    for (lineno, line) in s.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(meta) = line.strip_prefix('#') {
            let Some((k, v)) = meta.split_once(':') else { continue };
            let v = v.trim();
            let bad = |_| Error::Format(format!("line {}: bad value '{v}'", lineno + 1));
            match k.trim() {
                "format_version" => version = Some(v.parse::<u32>().map_err(|e| bad(e.to_string()))?),
                "n" => n = Some(v.parse::<usize>().map_err(|e| bad(e.to_string()))?),
                "period" => period = Some(v.parse::<f64>().map_err(|e| bad(e.to_string()))?),
                _ => {}
            }
            continue;
        }
        for cell in line.split(',') {
            let v = cell.trim().parse::<f64>().map_err(|_| Error::Format(format!("line {}: bad sample '{cell}'", lineno + 1)))?;
            samples.push(v);
        }
    }
    if version != Some(FORMAT_VERSION) {
        return Err(Error::Format(format!("missing or unsupported format_version {version:?}")));
    }
    let n = n.ok_or_else(|| Error::Format("missing '# n:' header".into()))?;
    let grid = GridSpec::new(n, period.unwrap_or(std::f64::consts::TAU))?;
    if samples.len() != grid.len() {
        return Err(Error::Format(format!("{} samples for a {n}x{n} grid", samples.len())));
    }
    RealField::new(grid, samples)
}

/// Writes CSV for `*.csv` paths and binary otherwise.
pub fn save_field(path: &Path, f: &RealField) -> Result<()> {
    if path.extension().is_some_and(|e| e == "csv") {
        fs::write(path, snapshot_csv(f))?;
    } else {
        let mut file = std::io::BufWriter::new(fs::File::create(path)?);
        write_snapshot(&mut file, f)?;
        file.flush()?;
    }
    Ok(())
}

pub fn load_field(path: &Path) -> Result<RealField> {
    if path.extension().is_some_and(|e| e == "csv") {
        parse_snapshot_csv(&fs::read_to_string(path)?)
    } else {
        read_snapshot(fs::File::open(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_util::random_band_limited;

    #[test]
    fn binary_and_csv_round_trip_exactly() {
        let g = GridSpec::new(16, 3.5).unwrap();
        let f = random_band_limited(g, 5, 1).to_real();
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &f).unwrap();
        assert_eq!(buf.len(), 20 + 8 * 256);
        assert_eq!(&buf[..4], b"QGF1");
        assert_eq!(read_snapshot(&buf[..]).unwrap(), f);
        assert_eq!(parse_snapshot_csv(&snapshot_csv(&f)).unwrap(), f);

        let dir = tempfile::tempdir().unwrap();
        for name in ["a.bin", "a.csv"] {
            let p = dir.path().join(name);
            save_field(&p, &f).unwrap();
            assert_eq!(load_field(&p).unwrap(), f);
        }
    }

    #[test]
    fn malformed_snapshots_are_rejected() {
        assert!(read_snapshot(&b"QGF2\x01\0\0\0"[..]).is_err());
        let f = RealField::zeros(GridSpec::periodic(8).unwrap());
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &f).unwrap();
        assert!(read_snapshot(&buf[..buf.len() - 8]).is_err());
        let csv = snapshot_csv(&f);
        assert!(parse_snapshot_csv(&csv.replace("# format_version: 1\n", "")).is_err());
        assert!(parse_snapshot_csv(&csv.replacen("0.0", "x", 1)).is_err());
        assert!(parse_snapshot_csv(&format!("{csv}1.0\n")).is_err());
    }
}
