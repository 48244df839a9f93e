//! Trajectory files and report writing.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use fdelab_core::fde::Trajectory;

use crate::CliError;

/// Largest number of rows written without `--full-density`.
pub const MAX_ROWS: usize = 100_000;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Write `bytes` to a sibling temp file, then rename it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(io_err(dir))?;
        }
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = Path::new(&tmp);
    let mut f = fs::File::create(tmp).map_err(io_err(tmp))?;
    f.write_all(bytes).map_err(io_err(tmp))?;
    f.sync_all().map_err(io_err(tmp))?;
    drop(f);
    fs::rename(tmp, path).map_err(io_err(path))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Config(format!("serializing {}: {e}", path.display())))?;
    s.push('\n');
    write_atomic(path, s.as_bytes())
}

/// Stride that brings `len` knots to at most [`MAX_ROWS`] rows, counting the
/// forced last knot.
pub fn thin_stride(len: usize) -> usize {
    if len <= MAX_ROWS {
        1
    } else {
        len.div_ceil(MAX_ROWS - 1)
    }
}

/// `t,u,du` with 17 significant digits.
pub fn trajectory_csv(traj: Option<&Trajectory>) -> Vec<u8> {
    let mut out = String::from("t,u,du\n");
    if let Some(tr) = traj {
        for ((t, u), du) in tr.knots().iter().zip(tr.values()).zip(tr.derivatives()) {
            out.push_str(&format!("{t:.16e},{u:.16e},{du:.16e}\n"));
        }
    }
    out.into_bytes()
}

pub fn read_trajectory(path: &Path) -> Result<Trajectory, CliError> {
    let bad = |m: String| CliError::Config(format!("{}: {m}", path.display()));
    let mut rdr = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let headers = rdr.headers().map_err(|e| bad(e.to_string()))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["t", "u", "du"] {
        return Err(bad(format!("expected header t,u,du, found {}", headers.iter().collect::<Vec<_>>().join(","))));
    }
    let (mut t, mut u, mut du) = (Vec::new(), Vec::new(), Vec::new());
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let field = |k: usize| -> Result<f64, CliError> {
            rec.get(k)
                .ok_or_else(|| bad(format!("row {}: missing column {k}", line + 2)))?
                .trim()
                .parse::<f64>()
                .map_err(|e| bad(format!("row {}: {e}", line + 2)))
        };
        t.push(field(0)?);
        u.push(field(1)?);
        du.push(field(2)?);
    }
    Trajectory::from_samples(t, u, du).map_err(|e| bad(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stride_caps_rows() {
        assert_eq!(thin_stride(10), 1);
        assert_eq!(thin_stride(MAX_ROWS), 1);
        for len in [MAX_ROWS + 1, 180_001, 1_000_000, 3 * MAX_ROWS] {
            let s = thin_stride(len);
            let kept = len.div_ceil(s) + 1;
            assert!(kept <= MAX_ROWS, "{len} -> {kept}");
        }
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let t: Vec<f64> = (0..50).map(|k| -1.0 + k as f64 / 7.0).collect();
        let u: Vec<f64> = t.iter().map(|x| (x * 3.1).sin() / 3.0).collect();
        let du: Vec<f64> = t.iter().map(|x| 1e-300 * x).collect();
        let tr = Trajectory::from_samples(t, u, du).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.csv");
        write_atomic(&p, &trajectory_csv(Some(&tr))).unwrap();
        assert_eq!(read_trajectory(&p).unwrap(), tr);
    }

    #[test]
    fn empty_file_has_header_only() {
        assert_eq!(trajectory_csv(None), b"t,u,du\n");
    }
}
