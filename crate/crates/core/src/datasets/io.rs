//! CSV ingestion and export.
//!
//! Station files are long format, header `site_id,x,y,t,value`. Point files
//! use `x,y,t,value` (space-time) or `x,y,z,value` (full 3-d). Lattice files
//! use `x,y,t,value` with integer coordinates.

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;

use super::{LatticeDataset, MarkedPoint, PointDataset, PointMode, RegionSpec, StationDataset};
use crate::error::{Error, Result};

const STATION_HEADER: [&str; 5] = ["site_id", "x", "y", "t", "value"];

fn reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    Ok(csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)?)
}

fn check_header(rdr: &mut csv::Reader<std::fs::File>, path: &Path, want: &[&str]) -> Result<()> {
    let got: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if got != want {
        return Err(Error::MalformedRow {
            path: path.to_path_buf(),
            line: 1,
            msg: format!("expected header {}, got {}", want.join(","), got.join(",")),
        });
    }
    Ok(())
}

fn field<T: std::str::FromStr>(
    rec: &csv::StringRecord,
    i: usize,
    path: &Path,
    line: usize,
) -> Result<T> {
    let raw = rec.get(i).ok_or_else(|| Error::MalformedRow {
        path: path.to_path_buf(),
        line,
        msg: format!("missing column {}", i + 1),
    })?;
    raw.parse().map_err(|_| Error::MalformedRow {
        path: path.to_path_buf(),
        line,
        msg: format!("cannot parse '{raw}'"),
    })
}

fn finite(v: f64, path: &Path, line: usize) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite {
            value: v,
            at: format!("{}:{line}", path.display()),
        })
    }
}

/// Load a station dataset. Sites are ordered by first appearance and every
/// (site, t) cell for `t ∈ 1..=n` must be present exactly once.
pub fn load_station_csv(path: impl AsRef<Path>) -> Result<StationDataset> {
    let path = path.as_ref();
    let mut rdr = reader(path)?;
    check_header(&mut rdr, path, &STATION_HEADER)?;

    let mut ids: Vec<String> = Vec::new();
    let mut coords: Vec<[f64; 2]> = Vec::new();
    let mut site_index: HashMap<String, usize> = HashMap::new();
    let mut cells: HashMap<(usize, i64), f64> = HashMap::new();
    let (mut t_min, mut t_max) = (i64::MAX, i64::MIN);

    for (row, rec) in rdr.records().enumerate() {
        let line = row + 2;
        let rec = rec?;
        if rec.len() != 5 {
            return Err(Error::MalformedRow {
                path: path.to_path_buf(),
                line,
                msg: format!("expected 5 fields, got {}", rec.len()),
            });
        }
        let id = rec[0].to_string();
        let x: f64 = finite(field(&rec, 1, path, line)?, path, line)?;
        let y: f64 = finite(field(&rec, 2, path, line)?, path, line)?;
        let t: i64 = field(&rec, 3, path, line)?;
        let v: f64 = finite(field(&rec, 4, path, line)?, path, line)?;

        let k = match site_index.get(&id) {
            Some(&k) => {
                if coords[k] != [x, y] {
                    return Err(Error::MalformedRow {
                        path: path.to_path_buf(),
                        line,
                        msg: format!("site '{id}' moved from {:?} to {:?}", coords[k], [x, y]),
                    });
                }
                k
            }
            None => {
                site_index.insert(id.clone(), ids.len());
                ids.push(id.clone());
                coords.push([x, y]);
                ids.len() - 1
            }
        };
        if cells.insert((k, t), v).is_some() {
            return Err(Error::DuplicateCell { site: id, t });
        }
        t_min = t_min.min(t);
        t_max = t_max.max(t);
    }

    if cells.is_empty() {
        return StationDataset::new(ids, coords, DMatrix::zeros(0, 0));
    }
    if t_min != 1 {
        return Err(Error::NonContiguousTime(format!("first time is {t_min}, expected 1")));
    }
    let n = t_max as usize;
    let mut values = DMatrix::zeros(ids.len(), n);
    for k in 0..ids.len() {
        for t in 1..=n {
            match cells.get(&(k, t as i64)) {
                Some(&v) => values[(k, t - 1)] = v,
                None => {
                    return Err(Error::NonContiguousTime(format!(
                        "site '{}' has no value at t = {t}",
                        ids[k]
                    )))
                }
            }
        }
    }
    StationDataset::new(ids, coords, values)
}

/// Write a station dataset in long format, site-major then time.
pub fn save_station_csv(data: &StationDataset, path: impl AsRef<Path>) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "{}", STATION_HEADER.join(","))?;
    for (k, (id, s)) in data.site_ids().iter().zip(data.sites()).enumerate() {
        for t in 1..=data.n_times() {
            writeln!(out, "{id},{},{},{t},{}", s[0], s[1], data.value(k, t))?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Load marked points and validate them against `region`. Row order is kept.
pub fn load_point_csv(
    path: impl AsRef<Path>,
    mode: PointMode,
    region: RegionSpec,
) -> Result<PointDataset> {
    let path = path.as_ref();
    let mut rdr = reader(path)?;
    let header: &[&str] = match mode {
        PointMode::SpaceTime => &["x", "y", "t", "value"],
        PointMode::Full3d => &["x", "y", "z", "value"],
    };
    check_header(&mut rdr, path, header)?;

    let mut points = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let line = row + 2;
        let rec = rec?;
        if rec.len() != 4 {
            return Err(Error::MalformedRow {
                path: path.to_path_buf(),
                line,
                msg: format!("expected 4 fields, got {}", rec.len()),
            });
        }
        let x: f64 = finite(field(&rec, 0, path, line)?, path, line)?;
        let y: f64 = finite(field(&rec, 1, path, line)?, path, line)?;
        let third: f64 = match mode {
            PointMode::SpaceTime => field::<i64>(&rec, 2, path, line)? as f64,
            PointMode::Full3d => finite(field(&rec, 2, path, line)?, path, line)?,
        };
        let value: f64 = finite(field(&rec, 3, path, line)?, path, line)?;
        points.push(MarkedPoint {
            loc: [x, y, third],
            value,
        });
    }
    PointDataset::new(mode, points, region)
}

pub fn save_point_csv(data: &PointDataset, path: impl AsRef<Path>) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    match data.mode() {
        PointMode::SpaceTime => {
            writeln!(out, "x,y,t,value")?;
            for p in data.points() {
                writeln!(out, "{},{},{},{}", p.loc[0], p.loc[1], p.time(), p.value)?;
            }
        }
        PointMode::Full3d => {
            writeln!(out, "x,y,z,value")?;
            for p in data.points() {
                writeln!(out, "{},{},{},{}", p.loc[0], p.loc[1], p.loc[2], p.value)?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

pub fn load_lattice_csv(path: impl AsRef<Path>) -> Result<LatticeDataset> {
    let path = path.as_ref();
    let mut rdr = reader(path)?;
    check_header(&mut rdr, path, &["x", "y", "t", "value"])?;
    let mut points = Vec::new();
    let mut values = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let line = row + 2;
        let rec = rec?;
        if rec.len() != 4 {
            return Err(Error::MalformedRow {
                path: path.to_path_buf(),
                line,
                msg: format!("expected 4 fields, got {}", rec.len()),
            });
        }
        points.push([
            field(&rec, 0, path, line)?,
            field(&rec, 1, path, line)?,
            field(&rec, 2, path, line)?,
        ]);
        values.push(finite(field(&rec, 3, path, line)?, path, line)?);
    }
    LatticeDataset::new(points, values)
}

pub fn save_lattice_csv(data: &LatticeDataset, path: impl AsRef<Path>) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "x,y,t,value")?;
    for (p, v) in data.points().iter().zip(data.values()) {
        writeln!(out, "{},{},{},{v}", p[0], p[1], p[2])?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn write(dir: &tempfile::TempDir, name: &str, body: &str) -> std::path::PathBuf {
        let p = dir.path().join(name);
        fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn station_two_sites_three_times() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            &dir,
            "s.csv",
            "site_id,x,y,t,value\na,0,0,1,1\na,0,0,2,2\na,0,0,3,3\nb,1,0,1,4\nb,1,0,2,5\nb,1,0,3,6\n",
        );
        let d = load_station_csv(&p).unwrap();
        assert_eq!(d.n_sites(), 2);
        assert_eq!(d.n_times(), 3);
        assert_eq!(d.site_ids(), &["a".to_string(), "b".to_string()]);
        assert_eq!(d.value(1, 2), 5.0);
    }

    #[test]
    fn station_errors() {
        let dir = tempfile::tempdir().unwrap();
        let dup = write(&dir, "d.csv", "site_id,x,y,t,value\n1,0,0,1,1\n1,0,0,2,2\n1,0,0,2,3\n");
        assert!(matches!(
            load_station_csv(&dup),
            Err(Error::DuplicateCell { t: 2, .. })
        ));
        let gap = write(&dir, "g.csv", "site_id,x,y,t,value\n1,0,0,1,1\n1,0,0,3,2\n");
        assert!(matches!(load_station_csv(&gap), Err(Error::NonContiguousTime(_))));
        let nan = write(&dir, "n.csv", "site_id,x,y,t,value\n1,0,0,1,NaN\n");
        assert!(matches!(load_station_csv(&nan), Err(Error::NonFinite { .. })));
        let bad = write(&dir, "b.csv", "site_id,x,y,t,value\n1,0,zero,1,1\n");
        assert!(matches!(load_station_csv(&bad), Err(Error::MalformedRow { .. })));
        let hdr = write(&dir, "h.csv", "id,x,y,t,value\n");
        assert!(matches!(load_station_csv(&hdr), Err(Error::MalformedRow { line: 1, .. })));
    }

    #[test]
    fn point_empty_and_corner() {
        let dir = tempfile::tempdir().unwrap();
        let region = RegionSpec::square(2.0, 1).unwrap();
        let empty = write(&dir, "e.csv", "x,y,t,value\n");
        let d = load_point_csv(&empty, PointMode::SpaceTime, region.clone()).unwrap();
        assert!(d.is_empty());
        let corner = write(&dir, "c.csv", "x,y,t,value\n2,2,1,0.5\n");
        assert_eq!(
            load_point_csv(&corner, PointMode::SpaceTime, region.clone()).unwrap().len(),
            1
        );
        let outside = write(&dir, "o.csv", "x,y,t,value\n2.5,1,1,0.5\n");
        assert!(matches!(
            load_point_csv(&outside, PointMode::SpaceTime, region),
            Err(Error::OutsideRegion { .. })
        ));
    }

    #[test]
    fn lattice_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let d = LatticeDataset::full_box(3, 2, 4, |p| (p[0] * 7 - p[1] + p[2]) as f64 * 0.1);
        let p = dir.path().join("l.csv");
        save_lattice_csv(&d, &p).unwrap();
        assert_eq!(load_lattice_csv(&p).unwrap(), d);
    }
}
