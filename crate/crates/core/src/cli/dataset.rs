//! Versioned CSV tables and the on-disk sensor log.
//!
//! Every file starts with a schema line `# se23nav-<kind> v1 key=value ...`
//! followed by a fixed column header. Floats are written in shortest
//! round-trip form, so write-then-read reproduces the values exactly.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::frames::make_world_frame;
use crate::harness::SensorLog;
use crate::lie::Rotation;
use crate::mech::{ImuSample, NavState};
use crate::sim::OdoSample;

pub const VERSION: &str = "v1";

/// Parsed schema line plus numeric rows of one table.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub meta: BTreeMap<String, String>,
    pub rows: Vec<Vec<f64>>,
    /// File line number of each row, for error messages.
    pub lines: Vec<usize>,
}

impl Table {
    pub fn meta_f64(&self, file: &str, key: &str) -> Result<f64> {
        self.meta
            .get(key)
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| Error::dataset(file, 1, format!("schema line lacks numeric `{key}`")))
    }
}

fn schema_line(kind: &str, meta: &[(&str, String)]) -> String {
    let mut s = format!("# se23nav-{kind} {VERSION}");
    for (k, v) in meta {
        let _ = write!(s, " {k}={v}");
    }
    s.push('\n');
    s
}

/// Writes a numeric table.
pub fn write_table<'a>(
    path: &Path,
    kind: &str,
    meta: &[(&str, String)],
    columns: &[&str],
    rows: impl IntoIterator<Item = &'a [f64]>,
) -> Result<()> {
    let mut out = schema_line(kind, meta);
    out.push_str(&columns.join(","));
    out.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), columns.len());
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            let _ = write!(out, "{v}");
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned())
}

/// Reads a table written by [`write_table`], checking the schema kind,
/// version and column header.
pub fn read_table(path: &Path, kind: &str, columns: &[&str]) -> Result<Table> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_table(&text, &file_name(path), kind, columns)
}

pub fn parse_table(text: &str, file: &str, kind: &str, columns: &[&str]) -> Result<Table> {
    let mut parts = text.splitn(3, '\n');
    let schema = parts.next().unwrap_or("");
    let mut tokens = schema.split_whitespace();
    let expected = format!("se23nav-{kind}");
    if tokens.next() != Some("#") || tokens.next() != Some(expected.as_str()) {
        return Err(Error::dataset(file, 1, format!("missing `# {expected}` schema line")));
    }
    if tokens.next() != Some(VERSION) {
        return Err(Error::dataset(file, 1, format!("unsupported schema version, expected {VERSION}")));
    }
    let meta = tokens
        .filter_map(|t| t.split_once('='))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect();

    let header = parts.next().unwrap_or("").trim_end_matches('\r');
    let body = parts.next().unwrap_or("");
    let got: Vec<&str> = header.split(',').map(str::trim).collect();
    if got != columns {
        return Err(Error::dataset(
            file,
            2,
            format!("expected columns `{}`, found `{header}`", columns.join(",")),
        ));
    }

    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(body.as_bytes());
    let mut rows = Vec::new();
    let mut line_nos = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 3;
        let rec = rec.map_err(|e| Error::dataset(file, line, e.to_string()))?;
        if rec.len() != columns.len() {
            return Err(Error::dataset(file, line, format!("expected {} fields, found {}", columns.len(), rec.len())));
        }
        let row = rec
            .iter()
            .map(|f| f.parse::<f64>().map_err(|_| Error::dataset(file, line, format!("`{f}` is not a number"))))
            .collect::<Result<Vec<_>>>()?;
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::dataset(file, line, "non-finite value"));
        }
        rows.push(row);
        line_nos.push(line);
    }
    Ok(Table {
        meta,
        rows,
        lines: line_nos,
    })
}

/// Checks strictly increasing timestamps in column 0 and, when `rate` is
/// given, that the median step matches it within 1 %.
pub fn check_timestamps(table: &Table, file: &str, rate: Option<f64>) -> Result<()> {
    for k in 1..table.rows.len() {
        if !(table.rows[k][0] > table.rows[k - 1][0]) {
            return Err(Error::dataset(
                file,
                table.lines[k],
                format!("timestamp {} does not increase past {}", table.rows[k][0], table.rows[k - 1][0]),
            ));
        }
    }
    if let (Some(rate), true) = (rate, table.rows.len() >= 2) {
        let mut steps: Vec<f64> = table.rows.windows(2).map(|w| w[1][0] - w[0][0]).collect();
        steps.sort_by(f64::total_cmp);
        let median = steps[steps.len() / 2];
        if ((median * rate) - 1.0).abs() > 0.01 {
            return Err(Error::dataset(
                file,
                1,
                format!("declared rate {rate} Hz disagrees with median step {median} s"),
            ));
        }
    }
    Ok(())
}

/// How the IMU file stores its samples.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ImuColumns {
    /// Angle and velocity increments over each sample interval.
    Increment,
    /// Angular rate and specific force, converted with the local timestep.
    Rate,
}

pub const IMU_INCREMENT_COLUMNS: [&str; 7] = ["t", "dtheta_x", "dtheta_y", "dtheta_z", "dvel_x", "dvel_y", "dvel_z"];
pub const IMU_RATE_COLUMNS: [&str; 7] = ["t", "omega_x", "omega_y", "omega_z", "f_x", "f_y", "f_z"];
pub const ODO_COLUMNS: [&str; 2] = ["t", "v_d"];
pub const STATE_COLUMNS: [&str; 16] = [
    "t", "c11", "c12", "c13", "c21", "c22", "c23", "c31", "c32", "c33", "v_x", "v_y", "v_z", "r_x", "r_y", "r_z",
];
pub const INIT_COLUMNS: [&str; 19] = [
    "origin_lat", "origin_lon", "origin_height", "t", "c11", "c12", "c13", "c21", "c22", "c23", "c31", "c32",
    "c33", "v_x", "v_y", "v_z", "r_x", "r_y", "r_z",
];

/// Sensor log with its declared rates and optional truth.
#[derive(Clone, Debug, PartialEq)]
pub struct DatasetLog {
    pub log: SensorLog,
    pub imu_rate: f64,
    pub odo_rate: f64,
    /// World-frame truth states, typically at the odometer epochs.
    pub truth: Option<Vec<NavState>>,
}

impl DatasetLog {
    /// Truth state stamped `t`, if present.
    pub fn truth_at(&self, t: f64) -> Option<NavState> {
        let truth = self.truth.as_ref()?;
        let i = truth.partition_point(|s| s.t < t - 1e-9);
        truth.get(i).filter(|s| (s.t - t).abs() <= 1e-9).copied()
    }
}

fn state_row(s: &NavState) -> Vec<f64> {
    let c = s.c_bw.matrix();
    let mut row = vec![s.t];
    for i in 0..3 {
        for j in 0..3 {
            row.push(c[(i, j)]);
        }
    }
    row.extend(s.v_wb_w.iter());
    row.extend(s.r_wb_w.iter());
    row
}

fn state_from(row: &[f64]) -> NavState {
    let c = Matrix3::from_row_slice(&row[1..10]);
    NavState::new(
        Rotation::from_matrix_unchecked(c),
        Vector3::new(row[10], row[11], row[12]),
        Vector3::new(row[13], row[14], row[15]),
        row[0],
    )
}

pub struct DatasetPaths {
    pub imu: PathBuf,
    pub odo: PathBuf,
    pub init: PathBuf,
    pub truth: PathBuf,
}

impl DatasetPaths {
    pub fn new(dir: &Path) -> Self {
        DatasetPaths {
            imu: dir.join("imu.csv"),
            odo: dir.join("odo.csv"),
            init: dir.join("init.csv"),
            truth: dir.join("truth.csv"),
        }
    }
}

/// Writes `imu.csv`, `odo.csv`, `init.csv` and, with truth, `truth.csv`.
pub fn write_dataset(dir: &Path, data: &DatasetLog) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let p = DatasetPaths::new(dir);
    let imu: Vec<[f64; 7]> = data
        .log
        .imu
        .iter()
        .map(|s| [s.t, s.dtheta.x, s.dtheta.y, s.dtheta.z, s.dvel.x, s.dvel.y, s.dvel.z])
        .collect();
    write_table(
        &p.imu,
        "imu",
        &[
            ("kind", "increment".into()),
            ("rate_hz", data.imu_rate.to_string()),
            ("units", "s,rad,rad,rad,m/s,m/s,m/s".into()),
        ],
        &IMU_INCREMENT_COLUMNS,
        imu.iter().map(|r| r.as_slice()),
    )?;
    let odo: Vec<[f64; 2]> = data.log.odo.iter().map(|o| [o.t, o.v_d]).collect();
    write_table(
        &p.odo,
        "odo",
        &[("rate_hz", data.odo_rate.to_string()), ("units", "s,m/s".into())],
        &ODO_COLUMNS,
        odo.iter().map(|r| r.as_slice()),
    )?;
    let o = &data.log.frame.origin;
    let mut init = vec![o.lat, o.lon, o.height];
    init.extend(state_row(&data.log.init));
    write_table(
        &p.init,
        "init",
        &[("units", "rad,rad,m,s,dcm_body_to_world,m/s,m".into())],
        &INIT_COLUMNS,
        [init.as_slice()],
    )?;
    match &data.truth {
        Some(truth) => {
            let rows: Vec<Vec<f64>> = truth.iter().map(state_row).collect();
            write_table(
                &p.truth,
                "truth",
                &[("units", "s,dcm_body_to_world,m/s,m".into())],
                &STATE_COLUMNS,
                rows.iter().map(Vec::as_slice),
            )
        }
        None => match fs::remove_file(&p.truth) {
            Err(e) if e.kind() != std::io::ErrorKind::NotFound => Err(Error::io(&p.truth, e)),
            _ => Ok(()),
        },
    }
}

/// Reads a dataset directory, validating schemas, timestamps and rates.
pub fn read_dataset(dir: &Path) -> Result<DatasetLog> {
    let p = DatasetPaths::new(dir);

    let init = read_table(&p.init, "init", &INIT_COLUMNS)?;
    let row = match init.rows.as_slice() {
        [row] => row,
        _ => return Err(Error::dataset("init.csv", 3, "expected exactly one row")),
    };
    let frame = make_world_frame(row[0], row[1], row[2])
        .map_err(|e| Error::dataset("init.csv", 3, e.to_string()))?;
    let init_state = state_from(&row[3..]);

    let imu_text = fs::read_to_string(&p.imu).map_err(|e| Error::io(&p.imu, e))?;
    let kind = if imu_text.lines().next().is_some_and(|l| l.contains("kind=rate")) {
        ImuColumns::Rate
    } else {
        ImuColumns::Increment
    };
    let cols = match kind {
        ImuColumns::Increment => IMU_INCREMENT_COLUMNS,
        ImuColumns::Rate => IMU_RATE_COLUMNS,
    };
    let imu_t = parse_table(&imu_text, "imu.csv", "imu", &cols)?;
    drop(imu_text);
    let imu_rate = imu_t.meta_f64("imu.csv", "rate_hz")?;
    check_timestamps(&imu_t, "imu.csv", Some(imu_rate))?;
    if imu_t.rows.first().is_some_and(|r| r[0] <= init_state.t) {
        return Err(Error::dataset("imu.csv", 3, "first sample does not follow the initial state time"));
    }
    let mut prev_t = init_state.t;
    let imu = imu_t
        .rows
        .iter()
        .map(|r| {
            let scale = match kind {
                ImuColumns::Increment => 1.0,
                ImuColumns::Rate => r[0] - prev_t,
            };
            prev_t = r[0];
            ImuSample {
                t: r[0],
                dtheta: Vector3::new(r[1], r[2], r[3]) * scale,
                dvel: Vector3::new(r[4], r[5], r[6]) * scale,
            }
        })
        .collect();

    let odo_t = read_table(&p.odo, "odo", &ODO_COLUMNS)?;
    let odo_rate = odo_t.meta_f64("odo.csv", "rate_hz")?;
    check_timestamps(&odo_t, "odo.csv", Some(odo_rate))?;
    let odo = odo_t.rows.iter().map(|r| OdoSample { t: r[0], v_d: r[1] }).collect();

    let truth = if p.truth.exists() {
        let t = read_table(&p.truth, "truth", &STATE_COLUMNS)?;
        check_timestamps(&t, "truth.csv", None)?;
        Some(t.rows.iter().map(|r| state_from(r)).collect())
    } else {
        None
    };

    Ok(DatasetLog {
        log: SensorLog {
            frame,
            init: init_state,
            imu,
            odo,
        },
        imu_rate,
        odo_rate,
        truth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmp(name: &str) -> PathBuf {
        let d = std::env::temp_dir().join(format!("se23nav-ds-{name}-{}", std::process::id()));
        let _ = fs::remove_dir_all(&d);
        fs::create_dir_all(&d).unwrap();
        d
    }

    fn sample_log() -> DatasetLog {
        let frame = make_world_frame(0.49, 1.97, 50.0).unwrap();
        let init = NavState::new(
            crate::lie::so3_exp(&Vector3::new(0.01, -0.02, 0.7)),
            Vector3::new(0.1, 0.2, 0.0),
            Vector3::new(1.0 / 3.0, 0.0, -2.5),
            0.0,
        );
        let imu = (1..=400)
            .map(|i| ImuSample {
                t: i as f64 / 200.0,
                dtheta: Vector3::new(1e-7 * i as f64, -3.3e-9, 0.1 / 7.0),
                dvel: Vector3::new(0.0, 1e-3, 0.049 + 1e-17 * i as f64),
            })
            .collect();
        let odo = vec![OdoSample { t: 1.0, v_d: 0.1 }, OdoSample { t: 2.0, v_d: 2.0 / 3.0 }];
        DatasetLog {
            log: SensorLog { frame, init, imu, odo },
            imu_rate: 200.0,
            odo_rate: 1.0,
            truth: Some(vec![init]),
        }
    }

    #[test]
    fn write_then_read_is_identity() {
        let dir = tmp("rt");
        let data = sample_log();
        write_dataset(&dir, &data).unwrap();
        let back = read_dataset(&dir).unwrap();
        assert_eq!(back, data);
        let _ = fs::remove_dir_all(dir);
    }

    #[test]
    fn duplicated_timestamp_names_the_row() {
        let dir = tmp("dup");
        let mut data = sample_log();
        data.log.imu[10].t = data.log.imu[9].t;
        write_dataset(&dir, &data).unwrap();
        match read_dataset(&dir) {
            Err(Error::Dataset { file, row, .. }) => {
                assert_eq!(file, "imu.csv");
                assert_eq!(row, 13);
            }
            other => panic!("{other:?}"),
        }
        let _ = fs::remove_dir_all(dir);
    }

    #[test]
    fn rate_columns_are_converted_to_increments() {
        let text = "# se23nav-imu v1 kind=rate rate_hz=100\nt,omega_x,omega_y,omega_z,f_x,f_y,f_z\n0.01,1,2,3,4,5,6\n0.02,1,2,3,4,5,6\n";
        let dir = tmp("rate");
        let data = sample_log();
        write_dataset(&dir, &data).unwrap();
        fs::write(dir.join("imu.csv"), text).unwrap();
        let back = read_dataset(&dir).unwrap();
        assert_eq!(back.log.imu.len(), 2);
        assert!((back.log.imu[0].dtheta - Vector3::new(0.01, 0.02, 0.03)).amax() < 1e-15);
        assert!((back.log.imu[1].dvel - Vector3::new(0.04, 0.05, 0.06)).amax() < 1e-15);
        let _ = fs::remove_dir_all(dir);
    }

    #[test]
    fn schema_problems_are_dataset_errors() {
        let cols = ["t", "v_d"];
        let bad_kind = parse_table("# se23nav-imu v1\nt,v_d\n", "odo.csv", "odo", &cols);
        assert!(matches!(bad_kind, Err(Error::Dataset { row: 1, .. })));
        let bad_version = parse_table("# se23nav-odo v9\nt,v_d\n", "odo.csv", "odo", &cols);
        assert!(bad_version.is_err());
        let bad_cols = parse_table("# se23nav-odo v1\nt,speed\n", "odo.csv", "odo", &cols);
        assert!(matches!(bad_cols, Err(Error::Dataset { row: 2, .. })));
        let bad_num = parse_table("# se23nav-odo v1\nt,v_d\n1,abc\n", "odo.csv", "odo", &cols);
        assert!(matches!(bad_num, Err(Error::Dataset { row: 3, .. })));
        assert_eq!(bad_num.unwrap_err().exit_code(), 3);
    }

    #[test]
    fn declared_rate_must_match_the_data() {
        let t = parse_table("# se23nav-odo v1 rate_hz=2\nt,v_d\n1,0\n2,0\n3,0\n", "odo.csv", "odo", &ODO_COLUMNS).unwrap();
        assert!(check_timestamps(&t, "odo.csv", Some(2.0)).is_err());
        assert!(check_timestamps(&t, "odo.csv", Some(1.005)).is_ok());
    }
}
