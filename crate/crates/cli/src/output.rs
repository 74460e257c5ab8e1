use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use nwbound::simulation::BiasReport;

/// Fixed 17-significant-digit scientific notation; empty for missing values.
pub fn format_number(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_finite() => format!("{x:.16e}"),
        _ => String::new(),
    }
}

pub fn header(dim: usize) -> Vec<String> {
    let mut h: Vec<String> = if dim == 1 {
        vec!["x".into()]
    } else {
        (1..=dim).map(|k| format!("x{k}")).collect()
    };
    h.extend(
        [
            "m_true",
            "m_hat_mean",
            "empirical_bias",
            "standard_error",
            "bound_theorem1",
            "bound_theorem2",
            "rosenblatt",
            "density",
        ]
        .map(String::from),
    );
    h
}

pub fn render_csv(report: &BiasReport, dim: usize) -> io::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header(dim))?;
    for p in &report.points {
        let mut row: Vec<String> = p.x.iter().map(|&v| format_number(Some(v))).collect();
        row.extend(
            [
                Some(p.m_true),
                Some(p.m_hat_mean),
                Some(p.empirical_bias),
                Some(p.standard_error),
                p.bound_theorem1,
                p.bound_theorem2,
                p.rosenblatt,
                Some(p.density),
            ]
            .map(format_number),
        );
        w.write_record(&row)?;
    }
    w.into_inner().map_err(|e| e.into_error())
}

/// Three stacked panels per bandwidth: function and estimate, bias against
/// the bounds, and the design density.
pub fn render_gnuplot(name: &str, csvs: &[(String, String)]) -> String {
    let mut s = String::new();
    s.push_str("# gnuplot script; run from the output directory with `gnuplot ");
    s.push_str(name);
    s.push_str(".gp`\n");
    s.push_str("set datafile separator ','\nset terminal pngcairo size 640,900\n");
    for (file, label) in csvs {
        let png = file.trim_end_matches(".csv");
        s.push_str(&format!(
            r#"
set output '{png}.png'
set multiplot layout 3,1 title '{name}, {label}'
set key top right
plot '{file}' using 'x':'m_true' with lines lt 1 title 'm(x)', \
     '' using 'x':'m_hat_mean' with lines dt 4 title 'NW estimate'
plot '{file}' using 'x':(abs(column('empirical_bias'))) with lines lt 1 title '|bias|', \
     '' using 'x':'bound_theorem1' with lines dt 2 title 'bound, bounded m', \
     '' using 'x':'bound_theorem2' with lines dt 3 title 'bound, unbounded m', \
     '' using 'x':'rosenblatt' with lines dt 4 title 'Rosenblatt'
plot '{file}' using 'x':'density' with lines lt 3 title 'design density'
unset multiplot
"#
        ));
    }
    s
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub name: String,
    pub artifact_version: &'static str,
    pub seed: u64,
    pub started_unix_seconds: u64,
    pub wall_clock_seconds: f64,
    pub threads: usize,
    pub outputs: Vec<String>,
    /// The merged configuration, overrides and seed included.
    pub config: String,
}

/// Files written during one run, removed again unless the run commits.
pub struct Staging {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Staging {
    pub fn new(dir: &Path) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    /// Writes through a temporary file and a rename.
    pub fn write(&mut self, file: &str, bytes: &[u8]) -> io::Result<PathBuf> {
        let target = self.dir.join(file);
        let tmp = self.dir.join(format!(".{file}.tmp"));
        let result = (|| {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(bytes)?;
            f.sync_all()?;
            fs::rename(&tmp, &target)
        })();
        if let Err(e) = result {
            let _ = fs::remove_file(&tmp);
            return Err(e);
        }
        self.written.push(target.clone());
        Ok(target)
    }

    pub fn commit(mut self) {
        self.written.clear();
    }
}

impl Drop for Staging {
    fn drop(&mut self) {
        for p in &self.written {
            let _ = fs::remove_file(p);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_keep_17_digits() {
        assert_eq!(format_number(Some(0.1)), "1.0000000000000001e-1");
        assert_eq!(format_number(Some(-2.0)), "-2.0000000000000000e0");
        assert_eq!(format_number(None), "");
        assert_eq!(format_number(Some(f64::NAN)), "");
        let v = 1.0 / 3.0;
        assert_eq!(format_number(Some(v)).parse::<f64>().unwrap(), v);
    }

    #[test]
    fn header_names_coordinates() {
        assert_eq!(header(1)[0], "x");
        assert_eq!(&header(2)[..3], &["x1", "x2", "m_true"]);
        assert_eq!(header(1).len(), 9);
    }

    #[test]
    fn staging_removes_uncommitted_files() {
        let dir = std::env::temp_dir().join(format!("nwbound-staging-{}", std::process::id()));
        let p = {
            let mut s = Staging::new(&dir).unwrap();
            s.write("a.csv", b"x\n").unwrap()
        };
        assert!(!p.exists());
        let mut s = Staging::new(&dir).unwrap();
        let p = s.write("b.csv", b"x\n").unwrap();
        s.commit();
        assert!(p.exists());
        fs::remove_dir_all(&dir).unwrap();
    }
}
