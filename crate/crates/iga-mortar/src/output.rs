//! CSV and legacy VTK writers.
//!
//! Every file starts with `#` comment lines naming the tool version and the
//! full configuration. CSV bodies use `,` separators, `.` decimals and `\n`
//! line ends.

use std::fmt::Write as _;
use std::path::Path;

use iga_mortar_core::infsup::HistogramBin;
use iga_mortar_core::solve::{ErrorReport, PatchSamples};

use crate::error::{CliError, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const CONVERGENCE_HEADER: &str = "h,dofs,brokenH2,H1,L2,Linf";

/// Comment block: version line followed by `key=value` config pairs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Header {
    pub command: String,
    pub config: Vec<(String, String)>,
    pub notes: Vec<String>,
}

impl Header {
    pub fn new(command: &str) -> Self {
        Header {
            command: command.to_string(),
            ..Header::default()
        }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.config.push((key.to_string(), value.to_string()));
        self
    }

    pub fn note(&mut self, line: impl Into<String>) {
        self.notes.push(line.into());
    }

    pub fn render(&self) -> String {
        let mut s = format!("# iga-mortar {VERSION} {}\n", self.command);
        if !self.config.is_empty() {
            let pairs: Vec<String> = self.config.iter().map(|(k, v)| format!("{k}={v}")).collect();
            let _ = writeln!(s, "# {}", pairs.join(" "));
        }
        for n in &self.notes {
            let _ = writeln!(s, "# {n}");
        }
        s
    }
}

/// Shortest representation that parses back to the same `f64`.
pub fn num(x: f64) -> String {
    format!("{x:e}")
}

pub fn error_row(e: &ErrorReport) -> String {
    format!(
        "{},{},{},{},{},{}",
        num(e.h),
        e.dofs,
        num(e.broken_h2),
        num(e.h1),
        num(e.l2),
        num(e.linf)
    )
}

pub fn convergence_csv(header: &Header, rows: &[ErrorReport]) -> String {
    let mut s = header.render();
    s.push_str(CONVERGENCE_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&error_row(r));
        s.push('\n');
    }
    s
}

/// Observed convergence of one norm.
#[derive(Debug, Clone, PartialEq)]
pub struct RateRow {
    pub norm: &'static str,
    /// `log(e_k / e_{k+1}) / log(h_k / h_{k+1})` for consecutive levels.
    pub pairwise: Vec<f64>,
    /// Least-squares slope over the last three levels.
    pub slope: f64,
    pub reference: Option<f64>,
    pub flag: &'static str,
}

pub fn rates_csv(header: &Header, rows: &[RateRow]) -> String {
    let mut s = header.render();
    s.push_str("norm,pairwise,slope,reference,flag\n");
    for r in rows {
        let pairwise: Vec<String> = r.pairwise.iter().map(|v| format!("{v:.4}")).collect();
        let reference = r.reference.map(|v| format!("{v}")).unwrap_or_default();
        let _ = writeln!(
            s,
            "{},\"{}\",{:.4},{},{}",
            r.norm,
            pairwise.join(";"),
            r.slope,
            reference,
            r.flag
        );
    }
    s
}

pub fn sweep_csv(header: &Header, rows: &[(usize, f64)]) -> String {
    let mut s = header.render();
    s.push_str("degree,mu_min\n");
    for (d, mu) in rows {
        let _ = writeln!(s, "{d},{}", num(*mu));
    }
    s
}

pub fn histogram_csv(header: &Header, bins: &[HistogramBin]) -> String {
    let mut s = header.render();
    s.push_str("bin_left,bin_right,count\n");
    for b in bins {
        let _ = writeln!(s, "{},{},{}", num(b.left), num(b.right), b.count);
    }
    s
}

pub fn trials_csv(header: &Header, values: &[f64]) -> String {
    let mut s = header.render();
    s.push_str("trial,mu_min\n");
    for (t, v) in values.iter().enumerate() {
        let _ = writeln!(s, "{t},{}", num(*v));
    }
    s
}

pub fn field_csv(header: &Header, samples: &[PatchSamples]) -> String {
    let mut s = header.render();
    s.push_str("patch,x,y,uh,uex,diff\n");
    for p in samples {
        for q in &p.points {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                p.patch,
                num(q[0]),
                num(q[1]),
                num(q[2]),
                num(q[3]),
                num(q[2] - q[3])
            );
        }
    }
    s
}

type Scalar = fn(&[f64; 4]) -> f64;

/// Legacy ASCII structured grid with point scalars `uh`, `uex`, `diff`.
pub fn field_vtk(header: &Header, samples: &PatchSamples) -> String {
    let n = samples.points.len();
    let mut s = String::from("# vtk DataFile Version 3.0\n");
    // the title line must be a single line of at most 256 characters
    let mut title = format!("iga-mortar {VERSION} {} patch {}", header.command, samples.patch);
    for (k, v) in &header.config {
        let _ = write!(title, " {k}={v}");
    }
    title.truncate(255);
    s.push_str(&title);
    s.push_str("\nASCII\nDATASET STRUCTURED_GRID\n");
    let _ = writeln!(s, "DIMENSIONS {} {} 1", samples.nu, samples.nv);
    let _ = writeln!(s, "POINTS {n} double");
    for q in &samples.points {
        let _ = writeln!(s, "{} {} 0", num(q[0]), num(q[1]));
    }
    let _ = writeln!(s, "POINT_DATA {n}");
    let fields: [(&str, Scalar); 3] = [("uh", |q| q[2]), ("uex", |q| q[3]), ("diff", |q| q[2] - q[3])];
    for (name, f) in fields {
        let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
        for q in &samples.points {
            s.push_str(&num(f(q)));
            s.push('\n');
        }
    }
    s
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
    }
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn samples(patch: usize, nu: usize, nv: usize) -> PatchSamples {
        PatchSamples {
            patch,
            nu,
            nv,
            points: (0..nu * nv).map(|k| [k as f64, 0.5, 1.0, 0.25]).collect(),
        }
    }

    #[test]
    fn field_csv_has_one_row_per_sample() {
        let h = Header::new("solve").with("degree", 3);
        let text = field_csv(&h, &[samples(0, 3, 3), samples(1, 3, 3)]);
        let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(body[0], "patch,x,y,uh,uex,diff");
        assert_eq!(body.len(), 19);
        assert!(body[1].ends_with(",7.5e-1"));
    }

    #[test]
    fn vtk_layout() {
        let text = field_vtk(&Header::new("solve"), &samples(0, 3, 2));
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# vtk DataFile Version 3.0");
        assert_eq!(lines[2], "ASCII");
        assert_eq!(lines[3], "DATASET STRUCTURED_GRID");
        assert_eq!(lines[4], "DIMENSIONS 3 2 1");
        assert_eq!(lines[5], "POINTS 6 double");
        assert_eq!(lines.iter().filter(|l| l.starts_with("SCALARS")).count(), 3);
        // 5 preamble lines, 6 points, POINT_DATA, 3 × (2 + 6)
        assert_eq!(lines.len(), 5 + 1 + 6 + 1 + 3 * 8);
    }

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 1.0 / 3.0, 5.8890e-1, 1e-300, -2.5] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn header_lines_are_comments() {
        let mut h = Header::new("infsup").with("seed", 7).with("trials", 1000);
        h.note("extra");
        let r = h.render();
        assert!(r.lines().all(|l| l.starts_with("# ")));
        assert!(r.contains("seed=7 trials=1000"));
    }
}
