use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::Format;
use crate::error::{LabError, LabResult};

/// Render `rows` as CSV (header from the row type, fixed column order) or
/// the whole `report` as pretty JSON.
pub fn render<R: Serialize, T: Serialize>(rows: &[R], report: &T, format: Format) -> LabResult<String> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in rows {
                w.serialize(r)?;
            }
            let bytes = w.into_inner().map_err(|e| LabError::Config(e.to_string()))?;
            Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
        }
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report)?;
            s.push('\n');
            Ok(s)
        }
    }
}

/// Write to `out`, or stdout when absent.
pub fn emit(text: &str, out: Option<&Path>) -> LabResult<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|source| LabError::Io {
            path: path.to_path_buf(),
            source,
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(|source| LabError::Io {
                path: PathBuf::from("<stdout>"),
                source,
            })
        }
    }
}

/// Gnuplot script plotting column `y` against column `x` of a CSV table,
/// one point cloud per value of column `group`.
pub fn gnuplot_script(csv: &Path, x: &str, y: &str, group: &str, columns: &[&str]) -> String {
    let col = |name: &str| columns.iter().position(|c| *c == name).map_or(1, |i| i + 1);
    let data = csv
        .file_name()
        .map_or_else(|| csv.display().to_string(), |f| f.to_string_lossy().into_owned());
    let png = Path::new(&data).with_extension("png");
    format!(
        "set datafile separator ','\n\
         set key autotitle columnhead outside\n\
         set logscale x\n\
         set xlabel '{x}'\n\
         set ylabel '{y}'\n\
         set terminal pngcairo size 1000,700\n\
         set output '{png}'\n\
         groups = system(\"tail -n +2 {data} | cut -d, -f{g} | sort -u\")\n\
         plot for [k in groups] '{data}' using (strcol({g}) eq k ? ${xc} : 1/0):{yc} with points title k\n",
        png = png.display(),
        g = col(group),
        xc = col(x),
        yc = col(y),
    )
}

/// Path of the companion script for `out`: same stem, `.gp` extension.
pub fn script_path(out: &Path) -> PathBuf {
    out.with_extension("gp")
}
