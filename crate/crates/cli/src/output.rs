//! Rendering of reports into CSV files and an optional gnuplot script.

use crate::run::Report;
use std::path::{Path, PathBuf};

pub fn samples_csv(report: &Report) -> String {
    let mut out = String::from("parameter,value,diagnostics\n");
    for row in &report.rows {
        out.push_str(&format!(
            "{:e},{:e},{}\n",
            row.parameter,
            row.value,
            row.diagnostics.replace(',', ";")
        ));
    }
    out
}

pub fn fit_csv(report: &Report) -> Option<String> {
    let f = report.fit.as_ref()?;
    Some(format!(
        "slope,intercept,r_squared,expected_slope,pass\n{:e},{:e},{:e},{:e},{}\n",
        f.fit.slope, f.fit.intercept, f.fit.r_squared, f.expected, f.pass
    ))
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

pub fn gnuplot(report: &Report, prefix: &Path) -> String {
    let base = file_name(prefix);
    let mut gp = String::from("set datafile separator ','\nset key top left\nset grid\n");
    if let Some((suffix, _)) = report.extra.iter().find(|(s, _)| *s == "_material.csv") {
        gp.push_str("set xlabel 'r'\nset ylabel 'coefficient'\nset logscale y\n");
        gp.push_str(&format!(
            "plot '{base}{suffix}' using 1:2 skip 1 with lines title 'sigma_rad', \\\n     '' using 1:3 skip 1 with lines title 'sigma_tan', \\\n     '' using 1:4 skip 1 with lines title 'q_re'\n"
        ));
        return gp;
    }
    let log_x = report.parameter != "n" && report.parameter != "delta";
    gp.push_str(if log_x {
        "set logscale xy\n"
    } else {
        "set logscale y\n"
    });
    gp.push_str(&format!(
        "set xlabel '{}'\nset ylabel '{}'\n",
        report.parameter, report.quantity
    ));
    let data = format!(
        "'{base}_samples.csv' using 1:2 skip 1 with linespoints pt 7 title '{}'",
        report.quantity
    );
    match &report.fit {
        Some(f) => gp.push_str(&format!(
            "fit_line(x) = 10**({:e}) * x**({:e})\nplot {data}, \\\n     fit_line(x) with lines dt 2 title sprintf('slope %.3f', {:e})\n",
            f.fit.intercept, f.fit.slope, f.fit.slope
        )),
        None => gp.push_str(&format!("plot {data}\n")),
    }
    gp
}

/// Every file the report produces, keyed by full path.
pub fn files(report: &Report, prefix: &Path, emit_plot: bool) -> Vec<(PathBuf, String)> {
    let with = |suffix: &str| {
        let mut s = prefix.as_os_str().to_owned();
        s.push(suffix);
        PathBuf::from(s)
    };
    let mut out = Vec::new();
    if !report.rows.is_empty() {
        out.push((with("_samples.csv"), samples_csv(report)));
    }
    if let Some(fit) = fit_csv(report) {
        out.push((with("_fit.csv"), fit));
    }
    for (suffix, contents) in &report.extra {
        out.push((with(suffix), contents.clone()));
    }
    if emit_plot {
        out.push((with(".gp"), gnuplot(report, prefix)));
    }
    out
}

pub fn write_all(files: &[(PathBuf, String)]) -> std::io::Result<()> {
    for (path, contents) in files {
        std::fs::write(path, contents)?;
    }
    Ok(())
}
