//! gnuplot scripts for the CSV outputs.

use std::io;
use std::path::{Path, PathBuf};

use crate::sweep::Axis;

/// `P_t_pm_12` becomes `P_{t,12}^{+-}` in gnuplot's enhanced text.
fn curve_title(column: &str) -> String {
    let parts: Vec<&str> = column.split('_').collect();
    match parts.as_slice() {
        ["P", kind, spins, chans @ ..] if spins.len() == 2 && !chans.is_empty() => {
            let sign = |c: char| if c == 'p' { '+' } else { '-' };
            let s: String = spins.chars().map(sign).collect();
            format!("P_{{{kind},{}}}^{{{s}}}", chans.join(","))
        }
        ["P", "t", "total"] => "P_t".to_string(),
        _ => column.replace('_', "\\_"),
    }
}

fn x_label(axis: Axis) -> &'static str {
    match axis {
        Axis::Energy => "(E-{/Symbol e}_1)/V_0",
        Axis::FieldWidth => "b",
        Axis::FieldStrength => "u",
    }
}

fn layout(n: usize) -> (usize, usize) {
    match n {
        0 | 1 => (1, 1),
        2 => (1, 2),
        3 | 4 => (2, 2),
        _ => (n.div_ceil(3), 3),
    }
}

/// Header columns of a CSV file plus whether any data row follows.
fn read_columns(path: &Path) -> (Vec<String>, bool) {
    let Ok(text) = std::fs::read_to_string(path) else {
        return (Vec::new(), false);
    };
    let mut lines = text.lines();
    let header = lines.next().map(|h| h.split(',').map(str::to_string).collect()).unwrap_or_default();
    let has_data = lines.any(|l| !l.trim().is_empty());
    (header, has_data)
}

/// Builds the script text for `(panel label, csv path)` pairs.
pub fn plot_script(preset: &str, axis: Axis, files: &[(String, PathBuf)], image: &Path) -> String {
    let (rows, cols) = layout(files.len());
    let mut s = String::new();
    s.push_str(&format!("# cc-tunnel plot script, preset {preset}\n"));
    s.push_str(&format!(
        "set terminal pngcairo enhanced size {},{}\n",
        520 * cols,
        400 * rows
    ));
    s.push_str(&format!("set output '{}'\n", image.display()));
    s.push_str("set datafile separator ','\n");
    s.push_str(&format!("set xlabel '{}'\n", x_label(axis)));
    s.push_str("set ylabel 'P_t'\n");
    s.push_str("set yrange [0:*]\n");
    s.push_str("set key top left\n");
    if files.len() > 1 {
        s.push_str(&format!("set multiplot layout {rows},{cols}\n"));
    }
    for (label, path) in files {
        let (header, has_data) = read_columns(path);
        if !label.is_empty() {
            s.push_str(&format!("set title '({label})'\n"));
        }
        let curves: Vec<String> = header
            .iter()
            .enumerate()
            .filter(|(_, c)| c.starts_with("P_t"))
            .map(|(i, c)| format!("'{}' using 1:{} with lines title '{}'", path.display(), i + 1, curve_title(c)))
            .collect();
        if !has_data || curves.is_empty() {
            s.push_str(&format!("# warning: no data in {}; panel left empty\n", path.display()));
            continue;
        }
        s.push_str(&format!("plot {}\n", curves.join(", \\\n     ")));
    }
    if files.len() > 1 {
        s.push_str("unset multiplot\n");
    }
    s
}

/// Writes a standalone gnuplot script; the image lands beside it as `.png`.
/// Paths are written as given, so run gnuplot from the same directory.
pub fn emit_plot_script(preset: &str, axis: Axis, files: &[(String, PathBuf)], script: &Path) -> io::Result<()> {
    std::fs::write(script, plot_script(preset, axis, files, &script.with_extension("png")))
}
