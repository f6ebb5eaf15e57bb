//! CSV and JSON serialization of sweep results.

use std::collections::BTreeMap;
use std::io::{self, Write};

use serde::Serialize;

use super::RunConfig;
use crate::model::{open_channels, Spin};
use crate::sweep::{ConvergenceReport, PeakAnalysis, SolverChoice, SweepResult};

/// 17 significant digits: enough to reproduce every `f64` bit for bit.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

fn spin_char(s: Spin) -> char {
    match s {
        Spin::Up => 'p',
        Spin::Down => 'm',
    }
}

/// `P_t_pm_12`: from channel 1 spin up into channel 2 spin down.
pub fn column_name(kind: &str, from: (usize, Spin), to: (usize, Spin)) -> String {
    let sep = if from.0 > 9 || to.0 > 9 { "_" } else { "" };
    format!("{kind}_{}{}_{}{sep}{}", spin_char(from.1), spin_char(to.1), from.0, to.0)
}

/// Channels open at the highest energy the grid reaches.
pub fn column_channels(result: &SweepResult) -> usize {
    let plan = &result.plan;
    (1..=plan.points)
        .filter_map(|i| {
            let (params, energy) = plan.point(i);
            open_channels(&params, energy).ok().map(|c| c.n_open())
        })
        .max()
        .unwrap_or(0)
}

pub fn csv_header(result: &SweepResult) -> Vec<String> {
    let plan = &result.plan;
    let from = (plan.incident_channel, plan.incident_spin);
    let mut cols = vec!["abscissa".to_string()];
    for j in 1..=column_channels(result) {
        cols.push(column_name("P_t", from, (j, plan.incident_spin)));
        cols.push(column_name("P_t", from, (j, plan.incident_spin.flipped())));
    }
    cols.extend(["P_t_total", "unitarity_defect", "suspect"].map(String::from));
    if plan.solver == SolverChoice::Both {
        cols.push("tm_max_deviation".into());
    }
    cols
}

/// One row per grid point in grid order. Closed channels and failed points
/// leave their cells empty.
pub fn write_csv(result: &SweepResult, w: &mut dyn Write) -> io::Result<()> {
    let header = csv_header(result);
    writeln!(w, "{}", header.join(","))?;
    let n = column_channels(result);
    for p in &result.points {
        let mut row = vec![fmt_num(p.abscissa)];
        match &p.summary {
            Ok(s) => {
                for j in 0..n {
                    for v in [s.same.get(j), s.flip.get(j)] {
                        row.push(v.map(|&x| fmt_num(x)).unwrap_or_default());
                    }
                }
                row.push(fmt_num(s.total_transmission));
                row.push(fmt_num(s.unitarity_defect));
                row.push(if s.suspect { "1" } else { "0" }.into());
            }
            Err(_) => {
                row.extend(std::iter::repeat(String::new()).take(2 * n + 2));
                row.push("1".into());
            }
        }
        if result.plan.solver == SolverChoice::Both {
            row.push(p.oracle_deviation().map(fmt_num).unwrap_or_default());
        }
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct JsonRecord {
    index: usize,
    abscissa: f64,
    energy: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    transmission: BTreeMap<String, f64>,
    reflection: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    total_transmission: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    unitarity_defect: Option<f64>,
    suspect: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    tm_max_deviation: Option<f64>,
}

#[derive(Serialize)]
struct JsonOutput<'a> {
    config: &'a RunConfig,
    records: Vec<JsonRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    peaks: Option<&'a PeakAnalysis>,
    #[serde(skip_serializing_if = "Option::is_none")]
    convergence: Option<&'a ConvergenceReport>,
}

pub fn write_json(
    config: &RunConfig,
    result: &SweepResult,
    peaks: Option<&PeakAnalysis>,
    convergence: Option<&ConvergenceReport>,
    w: &mut dyn Write,
) -> io::Result<()> {
    let plan = &result.plan;
    let from = (plan.incident_channel, plan.incident_spin);
    let records = result
        .points
        .iter()
        .map(|p| {
            let mut rec = JsonRecord {
                index: p.index,
                abscissa: p.abscissa,
                energy: p.energy,
                error: p.summary.as_ref().err().cloned(),
                transmission: BTreeMap::new(),
                reflection: BTreeMap::new(),
                total_transmission: None,
                unitarity_defect: None,
                suspect: true,
                tm_max_deviation: p.oracle_deviation(),
            };
            if let Ok(s) = &p.summary {
                let (keep, flip) = (plan.incident_spin, plan.incident_spin.flipped());
                for j in 0..s.same.len() {
                    rec.transmission.insert(column_name("P_t", from, (j + 1, keep)), s.same[j]);
                    rec.transmission.insert(column_name("P_t", from, (j + 1, flip)), s.flip[j]);
                    rec.reflection.insert(column_name("P_r", from, (j + 1, keep)), s.reflection_same[j]);
                    rec.reflection.insert(column_name("P_r", from, (j + 1, flip)), s.reflection_flip[j]);
                }
                rec.total_transmission = Some(s.total_transmission);
                rec.unitarity_defect = Some(s.unitarity_defect);
                rec.suspect = s.suspect;
            }
            rec
        })
        .collect();
    let out = JsonOutput { config, records, peaks, convergence };
    serde_json::to_writer_pretty(&mut *w, &out).map_err(io::Error::other)?;
    writeln!(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names() {
        assert_eq!(column_name("P_t", (1, Spin::Up), (2, Spin::Down)), "P_t_pm_12");
        assert_eq!(column_name("P_r", (2, Spin::Down), (1, Spin::Down)), "P_r_mm_21");
        assert_eq!(column_name("P_t", (1, Spin::Up), (10, Spin::Up)), "P_t_pp_1_10");
    }

    #[test]
    fn numbers_round_trip() {
        for v in [0.1, 1.0 / 3.0, 6.02e-23, 0.0, 0.9999999999999999] {
            assert_eq!(fmt_num(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
    }
}
