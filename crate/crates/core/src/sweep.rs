//! Parameter scans over energy, field width or field strength.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{channel_energy, ModelParams, Spin};
use crate::odeint::IntegratorConfig;
use crate::oracle::{transfer_matrix_solve, Segmentation, DEFAULT_SEGMENTS};
use crate::vra::{solve_amplitudes, ScatteringRecord, SUSPECT_THRESHOLD};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    #[serde(rename = "E")]
    Energy,
    #[serde(rename = "b")]
    FieldWidth,
    #[serde(rename = "u")]
    FieldStrength,
}

impl FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "E" | "e" | "energy" => Ok(Axis::Energy),
            "b" => Ok(Axis::FieldWidth),
            "u" => Ok(Axis::FieldStrength),
            other => Err(format!("unknown axis `{other}` (expected E, b or u)")),
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::Energy => "E",
            Axis::FieldWidth => "b",
            Axis::FieldStrength => "u",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverChoice {
    Vra,
    Tm,
    Both,
}

impl FromStr for SolverChoice {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "vra" => Ok(SolverChoice::Vra),
            "tm" => Ok(SolverChoice::Tm),
            "both" => Ok(SolverChoice::Both),
            other => Err(format!("unknown solver `{other}` (expected vra, tm or both)")),
        }
    }
}

impl fmt::Display for SolverChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolverChoice::Vra => "vra",
            SolverChoice::Tm => "tm",
            SolverChoice::Both => "both",
        })
    }
}

/// Grid `start + i * span / points` for `i = 1..=points`.
///
/// On the energy axis the value is `(E - ε1) / V0`; the fixed `energy`
/// (same units) is used for the `b` and `u` axes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepPlan {
    pub params: ModelParams,
    pub axis: Axis,
    pub start: f64,
    pub span: f64,
    pub points: usize,
    pub energy: Option<f64>,
    pub incident_channel: usize,
    pub incident_spin: Spin,
    pub solver: SolverChoice,
    pub segments: usize,
    pub convergence_check: bool,
    /// Worker count; `None` lets the pool decide.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

impl SweepPlan {
    pub fn energy_sweep(params: ModelParams, span: f64, points: usize) -> Self {
        Self {
            params,
            axis: Axis::Energy,
            start: 0.0,
            span,
            points,
            energy: None,
            incident_channel: 1,
            incident_spin: Spin::Up,
            solver: SolverChoice::Vra,
            segments: DEFAULT_SEGMENTS,
            convergence_check: false,
            threads: None,
        }
    }

    pub fn grid_value(&self, i: usize) -> f64 {
        self.start + (i as f64 * self.span) / self.points as f64
    }

    /// Parameters and total energy at grid index `i` (1-based).
    pub fn point(&self, i: usize) -> (ModelParams, f64) {
        let value = self.grid_value(i);
        let mut params = self.params.clone();
        let excess = match self.axis {
            Axis::Energy => value,
            Axis::FieldWidth => {
                params.b = value;
                self.energy.unwrap_or(f64::NAN)
            }
            Axis::FieldStrength => {
                params.u = value;
                self.energy.unwrap_or(f64::NAN)
            }
        };
        let energy = channel_energy(&params, 1) + params.v0 * excess;
        (params, energy)
    }

    pub fn validate(&self) -> Result<()> {
        use crate::error::Error;
        self.params.validate()?;
        if self.points == 0 {
            return Err(Error::InvalidParameter { name: "points", reason: "must be at least 1".into() });
        }
        if !(self.span.is_finite() && self.start.is_finite()) {
            return Err(Error::InvalidParameter { name: "span", reason: "grid bounds must be finite".into() });
        }
        if self.incident_channel == 0 {
            return Err(Error::InvalidParameter { name: "incident_channel", reason: "channels are 1-based".into() });
        }
        match self.axis {
            Axis::Energy => {
                let lowest = self.grid_value(1).min(self.grid_value(self.points));
                if !(lowest > 0.0) {
                    return Err(Error::InvalidParameter {
                        name: "start",
                        reason: format!("energy grid reaches (E - ε1)/V0 = {lowest}; it must stay above 0"),
                    });
                }
            }
            Axis::FieldWidth | Axis::FieldStrength => {
                match self.energy {
                    Some(e) if e > 0.0 && e.is_finite() => {}
                    _ => {
                        return Err(Error::InvalidParameter {
                            name: "energy",
                            reason: "b and u sweeps need a fixed (E - ε1)/V0 > 0".into(),
                        })
                    }
                }
                let lowest = self.grid_value(1).min(self.grid_value(self.points));
                if lowest < 0.0 {
                    return Err(Error::InvalidParameter {
                        name: "start",
                        reason: format!("{} grid reaches {lowest}; it must stay non-negative", self.axis),
                    });
                }
            }
        }
        if self.segments == 0 {
            return Err(Error::InvalidParameter { name: "segments", reason: "must be at least 1".into() });
        }
        Ok(())
    }

    fn incident(&self) -> (usize, Spin) {
        (self.incident_channel, self.incident_spin)
    }
}

/// Probabilities out of the incident state at one grid point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointSummary {
    /// `same[j-1]`: transmission into channel `j` keeping the spin.
    pub same: Vec<f64>,
    /// `flip[j-1]`: transmission into channel `j` with the spin flipped.
    pub flip: Vec<f64>,
    pub reflection_same: Vec<f64>,
    pub reflection_flip: Vec<f64>,
    pub total_transmission: f64,
    pub unitarity_defect: f64,
    pub suspect: bool,
}

impl PointSummary {
    fn from_record(rec: &ScatteringRecord, incident: (usize, Spin)) -> std::result::Result<Self, String> {
        let n = rec.channels.n_open();
        if incident.0 > n {
            return Err(format!("incident channel {} is closed ({} open)", incident.0, n));
        }
        let spin = incident.1;
        let to = |j: usize, s: Spin| (j, s);
        let same: Vec<f64> = (1..=n).map(|j| rec.transmission(incident, to(j, spin))).collect();
        let flip: Vec<f64> = (1..=n).map(|j| rec.transmission(incident, to(j, spin.flipped()))).collect();
        let reflection_same = (1..=n).map(|j| rec.reflection(incident, to(j, spin))).collect();
        let reflection_flip = (1..=n).map(|j| rec.reflection(incident, to(j, spin.flipped()))).collect();
        Ok(Self {
            total_transmission: same.iter().chain(&flip).sum(),
            same,
            flip,
            reflection_same,
            reflection_flip,
            unitarity_defect: rec.unitarity_defect,
            suspect: rec.suspect(),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub index: usize,
    pub abscissa: f64,
    pub energy: f64,
    pub record: std::result::Result<ScatteringRecord, String>,
    /// Transfer-matrix record when the plan asks for both solvers.
    pub oracle: Option<std::result::Result<ScatteringRecord, String>>,
    pub summary: std::result::Result<PointSummary, String>,
}

impl SweepPoint {
    /// Largest entrywise probability difference between the two solvers.
    pub fn oracle_deviation(&self) -> Option<f64> {
        match (&self.record, self.oracle.as_ref()?) {
            (Ok(a), Ok(b)) => Some(max_probability_deviation(a, b)),
            _ => None,
        }
    }
}

pub fn max_probability_deviation(a: &ScatteringRecord, b: &ScatteringRecord) -> f64 {
    if a.p_t.shape() != b.p_t.shape() {
        return f64::INFINITY;
    }
    (&a.p_t - &b.p_t).abs().max().max((&a.p_r - &b.p_r).abs().max())
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub plan: SweepPlan,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    pub fn abscissae(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.abscissa).collect()
    }

    /// One value per grid point, `NaN` where the point failed.
    pub fn series<F: Fn(&PointSummary) -> f64>(&self, f: F) -> Vec<f64> {
        self.points
            .iter()
            .map(|p| p.summary.as_ref().map(&f).unwrap_or(f64::NAN))
            .collect()
    }

    pub fn total_transmission(&self) -> Vec<f64> {
        self.series(|s| s.total_transmission)
    }

    /// Transmission into `channel` with the incident spin kept (`flip = false`)
    /// or flipped; `NaN` where that channel is closed.
    pub fn transmission(&self, channel: usize, flip: bool) -> Vec<f64> {
        self.series(|s| {
            let v = if flip { &s.flip } else { &s.same };
            v.get(channel - 1).copied().unwrap_or(f64::NAN)
        })
    }

    pub fn max_unitarity_defect(&self) -> f64 {
        self.series(|s| s.unitarity_defect).into_iter().filter(|v| v.is_finite()).fold(0.0, f64::max)
    }

    pub fn failures(&self) -> usize {
        self.points.iter().filter(|p| p.summary.is_err()).count()
    }

    /// Open channels at the point with the most of them.
    pub fn max_open_channels(&self) -> usize {
        self.points
            .iter()
            .filter_map(|p| p.summary.as_ref().ok())
            .map(|s| s.same.len())
            .max()
            .unwrap_or(0)
    }
}

fn solve_point(plan: &SweepPlan, config: &IntegratorConfig, index: usize) -> SweepPoint {
    let (params, energy) = plan.point(index);
    let abscissa = plan.grid_value(index);
    let seg = || Segmentation::for_params(&params, plan.segments);
    let vra = || solve_amplitudes(energy, &params, config).map_err(|e| e.to_string());
    let tm = || transfer_matrix_solve(energy, &params, &seg()).map_err(|e| e.to_string());
    let (record, oracle) = match plan.solver {
        SolverChoice::Vra => (vra(), None),
        SolverChoice::Tm => (tm(), None),
        SolverChoice::Both => (vra(), Some(tm())),
    };
    let summary = record
        .as_ref()
        .map_err(Clone::clone)
        .and_then(|rec| PointSummary::from_record(rec, plan.incident()));
    SweepPoint { index, abscissa, energy, record, oracle, summary }
}

fn with_pool<T: Send>(threads: Option<usize>, job: impl FnOnce() -> T + Send) -> T {
    match threads {
        Some(n) if n > 0 => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(job),
            Err(_) => job(),
        },
        _ => job(),
    }
}

/// Solves every grid point independently; results come back in grid order.
/// Failed points are kept as gaps carrying the error text.
pub fn run_sweep(plan: &SweepPlan, config: &IntegratorConfig) -> Result<SweepResult> {
    plan.validate()?;
    config.validate()?;
    let points = with_pool(plan.threads, || {
        (1..=plan.points)
            .into_par_iter()
            .map(|i| solve_point(plan, config, i))
            .collect::<Vec<_>>()
    });
    Ok(SweepResult { plan: plan.clone(), points })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub max_deviation: f64,
    pub points_checked: usize,
    /// Abscissae whose deviation exceeds [`SUSPECT_THRESHOLD`].
    pub flagged: Vec<f64>,
}

/// Reruns every 10th grid point with `max_step / 5` and reports the largest
/// change in any reflection or transmission probability.
pub fn convergence_check(plan: &SweepPlan, config: &IntegratorConfig) -> Result<ConvergenceReport> {
    plan.validate()?;
    config.validate()?;
    let fine = IntegratorConfig { max_step: config.max_step / 5.0, ..config.clone() };
    let indices: Vec<usize> = (1..=plan.points).step_by(10).collect();
    let deviations = with_pool(plan.threads, || {
        indices
            .par_iter()
            .map(|&i| {
                let (params, energy) = plan.point(i);
                let coarse = solve_amplitudes(energy, &params, config);
                let refined = solve_amplitudes(energy, &params, &fine);
                match (coarse, refined) {
                    (Ok(a), Ok(b)) => Some((plan.grid_value(i), max_probability_deviation(&a, &b))),
                    _ => None,
                }
            })
            .collect::<Vec<_>>()
    });
    let checked: Vec<(f64, f64)> = deviations.into_iter().flatten().collect();
    Ok(ConvergenceReport {
        max_deviation: checked.iter().map(|&(_, d)| d).fold(0.0, f64::max),
        points_checked: checked.len(),
        flagged: checked.iter().filter(|&&(_, d)| d > SUSPECT_THRESHOLD).map(|&(x, _)| x).collect(),
    })
}

pub const DEFAULT_PROMINENCE: f64 = 0.01;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub index: usize,
    /// Vertex of the parabola through the maximum and its neighbours.
    pub position: f64,
    pub height: f64,
    pub prominence: f64,
    /// Full width at half prominence.
    pub width: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitPair {
    pub first: usize,
    pub second: usize,
    pub separation: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PeakAnalysis {
    pub peaks: Vec<Peak>,
    pub split_pairs: Vec<SplitPair>,
}

/// Local maxima of `y(x)` with topographic prominence at least
/// `min_prominence`. `NaN` samples break the signal and never count as peaks.
pub fn find_peaks(x: &[f64], y: &[f64], min_prominence: f64) -> Vec<Peak> {
    let n = y.len();
    let mut peaks = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if !(y[i].is_finite() && y[i - 1].is_finite()) || y[i] <= y[i - 1] {
            i += 1;
            continue;
        }
        // skip across a plateau
        let mut j = i;
        while j + 1 < n && y[j + 1] == y[i] {
            j += 1;
        }
        if j + 1 >= n || !y[j + 1].is_finite() || y[j + 1] > y[i] {
            i = j + 1;
            continue;
        }
        let mid = (i + j) / 2;
        let prominence = prominence(y, mid);
        if prominence >= min_prominence {
            let (position, height) = if i == j {
                vertex(x, y, mid)
            } else {
                (0.5 * (x[i] + x[j]), y[i])
            };
            peaks.push(Peak { index: mid, position, height, prominence, width: half_prominence_width(x, y, mid, prominence) });
        }
        i = j + 1;
    }
    peaks
}

fn prominence(y: &[f64], i: usize) -> f64 {
    let h = y[i];
    let base = |range: &mut dyn Iterator<Item = usize>| {
        let mut lowest = h;
        for k in range {
            if !y[k].is_finite() || y[k] > h {
                break;
            }
            lowest = lowest.min(y[k]);
        }
        lowest
    };
    let left = base(&mut (0..i).rev());
    let right = base(&mut (i + 1..y.len()));
    h - left.max(right)
}

fn vertex(x: &[f64], y: &[f64], i: usize) -> (f64, f64) {
    let (ym, y0, yp) = (y[i - 1], y[i], y[i + 1]);
    let denom = ym - 2.0 * y0 + yp;
    if denom >= 0.0 {
        return (x[i], y0);
    }
    let delta = 0.5 * (ym - yp) / denom;
    let dx = 0.5 * (x[i + 1] - x[i - 1]);
    (x[i] + delta * dx, y0 - 0.25 * (ym - yp) * delta)
}

fn half_prominence_width(x: &[f64], y: &[f64], i: usize, prominence: f64) -> f64 {
    let level = y[i] - 0.5 * prominence;
    let cross = |range: &mut dyn Iterator<Item = usize>, prev_step: isize| -> f64 {
        let mut prev = i;
        for k in range {
            if !y[k].is_finite() {
                return x[prev];
            }
            if y[k] < level {
                let (xa, ya) = (x[prev], y[prev]);
                let (xb, yb) = (x[k], y[k]);
                return xa + (level - ya) * (xb - xa) / (yb - ya);
            }
            prev = k;
        }
        let _ = prev_step;
        x[prev]
    };
    let left = cross(&mut (0..i).rev(), -1);
    let right = cross(&mut (i + 1..y.len()), 1);
    right - left
}

/// Adjacent peaks that sit closer to each other than half their distance
/// to the next peak (or to the scan edge) on either side form one split
/// resonance.
pub fn split_pairs(x: &[f64], peaks: &[Peak]) -> Vec<SplitPair> {
    let (Some(&lo), Some(&hi)) = (x.first(), x.last()) else {
        return Vec::new();
    };
    let mut pairs = Vec::new();
    for i in 0..peaks.len().saturating_sub(1) {
        let (p, q) = (&peaks[i], &peaks[i + 1]);
        let separation = q.position - p.position;
        let left = if i == 0 { p.position - lo } else { p.position - peaks[i - 1].position };
        let right = peaks.get(i + 2).map_or(hi, |r| r.position) - q.position;
        if separation <= 0.5 * left.min(right) {
            pairs.push(SplitPair { first: i, second: i + 1, separation });
        }
    }
    pairs
}

/// Peaks of the total transmission out of the incident state.
pub fn peak_analysis(result: &SweepResult, min_prominence: f64) -> PeakAnalysis {
    let x = result.abscissae();
    let y = result.total_transmission();
    let peaks = find_peaks(&x, &y, min_prominence);
    let split_pairs = split_pairs(&x, &peaks);
    PeakAnalysis { peaks, split_pairs }
}

/// Zeros of an oscillating fraction such as the spin-flip share: one per
/// excursion below `low`, where excursions must be separated by a rise above
/// `high`. The hysteresis keeps small ripples inside one dip from counting
/// twice. Positions are parabola vertices through the lowest sample.
pub fn oscillation_zeros(x: &[f64], y: &[f64], low: f64, high: f64) -> Vec<f64> {
    let mut zeros = Vec::new();
    let mut best: Option<usize> = None;
    // excursions already under way at the left edge are not resolved either
    let mut armed = false;
    for i in 0..y.len() {
        let v = y[i];
        if !v.is_finite() {
            continue;
        }
        if v > high {
            if let Some(k) = best.take() {
                zeros.push(refine_minimum(x, y, k));
            }
            armed = true;
        } else if v < low && armed {
            if best.map_or(true, |k| v < y[k]) {
                best = Some(i);
            }
        }
    }
    zeros
}

fn refine_minimum(x: &[f64], y: &[f64], i: usize) -> f64 {
    if i == 0 || i + 1 >= y.len() || !(y[i - 1].is_finite() && y[i + 1].is_finite()) {
        return x[i];
    }
    let (ym, y0, yp) = (y[i - 1], y[i], y[i + 1]);
    let denom = ym - 2.0 * y0 + yp;
    if denom <= 0.0 {
        return x[i];
    }
    x[i] + 0.5 * (ym - yp) / denom * 0.5 * (x[i + 1] - x[i - 1])
}
