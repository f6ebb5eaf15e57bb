//! Matrix elements of the barrier and the magnetic term between internal
//! well eigenstates, and assembly of the composite coupling matrix.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::model::{ChannelSet, Convention, ModelParams};

/// Closed form of `amplitude * ∫_{g1}^{g2} φ_{n1}(y) φ_{n2}(y) dy` with
/// `φ_n(y) = sqrt(2/d) sin(nπy/d)`. No range check: the sine expressions are
/// continued outside `[0, d]`.
pub(crate) fn overlap_closed_form(amplitude: f64, g1: f64, g2: f64, n1: usize, n2: usize, d: f64) -> f64 {
    if n1 == n2 {
        let n = n1 as f64;
        let prim = |g: f64| {
            let arg = n * PI * g / d;
            g / d - arg.sin() * arg.cos() / (n * PI)
        };
        amplitude * (prim(g2) - prim(g1))
    } else {
        let diff = n1 as f64 - n2 as f64;
        let sum = (n1 + n2) as f64;
        let prim = |g: f64| (PI * diff * g / d).sin() / (PI * diff) - (PI * sum * g / d).sin() / (PI * sum);
        amplitude * (prim(g2) - prim(g1))
    }
}

/// Overlap of two well eigenstates weighted by a constant `amplitude` over
/// `[g1, g2] ⊆ [0, d]`.
pub fn well_overlap_integral(amplitude: f64, g1: f64, g2: f64, n1: usize, n2: usize, d: f64) -> Result<f64> {
    if !(0.0 <= g1 && g1 <= g2 && g2 <= d) {
        return Err(Error::LimitsOutsideWell { lower: g1, upper: g2, width: d });
    }
    if g1 == g2 {
        return Ok(0.0);
    }
    Ok(overlap_closed_form(amplitude, g1, g2, n1, n2, d))
}

fn clamp_band(lo: f64, hi: f64, d: f64) -> Option<(f64, f64)> {
    let lo = lo.clamp(0.0, d);
    let hi = hi.clamp(0.0, d);
    (hi > lo).then_some((lo, hi))
}

/// The two intervals of the shifted relative coordinate in which one of the
/// constituents sits inside the barrier, clamped to the well.
pub fn barrier_bands(x: f64, params: &ModelParams) -> [Option<(f64, f64)>; 2] {
    let ModelParams { a, d, l, .. } = *params;
    let shift = -l + d / 2.0;
    [
        clamp_band(2.0 * x - a + shift, 2.0 * x + a + shift, d),
        clamp_band(-2.0 * x - a + shift, -2.0 * x + a + shift, d),
    ]
}

/// `W_ij(x)`: the barrier seen by internal modes `i`, `j` (1-based) at
/// centre-of-mass position `x`.
///
/// The well is cut at every clamped band endpoint and each elementary
/// segment is weighted by `V0` times the number of bands covering it, so the
/// overlap of the two bands carries `2 V0`.
pub fn barrier_matrix_element(i: usize, j: usize, x: f64, params: &ModelParams) -> f64 {
    let bands: Vec<(f64, f64)> = barrier_bands(x, params).into_iter().flatten().collect();
    if bands.is_empty() {
        return 0.0;
    }
    let mut cuts: Vec<f64> = bands.iter().flat_map(|&(lo, hi)| [lo, hi]).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut total = 0.0;
    for seg in cuts.windows(2) {
        let (lo, hi) = (seg[0], seg[1]);
        let mid = 0.5 * (lo + hi);
        let cover = bands.iter().filter(|&&(blo, bhi)| blo <= mid && mid <= bhi).count();
        if cover > 0 {
            total += overlap_closed_form(cover as f64 * params.v0, lo, hi, i, j, params.d);
        }
    }
    total
}

/// Limits of the field window used for `F_ij(x)`, or `None` when empty.
pub fn field_window(x: f64, params: &ModelParams) -> Option<(f64, f64)> {
    let ModelParams { b, d, l, .. } = *params;
    let (lo, hi) = (2.0 * (x - b), 2.0 * (x + b));
    match params.convention {
        Convention::PaperCode => {
            let lo = lo.max(l - d / 2.0);
            let hi = hi.min(l + d / 2.0);
            (hi > lo).then_some((lo, hi))
        }
        Convention::Derived => {
            let shift = l - d / 2.0;
            clamp_band(lo - shift, hi - shift, d)
        }
    }
}

/// `F_ij(x)`: matrix element of the spin-flip field term.
pub fn field_matrix_element(i: usize, j: usize, x: f64, params: &ModelParams) -> f64 {
    if params.u == 0.0 {
        return 0.0;
    }
    match field_window(x, params) {
        Some((lo, hi)) => overlap_closed_form(params.u, lo, hi, i, j, params.d),
        None => 0.0,
    }
}

/// Real symmetric `2n x 2n` coupling `v(x)` in the composite (spin-major)
/// basis: `(4m/ħ²) W` on the spin-diagonal blocks, `-(4m/ħ²) F` off-diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingMatrix(pub DMatrix<f64>);

impl CouplingMatrix {
    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }
}

pub fn assemble_coupling(x: f64, channels: &ChannelSet, params: &ModelParams) -> CouplingMatrix {
    let n = channels.n_open();
    let mut v = DMatrix::zeros(2 * n, 2 * n);
    fill_coupling(x, n, params, &mut v);
    CouplingMatrix(v)
}

/// Writes `v(x)` for `n` open channels into a preallocated `2n x 2n` matrix.
pub(crate) fn fill_coupling(x: f64, n: usize, params: &ModelParams, v: &mut DMatrix<f64>) {
    let scale = params.coupling_scale();
    for i in 0..n {
        for j in i..n {
            let w = scale * barrier_matrix_element(i + 1, j + 1, x, params);
            let f = -scale * field_matrix_element(i + 1, j + 1, x, params);
            for (r, c, val) in [
                (i, j, w),
                (i + n, j + n, w),
                (i, j + n, f),
                (i + n, j, f),
            ] {
                v[(r, c)] = val;
                v[(c, r)] = val;
            }
        }
    }
}

/// Centre-of-mass positions at which `v(x)` has a kink: band or field window
/// edges crossing `0` or `d`.
pub fn coupling_kinks(params: &ModelParams) -> Vec<f64> {
    let ModelParams { a, b, d, l, .. } = *params;
    let shift = -l + d / 2.0;
    let mut xs = Vec::new();
    for edge in [0.0, d] {
        for s in [-a, a] {
            // 2x + s + shift = edge and -2x + s + shift = edge
            let x = (edge - s - shift) / 2.0;
            xs.push(x);
            xs.push(-x);
        }
    }
    // the two bands start or stop overlapping
    xs.extend([-a / 2.0, 0.0, a / 2.0]);
    if b > 0.0 {
        // both conventions clip the field window at l -/+ d/2 in the unshifted distance
        for edge in [l - d / 2.0, l + d / 2.0] {
            xs.push(edge / 2.0 + b);
            xs.push(edge / 2.0 - b);
        }
    }
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{integration_domain, open_channels};
    use approx::assert_abs_diff_eq;

    /// Composite Simpson of `(2/d) sin(iπy/d) sin(jπy/d)` over `[lo, hi]`.
    fn simpson_overlap(i: usize, j: usize, lo: f64, hi: f64, d: f64) -> f64 {
        let f = |y: f64| (2.0 / d) * (i as f64 * PI * y / d).sin() * (j as f64 * PI * y / d).sin();
        let n = 4000;
        let h = (hi - lo) / n as f64;
        let mut s = f(lo) + f(hi);
        for k in 1..n {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(lo + k as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn normalization_and_orthogonality() {
        let d = 5.0;
        assert_abs_diff_eq!(well_overlap_integral(1.0, 0.0, d, 1, 1, d).unwrap(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(well_overlap_integral(1.0, 0.0, d, 1, 2, d).unwrap(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(well_overlap_integral(1.0, 0.0, d / 2.0, 1, 1, d).unwrap(), 0.5, epsilon = 1e-14);
        for i in 1..=7 {
            for j in 1..=7 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(well_overlap_integral(1.0, 0.0, d, i, j, d).unwrap(), expect, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn partial_overlap_matches_quadrature() {
        let got = well_overlap_integral(1.0, 1.0, 3.0, 1, 2, 5.0).unwrap();
        assert_abs_diff_eq!(got, simpson_overlap(1, 2, 1.0, 3.0, 5.0), epsilon = 1e-11);
    }

    #[test]
    fn limits_outside_well_rejected() {
        assert!(well_overlap_integral(1.0, -0.1, 1.0, 1, 1, 5.0).is_err());
        assert!(well_overlap_integral(1.0, 1.0, 5.1, 1, 1, 5.0).is_err());
        assert!(well_overlap_integral(1.0, 2.0, 1.0, 1, 1, 5.0).is_err());
        assert_eq!(well_overlap_integral(1.0, 2.0, 2.0, 1, 3, 5.0).unwrap(), 0.0);
    }

    #[test]
    fn barrier_element_cases() {
        let p = ModelParams::new(1.0, 1.0, 5.0, 5.0, 0.0);
        let xr = integration_domain(&p).x_right;
        assert_eq!(barrier_matrix_element(1, 1, xr + 1.0, &p), 0.0);
        assert_eq!(barrier_matrix_element(1, 1, 0.0, &p), 0.0);
        // only the first band [0.5, 2.5] intersects the well at x = 2
        let w = barrier_matrix_element(1, 1, 2.0, &p);
        assert_abs_diff_eq!(w, simpson_overlap(1, 1, 0.5, 2.5, 5.0), epsilon = 1e-11);
    }

    #[test]
    fn barrier_element_is_even() {
        let p = ModelParams::new(1.0, 1.0, 5.0, 3.0, 0.0);
        for k in 0..200 {
            let x = -4.0 + 0.04 * k as f64;
            for (i, j) in [(1, 1), (1, 2), (2, 3)] {
                assert_abs_diff_eq!(
                    barrier_matrix_element(i, j, x, &p),
                    barrier_matrix_element(i, j, -x, &p),
                    epsilon = 1e-13
                );
            }
        }
    }

    #[test]
    fn field_element_zero_width() {
        let p = ModelParams { b: 0.0, u: 0.3, ..ModelParams::default() };
        for x in [-2.0, 0.0, 1.3] {
            assert_eq!(field_matrix_element(1, 1, x, &p), 0.0);
            assert_eq!(field_matrix_element(1, 2, x, &p), 0.0);
        }
    }

    #[test]
    fn derived_field_full_window() {
        let p = ModelParams { b: 50.0, u: 0.07, ..ModelParams::default() }.with_convention(Convention::Derived);
        assert_abs_diff_eq!(field_matrix_element(1, 1, 0.0, &p), 0.07, epsilon = 1e-15);
        assert_abs_diff_eq!(field_matrix_element(1, 2, 0.0, &p), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn partial_field_window_matches_quadrature() {
        let base = ModelParams { a: 1.0, b: 1.0, d: 5.0, l: 5.0, u: 0.05, ..ModelParams::default() };
        for conv in [Convention::PaperCode, Convention::Derived] {
            let p = base.clone().with_convention(conv);
            let x = 1.8;
            let (lo, hi) = field_window(x, &p).unwrap();
            let f = field_matrix_element(1, 1, x, &p);
            assert_abs_diff_eq!(f, 0.05 * simpson_overlap(1, 1, lo, hi, 5.0), epsilon = 1e-11);
        }
    }

    #[test]
    fn field_window_translates_with_x() {
        let p = ModelParams { b: 0.4, ..ModelParams::default() }.with_convention(Convention::Derived);
        let (lo0, hi0) = field_window(2.5, &p).unwrap();
        let (lo1, hi1) = field_window(2.6, &p).unwrap();
        assert_abs_diff_eq!(lo1 - lo0, 0.2, epsilon = 1e-12);
        assert_abs_diff_eq!(hi1 - hi0, 0.2, epsilon = 1e-12);
    }

    #[test]
    fn coupling_structure() {
        let p = ModelParams::new(1.0, 1.0, 7.0, 5.0, 0.05);
        let ch = open_channels(&p, 1.2).unwrap();
        assert_eq!(ch.n_open(), 2);
        for x in [-3.0, -1.1, 0.0, 0.7, 2.9] {
            let v = assemble_coupling(x, &ch, &p).into_inner();
            assert_eq!(v, v.transpose());
            // global spin exchange
            let n = 2;
            for r in 0..4 {
                for c in 0..4 {
                    assert_eq!(v[(r, c)], v[((r + n) % 4, (c + n) % 4)]);
                }
            }
        }
        let zero_u = ModelParams { u: 0.0, ..p.clone() };
        let v = assemble_coupling(2.0, &ch, &zero_u).into_inner();
        for r in 0..2 {
            for c in 2..4 {
                assert_eq!(v[(r, c)], 0.0);
                assert_eq!(v[(c, r)], 0.0);
            }
        }
    }

    #[test]
    fn single_channel_coupling_entries() {
        let p = ModelParams::new(1.0, 1.0, 5.0, 5.0, 0.05);
        let ch = open_channels(&p, 0.9).unwrap();
        let v = assemble_coupling(1.8, &ch, &p).into_inner();
        // band [0.1, 2.1] and paper-code field window [2.5, 5.6]
        let w = simpson_overlap(1, 1, 0.1, 2.1, 5.0);
        let f = 0.05 * simpson_overlap(1, 1, 2.5, 5.6, 5.0);
        assert_abs_diff_eq!(v[(0, 0)], 4.0 * w, epsilon = 1e-10);
        assert_abs_diff_eq!(v[(1, 1)], 4.0 * w, epsilon = 1e-10);
        assert_abs_diff_eq!(v[(0, 1)], -4.0 * f, epsilon = 1e-10);
    }

    #[test]
    fn derived_coupling_vanishes_outside_domain() {
        let p = ModelParams::new(1.0, 100.0, 5.0, 5.0, 0.05).with_convention(Convention::Derived);
        let ch = open_channels(&p, 1.0).unwrap();
        let xr = integration_domain(&p).x_right;
        for x in [xr, xr + 1e-9, xr + 3.0, -xr, -xr - 1e-9] {
            let v = assemble_coupling(x, &ch, &p).into_inner();
            assert!(v.iter().all(|&e| e == 0.0), "nonzero coupling at {x}");
        }
        let inside = assemble_coupling(xr - 1e-3, &ch, &p).into_inner();
        assert!(inside.iter().any(|&e| e != 0.0));
    }
}
