//! Variable reflection/transmission amplitudes.
//!
//! `R(x)` and `T(x)` are the amplitudes of the coupling truncated to
//! `[x, x_right]`. Both are stored as `[outgoing, incident]` in the composite
//! basis. Starting from `R = 0`, `T = I` at `x_right`, the equations are
//! integrated to `x_left`:
//!
//! ```text
//! G_jc   = (1 / 2ik_j) Σ_m v_jm (e^{ik_m x} δ_mc + e^{-ik_m x} R_mc)
//! dR_oc  = -Σ_j (e^{ik_o x} δ_oj + R_oj e^{-ik_j x}) G_jc
//! dT_oc  = -Σ_j  T_oj e^{-ik_j x} G_jc
//! ```
//!
//! The integrator state is `R` followed by `T`, each flattened row-major
//! (`index = outgoing * 2n + incident`).

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::Result;
use crate::matelem::{coupling_kinks, fill_coupling};
use crate::model::{integration_domain, open_channels, ChannelSet, ModelParams, Spin};
use crate::odeint::{integrate_with_stops, IntegrationReport, IntegratorConfig};

/// Unitarity defects above this mark a record as suspect.
pub const SUSPECT_THRESHOLD: f64 = 1e-4;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Debug, PartialEq)]
pub struct AmplitudeMatrices {
    pub r: DMatrix<Complex64>,
    pub t: DMatrix<Complex64>,
    pub x: f64,
}

impl AmplitudeMatrices {
    /// `R = 0`, `T = I` at position `x`.
    pub fn free(dim: usize, x: f64) -> Self {
        Self {
            r: DMatrix::zeros(dim, dim),
            t: DMatrix::identity(dim, dim),
            x,
        }
    }

    pub fn dim(&self) -> usize {
        self.r.nrows()
    }

    fn to_state(&self) -> Vec<Complex64> {
        let dim = self.dim();
        let mut y = Vec::with_capacity(2 * dim * dim);
        for m in [&self.r, &self.t] {
            for o in 0..dim {
                for c in 0..dim {
                    y.push(m[(o, c)]);
                }
            }
        }
        y
    }

    fn from_state(y: &[Complex64], dim: usize, x: f64) -> Self {
        let block = dim * dim;
        Self {
            r: DMatrix::from_row_slice(dim, dim, &y[..block]),
            t: DMatrix::from_row_slice(dim, dim, &y[block..2 * block]),
            x,
        }
    }
}

/// Evaluates the amplitude equations with reusable scratch space.
struct AmplitudeSystem<'a> {
    params: &'a ModelParams,
    n_open: usize,
    k: Vec<f64>,
    v: DMatrix<f64>,
    ep: Vec<Complex64>,
    em: Vec<Complex64>,
    g: Vec<Complex64>,
}

impl<'a> AmplitudeSystem<'a> {
    fn new(channels: &ChannelSet, params: &'a ModelParams) -> Self {
        let dim = channels.dim();
        Self {
            params,
            n_open: channels.n_open(),
            k: channels.composite_k(),
            v: DMatrix::zeros(dim, dim),
            ep: vec![Complex64::default(); dim],
            em: vec![Complex64::default(); dim],
            g: vec![Complex64::default(); dim * dim],
        }
    }

    fn eval(&mut self, x: f64, y: &[Complex64], dy: &mut [Complex64]) {
        let dim = self.k.len();
        let block = dim * dim;
        fill_coupling(x, self.n_open, self.params, &mut self.v);
        if self.v.iter().all(|&e| e == 0.0) {
            dy.fill(Complex64::default());
            return;
        }
        for (m, &km) in self.k.iter().enumerate() {
            self.ep[m] = Complex64::from_polar(1.0, km * x);
            self.em[m] = self.ep[m].conj();
        }
        let r = &y[..block];
        let t = &y[block..];

        // h_jc = e^{-ik_j x} G_jc
        for j in 0..dim {
            let pref = self.em[j] / (2.0 * I * self.k[j]);
            for c in 0..dim {
                let mut acc = self.v[(j, c)] * self.ep[c];
                for m in 0..dim {
                    let vjm = self.v[(j, m)];
                    if vjm != 0.0 {
                        acc += vjm * self.em[m] * r[m * dim + c];
                    }
                }
                self.g[j * dim + c] = pref * acc;
            }
        }
        let (dr, dt) = dy.split_at_mut(block);
        for o in 0..dim {
            // e^{ik_o x} G_oc = e^{2ik_o x} h_oc
            let direct = self.ep[o] * self.ep[o];
            for c in 0..dim {
                let mut acc_r = direct * self.g[o * dim + c];
                let mut acc_t = Complex64::default();
                for j in 0..dim {
                    let h = self.g[j * dim + c];
                    acc_r += r[o * dim + j] * h;
                    acc_t += t[o * dim + j] * h;
                }
                dr[o * dim + c] = -acc_r;
                dt[o * dim + c] = -acc_t;
            }
        }
    }
}

/// Derivatives `(dR/dx, dT/dx)` at `state.x`.
pub fn amplitude_rhs(
    state: &AmplitudeMatrices,
    channels: &ChannelSet,
    params: &ModelParams,
) -> (DMatrix<Complex64>, DMatrix<Complex64>) {
    let dim = channels.dim();
    let mut sys = AmplitudeSystem::new(channels, params);
    let y = state.to_state();
    let mut dy = vec![Complex64::default(); y.len()];
    sys.eval(state.x, &y, &mut dy);
    let d = AmplitudeMatrices::from_state(&dy, dim, state.x);
    (d.r, d.t)
}

/// Flux-weighted probabilities `P[o][c] = (k_o / k_c) |A[o][c]|²` for
/// reflection and transmission.
pub fn probabilities(final_state: &AmplitudeMatrices, channels: &ChannelSet) -> (DMatrix<f64>, DMatrix<f64>) {
    let k = channels.composite_k();
    let weigh = |m: &DMatrix<Complex64>| DMatrix::from_fn(m.nrows(), m.ncols(), |o, c| k[o] / k[c] * m[(o, c)].norm_sqr());
    (weigh(&final_state.r), weigh(&final_state.t))
}

/// Largest `|1 - Σ_o (P_r + P_t)[o][c]|` over incident states `c`.
pub fn unitarity_defect(p_r: &DMatrix<f64>, p_t: &DMatrix<f64>) -> f64 {
    (0..p_r.ncols())
        .map(|c| (1.0 - p_r.column(c).sum() - p_t.column(c).sum()).abs())
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScatteringRecord {
    pub params: ModelParams,
    pub energy: f64,
    pub channels: ChannelSet,
    /// Amplitudes at the left edge of the domain.
    pub amplitudes: AmplitudeMatrices,
    pub p_r: DMatrix<f64>,
    pub p_t: DMatrix<f64>,
    pub unitarity_defect: f64,
    /// `None` for solvers that do not integrate an ODE.
    pub report: Option<IntegrationReport>,
}

impl ScatteringRecord {
    pub fn from_amplitudes(
        params: &ModelParams,
        channels: ChannelSet,
        amplitudes: AmplitudeMatrices,
        report: Option<IntegrationReport>,
    ) -> Self {
        let (p_r, p_t) = probabilities(&amplitudes, &channels);
        let unitarity_defect = unitarity_defect(&p_r, &p_t);
        Self {
            params: params.clone(),
            energy: channels.energy,
            channels,
            amplitudes,
            p_r,
            p_t,
            unitarity_defect,
            report,
        }
    }

    pub fn suspect(&self) -> bool {
        !(self.unitarity_defect <= SUSPECT_THRESHOLD)
    }

    /// Transmission from `(from_channel, from_spin)` into `(to_channel, to_spin)`.
    pub fn transmission(&self, from: (usize, Spin), to: (usize, Spin)) -> f64 {
        let c = self.channels.composite(from.0, from.1);
        let o = self.channels.composite(to.0, to.1);
        self.p_t[(o, c)]
    }

    pub fn reflection(&self, from: (usize, Spin), to: (usize, Spin)) -> f64 {
        let c = self.channels.composite(from.0, from.1);
        let o = self.channels.composite(to.0, to.1);
        self.p_r[(o, c)]
    }

    /// Total transmission out of one incident composite state.
    pub fn total_transmission(&self, from: (usize, Spin)) -> f64 {
        self.p_t.column(self.channels.composite(from.0, from.1)).sum()
    }
}

/// Solves the scattering problem at total energy `energy`.
pub fn solve_amplitudes(energy: f64, params: &ModelParams, config: &IntegratorConfig) -> Result<ScatteringRecord> {
    params.validate()?;
    let channels = open_channels(params, energy)?;
    let domain = integration_domain(params);
    let dim = channels.dim();

    let start = AmplitudeMatrices::free(dim, domain.x_right);
    let mut sys = AmplitudeSystem::new(&channels, params);
    // steps end on the kinks of v(x) so none straddles one
    let (y, report) = integrate_with_stops(
        |x, y, dy| sys.eval(x, y, dy),
        (domain.x_right, domain.x_left),
        &start.to_state(),
        config,
        &coupling_kinks(params),
    )?;
    let amplitudes = AmplitudeMatrices::from_state(&y, dim, domain.x_left);
    Ok(ScatteringRecord::from_amplitudes(params, channels, amplitudes, Some(report)))
}
