//! Independent reference solutions.
//!
//! * [`transfer_matrix_solve`]: the same coupled-channel problem with the
//!   coupling replaced by a piecewise-constant approximation. Each segment is
//!   diagonalized exactly and the log-derivative matrix `Y = ψ' ψ⁻¹` is
//!   carried from the right edge (pure outgoing wave, `Y = iK`) to the left.
//!   The Riccati form is a ratio, so evanescent segments never overflow.
//! * [`analytic_single_barrier`]: textbook rectangular barrier.
//! * [`larmor_flip_analytic`]: spin precession in a uniform field, no barrier.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matelem::{assemble_coupling, coupling_kinks};
use crate::model::{integration_domain, open_channels, Convention, Domain, ModelParams};
use crate::vra::{AmplitudeMatrices, ScatteringRecord};

pub const DEFAULT_SEGMENTS: usize = 8000;

/// Floor on the segments spanning one smooth piece of the coupling.
pub const MIN_SEGMENTS_PER_PIECE: usize = 16;

/// Eigenvalues below this magnitude use the linear solution `c1 + c2 x`.
const DEGENERATE_EIGENVALUE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct Segmentation {
    breakpoints: Vec<f64>,
}

impl Segmentation {
    pub fn uniform(domain: Domain, n_segments: usize) -> Self {
        let n = n_segments.max(1);
        let w = domain.width();
        let mut breakpoints: Vec<f64> = (0..=n).map(|i| domain.x_left + w * i as f64 / n as f64).collect();
        breakpoints[n] = domain.x_right;
        Self { breakpoints }
    }

    /// Uniform partition of the integration domain with extra breakpoints at
    /// every kink of the coupling, so each segment samples a smooth piece.
    /// Pieces between neighbouring kinks that the uniform grid would cover
    /// with fewer than [`MIN_SEGMENTS_PER_PIECE`] segments are subdivided
    /// evenly; for small particles the coupling ramps over such short pieces.
    pub fn for_params(params: &ModelParams, n_segments: usize) -> Self {
        let domain = integration_domain(params);
        let mut seg = Self::uniform(domain, n_segments);
        let tol = 1e-12 * domain.width().max(1.0);
        let h = domain.width() / n_segments.max(1) as f64;
        let mut kinks: Vec<f64> = coupling_kinks(params)
            .into_iter()
            .filter(|&x| x > domain.x_left + tol && x < domain.x_right - tol)
            .collect();
        kinks.extend([domain.x_left, domain.x_right]);
        kinks.sort_by(f64::total_cmp);
        kinks.dedup_by(|a, b| (*a - *b).abs() <= tol);
        for w in kinks.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            seg.breakpoints.push(lo);
            if hi - lo < MIN_SEGMENTS_PER_PIECE as f64 * h {
                let k = MIN_SEGMENTS_PER_PIECE;
                seg.breakpoints.extend((1..k).map(|i| lo + (hi - lo) * i as f64 / k as f64));
            }
        }
        seg.breakpoints.sort_by(f64::total_cmp);
        seg.breakpoints.dedup_by(|a, b| (*a - *b).abs() <= tol);
        seg
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn n_segments(&self) -> usize {
        self.breakpoints.len() - 1
    }

    pub fn domain(&self) -> Domain {
        Domain {
            x_left: self.breakpoints[0],
            x_right: *self.breakpoints.last().unwrap(),
        }
    }
}

/// Solution of `φ'' = -λ φ` propagated backwards by `h`:
/// `φ(x) = C φ(x+h) - S φ'(x+h)`, `φ'(x) = λ S φ(x+h) + C φ'(x+h)`.
fn backward_propagator(lambda: f64, h: f64) -> (f64, f64) {
    if lambda.abs() < DEGENERATE_EIGENVALUE {
        (1.0, h)
    } else if lambda > 0.0 {
        let q = lambda.sqrt();
        ((q * h).cos(), (q * h).sin() / q)
    } else {
        let q = (-lambda).sqrt();
        ((q * h).cosh(), (q * h).sinh() / q)
    }
}

fn to_complex(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    m.map(|v| Complex64::new(v, 0.0))
}

fn solve_right(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>, x: f64) -> Result<DMatrix<Complex64>> {
    a.clone().lu().solve(b).ok_or(Error::Singular { x })
}

/// Piecewise-constant coupled-channel solve over `seg`.
pub fn transfer_matrix_solve(energy: f64, params: &ModelParams, seg: &Segmentation) -> Result<ScatteringRecord> {
    params.validate()?;
    let channels = open_channels(params, energy)?;
    let dim = channels.dim();
    let k = channels.composite_k();
    let k2 = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(dim, k.iter().map(|v| v * v)));
    let ik = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(dim, k.iter().map(|&v| Complex64::new(0.0, v))));

    let bp = seg.breakpoints();
    let mut y = ik.clone();
    let mut g = DMatrix::<Complex64>::identity(dim, dim);

    for w in bp.windows(2).rev() {
        let (lo, hi) = (w[0], w[1]);
        let h = hi - lo;
        let v = assemble_coupling(0.5 * (lo + hi), &channels, params).into_inner();
        let eig = SymmetricEigen::new(&k2 - &v);
        let u = to_complex(&eig.eigenvectors);
        let ut = u.transpose();

        let yt = &ut * &y * &u;
        let mut p = DMatrix::<Complex64>::zeros(dim, dim);
        let mut dp = DMatrix::<Complex64>::zeros(dim, dim);
        for i in 0..dim {
            let (c, s) = backward_propagator(eig.eigenvalues[i], h);
            for j in 0..dim {
                p[(i, j)] = -yt[(i, j)] * s;
                dp[(i, j)] = yt[(i, j)] * c;
            }
            p[(i, i)] += c;
            dp[(i, i)] += eig.eigenvalues[i] * s;
        }
        let p = &u * p * &ut;
        let dp = &u * dp * &ut;
        // Y(lo) = dp p⁻¹, via pᵀ Yᵀ = dpᵀ
        y = solve_right(&p.transpose(), &dp.transpose(), lo)?.transpose();
        g = p * g;
    }

    let domain = seg.domain();
    let phase = |x: f64, sign: f64| {
        DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(dim, k.iter().map(|&kv| Complex64::from_polar(1.0, sign * kv * x))))
    };
    let ep_l = phase(domain.x_left, 1.0);
    let em_l = phase(domain.x_left, -1.0);
    let ep_r = phase(domain.x_right, 1.0);

    // ψ_L = E⁺ + E⁻ R and ψ'_L = iK (E⁺ - E⁻ R) = Y ψ_L
    let lhs = (&y + &ik) * &em_l;
    let rhs = (&ik - &y) * &ep_l;
    let r = solve_right(&lhs, &rhs, domain.x_left)?;
    let psi_l = &ep_l + &em_l * &r;
    let t = solve_right(&(g * ep_r), &psi_l, domain.x_left)?;

    let amplitudes = AmplitudeMatrices { r, t, x: domain.x_left };
    Ok(ScatteringRecord::from_amplitudes(params, channels, amplitudes, None))
}

/// Transmission probability of a rectangular barrier of `height` and
/// `width` for a particle of `mass` at kinetic energy `energy`.
pub fn analytic_single_barrier(energy: f64, mass: f64, height: f64, width: f64, hbar: f64) -> Result<f64> {
    if !(energy > 0.0) {
        return Err(Error::InvalidParameter { name: "energy", reason: format!("{energy} must be positive") });
    }
    let diff = height - energy;
    let t = if diff == 0.0 {
        1.0 / (1.0 + mass * height * width * width / (2.0 * hbar * hbar))
    } else if diff > 0.0 {
        let kappa = (2.0 * mass * diff).sqrt() / hbar;
        1.0 / (1.0 + height * height * (kappa * width).sinh().powi(2) / (4.0 * energy * diff))
    } else {
        let q = (2.0 * mass * -diff).sqrt() / hbar;
        1.0 / (1.0 + height * height * (q * width).sin().powi(2) / (4.0 * energy * -diff))
    };
    Ok(t)
}

/// Length of field traversed by the centre of mass in each convention.
pub fn larmor_effective_length(params: &ModelParams) -> f64 {
    match params.convention {
        Convention::Derived => 2.0 * params.b,
        Convention::PaperCode => params.b + params.l + params.d / 2.0,
    }
}

/// Spin-flip probability after precessing through a field region of length
/// `l_eff`, ignoring the barrier and edge reflections.
pub fn larmor_flip_analytic(energy: f64, params: &ModelParams, l_eff: f64) -> Result<f64> {
    let channels = open_channels(params, energy)?;
    if channels.n_open() != 1 {
        return Err(Error::LarmorDomain(format!("{} channels open; the formula covers one", channels.n_open())));
    }
    let excess = energy - channels.epsilon[0];
    if params.u >= excess {
        return Err(Error::LarmorDomain(format!("u = {} is not below E - ε1 = {excess}", params.u)));
    }
    let k = channels.k[0];
    let shift = 4.0 * params.m * params.u / (params.hbar * params.hbar);
    let k_plus = (k * k + shift).sqrt();
    let k_minus = (k * k - shift).sqrt();
    Ok((0.5 * (k_plus - k_minus) * l_eff).sin().powi(2))
}
