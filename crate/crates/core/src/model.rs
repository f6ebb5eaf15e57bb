//! Problem parameters, internal-mode channels and the integration domain.
//!
//! Units follow the convention ħ = m = V0 = 1 by default but every constant
//! is carried explicitly. The relative coordinate is shifted so that the
//! infinite well occupies `[0, d]`; internal eigenfunctions are
//! `sqrt(2/d) sin(jπy/d)` with energies `ħ²j²π²/(m d²)`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Selects how the field window and the integration domain are built.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Convention {
    /// Reproduces the reference script: domain half-width
    /// `(2 max(a, b) + 2l + d)/4` and the field window taken in the
    /// unshifted interparticle distance.
    #[default]
    PaperCode,
    /// Field window expressed in the shifted coordinate and clamped to
    /// `[0, d]`; the domain is the smallest one outside which every
    /// coupling vanishes.
    Derived,
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Convention::PaperCode => f.write_str("paper-code"),
            Convention::Derived => f.write_str("derived"),
        }
    }
}

impl FromStr for Convention {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "paper-code" | "paper_code" => Ok(Convention::PaperCode),
            "derived" => Ok(Convention::Derived),
            other => Err(format!("unknown convention `{other}` (expected paper-code or derived)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    /// Barrier width.
    pub a: f64,
    /// Half-width of the field region (`f = u` for `|x1| <= b`).
    pub b: f64,
    /// Width of the binding well.
    pub d: f64,
    /// Mean interparticle distance.
    pub l: f64,
    /// Magnetic interaction strength.
    pub u: f64,
    pub v0: f64,
    pub m: f64,
    pub hbar: f64,
    /// Highest internal mode considered when counting open channels.
    pub n_max: usize,
    pub convention: Convention,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            a: 1.0,
            b: 1.0,
            d: 5.0,
            l: 5.0,
            u: 0.0,
            v0: 1.0,
            m: 1.0,
            hbar: 1.0,
            n_max: 7,
            convention: Convention::PaperCode,
        }
    }
}

impl ModelParams {
    pub fn new(a: f64, b: f64, d: f64, l: f64, u: f64) -> Self {
        Self { a, b, d, l, u, ..Self::default() }
    }

    pub fn with_convention(mut self, convention: Convention) -> Self {
        self.convention = convention;
        self
    }

    pub fn validate(&self) -> Result<()> {
        fn check(name: &'static str, value: f64, ok: bool, what: &str) -> Result<()> {
            if !value.is_finite() || !ok {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("{value} must be {what}"),
                });
            }
            Ok(())
        }
        check("a", self.a, self.a > 0.0, "positive")?;
        check("b", self.b, self.b >= 0.0, "non-negative")?;
        check("d", self.d, self.d > 0.0, "positive")?;
        check("l", self.l, self.l >= 0.0, "non-negative")?;
        check("u", self.u, self.u >= 0.0, "non-negative")?;
        check("v0", self.v0, self.v0 > 0.0, "positive")?;
        check("m", self.m, self.m > 0.0, "positive")?;
        check("hbar", self.hbar, self.hbar > 0.0, "positive")?;
        if self.n_max == 0 {
            return Err(Error::InvalidParameter {
                name: "n_max",
                reason: "must be at least 1".into(),
            });
        }
        Ok(())
    }

    /// Prefactor `4m/ħ²` multiplying the matrix elements in the channel equations.
    pub fn coupling_scale(&self) -> f64 {
        4.0 * self.m / (self.hbar * self.hbar)
    }
}

/// Energy of the `j`-th internal mode, `ħ²j²π²/(m d²)`.
pub fn channel_energy(params: &ModelParams, j: usize) -> f64 {
    debug_assert!(j >= 1, "internal modes are 1-based");
    let jf = j as f64;
    params.hbar * params.hbar * jf * jf * PI * PI / (params.m * params.d * params.d)
}

/// Centre-of-mass wave number of a channel with internal energy `epsilon`.
pub fn wave_number(params: &ModelParams, energy: f64, epsilon: f64) -> f64 {
    (2.0 / params.hbar) * (params.m * (energy - epsilon)).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub fn flipped(self) -> Spin {
        match self {
            Spin::Up => Spin::Down,
            Spin::Down => Spin::Up,
        }
    }

    fn offset(self) -> usize {
        match self {
            Spin::Up => 0,
            Spin::Down => 1,
        }
    }
}

impl FromStr for Spin {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "up" | "+" => Ok(Spin::Up),
            "down" | "-" => Ok(Spin::Down),
            other => Err(format!("unknown spin `{other}` (expected up or down)")),
        }
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Spin::Up => f.write_str("up"),
            Spin::Down => f.write_str("down"),
        }
    }
}

/// Open channels at one total energy.
///
/// Composite states are ordered spin-major: `c = spin * n_open + (j - 1)`,
/// so indices `0..n` are spin up and `n..2n` spin down.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelSet {
    pub energy: f64,
    pub epsilon: Vec<f64>,
    pub k: Vec<f64>,
}

impl ChannelSet {
    pub fn n_open(&self) -> usize {
        self.k.len()
    }

    pub fn dim(&self) -> usize {
        2 * self.n_open()
    }

    /// Composite index of `(channel, spin)`; `channel` is 1-based.
    pub fn composite(&self, channel: usize, spin: Spin) -> usize {
        assert!(
            (1..=self.n_open()).contains(&channel),
            "channel {channel} is not open (n_open = {})",
            self.n_open()
        );
        spin.offset() * self.n_open() + channel - 1
    }

    /// Inverse of [`ChannelSet::composite`].
    pub fn decompose(&self, c: usize) -> (usize, Spin) {
        let n = self.n_open();
        assert!(c < 2 * n, "composite index {c} out of range");
        if c < n {
            (c + 1, Spin::Up)
        } else {
            (c - n + 1, Spin::Down)
        }
    }

    /// Wave number of composite state `c` (both spins share the channel value).
    pub fn k_composite(&self, c: usize) -> f64 {
        self.k[c % self.n_open()]
    }

    pub fn composite_k(&self) -> Vec<f64> {
        (0..self.dim()).map(|c| self.k_composite(c)).collect()
    }
}

/// Channels `j <= n_max` with `ε_j < E`.
pub fn open_channels(params: &ModelParams, energy: f64) -> Result<ChannelSet> {
    let threshold = channel_energy(params, 1);
    if !(energy > threshold) {
        return Err(Error::NoOpenChannel { energy, threshold });
    }
    let mut epsilon = Vec::new();
    let mut k = Vec::new();
    for j in 1..=params.n_max {
        let eps = channel_energy(params, j);
        if eps >= energy {
            break;
        }
        epsilon.push(eps);
        k.push(wave_number(params, energy, eps));
    }
    Ok(ChannelSet { energy, epsilon, k })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub x_left: f64,
    pub x_right: f64,
}

impl Domain {
    pub fn width(&self) -> f64 {
        self.x_right - self.x_left
    }
}

pub fn integration_domain(params: &ModelParams) -> Domain {
    let ModelParams { a, b, d, l, .. } = *params;
    let x_right = match params.convention {
        Convention::PaperCode => (2.0 * a.max(b) + 2.0 * l + d) / 4.0,
        Convention::Derived => ((2.0 * a + 2.0 * l + d) / 4.0).max(b + (2.0 * l + d) / 4.0),
    };
    Domain { x_left: -x_right, x_right }
}
