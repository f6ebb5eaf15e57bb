//! Explicit adaptive Runge–Kutta of order 8 (Dormand–Prince 8(5,3)) for
//! complex first-order systems.
//!
//! Error control follows Hairer's DOP853: the 5th- and 3rd-order embedded
//! estimates are blended as `err5² / (err5² + 0.01 err3²)`, scaled per
//! component by `atol + rtol * max(|y_old|, |y_new|)` and measured in the RMS
//! norm. Steps are rescaled by `err^(-1/8)` with safety 0.9, growth capped at
//! 6 and shrink at 1/3 per step. The magnitude of every step is bounded by
//! `max_step`, and integration runs in either direction.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    #[serde(default)]
    pub initial_step: Option<f64>,
    pub max_evals: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            atol: 1e-10,
            max_step: 0.3,
            initial_step: None,
            max_evals: 5_000_000,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &'static str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter { name, reason: format!("{v} must be positive") })
            }
        };
        positive("rtol", self.rtol)?;
        positive("atol", self.atol)?;
        positive("max_step", self.max_step)?;
        if let Some(h) = self.initial_step {
            positive("initial_step", h)?;
        }
        if self.max_evals == 0 {
            return Err(Error::InvalidParameter { name: "max_evals", reason: "must be at least 1".into() });
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IntegrationReport {
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub rhs_evals: usize,
    pub final_step: f64,
}

const SAFE: f64 = 0.9;
const FAC_MIN: f64 = 0.333;
const FAC_MAX: f64 = 6.0;
const EXPO: f64 = 1.0 / 8.0;

/// Integrates `y' = rhs(x, y)` from `span.0` to `span.1`.
///
/// `rhs(x, y, dydx)` writes the derivative into `dydx`.
pub fn integrate<F>(
    rhs: F,
    span: (f64, f64),
    initial: &[Complex64],
    config: &IntegratorConfig,
) -> Result<(Vec<Complex64>, IntegrationReport)>
where
    F: FnMut(f64, &[Complex64], &mut [Complex64]),
{
    integrate_with_stops(rhs, span, initial, config, &[])
}

/// Like [`integrate`], but lands a step exactly on every point of `stops`
/// inside the span. Use it where the right-hand side has kinks: a step that
/// straddles one fools the embedded error estimate.
pub fn integrate_with_stops<F>(
    mut rhs: F,
    span: (f64, f64),
    initial: &[Complex64],
    config: &IntegratorConfig,
    stops: &[f64],
) -> Result<(Vec<Complex64>, IntegrationReport)>
where
    F: FnMut(f64, &[Complex64], &mut [Complex64]),
{
    config.validate()?;
    let (x0, x_end) = span;
    if x0 == x_end || !x0.is_finite() || !x_end.is_finite() {
        return Err(Error::InvalidParameter {
            name: "span",
            reason: format!("({x0}, {x_end}) must be finite and non-degenerate"),
        });
    }
    let dir = (x_end - x0).signum();
    // interior stops in travel order, then the end point
    let mut targets: Vec<f64> = stops
        .iter()
        .copied()
        .filter(|&s| s.is_finite() && (s - x0) * dir > 0.0 && (x_end - s) * dir > 0.0)
        .collect();
    targets.sort_by(|a, b| ((a - b) * dir).total_cmp(&0.0));
    targets.push(x_end);
    // stops closer than the step-size floor would force an underflow
    let floor = |x: f64| 16.0 * f64::EPSILON * x.abs().max(1.0);
    let mut kept: Vec<f64> = Vec::with_capacity(targets.len());
    let mut prev = x0;
    for (i, &t) in targets.iter().enumerate() {
        let is_end = i + 1 == targets.len();
        if is_end {
            if let Some(last) = kept.last() {
                if (t - last).abs() <= floor(t) {
                    kept.pop();
                }
            }
            kept.push(t);
        } else if (t - prev).abs() > floor(t) {
            kept.push(t);
            prev = t;
        }
    }
    let targets = kept;
    let mut target_idx = 0;
    let n = initial.len();
    let mut report = IntegrationReport::default();

    let mut y = initial.to_vec();
    let mut k = vec![vec![Complex64::default(); n]; 12];
    let mut y_stage = vec![Complex64::default(); n];
    let mut y_new = vec![Complex64::default(); n];
    let mut k_last = vec![Complex64::default(); n];

    let mut x = x0;
    rhs(x, &y, &mut k[0]);
    report.rhs_evals += 1;

    let span_len = (x_end - x0).abs();
    let mut h = match config.initial_step {
        Some(h0) => h0.min(config.max_step).min(span_len),
        None => {
            let h0 = initial_step(&mut rhs, x, &y, &k[0], dir, config, span_len);
            report.rhs_evals += 1;
            h0
        }
    } * dir;

    let mut last_rejected = false;

    loop {
        if report.rhs_evals + 12 > config.max_evals {
            return Err(Error::MaxEvalsExceeded { x, max_evals: config.max_evals });
        }
        let target = targets[target_idx];
        let mut last = false;
        if (x + 1.01 * h - target) * dir >= 0.0 {
            h = target - x;
            last = true;
        }
        if h.abs() <= 16.0 * f64::EPSILON * x.abs().max(1.0) {
            return Err(Error::StepSizeUnderflow { x, h });
        }

        // stages 2..=12
        for s in 1..12 {
            let row = A[s - 1];
            for i in 0..n {
                let mut acc = Complex64::default();
                for (j, &aij) in row.iter().enumerate().take(s) {
                    if aij != 0.0 {
                        acc += k[j][i] * aij;
                    }
                }
                y_stage[i] = y[i] + acc * h;
            }
            rhs(x + C[s] * h, &y_stage, &mut k[s]);
        }
        report.rhs_evals += 11;

        let mut err5 = 0.0;
        let mut err3 = 0.0;
        for i in 0..n {
            let mut sb = Complex64::default();
            let mut e5 = Complex64::default();
            for s in 0..12 {
                sb += k[s][i] * B[s];
                e5 += k[s][i] * ER[s];
            }
            y_new[i] = y[i] + sb * h;
            let sk = config.atol + config.rtol * y[i].norm().max(y_new[i].norm());
            let e3 = sb - k[0][i] * BHH[0] - k[8][i] * BHH[1] - k[11][i] * BHH[2];
            err5 += (e5.norm() / sk).powi(2);
            err3 += (e3.norm() / sk).powi(2);
        }
        let mut deno = err5 + 0.01 * err3;
        if deno <= 0.0 {
            deno = 1.0;
        }
        let err = h.abs() * err5 * (1.0 / (deno * n.max(1) as f64)).sqrt();

        if !err.is_finite() {
            report.rejected_steps += 1;
            last_rejected = true;
            h *= 0.1;
            continue;
        }

        let fac11 = err.powf(EXPO);
        let fac = (fac11 / SAFE).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
        let mut h_new = h / fac;

        if err <= 1.0 {
            report.accepted_steps += 1;
            rhs(x + h, &y_new, &mut k_last);
            report.rhs_evals += 1;
            if y_new.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::NonFinite { x: x + h });
            }
            std::mem::swap(&mut y, &mut y_new);
            std::mem::swap(&mut k[0], &mut k_last);
            report.final_step = h;
            if last {
                x = target;
                target_idx += 1;
                if target_idx == targets.len() {
                    break;
                }
            } else {
                x += h;
            }
            if last_rejected {
                h_new = dir * h_new.abs().min(h.abs());
            }
            last_rejected = false;
        } else {
            h_new = h / (1.0 / FAC_MIN).min(fac11 / SAFE);
            report.rejected_steps += 1;
            last_rejected = true;
        }
        h = dir * h_new.abs().min(config.max_step);
    }
    debug_assert_eq!(x, x_end);
    Ok((y, report))
}

fn initial_step<F>(
    rhs: &mut F,
    x: f64,
    y: &[Complex64],
    f0: &[Complex64],
    dir: f64,
    config: &IntegratorConfig,
    span_len: f64,
) -> f64
where
    F: FnMut(f64, &[Complex64], &mut [Complex64]),
{
    let sk: Vec<f64> = y.iter().map(|v| config.atol + config.rtol * v.norm()).collect();
    let dnf: f64 = f0.iter().zip(&sk).map(|(f, s)| (f.norm() / s).powi(2)).sum();
    let dny: f64 = y.iter().zip(&sk).map(|(v, s)| (v.norm() / s).powi(2)).sum();
    let hmax = config.max_step.min(span_len);
    let mut h = if dnf <= 1e-10 || dny <= 1e-10 { 1e-6 } else { (dny / dnf).sqrt() * 0.01 };
    h = h.min(hmax);

    let y1: Vec<Complex64> = y.iter().zip(f0).map(|(v, f)| v + f * (h * dir)).collect();
    let mut f1 = vec![Complex64::default(); y.len()];
    rhs(x + h * dir, &y1, &mut f1);
    let der2 = f1
        .iter()
        .zip(f0)
        .zip(&sk)
        .map(|((a, b), s)| ((a - b).norm() / s).powi(2))
        .sum::<f64>()
        .sqrt()
        / h;
    let der12 = der2.max(dnf.sqrt());
    let h1 = if der12 <= 1e-15 { (h * 1e-3).max(1e-6) } else { (0.01 / der12).powf(1.0 / 8.0) };
    (100.0 * h).min(h1).min(hmax)
}

// Dormand–Prince 8(5,3) tableau (Hairer, Nørsett & Wanner).
const C: [f64; 12] = [
    0.0,
    0.526001519587677318785587544488E-01,
    0.789002279381515978178381316732E-01,
    0.118350341907227396726757197510E+00,
    0.281649658092772603273242802490E+00,
    0.333333333333333333333333333333E+00,
    0.25E+00,
    0.307692307692307692307692307692E+00,
    0.651282051282051282051282051282E+00,
    0.6E+00,
    0.857142857142857142857142857142E+00,
    1.0,
];

const A: [[f64; 11]; 11] = [
    [5.26001519587677318785587544488E-2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.97250569845378994544595329183E-2, 5.91751709536136983633785987549E-2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [2.95875854768068491816892993775E-2, 0.0, 8.87627564304205475450678981324E-2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [
        2.41365134159266685502369798665E-1,
        0.0,
        -8.84549479328286085344864962717E-1,
        9.24834003261792003115737966543E-1,
        0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
    ],
    [
        3.7037037037037037037037037037E-2,
        0.0,
        0.0,
        1.70828608729473871279604482173E-1,
        1.25467687566822425016691814123E-1,
        0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
    ],
    [
        3.7109375E-2,
        0.0,
        0.0,
        1.70252211019544039314978060272E-1,
        6.02165389804559606850219397283E-2,
        -1.7578125E-2,
        0.0, 0.0, 0.0, 0.0, 0.0,
    ],
    [
        3.70920001185047927108779319836E-2,
        0.0,
        0.0,
        1.70383925712239993810214054705E-1,
        1.07262030446373284651809199168E-1,
        -1.53194377486244017527936158236E-2,
        8.27378916381402288758473766002E-3,
        0.0, 0.0, 0.0, 0.0,
    ],
    [
        6.24110958716075717114429577812E-1,
        0.0,
        0.0,
        -3.36089262944694129406857109825E0,
        -8.68219346841726006818189891453E-1,
        2.75920996994467083049415600797E1,
        2.01540675504778934086186788979E1,
        -4.34898841810699588477366255144E1,
        0.0, 0.0, 0.0,
    ],
    [
        4.77662536438264365890433908527E-1,
        0.0,
        0.0,
        -2.48811461997166764192642586468E0,
        -5.90290826836842996371446475743E-1,
        2.12300514481811942347288949897E1,
        1.52792336328824235832596922938E1,
        -3.32882109689848629194453265587E1,
        -2.03312017085086261358222928593E-2,
        0.0, 0.0,
    ],
    [
        -9.3714243008598732571704021658E-1,
        0.0,
        0.0,
        5.18637242884406370830023853209E0,
        1.09143734899672957818500254654E0,
        -8.14978701074692612513997267357E0,
        -1.85200656599969598641566180701E1,
        2.27394870993505042818970056734E1,
        2.49360555267965238987089396762E0,
        -3.0467644718982195003823669022E0,
        0.0,
    ],
    [
        2.27331014751653820792359768449E0,
        0.0,
        0.0,
        -1.05344954667372501984066689879E1,
        -2.00087205822486249909675718444E0,
        -1.79589318631187989172765950534E1,
        2.79488845294199600508499808837E1,
        -2.85899827713502369474065508674E0,
        -8.87285693353062954433549289258E0,
        1.23605671757943030647266201528E1,
        6.43392746015763530355970484046E-1,
    ],
];

const B: [f64; 12] = [
    5.42937341165687622380535766363E-2,
    0.0,
    0.0,
    0.0,
    0.0,
    4.45031289275240888144113950566E0,
    1.89151789931450038304281599044E0,
    -5.8012039600105847814672114227E0,
    3.1116436695781989440891606237E-1,
    -1.52160949662516078556178806805E-1,
    2.01365400804030348374776537501E-1,
    4.47106157277725905176885569043E-2,
];

const BHH: [f64; 3] = [
    0.244094488188976377952755905512E+00,
    0.733846688281611857341361741547E+00,
    0.220588235294117647058823529412E-01,
];

const ER: [f64; 12] = [
    0.1312004499419488073250102996E-01,
    0.0,
    0.0,
    0.0,
    0.0,
    -0.1225156446376204440720569753E+01,
    -0.4957589496572501915214079952E+00,
    0.1664377182454986536961530415E+01,
    -0.3503288487499736816886487290E+00,
    0.3341791187130174790297318841E+00,
    0.8192320648511571246570742613E-01,
    -0.2235530786388629525884427845E-01,
];
