//! Shared helpers for the integration tests: an adaptive Gauss–Kronrod
//! quadrature used as an independent check of the closed-form overlaps.
#![allow(dead_code)]

use std::f64::consts::PI;

use cc_tunnel::model::{Convention, ModelParams};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// G7/K15 on one interval: (Kronrod estimate, |Kronrod - Gauss|).
fn gk15<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> (f64, f64) {
    let c = 0.5 * (lo + hi);
    let h = 0.5 * (hi - lo);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let s = f(c - h * XGK[i]) + f(c + h * XGK[i]);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

fn adapt<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, tol: f64, depth: u32) -> f64 {
    let (k, err) = gk15(f, lo, hi);
    if err <= tol || depth == 0 {
        return k;
    }
    let mid = 0.5 * (lo + hi);
    adapt(f, lo, mid, 0.5 * tol, depth - 1) + adapt(f, mid, hi, 0.5 * tol, depth - 1)
}

/// Adaptive quadrature of `f` over `[lo, hi]` to absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> f64 {
    if hi == lo {
        return 0.0;
    }
    adapt(&f, lo, hi, tol, 40)
}

/// Same, split at interior points where `f` jumps.
pub fn integrate_piecewise<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, cuts: &[f64], tol: f64) -> f64 {
    let mut pts: Vec<f64> = cuts.iter().copied().filter(|&c| c > lo && c < hi).collect();
    pts.push(lo);
    pts.push(hi);
    pts.sort_by(f64::total_cmp);
    pts.windows(2).map(|w| integrate(&f, w[0], w[1], tol / pts.len() as f64)).sum()
}

/// `φ_i(y) φ_j(y)` for the box eigenstates `sqrt(2/d) sin(nπy/d)`, continued
/// outside `[0, d]`.
pub fn mode_product(i: usize, j: usize, d: f64, y: f64) -> f64 {
    (2.0 / d) * (i as f64 * PI * y / d).sin() * (j as f64 * PI * y / d).sin()
}

/// `W_ij(x)` by quadrature: `V0` times the number of barrier bands covering
/// each point of the well.
pub fn barrier_by_quadrature(i: usize, j: usize, x: f64, p: &ModelParams) -> f64 {
    let shift = -p.l + p.d / 2.0;
    let bands = [
        (2.0 * x - p.a + shift, 2.0 * x + p.a + shift),
        (-2.0 * x - p.a + shift, -2.0 * x + p.a + shift),
    ];
    let cover = |y: f64| bands.iter().filter(|&&(lo, hi)| lo <= y && y <= hi).count() as f64;
    let cuts: Vec<f64> = bands.iter().flat_map(|&(lo, hi)| [lo, hi]).collect();
    integrate_piecewise(|y| p.v0 * cover(y) * mode_product(i, j, p.d, y), 0.0, p.d, &cuts, 1e-13)
}

pub fn field_by_quadrature(i: usize, j: usize, x: f64, p: &ModelParams) -> f64 {
    let (lo, hi) = match p.convention {
        Convention::PaperCode => ((2.0 * (x - p.b)).max(p.l - p.d / 2.0), (2.0 * (x + p.b)).min(p.l + p.d / 2.0)),
        Convention::Derived => {
            let s = p.l - p.d / 2.0;
            ((2.0 * (x - p.b) - s).max(0.0), (2.0 * (x + p.b) - s).min(p.d))
        }
    };
    if hi <= lo {
        return 0.0;
    }
    integrate(|y| p.u * mode_product(i, j, p.d, y), lo, hi, 1e-13)
}
