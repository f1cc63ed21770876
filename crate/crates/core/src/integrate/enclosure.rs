//! Per-cell enclosures of `∫ f dg` from sampled values.
//!
//! Both `f` and `g` are interpolated by quartics through five equally spaced
//! nodes; the remaining samples measure the interpolation residual. Writing
//! `f = P_f + r_f`, `g = P_g + r_g` (with `r_g` zero at the cell ends),
//!
//! ```text
//! ∫ f dg = ∫ P_f dP_g + ∫ r_f dg - ∫ r_g P_f' dτ
//! ```
//!
//! so `|∫ f dg - ∫ P_f dP_g| ≤ R_f Δg + R_g ∫|P_f'|`. The result is
//! intersected with the Darboux bounds `[m Δg, M Δg]`.

use std::sync::LazyLock;

use crate::interval::Interval;

pub(crate) const N1: usize = 17;
pub(crate) const N2: usize = 9;

type Quartic = [f64; 5];

static VANDERMONDE_INV: LazyLock<[[f64; 5]; 5]> = LazyLock::new(|| {
    let mut a = [[0.0; 10]; 5];
    for (m, row) in a.iter_mut().enumerate() {
        let x = m as f64 / 4.0;
        for i in 0..5 {
            row[i] = x.powi(i as i32);
        }
        row[5 + m] = 1.0;
    }
    for col in 0..5 {
        let piv = (col..5).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        let p = a[col][col];
        for v in a[col].iter_mut() {
            *v /= p;
        }
        for r in 0..5 {
            if r != col {
                let factor = a[r][col];
                let pivot_row = a[col];
                for (v, pv) in a[r].iter_mut().zip(pivot_row) {
                    *v -= factor * pv;
                }
            }
        }
    }
    let mut inv = [[0.0; 5]; 5];
    for i in 0..5 {
        inv[i].copy_from_slice(&a[i][5..]);
    }
    inv
});

fn horner(a: &Quartic, x: f64) -> f64 {
    a.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// Quartic through every `(N-1)/4`-th sample, plus a residual bound
/// `max|r| + max|Δr|/2` over all samples.
pub(crate) fn fit<const N: usize>(ys: &[f64; N]) -> (Quartic, f64) {
    let step = (N - 1) / 4;
    let inv = &*VANDERMONDE_INV;
    let mut a = [0.0; 5];
    for (i, ai) in a.iter_mut().enumerate() {
        *ai = (0..5).map(|m| inv[i][m] * ys[m * step]).sum();
    }
    let (mut rmax, mut dmax, mut prev) = (0.0f64, 0.0f64, 0.0);
    for (k, &y) in ys.iter().enumerate() {
        let r = y - horner(&a, k as f64 / (N - 1) as f64);
        rmax = rmax.max(r.abs());
        if k > 0 {
            dmax = dmax.max((r - prev).abs());
        }
        prev = r;
    }
    (a, rmax + dmax / 2.0)
}

/// `∫₀¹ τ^i dP_g(τ)` for `i = 0..5`.
fn moments(b: &Quartic) -> Quartic {
    let mut m = [0.0; 5];
    for (i, mi) in m.iter_mut().enumerate() {
        *mi = (1..5).map(|j| b[j] * j as f64 / (i + j) as f64).sum();
    }
    m
}

/// Lower and upper bounds of `f` from samples: exact at the ends when the
/// samples are monotone, otherwise padded by half the largest step.
pub(crate) fn sample_bounds(fs: &[f64]) -> (f64, f64) {
    let n = fs.len();
    let (mut up, mut down) = (true, true);
    let (mut lo, mut hi, mut step) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
    for k in 0..n {
        lo = lo.min(fs[k]);
        hi = hi.max(fs[k]);
        if k > 0 {
            let d = fs[k] - fs[k - 1];
            up &= d >= 0.0;
            down &= d <= 0.0;
            step = step.max(d.abs());
        }
    }
    if up || down {
        (lo, hi)
    } else {
        (lo - step / 2.0, hi + step / 2.0)
    }
}

/// Fit of `g - g(lo)`, with the interpolation residuals at both ends.
fn fit_integrator<const N: usize>(gs: &[f64; N]) -> (Quartic, f64, (f64, f64)) {
    let shifted: [f64; N] = std::array::from_fn(|k| gs[k] - gs[0]);
    let (b, r) = fit(&shifted);
    (b, r, (shifted[0] - b[0], shifted[N - 1] - horner(&b, 1.0)))
}

/// Allowance for rounding in the fits and the moment sums.
fn rounding(fs: &[f64], mass: f64, poly: f64) -> f64 {
    let fmax = fs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    64.0 * f64::EPSILON * (poly.abs() + fmax * mass)
}

fn combine(poly: f64, err: f64, darboux: (f64, f64)) -> (f64, f64) {
    let lo = (poly - err).max(darboux.0);
    let hi = (poly + err).min(darboux.1);
    if lo <= hi {
        (lo, hi)
    } else {
        darboux
    }
}

/// Non-negative increment of sampled integrator values (tiny drops clamp to 0).
pub(crate) fn increment(g0: f64, g1: f64) -> f64 {
    (g1 - g0).max(0.0)
}

/// Bounds on `∫ f dg` over one cell from 17 equally spaced samples.
pub(crate) fn enclose1(fs: &[f64; N1], gs: &[f64; N1], range: Option<Interval>) -> (f64, f64) {
    let dg = increment(gs[0], gs[N1 - 1]);
    let (m, big_m) = match range {
        Some(r) => (r.lo, r.hi),
        None => sample_bounds(fs),
    };
    let darboux = (m * dg, big_m * dg);
    if dg == 0.0 {
        return (0.0, 0.0);
    }
    let (a, rf) = fit(fs);
    let (b, rg, ends) = fit_integrator(gs);
    let mom = moments(&b);
    let poly: f64 = (0..5).map(|i| a[i] * mom[i]).sum::<f64>() + fs[N1 - 1] * ends.1 - fs[0] * ends.0;
    let slope: f64 = (1..5).map(|i| i as f64 * a[i].abs()).sum();
    combine(poly, rf * dg + rg * slope + rounding(fs, dg, poly), darboux)
}

/// Bounds on `∬ f dg₁ dg₂` over a product cell from 9×9 samples
/// (`fs[k][l]` at `(τ_k, υ_l)`), plus the part of the width attributable to
/// each axis.
pub(crate) fn enclose2(
    fs: &[[f64; N2]; N2],
    g1s: &[f64; N2],
    g2s: &[f64; N2],
    range: Option<Interval>,
) -> ((f64, f64), (f64, f64)) {
    let dg1 = increment(g1s[0], g1s[N2 - 1]);
    let dg2 = increment(g2s[0], g2s[N2 - 1]);
    let mass = dg1 * dg2;
    let (m, big_m) = match range {
        Some(r) => (r.lo, r.hi),
        None => {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for k in 0..N2 {
                let (l1, h1) = sample_bounds(&fs[k]);
                let col: Vec<f64> = (0..N2).map(|l| fs[l][k]).collect();
                let (l2, h2) = sample_bounds(&col);
                lo = lo.min(l1).min(l2);
                hi = hi.max(h1).max(h2);
            }
            (lo, hi)
        }
    };
    if mass == 0.0 {
        return ((0.0, 0.0), (0.0, 0.0));
    }
    let darboux = (m * mass, big_m * mass);

    // fit along τ for each sampled υ, then along υ for each coefficient
    let mut rows = [[0.0; 5]; N2];
    let mut r_tau = 0.0f64;
    for l in 0..N2 {
        let col: [f64; N2] = std::array::from_fn(|k| fs[k][l]);
        let (c, r) = fit(&col);
        rows[l] = c;
        r_tau = r_tau.max(r);
    }
    let mut a = [[0.0; 5]; 5];
    let mut r_ups = 0.0f64;
    for i in 0..5 {
        let ys: [f64; N2] = std::array::from_fn(|l| rows[l][i]);
        let (c, _) = fit(&ys);
        a[i] = c;
    }
    for k in 0..N2 {
        let (_, r) = fit(&fs[k]);
        r_ups = r_ups.max(r);
    }
    let mut res = [[0.0; N2]; N2];
    for (k, row) in res.iter_mut().enumerate() {
        let tau = k as f64 / (N2 - 1) as f64;
        for (l, r) in row.iter_mut().enumerate() {
            let ups = l as f64 / (N2 - 1) as f64;
            let p: f64 = (0..5).rev().fold(0.0, |acc, i| acc * tau + horner(&a[i], ups));
            *r = fs[k][l] - p;
        }
    }
    let (mut rmax, mut dmax) = (0.0f64, 0.0f64);
    for k in 0..N2 {
        for l in 0..N2 {
            rmax = rmax.max(res[k][l].abs());
            if k > 0 {
                dmax = dmax.max((res[k][l] - res[k - 1][l]).abs());
            }
            if l > 0 {
                dmax = dmax.max((res[k][l] - res[k][l - 1]).abs());
            }
        }
    }
    let rf = rmax + dmax / 2.0;

    let (b1, rg1, e1s) = fit_integrator(g1s);
    let (b2, rg2, e2s) = fit_integrator(g2s);
    let mut m1 = moments(&b1);
    let mut m2 = moments(&b2);
    // fold the end residuals into the moments: ∫τ^i dg ≈ ∫τ^i dP_g + r_g(1) - [i = 0] r_g(0)
    for (i, (x, y)) in m1.iter_mut().zip(m2.iter_mut()).enumerate() {
        *x += e1s.1 - if i == 0 { e1s.0 } else { 0.0 };
        *y += e2s.1 - if i == 0 { e2s.0 } else { 0.0 };
    }
    let mut poly = 0.0;
    let mut slope1 = 0.0;
    let mut q = [0.0; 5];
    for i in 0..5 {
        for j in 0..5 {
            poly += a[i][j] * m1[i] * m2[j];
            slope1 += i as f64 * a[i][j].abs();
            q[j] += a[i][j] * m1[i];
        }
    }
    let slope2: f64 = (1..5).map(|j| j as f64 * q[j].abs()).sum();
    let e1 = r_tau * mass + rg1 * slope1 * dg2;
    let e2 = r_ups * mass + rg2 * slope2;
    let flat: Vec<f64> = fs.iter().flatten().copied().collect();
    let err = rf * mass + rg1 * slope1 * dg2 + rg2 * slope2 + rounding(&flat, mass, poly);
    (combine(poly, err, darboux), (e1, e2))
}
