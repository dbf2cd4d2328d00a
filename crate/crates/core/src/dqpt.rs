//! Quench analysis for the two-band model: boundary partition function,
//! free-energy density, Fisher zeros, critical modes and times, the rate
//! function, and the dynamical winding number.
//!
//! Everything here runs on the closed forms of the mode overlap
//! `kappa_k = d^i . d^f / (d^i d^f)`; the spectral-sum equivalents from
//! `dynamics` serve as oracles in the test suites.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::principal_sqrt;
use crate::ssh::{bloch_vector, BlochVector, MomentumGrid, SshParams};

const I: C64 = C64::new(0.0, 1.0);

/// |Re kappa| below this counts as an imaginary-axis (aperiodic) mode.
pub const RE_KAPPA_TOL: f64 = 1e-10;

/// Uniform time samples on [0, t_max].
#[derive(Debug, Clone)]
pub struct TimeGrid {
    ts: Vec<f64>,
}

impl TimeGrid {
    /// `n` samples including both 0 and `t_max`.
    pub fn uniform(t_max: f64, n: usize) -> Self {
        assert!(n >= 2 && t_max > 0.0);
        let ts = (0..n).map(|j| t_max * j as f64 / (n - 1) as f64).collect();
        TimeGrid { ts }
    }

    pub fn len(&self) -> usize {
        self.ts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ts.is_empty()
    }

    pub fn ts(&self) -> &[f64] {
        &self.ts
    }

    pub fn dt(&self) -> f64 {
        self.ts[1] - self.ts[0]
    }

    pub fn t_max(&self) -> f64 {
        *self.ts.last().unwrap()
    }
}

/// A sudden quench `initial -> final_` analyzed over momentum and time grids.
#[derive(Debug, Clone)]
pub struct QuenchSpec {
    pub initial: SshParams,
    pub final_: SshParams,
    pub grid: MomentumGrid,
    pub times: TimeGrid,
}

/// Per-mode quench data: the overlap scalar and the post-quench energy.
#[derive(Debug, Clone, Copy)]
pub struct ModeOverlap {
    pub k: f64,
    pub kappa: C64,
    pub d_f: C64,
}

/// `kappa = (dx^i dx^f + dy^i dy^f + dz^i dz^f) / (d^i d^f)`.
pub fn kappa(i: &BlochVector, f: &BlochVector) -> Result<C64> {
    if i.d.norm() <= 1e-12 {
        return Err(Error::ExceptionalPoint { magnitude: i.d.norm() });
    }
    if f.d.norm() <= 1e-12 {
        return Err(Error::ExceptionalPoint { magnitude: f.d.norm() });
    }
    Ok((i.dx * f.dx + i.dy * f.dy + i.dz * f.dz) / (i.d * f.d))
}

/// `kappa` with the boundary-mode limit: when both the numerator and
/// `d^i d^f` vanish (e.g. the initial spectrum closes at k = pi while the
/// dot product has a double root there), the limit of the ratio is zero
/// and is returned as such instead of an error.
fn kappa_at(initial: SshParams, final_: SshParams, k: f64) -> Result<C64> {
    let vi = bloch_vector(initial, k);
    let vf = bloch_vector(final_, k);
    let num = vi.dx * vf.dx + vi.dy * vf.dy + vi.dz * vf.dz;
    let den = vi.d * vf.d;
    if den.norm() <= 1e-12 {
        if num.norm() <= 1e-10 {
            return Ok(C64::new(0.0, 0.0));
        }
        return Err(Error::ExceptionalPoint { magnitude: den.norm() });
    }
    Ok(num / den)
}

/// Assemble the per-mode overlap data at momentum `k`.
pub fn mode_overlap(spec: &QuenchSpec, k: f64) -> Result<ModeOverlap> {
    let kap = kappa_at(spec.initial, spec.final_, k)?;
    let d_f = bloch_vector(spec.final_, k).d;
    Ok(ModeOverlap { k, kappa: kap, d_f })
}

/// Boundary partition function of one mode at complex time `z`:
/// `Z_k(z) = (1/2) e^{-z d_f} (1 - kappa) + (1/2) e^{z d_f} (1 + kappa)`.
pub fn mode_partition(m: &ModeOverlap, z: C64) -> C64 {
    let one = C64::new(1.0, 0.0);
    let half = C64::new(0.5, 0.0);
    half * (-z * m.d_f).exp() * (one - m.kappa) + half * (z * m.d_f).exp() * (one + m.kappa)
}

/// Loschmidt amplitude of the mode ground state at real time `t`,
/// `G_k(t) = cos(d_f t) + i kappa sin(d_f t)` (= `mode_partition` at `z = it`).
pub fn amplitude_closed(m: &ModeOverlap, t: f64) -> C64 {
    let a = m.d_f * t;
    a.cos() + I * m.kappa * a.sin()
}

/// Closed-form Loschmidt echo `L_k(t) = cos^2(d_f t) + kappa^2 sin^2(d_f t)`.
pub fn echo_closed(m: &ModeOverlap, t: f64) -> C64 {
    let a = m.d_f * t;
    let (c, s) = (a.cos(), a.sin());
    c * c + m.kappa * m.kappa * s * s
}

/// Free-energy density `f(z) = -(1/2pi) int_BZ ln Z_k(z) dk`, evaluated as
/// twice the [0, pi] half-zone integral with per-k continuity unwrapping
/// of the principal log.
pub fn free_energy_density(spec: &QuenchSpec, z: C64) -> Result<C64> {
    let logs = log_sum_over_grid(spec, |m| mode_partition(m, z))?;
    Ok(-logs / PI)
}

/// Integrate `ln g(mode)` over the half zone [0, pi] with k-continuity
/// unwrapping of the imaginary part. Midpoint rule on midpoint grids,
/// trapezoid otherwise.
fn log_sum_over_grid(spec: &QuenchSpec, g: impl Fn(&ModeOverlap) -> C64) -> Result<C64> {
    let ks = spec.grid.ks();
    let dk = spec.grid.dk();
    let two_pi = 2.0 * PI;
    let mut acc = C64::new(0.0, 0.0);
    let mut prev_im: Option<f64> = None;
    for (j, &k) in ks.iter().enumerate() {
        let m = mode_overlap(spec, k)?;
        let val = g(&m);
        if val.norm() <= 1e-13 {
            return Err(Error::LogSingular { k });
        }
        let mut lg = val.ln();
        if let Some(p) = prev_im {
            lg.im -= ((lg.im - p) / two_pi).round() * two_pi;
        }
        prev_im = Some(lg.im);
        let w = if spec.grid.is_midpoint() {
            1.0
        } else if j == 0 || j == ks.len() - 1 {
            0.5
        } else {
            1.0
        };
        acc += lg * w;
    }
    Ok(acc * dk)
}

/// One branch of Fisher zeros sampled over the momentum grid.
#[derive(Debug, Clone)]
pub struct FisherZeroCurve {
    pub l: i64,
    /// `(k, z_l(k))` pairs.
    pub samples: Vec<(f64, C64)>,
}

/// Fisher-zero branch `l`:
/// `z_l(k) = [ln|r| + i arg(r) + i(2l+1)pi] / (2 d_f)` with `r = (1-kappa)/(1+kappa)`.
pub fn fisher_zeros(spec: &QuenchSpec, l: i64) -> Result<FisherZeroCurve> {
    let one = C64::new(1.0, 0.0);
    let mut samples = Vec::with_capacity(spec.grid.len());
    for &k in spec.grid.ks() {
        let m = mode_overlap(spec, k)?;
        if (one + m.kappa).norm() <= 1e-12 {
            return Err(Error::DegenerateRatio { k });
        }
        let r = (one - m.kappa) / (one + m.kappa);
        let z = (C64::new(r.norm().ln(), r.arg() + (2 * l + 1) as f64 * PI))
            / (m.d_f * 2.0);
        samples.push((k, z));
    }
    Ok(FisherZeroCurve { l, samples })
}

/// Critical structure of a quench.
#[derive(Debug, Clone)]
pub struct CriticalSet {
    /// Isolated critical momenta (Re kappa = 0 with real d_f).
    pub modes: Vec<f64>,
    /// `(k_c, l, t_{c,l})` triples for the isolated modes.
    pub times: Vec<(f64, usize, f64)>,
    /// k-interval whose Fisher zeros all sit on the imaginary axis
    /// (Re kappa = 0 identically over the band); DQPTs are aperiodic there.
    pub aperiodic_band: Option<(f64, f64)>,
}

/// Find critical momenta: closed form for PT-symmetric -> PT-symmetric
/// quenches, sign-change bisection of Re kappa on the grid otherwise.
/// Bands with Re kappa identically zero are reported as `aperiodic_band`.
pub fn critical_modes(spec: &QuenchSpec) -> CriticalSet {
    let (qi, ei) = (spec.initial.q, spec.initial.eta);
    let (qf, ef) = (spec.final_.q, spec.final_.eta);
    let pt_to_pt =
        ei.abs() <= (1.0 - qi).abs() + 1e-12 && ef.abs() <= (1.0 - qf).abs() + 1e-12;

    let mut modes: Vec<f64> = Vec::new();
    let mut band: Option<(f64, f64)> = None;

    if pt_to_pt && (qi + qf).abs() > 1e-12 {
        // 1 + q q' - eta eta' + (q + q') cos k = 0
        let c0 = -(1.0 + qi * qf - ei * ef) / (qi + qf);
        if c0.abs() < 1.0 - 1e-12 {
            modes.push(c0.acos());
        } else if (c0.abs() - 1.0).abs() <= 1e-12 {
            modes.push(if c0 < 0.0 { PI } else { 0.0 });
        }
    } else {
        let ks = spec.grid.ks();
        let re_k: Vec<Option<f64>> = ks
            .iter()
            .map(|&k| kappa_at(spec.initial, spec.final_, k).ok().map(|v| v.re))
            .collect();
        // longest run of |Re kappa| <= tol -> aperiodic band
        let mut run_start: Option<usize> = None;
        let mut best: Option<(usize, usize)> = None;
        for j in 0..=re_k.len() {
            let is_zero = j < re_k.len()
                && matches!(re_k[j], Some(v) if v.abs() <= RE_KAPPA_TOL);
            match (is_zero, run_start) {
                (true, None) => run_start = Some(j),
                (false, Some(s)) => {
                    if j - s >= 3 && best.map_or(true, |(a, b)| j - s > b - a) {
                        best = Some((s, j - 1));
                    }
                    run_start = None;
                }
                _ => {}
            }
        }
        if let Some((a, b)) = best {
            let hi = if b == ks.len() - 1 { PI } else { ks[b] };
            let lo = if a == 0 { 0.0 } else { ks[a] };
            band = Some((lo, hi));
        }
        // sign changes between adjacent strictly-nonzero samples
        for j in 1..ks.len() {
            if let (Some(a), Some(b)) = (re_k[j - 1], re_k[j]) {
                if a.abs() > RE_KAPPA_TOL && b.abs() > RE_KAPPA_TOL && a * b < 0.0 {
                    let f = |k: f64| {
                        kappa_at(spec.initial, spec.final_, k)
                            .map(|v| v.re)
                            .unwrap_or(f64::NAN)
                    };
                    if let Some(kc) = bisect_root(&f, ks[j - 1], ks[j], 1e-12) {
                        modes.push(kc);
                    }
                }
            }
        }
        // isolated boundary modes at the zone edges
        for &k in &[0.0, PI] {
            if let Ok(v) = kappa_at(spec.initial, spec.final_, k) {
                let edge_in_band =
                    band.map_or(false, |(lo, hi)| k >= lo - 1e-9 && k <= hi + 1e-9);
                if v.norm() <= RE_KAPPA_TOL && !edge_in_band {
                    modes.push(k);
                }
            }
        }
        modes.sort_by(|a, b| a.partial_cmp(b).unwrap());
        modes.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    }

    // critical times for each isolated mode with real post-quench energy
    let mut times = Vec::new();
    let t_max = spec.times.t_max();
    for &kc in &modes {
        if let Ok(m) = mode_overlap(spec, kc) {
            if m.d_f.im.abs() > 1e-10 {
                continue;
            }
            let l_max = ((t_max * m.d_f.re / PI).ceil() as usize).max(3);
            if let Ok(ts) = critical_times(&m, l_max) {
                for (l, t) in ts.into_iter().enumerate() {
                    if t <= t_max {
                        times.push((kc, l, t));
                    }
                }
            }
        }
    }

    CriticalSet { modes, times, aperiodic_band: band }
}

fn bisect_root(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> Option<f64> {
    let (mut fa, fb) = (f(a), f(b));
    if !fa.is_finite() || !fb.is_finite() || fa * fb > 0.0 {
        return None;
    }
    while b - a > tol {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if !fm.is_finite() {
            return None;
        }
        if fa * fm <= 0.0 {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    Some(0.5 * (a + b))
}

/// Critical times of one mode: `t_{c,l} = Theta/(2 d_f) + (pi/d_f)(l + 1/2)`
/// for `l = 0..=l_max`, with `Theta` the principal argument of
/// `(1-kappa)/(1+kappa)`.
///
/// Requires `d_f` real and `|(1-kappa)/(1+kappa)| = 1` (the mode's Fisher
/// zeros must sit on the imaginary axis).
pub fn critical_times(m: &ModeOverlap, l_max: usize) -> Result<Vec<f64>> {
    if m.d_f.im.abs() > 1e-10 || m.d_f.re <= 0.0 {
        return Err(Error::NotCritical { deviation: m.d_f.im.abs() });
    }
    let one = C64::new(1.0, 0.0);
    if (one + m.kappa).norm() <= 1e-12 {
        return Err(Error::DegenerateRatio { k: m.k });
    }
    let r = (one - m.kappa) / (one + m.kappa);
    let deviation = (r.norm() - 1.0).abs();
    if deviation > 1e-8 {
        return Err(Error::NotCritical { deviation });
    }
    let d = m.d_f.re;
    let t_theta = r.arg() / (2.0 * d);
    Ok((0..=l_max)
        .map(|l| t_theta + (PI / d) * (l as f64 + 0.5))
        .collect())
}

/// Echo zero crossings of one aperiodic mode (kappa purely imaginary):
/// times in [0, t_max] where the real closed-form echo changes sign.
pub fn echo_zero_times(m: &ModeOverlap, t_max: f64) -> Result<Vec<f64>> {
    if m.kappa.re.abs() > RE_KAPPA_TOL || m.d_f.im.abs() > 1e-10 {
        return Err(Error::NotCritical { deviation: m.kappa.re.abs() });
    }
    let y = m.kappa.im.abs();
    let d = m.d_f.re;
    if y <= 1e-12 || d <= 0.0 {
        return Ok(Vec::new());
    }
    // L = cos^2(dt) - y^2 sin^2(dt) = 0  <=>  tan(dt) = +-1/y
    let t0 = (1.0 / y).atan() / d;
    let mut out = Vec::new();
    let mut l = 0usize;
    loop {
        let base = PI * l as f64 / d;
        let a = base + t0;
        let b = base + PI / d - t0;
        if a > t_max && b > t_max {
            break;
        }
        if a <= t_max {
            out.push(a);
        }
        if b <= t_max && (b - a).abs() > 1e-12 {
            out.push(b);
        }
        l += 1;
    }
    Ok(out)
}

/// Rate function series `r(t) = -(1/pi) int_0^pi ln L_k(t) dk`.
#[derive(Debug, Clone)]
pub struct RateSeries {
    pub times: Vec<f64>,
    pub re_r: Vec<f64>,
    pub im_r: Vec<f64>,
}

/// Evaluate the rate function on the spec's grids from the closed-form
/// echo; per-time k-integrals run in parallel, each with sequential
/// continuity unwrapping in k.
pub fn rate_function(spec: &QuenchSpec) -> Result<RateSeries> {
    let modes: Vec<ModeOverlap> = spec
        .grid
        .ks()
        .iter()
        .map(|&k| mode_overlap(spec, k))
        .collect::<Result<_>>()?;
    let dk = spec.grid.dk();
    let midpoint = spec.grid.is_midpoint();
    let n = modes.len();
    let vals: Vec<Result<C64>> = spec
        .times
        .ts()
        .par_iter()
        .map(|&t| {
            let two_pi = 2.0 * PI;
            let mut acc = C64::new(0.0, 0.0);
            let mut prev_im: Option<f64> = None;
            for (j, m) in modes.iter().enumerate() {
                let val = echo_closed(m, t);
                if val.norm() <= 1e-13 {
                    return Err(Error::LogSingular { k: m.k });
                }
                let mut lg = val.ln();
                if let Some(p) = prev_im {
                    lg.im -= ((lg.im - p) / two_pi).round() * two_pi;
                }
                prev_im = Some(lg.im);
                let w = if midpoint || (j != 0 && j != n - 1) { 1.0 } else { 0.5 };
                acc += lg * w;
            }
            Ok(-acc * dk / PI)
        })
        .collect();
    let mut re_r = Vec::with_capacity(vals.len());
    let mut im_r = Vec::with_capacity(vals.len());
    for v in vals {
        let v = v?;
        re_r.push(v.re);
        im_r.push(v.im);
    }
    Ok(RateSeries { times: spec.times.ts().to_vec(), re_r, im_r })
}

/// Dynamical winding number series.
#[derive(Debug, Clone)]
pub struct WindingSeries {
    pub times: Vec<f64>,
    pub re_nu: Vec<f64>,
    /// False where the k-unwrapping hit an unclassifiable discontinuity
    /// (e.g. the sample sits at a critical time).
    pub flags: Vec<bool>,
}

/// Pancharatnam geometric phase of one mode at time `t`, principal branch:
/// `Phi_g = -i log(G/sqrt(L)) - Phi_d` with `Phi_d = -t <psi~|H_f|psi> = t d_f kappa`.
fn geometric_phase_at(spec: &QuenchSpec, k: f64, t: f64) -> Result<f64> {
    let m = mode_overlap(spec, k)?;
    let g = amplitude_closed(&m, t);
    let l = echo_closed(&m, t);
    if l.norm() <= 1e-300 {
        return Err(Error::EchoZero { t });
    }
    let total = -I * (g / principal_sqrt(l)).ln();
    let dynamical = m.d_f * m.kappa * t;
    Ok((total - dynamical).re)
}

/// `nu(t) = [Phi_g(pi, t) - Phi_g(0, t)] / 2pi` with Re Phi_g unwrapped
/// along k by nearest-branch continuation and recursive interval
/// bisection. Genuine discontinuities (branch jumps of sqrt(L) and the
/// quadrant structure of real echoes) are multiples of pi/2 and are
/// removed; any other unresolvable jump flags the time sample invalid.
pub fn winding_number(spec: &QuenchSpec) -> Result<WindingSeries> {
    // endpoint-inclusive k walk regardless of the spec's quadrature grid
    let m = spec.grid.len().max(64);
    let ks: Vec<f64> = (0..m).map(|j| PI * j as f64 / (m - 1) as f64).collect();
    let results: Vec<Result<(f64, bool)>> = spec
        .times
        .ts()
        .par_iter()
        .map(|&t| {
            let phi = |k: f64| geometric_phase_at(spec, k, t);
            let mut valid = true;
            let mut offset = 0.0;
            let phi0 = phi(ks[0])?;
            let mut prev = phi0;
            for j in 1..ks.len() {
                prev = unwrap_step(&phi, ks[j - 1], prev, ks[j], &mut offset, &mut valid, 0)?;
            }
            Ok(((prev - phi0) / (2.0 * PI), valid))
        })
        .collect();
    let mut re_nu = Vec::with_capacity(results.len());
    let mut flags = Vec::with_capacity(results.len());
    for r in results {
        let (v, ok) = r?;
        re_nu.push(v);
        flags.push(ok);
    }
    Ok(WindingSeries { times: spec.times.ts().to_vec(), re_nu, flags })
}

/// Continue the unwrapped phase from `(ka, pa)` to `kb`.
///
/// `offset` carries the accumulated correction so that
/// `unwrapped(k) = principal(k) + offset` along the walk. Jumps larger
/// than the continuity threshold trigger bisection; at interval
/// exhaustion the jump is snapped to its nearest pi/2 multiple (branch
/// artifact) and the residual is kept.
fn unwrap_step(
    phi: &impl Fn(f64) -> Result<f64>,
    ka: f64,
    pa: f64,
    kb: f64,
    offset: &mut f64,
    valid: &mut bool,
    depth: u32,
) -> Result<f64> {
    let two_pi = 2.0 * PI;
    let mut pb = phi(kb)? + *offset;
    let shift = ((pa - pb) / two_pi).round() * two_pi;
    pb += shift;
    *offset += shift;
    let jump = pb - pa;
    if jump.abs() <= 0.8 {
        return Ok(pb);
    }
    if kb - ka < 1e-9 || depth > 60 {
        let n_half = (jump / (PI / 2.0)).round();
        let residual = jump - n_half * (PI / 2.0);
        if residual.abs() > 0.3 {
            *valid = false;
        }
        *offset -= n_half * (PI / 2.0);
        return Ok(pa + residual);
    }
    let mid = 0.5 * (ka + kb);
    let pm = unwrap_step(phi, ka, pa, mid, offset, valid, depth + 1)?;
    unwrap_step(phi, mid, pm, kb, offset, valid, depth + 1)
}

/// Times where the centered second difference of `Re r` exceeds ten times
/// its median absolute value; detections within one grid step are merged.
pub fn detect_cusps(series: &RateSeries) -> Vec<f64> {
    let n = series.times.len();
    if n < 5 {
        return Vec::new();
    }
    let d2: Vec<f64> = (1..n - 1)
        .map(|j| (series.re_r[j + 1] - 2.0 * series.re_r[j] + series.re_r[j - 1]).abs())
        .collect();
    let mut sorted = d2.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = sorted[sorted.len() / 2];
    let threshold = 10.0 * median.max(1e-300);
    let dt = series.times[1] - series.times[0];
    let mut out: Vec<f64> = Vec::new();
    let mut j = 0;
    while j < d2.len() {
        if d2[j] > threshold {
            // take the peak of this contiguous run
            let mut best = j;
            let mut jj = j;
            while jj < d2.len() && d2[jj] > threshold {
                if d2[jj] > d2[best] {
                    best = jj;
                }
                jj += 1;
            }
            let t = series.times[best + 1];
            if out.last().map_or(true, |&p| t - p > dt * 1.5) {
                out.push(t);
            }
            j = jj;
        } else {
            j += 1;
        }
    }
    out
}
