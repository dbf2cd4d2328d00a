//! C ABI for the quench-analysis library.
//!
//! Conventions:
//! - every fallible call returns an [`NhsshStatus`] code and writes results
//!   through out-pointers;
//! - the quench analyzer is an opaque handle created with
//!   [`nhssh_quench_new`] and released with [`nhssh_quench_free`];
//! - array outputs are caller-allocated; sizes are queried from the handle.
//!
//! The matching header is generated into `include/nhssh.h` at build time.

use std::os::raw::c_char;

use nhssh::dqpt::{
    critical_modes, critical_times, fisher_zeros, mode_overlap, rate_function, winding_number,
    QuenchSpec, TimeGrid,
};
use nhssh::error::Error;
use nhssh::ssh::{classify_phase, MomentumGrid, PhaseLabel, SshParams};

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NhsshStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NearDefective = 3,
    SelfOrthogonal = 4,
    DimensionMismatch = 5,
    ExceptionalPoint = 6,
    GaugeSingular = 7,
    EchoZero = 8,
    LogSingular = 9,
    DegenerateRatio = 10,
    NotCritical = 11,
    Unwrappable = 12,
    NonFinite = 13,
}

/// Phase labels exposed over the ABI; mirrors the library enum.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NhsshPhase {
    PtSymmetricAlpha = 0,
    PtSymmetricBeta = 1,
    BrokenPhaseI = 2,
    BrokenPhaseII = 3,
    CriticalBoundary = 4,
}

fn status_of(e: &Error) -> NhsshStatus {
    match e {
        Error::NearDefective { .. } => NhsshStatus::NearDefective,
        Error::SelfOrthogonal { .. } => NhsshStatus::SelfOrthogonal,
        Error::DimensionMismatch { .. } => NhsshStatus::DimensionMismatch,
        Error::ExceptionalPoint { .. } => NhsshStatus::ExceptionalPoint,
        Error::GaugeSingular { .. } => NhsshStatus::GaugeSingular,
        Error::EchoZero { .. } => NhsshStatus::EchoZero,
        Error::LogSingular { .. } => NhsshStatus::LogSingular,
        Error::DegenerateRatio { .. } => NhsshStatus::DegenerateRatio,
        Error::NotCritical { .. } => NhsshStatus::NotCritical,
        Error::Unwrappable { .. } => NhsshStatus::Unwrappable,
        Error::NonFinite => NhsshStatus::NonFinite,
    }
}

/// Opaque quench analyzer.
pub struct NhsshQuench {
    spec: QuenchSpec,
}

/// Create a quench analyzer. `kpoints`/`tpoints` fix the momentum and time
/// grids; momenta are midpoint samples of [0, pi], times span [0, t_max].
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle pointer.
#[no_mangle]
pub unsafe extern "C" fn nhssh_quench_new(
    q: f64,
    eta: f64,
    qf: f64,
    etaf: f64,
    kpoints: usize,
    tpoints: usize,
    t_max: f64,
    out: *mut *mut NhsshQuench,
) -> NhsshStatus {
    if out.is_null() {
        return NhsshStatus::NullPointer;
    }
    if ![q, eta, qf, etaf, t_max].iter().all(|x| x.is_finite())
        || t_max <= 0.0
        || kpoints < 16
        || tpoints < 16
    {
        return NhsshStatus::InvalidArgument;
    }
    let spec = QuenchSpec {
        initial: SshParams::new(q, eta),
        final_: SshParams::new(qf, etaf),
        grid: MomentumGrid::midpoint(kpoints),
        times: TimeGrid::uniform(t_max, tpoints),
    };
    *out = Box::into_raw(Box::new(NhsshQuench { spec }));
    NhsshStatus::Ok
}

/// Release a handle created by [`nhssh_quench_new`]. Null is a no-op.
///
/// # Safety
/// `h` must be null or a pointer returned by `nhssh_quench_new` that has
/// not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn nhssh_quench_free(h: *mut NhsshQuench) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Number of time samples produced by the series entry points.
///
/// # Safety
/// `h` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn nhssh_quench_tpoints(h: *const NhsshQuench) -> usize {
    if h.is_null() {
        return 0;
    }
    (*h).spec.times.len()
}

/// Number of momentum samples produced by the per-mode entry points.
///
/// # Safety
/// `h` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn nhssh_quench_kpoints(h: *const NhsshQuench) -> usize {
    if h.is_null() {
        return 0;
    }
    (*h).spec.grid.len()
}

/// Rate function series. All arrays must hold `nhssh_quench_tpoints(h)`
/// elements.
///
/// # Safety
/// `h` must be a live handle; the out arrays must be valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn nhssh_rate_function(
    h: *const NhsshQuench,
    out_t: *mut f64,
    out_re: *mut f64,
    out_im: *mut f64,
    len: usize,
) -> NhsshStatus {
    if h.is_null() || out_t.is_null() || out_re.is_null() || out_im.is_null() {
        return NhsshStatus::NullPointer;
    }
    let spec = &(*h).spec;
    if len != spec.times.len() {
        return NhsshStatus::InvalidArgument;
    }
    match rate_function(spec) {
        Ok(r) => {
            for j in 0..len {
                *out_t.add(j) = r.times[j];
                *out_re.add(j) = r.re_r[j];
                *out_im.add(j) = r.im_r[j];
            }
            NhsshStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Dynamical winding number series; `out_valid` is 1 where the sample is
/// well-defined. All arrays must hold `nhssh_quench_tpoints(h)` elements.
///
/// # Safety
/// `h` must be a live handle; the out arrays must be valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn nhssh_winding_number(
    h: *const NhsshQuench,
    out_t: *mut f64,
    out_re_nu: *mut f64,
    out_valid: *mut u8,
    len: usize,
) -> NhsshStatus {
    if h.is_null() || out_t.is_null() || out_re_nu.is_null() || out_valid.is_null() {
        return NhsshStatus::NullPointer;
    }
    let spec = &(*h).spec;
    if len != spec.times.len() {
        return NhsshStatus::InvalidArgument;
    }
    match winding_number(spec) {
        Ok(w) => {
            for j in 0..len {
                *out_t.add(j) = w.times[j];
                *out_re_nu.add(j) = w.re_nu[j];
                *out_valid.add(j) = u8::from(w.flags[j]);
            }
            NhsshStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Fisher-zero branch `l` sampled over the momentum grid. All arrays must
/// hold `nhssh_quench_kpoints(h)` elements.
///
/// # Safety
/// `h` must be a live handle; the out arrays must be valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn nhssh_fisher_zeros(
    h: *const NhsshQuench,
    l: i64,
    out_k: *mut f64,
    out_re_z: *mut f64,
    out_im_z: *mut f64,
    len: usize,
) -> NhsshStatus {
    if h.is_null() || out_k.is_null() || out_re_z.is_null() || out_im_z.is_null() {
        return NhsshStatus::NullPointer;
    }
    let spec = &(*h).spec;
    if len != spec.grid.len() {
        return NhsshStatus::InvalidArgument;
    }
    match fisher_zeros(spec, l) {
        Ok(curve) => {
            for (j, &(k, z)) in curve.samples.iter().enumerate() {
                *out_k.add(j) = k;
                *out_re_z.add(j) = z.re;
                *out_im_z.add(j) = z.im;
            }
            NhsshStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Critical momenta of the quench. Writes at most `cap` modes and stores
/// the number found in `out_count` (which may exceed `cap`).
///
/// # Safety
/// `h` must be a live handle; `out_modes` valid for `cap` writes,
/// `out_count` for one.
#[no_mangle]
pub unsafe extern "C" fn nhssh_critical_modes(
    h: *const NhsshQuench,
    out_modes: *mut f64,
    cap: usize,
    out_count: *mut usize,
) -> NhsshStatus {
    if h.is_null() || out_count.is_null() || (cap > 0 && out_modes.is_null()) {
        return NhsshStatus::NullPointer;
    }
    let cs = critical_modes(&(*h).spec);
    *out_count = cs.modes.len();
    for (j, &k) in cs.modes.iter().take(cap).enumerate() {
        *out_modes.add(j) = k;
    }
    NhsshStatus::Ok
}

/// Critical times `t_{c,0..=l_max}` of the mode at momentum `k`.
/// `out_times` must hold `l_max + 1` elements.
///
/// # Safety
/// `h` must be a live handle; `out_times` valid for `l_max + 1` writes.
#[no_mangle]
pub unsafe extern "C" fn nhssh_critical_times(
    h: *const NhsshQuench,
    k: f64,
    l_max: usize,
    out_times: *mut f64,
) -> NhsshStatus {
    if h.is_null() || out_times.is_null() {
        return NhsshStatus::NullPointer;
    }
    if !k.is_finite() {
        return NhsshStatus::InvalidArgument;
    }
    let m = match mode_overlap(&(*h).spec, k) {
        Ok(m) => m,
        Err(e) => return status_of(&e),
    };
    match critical_times(&m, l_max) {
        Ok(ts) => {
            for (j, &t) in ts.iter().enumerate() {
                *out_times.add(j) = t;
            }
            NhsshStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Mode overlap `kappa_k` for an arbitrary quench, without a handle.
///
/// # Safety
/// `out_re` and `out_im` must each be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn nhssh_kappa(
    q: f64,
    eta: f64,
    qf: f64,
    etaf: f64,
    k: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> NhsshStatus {
    if out_re.is_null() || out_im.is_null() {
        return NhsshStatus::NullPointer;
    }
    if ![q, eta, qf, etaf, k].iter().all(|x| x.is_finite()) {
        return NhsshStatus::InvalidArgument;
    }
    let spec = QuenchSpec {
        initial: SshParams::new(q, eta),
        final_: SshParams::new(qf, etaf),
        grid: MomentumGrid::midpoint(16),
        times: TimeGrid::uniform(1.0, 16),
    };
    match mode_overlap(&spec, k) {
        Ok(m) => {
            *out_re = m.kappa.re;
            *out_im = m.kappa.im;
            NhsshStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Phase label of a parameter point.
#[no_mangle]
pub extern "C" fn nhssh_classify_phase(q: f64, eta: f64) -> NhsshPhase {
    match classify_phase(SshParams::new(q, eta)) {
        PhaseLabel::PTSymmetricAlpha => NhsshPhase::PtSymmetricAlpha,
        PhaseLabel::PTSymmetricBeta => NhsshPhase::PtSymmetricBeta,
        PhaseLabel::BrokenPhaseI => NhsshPhase::BrokenPhaseI,
        PhaseLabel::BrokenPhaseII => NhsshPhase::BrokenPhaseII,
        PhaseLabel::CriticalBoundary => NhsshPhase::CriticalBoundary,
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn nhssh_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}
