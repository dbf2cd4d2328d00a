//! The non-Hermitian SSH chain in momentum space: Bloch vectors, the 2x2
//! Bloch Hamiltonian, closed-form biorthogonal band eigenpairs, and
//! PT-phase classification.
//!
//! Units: J1 = 1 throughout; `q = J2/J1`, `eta = mu/J1`.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::kernel::{principal_sqrt, CMatrix};
use crate::state::BiorthState;

/// Absolute tolerance for phase-boundary and exceptional-point comparisons.
pub const BOUNDARY_TOL: f64 = 1e-12;

/// Dimensionless model parameters.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SshParams {
    pub q: f64,
    pub eta: f64,
}

impl SshParams {
    pub fn new(q: f64, eta: f64) -> Self {
        assert!(q.is_finite() && eta.is_finite());
        SshParams { q, eta }
    }
}

/// The complex Bloch vector `d_k = (1 + q cos k, -q sin k, i eta)` and the
/// band scalar `d = principal_sqrt(d . d)`.
#[derive(Debug, Clone, Copy)]
pub struct BlochVector {
    pub dx: C64,
    pub dy: C64,
    pub dz: C64,
    pub d: C64,
}

/// Parameter-space phase of the Bloch Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum PhaseLabel {
    /// PT-symmetric, trivial hopping ratio (q < 1).
    PTSymmetricAlpha,
    /// PT-symmetric, topological hopping ratio (q > 1).
    PTSymmetricBeta,
    /// Entire spectrum purely imaginary (|eta| > |1+q|).
    BrokenPhaseI,
    /// Mixed real/imaginary bands.
    BrokenPhaseII,
    /// Within tolerance of a phase boundary.
    CriticalBoundary,
}

/// Spectral character of a single momentum mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeClass {
    RealEnergy,
    ImaginaryEnergy,
    ExceptionalPoint,
}

/// Momenta in the half Brillouin zone [0, pi].
#[derive(Debug, Clone)]
pub struct MomentumGrid {
    ks: Vec<f64>,
    midpoint: bool,
}

impl MomentumGrid {
    /// `m` samples including both endpoints 0 and pi (curve plotting).
    pub fn inclusive(m: usize) -> Self {
        assert!(m >= 2);
        let ks = (0..m)
            .map(|j| std::f64::consts::PI * j as f64 / (m - 1) as f64)
            .collect();
        MomentumGrid { ks, midpoint: false }
    }

    /// `m` midpoint-shifted samples (quadrature; avoids landing on
    /// exceptional points and boundary modes at k = 0, pi).
    pub fn midpoint(m: usize) -> Self {
        assert!(m >= 2);
        let ks = (0..m)
            .map(|j| std::f64::consts::PI * (j as f64 + 0.5) / m as f64)
            .collect();
        MomentumGrid { ks, midpoint: true }
    }

    pub fn len(&self) -> usize {
        self.ks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ks.is_empty()
    }

    pub fn ks(&self) -> &[f64] {
        &self.ks
    }

    pub fn is_midpoint(&self) -> bool {
        self.midpoint
    }

    /// Quadrature step (midpoint) or sample spacing (inclusive).
    pub fn dk(&self) -> f64 {
        if self.midpoint {
            std::f64::consts::PI / self.ks.len() as f64
        } else {
            std::f64::consts::PI / (self.ks.len() - 1) as f64
        }
    }
}

/// Evaluate the Bloch vector at momentum `k`.
pub fn bloch_vector(p: SshParams, k: f64) -> BlochVector {
    assert!(k.is_finite());
    let dx = C64::new(1.0 + p.q * k.cos(), 0.0);
    let dy = C64::new(-p.q * k.sin(), 0.0);
    let dz = C64::new(0.0, p.eta);
    let d = principal_sqrt(dx * dx + dy * dy + dz * dz);
    BlochVector { dx, dy, dz, d }
}

/// The 2x2 Bloch Hamiltonian `[[i eta, 1+q e^{ik}], [1+q e^{-ik}, -i eta]]`
/// in the (A, B) sublattice basis.
pub fn build_hk(p: SshParams, k: f64) -> CMatrix {
    assert!(k.is_finite());
    let eik = C64::new(0.0, k).exp();
    CMatrix::from_rows(
        2,
        &[
            C64::new(0.0, p.eta),
            C64::new(1.0, 0.0) + C64::new(p.q, 0.0) * eik,
            C64::new(1.0, 0.0) + C64::new(p.q, 0.0) * eik.conj(),
            C64::new(0.0, -p.eta),
        ],
    )
    .unwrap()
}

/// Closed-form biorthogonal eigenpairs `(plus: (right, left), minus:
/// (right, left))` at energies +d and -d.
///
/// The default normalization divides by `sqrt(2(1 + dz/d))`; when that
/// factor is close to zero the algebraically equivalent gauge built on
/// `(1 - dz/d)` is used instead, so the returned pairs are regular
/// everywhere except at exceptional points.
#[allow(clippy::type_complexity)]
pub fn band_eigenpairs(
    v: &BlochVector,
) -> Result<((Vec<C64>, Vec<C64>), (Vec<C64>, Vec<C64>))> {
    if v.d.norm() <= BOUNDARY_TOL {
        return Err(Error::ExceptionalPoint { magnitude: v.d.norm() });
    }
    let h = v.dz / v.d; // cos of the complex polar angle
    let up = (v.dx + C64::new(0.0, 1.0) * v.dy) / v.d;
    let um = (v.dx - C64::new(0.0, 1.0) * v.dy) / v.d;
    let one = C64::new(1.0, 0.0);

    let (plus, minus) = if (one + h).norm() >= 1e-8 {
        let m = one / principal_sqrt((one + h) * C64::new(2.0, 0.0));
        let rp = vec![m * (one + h), m * up];
        let lp = vec![m * (one + h), m * um];
        let rm = vec![-m * um, m * (one + h)];
        let lm = vec![-m * up, m * (one + h)];
        ((rp, lp), (rm, lm))
    } else if (one - h).norm() >= 1e-8 {
        let m = one / principal_sqrt((one - h) * C64::new(2.0, 0.0));
        let rp = vec![m * um, m * (one - h)];
        let lp = vec![m * up, m * (one - h)];
        let rm = vec![m * (one - h), -m * up];
        let lm = vec![m * (one - h), -m * um];
        ((rp, lp), (rm, lm))
    } else {
        return Err(Error::GaugeSingular {
            magnitude: (one + h).norm().min((one - h).norm()),
        });
    };
    Ok((plus, minus))
}

/// Locate `p` in the phase diagram.
pub fn classify_phase(p: SshParams) -> PhaseLabel {
    let a = p.eta.abs();
    let inner = (1.0 - p.q).abs();
    let outer = (1.0 + p.q).abs();
    if (a - inner).abs() <= BOUNDARY_TOL || (a - outer).abs() <= BOUNDARY_TOL {
        return PhaseLabel::CriticalBoundary;
    }
    if a < inner {
        if p.q < 1.0 {
            PhaseLabel::PTSymmetricAlpha
        } else {
            PhaseLabel::PTSymmetricBeta
        }
    } else if a > outer {
        PhaseLabel::BrokenPhaseI
    } else {
        PhaseLabel::BrokenPhaseII
    }
}

/// Spectral character of the mode at `k`: compares `eta^2` against
/// `|1+q e^{ik}|^2`.
pub fn classify_mode(p: SshParams, k: f64) -> ModeClass {
    let hop2 = 1.0 + p.q * p.q + 2.0 * p.q * k.cos();
    let diff = hop2 - p.eta * p.eta;
    if diff.abs() <= BOUNDARY_TOL {
        ModeClass::ExceptionalPoint
    } else if diff > 0.0 {
        ModeClass::RealEnergy
    } else {
        ModeClass::ImaginaryEnergy
    }
}

/// The minus-band (lower) eigenpair at `k` as a normalized state.
pub fn ground_state(p: SshParams, k: f64) -> Result<BiorthState> {
    let v = bloch_vector(p, k);
    let (_, (rm, lm)) = band_eigenpairs(&v)?;
    Ok(BiorthState::from_normalized(rm, lm))
}
