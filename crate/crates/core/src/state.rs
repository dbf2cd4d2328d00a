//! Pure states as inseparable left/right pairs, basis expansion,
//! observables, and projective measurement with complex probabilities.
//!
//! A pure state is the dyad `|psi><psi~|`; neither vector determines the
//! other, so the pair travels together. Populations `c_n c~_n` sum to one
//! but may be negative or complex, and nothing here coerces them to real.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::kernel::{biorth_normalize, pair, BiorthEigensystem, CMatrix};

const ONE: C64 = C64::new(1.0, 0.0);

/// A pure state `|psi><psi~|` with `<psi~|psi> = 1`.
#[derive(Debug, Clone)]
pub struct BiorthState {
    right: Vec<C64>,
    left: Vec<C64>,
}

impl BiorthState {
    /// Normalize a raw pair into a state. Errors with
    /// [`Error::SelfOrthogonal`] when the overlap vanishes.
    pub fn new(right: &[C64], left: &[C64]) -> Result<Self> {
        let (right, left) = biorth_normalize(right, left, 1e-10)?;
        Ok(BiorthState { right, left })
    }

    /// Wrap a pair that is already normalized to `<l|r> = 1`.
    pub(crate) fn from_normalized(right: Vec<C64>, left: Vec<C64>) -> Self {
        debug_assert!((pair(&left, &right) - ONE).norm() < 1e-6);
        BiorthState { right, left }
    }

    pub fn dim(&self) -> usize {
        self.right.len()
    }

    pub fn right(&self) -> &[C64] {
        &self.right
    }

    pub fn left(&self) -> &[C64] {
        &self.left
    }

    /// `<psi~|psi>`; one up to rounding for any constructed state.
    pub fn overlap(&self) -> C64 {
        pair(&self.left, &self.right)
    }
}

/// Expansion of a state in a biorthogonal eigenbasis.
#[derive(Debug, Clone)]
pub struct StateExpansion {
    /// `c_n = <e~_n|psi>`
    pub c: Vec<C64>,
    /// `c~_n = <psi~|e_n>`; not the conjugate of `c_n` in general.
    pub c_tilde: Vec<C64>,
    /// Level populations `c_n c~_n`; complex in general, summing to one.
    pub populations: Vec<C64>,
}

impl StateExpansion {
    pub fn population_sum(&self) -> C64 {
        self.populations.iter().sum()
    }
}

/// Expand a state in the given eigenbasis.
pub fn expand_in_basis(state: &BiorthState, basis: &BiorthEigensystem) -> Result<StateExpansion> {
    if state.dim() != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            got: state.dim(),
        });
    }
    let n = basis.dim();
    let c: Vec<C64> = (0..n).map(|m| pair(basis.left(m), state.right())).collect();
    let c_tilde: Vec<C64> = (0..n).map(|m| pair(state.left(), basis.right(m))).collect();
    let populations = c.iter().zip(&c_tilde).map(|(a, b)| a * b).collect();
    Ok(StateExpansion { c, c_tilde, populations })
}

/// `Tr[A |psi><psi~|] = <psi~|A|psi>`; complex in general.
pub fn expectation(a: &CMatrix, state: &BiorthState) -> Result<C64> {
    if state.dim() != a.n() {
        return Err(Error::DimensionMismatch {
            expected: a.n(),
            got: state.dim(),
        });
    }
    Ok(pair(state.left(), &a.matvec(state.right())))
}

/// An observable through its spectral decomposition: eigenvalues and
/// biorthonormal projector pairs `M_n = |a_n><a~_n|`.
#[derive(Debug, Clone)]
pub struct Observable {
    eigenvalues: Vec<C64>,
    projectors: Vec<(Vec<C64>, Vec<C64>)>,
}

impl Observable {
    /// Validates that the projector family resolves the identity
    /// (`sum_n M_n M_n = sum_n M_n = I` for biorthonormal pairs).
    pub fn new(eigenvalues: Vec<C64>, projectors: Vec<(Vec<C64>, Vec<C64>)>) -> Result<Self> {
        assert_eq!(eigenvalues.len(), projectors.len());
        let rights: Vec<Vec<C64>> = projectors.iter().map(|(r, _)| r.clone()).collect();
        let lefts: Vec<Vec<C64>> = projectors.iter().map(|(_, l)| l.clone()).collect();
        // Reuse the eigensystem invariant checks.
        BiorthEigensystem::new(eigenvalues.clone(), rights, lefts, 1e-8)?;
        Ok(Observable { eigenvalues, projectors })
    }

    pub fn from_eigensystem(sys: &BiorthEigensystem) -> Self {
        Observable {
            eigenvalues: sys.energies().to_vec(),
            projectors: (0..sys.dim())
                .map(|m| (sys.right(m).to_vec(), sys.left(m).to_vec()))
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.projectors[0].0.len()
    }

    pub fn eigenvalues(&self) -> &[C64] {
        &self.eigenvalues
    }
}

/// One measurement branch: result, complex probability, post-state.
#[derive(Debug, Clone)]
pub struct MeasurementOutcome {
    pub value: C64,
    pub probability: C64,
    pub post_state: BiorthState,
}

/// Full measurement record, including the unread-result mixture as a
/// weighted projector list (kept exact, never densified).
#[derive(Debug, Clone)]
pub struct Measurement {
    pub outcomes: Vec<MeasurementOutcome>,
}

impl Measurement {
    pub fn probability_sum(&self) -> C64 {
        self.outcomes.iter().map(|o| o.probability).sum()
    }

    /// The post-measurement state when results are discarded:
    /// `sum_n p_n |a_n><a~_n|` as (weight, right, left) triples.
    ///
    /// Renormalization over subsets is left to the caller; weights over a
    /// subset can be zero or complex-small, and no canonical rule exists.
    pub fn unread_mixture(&self) -> Vec<(C64, &[C64], &[C64])> {
        self.outcomes
            .iter()
            .map(|o| (o.probability, o.post_state.right(), o.post_state.left()))
            .collect()
    }
}

/// Projective measurement of `A` on a pure state:
/// `p_n = <a~_n|psi><psi~|a_n>`, post-state `|a_n><a~_n|`.
pub fn measure(obs: &Observable, state: &BiorthState) -> Result<Measurement> {
    if obs.dim() != state.dim() {
        return Err(Error::DimensionMismatch {
            expected: obs.dim(),
            got: state.dim(),
        });
    }
    let outcomes = obs
        .eigenvalues
        .iter()
        .zip(&obs.projectors)
        .map(|(&value, (r, l))| {
            let probability = pair(l, state.right()) * pair(state.left(), r);
            MeasurementOutcome {
                value,
                probability,
                post_state: BiorthState::from_normalized(r.clone(), l.clone()),
            }
        })
        .collect();
    Ok(Measurement { outcomes })
}

/// Check whether the state is a joint eigenstate of `O`: both
/// `O|psi> = lambda|psi>` and `<psi~|O = lambda<psi~|` must hold within
/// `tol` relative to the largest entry of `O`. Returns the eigenvalue when
/// both sides pass; one-sided matches are rejected.
pub fn verify_eigenstate(state: &BiorthState, o: &CMatrix, tol: f64) -> Option<C64> {
    if state.dim() != o.n() {
        return None;
    }
    let lambda = pair(state.left(), &o.matvec(state.right()));
    let scale = o.max_norm().max(1e-300);
    let or = o.matvec(state.right());
    let right_res = or
        .iter()
        .zip(state.right())
        .map(|(a, b)| (a - lambda * b).norm())
        .fold(0.0, f64::max);
    let lo = o.vecmat(state.left());
    let left_res = lo
        .iter()
        .zip(state.left())
        .map(|(a, b)| (a - lambda * b).norm())
        .fold(0.0, f64::max);
    if right_res <= tol * scale && left_res <= tol * scale {
        Some(lambda)
    } else {
        None
    }
}

/// `sum_n E_n |e_n><e~_n|` -- rebuild the operator from its spectrum.
pub fn assemble_from_spectrum(sys: &BiorthEigensystem) -> CMatrix {
    sys.assemble()
}
