//! Piecewise-constant propagation of states, propagators and density matrices,
//! the group-commutator product limit, and randomized reachability search.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::FunctionalFamily;
use crate::linalg::{
    commutator, expm_hermitian_factor, expm_skew, hermitian_eigenvalues, ComplexMatrix, C64, TOL_HERM,
};
use crate::system::ControlSystem;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub duration: f64,
    pub value: f64,
}

/// Control that holds `value` for `duration`, segment after segment.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PiecewiseConstantControl {
    segments: Vec<Segment>,
}

impl PiecewiseConstantControl {
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        for (index, s) in segments.iter().enumerate() {
            if !(s.duration.is_finite() && s.duration > 0.0) {
                return Err(Error::InvalidSegment {
                    index,
                    reason: format!("duration {} must be positive and finite", s.duration),
                });
            }
            if !s.value.is_finite() {
                return Err(Error::InvalidSegment {
                    index,
                    reason: "non-finite value".into(),
                });
            }
        }
        Ok(Self { segments })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn single(duration: f64, value: f64) -> Result<Self> {
        Self::new(vec![Segment { duration, value }])
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn total_time(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    /// Re-validates after deserialization.
    pub fn validated(self) -> Result<Self> {
        Self::new(self.segments)
    }
}

/// `c1` followed by `c2`.
pub fn concat(c1: &PiecewiseConstantControl, c2: &PiecewiseConstantControl) -> PiecewiseConstantControl {
    PiecewiseConstantControl {
        segments: c1.segments.iter().chain(&c2.segments).copied().collect(),
    }
}

/// Unit vector in `ℂⁿ`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState(DVector<C64>);

impl QuantumState {
    pub fn new(c: DVector<C64>) -> Result<Self> {
        if c.is_empty() || c.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidState("empty or non-finite amplitudes".into()));
        }
        let norm = c.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidState(format!("norm {norm} is not 1")));
        }
        Ok(Self(c))
    }

    /// Normalizes `c`; fails only for zero or non-finite input.
    pub fn normalized(c: DVector<C64>) -> Result<Self> {
        let norm = c.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidState(
                "cannot normalize a zero or non-finite vector".into(),
            ));
        }
        Self::new(c / C64::new(norm, 0.0))
    }

    /// `k`-th standard basis vector of `ℂⁿ`.
    pub fn basis(n: usize, k: usize) -> Result<Self> {
        if k >= n {
            return Err(Error::InvalidState(format!(
                "basis index {k} out of range for n = {n}"
            )));
        }
        let mut c = DVector::zeros(n);
        c[k] = C64::new(1.0, 0.0);
        Self::new(c)
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn populations(&self) -> Vec<f64> {
        self.0.iter().map(|z| z.norm_sqr()).collect()
    }

    /// `|⟨self, other⟩|`.
    pub fn overlap(&self, other: &QuantumState) -> f64 {
        self.0.dotc(&other.0).norm()
    }
}

/// Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(ComplexMatrix);

impl DensityMatrix {
    pub fn new(rho: ComplexMatrix) -> Result<Self> {
        let residual = rho.hermitian_residual();
        if residual > TOL_HERM {
            return Err(Error::NotHermitian { residual });
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        if let Some(&min) = hermitian_eigenvalues(&rho).first() {
            if min < -1e-10 {
                return Err(Error::InvalidState(format!("negative eigenvalue {min}")));
            }
        }
        Ok(Self(rho))
    }

    pub fn pure(state: &QuantumState) -> Self {
        let c = state.amplitudes();
        Self(ComplexMatrix::new(c * c.adjoint()).expect("outer product of finite vector"))
    }

    pub fn maximally_mixed(n: usize) -> Self {
        Self(ComplexMatrix::identity(n).scale_real(1.0 / n as f64))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.0)
    }
}

/// Time-ordered product of `exp(−iΔt_j H(ε_j))`, earliest factor rightmost.
pub fn propagator(sys: &ControlSystem, ctrl: &PiecewiseConstantControl) -> Result<ComplexMatrix> {
    let mut u = ComplexMatrix::identity(sys.n());
    for (index, s) in ctrl.segments().iter().enumerate() {
        if !(s.duration.is_finite() && s.duration > 0.0) {
            return Err(Error::InvalidSegment {
                index,
                reason: format!("duration {}", s.duration),
            });
        }
        let h = sys.hamiltonian(s.value)?;
        u = &expm_hermitian_factor(&h, s.duration)? * &u;
    }
    Ok(u)
}

pub fn propagate_state(
    sys: &ControlSystem,
    ctrl: &PiecewiseConstantControl,
    c0: &QuantumState,
) -> Result<QuantumState> {
    check_dim(sys.n(), c0.dim())?;
    let u = propagator(sys, ctrl)?;
    QuantumState::new(u.apply(c0.amplitudes()))
        .map_err(|e| Error::Consistency(format!("propagated state lost normalization: {e}")))
}

pub fn propagate_density(
    sys: &ControlSystem,
    ctrl: &PiecewiseConstantControl,
    rho0: &DensityMatrix,
) -> Result<DensityMatrix> {
    check_dim(sys.n(), rho0.matrix().dim())?;
    let u = propagator(sys, ctrl)?;
    let rho = &(&u * rho0.matrix()) * &u.adjoint();
    // Hermitize round-off only; the input was validated.
    let rho = (&rho + &rho.adjoint()).scale_real(0.5);
    DensityMatrix::new(rho).map_err(|e| Error::Consistency(format!("propagated density invalid: {e}")))
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// `(e^{−sX₂} e^{−sX₁} e^{sX₂} e^{sX₁})ⁿ` with `s = t/√n`.
pub fn trotter_product(x1: &ComplexMatrix, x2: &ComplexMatrix, t: f64, n: u64) -> Result<ComplexMatrix> {
    if n == 0 {
        return Err(Error::SizeMismatch(
            "trotter step count must be at least 1".into(),
        ));
    }
    check_dim(x1.dim(), x2.dim())?;
    let s = t / (n as f64).sqrt();
    let step = &(&(&expm_skew(x2, -s)? * &expm_skew(x1, -s)?) * &expm_skew(x2, s)?) * &expm_skew(x1, s)?;
    Ok(step.powi(n))
}

/// Limit of [`trotter_product`] as `n → ∞`: `exp(t²·[X₂, X₁])`.
pub fn trotter_limit(x1: &ComplexMatrix, x2: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    expm_skew(&commutator(x2, x1)?, t * t)
}

/// Frobenius distance between the `n`-step group-commutator product and its limit.
pub fn trotter_commutator_error(x1: &ComplexMatrix, x2: &ComplexMatrix, t: f64, n: u64) -> Result<f64> {
    for x in [x1, x2] {
        let residual = x.skew_hermitian_residual();
        if residual > TOL_HERM {
            return Err(Error::NotSkewHermitian { residual });
        }
    }
    Ok(trotter_product(x1, x2, t, n)?.distance(&trotter_limit(x1, x2, t)?))
}

/// What [`reachability_search`] tries to hit.
#[derive(Clone, Debug)]
pub enum ReachTarget {
    /// Steer `initial` to `target`; fidelity `|⟨target, U·initial⟩|`.
    State {
        initial: QuantumState,
        target: QuantumState,
    },
    /// Match a unitary; fidelity `|tr(target†U)| / n`.
    Propagator(ComplexMatrix),
}

/// Log-uniform range for segment durations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SegmentBounds {
    pub min_duration: f64,
    pub max_duration: f64,
}

impl Default for SegmentBounds {
    fn default() -> Self {
        Self {
            min_duration: 0.05,
            max_duration: 5.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchResult {
    pub best_fidelity: f64,
    pub best_control: PiecewiseConstantControl,
    pub evaluations: usize,
}

pub const MAX_SEARCH_SEGMENTS: usize = 8;

struct Sampler<'a> {
    sys: &'a ControlSystem,
    bounds: SegmentBounds,
}

impl Sampler<'_> {
    fn duration(&self, rng: &mut ChaCha8Rng) -> f64 {
        let (lo, hi) = (self.bounds.min_duration.ln(), self.bounds.max_duration.ln());
        if hi > lo {
            rng.random_range(lo..hi).exp()
        } else {
            self.bounds.min_duration
        }
    }

    fn value(&self, rng: &mut ChaCha8Rng) -> f64 {
        let v = self.sys.value_set();
        match self.sys.family() {
            FunctionalFamily::Monomial { .. } if v.max() > v.min() => rng.random_range(v.min()..=v.max()),
            _ => v.points()[rng.random_range(0..v.len())],
        }
    }

    fn candidate(&self, rng: &mut ChaCha8Rng) -> Vec<Segment> {
        let k = rng.random_range(1..=MAX_SEARCH_SEGMENTS);
        (0..k)
            .map(|_| Segment {
                duration: self.duration(rng),
                value: self.value(rng),
            })
            .collect()
    }

    /// Local move around `best`: jitter one segment, or resample/insert/remove one.
    fn perturb(&self, best: &[Segment], scale: f64, rng: &mut ChaCha8Rng) -> Vec<Segment> {
        let mut out = best.to_vec();
        if out.is_empty() {
            return self.candidate(rng);
        }
        let v = self.sys.value_set();
        let i = rng.random_range(0..out.len());
        match rng.random_range(0..10) {
            0 if out.len() < MAX_SEARCH_SEGMENTS => out.insert(
                i,
                Segment {
                    duration: self.duration(rng),
                    value: self.value(rng),
                },
            ),
            1 if out.len() > 1 => {
                out.remove(i);
            }
            2 => out[i].value = self.value(rng),
            _ => {
                let f: f64 = rng.random_range(-1.0..1.0) * scale;
                out[i].duration =
                    (out[i].duration * f.exp()).clamp(self.bounds.min_duration, self.bounds.max_duration);
                if self.sys.family().is_monomial() && v.max() > v.min() {
                    let dv = rng.random_range(-1.0..1.0) * scale * (v.max() - v.min()) * 0.25;
                    out[i].value = (out[i].value + dv).clamp(v.min(), v.max());
                }
            }
        }
        out
    }
}

fn fidelity(sys: &ControlSystem, target: &ReachTarget, segments: &[Segment]) -> Result<f64> {
    let ctrl = PiecewiseConstantControl {
        segments: segments.to_vec(),
    };
    let u = propagator(sys, &ctrl)?;
    let f = match target {
        ReachTarget::State { initial, target } => {
            target.amplitudes().dotc(&u.apply(initial.amplitudes())).norm()
        }
        ReachTarget::Propagator(w) => {
            (w.adjoint().as_matrix() * u.as_matrix()).trace().norm() / sys.n() as f64
        }
    };
    Ok(f.clamp(0.0, 1.0))
}

/// Randomized search over piecewise-constant controls maximizing fidelity with
/// `target`. The empty control is evaluated first; half of the remaining budget
/// goes to independent random candidates and the rest to local refinement of
/// the incumbent. Deterministic for a given `(seed, budget)`.
pub fn reachability_search(
    sys: &ControlSystem,
    target: &ReachTarget,
    budget: usize,
    seed: u64,
    bounds: SegmentBounds,
) -> Result<SearchResult> {
    match target {
        ReachTarget::State { initial, target } => {
            check_dim(sys.n(), initial.dim())?;
            check_dim(sys.n(), target.dim())?;
        }
        ReachTarget::Propagator(w) => {
            check_dim(sys.n(), w.dim())?;
            let residual = w.unitarity_residual();
            if residual > 1e-8 {
                return Err(Error::InvalidState(format!(
                    "target is not unitary (residual {residual:.3e})"
                )));
            }
        }
    }
    if !(bounds.min_duration > 0.0 && bounds.max_duration >= bounds.min_duration) {
        return Err(Error::SizeMismatch(
            "segment bounds must satisfy 0 < min <= max".into(),
        ));
    }
    let budget = budget.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sampler = Sampler { sys, bounds };

    let mut best: Vec<Segment> = Vec::new();
    let mut best_f = fidelity(sys, target, &best)?;
    let mut evaluations = 1;
    let explore = (budget - 1) / 2;
    while evaluations < 1 + explore && best_f < 1.0 - 1e-12 {
        let cand = sampler.candidate(&mut rng);
        let f = fidelity(sys, target, &cand)?;
        evaluations += 1;
        if f > best_f {
            best_f = f;
            best = cand;
        }
    }
    let mut scale = 1.0;
    let mut stale = 0;
    while evaluations < budget && best_f < 1.0 - 1e-12 {
        let cand = sampler.perturb(&best, scale, &mut rng);
        let f = fidelity(sys, target, &cand)?;
        evaluations += 1;
        if f > best_f {
            best_f = f;
            best = cand;
            stale = 0;
        } else {
            stale += 1;
            if stale >= 50 {
                scale = (scale * 0.5).max(1e-3);
                stale = 0;
            }
        }
    }
    Ok(SearchResult {
        best_fidelity: best_f,
        best_control: PiecewiseConstantControl { segments: best },
        evaluations,
    })
}
