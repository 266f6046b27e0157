//! Density-matrix and wavefunction controllability decisions.
//!
//! Density-matrix controllability compares the dimension of the Lie algebra
//! generated by `−iH₀, −iμ₁…` with `N²` (some operator has a trace) or `N² − 1`
//! (all traceless). Wavefunction controllability asks whether that algebra has
//! codimension `2N − 2` over its intersection with the centralizer of
//! `P = i·diag(1, 0, …, 0)`. Both require `{1, F₁…F_L}` to be linearly
//! independent on the value set.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{is_independent, reduce_with_constant};
use crate::lie::{centralizer_intersection_dim, lie_closure, SkewBasis, TOL_ACCEPT};
use crate::linalg::{traceless_part, ComplexMatrix, HermitianOperator, DEFAULT_RANK_TOL, I};
use crate::system::ControlSystem;

pub const DEPENDENT_FAMILY_WARNING: &str =
    "dependent family: theorem inapplicable as stated; analysis run on reduced family reported separately";

/// Numerical thresholds used by one analysis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Unit-residual acceptance threshold for closure candidates.
    pub closure: f64,
    /// Relative singular-value threshold for rank decisions.
    pub rank: f64,
    /// Relative threshold for functional independence.
    pub independence: f64,
    /// A trace counts as nonzero when `|tr| > trace·n`.
    pub trace: f64,
    /// Closure round limit; `None` means `n² + 2`.
    pub max_rounds: Option<usize>,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            closure: TOL_ACCEPT,
            rank: DEFAULT_RANK_TOL,
            independence: DEFAULT_RANK_TOL,
            trace: 1e-10,
            max_rounds: None,
        }
    }
}

/// The fixed matrix `P = i·diag(1, 0, …, 0)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PMatrix {
    n: usize,
}

impl PMatrix {
    pub fn new(n: usize) -> Self {
        Self { n }
    }

    pub fn matrix(&self) -> ComplexMatrix {
        let mut d = vec![0.0; self.n];
        d[0] = 1.0;
        ComplexMatrix::from_real_diagonal(&d).scale(I)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityEvidence {
    pub functional_independent: bool,
    pub lie_dim: usize,
    pub any_nonzero_trace: bool,
    /// `n²` when some trace is nonzero, `n² − 1` otherwise.
    pub target_dim: usize,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WavefunctionEvidence {
    pub functional_independent: bool,
    pub lie_dim: usize,
    pub centralizer_dim: usize,
    pub codimension: usize,
    /// `2n − 2`.
    pub target_codimension: usize,
    /// `lie_dim = n²`, sufficient on its own.
    pub full_algebra: bool,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ControllabilityReport {
    pub n: usize,
    pub lie_dim: usize,
    pub traceless_lie_dim: usize,
    pub any_nonzero_trace: bool,
    /// Traces of `H₀, μ₁, …` (after reduction, if any).
    pub traces: Vec<f64>,
    pub centralizer_dim: usize,
    pub functional_independent: bool,
    /// Rank of the evaluation matrix of `{1, F₁…F_L}` on the value set.
    pub effective_count: usize,
    /// 0-based indices of the functionals kept by the reduction.
    pub retained_indices: Vec<usize>,
    pub density_controllable: bool,
    /// `n²` or `n² − 1` according to the trace branch.
    pub density_target_dim: usize,
    pub wavefunction_controllable: bool,
    pub wavefunction_codimension: usize,
    pub wavefunction_target_codimension: usize,
    pub full_algebra: bool,
    pub witnesses: Vec<f64>,
    pub witness_condition: f64,
    pub value_set: Vec<f64>,
    pub tolerances: Tolerances,
    pub warnings: Vec<String>,
}

/// Lie-algebraic data for a concrete generator set, before any verdict.
struct AlgebraData {
    basis: SkewBasis,
    any_nonzero_trace: bool,
    traces: Vec<f64>,
}

fn algebra_data(h0: &HermitianOperator, mus: &[HermitianOperator], tol: &Tolerances) -> Result<AlgebraData> {
    let n = h0.dim();
    let ops: Vec<&HermitianOperator> = std::iter::once(h0).chain(mus).collect();
    let gens: Vec<ComplexMatrix> = ops.iter().map(|h| h.skew()).collect();
    let traces: Vec<f64> = ops.iter().map(|h| h.trace()).collect();
    let any_nonzero_trace = traces.iter().any(|t| t.abs() > tol.trace * n as f64);
    let basis = lie_closure(&gens, tol.closure, tol.max_rounds)?;
    Ok(AlgebraData {
        basis,
        any_nonzero_trace,
        traces,
    })
}

fn density_target(n: usize, any_nonzero_trace: bool) -> usize {
    if any_nonzero_trace {
        n * n
    } else {
        n * n - 1
    }
}

/// Density-matrix controllability of `sys`.
///
/// Returns `false` with [`DEPENDENT_FAMILY_WARNING`] when `{1, F₁…F_L}` is
/// dependent on the value set.
pub fn density_matrix_controllable(sys: &ControlSystem, tol: &Tolerances) -> Result<(bool, DensityEvidence)> {
    let n = sys.n();
    let ind = is_independent(sys.family(), sys.value_set(), true, tol.independence)?;
    let data = algebra_data(sys.h0(), sys.mus(), tol)?;
    let target_dim = density_target(n, data.any_nonzero_trace);
    let mut warnings = Vec::new();
    let verdict = if ind.independent {
        data.basis.dim() == target_dim
    } else {
        warnings.push(DEPENDENT_FAMILY_WARNING.to_string());
        false
    };
    Ok((
        verdict,
        DensityEvidence {
            functional_independent: ind.independent,
            lie_dim: data.basis.dim(),
            any_nonzero_trace: data.any_nonzero_trace,
            target_dim,
            warnings,
        },
    ))
}

fn wavefunction_evidence(basis: &SkewBasis, tol: &Tolerances) -> Result<(usize, usize)> {
    let n = basis.n();
    let c = centralizer_intersection_dim(basis, &PMatrix::new(n).matrix(), tol.rank)?;
    Ok((c, basis.dim() - c))
}

/// Wavefunction controllability of `sys` (codimension `2n − 2` test).
pub fn wavefunction_controllable(
    sys: &ControlSystem,
    tol: &Tolerances,
) -> Result<(bool, WavefunctionEvidence)> {
    let n = sys.n();
    let ind = is_independent(sys.family(), sys.value_set(), true, tol.independence)?;
    let data = algebra_data(sys.h0(), sys.mus(), tol)?;
    let (centralizer_dim, codimension) = wavefunction_evidence(&data.basis, tol)?;
    let target_codimension = 2 * n - 2;
    let mut warnings = Vec::new();
    let verdict = if ind.independent {
        codimension == target_codimension
    } else {
        warnings.push(DEPENDENT_FAMILY_WARNING.to_string());
        false
    };
    Ok((
        verdict,
        WavefunctionEvidence {
            functional_independent: ind.independent,
            lie_dim: data.basis.dim(),
            centralizer_dim,
            codimension,
            target_codimension,
            full_algebra: data.basis.dim() == n * n,
            warnings,
        },
    ))
}

/// Full analysis: independence test, reduction when needed, both criteria via
/// the direct dimension route and the traceless-projection route, with
/// cross-checks between them.
pub fn analyze(sys: &ControlSystem, tol: &Tolerances) -> Result<ControllabilityReport> {
    let n = sys.n();
    let mut warnings = Vec::new();
    let red = reduce_with_constant(
        sys.family(),
        sys.h0(),
        sys.mus(),
        sys.value_set(),
        tol.independence,
    )?;
    let ind = &red.independence;
    if !ind.independent {
        warnings.push(DEPENDENT_FAMILY_WARNING.to_string());
        let worst = ind.combination.iter().map(|c| c.residual).fold(0.0, f64::max);
        warnings.push(format!(
            "reduced family keeps functionals {:?}; max resubstitution residual {worst:.3e}",
            ind.retained_indices
        ));
    }

    let data = algebra_data(&red.h0, &red.mus, tol)?;
    let lie_dim = data.basis.dim();

    let traceless: Vec<ComplexMatrix> = std::iter::once(&red.h0)
        .chain(&red.mus)
        .map(|h| traceless_part(&h.skew()))
        .collect();
    let traceless_lie_dim = lie_closure(&traceless, tol.closure, tol.max_rounds)?.dim();

    let density_target_dim = density_target(n, data.any_nonzero_trace);
    let direct = lie_dim == density_target_dim;
    let procedure = traceless_lie_dim == n * n - 1;
    if direct != procedure {
        return Err(Error::Consistency(format!(
            "direct route (dim {lie_dim} vs {density_target_dim}) disagrees with traceless route (dim {traceless_lie_dim} vs {})",
            n * n - 1
        )));
    }
    if data.any_nonzero_trace {
        if lie_dim != traceless_lie_dim + 1 {
            warnings.push(format!(
                "identity direction not generated: lie_dim {lie_dim}, traceless_lie_dim {traceless_lie_dim}"
            ));
        }
    } else if lie_dim != traceless_lie_dim {
        return Err(Error::Consistency(format!(
            "traceless generators gave dimensions {lie_dim} and {traceless_lie_dim}"
        )));
    }
    let near_threshold = data
        .traces
        .iter()
        .any(|t| t.abs() <= tol.trace * n as f64 && t.abs() > 0.01 * tol.trace * n as f64);
    if near_threshold {
        warnings.push(format!(
            "a trace lies within two decades below the zero threshold {:.1e}; branch {} taken",
            tol.trace * n as f64,
            if data.any_nonzero_trace {
                "nonzero-trace"
            } else {
                "traceless"
            }
        ));
    }

    let (centralizer_dim, codimension) = wavefunction_evidence(&data.basis, tol)?;
    let target_codimension = 2 * n - 2;
    let density_controllable = direct;
    let wavefunction_controllable = codimension == target_codimension;
    if density_controllable && !wavefunction_controllable {
        return Err(Error::Consistency(format!(
            "density-matrix controllable but codimension {codimension} != {target_codimension}"
        )));
    }
    if red.family.is_none() {
        warnings.push("no control functional survives the reduction; only the drift remains".into());
    }

    Ok(ControllabilityReport {
        n,
        lie_dim,
        traceless_lie_dim,
        any_nonzero_trace: data.any_nonzero_trace,
        traces: data.traces,
        centralizer_dim,
        functional_independent: ind.independent,
        effective_count: ind.effective_count,
        retained_indices: ind.retained_indices.clone(),
        density_controllable,
        density_target_dim,
        wavefunction_controllable,
        wavefunction_codimension: codimension,
        wavefunction_target_codimension: target_codimension,
        full_algebra: lie_dim == n * n,
        witnesses: ind.witnesses.clone(),
        witness_condition: ind.witness_condition,
        value_set: sys.value_set().points().to_vec(),
        tolerances: *tol,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::{FunctionalFamily, ValueSet};
    use crate::linalg::C64;

    fn herm2(e: [f64; 4]) -> HermitianOperator {
        let z: Vec<C64> = e.iter().map(|&x| C64::new(x, 0.0)).collect();
        HermitianOperator::new(ComplexMatrix::from_row_slice(2, &z).unwrap()).unwrap()
    }

    fn bilinear(h0: HermitianOperator, mu: HermitianOperator) -> ControlSystem {
        ControlSystem::new(
            h0,
            vec![mu],
            FunctionalFamily::monomial(1).unwrap(),
            ValueSet::new(vec![-1.0, 0.0, 1.0]).unwrap(),
        )
        .unwrap()
    }

    fn sz_sx() -> ControlSystem {
        bilinear(herm2([1., 0., 0., -1.]), herm2([0., 1., 1., 0.]))
    }

    #[test]
    fn su2_system() {
        let tol = Tolerances::default();
        let (d, ev) = density_matrix_controllable(&sz_sx(), &tol).unwrap();
        assert!(d);
        assert_eq!(ev.lie_dim, 3);
        assert!(!ev.any_nonzero_trace);
        assert_eq!(ev.target_dim, 3);
        let (w, ev) = wavefunction_controllable(&sz_sx(), &tol).unwrap();
        assert!(w);
        assert_eq!((ev.lie_dim, ev.centralizer_dim, ev.codimension), (3, 1, 2));
        assert!(!ev.full_algebra);
    }

    #[test]
    fn diagonal_system_is_not_controllable() {
        let sys = bilinear(herm2([1., 0., 0., 2.]), herm2([2., 0., 0., 1.]));
        let tol = Tolerances::default();
        let (d, ev) = density_matrix_controllable(&sys, &tol).unwrap();
        assert!(!d);
        assert!(ev.lie_dim <= 2);
        let (w, ev) = wavefunction_controllable(&sys, &tol).unwrap();
        assert!(!w);
        assert_eq!(ev.codimension, 0);
    }

    #[test]
    fn oscillator_n2_uses_nonzero_trace_branch() {
        let a = std::f64::consts::FRAC_1_SQRT_2;
        let sys = bilinear(herm2([0.5, 0., 0., 1.5]), herm2([0., a, a, 0.]));
        let r = analyze(&sys, &Tolerances::default()).unwrap();
        assert_eq!(r.lie_dim, 4);
        assert_eq!(r.traceless_lie_dim, 3);
        assert!(r.any_nonzero_trace);
        assert!(r.density_controllable && r.wavefunction_controllable && r.full_algebra);
        assert!(r.warnings.is_empty());
    }

    #[test]
    fn report_for_su2() {
        let r = analyze(&sz_sx(), &Tolerances::default()).unwrap();
        assert_eq!(r.lie_dim, 3);
        assert_eq!(r.centralizer_dim, 1);
        assert!(r.functional_independent);
        assert_eq!(r.witnesses.len(), 2);
        assert!(r.density_controllable && r.wavefunction_controllable);
    }

    #[test]
    fn dependent_family_reports_reduced_analysis() {
        let v = ValueSet::new(vec![-1.0, 0.5, 2.0]).unwrap();
        let fam = FunctionalFamily::sampled(
            &v,
            vec![v.points().to_vec(), v.points().iter().map(|x| 2.0 * x).collect()],
        )
        .unwrap();
        let sys = ControlSystem::new(
            herm2([1., 0., 0., -1.]),
            vec![herm2([0., 1., 1., 0.]), herm2([0.3, 0.2, 0.2, -0.3])],
            fam,
            v,
        )
        .unwrap();
        let r = analyze(&sys, &Tolerances::default()).unwrap();
        assert!(!r.functional_independent);
        assert_eq!(r.retained_indices, vec![0]);
        assert!(r.warnings.iter().any(|w| w == DEPENDENT_FAMILY_WARNING));
        assert_eq!(r.lie_dim, 3);
        assert!(r.density_controllable);
        let (d, ev) = density_matrix_controllable(&sys, &Tolerances::default()).unwrap();
        assert!(!d);
        assert_eq!(ev.warnings, vec![DEPENDENT_FAMILY_WARNING.to_string()]);
    }

    #[test]
    fn p_matrix_has_single_entry() {
        let p = PMatrix::new(3).matrix();
        assert_eq!(p.get(0, 0), I);
        assert_eq!(p.frobenius_norm(), 1.0);
    }
}
