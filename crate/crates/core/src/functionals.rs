//! Control functional families `F₁…F_L` over a finite value set.
//!
//! Linear independence is decided on the evaluation matrix over the value set.
//! Witness points are picked greedily so the retained minor stays well
//! conditioned, and dependent members are folded into the retained ones by
//! least squares.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{numerical_rank, ComplexMatrix, HermitianOperator, RealVectorSet};
use crate::system::ControlSystem;

/// Two points closer than this are the same point.
pub const POINT_TOL: f64 = 1e-12;

/// Finite, sorted set of admissible control amplitudes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValueSet {
    points: Vec<f64>,
}

impl ValueSet {
    pub fn new(mut points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidValueSet("empty".into()));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidValueSet("non-finite point".into()));
        }
        points.sort_by(f64::total_cmp);
        if let Some(w) = points.windows(2).find(|w| w[1] - w[0] <= POINT_TOL) {
            return Err(Error::InvalidValueSet(format!("duplicate point {}", w[0])));
        }
        Ok(Self { points })
    }

    /// `points` equispaced values from `min` to `max` inclusive.
    pub fn uniform_grid(min: f64, max: f64, points: usize) -> Result<Self> {
        if !(min.is_finite() && max.is_finite()) || points == 0 {
            return Err(Error::InvalidValueSet("bad interval".into()));
        }
        if points == 1 {
            return Self::new(vec![min]);
        }
        if max <= min {
            return Err(Error::InvalidValueSet(format!("max {max} must exceed min {min}")));
        }
        let step = (max - min) / (points - 1) as f64;
        Self::new(
            (0..points)
                .map(|k| {
                    if k + 1 == points {
                        max
                    } else {
                        min + step * k as f64
                    }
                })
                .collect(),
        )
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.points[0]
    }

    pub fn max(&self) -> f64 {
        *self.points.last().expect("nonempty")
    }

    /// Index of the point within [`POINT_TOL`] of `x`.
    pub fn position(&self, x: f64) -> Option<usize> {
        let i = self.points.partition_point(|&p| p < x - POINT_TOL);
        (i < self.points.len() && (self.points[i] - x).abs() <= POINT_TOL).then_some(i)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.position(x).is_some()
    }
}

/// `F_k(x) = x^k` for `k = 1…degree`, or a table sampled on a value set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FunctionalFamily {
    Monomial {
        degree: usize,
    },
    /// `values[k][j]` is `F_{k+1}` at `points[j]`.
    Sampled {
        points: Vec<f64>,
        values: Vec<Vec<f64>>,
    },
}

impl FunctionalFamily {
    pub fn monomial(degree: usize) -> Result<Self> {
        if degree == 0 {
            return Err(Error::InvalidFamily("monomial degree must be at least 1".into()));
        }
        Ok(Self::Monomial { degree })
    }

    pub fn sampled(v: &ValueSet, values: Vec<Vec<f64>>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidFamily(
                "sampled family needs at least one functional".into(),
            ));
        }
        for (k, row) in values.iter().enumerate() {
            if row.len() != v.len() {
                return Err(Error::InvalidFamily(format!(
                    "functional {k} has {} samples, value set has {} points",
                    row.len(),
                    v.len()
                )));
            }
            if row.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidFamily(format!(
                    "functional {k} has a non-finite sample"
                )));
            }
        }
        Ok(Self::Sampled {
            points: v.points().to_vec(),
            values,
        })
    }

    /// Number of functionals `L`.
    pub fn len(&self) -> usize {
        match self {
            Self::Monomial { degree } => *degree,
            Self::Sampled { values, .. } => values.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_monomial(&self) -> bool {
        matches!(self, Self::Monomial { .. })
    }

    /// `(F₁(x), …, F_L(x))`. Sampled families only accept their grid points.
    pub fn evaluate(&self, x: f64) -> Result<Vec<f64>> {
        match self {
            Self::Monomial { degree } => {
                let mut out = Vec::with_capacity(*degree);
                let mut p = 1.0;
                for _ in 0..*degree {
                    p *= x;
                    out.push(p);
                }
                Ok(out)
            }
            Self::Sampled { points, values } => {
                let j = points
                    .iter()
                    .position(|p| (p - x).abs() <= POINT_TOL)
                    .ok_or(Error::OffGrid(x))?;
                Ok(values.iter().map(|row| row[j]).collect())
            }
        }
    }

    /// Rows `indices` of this family, sampled on `v`.
    pub fn restrict(&self, indices: &[usize], v: &ValueSet) -> Result<Self> {
        let evals = v
            .points()
            .iter()
            .map(|&x| self.evaluate(x))
            .collect::<Result<Vec<_>>>()?;
        let values = indices
            .iter()
            .map(|&k| evals.iter().map(|e| e[k]).collect())
            .collect();
        Self::sampled(v, values)
    }
}

/// How a dropped functional is expressed over the retained ones.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DroppedCombination {
    /// 0-based index of the dropped functional.
    pub index: usize,
    /// Coefficient on the constant functional (0 when it is not part of the test).
    pub constant: f64,
    /// Coefficients aligned with `retained_indices`.
    pub coefficients: Vec<f64>,
    /// Max absolute resubstitution error over the value set.
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IndependenceResult {
    pub independent: bool,
    /// Whether the constant functional 1 was part of the family tested.
    pub constant_included: bool,
    /// Rank of the evaluation matrix; counts the constant when included.
    pub effective_count: usize,
    /// 0-based indices of retained functionals (the constant is implicit).
    pub retained_indices: Vec<usize>,
    /// Points of the value set at which the retained evaluation minor is invertible.
    pub witnesses: Vec<f64>,
    pub combination: Vec<DroppedCombination>,
    /// 2-norm condition number of the retained witness minor.
    pub witness_condition: f64,
}

fn evaluation_matrix(fam: &FunctionalFamily, v: &ValueSet, include_constant: bool) -> Result<DMatrix<f64>> {
    let offset = usize::from(include_constant);
    let cols = fam.len() + offset;
    let mut m = DMatrix::zeros(v.len(), cols);
    for (r, &x) in v.points().iter().enumerate() {
        if include_constant {
            m[(r, 0)] = 1.0;
        }
        for (k, f) in fam.evaluate(x)?.into_iter().enumerate() {
            m[(r, k + offset)] = f;
        }
    }
    Ok(m)
}

fn column_set(m: &DMatrix<f64>, cols: &[usize]) -> RealVectorSet {
    let vectors = cols
        .iter()
        .map(|&c| m.column(c).iter().copied().collect())
        .collect();
    RealVectorSet::new(m.nrows(), vectors).expect("columns share length")
}

fn sub_matrix(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |r, c| m[(rows[r], cols[c])])
}

/// `k`-th largest singular value (1-based) of `m`.
fn kth_singular_value(m: &DMatrix<f64>, k: usize) -> f64 {
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s.get(k - 1).copied().unwrap_or(0.0)
}

/// Decides linear independence of `fam` (optionally with the constant 1
/// prepended) over `v`.
///
/// Columns are retained greedily in order, so the earliest members of a
/// dependent subset are kept. Witnesses are chosen row by row, each time taking
/// the point that maximizes the smallest nonzero singular value of the growing
/// minor (ties go to the lower point).
pub fn is_independent(
    fam: &FunctionalFamily,
    v: &ValueSet,
    include_constant: bool,
    tol: f64,
) -> Result<IndependenceResult> {
    let m = evaluation_matrix(fam, v, include_constant)?;
    let offset = usize::from(include_constant);
    let mut retained_cols: Vec<usize> = Vec::new();
    let mut dropped_cols: Vec<usize> = Vec::new();
    for c in 0..m.ncols() {
        let mut trial = retained_cols.clone();
        trial.push(c);
        if numerical_rank(&column_set(&m, &trial), tol) == trial.len() {
            retained_cols = trial;
        } else {
            dropped_cols.push(c);
        }
    }
    let p = retained_cols.len();

    let mut witness_rows: Vec<usize> = Vec::new();
    for step in 1..=p {
        let mut best: Option<(usize, f64)> = None;
        for r in 0..v.len() {
            if witness_rows.contains(&r) {
                continue;
            }
            let mut rows = witness_rows.clone();
            rows.push(r);
            let s = kth_singular_value(&sub_matrix(&m, &rows, &retained_cols), step);
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((r, s));
            }
        }
        witness_rows.push(best.expect("rank p needs at least p points").0);
    }
    witness_rows.sort_unstable();
    let witness_condition = if p == 0 {
        1.0
    } else {
        let s = sub_matrix(&m, &witness_rows, &retained_cols).singular_values();
        let max = s.iter().copied().fold(0.0, f64::max);
        let min = s.iter().copied().fold(f64::INFINITY, f64::min);
        max / min
    };

    let retained = sub_matrix(&m, &(0..v.len()).collect::<Vec<_>>(), &retained_cols);
    let mut combination = Vec::new();
    for &d in &dropped_cols {
        let target = DVector::from_iterator(m.nrows(), m.column(d).iter().copied());
        let coeffs = if p == 0 {
            DVector::zeros(0)
        } else {
            retained
                .clone()
                .try_svd(true, true, f64::EPSILON, 10_000)
                .ok_or_else(|| Error::Consistency("least squares did not converge".into()))?
                .solve(&target, 1e-14)
                .map_err(|e| Error::Consistency(format!("least squares failed: {e}")))?
        };
        let residual = if p == 0 {
            target.amax()
        } else {
            (&retained * &coeffs - &target).amax()
        };
        let (constant, coefficients) = if include_constant {
            (coeffs[0], coeffs.iter().skip(1).copied().collect())
        } else {
            (0.0, coeffs.iter().copied().collect())
        };
        combination.push(DroppedCombination {
            index: d - offset,
            constant,
            coefficients,
            residual,
        });
    }

    Ok(IndependenceResult {
        independent: dropped_cols.is_empty(),
        constant_included: include_constant,
        effective_count: p,
        retained_indices: retained_cols
            .iter()
            .filter(|&&c| c >= offset)
            .map(|&c| c - offset)
            .collect(),
        witnesses: witness_rows.iter().map(|&r| v.points()[r]).collect(),
        combination,
        witness_condition,
    })
}

fn fold_operators(
    res: &IndependenceResult,
    mus: &[HermitianOperator],
) -> (Vec<HermitianOperator>, Vec<(usize, f64)>) {
    let mut folded: Vec<HermitianOperator> = res.retained_indices.iter().map(|&k| mus[k].clone()).collect();
    let mut constants = Vec::new();
    for comb in &res.combination {
        for (q, &c) in comb.coefficients.iter().enumerate() {
            if c != 0.0 {
                folded[q] = folded[q].add_scaled(&mus[comb.index], c);
            }
        }
        if comb.constant != 0.0 {
            constants.push((comb.index, comb.constant));
        }
    }
    (folded, constants)
}

fn check_sizes(fam: &FunctionalFamily, mus: &[HermitianOperator]) -> Result<()> {
    if mus.len() != fam.len() {
        return Err(Error::SizeMismatch(format!(
            "{} coupling operators for {} functionals",
            mus.len(),
            fam.len()
        )));
    }
    Ok(())
}

/// Drops dependent functionals of `fam` over `v` and folds their operators into
/// the retained ones, so that `Σ_k F_k μ_k` is unchanged on `v`.
pub fn reduce_to_independent(
    fam: &FunctionalFamily,
    mus: &[HermitianOperator],
    v: &ValueSet,
    tol: f64,
) -> Result<(FunctionalFamily, Vec<HermitianOperator>)> {
    check_sizes(fam, mus)?;
    let res = is_independent(fam, v, false, tol)?;
    if res.independent {
        return Ok((fam.clone(), mus.to_vec()));
    }
    let (folded, _) = fold_operators(&res, mus);
    Ok((fam.restrict(&res.retained_indices, v)?, folded))
}

/// Reduced system data relative to `{1, F₁…F_L}`.
#[derive(Clone, Debug)]
pub struct ConstantReduction {
    pub independence: IndependenceResult,
    pub h0: HermitianOperator,
    /// Retained functionals, sampled on the value set; `None` when none survive.
    pub family: Option<FunctionalFamily>,
    pub mus: Vec<HermitianOperator>,
}

/// Like [`reduce_to_independent`] but against `{1, F₁…F_L}`: constant parts of
/// dropped functionals are folded into `h0`.
pub fn reduce_with_constant(
    fam: &FunctionalFamily,
    h0: &HermitianOperator,
    mus: &[HermitianOperator],
    v: &ValueSet,
    tol: f64,
) -> Result<ConstantReduction> {
    check_sizes(fam, mus)?;
    let res = is_independent(fam, v, true, tol)?;
    if res.independent {
        return Ok(ConstantReduction {
            independence: res,
            h0: h0.clone(),
            family: Some(fam.clone()),
            mus: mus.to_vec(),
        });
    }
    let (folded, constants) = fold_operators(&res, mus);
    let h0 = constants
        .iter()
        .fold(h0.clone(), |acc, &(d, c)| acc.add_scaled(&mus[d], c));
    let family = if res.retained_indices.is_empty() {
        None
    } else {
        Some(fam.restrict(&res.retained_indices, v)?)
    };
    Ok(ConstantReduction {
        independence: res,
        h0,
        family,
        mus: folded,
    })
}

/// `M_j = −i(H₀ + Σ_k F_k(e_j) μ_k)` for each witness `e_j ∈ V`.
pub fn witness_generators(sys: &ControlSystem, witnesses: &[f64]) -> Result<Vec<ComplexMatrix>> {
    witnesses
        .iter()
        .map(|&e| {
            if !sys.value_set().contains(e) {
                return Err(Error::OffGrid(e));
            }
            Ok(sys.hamiltonian(e)?.skew())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{HermitianOperator, C64};

    fn vs(p: &[f64]) -> ValueSet {
        ValueSet::new(p.to_vec()).unwrap()
    }

    fn herm(seed: f64, n: usize) -> HermitianOperator {
        let mut e = vec![C64::new(0.0, 0.0); n * n];
        for r in 0..n {
            for c in r..n {
                let re = ((r * 7 + c * 3) as f64 + seed).sin();
                let im = if r == c {
                    0.0
                } else {
                    ((r + 5 * c) as f64 * seed).cos()
                };
                e[r * n + c] = C64::new(re, im);
                e[c * n + r] = C64::new(re, -im);
            }
        }
        HermitianOperator::new(ComplexMatrix::from_row_slice(n, &e).unwrap()).unwrap()
    }

    #[test]
    fn value_set_validation() {
        let v = vs(&[1.0, -1.0, 0.0]);
        assert_eq!(v.points(), &[-1.0, 0.0, 1.0]);
        assert!(ValueSet::new(vec![]).is_err());
        assert!(ValueSet::new(vec![0.0, 1e-13]).is_err());
        assert!(ValueSet::new(vec![f64::NAN]).is_err());
        let g = ValueSet::uniform_grid(-1.0, 1.0, 5).unwrap();
        assert_eq!(g.points(), &[-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert_eq!(g.position(0.5), Some(3));
        assert!(!g.contains(0.25));
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(
            FunctionalFamily::monomial(3).unwrap().evaluate(2.0).unwrap(),
            vec![2.0, 4.0, 8.0]
        );
        assert_eq!(
            FunctionalFamily::monomial(4).unwrap().evaluate(0.0).unwrap(),
            vec![0.0; 4]
        );
        assert_eq!(
            FunctionalFamily::monomial(1).unwrap().evaluate(0.37).unwrap(),
            vec![0.37]
        );
        assert!(FunctionalFamily::monomial(0).is_err());
        let v = vs(&[0.0, 1.0]);
        let s = FunctionalFamily::sampled(&v, vec![vec![3.0, 4.0]]).unwrap();
        assert_eq!(s.evaluate(1.0).unwrap(), vec![4.0]);
        assert_eq!(s.evaluate(0.5), Err(Error::OffGrid(0.5)));
        assert!(FunctionalFamily::sampled(&v, vec![vec![1.0]]).is_err());
    }

    #[test]
    fn vandermonde_independent() {
        let res = is_independent(
            &FunctionalFamily::monomial(2).unwrap(),
            &vs(&[0., 1., 2.]),
            true,
            1e-9,
        )
        .unwrap();
        assert!(res.independent);
        assert_eq!(res.effective_count, 3);
        assert_eq!(res.retained_indices, vec![0, 1]);
        assert_eq!(res.witnesses, vec![0., 1., 2.]);
        assert!(res.witness_condition.is_finite());
    }

    #[test]
    fn proportional_family_is_dependent() {
        let v = vs(&[-1.0, 0.5, 2.0]);
        let fam = FunctionalFamily::sampled(&v, vec![vec![-1.0, 0.5, 2.0], vec![-2.0, 1.0, 4.0]]).unwrap();
        let res = is_independent(&fam, &v, false, 1e-9).unwrap();
        assert!(!res.independent);
        assert_eq!(res.effective_count, 1);
        assert_eq!(res.retained_indices, vec![0]);
        assert_eq!(res.combination.len(), 1);
        assert_eq!(res.combination[0].index, 1);
        assert!((res.combination[0].coefficients[0] - 2.0).abs() < 1e-12);
        assert_eq!(res.witnesses.len(), 1);
        assert!(v.contains(res.witnesses[0]));
    }

    #[test]
    fn zero_functional_is_dependent() {
        let v = vs(&[0.0, 1.0, 2.0]);
        let fam = FunctionalFamily::sampled(&v, vec![vec![0.0; 3]]).unwrap();
        let res = is_independent(&fam, &v, false, 1e-9).unwrap();
        assert!(!res.independent);
        assert_eq!(res.effective_count, 0);
        assert!(res.witnesses.is_empty());
    }

    #[test]
    fn reduction_examples() {
        let v = vs(&[-1.0, 0.5, 2.0]);
        let mus = vec![herm(0.3, 2), herm(1.1, 2), herm(2.3, 2)];

        let fam = FunctionalFamily::monomial(2).unwrap();
        let (f2, m2) = reduce_to_independent(&fam, &mus[..2], &v, 1e-9).unwrap();
        assert_eq!(f2, fam);
        assert_eq!(m2, mus[..2].to_vec());

        let prop = FunctionalFamily::sampled(
            &v,
            vec![v.points().to_vec(), v.points().iter().map(|x| 2.0 * x).collect()],
        )
        .unwrap();
        let (f, m) = reduce_to_independent(&prop, &mus[..2], &v, 1e-9).unwrap();
        assert_eq!(f.len(), 1);
        let want = mus[0].add_scaled(&mus[1], 2.0);
        assert!(m[0].matrix().distance(want.matrix()) < 1e-12);

        let rows = vec![
            v.points().to_vec(),
            v.points().iter().map(|x| x * x).collect(),
            v.points().iter().map(|x| x + x * x).collect(),
        ];
        let fam3 = FunctionalFamily::sampled(&v, rows).unwrap();
        let (f, m) = reduce_to_independent(&fam3, &mus, &v, 1e-9).unwrap();
        assert_eq!(f.len(), 2);
        assert!(m[0].matrix().distance(mus[0].add_scaled(&mus[2], 1.0).matrix()) < 1e-10);
        assert!(m[1].matrix().distance(mus[1].add_scaled(&mus[2], 1.0).matrix()) < 1e-10);
        // Resubstitution on every point of V.
        for &x in v.points() {
            let lhs = fam3
                .evaluate(x)
                .unwrap()
                .iter()
                .zip(&mus)
                .fold(ComplexMatrix::zeros(2), |acc, (f, mu)| {
                    &acc + &mu.matrix().scale_real(*f)
                });
            let rhs = f
                .evaluate(x)
                .unwrap()
                .iter()
                .zip(&m)
                .fold(ComplexMatrix::zeros(2), |acc, (f, mu)| {
                    &acc + &mu.matrix().scale_real(*f)
                });
            assert!(lhs.distance(&rhs) < 1e-10);
        }

        assert!(matches!(
            reduce_to_independent(&fam3, &mus[..1], &v, 1e-9),
            Err(Error::SizeMismatch(_))
        ));
    }

    #[test]
    fn constant_reduction_folds_into_h0() {
        let v = vs(&[0.0, 1.0, 2.0]);
        // F1(x) = x, F2(x) = 3 + x: F2 = 3·1 + F1.
        let fam = FunctionalFamily::sampled(&v, vec![vec![0., 1., 2.], vec![3., 4., 5.]]).unwrap();
        let h0 = herm(0.7, 2);
        let mus = vec![herm(0.3, 2), herm(1.9, 2)];
        let red = reduce_with_constant(&fam, &h0, &mus, &v, 1e-9).unwrap();
        assert!(!red.independence.independent);
        assert!(red.h0.matrix().distance(h0.add_scaled(&mus[1], 3.0).matrix()) < 1e-10);
        assert!(
            red.mus[0]
                .matrix()
                .distance(mus[0].add_scaled(&mus[1], 1.0).matrix())
                < 1e-10
        );
    }
}
