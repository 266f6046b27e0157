//! Real Lie algebras generated by skew-Hermitian matrices.
//!
//! The closure is grown round by round: every commutator of a newly accepted
//! element with the current basis is rescaled to unit norm and offered to an
//! incremental modified Gram-Schmidt basis. A round that accepts nothing ends the
//! iteration. The same machinery runs in coefficient space for abstract bracket
//! tables.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::linalg::{commutator, numerical_rank, realify, unrealify, ComplexMatrix, RealVectorSet, TOL_HERM};

/// Relative residual a unit candidate must keep after projection to be accepted.
pub const TOL_ACCEPT: f64 = 1e-8;

/// Incremental orthonormal basis of real vectors.
#[derive(Clone, Debug, Default)]
pub(crate) struct Orthonormalizer {
    vectors: Vec<Vec<f64>>,
}

impl Orthonormalizer {
    pub(crate) fn len(&self) -> usize {
        self.vectors.len()
    }

    pub(crate) fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    /// Residual of `v` after projecting out the basis (two MGS passes).
    pub(crate) fn residual(&self, v: &[f64]) -> Vec<f64> {
        let mut r = v.to_vec();
        for _ in 0..2 {
            for q in &self.vectors {
                let d = dot(q, &r);
                for (ri, qi) in r.iter_mut().zip(q) {
                    *ri -= d * qi;
                }
            }
        }
        r
    }

    /// Offers `v`; it is rescaled to unit norm and accepted iff its residual
    /// exceeds `tol`. Zero vectors are never accepted.
    pub(crate) fn offer(&mut self, v: &[f64], tol: f64) -> bool {
        let norm = dot(v, v).sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return false;
        }
        let unit: Vec<f64> = v.iter().map(|x| x / norm).collect();
        let r = self.residual(&unit);
        let rn = dot(&r, &r).sqrt();
        if rn <= tol {
            return false;
        }
        self.vectors.push(r.into_iter().map(|x| x / rn).collect());
        true
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Orthonormal real basis (Frobenius inner product) of a subspace of u(n).
#[derive(Clone, Debug)]
pub struct SkewBasis {
    n: usize,
    elements: Vec<ComplexMatrix>,
    coords: Orthonormalizer,
}

impl SkewBasis {
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            elements: Vec::new(),
            coords: Orthonormalizer::default(),
        }
    }

    /// Orthonormal basis of the real span of `xs` (no bracket closure).
    pub fn span_of(xs: &[ComplexMatrix], tol: f64) -> Result<Self> {
        let n = check_generators(xs)?;
        let mut basis = Self::empty(n);
        for x in xs {
            basis.offer(x, tol);
        }
        Ok(basis)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    fn offer(&mut self, x: &ComplexMatrix, tol: f64) -> bool {
        if self.coords.offer(&realify(x), tol) {
            let v = self.coords.vectors().last().expect("just pushed");
            self.elements.push(unrealify(v, self.n).expect("length 2n²"));
            true
        } else {
            false
        }
    }

    /// True iff the residual of `x` off `span(basis)` is at most `tol × ‖x‖_F`.
    pub fn contains(&self, x: &ComplexMatrix, tol: f64) -> Result<bool> {
        if x.dim() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: x.dim(),
            });
        }
        let v = realify(x);
        let norm = dot(&v, &v).sqrt();
        if norm == 0.0 {
            return Ok(true);
        }
        let r = self.coords.residual(&v);
        Ok(dot(&r, &r).sqrt() <= tol * norm)
    }
}

/// Dimension of `basis`.
pub fn dim(basis: &SkewBasis) -> usize {
    basis.dim()
}

fn check_generators(xs: &[ComplexMatrix]) -> Result<usize> {
    let n = xs.first().ok_or(Error::EmptyInput("no generators"))?.dim();
    for x in xs {
        if x.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: x.dim(),
            });
        }
        let residual = x.skew_hermitian_residual();
        if residual > TOL_HERM {
            return Err(Error::NotSkewHermitian { residual });
        }
    }
    Ok(n)
}

/// Default round limit for an `n×n` closure.
pub fn default_max_rounds(n: usize) -> usize {
    n * n + 2
}

/// Orthonormal basis of the smallest real Lie algebra containing `generators`.
///
/// `tol` is the acceptance threshold on the unit-normalized residual of each
/// candidate; brackets whose Frobenius norm is at most `tol` are discarded
/// before normalization. `max_rounds` defaults to `n² + 2`; running out of
/// rounds is an error. All-zero generators give an empty basis.
pub fn lie_closure(generators: &[ComplexMatrix], tol: f64, max_rounds: Option<usize>) -> Result<SkewBasis> {
    let n = check_generators(generators)?;
    let max_rounds = max_rounds.unwrap_or_else(|| default_max_rounds(n));
    let full = n * n;
    let mut basis = SkewBasis::empty(n);
    for g in generators {
        if basis.dim() == full {
            break;
        }
        basis.offer(g, tol);
    }

    // Elements at indices >= `frontier` have not yet been bracketed with the rest.
    let mut frontier = 0;
    let mut rounds = 0;
    while frontier < basis.dim() && basis.dim() < full {
        if rounds == max_rounds {
            return Err(Error::NotConverged {
                max_rounds,
                dim: basis.dim(),
            });
        }
        rounds += 1;
        let snapshot = basis.dim();
        'round: for i in 0..snapshot {
            for j in (i + 1).max(frontier)..snapshot {
                let c = commutator(&basis.elements[i], &basis.elements[j])?;
                // Numerically zero bracket of two unit elements.
                if c.frobenius_norm() <= tol {
                    continue;
                }
                basis.offer(&c, tol);
                if basis.dim() == full {
                    break 'round;
                }
            }
        }
        frontier = snapshot;
    }
    Ok(basis)
}

/// Dimension of `{X ∈ span(basis) : [X, p] = 0}`.
///
/// Null-space dimension of `c ↦ [Σ cᵢ bᵢ, p]`; singular values at or below
/// `tol × max(σ_max, ‖p‖_F)` count as zero.
pub fn centralizer_intersection_dim(basis: &SkewBasis, p: &ComplexMatrix, tol: f64) -> Result<usize> {
    if p.dim() != basis.n() {
        return Err(Error::DimensionMismatch {
            expected: basis.n(),
            found: p.dim(),
        });
    }
    if basis.dim() == 0 {
        return Ok(0);
    }
    let images = basis
        .elements()
        .iter()
        .map(|b| commutator(b, p).map(|c| realify(&c)))
        .collect::<Result<Vec<_>>>()?;
    let n = basis.n();
    let vs = RealVectorSet::new(2 * n * n, images)?;
    let s = vs.singular_values();
    let scale = s.first().copied().unwrap_or(0.0).max(p.frobenius_norm());
    let rank = if scale == 0.0 {
        0
    } else {
        s.iter().filter(|&&x| x > tol * scale).count()
    };
    Ok(basis.dim() - rank)
}

/// Structure constants of an abstract real Lie algebra on `k` named generators.
#[derive(Clone, Debug, PartialEq)]
pub struct BracketTable {
    names: Vec<String>,
    brackets: BTreeMap<(usize, usize), Vec<f64>>,
}

impl BracketTable {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Self {
        Self {
            names: names.into_iter().map(Into::into).collect(),
            brackets: BTreeMap::new(),
        }
    }

    pub fn k(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Sets `[gᵢ, gⱼ] = Σ coeffs_m g_m` and the mirrored entry `[gⱼ, gᵢ]`.
    pub fn set(&mut self, i: usize, j: usize, coeffs: Vec<f64>) -> Result<()> {
        self.check_entry(i, j, &coeffs)?;
        if i == j {
            if coeffs.iter().any(|&c| c != 0.0) {
                return Err(Error::NotAntisymmetric { i, j });
            }
            return Ok(());
        }
        self.brackets.insert((j, i), coeffs.iter().map(|c| -c).collect());
        self.brackets.insert((i, j), coeffs);
        Ok(())
    }

    /// Inserts one ordered entry without mirroring it.
    pub fn set_raw(&mut self, i: usize, j: usize, coeffs: Vec<f64>) -> Result<()> {
        self.check_entry(i, j, &coeffs)?;
        self.brackets.insert((i, j), coeffs);
        Ok(())
    }

    fn check_entry(&self, i: usize, j: usize, coeffs: &[f64]) -> Result<()> {
        let k = self.k();
        if i >= k || j >= k {
            return Err(Error::InvalidTable(format!(
                "index ({i}, {j}) out of range for {k} generators"
            )));
        }
        if coeffs.len() != k {
            return Err(Error::InvalidTable(format!(
                "bracket ({i}, {j}) has {} coefficients, expected {k}",
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("bracket coefficients"));
        }
        Ok(())
    }

    /// Coefficients of `[gᵢ, gⱼ]`; unspecified pairs are zero.
    pub fn get(&self, i: usize, j: usize) -> Vec<f64> {
        self.brackets
            .get(&(i, j))
            .cloned()
            .unwrap_or_else(|| vec![0.0; self.k()])
    }

    /// Checks `[gⱼ, gᵢ] = −[gᵢ, gⱼ]` for every pair, including `i = j`.
    pub fn validate(&self, tol: f64) -> Result<()> {
        for i in 0..self.k() {
            for j in i..self.k() {
                let a = self.get(i, j);
                let b = self.get(j, i);
                let scale = a.iter().chain(&b).fold(1.0f64, |m, x| m.max(x.abs()));
                if a.iter().zip(&b).any(|(x, y)| (x + y).abs() > tol * scale) {
                    return Err(Error::NotAntisymmetric { i, j });
                }
            }
        }
        Ok(())
    }

    /// Bilinear extension of the table to coefficient vectors.
    pub fn bracket(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.k()];
        for (&(i, j), c) in &self.brackets {
            let w = u[i] * v[j];
            if w != 0.0 {
                for (o, ck) in out.iter_mut().zip(c) {
                    *o += w * ck;
                }
            }
        }
        out
    }
}

/// Closure dimension of all `k` generators of `table`.
pub fn closure_dim_from_bracket_table(
    table: &BracketTable,
    tol: f64,
    max_rounds: Option<usize>,
) -> Result<usize> {
    let k = table.k();
    let gens: Vec<Vec<f64>> = (0..k)
        .map(|i| {
            let mut e = vec![0.0; k];
            e[i] = 1.0;
            e
        })
        .collect();
    closure_dim_from_generators(table, &gens, tol, max_rounds)
}

/// Closure dimension, under the abstract bracket, of the span of `generators`
/// (coefficient vectors of length `k`).
pub fn closure_dim_from_generators(
    table: &BracketTable,
    generators: &[Vec<f64>],
    tol: f64,
    max_rounds: Option<usize>,
) -> Result<usize> {
    table.validate(1e-12)?;
    let k = table.k();
    for g in generators {
        if g.len() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                found: g.len(),
            });
        }
    }
    let max_rounds = max_rounds.unwrap_or(k + 2);
    let mut basis = Orthonormalizer::default();
    for g in generators {
        basis.offer(g, tol);
    }
    let mut frontier = 0;
    let mut rounds = 0;
    while frontier < basis.len() && basis.len() < k {
        if rounds == max_rounds {
            return Err(Error::NotConverged {
                max_rounds,
                dim: basis.len(),
            });
        }
        rounds += 1;
        let snapshot = basis.len();
        for i in 0..snapshot {
            for j in (i + 1).max(frontier)..snapshot {
                let c = table.bracket(&basis.vectors()[i], &basis.vectors()[j]);
                if dot(&c, &c).sqrt() > tol {
                    basis.offer(&c, tol);
                }
            }
        }
        frontier = snapshot;
    }
    // Cross-check the incremental count against an SVD rank of the accepted set.
    if k > 0 && basis.len() > 0 {
        let vs = RealVectorSet::new(k, basis.vectors().to_vec())?;
        let r = numerical_rank(&vs, 1e-9);
        if r != basis.len() {
            return Err(Error::Consistency(format!(
                "bracket closure accepted {} vectors of rank {r}",
                basis.len()
            )));
        }
    }
    Ok(basis.len())
}
