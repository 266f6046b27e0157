//! Shared fixtures and independent oracles for the integration tests.
//!
//! The oracles here deliberately avoid the library's Gram-Schmidt closure and
//! functional machinery: closures are grown by re-orthonormalizing the whole
//! spanning set through its Gram matrix every round.
#![allow(dead_code)]

use nalgebra::DMatrix;
use qlie::functionals::{FunctionalFamily, ValueSet};
use qlie::linalg::{expm_skew, realify, unrealify, ComplexMatrix, HermitianOperator, C64};
use qlie::system::ControlSystem;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn herm_from(n: usize, re: &[f64]) -> HermitianOperator {
    let z: Vec<C64> = re.iter().map(|&x| c(x, 0.0)).collect();
    HermitianOperator::new(ComplexMatrix::from_row_slice(n, &z).unwrap()).unwrap()
}

pub fn random_complex(n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let e: Vec<C64> = (0..n * n)
        .map(|_| c(StandardNormal.sample(rng), StandardNormal.sample(rng)))
        .collect();
    ComplexMatrix::from_row_slice(n, &e).unwrap()
}

pub fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> HermitianOperator {
    let g = random_complex(n, rng);
    HermitianOperator::new((&g + &g.adjoint()).scale_real(0.5)).unwrap()
}

pub fn random_skew(n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    random_hermitian(n, rng).skew()
}

pub fn random_unitary(n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    expm_skew(&random_skew(n, rng), 1.0).unwrap()
}

pub fn conjugate(h: &HermitianOperator, u: &ComplexMatrix) -> HermitianOperator {
    let m = &(u * h.matrix()) * &u.adjoint();
    HermitianOperator::new((&m + &m.adjoint()).scale_real(0.5)).unwrap()
}

pub fn sz_sx() -> ControlSystem {
    ControlSystem::new(
        herm_from(2, &[1., 0., 0., -1.]),
        vec![herm_from(2, &[0., 1., 1., 0.])],
        FunctionalFamily::monomial(1).unwrap(),
        ValueSet::new(vec![-1.0, 0.0, 1.0]).unwrap(),
    )
    .unwrap()
}

/// Random system with traceless operators (projected), monomial(L).
pub fn random_traceless(n: usize, l: usize, rng: &mut ChaCha8Rng) -> ControlSystem {
    let project = |h: HermitianOperator| {
        let shift = h.trace() / n as f64;
        h.add_scaled(&HermitianOperator::from_real_diagonal(&vec![1.0; n]), -shift)
    };
    ControlSystem::new(
        project(random_hermitian(n, rng)),
        (0..l).map(|_| project(random_hermitian(n, rng))).collect(),
        FunctionalFamily::monomial(l).unwrap(),
        ValueSet::uniform_grid(-1.0, 1.0, l + 2).unwrap(),
    )
    .unwrap()
}

/// Orthonormal basis of the span of `vs`: eigenvectors of the Gram matrix
/// `M Mᵀ` whose eigenvalues exceed `rel·λ_max`. Checked for orthonormality and
/// for reproducing every input vector before it is returned.
fn span_basis(vs: &[Vec<f64>], rel: f64) -> Vec<Vec<f64>> {
    if vs.is_empty() {
        return Vec::new();
    }
    let d = vs[0].len();
    let m = DMatrix::from_fn(d, vs.len(), |r, c| vs[c][r]);
    let eig = (&m * m.transpose()).symmetric_eigen();
    let lmax = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    if lmax == 0.0 {
        return Vec::new();
    }
    let keep: Vec<usize> = (0..d).filter(|&k| eig.eigenvalues[k] > rel * lmax).collect();
    let q = DMatrix::from_fn(d, keep.len(), |r, c| eig.eigenvectors[(r, keep[c])]);
    let gram = q.transpose() * &q;
    assert!((gram - DMatrix::identity(keep.len(), keep.len())).amax() < 1e-10);
    let residual = &m - &q * (q.transpose() * &m);
    assert!(
        residual.amax() <= 1e-6 * m.amax().max(1.0),
        "span basis misses an input"
    );
    (0..keep.len())
        .map(|c| q.column(c).iter().copied().collect())
        .collect()
}

/// Closure by brute force: every round brackets all pairs of an orthonormal basis of
/// the current span and re-orthonormalizes the union. Basis vectors have unit
/// norm, so brackets are added at their natural scale.
pub fn oracle_closure(gens: &[ComplexMatrix]) -> Vec<ComplexMatrix> {
    let n = gens[0].dim();
    let mut basis = span_basis(&gens.iter().map(realify).collect::<Vec<_>>(), 1e-14);
    loop {
        let mats: Vec<ComplexMatrix> = basis.iter().map(|v| unrealify(v, n).unwrap()).collect();
        let mut all = basis.clone();
        for a in &mats {
            for b in &mats {
                all.push(realify(&(&(a * b) - &(b * a))));
            }
        }
        let next = span_basis(&all, 1e-14);
        if next.len() == basis.len() {
            // Strip the round-off Hermitian part the eigensolver leaves behind.
            return mats.iter().map(|x| (x - &x.adjoint()).scale_real(0.5)).collect();
        }
        basis = next;
    }
}

/// Null-space dimension of `X ↦ XP − PX` restricted to `span(basis)`.
pub fn oracle_centralizer_dim(basis: &[ComplexMatrix], p: &ComplexMatrix) -> usize {
    let images: Vec<Vec<f64>> = basis.iter().map(|b| realify(&(&(b * p) - &(p * b)))).collect();
    basis.len() - span_basis(&images, 1e-14).len()
}

pub fn p_matrix(n: usize) -> ComplexMatrix {
    let mut d = vec![0.0; n];
    d[0] = 1.0;
    ComplexMatrix::from_real_diagonal(&d).scale(c(0.0, 1.0))
}

/// Verdicts for `H₀ + Σ ε^k μ_k` straight from the raw operators: Vandermonde
/// independence by counting distinct points, closure and centralizer by the
/// oracles above.
pub fn monomial_verdicts(h0: &HermitianOperator, mus: &[HermitianOperator], points: &[f64]) -> (bool, bool) {
    let n = h0.dim();
    let l = mus.len();
    let mut sorted = points.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup_by(|a, b| (*a - *b).abs() <= 1e-12);
    if sorted.len() < l + 1 {
        return (false, false);
    }
    let ops: Vec<&HermitianOperator> = std::iter::once(h0).chain(mus).collect();
    let gens: Vec<ComplexMatrix> = ops.iter().map(|h| h.skew()).collect();
    let basis = oracle_closure(&gens);
    let traced = ops.iter().any(|h| h.trace().abs() > 1e-10 * n as f64);
    let target = if traced { n * n } else { n * n - 1 };
    let density = basis.len() == target;
    let wave = basis.len() - oracle_centralizer_dim(&basis, &p_matrix(n)) == 2 * n - 2;
    (density, wave)
}

pub fn random_points(k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let mut p: Vec<f64> = (0..k).map(|_| rng.random_range(-1.0..1.0)).collect();
        p.sort_by(f64::total_cmp);
        if p.windows(2).all(|w| w[1] - w[0] > 1e-3) {
            return p;
        }
    }
}
