//! Canonical example systems.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::functionals::{FunctionalFamily, ValueSet};
use crate::lie::BracketTable;
use crate::linalg::{ComplexMatrix, HermitianOperator, C64};
use crate::system::ControlSystem;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelName {
    TruncatedOscillator,
    RandomDense,
    DiagonalPair,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ModelSpec {
    pub name: ModelName,
    pub n: usize,
    pub l: usize,
    pub seed: u64,
}

impl ModelSpec {
    pub fn build(&self) -> Result<ControlSystem> {
        if self.n < 2 || self.l < 1 {
            return Err(Error::InvalidModel(format!(
                "need n >= 2 and L >= 1, got n = {}, L = {}",
                self.n, self.l
            )));
        }
        match self.name {
            ModelName::TruncatedOscillator => truncated_oscillator(self.n),
            ModelName::RandomDense => random_dense(self.n, self.l, self.seed),
            ModelName::DiagonalPair => diagonal_pair(self.n),
        }
    }
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidModel(format!(
            "dimension must be at least 2, got {n}"
        )));
    }
    Ok(())
}

fn default_values() -> ValueSet {
    ValueSet::new(vec![-1.0, 0.0, 1.0]).expect("distinct points")
}

/// Lowest `n` oscillator levels: `H₀ = diag(k + ½)`, dipole `x = (a + a†)/√2`.
pub fn truncated_oscillator(n: usize) -> Result<ControlSystem> {
    check_n(n)?;
    let h0 = HermitianOperator::from_real_diagonal(&(0..n).map(|k| k as f64 + 0.5).collect::<Vec<_>>());
    let mut x = vec![C64::new(0.0, 0.0); n * n];
    for k in 0..n - 1 {
        let e = C64::new(((k + 1) as f64 / 2.0).sqrt(), 0.0);
        x[k * n + k + 1] = e;
        x[(k + 1) * n + k] = e;
    }
    let mu = HermitianOperator::new(ComplexMatrix::from_row_slice(n, &x)?)?;
    ControlSystem::new(h0, vec![mu], FunctionalFamily::monomial(1)?, default_values())
}

/// Brackets of `a = i(−∂² + x²)`, `b = ix`, `c = ∂`, `d = −i·I`.
pub fn oscillator_bracket_table() -> BracketTable {
    let mut t = BracketTable::new(["a", "b", "c", "d"]);
    t.set(0, 1, vec![0.0, 0.0, 2.0, 0.0]).expect("in range");
    t.set(0, 2, vec![0.0, -2.0, 0.0, 0.0]).expect("in range");
    t.set(1, 2, vec![0.0, 0.0, 0.0, 1.0]).expect("in range");
    t
}

fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> HermitianOperator {
    let mut g = vec![C64::new(0.0, 0.0); n * n];
    for z in &mut g {
        *z = C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng));
    }
    let mut h = vec![C64::new(0.0, 0.0); n * n];
    for r in 0..n {
        for c in 0..n {
            h[r * n + c] = (g[r * n + c] + g[c * n + r].conj()) * 0.5;
        }
    }
    HermitianOperator::new(ComplexMatrix::from_row_slice(n, &h).expect("n² entries")).expect("symmetrized")
}

/// Gaussian Hermitian `H₀, μ₁…μ_L`, monomial(L), `V` = `L + 2` equispaced points of `[−1, 1]`.
pub fn random_dense(n: usize, l: usize, seed: u64) -> Result<ControlSystem> {
    check_n(n)?;
    if l == 0 {
        return Err(Error::InvalidModel("L must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h0 = random_hermitian(n, &mut rng);
    let mus = (0..l).map(|_| random_hermitian(n, &mut rng)).collect();
    ControlSystem::new(
        h0,
        mus,
        FunctionalFamily::monomial(l)?,
        ValueSet::uniform_grid(-1.0, 1.0, l + 2)?,
    )
}

/// `H₀ = diag(1…n)`, `μ₁ = diag(n…1)`: commuting, never controllable.
pub fn diagonal_pair(n: usize) -> Result<ControlSystem> {
    check_n(n)?;
    let up: Vec<f64> = (1..=n).map(|k| k as f64).collect();
    let down: Vec<f64> = up.iter().rev().copied().collect();
    ControlSystem::new(
        HermitianOperator::from_real_diagonal(&up),
        vec![HermitianOperator::from_real_diagonal(&down)],
        FunctionalFamily::monomial(1)?,
        default_values(),
    )
}
