use crate::error::{Error, Result};
use crate::functionals::{FunctionalFamily, ValueSet};
use crate::linalg::{ComplexMatrix, HermitianOperator};

/// `H(ε) = H₀ + Σ_k F_k(ε) μ_k` with admissible values `V`.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlSystem {
    h0: HermitianOperator,
    mus: Vec<HermitianOperator>,
    fam: FunctionalFamily,
    v: ValueSet,
}

impl ControlSystem {
    pub fn new(
        h0: HermitianOperator,
        mus: Vec<HermitianOperator>,
        fam: FunctionalFamily,
        v: ValueSet,
    ) -> Result<Self> {
        let n = h0.dim();
        if mus.is_empty() {
            return Err(Error::SizeMismatch(
                "at least one coupling operator is required".into(),
            ));
        }
        if mus.len() != fam.len() {
            return Err(Error::SizeMismatch(format!(
                "{} coupling operators for {} functionals",
                mus.len(),
                fam.len()
            )));
        }
        for mu in &mus {
            if mu.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: mu.dim(),
                });
            }
        }
        if let FunctionalFamily::Sampled { points, .. } = &fam {
            if points.len() != v.len() || points.iter().any(|&p| !v.contains(p)) {
                return Err(Error::InvalidFamily(
                    "sampled family grid differs from the value set".into(),
                ));
            }
        }
        Ok(Self { h0, mus, fam, v })
    }

    pub fn n(&self) -> usize {
        self.h0.dim()
    }

    pub fn h0(&self) -> &HermitianOperator {
        &self.h0
    }

    pub fn mus(&self) -> &[HermitianOperator] {
        &self.mus
    }

    pub fn family(&self) -> &FunctionalFamily {
        &self.fam
    }

    pub fn value_set(&self) -> &ValueSet {
        &self.v
    }

    /// `H₀ + Σ_k F_k(x) μ_k`. Monomial families accept any real `x`; sampled
    /// families only grid points.
    pub fn hamiltonian(&self, x: f64) -> Result<HermitianOperator> {
        let f = self.fam.evaluate(x)?;
        Ok(f.iter()
            .zip(&self.mus)
            .fold(self.h0.clone(), |acc, (fk, mu)| acc.add_scaled(mu, *fk)))
    }

    /// `{−iH₀, −iμ₁, …, −iμ_L}`.
    pub fn skew_generators(&self) -> Vec<ComplexMatrix> {
        std::iter::once(&self.h0)
            .chain(&self.mus)
            .map(HermitianOperator::skew)
            .collect()
    }

    /// Same system with every operator replaced by `f(op)`.
    pub fn map_operators(
        &self,
        mut f: impl FnMut(&HermitianOperator) -> Result<HermitianOperator>,
    ) -> Result<Self> {
        Self::new(
            f(&self.h0)?,
            self.mus.iter().map(&mut f).collect::<Result<_>>()?,
            self.fam.clone(),
            self.v.clone(),
        )
    }
}
