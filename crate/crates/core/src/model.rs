//! The closed-form model for non-positive weight: `Γ, Ψ_1..Ψ_n` subject to
//! `Γ^k Ψ^{k_1}..Ψ_n^{k_n} = 0` whenever `k + Σ i k_i > n`, tensored with
//! the exterior algebra on `h_1..h_n`, and `d h_i = Ψ_i`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{BettiRow, BettiTable, ComplexKind};
use crate::linalg::{rank_certified, LinalgError, RankCertificate, SparseExactMatrix, DEFAULT_PRIMES};
use crate::poisson::{AlgebraSpec, PoissonError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("model covers non-positive weight only (got weight {0})")]
    PositiveWeight(i64),
    #[error(transparent)]
    Spec(#[from] PoissonError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Cohomological degree assigned to `Γ`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GammaDegree {
    /// Degree 2: the class of the symplectic form `Σ ξ_{p_i} ∧ ξ_{q_i}`,
    /// which is what the direct computation finds.
    #[default]
    Symplectic,
    /// Degree `2n − 1`, as the theorem is usually quoted.
    Quoted,
}

impl GammaDegree {
    pub fn degree(self, n: usize) -> usize {
        match self {
            GammaDegree::Symplectic => 2,
            GammaDegree::Quoted => 2 * n - 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModelGenerator {
    Gamma,
    Psi(usize),
    H(usize),
}

impl ModelGenerator {
    pub fn degree(self, n: usize, gamma: GammaDegree) -> usize {
        match self {
            ModelGenerator::Gamma => gamma.degree(n),
            ModelGenerator::Psi(i) => 4 * i,
            ModelGenerator::H(i) => 4 * i - 1,
        }
    }

    /// Weight in the diagonal convention (twice the classical one).
    pub fn weight(self) -> i64 {
        match self {
            ModelGenerator::Gamma => -2,
            _ => 0,
        }
    }

    pub fn is_odd(self, n: usize, gamma: GammaDegree) -> bool {
        self.degree(n, gamma) % 2 == 1
    }
}

/// `Γ^gamma_exp · Π Ψ_i^{psi_exps[i]} · Π_{h_flags[i]} h_i`, in that order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ModelMonomial {
    pub gamma_exp: u32,
    pub psi_exps: Vec<u32>,
    pub h_flags: Vec<bool>,
}

impl ModelMonomial {
    pub fn unit(n: usize) -> Self {
        ModelMonomial { gamma_exp: 0, psi_exps: vec![0; n], h_flags: vec![false; n] }
    }

    pub fn n(&self) -> usize {
        self.psi_exps.len()
    }

    /// `k + Σ i k_i`, the quantity the ideal bounds by `n`.
    pub fn ideal_load(&self) -> usize {
        self.gamma_exp as usize + self.psi_exps.iter().enumerate().map(|(i, &k)| (i + 1) * k as usize).sum::<usize>()
    }

    pub fn is_nonzero(&self) -> bool {
        self.ideal_load() <= self.n()
    }

    pub fn degree(&self, gamma: GammaDegree) -> usize {
        let n = self.n();
        self.gamma_exp as usize * gamma.degree(n)
            + self.psi_exps.iter().enumerate().map(|(i, &k)| 4 * (i + 1) * k as usize).sum::<usize>()
            + self.h_flags.iter().enumerate().filter(|(_, &f)| f).map(|(i, _)| 4 * (i + 1) - 1).sum::<usize>()
    }

    pub fn weight(&self) -> i64 {
        -2 * self.gamma_exp as i64
    }

    fn sort_key(&self) -> (u32, Vec<u32>, Vec<bool>) {
        (self.gamma_exp, self.psi_exps.clone(), self.h_flags.clone())
    }
}

impl fmt::Display for ModelMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        match self.gamma_exp {
            0 => {}
            1 => parts.push("Gamma".to_string()),
            k => parts.push(format!("Gamma^{k}")),
        }
        for (i, &k) in self.psi_exps.iter().enumerate() {
            match k {
                0 => {}
                1 => parts.push(format!("Psi{}", i + 1)),
                k => parts.push(format!("Psi{}^{k}", i + 1)),
            }
        }
        for (i, &on) in self.h_flags.iter().enumerate() {
            if on {
                parts.push(format!("h{}", i + 1));
            }
        }
        if parts.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", parts.join(" "))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GkfModel {
    spec: AlgebraSpec,
    gamma: GammaDegree,
}

impl GkfModel {
    pub fn new(spec: AlgebraSpec, gamma: GammaDegree) -> Self {
        GkfModel { spec, gamma }
    }

    pub fn spec(&self) -> AlgebraSpec {
        self.spec
    }

    pub fn gamma(&self) -> GammaDegree {
        self.gamma
    }

    fn gamma_cap(&self) -> u32 {
        let n = self.spec.n() as u32;
        if self.gamma.degree(self.spec.n()) % 2 == 1 {
            1.min(n)
        } else {
            n
        }
    }

    /// Every nonzero monomial, ordered by `(degree, weight, lex)`.
    pub fn all_monomials(&self) -> Vec<ModelMonomial> {
        let n = self.spec.n();
        let mut out = Vec::new();
        for g in 0..=self.gamma_cap() {
            let mut psi = vec![0u32; n];
            psi_exponents(n, 0, n.saturating_sub(g as usize) as isize, &mut psi, &mut |k| {
                for mask in 0..(1u32 << n) {
                    out.push(ModelMonomial {
                        gamma_exp: g,
                        psi_exps: k.to_vec(),
                        h_flags: (0..n).map(|i| mask >> i & 1 == 1).collect(),
                    });
                }
            });
        }
        out.retain(ModelMonomial::is_nonzero);
        out.sort_by(|a, b| self.compare(a, b));
        out
    }

    fn compare(&self, a: &ModelMonomial, b: &ModelMonomial) -> Ordering {
        (a.degree(self.gamma), a.weight(), a.sort_key()).cmp(&(b.degree(self.gamma), b.weight(), b.sort_key()))
    }

    /// Nonzero monomials of degree at most `degree_max`.
    pub fn basis(&self, degree_max: usize) -> Vec<ModelMonomial> {
        self.all_monomials().into_iter().filter(|m| m.degree(self.gamma) <= degree_max).collect()
    }

    /// Monomials of exactly `(degree, weight)`.
    pub fn basis_in(&self, degree: usize, weight: i64) -> Vec<ModelMonomial> {
        self.all_monomials()
            .into_iter()
            .filter(|m| m.degree(self.gamma) == degree && m.weight() == weight)
            .collect()
    }

    pub fn top_degree(&self) -> usize {
        self.all_monomials().iter().map(|m| m.degree(self.gamma)).max().unwrap_or(0)
    }

    /// `d m` as signed monomials, products in the ideal dropped.
    ///
    /// `Γ` and the `Ψ_i` are closed; `d h_j = Ψ_j` and the sign is the
    /// parity of everything standing to the left of `h_j`.
    pub fn apply_d(&self, m: &ModelMonomial) -> Vec<(ModelMonomial, i64)> {
        let n = self.spec.n();
        let gamma_odd = ModelGenerator::Gamma.is_odd(n, self.gamma);
        let mut parity = if gamma_odd { m.gamma_exp % 2 == 1 } else { false };
        let mut out = Vec::new();
        for j in 0..n {
            if !m.h_flags[j] {
                continue;
            }
            let mut image = m.clone();
            image.h_flags[j] = false;
            image.psi_exps[j] += 1;
            if image.is_nonzero() {
                out.push((image, if parity { -1 } else { 1 }));
            }
            parity = !parity;
        }
        out
    }

    /// Matrix of `d` from `from` into `to`.
    pub fn differential(&self, from: &[ModelMonomial], to: &[ModelMonomial]) -> SparseExactMatrix {
        let mut triplets = Vec::new();
        for (c, m) in from.iter().enumerate() {
            for (image, sign) in self.apply_d(m) {
                let r = to.iter().position(|t| *t == image).expect("image has the next degree and same weight");
                triplets.push((r, c, sign));
            }
        }
        SparseExactMatrix::from_integer_triplets(to.len(), from.len(), triplets).expect("distinct model terms")
    }

    /// One matrix per degree `0..=degree_max`, from degree `d` to `d + 1`
    /// over all weights.
    pub fn differentials(&self, degree_max: usize) -> Vec<SparseExactMatrix> {
        let all = self.all_monomials();
        let at = |d: usize| -> Vec<ModelMonomial> { all.iter().filter(|m| m.degree(self.gamma) == d).cloned().collect() };
        (0..=degree_max).map(|d| self.differential(&at(d), &at(d + 1))).collect()
    }

    /// Cohomology of the model in one weight; the prediction for `H_(w)`.
    pub fn predicted_betti(
        &self,
        weight: i64,
        degrees: RangeInclusive<usize>,
        reduced: bool,
    ) -> Result<BettiTable, ModelError> {
        if weight > 0 {
            return Err(ModelError::PositiveWeight(weight));
        }
        let (lo, hi) = (*degrees.start(), *degrees.end());
        let rank = |d: usize| -> Result<RankCertificate, ModelError> {
            let from = self.basis_in(d, weight);
            let to = self.basis_in(d + 1, weight);
            let m = self.differential(&from, &to);
            Ok(rank_certified(&m, &DEFAULT_PRIMES, usize::MAX)?)
        };
        let mut rows = Vec::new();
        let mut incoming = if lo == 0 { RankCertificate::trivial() } else { rank(lo - 1)? };
        for d in lo..=hi {
            let out = rank(d)?;
            let dim = self.basis_in(d, weight).len();
            let betti = dim - out.rank - incoming.rank;
            rows.push(BettiRow {
                degree: d,
                dim,
                rank_out: out.rank,
                rank_in: incoming.rank,
                betti: Some(betti),
                certified: true,
                certificate: out.clone(),
            });
            incoming = out;
        }
        let mut table =
            BettiTable {
            spec: self.spec,
            weight,
            reduced: false,
            kind: ComplexKind::Model,
            torus_reduced: false,
            symmetry_reduced: false,
            rows,
        };
        if reduced {
            table.reduce();
        }
        Ok(table)
    }

    /// Relative prediction: the `Γ, Ψ` part alone, with zero differential.
    pub fn predicted_relative_betti(
        &self,
        weight: i64,
        degrees: RangeInclusive<usize>,
        reduced: bool,
    ) -> Result<BettiTable, ModelError> {
        if weight > 0 {
            return Err(ModelError::PositiveWeight(weight));
        }
        let rows = degrees
            .map(|d| {
                let dim = self
                    .basis_in(d, weight)
                    .iter()
                    .filter(|m| m.h_flags.iter().all(|&f| !f))
                    .count();
                BettiRow {
                    degree: d,
                    dim,
                    rank_out: 0,
                    rank_in: 0,
                    betti: Some(dim),
                    certified: true,
                    certificate: RankCertificate::trivial(),
                }
            })
            .collect();
        let mut table = BettiTable {
            spec: self.spec,
            weight,
            reduced: false,
            kind: ComplexKind::RelativeModel,
            torus_reduced: false,
            symmetry_reduced: false,
            rows,
        };
        if reduced {
            table.reduce();
        }
        Ok(table)
    }
}

fn psi_exponents(n: usize, i: usize, budget: isize, acc: &mut Vec<u32>, emit: &mut dyn FnMut(&[u32])) {
    if i == n {
        emit(acc);
        return;
    }
    let step = (i + 1) as isize;
    let mut k = 0;
    while k as isize * step <= budget {
        acc[i] = k;
        psi_exponents(n, i + 1, budget - k as isize * step, acc, emit);
        k += 1;
    }
    acc[i] = 0;
}

/// Nonzero model monomials of degree at most `degree_max`.
pub fn model_basis(n: usize, degree_max: usize) -> Result<Vec<ModelMonomial>, ModelError> {
    Ok(GkfModel::new(AlgebraSpec::new(n)?, GammaDegree::default()).basis(degree_max))
}

/// Model differentials `d: degree d → d + 1` for `d = 0..=degree_max`.
pub fn model_differential(n: usize, degree_max: usize) -> Result<Vec<SparseExactMatrix>, ModelError> {
    Ok(GkfModel::new(AlgebraSpec::new(n)?, GammaDegree::default()).differentials(degree_max))
}

pub fn predicted_betti(n: usize, weight: i64, degree_max: usize, reduced: bool) -> Result<BettiTable, ModelError> {
    GkfModel::new(AlgebraSpec::new(n)?, GammaDegree::default()).predicted_betti(weight, 0..=degree_max, reduced)
}

/// The `(degree, weight)` sector of the anomaly class for given `(n, m)`.
pub fn anomaly_target(n: usize, m: usize) -> (usize, i64) {
    (4 * n + m + 1, 0)
}
