use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::linalg::RankCertificate;
use crate::poisson::AlgebraSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ComplexKind {
    Absolute,
    Relative,
    Symplectic,
    Model,
    RelativeModel,
}

impl ComplexKind {
    pub fn name(self) -> &'static str {
        match self {
            ComplexKind::Absolute => "absolute",
            ComplexKind::Relative => "relative",
            ComplexKind::Symplectic => "sp",
            ComplexKind::Model => "model",
            ComplexKind::RelativeModel => "relative-model",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BettiRow {
    pub degree: usize,
    pub dim: usize,
    pub rank_out: usize,
    pub rank_in: usize,
    /// `None` when a rank in this row could not be certified.
    pub betti: Option<usize>,
    pub certified: bool,
    /// Certificate of the outgoing rank.
    pub certificate: RankCertificate,
}

/// Per-degree cohomology of one weight sector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BettiTable {
    pub spec: AlgebraSpec,
    pub weight: i64,
    pub reduced: bool,
    pub kind: ComplexKind,
    /// Dimensions count only charge-zero cochains.
    pub torus_reduced: bool,
    /// Dimensions count only orbit sums under the monomial symplectic maps.
    pub symmetry_reduced: bool,
    pub rows: Vec<BettiRow>,
}

impl BettiTable {
    pub fn row(&self, degree: usize) -> Option<&BettiRow> {
        self.rows.iter().find(|r| r.degree == degree)
    }

    /// Certified Betti number at `degree`; `None` outside the table or if uncertified.
    pub fn betti(&self, degree: usize) -> Option<usize> {
        self.row(degree).and_then(|r| r.betti)
    }

    pub fn is_certified(&self) -> bool {
        self.rows.iter().all(|r| r.certified)
    }

    pub fn degrees(&self) -> std::ops::RangeInclusive<usize> {
        let lo = self.rows.first().map_or(0, |r| r.degree);
        let hi = self.rows.last().map_or(0, |r| r.degree);
        lo..=hi
    }

    /// Nonzero Betti numbers by degree (uncertified rows are left out).
    pub fn nonzero(&self) -> BTreeMap<usize, usize> {
        self.rows.iter().filter_map(|r| r.betti.filter(|&b| b > 0).map(|b| (r.degree, b))).collect()
    }

    /// Drops the scalar line: at weight 0 the degree-0 cochains and
    /// cohomology both lose the constant.
    pub fn reduce(&mut self) {
        if self.reduced {
            return;
        }
        self.reduced = true;
        if self.weight != 0 {
            return;
        }
        if let Some(row) = self.rows.iter_mut().find(|r| r.degree == 0) {
            if row.dim > 0 && row.rank_out == 0 {
                row.dim -= 1;
                row.betti = row.betti.map(|b| b - 1);
            }
        }
    }

    /// `(Σ(−1)^d dim, Σ(−1)^d betti)` over the rows.
    pub fn euler_characteristics(&self) -> (i64, Option<i64>) {
        let sign = |d: usize| if d % 2 == 0 { 1 } else { -1 };
        let chi_c = self.rows.iter().map(|r| sign(r.degree) * r.dim as i64).sum();
        let chi_h = self
            .rows
            .iter()
            .map(|r| r.betti.map(|b| sign(r.degree) * b as i64))
            .sum::<Option<i64>>();
        (chi_c, chi_h)
    }

    /// Checks the row invariants: `betti = dim − rank_out − rank_in`,
    /// consecutive ranks match, and the truncated Euler identity
    /// `Σ(−1)^d (dim − betti) = (−1)^hi rank_out(hi) + (−1)^lo rank_in(lo)`.
    /// On a full sector the boundary terms vanish.
    pub fn check_invariants(&self) -> Result<(), String> {
        for r in &self.rows {
            if let Some(b) = r.betti {
                if r.dim != b + r.rank_out + r.rank_in {
                    return Err(format!("degree {}: dim {} != betti {} + ranks {} + {}", r.degree, r.dim, b, r.rank_out, r.rank_in));
                }
            } else if r.certified {
                return Err(format!("degree {}: certified row without a Betti number", r.degree));
            }
        }
        for w in self.rows.windows(2) {
            if w[1].degree != w[0].degree + 1 {
                return Err(format!("rows skip from degree {} to {}", w[0].degree, w[1].degree));
            }
            if w[1].rank_in != w[0].rank_out {
                return Err(format!("degree {}: rank_in {} != previous rank_out {}", w[1].degree, w[1].rank_in, w[0].rank_out));
            }
        }
        let (Some(first), Some(last)) = (self.rows.first(), self.rows.last()) else {
            return Ok(());
        };
        if let (chi_c, Some(chi_h)) = self.euler_characteristics() {
            let sign = |d: usize| if d % 2 == 0 { 1i64 } else { -1 };
            let boundary = sign(last.degree) * last.rank_out as i64 + sign(first.degree) * first.rank_in as i64;
            if chi_c - chi_h != boundary {
                return Err(format!("Euler identity fails: {chi_c} - {chi_h} != {boundary}"));
            }
        }
        Ok(())
    }

    /// True when the rows cover the whole complex: nothing enters the
    /// first row and nothing leaves the last.
    pub fn is_closed_range(&self) -> bool {
        match (self.rows.first(), self.rows.last()) {
            (Some(first), Some(last)) => first.rank_in == 0 && last.rank_out == 0,
            _ => true,
        }
    }
}

impl fmt::Display for BettiTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{} n={} w={}{}",
            self.kind.name(),
            self.spec.n(),
            self.weight,
            if self.reduced { " reduced" } else { "" }
        )?;
        writeln!(f, "{:>4} {:>10} {:>10} {:>10} {:>6}", "d", "dim", "rank_out", "rank_in", "betti")?;
        for r in &self.rows {
            let b = r.betti.map_or_else(|| "?".to_string(), |b| b.to_string());
            writeln!(f, "{:>4} {:>10} {:>10} {:>10} {:>6}", r.degree, r.dim, r.rank_out, r.rank_in, b)?;
        }
        Ok(())
    }
}
