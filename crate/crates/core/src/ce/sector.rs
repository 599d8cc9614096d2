use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::generators::GeneratorTable;
use crate::poisson::{AlgebraSpec, Monomial};

/// Which dual generators a wedge may contain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeneratorScope {
    /// Cochains on the whole algebra.
    All,
    /// Wedges with no quadratic generator (cochains vanishing on sp(2n)).
    Horizontal,
    /// Only quadratic generators: cochains of sp(2n) itself.
    Symplectic,
}

impl GeneratorScope {
    pub fn name(self) -> &'static str {
        match self {
            GeneratorScope::All => "all",
            GeneratorScope::Horizontal => "horizontal",
            GeneratorScope::Symplectic => "symplectic",
        }
    }
}

/// A strictly increasing sequence of dual-generator ids.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WedgeMonomial {
    generators: Vec<u32>,
}

impl WedgeMonomial {
    pub fn new(mut generators: Vec<u32>) -> Option<Self> {
        generators.sort_unstable();
        if generators.windows(2).any(|w| w[0] == w[1]) {
            return None;
        }
        Some(WedgeMonomial { generators })
    }

    pub fn generators(&self) -> &[u32] {
        &self.generators
    }

    pub fn degree(&self) -> usize {
        self.generators.len()
    }

    /// Sum of the monomial weights of the generators.
    pub fn weight(&self, table: &GeneratorTable) -> i64 {
        self.generators.iter().map(|&g| table.weight(g)).sum()
    }
}

/// Ordered basis of one `(degree, weight)` sector of the cochain complex.
///
/// Wedges are stored flat (`degree` ids per wedge) in lexicographic order
/// of their id sequences, so lookup is a binary search.
#[derive(Clone, Debug)]
pub struct SectorBasis {
    table: Arc<GeneratorTable>,
    scope: GeneratorScope,
    degree: usize,
    weight: i64,
    charge: Option<Vec<i32>>,
    wedges: Vec<u32>,
    len: usize,
}

impl SectorBasis {
    /// Wedges of `degree` distinct generators (allowed by `scope`) whose
    /// weights sum to `weight`, optionally restricted to a torus charge.
    ///
    /// Enumeration runs over weight profiles: how many generators to take
    /// from each monomial-weight class. Only the linear class has negative
    /// weight, so once it is fixed the remaining budget bounds every
    /// positive class.
    pub fn enumerate(
        table: &Arc<GeneratorTable>,
        scope: GeneratorScope,
        degree: usize,
        weight: i64,
        charge: Option<&[i32]>,
    ) -> SectorBasis {
        let mut classes: Vec<(i64, Vec<u32>)> = Vec::new();
        for w in -1..=table.max_weight() {
            let allowed = match scope {
                GeneratorScope::All => true,
                GeneratorScope::Horizontal => w != 0,
                GeneratorScope::Symplectic => w == 0,
            };
            if allowed {
                classes.push((w, table.class(w).collect()));
            }
        }
        let mut found: Vec<Vec<u32>> = Vec::new();
        let mut profile = Vec::with_capacity(classes.len());
        profiles(&classes, 0, degree, weight, &mut profile, &mut |counts| {
            expand_profile(table, &classes, counts, charge, &mut found);
        });
        found.sort_unstable();
        let len = found.len();
        let wedges = found.into_iter().flatten().collect();
        SectorBasis {
            table: Arc::clone(table),
            scope,
            degree,
            weight,
            charge: charge.map(<[i32]>::to_vec),
            wedges,
            len,
        }
    }

    pub fn table(&self) -> &Arc<GeneratorTable> {
        &self.table
    }

    pub fn spec(&self) -> AlgebraSpec {
        self.table.spec()
    }

    pub fn scope(&self) -> GeneratorScope {
        self.scope
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn weight(&self) -> i64 {
        self.weight
    }

    pub fn charge(&self) -> Option<&[i32]> {
        self.charge.as_deref()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn wedge(&self, i: usize) -> &[u32] {
        &self.wedges[i * self.degree..(i + 1) * self.degree]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[u32]> + '_ {
        (0..self.len).map(move |i| self.wedge(i))
    }

    pub fn wedges(&self) -> Vec<WedgeMonomial> {
        self.iter().map(|w| WedgeMonomial { generators: w.to_vec() }).collect()
    }

    /// Position of a sorted wedge in this basis.
    pub fn position(&self, wedge: &[u32]) -> Option<usize> {
        if wedge.len() != self.degree {
            return None;
        }
        if self.degree == 0 {
            return (self.len == 1).then_some(0);
        }
        let (mut lo, mut hi) = (0, self.len);
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.wedge(mid).cmp(wedge) {
                Ordering::Less => lo = mid + 1,
                Ordering::Greater => hi = mid,
                Ordering::Equal => return Some(mid),
            }
        }
        None
    }

    /// The monomials of the `i`-th wedge.
    pub fn wedge_monomials(&self, i: usize) -> Vec<&Monomial> {
        self.wedge(i).iter().map(|&g| self.table.monomial(g)).collect()
    }

    pub fn wedge_charge(&self, wedge: &[u32]) -> Vec<i32> {
        let mut c = vec![0; self.spec().n()];
        for &g in wedge {
            for (acc, x) in c.iter_mut().zip(self.table.charge(g)) {
                *acc += x;
            }
        }
        c
    }

    /// Positions grouped by torus charge, in charge order.
    pub fn charge_blocks(&self) -> BTreeMap<Vec<i32>, Vec<usize>> {
        let mut out: BTreeMap<Vec<i32>, Vec<usize>> = BTreeMap::new();
        for (i, w) in self.iter().enumerate() {
            out.entry(self.wedge_charge(w)).or_default().push(i);
        }
        out
    }

    /// The sub-basis of wedges with the given charge, in the same order.
    pub fn restrict_to_charge(&self, charge: &[i32]) -> SectorBasis {
        let mut wedges = Vec::new();
        let mut len = 0;
        for w in self.iter() {
            if self.wedge_charge(w) == charge {
                wedges.extend_from_slice(w);
                len += 1;
            }
        }
        SectorBasis { charge: Some(charge.to_vec()), wedges, len, ..self.clone_header() }
    }

    /// Splits the basis into its charge blocks in one pass.
    pub fn split_by_charge(&self) -> BTreeMap<Vec<i32>, SectorBasis> {
        let mut out: BTreeMap<Vec<i32>, SectorBasis> = BTreeMap::new();
        for w in self.iter() {
            let c = self.wedge_charge(w);
            let block = out.entry(c.clone()).or_insert_with(|| SectorBasis {
                charge: Some(c),
                ..self.clone_header()
            });
            block.wedges.extend_from_slice(w);
            block.len += 1;
        }
        out
    }

    /// The sub-basis of wedges without quadratic generators.
    pub fn horizontal_part(&self) -> SectorBasis {
        let mut wedges = Vec::new();
        let mut len = 0;
        for w in self.iter() {
            if !w.iter().any(|&g| self.table.is_quadratic(g)) {
                wedges.extend_from_slice(w);
                len += 1;
            }
        }
        SectorBasis { scope: GeneratorScope::Horizontal, wedges, len, ..self.clone_header() }
    }

    /// The sub-basis at the given positions, which must be increasing.
    pub(crate) fn select(&self, positions: &[usize]) -> SectorBasis {
        let mut wedges = Vec::with_capacity(positions.len() * self.degree);
        for &i in positions {
            wedges.extend_from_slice(self.wedge(i));
        }
        SectorBasis { wedges, len: positions.len(), ..self.clone_header() }
    }

    fn clone_header(&self) -> SectorBasis {
        SectorBasis {
            table: Arc::clone(&self.table),
            scope: self.scope,
            degree: self.degree,
            weight: self.weight,
            charge: self.charge.clone(),
            wedges: Vec::new(),
            len: 0,
        }
    }
}

// Recurses over classes choosing a count from each; calls `emit` on every
// profile whose counts sum to `degree` and whose weights sum to `weight`.
fn profiles(
    classes: &[(i64, Vec<u32>)],
    k: usize,
    degree: usize,
    weight: i64,
    profile: &mut Vec<usize>,
    emit: &mut dyn FnMut(&[usize]),
) {
    if k == classes.len() {
        if degree == 0 && weight == 0 {
            emit(profile);
        }
        return;
    }
    let (w, ids) = &classes[k];
    let mut max = ids.len().min(degree);
    if *w > 0 {
        if weight < 0 {
            return;
        }
        // every remaining class has weight ≥ w
        if (degree as i64) * w > weight {
            return;
        }
        max = max.min((weight / w) as usize);
    }
    if *w == 0 && weight < 0 {
        return;
    }
    for j in 0..=max {
        profile.push(j);
        profiles(classes, k + 1, degree - j, weight - w * j as i64, profile, emit);
        profile.pop();
    }
}

fn expand_profile(
    table: &GeneratorTable,
    classes: &[(i64, Vec<u32>)],
    counts: &[usize],
    charge: Option<&[i32]>,
    found: &mut Vec<Vec<u32>>,
) {
    let n = table.spec().n();
    let mut current: Vec<u32> = Vec::new();
    let mut running = vec![0i32; n];
    fn rec(
        table: &GeneratorTable,
        classes: &[(i64, Vec<u32>)],
        counts: &[usize],
        k: usize,
        start: usize,
        left: usize,
        current: &mut Vec<u32>,
        running: &mut Vec<i32>,
        charge: Option<&[i32]>,
        found: &mut Vec<Vec<u32>>,
    ) {
        if left == 0 {
            // move on to the next class with a nonzero count
            let mut k2 = k + 1;
            while k2 < counts.len() && counts[k2] == 0 {
                k2 += 1;
            }
            if k2 >= counts.len() {
                if charge.map_or(true, |c| c == running.as_slice()) {
                    found.push(current.clone());
                }
                return;
            }
            return rec(table, classes, counts, k2, 0, counts[k2], current, running, charge, found);
        }
        let ids = &classes[k].1;
        for i in start..=ids.len() - left {
            let g = ids[i];
            current.push(g);
            for (acc, x) in running.iter_mut().zip(table.charge(g)) {
                *acc += x;
            }
            rec(table, classes, counts, k, i + 1, left - 1, current, running, charge, found);
            for (acc, x) in running.iter_mut().zip(table.charge(g)) {
                *acc -= x;
            }
            current.pop();
        }
    }
    let first = counts.iter().position(|&c| c > 0);
    match first {
        None => {
            if charge.map_or(true, |c| c.iter().all(|&x| x == 0)) {
                found.push(Vec::new());
            }
        }
        Some(k) => rec(table, classes, counts, k, 0, counts[k], &mut current, &mut running, charge, found),
    }
}
