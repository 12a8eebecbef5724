//! Subgroup bundles, their structural flags, and quotient groupoids.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::groupoid::{FiniteGroupoid, GroupoidParts};

/// A distinguished set of arrows of a parent groupoid. Flags such as
/// wideness or normality are not enforced here; see [`analyze_subbundle`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubgroupBundle {
    member: Vec<bool>,
    /// Member isotropy arrows grouped by unit, in parent arrow order.
    fibers: Vec<Vec<usize>>,
    /// Position of each member arrow inside its fiber.
    position: Vec<usize>,
}

impl SubgroupBundle {
    pub fn new(g: &FiniteGroupoid, arrows: impl IntoIterator<Item = usize>) -> Self {
        let mut member = vec![false; g.num_arrows()];
        for a in arrows {
            member[a] = true;
        }
        let mut fibers = vec![Vec::new(); g.num_units()];
        let mut position = vec![usize::MAX; g.num_arrows()];
        for a in 0..g.num_arrows() {
            if member[a] && g.range(a) == g.source(a) {
                let fiber = &mut fibers[g.range(a)];
                position[a] = fiber.len();
                fiber.push(a);
            }
        }
        SubgroupBundle { member, fibers, position }
    }

    pub fn from_names<S: AsRef<str>>(g: &FiniteGroupoid, names: &[S]) -> Result<Self> {
        let arrows = names
            .iter()
            .map(|n| {
                g.arrow_by_name(n.as_ref())
                    .ok_or_else(|| Error::Precondition(format!("unknown bundle arrow {:?}", n.as_ref())))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(g, arrows))
    }

    /// The bundle of unit arrows.
    pub fn trivial(g: &FiniteGroupoid) -> Self {
        Self::new(g, (0..g.num_units()).map(|u| g.unit_arrow(u)))
    }

    /// All isotropy arrows.
    pub fn full_isotropy(g: &FiniteGroupoid) -> Self {
        Self::new(g, (0..g.num_arrows()).filter(|&a| g.range(a) == g.source(a)))
    }

    pub fn contains(&self, a: usize) -> bool {
        self.member[a]
    }

    pub fn fiber(&self, u: usize) -> &[usize] {
        &self.fibers[u]
    }

    /// Index of `a` within `fiber(range(a))`.
    pub fn position(&self, a: usize) -> Option<usize> {
        let p = self.position[a];
        (p != usize::MAX).then_some(p)
    }

    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        self.member.iter().enumerate().filter(|(_, &m)| m).map(|(a, _)| a)
    }

    pub fn len(&self) -> usize {
        self.member.iter().filter(|&&m| m).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn names(&self, g: &FiniteGroupoid) -> Vec<String> {
        self.members().map(|a| g.arrow_name(a).to_string()).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BundleReport {
    pub wide: bool,
    pub subgroup_bundle: bool,
    pub abelian: bool,
    pub normal: bool,
    /// First witness for each failing flag.
    pub witnesses: Vec<String>,
}

impl BundleReport {
    /// Flags required for forming the quotient groupoid.
    pub fn quotient_ready(&self) -> Result<()> {
        for (flag, ok) in [("wide", self.wide), ("subgroup_bundle", self.subgroup_bundle), ("normal", self.normal)] {
            if !ok {
                return Err(Error::Precondition(format!(
                    "bundle is not {flag}{}",
                    self.witnesses
                        .iter()
                        .find(|w| w.starts_with(flag))
                        .map(|w| format!(" ({w})"))
                        .unwrap_or_default()
                )));
            }
        }
        Ok(())
    }
}

/// Computes the wide / subgroup-bundle / abelian / normal flags exactly.
/// Normality compares the sets `σA` and `Aσ` for every arrow `σ`.
pub fn analyze_subbundle(g: &FiniteGroupoid, a: &SubgroupBundle) -> BundleReport {
    let mut witnesses = Vec::new();
    let name = |x: usize| g.arrow_name(x);

    let missing_unit = (0..g.num_units()).find(|&u| !a.contains(g.unit_arrow(u)));
    let wide = missing_unit.is_none();
    if let Some(u) = missing_unit {
        witnesses.push(format!("wide: unit {} missing", g.unit_name(u)));
    }

    let mut subgroup_bundle = true;
    if let Some(x) = a.members().find(|&x| g.range(x) != g.source(x)) {
        subgroup_bundle = false;
        witnesses.push(format!("subgroup_bundle: {} is not isotropy", name(x)));
    }
    'closure: for u in 0..g.num_units() {
        for &x in a.fiber(u) {
            if !a.contains(g.inverse(x)) {
                subgroup_bundle = false;
                witnesses.push(format!("subgroup_bundle: inverse of {} missing", name(x)));
                break 'closure;
            }
            for &y in a.fiber(u) {
                if !a.contains(g.mul(x, y)) {
                    subgroup_bundle = false;
                    witnesses.push(format!("subgroup_bundle: {}·{} missing", name(x), name(y)));
                    break 'closure;
                }
            }
        }
    }

    let mut abelian = true;
    'comm: for u in 0..g.num_units() {
        for &x in a.fiber(u) {
            for &y in a.fiber(u) {
                if g.mul(x, y) != g.mul(y, x) {
                    abelian = false;
                    witnesses.push(format!("abelian: {}·{} != {}·{}", name(x), name(y), name(y), name(x)));
                    break 'comm;
                }
            }
        }
    }

    let mut normal = true;
    let mut left = Vec::new();
    let mut right = Vec::new();
    for s in 0..g.num_arrows() {
        left.clear();
        right.clear();
        left.extend(a.fiber(g.source(s)).iter().map(|&x| g.mul(s, x)));
        right.extend(a.fiber(g.range(s)).iter().map(|&x| g.mul(x, s)));
        left.sort_unstable();
        left.dedup();
        right.sort_unstable();
        right.dedup();
        if left != right {
            normal = false;
            witnesses.push(format!("normal: {}A != A{}", name(s), name(s)));
            break;
        }
    }

    BundleReport { wide, subgroup_bundle, abelian, normal, witnesses }
}

/// The quotient `Σ/A` by right cosets `σA`, with the projection.
#[derive(Clone, Debug)]
pub struct Quotient {
    pub groupoid: FiniteGroupoid,
    /// Σ arrow → G arrow.
    pub projection: Vec<usize>,
    /// G arrow → members of the coset, first member is the earliest in Σ order.
    pub cosets: Vec<Vec<usize>>,
}

impl Quotient {
    pub fn coset(&self, gamma: usize) -> &[usize] {
        &self.cosets[gamma]
    }
}

pub fn quotient_groupoid(g: &FiniteGroupoid, a: &SubgroupBundle) -> Result<Quotient> {
    analyze_subbundle(g, a).quotient_ready()?;

    let mut projection = vec![usize::MAX; g.num_arrows()];
    let mut cosets: Vec<Vec<usize>> = Vec::new();
    for s in 0..g.num_arrows() {
        if projection[s] != usize::MAX {
            continue;
        }
        let id = cosets.len();
        let mut members: Vec<usize> = a.fiber(g.source(s)).iter().map(|&x| g.mul(s, x)).collect();
        members.sort_unstable();
        for &m in &members {
            projection[m] = id;
        }
        cosets.push(members);
    }
    let total: usize = cosets.iter().map(|c| a.fiber(g.source(c[0])).len()).sum();
    if total != g.num_arrows() {
        return Err(Error::Internal(format!("coset sizes sum to {total}, expected {}", g.num_arrows())));
    }

    let reps: Vec<usize> = cosets.iter().map(|c| c[0]).collect();
    let parts = GroupoidParts {
        unit_names: g.unit_names().to_vec(),
        arrow_names: reps.iter().map(|&r| format!("[{}]", g.arrow_name(r))).collect(),
        range: reps.iter().map(|&r| g.range(r)).collect(),
        source: reps.iter().map(|&r| g.source(r)).collect(),
        inverse: reps.iter().map(|&r| projection[g.inverse(r)]).collect(),
        unit_arrow: (0..g.num_units()).map(|u| projection[g.unit_arrow(u)]).collect(),
    };
    let groupoid = FiniteGroupoid::from_parts(parts, |x, y| projection[g.mul(reps[x], reps[y])])
        .map_err(|r| Error::Internal(format!("quotient failed validation: {r}")))?;
    Ok(Quotient { groupoid, projection, cosets })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PrincipalityReport {
    pub principal: bool,
    /// For a finite discrete groupoid the interior of the isotropy bundle is
    /// the isotropy bundle itself, so effective and principal coincide.
    pub effective_finite_discrete: bool,
    pub nontrivial_isotropy_units: usize,
}

pub fn principality_check(g: &FiniteGroupoid) -> PrincipalityReport {
    let nontrivial = (0..g.num_units()).filter(|&u| g.isotropy(u).len() > 1).count();
    PrincipalityReport {
        principal: nontrivial == 0,
        effective_finite_discrete: nontrivial == 0,
        nontrivial_isotropy_units: nontrivial,
    }
}
