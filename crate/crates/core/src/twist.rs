//! The twist over `Â⋊G` presented by a section `s: G → Σ` and the Q/Z-valued
//! 2-cocycle `ω((χ,γ),(χ·γ,η)) = χ(s(γ)s(η)s(γη)⁻¹)`, plus an exact
//! coboundary decision over Q/Z.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::action::{transformation_groupoid, GroupoidAction};
use crate::bundle::SubgroupBundle;
use crate::error::{Error, Result};
use crate::extension::Extension;
use crate::groupoid::FiniteGroupoid;
use crate::phase::{format_rational, Phase};
use crate::snf::{smith_normal_form, IntMatrix};

const NONE: usize = usize::MAX;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SectionPolicy {
    /// Earliest coset member in input order.
    First,
    /// Latest coset member in input order.
    Last,
    /// Coset (named by any member or by its quotient arrow name) → Σ arrow.
    Custom(BTreeMap<String, String>),
}

impl SectionPolicy {
    pub fn name(&self) -> &'static str {
        match self {
            SectionPolicy::First => "first",
            SectionPolicy::Last => "last",
            SectionPolicy::Custom(_) => "custom",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Section {
    pub policy: &'static str,
    /// G arrow → chosen Σ arrow.
    pub rep: Vec<usize>,
}

pub fn choose_section(ext: &Extension, policy: &SectionPolicy) -> Result<Section> {
    let g = ext.g();
    let sigma = &ext.sigma;
    let rep: Vec<usize> = match policy {
        SectionPolicy::First => (0..g.num_arrows()).map(|x| ext.quotient.coset(x)[0]).collect(),
        SectionPolicy::Last => (0..g.num_arrows())
            .map(|x| {
                if g.is_unit_arrow(x) {
                    sigma.unit_arrow(g.range(x))
                } else {
                    *ext.quotient.coset(x).last().expect("nonempty coset")
                }
            })
            .collect(),
        SectionPolicy::Custom(map) => {
            let mut rep = vec![NONE; g.num_arrows()];
            for (key, value) in map {
                let gamma = match g.arrow_by_name(key) {
                    Some(x) => x,
                    None => sigma
                        .arrow_by_name(key)
                        .map(|s| ext.project(s))
                        .ok_or_else(|| Error::InvalidSection(format!("unknown arrow {key:?}")))?,
                };
                let s = sigma
                    .arrow_by_name(value)
                    .ok_or_else(|| Error::InvalidSection(format!("unknown arrow {value:?}")))?;
                if ext.project(s) != gamma {
                    return Err(Error::InvalidSection(format!(
                        "{value} does not lie in the coset {}",
                        g.arrow_name(gamma)
                    )));
                }
                if rep[gamma] != NONE && rep[gamma] != s {
                    return Err(Error::InvalidSection(format!("two choices for {}", g.arrow_name(gamma))));
                }
                rep[gamma] = s;
            }
            // units default to unit arrows; other cosets must be covered
            for u in 0..g.num_units() {
                let x = g.unit_arrow(u);
                if rep[x] == NONE {
                    rep[x] = sigma.unit_arrow(u);
                }
            }
            if let Some(x) = rep.iter().position(|&s| s == NONE) {
                return Err(Error::InvalidSection(format!("no representative for {}", g.arrow_name(x))));
            }
            rep
        }
    };
    for u in 0..g.num_units() {
        let x = g.unit_arrow(u);
        if rep[x] != sigma.unit_arrow(u) {
            return Err(Error::InvalidSection(format!(
                "{} must map to the unit arrow, got {}",
                g.arrow_name(x),
                sigma.arrow_name(rep[x])
            )));
        }
    }
    Ok(Section { policy: policy.name(), rep })
}

/// Section, defect and cocycle over the transformation groupoid `Â⋊G`.
#[derive(Clone, Debug)]
pub struct TwistModel {
    pub section: Section,
    /// `Â⋊G`: units are characters, arrows `(χ, γ)` with `r = χ`, `s = χ·γ`.
    pub base: FiniteGroupoid,
    /// Base arrow → `(χ, γ)`.
    pub pairs: Vec<(usize, usize)>,
    index: Vec<usize>,
    g_arrows: usize,
    /// `γ·|G| + η` → member arrow `s(γ)s(η)s(γη)⁻¹` of Σ.
    defect: Vec<usize>,
    /// Character → phase on each fiber element (by fiber position).
    char_phases: Vec<Vec<Phase>>,
    /// Σ arrow → fiber position.
    positions: Vec<usize>,
}

impl TwistModel {
    pub fn build(ext: &Extension, policy: &SectionPolicy) -> Result<Self> {
        let dual = ext.dual()?;
        let section = choose_section(ext, policy)?;
        let g = ext.g();
        let sigma = &ext.sigma;
        let n = g.num_arrows();

        let names = (0..dual.num_characters()).map(|chi| dual.character_name(sigma, chi)).collect();
        let moment = (0..dual.num_characters()).map(|chi| dual.unit_of(chi)).collect();
        let reps: Vec<usize> = (0..n).map(|x| ext.quotient.coset(x)[0]).collect();
        let action = GroupoidAction::new(g, names, moment, |chi, gamma| {
            dual.act(chi, reps[gamma]).expect("composable")
        })?;
        let t = transformation_groupoid(g, &action, &SubgroupBundle::trivial(g))?;
        let mut index = vec![NONE; dual.num_characters() * n];
        for (x, &(chi, gamma)) in t.pairs.iter().enumerate() {
            index[chi * n + gamma] = x;
        }

        let mut defect = vec![NONE; n * n];
        for (gamma, eta) in g.composable_pairs() {
            let s = &section.rep;
            let prod = sigma.mul(sigma.mul(s[gamma], s[eta]), sigma.inverse(s[g.mul(gamma, eta)]));
            if !ext.bundle.contains(prod) || sigma.range(prod) != g.range(gamma) {
                return Err(Error::Internal(format!(
                    "defect at ({}, {}) is not in the bundle",
                    g.arrow_name(gamma),
                    g.arrow_name(eta)
                )));
            }
            defect[gamma * n + eta] = prod;
        }
        let char_phases = (0..dual.num_characters()).map(|chi| dual.character(chi).phases.clone()).collect();
        let positions = (0..sigma.num_arrows()).map(|a| ext.bundle.position(a).unwrap_or(NONE)).collect();

        let model = TwistModel {
            section,
            base: t.sigma,
            pairs: t.pairs,
            index,
            g_arrows: n,
            defect,
            char_phases,
            positions,
        };
        let report = cocycle_identity(&model.base, &|x, y| model.omega(x, y));
        if !report.holds() {
            return Err(Error::Internal(format!("extracted cocycle fails its identities: {report:?}")));
        }
        Ok(model)
    }

    pub fn base_arrow(&self, chi: usize, gamma: usize) -> Option<usize> {
        let x = *self.index.get(chi * self.g_arrows + gamma)?;
        (x != NONE).then_some(x)
    }

    pub fn num_arrows(&self) -> usize {
        self.pairs.len()
    }

    pub fn defect(&self, gamma: usize, eta: usize) -> Option<usize> {
        let a = self.defect[gamma * self.g_arrows + eta];
        (a != NONE).then_some(a)
    }

    /// `ω(x, y)` for composable base arrows; zero otherwise.
    pub fn omega(&self, x: usize, y: usize) -> Phase {
        let (chi, gamma) = self.pairs[x];
        let (_, eta) = self.pairs[y];
        match self.defect(gamma, eta) {
            Some(a) if self.base.is_composable(x, y) => self.char_phases[chi][self.positions[a]],
            _ => Phase::default(),
        }
    }

    /// `χ(a)` for a member arrow `a` over `p̂(χ)`.
    pub fn char_phase(&self, chi: usize, a: usize) -> Phase {
        self.char_phases[chi][self.positions[a]]
    }

    /// Rows `(chi_id, gamma_id, eta_id, phase)` for every composable pair.
    pub fn cocycle_rows(&self, g: &FiniteGroupoid) -> Vec<CocycleRow> {
        self.base
            .composable_pairs()
            .into_iter()
            .map(|(x, y)| {
                let (chi, gamma) = self.pairs[x];
                let (_, eta) = self.pairs[y];
                CocycleRow {
                    chi_id: self.base.unit_name(chi).to_string(),
                    gamma_id: g.arrow_name(gamma).to_string(),
                    eta_id: g.arrow_name(eta).to_string(),
                    phase: self.omega(x, y),
                }
            })
            .collect()
    }

    pub fn write_csv<W: std::io::Write>(&self, g: &FiniteGroupoid, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in self.cocycle_rows(g) {
            w.serialize(&row).map_err(|e| Error::Internal(e.to_string()))?;
        }
        w.flush().map_err(|e| Error::Internal(e.to_string()))?;
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct CocycleRow {
    pub chi_id: String,
    pub gamma_id: String,
    pub eta_id: String,
    pub phase: Phase,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct CocycleIdentityReport {
    pub triples_checked: usize,
    /// First failing triple, by arrow name.
    pub identity_violation: Option<[String; 3]>,
    pub normalization_violation: Option<[String; 2]>,
}

impl CocycleIdentityReport {
    pub fn holds(&self) -> bool {
        self.identity_violation.is_none() && self.normalization_violation.is_none()
    }
}

/// Checks `ω(x,y) + ω(xy,z) = ω(y,z) + ω(x,yz)` on all composable triples and
/// that `ω` vanishes when either argument is a unit.
pub fn cocycle_identity(g: &FiniteGroupoid, omega: &dyn Fn(usize, usize) -> Phase) -> CocycleIdentityReport {
    let mut report = CocycleIdentityReport::default();
    for (x, y) in g.composable_pairs() {
        if (g.is_unit_arrow(x) || g.is_unit_arrow(y)) && !omega(x, y).is_zero() && report.normalization_violation.is_none() {
            report.normalization_violation = Some([g.arrow_name(x).into(), g.arrow_name(y).into()]);
        }
        let xy = g.mul(x, y);
        for &z in g.with_range(g.source(y)) {
            report.triples_checked += 1;
            let lhs = omega(x, y) + omega(xy, z);
            let rhs = omega(y, z) + omega(x, g.mul(y, z));
            if lhs != rhs && report.identity_violation.is_none() {
                report.identity_violation = Some([g.arrow_name(x).into(), g.arrow_name(y).into(), g.arrow_name(z).into()]);
            }
        }
    }
    report
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct CertificateEntry {
    pub left: String,
    pub right: String,
    pub coefficient: String,
}

/// Integer combination `c` of the equations with `c·M = 0` but `c·ω ∉ Z`.
#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    pub entries: Vec<CertificateEntry>,
    /// `c·ω` in Q/Z, nonzero.
    pub pairing: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct CoboundaryReport {
    pub trivial: bool,
    pub common_denominator: String,
    pub components: usize,
    pub equations: usize,
    pub unknowns: usize,
    /// Arrow → phase `b(x)` with `b(x) + b(y) − b(xy) = ω(x,y)` in Q/Z.
    pub witness: Option<BTreeMap<String, String>>,
    pub certificate: Option<Certificate>,
}

impl CoboundaryReport {
    pub fn witness_phases(&self, g: &FiniteGroupoid) -> Option<Vec<BigRational>> {
        let w = self.witness.as_ref()?;
        (0..g.num_arrows())
            .map(|x| crate::phase::parse_rational(&w[g.arrow_name(x)]))
            .collect()
    }
}

fn frac_part(r: &BigRational) -> BigRational {
    r - r.floor()
}

/// Decides whether `ω` is a coboundary over Q/Z by Smith normal form on each
/// connected component, and verifies the returned witness or certificate.
pub fn coboundary_solve(g: &FiniteGroupoid, omega: &dyn Fn(usize, usize) -> Phase) -> Result<CoboundaryReport> {
    let identity = cocycle_identity(g, omega);
    if !identity.holds() {
        return Err(Error::Precondition(format!("input is not a normalized cocycle: {identity:?}")));
    }
    let pairs = g.composable_pairs();
    let l = pairs.iter().fold(1i64, |acc, &(x, y)| acc.lcm(&omega(x, y).den()));
    let big_l = BigInt::from(l);

    // components of the unit space
    let mut comp = vec![NONE; g.num_units()];
    let mut count = 0;
    for start in 0..g.num_units() {
        if comp[start] != NONE {
            continue;
        }
        let mut stack = vec![start];
        comp[start] = count;
        while let Some(u) = stack.pop() {
            for &a in g.with_range(u) {
                let v = g.source(a);
                if comp[v] == NONE {
                    comp[v] = count;
                    stack.push(v);
                }
            }
        }
        count += 1;
    }

    let mut witness = vec![BigRational::zero(); g.num_arrows()];
    for c in 0..count {
        let arrows: Vec<usize> = (0..g.num_arrows()).filter(|&x| comp[g.range(x)] == c).collect();
        let local: HashMap<usize, usize> = arrows.iter().enumerate().map(|(i, &x)| (x, i)).collect();
        let eqs: Vec<(usize, usize)> = pairs.iter().copied().filter(|&(x, _)| comp[g.range(x)] == c).collect();
        let mut m: IntMatrix = vec![vec![BigInt::zero(); arrows.len()]; eqs.len()];
        let mut rhs = Vec::with_capacity(eqs.len());
        for (row, &(x, y)) in m.iter_mut().zip(&eqs) {
            row[local[&x]] += 1;
            row[local[&y]] += 1;
            row[local[&g.mul(x, y)]] -= 1;
            rhs.push(BigInt::from(omega(x, y).scaled_to(l).expect("common denominator")));
        }
        let smith = smith_normal_form(&m, arrows.len(), vec![rhs.clone()], false);
        let t = &smith.transformed_rhs[0];
        let bad_row = (smith.rank()..eqs.len()).find(|&i| !t[i].is_multiple_of(&big_l));
        if let Some(i) = bad_row {
            let full = smith_normal_form(&m, arrows.len(), vec![rhs.clone()], true);
            let u = full.u.expect("tracked");
            let cert = &u[i];
            let image: Vec<BigInt> = (0..arrows.len()).map(|j| cert.iter().zip(&m).map(|(ci, row)| ci * &row[j]).sum()).collect();
            let pairing = BigRational::new(cert.iter().zip(&rhs).map(|(a, b)| a * b).sum(), big_l.clone());
            if image.iter().any(|x| !x.is_zero()) || pairing.is_integer() {
                return Err(Error::Internal("coboundary certificate failed verification".into()));
            }
            let entries = cert
                .iter()
                .zip(&eqs)
                .filter(|(ci, _)| !ci.is_zero())
                .map(|(ci, &(x, y))| CertificateEntry {
                    left: g.arrow_name(x).to_string(),
                    right: g.arrow_name(y).to_string(),
                    coefficient: ci.to_string(),
                })
                .collect();
            return Ok(CoboundaryReport {
                trivial: false,
                common_denominator: l.to_string(),
                components: count,
                equations: pairs.len(),
                unknowns: g.num_arrows(),
                witness: None,
                certificate: Some(Certificate { entries, pairing: format_rational(&frac_part(&pairing)) }),
            });
        }
        let y: Vec<BigRational> = (0..arrows.len())
            .map(|i| {
                if i < smith.rank() {
                    BigRational::new(t[i].clone(), &smith.diagonal[i] * &big_l)
                } else {
                    BigRational::zero()
                }
            })
            .collect();
        for (i, &x) in arrows.iter().enumerate() {
            let b: BigRational = smith.v[i].iter().zip(&y).map(|(v, yj)| yj * BigRational::from_integer(v.clone())).sum();
            witness[x] = frac_part(&b);
        }
    }

    for &(x, y) in &pairs {
        let lhs = &witness[x] + &witness[y] - &witness[g.mul(x, y)] - omega(x, y).to_rational();
        if !lhs.is_integer() {
            return Err(Error::Internal(format!(
                "coboundary witness fails at ({}, {})",
                g.arrow_name(x),
                g.arrow_name(y)
            )));
        }
    }
    let witness = (0..g.num_arrows())
        .map(|x| (g.arrow_name(x).to_string(), format_rational(&witness[x])))
        .collect();
    Ok(CoboundaryReport {
        trivial: true,
        common_denominator: l.to_string(),
        components: count,
        equations: pairs.len(),
        unknowns: g.num_arrows(),
        witness: Some(witness),
        certificate: None,
    })
}

/// `ω₁ − ω₂` for two twists built over the same base.
pub fn cocycle_difference<'a>(a: &'a TwistModel, b: &'a TwistModel) -> Result<impl Fn(usize, usize) -> Phase + 'a> {
    if a.base.arrow_names() != b.base.arrow_names() {
        return Err(Error::Precondition("twists are over different base groupoids".into()));
    }
    Ok(move |x, y| a.omega(x, y) - b.omega(x, y))
}

/// The witness as `Phase`s, when every denominator fits in an `i64`.
pub fn witness_as_phases(report: &CoboundaryReport, g: &FiniteGroupoid) -> Option<Vec<Phase>> {
    report
        .witness_phases(g)?
        .iter()
        .map(|r| {
            let (n, d) = (r.numer().to_i64()?, r.denom().to_i64()?);
            Some(Phase::new(n, d))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::haar::HaarWeights;

    fn cyclic(n: usize) -> FiniteGroupoid {
        FiniteGroupoid::from_group("e", (0..n).map(|i| i.to_string()).collect(), 0, |a, b| (a + b) % n, |a| (n - a) % n)
            .unwrap()
    }

    fn z4_over_z2() -> Extension {
        let g = cyclic(4);
        let a = SubgroupBundle::new(&g, [0, 2]);
        Extension::new(g, a, HaarWeights::uniform(1)).unwrap()
    }

    #[test]
    fn z4_defect_and_cocycle() {
        let ext = z4_over_z2();
        let t = TwistModel::build(&ext, &SectionPolicy::First).unwrap();
        assert_eq!(t.section.rep, vec![0, 1]);
        assert_eq!(t.defect(1, 1), Some(2));
        // order-2 character is the second one over the single unit
        let x = t.base_arrow(1, 1).unwrap();
        assert_eq!(t.omega(x, x), Phase::new(1, 2));
        let x0 = t.base_arrow(0, 1).unwrap();
        assert!(t.omega(x0, x0).is_zero());
    }

    #[test]
    fn z4_cocycle_is_trivial_over_q_mod_z() {
        let ext = z4_over_z2();
        let t = TwistModel::build(&ext, &SectionPolicy::First).unwrap();
        let r = coboundary_solve(&t.base, &|x, y| t.omega(x, y)).unwrap();
        assert!(r.trivial);
        let b = witness_as_phases(&r, &t.base).unwrap();
        assert!(b.iter().all(|p| 4 % p.den() == 0));
    }

    #[test]
    fn section_policies_differ_by_a_coboundary() {
        let ext = z4_over_z2();
        let first = TwistModel::build(&ext, &SectionPolicy::First).unwrap();
        let last = TwistModel::build(&ext, &SectionPolicy::Last).unwrap();
        assert_eq!(last.section.rep, vec![0, 3]);
        let diff = cocycle_difference(&first, &last).unwrap();
        assert!(coboundary_solve(&first.base, &diff).unwrap().trivial);
    }

    #[test]
    fn custom_section_is_validated() {
        let ext = z4_over_z2();
        let map = |pairs: &[(&str, &str)]| {
            SectionPolicy::Custom(pairs.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect())
        };
        assert!(TwistModel::build(&ext, &map(&[("1", "3")])).is_ok());
        assert!(matches!(choose_section(&ext, &map(&[("1", "2")])), Err(Error::InvalidSection(_))));
        assert!(matches!(choose_section(&ext, &map(&[("0", "2")])), Err(Error::InvalidSection(_))));
        assert!(matches!(choose_section(&ext, &map(&[])), Err(Error::InvalidSection(_))));
    }

    #[test]
    fn csv_export_has_one_row_per_pair() {
        let ext = z4_over_z2();
        let t = TwistModel::build(&ext, &SectionPolicy::First).unwrap();
        let mut buf = Vec::new();
        t.write_csv(ext.g(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "chi_id,gamma_id,eta_id,phase");
        assert_eq!(lines.len(), 1 + t.base.composable_pairs().len());
        assert!(lines.iter().any(|l| l.ends_with("1/2")));
    }

    #[test]
    fn non_cocycle_is_refused() {
        let g = cyclic(2);
        let r = coboundary_solve(&g, &|x, y| if x == 1 && y == 0 { Phase::new(1, 2) } else { Phase::default() });
        assert!(r.is_err());
    }
}
