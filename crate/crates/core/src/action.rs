//! Right actions of a groupoid on a finite set, and the transformation
//! groupoid `X ⋊ Γ` with the pulled-back bundle `X * N`.

use crate::bundle::SubgroupBundle;
use crate::error::{Error, Result};
use crate::groupoid::{FiniteGroupoid, GroupoidParts};

#[derive(Clone, Debug)]
pub struct GroupoidAction {
    point_names: Vec<String>,
    moment: Vec<usize>,
    /// `x * |Γ| + γ` → `x·γ`, defined when `moment(x) == range(γ)`.
    table: Vec<Option<usize>>,
    arrows: usize,
}

impl GroupoidAction {
    /// Tabulates `act` on every pair with `moment(x) == range(γ)` and checks
    /// the right-action axioms.
    pub fn new<F>(gamma: &FiniteGroupoid, point_names: Vec<String>, moment: Vec<usize>, act: F) -> Result<Self>
    where
        F: Fn(usize, usize) -> usize,
    {
        let n = gamma.num_arrows();
        let points = point_names.len();
        if moment.len() != points {
            return Err(Error::InvalidAction("moment map length mismatch".into()));
        }
        let mut table = vec![None; points * n];
        for x in 0..points {
            for &g in gamma.with_range(moment[x]) {
                let y = act(x, g);
                if y >= points {
                    return Err(Error::InvalidAction(format!("{}·{} out of range", point_names[x], gamma.arrow_name(g))));
                }
                table[x * n + g] = Some(y);
            }
        }
        let action = GroupoidAction { point_names, moment, table, arrows: n };
        action.check(gamma)?;
        Ok(action)
    }

    fn check(&self, gamma: &FiniteGroupoid) -> Result<()> {
        for x in 0..self.num_points() {
            let u = gamma.unit_arrow(self.moment[x]);
            if self.act(x, u) != Some(x) {
                return Err(Error::InvalidAction(format!("{}·unit != {}", self.point_names[x], self.point_names[x])));
            }
            for &g in gamma.with_range(self.moment[x]) {
                let y = self.act(x, g).expect("tabulated");
                if self.moment[y] != gamma.source(g) {
                    return Err(Error::InvalidAction(format!(
                        "s({}·{}) != s({})",
                        self.point_names[x],
                        gamma.arrow_name(g),
                        gamma.arrow_name(g)
                    )));
                }
                for &h in gamma.with_range(gamma.source(g)) {
                    if self.act(y, h) != self.act(x, gamma.mul(g, h)) {
                        return Err(Error::InvalidAction(format!(
                            "({}·{})·{} != {}·({}{})",
                            self.point_names[x],
                            gamma.arrow_name(g),
                            gamma.arrow_name(h),
                            self.point_names[x],
                            gamma.arrow_name(g),
                            gamma.arrow_name(h)
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn num_points(&self) -> usize {
        self.point_names.len()
    }

    pub fn moment(&self, x: usize) -> usize {
        self.moment[x]
    }

    pub fn act(&self, x: usize, g: usize) -> Option<usize> {
        self.table[x * self.arrows + g]
    }

    pub fn point_name(&self, x: usize) -> &str {
        &self.point_names[x]
    }
}

#[derive(Clone, Debug)]
pub struct TransformationGroupoid {
    pub sigma: FiniteGroupoid,
    pub bundle: SubgroupBundle,
    /// Σ arrow → `(x, γ)`.
    pub pairs: Vec<(usize, usize)>,
}

/// `X ⋊ Γ` with arrows `(x, γ)`, `r = x`, `s = x·γ`,
/// `(x, γ)(x·γ, η) = (x, γη)`, and `A = {(x, a) : a ∈ N}`.
pub fn transformation_groupoid(
    gamma: &FiniteGroupoid,
    action: &GroupoidAction,
    n: &SubgroupBundle,
) -> Result<TransformationGroupoid> {
    for x in 0..action.num_points() {
        for &a in n.fiber(action.moment(x)) {
            if action.act(x, a) != Some(x) {
                return Err(Error::NonTrivialAction {
                    point: action.point_name(x).to_string(),
                    arrow: gamma.arrow_name(a).to_string(),
                });
            }
        }
    }
    let mut pairs = Vec::new();
    let mut index = vec![usize::MAX; action.num_points() * gamma.num_arrows()];
    for x in 0..action.num_points() {
        for &g in gamma.with_range(action.moment(x)) {
            index[x * gamma.num_arrows() + g] = pairs.len();
            pairs.push((x, g));
        }
    }
    let id = |x: usize, g: usize| index[x * gamma.num_arrows() + g];
    let target = |x: usize, g: usize| action.act(x, g).expect("composable");
    let parts = GroupoidParts {
        unit_names: (0..action.num_points()).map(|x| action.point_name(x).to_string()).collect(),
        arrow_names: pairs
            .iter()
            .map(|&(x, g)| format!("({}, {})", action.point_name(x), gamma.arrow_name(g)))
            .collect(),
        range: pairs.iter().map(|&(x, _)| x).collect(),
        source: pairs.iter().map(|&(x, g)| target(x, g)).collect(),
        inverse: pairs.iter().map(|&(x, g)| id(target(x, g), gamma.inverse(g))).collect(),
        unit_arrow: (0..action.num_points())
            .map(|x| id(x, gamma.unit_arrow(action.moment(x))))
            .collect(),
    };
    let sigma = FiniteGroupoid::from_parts(parts, |p, q| {
        let (x, g) = pairs[p];
        let (_, h) = pairs[q];
        id(x, gamma.mul(g, h))
    })
    .map_err(|r| Error::Internal(format!("transformation groupoid failed validation: {r}")))?;
    let members = (0..pairs.len()).filter(|&p| n.contains(pairs[p].1));
    let bundle = SubgroupBundle::new(&sigma, members);
    Ok(TransformationGroupoid { sigma, bundle, pairs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::{analyze_subbundle, quotient_groupoid};

    fn cyclic(n: usize) -> FiniteGroupoid {
        FiniteGroupoid::from_group("e", (0..n).map(|i| i.to_string()).collect(), 0, |a, b| (a + b) % n, |a| (n - a) % n)
            .unwrap()
    }

    fn rotation(gamma: &FiniteGroupoid, m: usize) -> GroupoidAction {
        GroupoidAction::new(gamma, (0..m).map(|x| x.to_string()).collect(), vec![0; m], |x, g| (x + g) % m).unwrap()
    }

    #[test]
    fn z4_on_two_points() {
        let gamma = cyclic(4);
        let act = rotation(&gamma, 2);
        let n = SubgroupBundle::new(&gamma, [0, 2]);
        let t = transformation_groupoid(&gamma, &act, &n).unwrap();
        assert_eq!(t.sigma.num_arrows(), 8);
        let rep = analyze_subbundle(&t.sigma, &t.bundle);
        assert!(rep.wide && rep.subgroup_bundle && rep.abelian && rep.normal);
        assert!((0..2).all(|u| t.bundle.fiber(u).len() == 2));
        let q = quotient_groupoid(&t.sigma, &t.bundle).unwrap();
        assert_eq!(q.groupoid.num_arrows(), 4);
        assert!((0..2).all(|u| q.groupoid.isotropy(u).len() == 1));
    }

    #[test]
    fn z6_on_three_points() {
        let gamma = cyclic(6);
        let act = rotation(&gamma, 3);
        let n = SubgroupBundle::new(&gamma, [0, 3]);
        let t = transformation_groupoid(&gamma, &act, &n).unwrap();
        assert_eq!(t.sigma.num_arrows(), 18);
        let q = quotient_groupoid(&t.sigma, &t.bundle).unwrap();
        assert_eq!(q.groupoid.num_arrows(), 9);
    }

    #[test]
    fn point_action_is_the_group() {
        let gamma = cyclic(5);
        let act = rotation(&gamma, 1);
        let t = transformation_groupoid(&gamma, &act, &SubgroupBundle::trivial(&gamma)).unwrap();
        assert_eq!(t.sigma.num_arrows(), 5);
        assert_eq!(t.sigma.num_units(), 1);
    }

    #[test]
    fn nontrivially_acting_bundle_is_refused() {
        let gamma = cyclic(4);
        let act = rotation(&gamma, 2);
        let n = SubgroupBundle::new(&gamma, [0, 1, 2, 3]);
        let err = transformation_groupoid(&gamma, &act, &n).unwrap_err();
        assert!(matches!(err, Error::NonTrivialAction { .. }));
    }

    #[test]
    fn broken_action_is_rejected() {
        let gamma = cyclic(3);
        let r = GroupoidAction::new(&gamma, vec!["p".into(), "q".into()], vec![0, 0], |x, g| if g == 1 { 1 - x } else { x });
        assert!(r.is_err());
    }
}
