//! Pontryagin duality for the finite abelian fibers of a bundle.
//!
//! Characters are stored as exact phases in Q/Z. The dual bundle carries the
//! right action `(χ·σ)(a) = χ(σ a σ⁻¹)` of the ambient groupoid.

use std::collections::HashMap;

use num_complex::Complex64;
use serde::Serialize;

use crate::bundle::SubgroupBundle;
use crate::error::{Error, Result};
use crate::groupoid::FiniteGroupoid;
use crate::phase::Phase;

/// A fiber `A(u)` with its own multiplication table on local indices.
#[derive(Clone, Debug)]
pub struct FiberGroup {
    pub unit: usize,
    /// Local index → parent arrow.
    pub elements: Vec<usize>,
    table: Vec<usize>,
    inverse: Vec<usize>,
    pub identity: usize,
}

impl FiberGroup {
    pub fn new(g: &FiniteGroupoid, a: &SubgroupBundle, u: usize) -> Self {
        let elements = a.fiber(u).to_vec();
        let m = elements.len();
        let local = |x: usize| a.position(x).expect("fiber closed under composition");
        let mut table = Vec::with_capacity(m * m);
        for &x in &elements {
            for &y in &elements {
                table.push(local(g.mul(x, y)));
            }
        }
        let inverse = elements.iter().map(|&x| local(g.inverse(x))).collect();
        let identity = local(g.unit_arrow(u));
        FiberGroup { unit: u, elements, table, inverse, identity }
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn mul(&self, x: usize, y: usize) -> usize {
        self.table[x * self.order() + y]
    }

    pub fn inv(&self, x: usize) -> usize {
        self.inverse[x]
    }

    pub fn is_abelian(&self) -> bool {
        let m = self.order();
        (0..m).all(|x| (0..m).all(|y| self.mul(x, y) == self.mul(y, x)))
    }

    pub fn element_order(&self, x: usize) -> usize {
        let mut k = 1;
        let mut p = x;
        while p != self.identity {
            p = self.mul(p, x);
            k += 1;
        }
        k
    }

    pub fn pow(&self, x: usize, mut k: u64) -> usize {
        let mut acc = self.identity;
        let mut base = x;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            k >>= 1;
        }
        acc
    }

    /// `(h * k)(a) = c Σ_b h(b) k(b⁻¹a)`.
    pub fn convolve(&self, weight: f64, h: &[Complex64], k: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.order()];
        for (b, hb) in h.iter().enumerate() {
            if *hb == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (c, kc) in k.iter().enumerate() {
                out[self.mul(b, c)] += hb * kc * weight;
            }
        }
        out
    }

    /// `h*(a) = conj h(a⁻¹)`.
    pub fn involution(&self, h: &[Complex64]) -> Vec<Complex64> {
        (0..self.order()).map(|a| h[self.inv(a)].conj()).collect()
    }

    /// Norm of `h` in `C*(A(u))`: the operator norm of left convolution on
    /// `ℓ²(A(u))`.
    pub fn cstar_norm(&self, weight: f64, h: &[Complex64]) -> f64 {
        let m = self.order();
        let mat = nalgebra::DMatrix::from_fn(m, m, |a, x| h[self.mul(a, self.inv(x))] * weight);
        crate::linalg::spectral_norm(&mat)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Character {
    pub unit: usize,
    /// Exponents on the chosen generators.
    pub label: Vec<u64>,
    /// Phase of each fiber element, by local index.
    pub phases: Vec<Phase>,
}

impl Character {
    pub fn value(&self, local: usize) -> Complex64 {
        self.phases[local].to_complex()
    }
}

/// Invariant-factor decomposition and the enumerated dual of one fiber.
#[derive(Clone, Debug)]
pub struct CharacterGroup {
    pub fiber: FiberGroup,
    /// `d1 | d2 | …`, ascending. Empty for the trivial group.
    pub invariant_factors: Vec<u64>,
    /// Local indices of generators, aligned with `invariant_factors`.
    pub generators: Vec<usize>,
    /// Coordinates of each element on the generators.
    pub coords: Vec<Vec<u64>>,
    pub characters: Vec<Character>,
    lookup: HashMap<Vec<Phase>, usize>,
}

impl CharacterGroup {
    pub fn order(&self) -> usize {
        self.fiber.order()
    }

    pub fn find(&self, phases: &[Phase]) -> Option<usize> {
        self.lookup.get(phases).copied()
    }

    /// `χ(a) = Σ_i label_i · coord_i(a) / d_i`.
    fn phase_of(&self, label: &[u64], coords: &[u64]) -> Phase {
        label
            .iter()
            .zip(coords)
            .zip(&self.invariant_factors)
            .map(|((&l, &c), &d)| Phase::new(((l * c) % d) as i64, d as i64))
            .sum()
    }
}

/// Splits off cyclic factors generated by elements of maximal order in the
/// successive quotients, lifting each to an element of the same order, and
/// enumerates all homomorphisms into Q/Z.
pub fn character_group(fiber: FiberGroup) -> Result<CharacterGroup> {
    let m = fiber.order();
    for x in 0..m {
        for y in 0..m {
            if fiber.mul(x, y) != fiber.mul(y, x) {
                return Err(Error::NonAbelian {
                    unit: fiber.unit.to_string(),
                    left: fiber.elements[x].to_string(),
                    right: fiber.elements[y].to_string(),
                });
            }
        }
    }

    // Subgroup spanned so far: element → coordinates on `gens`.
    let mut span: HashMap<usize, Vec<u64>> = HashMap::from([(fiber.identity, Vec::new())]);
    let mut gens: Vec<usize> = Vec::new();
    let mut orders: Vec<u64> = Vec::new();
    while span.len() < m {
        // order of x modulo the current span
        let rel_order = |x: usize| {
            let mut k = 1u64;
            let mut p = x;
            while !span.contains_key(&p) {
                p = fiber.mul(p, x);
                k += 1;
            }
            (k, p)
        };
        let (x, e, landing) = (0..m)
            .map(|x| {
                let (e, p) = rel_order(x);
                (x, e, p)
            })
            .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
            .expect("nonempty");
        // x^e = Π g_i^{t_i}; each t_i is divisible by e, so correct x by Π g_i^{-t_i/e}.
        let t = &span[&landing];
        let mut lifted = x;
        for (i, &ti) in t.iter().enumerate() {
            if ti % e != 0 {
                return Err(Error::Internal(format!("lift exponent {ti} not divisible by {e}")));
            }
            let k = (orders[i] - (ti / e) % orders[i]) % orders[i];
            lifted = fiber.mul(lifted, fiber.pow(gens[i], k));
        }
        if fiber.element_order(lifted) as u64 != e {
            return Err(Error::Internal("lifted generator has the wrong order".into()));
        }
        let mut next = HashMap::with_capacity(span.len() * e as usize);
        for (&y, c) in &span {
            let mut p = y;
            for k in 0..e {
                let mut cc = c.clone();
                cc.push(k);
                next.insert(p, cc);
                p = fiber.mul(p, lifted);
            }
        }
        span = next;
        gens.push(lifted);
        orders.push(e);
    }
    // ascending invariant factors
    gens.reverse();
    orders.reverse();
    let coords: Vec<Vec<u64>> = (0..m)
        .map(|x| {
            let mut c = span[&x].clone();
            c.reverse();
            c
        })
        .collect();

    let mut group = CharacterGroup {
        fiber,
        invariant_factors: orders,
        generators: gens,
        coords,
        characters: Vec::new(),
        lookup: HashMap::new(),
    };
    let mut labels: Vec<Vec<u64>> = vec![Vec::new()];
    for &d in &group.invariant_factors {
        labels = labels
            .into_iter()
            .flat_map(|l| {
                (0..d).map(move |k| {
                    let mut l = l.clone();
                    l.push(k);
                    l
                })
            })
            .collect();
    }
    for label in labels {
        let phases: Vec<Phase> = (0..m).map(|x| group.phase_of(&label, &group.coords[x])).collect();
        group.lookup.insert(phases.clone(), group.characters.len());
        group.characters.push(Character { unit: group.fiber.unit, label, phases });
    }
    Ok(group)
}

/// Per-unit duals with the right action of the ambient groupoid.
#[derive(Clone, Debug)]
pub struct DualBundle {
    pub groups: Vec<CharacterGroup>,
    /// Global character index → (unit, local character index).
    chars: Vec<(usize, usize)>,
    offsets: Vec<usize>,
    /// `χ * |Σ| + σ` → `χ·σ`, defined when `p̂(χ) = r(σ)`.
    action: Vec<Option<usize>>,
    arrows: usize,
}

impl DualBundle {
    pub fn num_characters(&self) -> usize {
        self.chars.len()
    }

    pub fn unit_of(&self, chi: usize) -> usize {
        self.chars[chi].0
    }

    pub fn character(&self, chi: usize) -> &Character {
        let (u, k) = self.chars[chi];
        &self.groups[u].characters[k]
    }

    /// Global indices of the characters over `u`.
    pub fn characters_at(&self, u: usize) -> std::ops::Range<usize> {
        self.offsets[u]..self.offsets[u + 1]
    }

    pub fn global_index(&self, u: usize, local: usize) -> usize {
        self.offsets[u] + local
    }

    /// `χ(a)` for a member arrow `a` of the fiber over `p̂(χ)`.
    pub fn phase(&self, a: &SubgroupBundle, chi: usize, arrow: usize) -> Phase {
        self.character(chi).phases[a.position(arrow).expect("member arrow")]
    }

    pub fn act(&self, chi: usize, sigma: usize) -> Option<usize> {
        self.action[chi * self.arrows + sigma]
    }

    pub fn character_name(&self, g: &FiniteGroupoid, chi: usize) -> String {
        let c = self.character(chi);
        let label: Vec<String> = c.label.iter().map(|l| l.to_string()).collect();
        format!("chi[{}]({})", g.unit_name(c.unit), label.join(","))
    }
}

/// Builds all fiber duals and tabulates `(χ·σ)(a) = χ(σ a σ⁻¹)`. Verifies that
/// the action is a groupoid action and is trivial on member arrows.
pub fn dual_bundle_with_action(g: &FiniteGroupoid, a: &SubgroupBundle) -> Result<DualBundle> {
    let report = crate::bundle::analyze_subbundle(g, a);
    report.quotient_ready()?;
    if !report.abelian {
        return Err(Error::Precondition("dual bundle needs an abelian bundle".into()));
    }
    let groups = (0..g.num_units())
        .map(|u| character_group(FiberGroup::new(g, a, u)))
        .collect::<Result<Vec<_>>>()?;
    let mut chars = Vec::new();
    let mut offsets = vec![0];
    for (u, grp) in groups.iter().enumerate() {
        chars.extend((0..grp.characters.len()).map(|k| (u, k)));
        offsets.push(chars.len());
    }
    let n = g.num_arrows();
    let mut action = vec![None; chars.len() * n];
    for (chi, &(u, k)) in chars.iter().enumerate() {
        let character = &groups[u].characters[k];
        for &s in g.with_range(u) {
            let src = g.source(s);
            let inv = g.inverse(s);
            let phases: Vec<Phase> = a
                .fiber(src)
                .iter()
                .map(|&x| character.phases[a.position(g.mul(g.mul(s, x), inv)).expect("normal")])
                .collect();
            let local = groups[src]
                .find(&phases)
                .ok_or_else(|| Error::Internal("conjugated character not found".into()))?;
            action[chi * n + s] = Some(offsets[src] + local);
        }
    }
    let dual = DualBundle { groups, chars, offsets, action, arrows: n };

    for chi in 0..dual.num_characters() {
        let u = dual.unit_of(chi);
        if dual.act(chi, g.unit_arrow(u)) != Some(chi) {
            return Err(Error::Internal("unit does not act trivially".into()));
        }
        for &s in g.with_range(u) {
            let y = dual.act(chi, s).expect("defined");
            if a.contains(s) && y != chi {
                return Err(Error::Internal(format!("action does not factor through the quotient at {}", g.arrow_name(s))));
            }
            for &t in g.with_range(g.source(s)) {
                if dual.act(y, t) != dual.act(chi, g.mul(s, t)) {
                    return Err(Error::Internal("dual action is not associative".into()));
                }
            }
        }
    }
    Ok(dual)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// Group elements → characters: `f̂(χ) = c Σ_a f(a) conj χ(a)`.
    Forward,
    /// Characters → group elements: `f(a) = (1/(c|A|)) Σ_χ f̂(χ) χ(a)`.
    Inverse,
}

pub fn gelfand_pair(group: &CharacterGroup, weight: f64, f: &[Complex64], direction: Direction) -> Result<Vec<Complex64>> {
    let m = group.order();
    if f.len() != m {
        return Err(Error::DimensionMismatch { expected: m, got: f.len() });
    }
    Ok(match direction {
        Direction::Forward => group
            .characters
            .iter()
            .map(|chi| f.iter().enumerate().map(|(x, v)| v * chi.value(x).conj()).sum::<Complex64>() * weight)
            .collect(),
        Direction::Inverse => {
            let scale = 1.0 / (weight * m as f64);
            (0..m)
                .map(|x| {
                    group
                        .characters
                        .iter()
                        .zip(f)
                        .map(|(chi, v)| v * chi.value(x))
                        .sum::<Complex64>()
                        * scale
                })
                .collect()
        }
    })
}
