//! The four models, each built from its own convolution formula.

use num_complex::Complex64;

use super::{Cell, CellNorm, INormLayout, Model, Parts, StarAlgebra, Term};
use crate::error::{Error, Result};
use crate::extension::Extension;
use crate::haar::to_f64;
use crate::linalg::{ONE, ZERO};
use crate::par::{map_range, Execution};
use crate::twist::{choose_section, Section, SectionPolicy, TwistModel};

const DROP: f64 = 1e-15;

pub fn build_algebra(model: Model, ext: &Extension, twist: Option<&TwistModel>, exec: Execution) -> Result<StarAlgebra> {
    let need_twist = || twist.ok_or_else(|| Error::MissingInput(format!("{} model needs a twist model", model.name())));
    match model {
        Model::Sigma => Ok(build_sigma(ext, exec)),
        Model::Fell => match twist {
            Some(t) => build_fell(ext, &t.section, exec),
            None => build_fell(ext, &choose_section(ext, &SectionPolicy::First)?, exec),
        },
        Model::Twisted => build_twisted(ext, need_twist()?, exec),
        Model::Cocycle => build_cocycle(ext, need_twist()?, exec),
    }
}

/// `(f*g)(σ) = d_{r(σ)} Σ_{τ ∈ Σ^{r(σ)}} f(τ) g(τ⁻¹σ)`, `f*(σ) = conj f(σ⁻¹)`.
pub fn build_sigma(ext: &Extension, exec: Execution) -> StarAlgebra {
    let s = &ext.sigma;
    let n = s.num_arrows();
    let terms = map_range(n, exec, |i| {
        let d = Complex64::new(ext.d(s.range(i)), 0.0);
        s.with_range(s.source(i))
            .iter()
            .map(|&j| Term { right: j, out: s.mul(i, j), coeff: d, phase: None })
            .collect()
    });
    let star = (0..n).map(|i| vec![(s.inverse(i), ONE)]).collect();
    let tau = (0..s.num_units()).map(|u| (s.unit_arrow(u), ext.mu(u) * ext.d(u))).collect();
    let cells = (0..n)
        .map(|i| Cell {
            members: vec![i],
            norm: CellNorm::Abs,
            range_unit: s.range(i),
            source_unit: s.source(i),
            range_weight: ext.d(s.range(i)),
            source_weight: ext.d(s.source(i)),
        })
        .collect();
    StarAlgebra::from_parts(Parts {
        model: Model::Sigma,
        labels: s.arrow_names().to_vec(),
        terms,
        star,
        tau,
        inorm: INormLayout { units: s.num_units(), cells, fibers: Vec::new() },
        bundle_inorm: None,
        diagonal: None,
        exec,
    })
}

/// Sections of the Fell bundle over G, stored by their values at the section
/// representatives: basis `(γ, b)` with `b ∈ A(r(γ))`.
struct FellIndex<'a> {
    ext: &'a Extension,
    rep: &'a [usize],
    offset: Vec<usize>,
}

impl<'a> FellIndex<'a> {
    fn new(ext: &'a Extension, rep: &'a [usize]) -> Self {
        let g = ext.g();
        let mut offset = Vec::with_capacity(g.num_arrows() + 1);
        offset.push(0);
        for gamma in 0..g.num_arrows() {
            offset.push(offset[gamma] + ext.bundle.fiber(g.range(gamma)).len());
        }
        FellIndex { ext, rep, offset }
    }

    fn dim(&self) -> usize {
        *self.offset.last().expect("nonempty")
    }

    /// Value at an arbitrary `σ` of the basis section `(gamma, b)`, using
    /// `f(aσ)(x) = f(σ)(xa)`.
    fn basis_value(&self, gamma: usize, b: usize, sigma: usize) -> Vec<Complex64> {
        let s = &self.ext.sigma;
        let fiber = &self.ext.fibers[s.range(sigma)];
        let mut out = vec![ZERO; fiber.order()];
        if self.ext.project(sigma) != gamma {
            return out;
        }
        let a = s.mul(sigma, s.inverse(self.rep[gamma]));
        let a_local = self.ext.bundle.position(a).expect("member");
        for (x, v) in out.iter_mut().enumerate() {
            if fiber.mul(x, a_local) == b {
                *v = ONE;
            }
        }
        out
    }

    /// `ϑ_τ(h)(y) = δ(τ) h(τ⁻¹ y τ)` for `h` on `A(s(τ))`, `y ∈ A(r(τ))`.
    fn theta(&self, tau: usize, h: &[Complex64]) -> Vec<Complex64> {
        let s = &self.ext.sigma;
        let delta = self.ext.delta_f64(tau);
        let inv = s.inverse(tau);
        self.ext
            .bundle
            .fiber(s.range(tau))
            .iter()
            .map(|&y| {
                let conj = s.mul(s.mul(inv, y), tau);
                h[self.ext.bundle.position(conj).expect("normal")] * delta
            })
            .collect()
    }

    fn emit(&self, gamma: usize, values: &[Complex64]) -> Vec<(usize, Complex64)> {
        values
            .iter()
            .enumerate()
            .filter(|(_, v)| v.norm() > DROP)
            .map(|(x, v)| (self.offset[gamma] + x, *v))
            .collect()
    }
}

/// `(f*g)(σ) = Σ_{τ̇} α^{r(σ)}(τ̇) f(τ) ∗ ϑ_τ(g(τ⁻¹σ))` with `c`-weighted
/// fiber convolution, and `f*(σ) = ϑ_σ(f(σ⁻¹)*)`.
pub fn build_fell(ext: &Extension, section: &Section, exec: Execution) -> Result<StarAlgebra> {
    let g = ext.g();
    let s = &ext.sigma;
    let idx = FellIndex::new(ext, &section.rep);
    let n = idx.dim();
    if n != s.num_arrows() {
        return Err(Error::Internal(format!("fell basis has {n} elements for {} arrows", s.num_arrows())));
    }
    let owner: Vec<(usize, usize)> = (0..g.num_arrows())
        .flat_map(|gamma| (0..idx.offset[gamma + 1] - idx.offset[gamma]).map(move |b| (gamma, b)))
        .collect();

    let terms = map_range(n, exec, |i| {
        let (gamma, b) = owner[i];
        let r = g.range(gamma);
        let fiber = &ext.fibers[r];
        let tau = section.rep[gamma];
        let mut f_tau = vec![ZERO; fiber.order()];
        f_tau[b] = ONE;
        let mut out = Vec::new();
        for &eta in g.with_range(g.source(gamma)) {
            let zeta = g.mul(gamma, eta);
            let sigma = section.rep[zeta];
            let rho = s.mul(s.inverse(tau), sigma);
            for b2 in 0..idx.offset[eta + 1] - idx.offset[eta] {
                let gv = idx.basis_value(eta, b2, rho);
                let conv = fiber.convolve(ext.c(r), &f_tau, &idx.theta(tau, &gv));
                let values: Vec<Complex64> = conv.iter().map(|v| v * ext.alpha(gamma)).collect();
                for (k, c) in idx.emit(zeta, &values) {
                    out.push(Term { right: idx.offset[eta] + b2, out: k, coeff: c, phase: None });
                }
            }
        }
        out
    });

    let star = (0..n)
        .map(|i| {
            let (gamma, b) = owner[i];
            let sigma = section.rep[g.inverse(gamma)];
            let h = idx.basis_value(gamma, b, s.inverse(sigma));
            let fiber = &ext.fibers[g.range(gamma)];
            let h_star = fiber.involution(&h);
            idx.emit(g.inverse(gamma), &idx.theta(sigma, &h_star))
        })
        .collect();

    let tau = (0..g.num_units())
        .map(|u| {
            let gamma = g.unit_arrow(u);
            let e = ext.fibers[u].identity;
            (idx.offset[gamma] + e, ext.mu(u) * ext.d(u))
        })
        .collect();
    let cells = (0..g.num_arrows())
        .map(|gamma| Cell {
            members: (idx.offset[gamma]..idx.offset[gamma + 1]).collect(),
            norm: CellNorm::Fiber { fiber: g.range(gamma), weight: ext.c(g.range(gamma)) },
            range_unit: g.range(gamma),
            source_unit: g.source(gamma),
            range_weight: ext.alpha(gamma),
            source_weight: to_f64(ext.induced.alpha_source(g, gamma)),
        })
        .collect();
    let labels = owner
        .iter()
        .map(|&(gamma, b)| format!("({}, {})", g.arrow_name(gamma), s.arrow_name(ext.bundle.fiber(g.range(gamma))[b])))
        .collect();
    Ok(StarAlgebra::from_parts(Parts {
        model: Model::Fell,
        labels,
        terms,
        star,
        tau,
        inorm: INormLayout { units: g.num_units(), cells, fibers: ext.fibers.clone() },
        bundle_inorm: None,
        diagonal: None,
        exec,
    }))
}

fn twisted_common(ext: &Extension, t: &TwistModel) -> (Vec<(usize, f64)>, INormLayout, INormLayout, Vec<usize>) {
    let g = ext.g();
    let base = &t.base;
    let tau = (0..base.num_units()).map(|chi| (base.unit_arrow(chi), 1.0)).collect();
    let alpha_source = |gamma: usize| to_f64(ext.induced.alpha_source(g, gamma));
    let intrinsic = (0..t.num_arrows())
        .map(|x| {
            let (_, gamma) = t.pairs[x];
            Cell {
                members: vec![x],
                norm: CellNorm::Abs,
                range_unit: base.range(x),
                source_unit: base.source(x),
                range_weight: ext.alpha(gamma),
                source_weight: alpha_source(gamma),
            }
        })
        .collect();
    let mut groups = vec![Vec::new(); g.num_arrows()];
    for (x, &(_, gamma)) in t.pairs.iter().enumerate() {
        groups[gamma].push(x);
    }
    let bundle = groups
        .into_iter()
        .enumerate()
        .map(|(gamma, members)| Cell {
            members,
            norm: CellNorm::SupAbs,
            range_unit: g.range(gamma),
            source_unit: g.source(gamma),
            range_weight: ext.alpha(gamma),
            source_weight: alpha_source(gamma),
        })
        .collect();
    let diagonal = (0..base.num_units()).map(|chi| base.unit_arrow(chi)).collect();
    (
        tau,
        INormLayout { units: base.num_units(), cells: intrinsic, fibers: Vec::new() },
        INormLayout { units: g.num_units(), cells: bundle, fibers: Vec::new() },
        diagonal,
    )
}

/// Equivariant functions `F(χ, aσ) = χ(a)F(χ, σ)` stored at the section
/// representatives, with `F*G(χ,σ) = Σ_{τ̇} α^{r(σ)}(τ̇) F(χ,τ) G(χ·τ, τ⁻¹σ)`
/// and `F*(χ,σ) = conj F(χ·σ, σ⁻¹)`.
pub fn build_twisted(ext: &Extension, t: &TwistModel, exec: Execution) -> Result<StarAlgebra> {
    let dual = ext.dual()?;
    let g = ext.g();
    let s = &ext.sigma;
    let rep = &t.section.rep;
    let n = t.num_arrows();
    // value of the basis function at (χ, σ): χ(σ s(σ̇)⁻¹) on its own coset
    let value = |chi: usize, sigma: usize| {
        let a = s.mul(sigma, s.inverse(rep[ext.project(sigma)]));
        t.char_phase(chi, a)
    };
    let terms = map_range(n, exec, |x| {
        let (chi, gamma) = t.pairs[x];
        let tau = rep[gamma];
        let f_tau = value(chi, tau);
        let chi2 = dual.act(chi, tau).expect("composable");
        g.with_range(g.source(gamma))
            .iter()
            .map(|&eta| {
                let zeta = g.mul(gamma, eta);
                let rho = s.mul(s.inverse(tau), rep[zeta]);
                let phase = f_tau + value(chi2, rho);
                Term {
                    right: t.base_arrow(chi2, eta).expect("composable"),
                    out: t.base_arrow(chi, zeta).expect("composable"),
                    coeff: phase.to_complex() * ext.alpha(gamma),
                    phase: Some(phase),
                }
            })
            .collect()
    });
    let star = (0..n)
        .map(|x| {
            let (chi, gamma) = t.pairs[x];
            let sigma = rep[g.inverse(gamma)];
            // the output lives over χ·σ⁻¹, the source of (χ, γ)
            let chi2 = dual.act(chi, s.inverse(sigma)).expect("composable");
            let phase = -value(chi, s.inverse(sigma));
            vec![(t.base_arrow(chi2, g.inverse(gamma)).expect("composable"), phase.to_complex())]
        })
        .collect();
    let (tau, inorm, bundle, diagonal) = twisted_common(ext, t);
    Ok(StarAlgebra::from_parts(Parts {
        model: Model::Twisted,
        labels: t.base.arrow_names().to_vec(),
        terms,
        star,
        tau,
        inorm,
        bundle_inorm: Some(bundle),
        diagonal: Some(diagonal),
        exec,
    }))
}

/// `e_x e_y = α(γ_x) e^{−2πiω(x,y)} e_{xy}`, `e_x* = e^{2πiω(x,x⁻¹)} e_{x⁻¹}`.
pub fn build_cocycle(ext: &Extension, t: &TwistModel, exec: Execution) -> Result<StarAlgebra> {
    let base = &t.base;
    let n = t.num_arrows();
    let terms = map_range(n, exec, |x| {
        let (_, gamma) = t.pairs[x];
        base.with_range(base.source(x))
            .iter()
            .map(|&y| {
                let phase = -t.omega(x, y);
                Term { right: y, out: base.mul(x, y), coeff: phase.to_complex() * ext.alpha(gamma), phase: Some(phase) }
            })
            .collect()
    });
    let star = (0..n)
        .map(|x| {
            let inv = base.inverse(x);
            vec![(inv, t.omega(x, inv).to_complex())]
        })
        .collect();
    let (tau, inorm, bundle, diagonal) = twisted_common(ext, t);
    Ok(StarAlgebra::from_parts(Parts {
        model: Model::Cocycle,
        labels: base.arrow_names().to_vec(),
        terms,
        star,
        tau,
        inorm,
        bundle_inorm: Some(bundle),
        diagonal: Some(diagonal),
        exec,
    }))
}
