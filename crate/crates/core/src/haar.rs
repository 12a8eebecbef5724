//! Weighted-counting Haar systems, the modular map δ, the induced system on
//! the quotient, and the modular-function factorization. All exact.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::Serialize;

use crate::bundle::{Quotient, SubgroupBundle};
use crate::error::{Error, Result};
use crate::groupoid::FiniteGroupoid;
use crate::phase::format_rational;

/// `λ^u = lambda[u] · counting` on `r⁻¹(u)`, `β^u = beta[u] · counting` on
/// `A(u)`, and an optional measure `μ` on the units.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HaarWeights {
    pub lambda: Vec<BigRational>,
    pub beta: Vec<BigRational>,
    pub mu: Option<Vec<BigRational>>,
}

impl HaarWeights {
    pub fn uniform(units: usize) -> Self {
        HaarWeights {
            lambda: vec![BigRational::one(); units],
            beta: vec![BigRational::one(); units],
            mu: Some(vec![BigRational::one(); units]),
        }
    }

    /// Independent weights `p/q` with `p, q ∈ 1..=9`.
    pub fn random<R: Rng>(units: usize, rng: &mut R) -> Self {
        let mut draw = || {
            (0..units)
                .map(|_| BigRational::new(BigInt::from(rng.gen_range(1..=9)), BigInt::from(rng.gen_range(1..=9))))
                .collect::<Vec<_>>()
        };
        let lambda = draw();
        let beta = draw();
        let mu = draw();
        HaarWeights { lambda, beta, mu: Some(mu) }
    }

    /// Like [`HaarWeights::random`] but with `λ` constant on orbits, as left
    /// invariance of `λ` requires.
    pub fn random_invariant<R: Rng>(g: &FiniteGroupoid, rng: &mut R) -> Self {
        let mut w = Self::random(g.num_units(), rng);
        let orbit = g.unit_orbits();
        for u in 0..g.num_units() {
            w.lambda[u] = w.lambda[orbit[u]].clone();
        }
        w
    }

    /// `λ` is a left-invariant system iff `d_{r(σ)} = d_{s(σ)}` for every arrow.
    pub fn check_invariant(&self, g: &FiniteGroupoid) -> Result<()> {
        match (0..g.num_arrows()).find(|&a| self.lambda[g.range(a)] != self.lambda[g.source(a)]) {
            Some(a) => Err(Error::Precondition(format!(
                "lambda is not left invariant: d differs across {} ({} vs {})",
                g.arrow_name(a),
                format_rational(&self.lambda[g.range(a)]),
                format_rational(&self.lambda[g.source(a)])
            ))),
            None => Ok(()),
        }
    }

    pub fn check(&self, units: usize) -> Result<()> {
        let groups = [("lambda", Some(&self.lambda)), ("beta", Some(&self.beta)), ("mu", self.mu.as_ref())];
        for (name, w) in groups {
            let Some(w) = w else { continue };
            if w.len() != units {
                return Err(Error::Precondition(format!("{name} has {} weights for {units} units", w.len())));
            }
            if let Some(i) = w.iter().position(|x| !x.is_positive()) {
                return Err(Error::Precondition(format!("{name} weight at unit {i} is not positive")));
            }
        }
        Ok(())
    }

    pub fn lambda_f64(&self) -> Vec<f64> {
        self.lambda.iter().map(to_f64).collect()
    }

    pub fn beta_f64(&self) -> Vec<f64> {
        self.beta.iter().map(to_f64).collect()
    }

    pub fn mu_or_one(&self, u: usize) -> BigRational {
        self.mu.as_ref().map(|m| m[u].clone()).unwrap_or_else(BigRational::one)
    }
}

pub fn to_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

fn require_normal_wide(g: &FiniteGroupoid, a: &SubgroupBundle) -> Result<()> {
    crate::bundle::analyze_subbundle(g, a).quotient_ready()
}

/// `δ(σ) = c_{s(σ)} / c_{r(σ)}`: conjugation by `σ` carries `A(s(σ))`
/// bijectively onto `A(r(σ))`, so the two weighted counting measures differ
/// by exactly this ratio.
pub fn modular_delta(g: &FiniteGroupoid, a: &SubgroupBundle, w: &HaarWeights) -> Result<Vec<BigRational>> {
    require_normal_wide(g, a)?;
    w.check(g.num_units())?;
    Ok((0..g.num_arrows())
        .map(|s| &w.beta[g.source(s)] / &w.beta[g.range(s)])
        .collect())
}

/// Evaluates both sides of the defining identity of δ on a test function
/// `f` on `A`: `Σ_{a∈A(s)} c_s f(σaσ⁻¹)` and `δ(σ) Σ_{a∈A(r)} c_r f(a)`.
pub fn delta_identity_sides(
    g: &FiniteGroupoid,
    a: &SubgroupBundle,
    w: &HaarWeights,
    delta: &[BigRational],
    sigma: usize,
    f: &dyn Fn(usize) -> BigRational,
) -> (BigRational, BigRational) {
    let (r, s) = (g.range(sigma), g.source(sigma));
    let inv = g.inverse(sigma);
    let lhs: BigRational = a
        .fiber(s)
        .iter()
        .map(|&x| f(g.mul(g.mul(sigma, x), inv)) * &w.beta[s])
        .sum();
    let rhs: BigRational = a.fiber(r).iter().map(|&x| f(x) * &w.beta[r]).sum::<BigRational>() * &delta[sigma];
    (lhs, rhs)
}

/// The Haar system induced on `G = Σ/A` together with a Bruhat section.
#[derive(Clone, Debug)]
pub struct InducedHaar {
    /// `α^{r(γ)}({γ}) = d_{r(γ)} / c_{s(γ)}` per G arrow.
    pub alpha: Vec<BigRational>,
    /// `b(σ) = 1 / (c_{s(σ)} |A(s(σ))|)` per Σ arrow.
    pub bruhat: Vec<BigRational>,
}

impl InducedHaar {
    pub fn alpha_f64(&self) -> Vec<f64> {
        self.alpha.iter().map(to_f64).collect()
    }

    /// Weight of `γ` in the source-side system `α_{s(γ)}`, i.e. `α^{s(γ)}(γ⁻¹)`.
    pub fn alpha_source(&self, gq: &FiniteGroupoid, gamma: usize) -> &BigRational {
        &self.alpha[gq.inverse(gamma)]
    }
}

pub fn induced_haar(g: &FiniteGroupoid, a: &SubgroupBundle, q: &Quotient, w: &HaarWeights) -> Result<InducedHaar> {
    require_normal_wide(g, a)?;
    w.check(g.num_units())?;
    let gq = &q.groupoid;
    let alpha = (0..gq.num_arrows())
        .map(|gamma| &w.lambda[gq.range(gamma)] / &w.beta[gq.source(gamma)])
        .collect();
    let bruhat = (0..g.num_arrows())
        .map(|s| {
            let u = g.source(s);
            (&w.beta[u] * BigInt::from(a.fiber(u).len())).recip()
        })
        .collect();
    Ok(InducedHaar { alpha, bruhat })
}

/// `Q(f)(σ̇) = c_{s(σ)} Σ_{a ∈ A(s(σ))} f(σa)`.
pub fn q_map(g: &FiniteGroupoid, a: &SubgroupBundle, q: &Quotient, w: &HaarWeights, f: &[BigRational]) -> Vec<BigRational> {
    q.cosets
        .iter()
        .map(|coset| {
            let s = coset[0];
            let u = g.source(s);
            a.fiber(u).iter().map(|&x| &f[g.mul(s, x)]).sum::<BigRational>() * &w.beta[u]
        })
        .collect()
}

/// Both sides of `λ^u(f) = Σ_{σ̇ ∈ G^u} α^u(σ̇) Q(f)(σ̇)` for every unit.
pub fn disintegration_sides(
    g: &FiniteGroupoid,
    a: &SubgroupBundle,
    q: &Quotient,
    w: &HaarWeights,
    induced: &InducedHaar,
    f: &[BigRational],
) -> Vec<(BigRational, BigRational)> {
    let qf = q_map(g, a, q, w, f);
    (0..g.num_units())
        .map(|u| {
            let lhs = g.with_range(u).iter().map(|&s| &f[s]).sum::<BigRational>() * &w.lambda[u];
            let rhs = q.groupoid.with_range(u).iter().map(|&gamma| &induced.alpha[gamma] * &qf[gamma]).sum();
            (lhs, rhs)
        })
        .collect()
}

/// `Σ_{a∈A(s(σ))} c_{s(σ)} b(σa) = 1` for every σ.
pub fn bruhat_holds(g: &FiniteGroupoid, a: &SubgroupBundle, w: &HaarWeights, induced: &InducedHaar) -> bool {
    (0..g.num_arrows()).all(|s| {
        let u = g.source(s);
        let total: BigRational = a.fiber(u).iter().map(|&x| &induced.bruhat[g.mul(s, x)] * &w.beta[u]).sum();
        total.is_one()
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ModularReport {
    pub holds: bool,
    pub delta_multiplicative: bool,
    pub disintegration_exact: bool,
    pub bruhat_exact: bool,
    pub q_surjective: bool,
    pub arrows: Vec<ModularRow>,
    pub failures: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ModularRow {
    pub arrow: String,
    pub delta: String,
    pub big_delta: String,
    pub quotient_delta: String,
}

/// `Δ(σ) = μ_r d_r / (μ_s d_s)` on Σ, `Δ̄` likewise on G from the induced
/// system, and the exact identity `Δ = δ · Δ̄`. Also replays the
/// disintegration identity on every indicator function and the Bruhat
/// normalization.
pub fn modular_check(g: &FiniteGroupoid, a: &SubgroupBundle, q: &Quotient, w: &HaarWeights) -> Result<ModularReport> {
    let mu = w
        .mu
        .as_ref()
        .ok_or_else(|| Error::Precondition("modular check needs mu weights".into()))?;
    if let Some(u) = mu.iter().position(|m| !m.is_positive()) {
        return Err(Error::Precondition(format!("mu is not fully supported: unit {}", g.unit_name(u))));
    }
    let delta = modular_delta(g, a, w)?;
    let induced = induced_haar(g, a, q, w)?;
    let gq = &q.groupoid;
    let mut failures = Vec::new();

    // Density of ν̄ = ∫α^u dμ at γ is μ_{r} α^{r}(γ); of ν̄⁻¹ is μ_{s} α^{s}(γ⁻¹).
    let quotient_delta: Vec<BigRational> = (0..gq.num_arrows())
        .map(|gamma| {
            let num = &mu[gq.range(gamma)] * &induced.alpha[gamma];
            let den = &mu[gq.source(gamma)] * &induced.alpha[gq.inverse(gamma)];
            num / den
        })
        .collect();
    let mut rows = Vec::with_capacity(g.num_arrows());
    for s in 0..g.num_arrows() {
        let (r, so) = (g.range(s), g.source(s));
        let big = (&mu[r] * &w.lambda[r]) / (&mu[so] * &w.lambda[so]);
        let bar = &quotient_delta[q.projection[s]];
        if big != &delta[s] * bar {
            failures.push(format!("Δ != δ·Δ̄ at {}", g.arrow_name(s)));
        }
        rows.push(ModularRow {
            arrow: g.arrow_name(s).to_string(),
            delta: format_rational(&delta[s]),
            big_delta: format_rational(&big),
            quotient_delta: format_rational(bar),
        });
    }

    let mut delta_multiplicative = true;
    for (x, y) in g.composable_pairs() {
        if delta[g.mul(x, y)] != &delta[x] * &delta[y] {
            delta_multiplicative = false;
            failures.push(format!("δ not multiplicative at ({}, {})", g.arrow_name(x), g.arrow_name(y)));
            break;
        }
    }

    let mut disintegration_exact = true;
    let mut indicator = vec![BigRational::zero(); g.num_arrows()];
    for s in 0..g.num_arrows() {
        indicator[s] = BigRational::one();
        if disintegration_sides(g, a, q, w, &induced, &indicator).iter().any(|(l, r)| l != r) {
            disintegration_exact = false;
            failures.push(format!("disintegration fails on the indicator of {}", g.arrow_name(s)));
        }
        indicator[s] = BigRational::zero();
    }

    let bruhat_exact = bruhat_holds(g, a, w, &induced);
    if !bruhat_exact {
        failures.push("Bruhat section does not integrate to 1".into());
    }

    // Q(1_σ) is supported on σ̇ alone, so every G indicator is in the image.
    let q_surjective = q.cosets.iter().enumerate().all(|(gamma, coset)| {
        indicator[coset[0]] = BigRational::one();
        let image = q_map(g, a, q, w, &indicator);
        indicator[coset[0]] = BigRational::zero();
        image.iter().enumerate().all(|(k, v)| (k == gamma) != v.is_zero())
    });
    if !q_surjective {
        failures.push("Q misses an indicator".into());
    }

    Ok(ModularReport {
        holds: failures.is_empty(),
        delta_multiplicative,
        disintegration_exact,
        bruhat_exact,
        q_surjective,
        arrows: rows,
        failures,
    })
}
