//! The data of an extension `A ↪ Σ ↠ G` with weighted Haar systems, computed
//! once and shared by the twist and algebra layers.

use num_rational::BigRational;

use crate::bundle::{analyze_subbundle, quotient_groupoid, Quotient, SubgroupBundle};
use crate::duality::{dual_bundle_with_action, DualBundle, FiberGroup};
use crate::error::{Error, Result};
use crate::groupoid::FiniteGroupoid;
use crate::haar::{induced_haar, modular_delta, to_f64, HaarWeights, InducedHaar};

#[derive(Clone, Debug)]
pub struct Extension {
    pub sigma: FiniteGroupoid,
    pub bundle: SubgroupBundle,
    pub weights: HaarWeights,
    pub quotient: Quotient,
    pub delta: Vec<BigRational>,
    pub induced: InducedHaar,
    pub fibers: Vec<FiberGroup>,
    /// Present when every fiber is abelian.
    pub dual: Option<DualBundle>,
}

impl Extension {
    pub fn new(sigma: FiniteGroupoid, bundle: SubgroupBundle, weights: HaarWeights) -> Result<Self> {
        let report = analyze_subbundle(&sigma, &bundle);
        report.quotient_ready()?;
        weights.check(sigma.num_units())?;
        weights.check_invariant(&sigma)?;
        let quotient = quotient_groupoid(&sigma, &bundle)?;
        let delta = modular_delta(&sigma, &bundle, &weights)?;
        let induced = induced_haar(&sigma, &bundle, &quotient, &weights)?;
        let fibers = (0..sigma.num_units()).map(|u| FiberGroup::new(&sigma, &bundle, u)).collect();
        let dual = if report.abelian { Some(dual_bundle_with_action(&sigma, &bundle)?) } else { None };
        Ok(Extension { sigma, bundle, weights, quotient, delta, induced, fibers, dual })
    }

    pub fn g(&self) -> &FiniteGroupoid {
        &self.quotient.groupoid
    }

    pub fn dual(&self) -> Result<&DualBundle> {
        self.dual
            .as_ref()
            .ok_or_else(|| Error::MissingInput("dual bundle (the subgroup bundle is not abelian)".into()))
    }

    pub fn project(&self, sigma: usize) -> usize {
        self.quotient.projection[sigma]
    }

    pub fn d(&self, u: usize) -> f64 {
        to_f64(&self.weights.lambda[u])
    }

    pub fn c(&self, u: usize) -> f64 {
        to_f64(&self.weights.beta[u])
    }

    pub fn mu(&self, u: usize) -> f64 {
        to_f64(&self.weights.mu_or_one(u))
    }

    pub fn delta_f64(&self, sigma: usize) -> f64 {
        to_f64(&self.delta[sigma])
    }

    /// `α^{r(γ)}({γ})`.
    pub fn alpha(&self, gamma: usize) -> f64 {
        to_f64(&self.induced.alpha[gamma])
    }

    pub fn dim(&self) -> usize {
        self.sigma.num_arrows()
    }
}
