use std::collections::BTreeMap;
use std::path::Path;

use gctwist::algebra::{build_algebra, build_fell, build_sigma, build_twisted, cartan_check, decompose_blocks, CartanStatus, Model, StarAlgebra};
use gctwist::bundle::{analyze_subbundle, principality_check, quotient_groupoid, SubgroupBundle};
use gctwist::catalog::catalog_build;
use gctwist::duality::dual_bundle_with_action;
use gctwist::error::Error;
use gctwist::extension::Extension;
use gctwist::groupoid::validate_groupoid;
use gctwist::haar::modular_check as exact_modular_check;
use gctwist::iso::{map_difference, map_gelfand_f, map_identification, map_j, map_phi, verify_star_iso, IsoTolerances};
use gctwist::par::Execution;
use gctwist::spec_file::{LoadedSpec, SpecError, SpecFile};
use gctwist::twist::{choose_section, coboundary_solve, cocycle_identity, SectionPolicy, TwistModel};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::Common;

pub const DEFAULT_MAX_DIM: usize = 4096;
const FACTORIZATION_TOL: f64 = 1e-12;
const CSTAR_TOL: f64 = 1e-9;
const INORM_TOL: f64 = 1e-10;

pub struct Outcome {
    pub report: Value,
    pub passed: bool,
}

#[derive(Debug)]
pub enum CliError {
    Io { path: String, source: std::io::Error },
    Spec { error: SpecError, validation: Option<Value> },
    Core(Error),
    Usage(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Io { path, source } => write!(f, "cannot access {path}: {source}"),
            CliError::Spec { error, .. } => write!(f, "{error}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Usage(m) => write!(f, "{m}"),
        }
    }
}

impl From<SpecError> for CliError {
    fn from(error: SpecError) -> Self {
        let validation = match &error {
            SpecError::Axioms(r) => Some(serde_json::to_value(r).expect("serializable")),
            _ => None,
        };
        CliError::Spec { error, validation }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Parameters(m) => CliError::Usage(m),
            other => CliError::Core(other),
        }
    }
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } => 2,
            CliError::Spec { error, .. } => error.exit_code() as u8,
            CliError::Core(_) => 1,
            CliError::Usage(_) => 64,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Io { .. } => "io",
            CliError::Spec { error: SpecError::Axioms(_), .. } => "axioms",
            CliError::Spec { error: SpecError::Io { .. }, .. } => "io",
            CliError::Spec { .. } => "schema",
            CliError::Core(Error::Precondition(_)) => "precondition",
            CliError::Core(_) => "refused",
            CliError::Usage(_) => "usage",
        }
    }

    /// JSON error report printed to stdout.
    pub fn report(&self) -> Value {
        let mut v = json!({
            "error": {"kind": self.kind(), "message": self.to_string(), "exit_code": self.exit_code()},
            "passed": false,
        });
        if let CliError::Spec { validation: Some(r), .. } = self {
            v["validation"] = r.clone();
        }
        v
    }
}

type Res<T> = Result<T, CliError>;

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

fn max_dim() -> Res<usize> {
    match std::env::var("GCTWIST_MAX_DIM") {
        Ok(v) => v.trim().parse().map_err(|_| CliError::Usage(format!("GCTWIST_MAX_DIM={v:?} is not a positive integer"))),
        Err(_) => Ok(DEFAULT_MAX_DIM),
    }
}

fn check_dim(ext: &Extension) -> Res<()> {
    let cap = max_dim()?;
    if ext.dim() > cap {
        return Err(Error::TooLarge { dim: ext.dim(), cap }.into());
    }
    Ok(())
}

struct Input {
    loaded: LoadedSpec,
    bundle: SubgroupBundle,
    bundle_name: String,
}

fn load(file: &Path, common: &Common) -> Res<Input> {
    let loaded = LoadedSpec::read(file)?;
    let (bundle, bundle_name) = match (&common.bundle, &common.bundle_arrows) {
        (_, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            let ids: Vec<String> = serde_json::from_str(&text)
                .map_err(|e| SpecError::Schema { path: path.display().to_string(), message: e.to_string() })?;
            (loaded.bundle_from_ids(&ids)?, path.display().to_string())
        }
        (name, None) => (loaded.bundle(name.as_deref())?, name.clone().unwrap_or_else(|| "bundle".into())),
    };
    Ok(Input { loaded, bundle, bundle_name })
}

fn extension(input: &Input) -> Res<Extension> {
    Ok(Extension::new(input.loaded.groupoid.clone(), input.bundle.clone(), input.loaded.weights.clone())?)
}

fn section_policy(common: &Common) -> Res<SectionPolicy> {
    match common.section.iter().map(String::as_str).collect::<Vec<_>>().as_slice() {
        [] | ["first"] => Ok(SectionPolicy::First),
        ["last"] => Ok(SectionPolicy::Last),
        ["custom", file] => {
            let path = Path::new(file);
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            let map: BTreeMap<String, String> = serde_json::from_str(&text)
                .map_err(|e| SpecError::Schema { path: file.to_string(), message: e.to_string() })?;
            Ok(SectionPolicy::Custom(map))
        }
        other => Err(CliError::Usage(format!("--section expects first, last or custom FILE, got {other:?}"))),
    }
}

fn tolerances(common: &Common) -> IsoTolerances {
    let mut tol = IsoTolerances::default();
    if let Some(t) = common.tol {
        tol.multiplicativity = t;
        tol.star = t;
    }
    tol
}

fn header(command: &str, file: &Path, input: &Input) -> Value {
    json!({
        "command": command,
        "file": file.display().to_string(),
        "bundle": input.bundle_name,
    })
}

pub fn validate(file: &Path, common: &Common) -> Res<Outcome> {
    let spec = SpecFile::read(file)?;
    let outcome = validate_groupoid(&spec.raw()).map_err(SpecError::from)?;
    let Some(_) = outcome.groupoid else {
        return Err(SpecError::Axioms(Box::new(outcome.report)).into());
    };
    let input = load(file, common)?;
    let g = &input.loaded.groupoid;
    let mut bundles = serde_json::Map::new();
    for name in input.loaded.bundle_names() {
        let b = input.loaded.bundle(Some(&name))?;
        bundles.insert(name, to_value(&analyze_subbundle(g, &b)));
    }
    let invariant = input.loaded.weights.check_invariant(g);
    let mut report = header("validate", file, &input);
    report["groupoid"] = to_value(&outcome.report);
    report["bundles"] = Value::Object(bundles);
    report["lambda_left_invariant"] = json!(invariant.is_ok());
    if let Err(e) = invariant {
        report["lambda_note"] = json!(e.to_string());
    }
    report["passed"] = json!(true);
    Ok(Outcome { report, passed: true })
}

pub fn quotient(file: &Path, common: &Common) -> Res<Outcome> {
    let input = load(file, common)?;
    let g = &input.loaded.groupoid;
    let analysis = analyze_subbundle(g, &input.bundle);
    let mut report = header("quotient", file, &input);
    report["analysis"] = to_value(&analysis);
    if let Err(e) = analysis.quotient_ready() {
        report["quotient"] = Value::Null;
        report["reason"] = json!(e.to_string());
        report["passed"] = json!(false);
        return Ok(Outcome { report, passed: false });
    }
    let q = quotient_groupoid(g, &input.bundle)?;
    let gq = &q.groupoid;
    let arrows: Vec<Value> = (0..gq.num_arrows())
        .map(|x| {
            json!({
                "id": gq.arrow_name(x),
                "src": gq.unit_name(gq.source(x)),
                "dst": gq.unit_name(gq.range(x)),
                "coset": q.coset(x).iter().map(|&s| g.arrow_name(s)).collect::<Vec<_>>(),
            })
        })
        .collect();
    report["quotient"] = json!({"units": gq.unit_names(), "arrows": arrows});
    report["principality"] = to_value(&principality_check(gq));
    report["passed"] = json!(true);
    Ok(Outcome { report, passed: true })
}

pub fn dual(file: &Path, common: &Common) -> Res<Outcome> {
    let input = load(file, common)?;
    let g = &input.loaded.groupoid;
    let d = dual_bundle_with_action(g, &input.bundle)?;
    let fibers: Vec<Value> = d
        .groups
        .iter()
        .enumerate()
        .map(|(u, grp)| {
            let chars: Vec<Value> = d
                .characters_at(u)
                .map(|chi| {
                    json!({
                        "id": d.character_name(g, chi),
                        "label": d.character(chi).label,
                        "values": input.bundle.fiber(u).iter().zip(&d.character(chi).phases)
                            .map(|(&a, p)| (g.arrow_name(a).to_string(), p.to_string()))
                            .collect::<BTreeMap<_, _>>(),
                    })
                })
                .collect();
            json!({
                "unit": g.unit_name(u),
                "order": grp.order(),
                "invariant_factors": grp.invariant_factors,
                "generators": grp.generators.iter().map(|&k| g.arrow_name(input.bundle.fiber(u)[k])).collect::<Vec<_>>(),
                "characters": chars,
            })
        })
        .collect();
    let mut action = Vec::new();
    for chi in 0..d.num_characters() {
        for &s in g.with_range(d.unit_of(chi)) {
            if let Some(y) = d.act(chi, s) {
                action.push(json!([d.character_name(g, chi), g.arrow_name(s), d.character_name(g, y)]));
            }
        }
    }
    let mut report = header("dual", file, &input);
    report["fibers"] = json!(fibers);
    report["action"] = json!(action);
    report["passed"] = json!(true);
    Ok(Outcome { report, passed: true })
}

pub fn cocycle(file: &Path, common: &Common, check_coboundary: bool, csv: Option<&Path>) -> Res<Outcome> {
    let input = load(file, common)?;
    let ext = extension(&input)?;
    let twist = TwistModel::build(&ext, &section_policy(common)?)?;
    let g = ext.g();
    let base = &twist.base;
    let identity = cocycle_identity(base, &|x, y| twist.omega(x, y));
    if let Some(path) = csv {
        let f = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
        twist.write_csv(g, f)?;
    }
    let section: BTreeMap<String, String> =
        (0..g.num_arrows()).map(|x| (g.arrow_name(x).to_string(), ext.sigma.arrow_name(twist.section.rep[x]).to_string())).collect();
    let mut report = header("cocycle", file, &input);
    report["section_policy"] = json!(twist.section.policy);
    report["section"] = to_value(&section);
    report["base"] = json!({"units": base.num_units(), "arrows": base.num_arrows()});
    report["rows"] = to_value(&twist.cocycle_rows(g));
    report["identity"] = to_value(&identity);
    let mut passed = identity.holds();
    if check_coboundary {
        let solved = coboundary_solve(base, &|x, y| twist.omega(x, y))?;
        report["coboundary"] = to_value(&solved);
        passed &= solved.witness.is_some() || solved.certificate.is_some();
    }
    report["passed"] = json!(passed);
    Ok(Outcome { report, passed })
}

pub fn verify_green(file: &Path, common: &Common) -> Res<Outcome> {
    let input = load(file, common)?;
    let ext = extension(&input)?;
    check_dim(&ext)?;
    let section = choose_section(&ext, &section_policy(common)?)?;
    let exec = Execution::default();
    let sigma = build_sigma(&ext, exec);
    let fell = build_fell(&ext, &section, exec)?;
    let j = map_j(&ext, &section);
    let iso = verify_star_iso(&j, &sigma, &fell, common.trials, tolerances(common), common.seed)?;
    let mut report = header("verify green", file, &input);
    report["section_policy"] = json!(section.policy);
    report["passed"] = json!(iso.passed);
    report["j"] = to_value(&iso);
    Ok(Outcome { passed: iso.passed, report })
}

pub fn verify_main(file: &Path, common: &Common) -> Res<Outcome> {
    let input = load(file, common)?;
    let ext = extension(&input)?;
    check_dim(&ext)?;
    let twist = TwistModel::build(&ext, &section_policy(common)?)?;
    let exec = Execution::default();
    let algs: Vec<StarAlgebra> = [Model::Sigma, Model::Fell, Model::Twisted, Model::Cocycle]
        .into_iter()
        .map(|m| build_algebra(m, &ext, Some(&twist), exec))
        .collect::<Result<_, _>>()?;
    let [sigma, fell, twisted, cocycle] = &algs[..] else { unreachable!() };
    let j = map_j(&ext, &twist.section);
    let f = map_gelfand_f(&ext, &twist)?;
    let phi = map_phi(&ext, &twist)?;
    let ident = map_identification(&twist);
    let tol = tolerances(common);
    let phi_r = verify_star_iso(&phi, sigma, twisted, common.trials, tol, common.seed)?;
    let f_r = verify_star_iso(&f, fell, twisted, common.trials, tol, common.seed)?;
    let id_r = verify_star_iso(&ident, twisted, cocycle, common.trials, tol, common.seed)?;
    let factorization = map_difference(&phi, &f.after(&j)?)?;
    let passed = phi_r.passed && f_r.passed && id_r.passed && factorization <= FACTORIZATION_TOL;
    let mut report = header("verify main", file, &input);
    report["section_policy"] = json!(twist.section.policy);
    report["phi"] = to_value(&phi_r);
    report["gelfand"] = to_value(&f_r);
    report["identification"] = to_value(&id_r);
    report["factorization"] = json!({"defect": factorization, "tolerance": FACTORIZATION_TOL, "passed": factorization <= FACTORIZATION_TOL});
    report["passed"] = json!(passed);
    Ok(Outcome { report, passed })
}

fn models_for(ext: &Extension, twist: Option<&TwistModel>) -> Vec<Model> {
    match (ext.dual.is_some(), twist.is_some()) {
        (true, true) => vec![Model::Sigma, Model::Fell, Model::Twisted, Model::Cocycle],
        _ => vec![Model::Sigma, Model::Fell],
    }
}

pub fn norms(file: &Path, common: &Common) -> Res<Outcome> {
    let input = load(file, common)?;
    let ext = extension(&input)?;
    check_dim(&ext)?;
    let policy = section_policy(common)?;
    let twist = if ext.dual.is_some() { Some(TwistModel::build(&ext, &policy)?) } else { None };
    let exec = Execution::default();
    let cstar_tol = common.tol.unwrap_or(CSTAR_TOL);
    let mut rng = ChaCha8Rng::seed_from_u64(common.seed);
    let mut per_model = Vec::new();
    let mut passed = true;
    let mut built = BTreeMap::new();
    for model in models_for(&ext, twist.as_ref()) {
        let alg = match (&twist, model) {
            (None, Model::Fell) => build_fell(&ext, &choose_section(&ext, &policy)?, exec)?,
            _ => build_algebra(model, &ext, twist.as_ref(), exec)?,
        };
        let (mut cstar, mut ratio, mut violations, mut below_bundle) = (0.0f64, 0.0f64, 0usize, 0usize);
        for _ in 0..common.trials {
            let f = alg.random_element(&mut rng);
            let n = alg.c_norm(&f)?;
            let nn = alg.c_norm(&alg.mul(&alg.adj(&f), &f))?;
            cstar = cstar.max((nn - n * n).abs() / (n * n).max(1.0));
            let i = alg.i_norm(&f);
            ratio = ratio.max(n / i);
            violations += (n > i * (1.0 + 1e-12)) as usize;
            if let Some(b) = alg.bundle_i_norm(&f) {
                below_bundle += (i > b * (1.0 + 1e-12)) as usize;
            }
        }
        let ok = cstar <= cstar_tol && violations == 0 && below_bundle == 0;
        passed &= ok;
        per_model.push(json!({
            "model": model,
            "dim": alg.dim(),
            "cstar_identity_defect": cstar,
            "max_norm_over_i_norm": ratio,
            "norm_order_violations": violations,
            "intrinsic_above_bundle_i_norm": below_bundle,
            "passed": ok,
        }));
        built.insert(model.name(), alg);
    }
    let mut report = header("norms", file, &input);
    if let Some(t) = &twist {
        let f = map_gelfand_f(&ext, t)?;
        let (fell, twisted) = (&built["fell"], &built["twisted"]);
        let mut defect = 0.0f64;
        for _ in 0..common.trials {
            let g = fell.random_element(&mut rng);
            let lhs = fell.i_norm(&g);
            let rhs = twisted.bundle_i_norm(&f.apply(&g)).expect("twisted model has a bundle layout");
            defect = defect.max((lhs - rhs).abs() / lhs.max(1.0));
        }
        let ok = defect <= INORM_TOL;
        passed &= ok;
        report["i_norm_transport"] = json!({"map": "F", "defect": defect, "tolerance": INORM_TOL, "passed": ok});
    }
    report["trials"] = json!(common.trials);
    report["seed"] = json!(common.seed);
    report["tolerance"] = json!(cstar_tol);
    report["models"] = json!(per_model);
    report["passed"] = json!(passed);
    Ok(Outcome { report, passed })
}

pub fn blocks(file: &Path, common: &Common, only: Option<&str>) -> Res<Outcome> {
    let input = load(file, common)?;
    let ext = extension(&input)?;
    check_dim(&ext)?;
    let policy = section_policy(common)?;
    let twist = if ext.dual.is_some() { Some(TwistModel::build(&ext, &policy)?) } else { None };
    let models = match only {
        Some(m) => vec![m.parse::<Model>()?],
        None => models_for(&ext, twist.as_ref()),
    };
    let exec = Execution::default();
    let mut rng = ChaCha8Rng::seed_from_u64(common.seed);
    let mut reports = Vec::new();
    let mut passed = true;
    let mut first_blocks: Option<Vec<usize>> = None;
    let mut consistent = true;
    for model in models {
        let alg = match (&twist, model) {
            (None, Model::Fell) => build_fell(&ext, &choose_section(&ext, &policy)?, exec)?,
            _ => build_algebra(model, &ext, twist.as_ref(), exec)?,
        };
        match decompose_blocks(&alg, &mut rng) {
            Ok(r) => {
                passed &= r.passed;
                match &first_blocks {
                    Some(b) => consistent &= *b == r.blocks,
                    None => first_blocks = Some(r.blocks.clone()),
                }
                reports.push(to_value(&r));
            }
            Err(e) => {
                passed = false;
                reports.push(json!({"model": model, "dim": alg.dim(), "error": e.to_string(), "passed": false}));
            }
        }
    }
    let mut report = header("blocks", file, &input);
    report["seed"] = json!(common.seed);
    report["models"] = json!(reports);
    report["consistent"] = json!(consistent);
    report["passed"] = json!(passed && consistent);
    Ok(Outcome { report, passed: passed && consistent })
}

pub fn cartan(file: &Path, common: &Common) -> Res<Outcome> {
    let input = load(file, common)?;
    let ext = extension(&input)?;
    check_dim(&ext)?;
    let twist = TwistModel::build(&ext, &section_policy(common)?)?;
    let alg = build_twisted(&ext, &twist, Execution::default())?;
    let mut rng = ChaCha8Rng::seed_from_u64(common.seed);
    let r = cartan_check(&ext, &alg, &mut rng, common.trials)?;
    let passed = r.status != CartanStatus::Failed;
    let mut report = header("cartan", file, &input);
    report["seed"] = json!(common.seed);
    report["model"] = json!(Model::Twisted);
    report["dim"] = json!(r.dim);
    report["cartan"] = json!({
        "masa": r.masa,
        "expectation_faithful": r.expectation_faithful,
        "normalizers_span": r.normalizers_span,
    });
    report["report"] = to_value(&r);
    report["status"] = to_value(&r.status);
    report["passed"] = json!(passed);
    Ok(Outcome { report, passed })
}

pub fn catalog(name: &str, params: &[u64], out: &Path) -> Res<Outcome> {
    let entry = catalog_build(name, params)?;
    let (spec, manifest) = entry.write(out).map_err(|e| CliError::io(out, e))?;
    let report = json!({
        "command": "catalog",
        "spec": spec.display().to_string(),
        "manifest": manifest.display().to_string(),
        "claims": to_value(&entry.manifest),
        "passed": true,
    });
    Ok(Outcome { report, passed: true })
}

pub fn modular_check(file: &Path, common: &Common) -> Res<Outcome> {
    let input = load(file, common)?;
    let g = &input.loaded.groupoid;
    analyze_subbundle(g, &input.bundle).quotient_ready()?;
    let q = quotient_groupoid(g, &input.bundle)?;
    let r = exact_modular_check(g, &input.bundle, &q, &input.loaded.weights)?;
    let mut report = header("modular-check", file, &input);
    report["passed"] = json!(r.holds);
    report["modular"] = to_value(&r);
    Ok(Outcome { passed: r.holds, report })
}
