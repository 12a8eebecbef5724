//! Generators for the example families, emitted as spec files together with
//! a manifest of the claims a verification run must confirm.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::action::{transformation_groupoid, GroupoidAction};
use crate::bundle::SubgroupBundle;
use crate::error::{Error, Result};
use crate::groupoid::{FiniteGroupoid, GroupoidParts};
use crate::haar::HaarWeights;
use crate::spec_file::SpecFile;

pub const MAX_PARAM: u64 = 12;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BundleClaims {
    pub members: usize,
    pub quotient_arrows: usize,
    /// Algebra dimension shared by all four models.
    pub dim: usize,
    /// `"trivial"` or `"nontrivial"` over Q/Z.
    pub cocycle: String,
    /// `"passed"` or `"not-applicable"`.
    pub cartan: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagonal_dim: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub entry: String,
    pub params: Vec<u64>,
    pub file: String,
    pub units: usize,
    pub arrows: usize,
    /// Wedderburn block sizes of the groupoid algebra, where known.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_blocks: Option<Vec<usize>>,
    pub bundles: BTreeMap<String, BundleClaims>,
}

#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub slug: String,
    pub groupoid: FiniteGroupoid,
    /// Named bundles; the first is the file's default `bundle`.
    pub bundles: Vec<(String, SubgroupBundle)>,
    pub spec: SpecFile,
    pub manifest: Manifest,
}

impl CatalogEntry {
    pub fn bundle(&self, name: &str) -> Option<&SubgroupBundle> {
        self.bundles.iter().find(|(n, _)| n == name).map(|(_, b)| b)
    }

    pub fn default_bundle(&self) -> (&str, &SubgroupBundle) {
        let (n, b) = &self.bundles[0];
        (n, b)
    }

    pub fn file_name(&self) -> String {
        format!("{}.gpd.json", self.slug)
    }

    /// Writes the spec file and `manifest.json` into `dir`.
    pub fn write(&self, dir: &Path) -> std::io::Result<(PathBuf, PathBuf)> {
        std::fs::create_dir_all(dir)?;
        let spec = dir.join(self.file_name());
        std::fs::write(&spec, self.spec.to_json())?;
        let manifest = dir.join("manifest.json");
        std::fs::write(&manifest, serde_json::to_string_pretty(&self.manifest).expect("serializable") + "\n")?;
        Ok((spec, manifest))
    }
}

/// Entries small enough for exhaustive verification.
pub fn standard_instances() -> Vec<(&'static str, Vec<u64>)> {
    vec![
        ("heisenberg", vec![2]),
        ("heisenberg", vec![3]),
        ("semidirect", vec![3, 2, 2]),
        ("semidirect", vec![4, 2, 3]),
        ("cyclic-extension", vec![4, 2]),
        ("cyclic-extension", vec![6, 3]),
        ("bundle-pair", vec![2, 2]),
        ("bundle-pair", vec![4, 3]),
        ("transformation", vec![2, 2]),
        ("transformation", vec![2, 3]),
    ]
}

fn check_params(name: &str, params: &[u64], arity: usize) -> Result<()> {
    if params.len() != arity {
        return Err(Error::Parameters(format!("{name} takes {arity} parameters, got {}", params.len())));
    }
    if let Some(p) = params.iter().find(|&&p| p == 0 || p > MAX_PARAM) {
        return Err(Error::Parameters(format!("parameter {p} outside 1..={MAX_PARAM}")));
    }
    Ok(())
}

pub fn catalog_build(name: &str, params: &[u64]) -> Result<CatalogEntry> {
    let built = match name {
        "heisenberg" => heisenberg(params)?,
        "semidirect" => semidirect(params)?,
        "cyclic-extension" => cyclic_extension(params)?,
        "bundle-pair" => bundle_pair(params)?,
        "transformation" => transformation(params)?,
        other => return Err(Error::Parameters(format!("unknown catalog entry {other:?}"))),
    };
    let slug = std::iter::once(name.to_string()).chain(params.iter().map(u64::to_string)).collect::<Vec<_>>().join("-");
    let g = &built.groupoid;
    let named: BTreeMap<String, Vec<String>> = built.bundles.iter().map(|(n, b)| (n.clone(), b.names(g))).collect();
    let spec = SpecFile::from_groupoid(
        g,
        Some(built.bundles[0].1.names(g)),
        named,
        Some(&HaarWeights::uniform(g.num_units())),
    );
    let bundles = built
        .bundles
        .iter()
        .zip(&built.claims)
        .map(|((n, b), c)| {
            let claims = BundleClaims {
                members: b.len(),
                quotient_arrows: g.num_arrows() / (b.len() / g.num_units()),
                dim: g.num_arrows(),
                cocycle: if c.trivial { "trivial" } else { "nontrivial" }.into(),
                cartan: if c.cartan { "passed" } else { "not-applicable" }.into(),
                diagonal_dim: c.cartan.then_some(b.len()),
            };
            (n.clone(), claims)
        })
        .collect();
    let manifest = Manifest {
        entry: format!("{name} {}", params.iter().map(u64::to_string).collect::<Vec<_>>().join(" ")),
        params: params.to_vec(),
        file: format!("{slug}.gpd.json"),
        units: g.num_units(),
        arrows: g.num_arrows(),
        sigma_blocks: built.blocks,
        bundles,
    };
    Ok(CatalogEntry { slug, groupoid: built.groupoid, bundles: built.bundles, spec, manifest })
}

struct Claim {
    trivial: bool,
    cartan: bool,
}

struct Built {
    groupoid: FiniteGroupoid,
    bundles: Vec<(String, SubgroupBundle)>,
    claims: Vec<Claim>,
    blocks: Option<Vec<usize>>,
}

fn is_prime(n: u64) -> bool {
    n >= 2 && (2..n).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
}

fn internal(e: crate::groupoid::ValidationReport) -> Error {
    Error::Internal(format!("catalog table failed validation: {e}"))
}

/// `H(Z_n)` on `a^i b^j c^k` with `(i,j,k)(i',j',k') = (i+i', j+j', k+k'−j·i')`,
/// so that `ab = cba` and `c` is central.
fn heisenberg(params: &[u64]) -> Result<Built> {
    check_params("heisenberg", params, 1)?;
    let n = params[0] as usize;
    if n < 2 {
        return Err(Error::Parameters("heisenberg needs n >= 2".into()));
    }
    let enc = |i: usize, j: usize, k: usize| (i * n + j) * n + k;
    let dec = |x: usize| (x / (n * n), (x / n) % n, x % n);
    let names = (0..n * n * n)
        .map(|x| {
            let (i, j, k) = dec(x);
            format!("a^{i} b^{j} c^{k}")
        })
        .collect();
    let g = FiniteGroupoid::from_group(
        "e",
        names,
        0,
        |x, y| {
            let ((i, j, k), (p, q, r)) = (dec(x), dec(y));
            enc((i + p) % n, (j + q) % n, (k + r + n * n - (j * p) % n) % n)
        },
        |x| {
            let (i, j, k) = dec(x);
            enc((n - i) % n, (n - j) % n, (2 * n * n - k - (j * i) % n) % n)
        },
    )
    .map_err(internal)?;
    let center = SubgroupBundle::new(&g, (0..n).map(|k| enc(0, 0, k)));
    let bc = SubgroupBundle::new(&g, (0..n * n).map(|x| enc(0, x / n, x % n)));
    let blocks = is_prime(n as u64).then(|| {
        let mut b = vec![1; n * n];
        b.extend(std::iter::repeat_n(n, n - 1));
        b
    });
    Ok(Built {
        groupoid: g,
        bundles: vec![("center".into(), center), ("bc".into(), bc)],
        claims: vec![Claim { trivial: false, cartan: false }, Claim { trivial: true, cartan: false }],
        blocks,
    })
}

/// Irreducible dimensions of `Z_n ⋊_k Z_m` by the little-group method:
/// an orbit of size `o` of `j ↦ jk` on `Ẑ_n` gives `m/o` irreducibles of
/// dimension `o`.
fn semidirect_blocks(n: usize, m: usize, k: usize) -> Vec<usize> {
    let mut seen = vec![false; n];
    let mut blocks = Vec::new();
    for j in 0..n {
        if seen[j] {
            continue;
        }
        let mut o = 0;
        let mut x = j;
        while !seen[x] {
            seen[x] = true;
            o += 1;
            x = (x * k) % n;
        }
        blocks.extend(std::iter::repeat_n(o, m / o));
    }
    blocks.sort_unstable();
    blocks
}

/// `Z_n ⋊ Z_m` on `r^x s^y` with `(x,y)(x',y') = (x + k^y x', y + y')`.
fn semidirect(params: &[u64]) -> Result<Built> {
    check_params("semidirect", params, 3)?;
    let (n, m, k) = (params[0] as usize, params[1] as usize, params[2] as usize % params[0] as usize);
    let pow = |e: usize| (0..e).fold(1 % n, |acc, _| acc * k % n);
    if pow(m) != 1 % n || k.gcd(&n) != 1 {
        return Err(Error::Parameters(format!("{}^{m} is not 1 mod {n}", params[2])));
    }
    let enc = |x: usize, y: usize| x * m + y;
    let names = (0..n * m).map(|e| format!("r^{} s^{}", e / m, e % m)).collect();
    let g = FiniteGroupoid::from_group(
        "e",
        names,
        0,
        |a, b| {
            let ((x, y), (p, q)) = ((a / m, a % m), (b / m, b % m));
            enc((x + pow(y) * p) % n, (y + q) % m)
        },
        |a| {
            let (x, y) = (a / m, a % m);
            enc((n - (pow((m - y) % m) * x) % n) % n, (m - y) % m)
        },
    )
    .map_err(internal)?;
    let normal = SubgroupBundle::new(&g, (0..n).map(|x| enc(x, 0)));
    Ok(Built {
        groupoid: g,
        bundles: vec![("normal".into(), normal)],
        claims: vec![Claim { trivial: true, cartan: m == 1 }],
        blocks: Some(semidirect_blocks(n, m, k)),
    })
}

/// `Z_n` over its subgroup `dZ_n`.
fn cyclic_extension(params: &[u64]) -> Result<Built> {
    check_params("cyclic-extension", params, 2)?;
    let (n, d) = (params[0] as usize, params[1] as usize);
    if n % d != 0 {
        return Err(Error::Parameters(format!("{d} does not divide {n}")));
    }
    let g = FiniteGroupoid::from_group("e", (0..n).map(|i| format!("g^{i}")).collect(), 0, |a, b| (a + b) % n, |a| (n - a) % n)
        .map_err(internal)?;
    let sub = SubgroupBundle::new(&g, (0..n).step_by(d));
    Ok(Built {
        groupoid: g,
        bundles: vec![("subgroup".into(), sub)],
        claims: vec![Claim { trivial: true, cartan: d == 1 }],
        blocks: Some(vec![1; n]),
    })
}

/// `Z_k × R_n` with arrows `(i,j;t)` from `u{j}` to `u{i}`.
fn bundle_pair(params: &[u64]) -> Result<Built> {
    check_params("bundle-pair", params, 2)?;
    let (n, k) = (params[0] as usize, params[1] as usize);
    let enc = |i: usize, j: usize, t: usize| (i * n + j) * k + t;
    let dec = |x: usize| (x / (n * k), (x / k) % n, x % k);
    let total = n * n * k;
    let parts = GroupoidParts {
        unit_names: (0..n).map(|i| format!("u{i}")).collect(),
        arrow_names: (0..total)
            .map(|x| {
                let (i, j, t) = dec(x);
                format!("({i},{j};{t})")
            })
            .collect(),
        range: (0..total).map(|x| dec(x).0).collect(),
        source: (0..total).map(|x| dec(x).1).collect(),
        inverse: (0..total)
            .map(|x| {
                let (i, j, t) = dec(x);
                enc(j, i, (k - t) % k)
            })
            .collect(),
        unit_arrow: (0..n).map(|i| enc(i, i, 0)).collect(),
    };
    let g = FiniteGroupoid::from_parts(parts, |x, y| {
        let ((i, _, t), (_, l, s)) = (dec(x), dec(y));
        enc(i, l, (t + s) % k)
    })
    .map_err(internal)?;
    let fibers = SubgroupBundle::new(&g, (0..n).flat_map(|i| (0..k).map(move |t| enc(i, i, t))));
    Ok(Built {
        groupoid: g,
        bundles: vec![("fibers".into(), fibers)],
        claims: vec![Claim { trivial: true, cartan: true }],
        blocks: Some(vec![n; k]),
    })
}

/// `Γ = Z_{nm}` acting on `X = Z_m` by translation, with `N = mZ_{nm}`.
fn transformation(params: &[u64]) -> Result<Built> {
    check_params("transformation", params, 2)?;
    let (n, m) = (params[0] as usize, params[1] as usize);
    let order = n * m;
    let gamma = FiniteGroupoid::from_group("e", (0..order).map(|i| i.to_string()).collect(), 0, |a, b| (a + b) % order, |a| {
        (order - a) % order
    })
    .map_err(internal)?;
    let action = GroupoidAction::new(&gamma, (0..m).map(|x| format!("x{x}")).collect(), vec![0; m], |x, g| (x + g) % m)?;
    let big_n = SubgroupBundle::new(&gamma, (0..order).step_by(m));
    let t = transformation_groupoid(&gamma, &action, &big_n)?;
    Ok(Built {
        groupoid: t.sigma,
        bundles: vec![("pullback".into(), t.bundle)],
        claims: vec![Claim { trivial: true, cartan: true }],
        blocks: Some(vec![m; n]),
    })
}
