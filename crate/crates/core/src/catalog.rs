//! Built-in example surfaces with machine-checkable expected properties,
//! plus a loader for plain-text surface description files.
//!
//! Each entry records the geometric properties it should exhibit —
//! harmonicity, constant mean curvature, flatness, pseudo-umbilicality,
//! specific values of the curvature and of `|H|^2` — together with the
//! tolerance at which the engine re-verifies them.  `check_expectations`
//! measures every stated property with the same jet pipeline the residual
//! checkers use, so the catalog doubles as a regression corpus: a change
//! that breaks any geometric quantity shows up as a failed expectation.

use crate::ambient::AmbientManifold;
use crate::expr::{self, BinOp, Expr};
use crate::immersion::{Domain, GeomError, Immersion, MetricMode};
use crate::pipeline::{self, PointFields};
use crate::quad;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};
use thiserror::Error;

/// Position of a malformed token inside a surface description file.
/// Both coordinates are 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecLocation {
    pub line: usize,
    pub column: usize,
}

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("unknown example `{0}`")]
    UnknownExample(String),
    #[error("example `{example}` takes no parameter `{name}`")]
    UnknownParameter { example: String, name: String },
    #[error("parameter {name} = {value} rejected: {reason}")]
    BadParameterValue {
        name: String,
        value: f64,
        reason: String,
    },
    #[error("{path}:{}:{}: {message}", location.line, location.column)]
    SpecParse {
        path: String,
        location: SpecLocation,
        message: String,
    },
    #[error("cannot read `{path}`: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Geom(#[from] GeomError),
}

/// Geometric properties a catalog entry may promise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Property {
    /// `max ‖τ‖` over the sample grid (zero for harmonic maps).
    Harmonic,
    /// `max ‖τ₂‖` over the sample grid (zero for biharmonic maps).
    Biharmonic,
    /// `max |d|H|²|` — vanishing gradient means constant mean curvature.
    Cmc,
    /// Intrinsic curvature takes the stated constant value everywhere.
    GaussCurvature,
    /// `|H|²` takes the stated constant value everywhere.
    NormH2,
    /// `max ‖A_H♭ − |H|² g‖` — zero exactly for pseudo-umbilical surfaces.
    PseudoUmbilical,
    /// `max |K|` — zero for intrinsically flat surfaces.
    Flat,
}

pub const ALL_PROPERTIES: [Property; 7] = [
    Property::Harmonic,
    Property::Biharmonic,
    Property::Cmc,
    Property::GaussCurvature,
    Property::NormH2,
    Property::PseudoUmbilical,
    Property::Flat,
];

impl Property {
    pub fn name(self) -> &'static str {
        match self {
            Property::Harmonic => "harmonic",
            Property::Biharmonic => "biharmonic",
            Property::Cmc => "cmc",
            Property::GaussCurvature => "K",
            Property::NormH2 => "normH2",
            Property::PseudoUmbilical => "pseudo_umbilical",
            Property::Flat => "flat",
        }
    }

    pub fn from_name(name: &str) -> Option<Property> {
        ALL_PROPERTIES.iter().copied().find(|p| p.name() == name)
    }

    /// Whether the expectation carries a boolean or a real value.
    pub fn is_flag(self) -> bool {
        !matches!(self, Property::GaussCurvature | Property::NormH2)
    }
}

/// Expected value of one property.  Flags use the defect/separation
/// convention: `Bool(true)` asserts the measured defect stays below the
/// tolerance, `Bool(false)` asserts it exceeds the tolerance somewhere
/// (a genuine negative control, not merely an unverified one).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExpectedValue {
    Bool(bool),
    Real(f64),
}

#[derive(Debug, Clone)]
pub struct Expectation {
    pub property: Property,
    pub value: ExpectedValue,
    pub tolerance: f64,
}

/// One verified expectation: `measured` is the grid maximum of the
/// property's defect (for `Real` and `Bool(true)`) or of its magnitude
/// (for `Bool(false)`, where passing means clearing the threshold).
#[derive(Debug, Clone)]
pub struct PropertyCheck {
    pub property: Property,
    pub expected: ExpectedValue,
    pub tolerance: f64,
    pub measured: f64,
    pub pass: bool,
}

/// A named surface: ambient chart, coordinate expressions, domain, and the
/// self-check table of expected properties.
#[derive(Debug, Clone)]
pub struct ExampleSpec {
    pub name: String,
    pub summary: String,
    pub ambient: AmbientManifold,
    pub coords: Vec<Expr>,
    pub metric: MetricMode,
    pub domain: Domain,
    pub expected: Vec<Expectation>,
    /// Resolved parameter values (empty for non-parametric entries).
    pub params: Vec<(String, f64)>,
}

impl ExampleSpec {
    pub fn immersion(&self) -> Result<Immersion, GeomError> {
        Immersion::new(
            self.ambient.clone(),
            self.coords.clone(),
            self.domain.clone(),
            self.metric.clone(),
        )
    }

    pub fn expectation(&self, property: Property) -> Option<&Expectation> {
        self.expected.iter().find(|e| e.property == property)
    }
}

// ---------------------------------------------------------------------------
// Registry
// ---------------------------------------------------------------------------

/// Entry names in catalog order, with one-line summaries.
pub const EXAMPLES: [(&str, &str); 10] = [
    ("plane-R3", "flat plane in Euclidean 3-space; totally geodesic"),
    (
        "unit-sphere-R3",
        "round unit sphere in Euclidean 3-space; CMC but not biharmonic",
    ),
    (
        "cylinder-R3",
        "unit cylinder in Euclidean 3-space; CMC, isothermal, nonzero Hopf coefficient",
    ),
    (
        "clifford-minimal-S3",
        "minimal Clifford torus in the unit 3-sphere; harmonic and flat",
    ),
    (
        "small-sphere-S3",
        "round 2-sphere of radius r inside the unit 3-sphere; biharmonic exactly at r = 1/sqrt(2) (parameter: r)",
    ),
    (
        "small-sphere-S3-iso",
        "the biharmonic small sphere in an isothermal plane chart",
    ),
    (
        "clifford-torus-S4",
        "Clifford torus in S^3(1/sqrt(2)) composed into the unit 4-sphere; proper biharmonic, flat, pseudo-umbilical",
    ),
    (
        "torus-rev-R3",
        "torus of revolution in Euclidean 3-space; mean curvature varies",
    ),
    (
        "flat-torus",
        "square torus with prescribed flat metric under a linear map; map-level checks only",
    ),
    (
        "perturbed-random",
        "randomly perturbed sphere; generic control with no special structure (parameter: seed)",
    ),
];

pub fn example_names() -> Vec<&'static str> {
    EXAMPLES.iter().map(|(n, _)| *n).collect()
}

/// Look up a catalog entry by name with default parameters.
pub fn get_example(name: &str) -> Result<ExampleSpec, CatalogError> {
    get_example_with(name, &[])
}

/// Look up a catalog entry, overriding its parameters.  Supplying a
/// parameter an entry does not declare is an error.
pub fn get_example_with(name: &str, params: &[(&str, f64)]) -> Result<ExampleSpec, CatalogError> {
    let allowed: &[&str] = match name {
        "small-sphere-S3" => &["r"],
        "perturbed-random" => &["seed"],
        n if EXAMPLES.iter().any(|(e, _)| *e == n) => &[],
        _ => return Err(CatalogError::UnknownExample(name.to_string())),
    };
    for (key, _) in params {
        if !allowed.contains(key) {
            return Err(CatalogError::UnknownParameter {
                example: name.to_string(),
                name: key.to_string(),
            });
        }
    }
    let lookup = |key: &str, default: f64| -> f64 {
        params
            .iter()
            .rev()
            .find(|(k, _)| *k == key)
            .map(|&(_, v)| v)
            .unwrap_or(default)
    };
    match name {
        "plane-R3" => plane_r3(),
        "unit-sphere-R3" => unit_sphere_r3(),
        "cylinder-R3" => cylinder_r3(),
        "clifford-minimal-S3" => clifford_minimal_s3(),
        "small-sphere-S3" => small_sphere_s3(lookup("r", FRAC_1_SQRT_2)),
        "small-sphere-S3-iso" => small_sphere_s3_iso(),
        "clifford-torus-S4" => clifford_torus_s4(),
        "torus-rev-R3" => torus_rev_r3(),
        "flat-torus" => flat_torus(),
        "perturbed-random" => perturbed_random(lookup("seed", 1.0)),
        _ => unreachable!("validated above"),
    }
}

/// The small-sphere immersion at radius `r`, for residual scans over the
/// family.
pub fn small_sphere_immersion(r: f64) -> Result<Immersion, CatalogError> {
    Ok(small_sphere_s3(r)?.immersion()?)
}

// ---------------------------------------------------------------------------
// Entry builders
// ---------------------------------------------------------------------------

fn parse_static(src: &str) -> Expr {
    expr::parse(src).expect("static catalog expression")
}

fn scaled(c: f64, src: &str) -> Expr {
    Expr::bin(BinOp::Mul, Expr::num(c), parse_static(src))
}

fn flag(property: Property, value: bool, tolerance: f64) -> Expectation {
    Expectation {
        property,
        value: ExpectedValue::Bool(value),
        tolerance,
    }
}

fn real(property: Property, value: f64, tolerance: f64) -> Expectation {
    Expectation {
        property,
        value: ExpectedValue::Real(value),
        tolerance,
    }
}

fn polar_sphere_domain() -> Domain {
    Domain::new((0.0, PI), (0.0, 2.0 * PI), false, true, true).expect("static ranges")
}

fn plane_r3() -> Result<ExampleSpec, CatalogError> {
    Ok(ExampleSpec {
        name: "plane-R3".into(),
        summary: EXAMPLES[0].1.into(),
        ambient: AmbientManifold::euclidean(3).expect("static ambient"),
        coords: vec![parse_static("x"), parse_static("y"), Expr::num(0.0)],
        metric: MetricMode::Induced,
        domain: Domain::new((-1.0, 1.0), (-1.0, 1.0), false, false, false)?,
        expected: vec![
            flag(Property::Harmonic, true, 1e-12),
            flag(Property::Biharmonic, true, 1e-12),
            flag(Property::Cmc, true, 1e-12),
            flag(Property::Flat, true, 1e-12),
            flag(Property::PseudoUmbilical, true, 1e-12),
            real(Property::GaussCurvature, 0.0, 1e-12),
            real(Property::NormH2, 0.0, 1e-12),
        ],
        params: vec![],
    })
}

fn unit_sphere_r3() -> Result<ExampleSpec, CatalogError> {
    Ok(ExampleSpec {
        name: "unit-sphere-R3".into(),
        summary: EXAMPLES[1].1.into(),
        ambient: AmbientManifold::euclidean(3).expect("static ambient"),
        coords: vec![
            parse_static("sin(x) * cos(y)"),
            parse_static("sin(x) * sin(y)"),
            parse_static("cos(x)"),
        ],
        metric: MetricMode::Induced,
        domain: polar_sphere_domain(),
        expected: vec![
            // ‖τ‖ = 2 and ‖τ₂‖ = 4 everywhere: a sharp negative control.
            flag(Property::Harmonic, false, 1.0),
            flag(Property::Biharmonic, false, 1e-2),
            flag(Property::Cmc, true, 1e-9),
            flag(Property::Flat, false, 0.5),
            flag(Property::PseudoUmbilical, true, 1e-9),
            real(Property::GaussCurvature, 1.0, 1e-9),
            real(Property::NormH2, 1.0, 1e-9),
        ],
        params: vec![],
    })
}

fn cylinder_r3() -> Result<ExampleSpec, CatalogError> {
    Ok(ExampleSpec {
        name: "cylinder-R3".into(),
        summary: EXAMPLES[2].1.into(),
        ambient: AmbientManifold::euclidean(3).expect("static ambient"),
        coords: vec![parse_static("cos(x)"), parse_static("sin(x)"), parse_static("y")],
        metric: MetricMode::Induced,
        domain: Domain::new((0.0, 2.0 * PI), (-4.0, 4.0), true, false, false)?,
        expected: vec![
            flag(Property::Harmonic, false, 0.5),
            flag(Property::Biharmonic, false, 1e-2),
            flag(Property::Cmc, true, 1e-10),
            flag(Property::Flat, true, 1e-10),
            // A_H♭ − |H|²g = diag(1/4, −1/4): distinctly non-pseudo-umbilical.
            flag(Property::PseudoUmbilical, false, 0.1),
            real(Property::GaussCurvature, 0.0, 1e-10),
            real(Property::NormH2, 0.25, 1e-10),
        ],
        params: vec![],
    })
}

fn clifford_minimal_s3() -> Result<ExampleSpec, CatalogError> {
    // P(x, y) = (cos x, sin x, cos y, sin y)/sqrt(2) traces the minimal
    // Clifford torus on the unit 3-sphere; the chart map is stereographic
    // projection u = (P₁, P₂, P₃)/(1 − P₄), whose denominator stays at
    // least 1 − 1/sqrt(2) away from zero.
    let denom = format!("1 - sin(y) / {SQRT_2}");
    let coords = vec![
        parse_static(&format!("(cos(x) / {SQRT_2}) / ({denom})")),
        parse_static(&format!("(sin(x) / {SQRT_2}) / ({denom})")),
        parse_static(&format!("(cos(y) / {SQRT_2}) / ({denom})")),
    ];
    Ok(ExampleSpec {
        name: "clifford-minimal-S3".into(),
        summary: EXAMPLES[3].1.into(),
        ambient: AmbientManifold::sphere(3, 1.0).expect("static ambient"),
        coords,
        metric: MetricMode::Induced,
        domain: Domain::torus((0.0, 2.0 * PI), (0.0, 2.0 * PI)),
        expected: vec![
            flag(Property::Harmonic, true, 1e-8),
            flag(Property::Biharmonic, true, 1e-8),
            flag(Property::Cmc, true, 1e-8),
            flag(Property::Flat, true, 1e-8),
            flag(Property::PseudoUmbilical, true, 1e-8),
            real(Property::GaussCurvature, 0.0, 1e-8),
            real(Property::NormH2, 0.0, 1e-10),
        ],
        params: vec![],
    })
}

fn small_sphere_s3(r: f64) -> Result<ExampleSpec, CatalogError> {
    if !(r > 0.0 && r <= 1.0 && r.is_finite()) {
        return Err(CatalogError::BadParameterValue {
            name: "r".into(),
            value: r,
            reason: "the chart covers sphere radii 0 < r <= 1".into(),
        });
    }
    // The round sphere of radius r at height sqrt(1 − r²) inside the unit
    // 3-sphere lands, under the stereographic chart, on the Euclidean
    // sphere of radius c = r/(1 − sqrt(1 − r²)) centred at the origin.
    let c = r / (1.0 - (1.0 - r * r).sqrt());
    let h2 = (1.0 - r * r) / (r * r);
    let mut expected = vec![
        flag(Property::Cmc, true, 1e-8),
        flag(Property::PseudoUmbilical, true, 1e-8),
        flag(Property::Flat, false, 0.5),
        real(Property::GaussCurvature, 1.0 / (r * r), 1e-8 * (1.0 + 1.0 / (r * r))),
        real(Property::NormH2, h2, 1e-8 * (1.0 + h2)),
    ];
    // ‖τ‖ = 2|H| and ‖τ₂‖ = ‖τ‖·|2|H|² − 2| in closed form.  Flag
    // expectations are stated only when the separation is comfortably
    // resolvable; near the degenerate radii they are omitted rather than
    // promised at a fragile threshold.
    let tau_norm = 2.0 * h2.sqrt();
    if tau_norm >= 2e-3 {
        expected.push(flag(Property::Harmonic, false, 0.5 * tau_norm));
    }
    let tau2_norm = tau_norm * (2.0 * h2 - 2.0).abs();
    if (r - FRAC_1_SQRT_2).abs() <= 1e-9 {
        expected.push(flag(Property::Biharmonic, true, 1e-8));
    } else if tau2_norm >= 2e-3 {
        expected.push(flag(Property::Biharmonic, false, 0.5 * tau2_norm));
    }
    Ok(ExampleSpec {
        name: "small-sphere-S3".into(),
        summary: EXAMPLES[4].1.into(),
        ambient: AmbientManifold::sphere(3, 1.0).expect("static ambient"),
        coords: vec![
            scaled(c, "sin(x) * cos(y)"),
            scaled(c, "sin(x) * sin(y)"),
            scaled(c, "cos(x)"),
        ],
        metric: MetricMode::Induced,
        domain: polar_sphere_domain(),
        expected,
        params: vec![("r".into(), r)],
    })
}

fn small_sphere_s3_iso() -> Result<ExampleSpec, CatalogError> {
    // Same chart sphere as small-sphere-S3 at r = 1/sqrt(2), but swept by
    // inverse stereographic projection of the parameter plane, so the
    // induced metric is conformal to dx² + dy²: the holomorphy check runs
    // on a genuinely curved pseudo-umbilical surface here.
    let c = 1.0 + SQRT_2;
    let denom = "(1 + x^2 + y^2)";
    Ok(ExampleSpec {
        name: "small-sphere-S3-iso".into(),
        summary: EXAMPLES[5].1.into(),
        ambient: AmbientManifold::sphere(3, 1.0).expect("static ambient"),
        coords: vec![
            scaled(c, &format!("2 * x / {denom}")),
            scaled(c, &format!("2 * y / {denom}")),
            scaled(c, &format!("(x^2 + y^2 - 1) / {denom}")),
        ],
        metric: MetricMode::Induced,
        domain: Domain::new((-0.8, 0.8), (-0.8, 0.8), false, false, false)?,
        expected: vec![
            flag(Property::Harmonic, false, 1.0),
            flag(Property::Biharmonic, true, 1e-8),
            flag(Property::Cmc, true, 1e-8),
            flag(Property::Flat, false, 1.0),
            flag(Property::PseudoUmbilical, true, 1e-8),
            real(Property::GaussCurvature, 2.0, 1e-8),
            real(Property::NormH2, 1.0, 1e-8),
        ],
        params: vec![],
    })
}

fn clifford_torus_s4() -> Result<ExampleSpec, CatalogError> {
    // S¹(1/2) × S¹(1/2) is minimal in the hypersphere S³(1/sqrt(2)), which
    // sits at height 1/sqrt(2) inside the unit 4-sphere; composing with the
    // stereographic chart scales the circles by q = 1/(2 − sqrt(2)).
    let q = 1.0 / (2.0 - SQRT_2);
    Ok(ExampleSpec {
        name: "clifford-torus-S4".into(),
        summary: EXAMPLES[6].1.into(),
        ambient: AmbientManifold::sphere(4, 1.0).expect("static ambient"),
        coords: vec![
            scaled(q, "cos(x)"),
            scaled(q, "sin(x)"),
            scaled(q, "cos(y)"),
            scaled(q, "sin(y)"),
        ],
        metric: MetricMode::Induced,
        domain: Domain::torus((0.0, 2.0 * PI), (0.0, 2.0 * PI)),
        expected: vec![
            flag(Property::Harmonic, false, 1.0),
            flag(Property::Biharmonic, true, 1e-8),
            flag(Property::Cmc, true, 1e-8),
            flag(Property::Flat, true, 1e-8),
            flag(Property::PseudoUmbilical, true, 1e-8),
            real(Property::GaussCurvature, 0.0, 1e-8),
            real(Property::NormH2, 1.0, 1e-8),
        ],
        params: vec![],
    })
}

fn torus_rev_r3() -> Result<ExampleSpec, CatalogError> {
    Ok(ExampleSpec {
        name: "torus-rev-R3".into(),
        summary: EXAMPLES[7].1.into(),
        ambient: AmbientManifold::euclidean(3).expect("static ambient"),
        coords: vec![
            parse_static("(2 + cos(x)) * cos(y)"),
            parse_static("(2 + cos(x)) * sin(y)"),
            parse_static("sin(x)"),
        ],
        metric: MetricMode::Induced,
        domain: Domain::torus((0.0, 2.0 * PI), (0.0, 2.0 * PI)),
        expected: vec![
            flag(Property::Harmonic, false, 0.5),
            flag(Property::Biharmonic, false, 0.1),
            flag(Property::Cmc, false, 0.1),
            flag(Property::Flat, false, 0.5),
            flag(Property::PseudoUmbilical, false, 0.05),
        ],
        params: vec![],
    })
}

fn flat_torus() -> Result<ExampleSpec, CatalogError> {
    Ok(ExampleSpec {
        name: "flat-torus".into(),
        summary: EXAMPLES[8].1.into(),
        ambient: AmbientManifold::euclidean(3).expect("static ambient"),
        coords: vec![parse_static("x"), parse_static("y"), Expr::num(0.0)],
        metric: MetricMode::Prescribed {
            g11: Expr::num(1.0),
            g12: Expr::num(0.0),
            g22: Expr::num(1.0),
        },
        domain: Domain::torus((0.0, 2.0 * PI), (0.0, 2.0 * PI)),
        expected: vec![
            flag(Property::Harmonic, true, 1e-12),
            flag(Property::Biharmonic, true, 1e-12),
            flag(Property::Cmc, true, 1e-12),
            flag(Property::Flat, true, 1e-12),
            real(Property::GaussCurvature, 0.0, 1e-12),
            real(Property::NormH2, 0.0, 1e-12),
        ],
        params: vec![],
    })
}

fn perturbed_random(seed: f64) -> Result<ExampleSpec, CatalogError> {
    if !(seed >= 0.0 && seed.fract() == 0.0 && seed <= u64::MAX as f64) {
        return Err(CatalogError::BadParameterValue {
            name: "seed".into(),
            value: seed,
            reason: "seed must be a nonnegative integer".into(),
        });
    }
    // A radial bump 1 + p/10 with |p| <= 4 keeps the surface embedded and
    // uniformly far from the degenerate radius.  Even seeds live in
    // Euclidean space, odd seeds in the unit 3-sphere chart, so both
    // ambient families get a generic control.
    let mut rng = ChaCha8Rng::seed_from_u64(seed as u64);
    let a: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
    let bump = format!(
        "1 + 0.1 * ({} * sin(x) * cos(y) + {} * cos(2 * x) + {} * sin(x) * sin(2 * y) + {} * cos(x))",
        a[0], a[1], a[2], a[3]
    );
    let coords = ["sin(x) * cos(y)", "sin(x) * sin(y)", "cos(x)"]
        .map(|dir| parse_static(&format!("({bump}) * {dir}")))
        .to_vec();
    let ambient = if (seed as u64) % 2 == 0 {
        AmbientManifold::euclidean(3).expect("static ambient")
    } else {
        AmbientManifold::sphere(3, 1.0).expect("static ambient")
    };
    Ok(ExampleSpec {
        name: "perturbed-random".into(),
        summary: EXAMPLES[9].1.into(),
        ambient,
        coords,
        metric: MetricMode::Induced,
        // The bump is not smooth across the polar seams as a function on
        // the sphere, so no compactness is claimed: pointwise identities
        // only.
        domain: Domain::new((0.0, PI), (0.0, 2.0 * PI), false, true, false)?,
        expected: vec![
            flag(Property::Harmonic, false, 1e-3),
            flag(Property::Biharmonic, false, 1e-3),
            flag(Property::Cmc, false, 1e-4),
        ],
        params: vec![("seed".into(), seed)],
    })
}

// ---------------------------------------------------------------------------
// Self-check measurements
// ---------------------------------------------------------------------------

struct PointProbe {
    tau_norm: f64,
    tau2_norm: Option<f64>,
    cmc_defect: f64,
    gauss: f64,
    norm_h2: f64,
    pseudo_defect: f64,
}

fn probe_point(
    im: &Immersion,
    p: (f64, f64),
    order: usize,
    with_tau2: bool,
) -> Result<PointProbe, GeomError> {
    let pf = PointFields::build(im, p, order)?;
    let tau_norm = pf.hdot(&pf.tau, &pf.tau).value().max(0.0).sqrt();
    let tau2_norm = if with_tau2 {
        let t2 = pf.tau2();
        Some(pf.hdot(&t2, &t2).value().max(0.0).sqrt())
    } else {
        None
    };
    let h2 = pf.norm_h2();
    let cmc_defect = pipeline::scalar_grad_norm2(&pf, &h2).value().max(0.0).sqrt();
    let gauss = pf.gauss_curvature().value();
    let k2 = order - 2;
    let ah = pf.a_h_coord();
    let h2c = h2.cut(k2);
    let diff = [
        ah[0].try_sub(&(&h2c * &pf.g[0].cut(k2))).expect("matched orders"),
        ah[1].try_sub(&(&h2c * &pf.g[1].cut(k2))).expect("matched orders"),
        ah[2].try_sub(&(&h2c * &pf.g[2].cut(k2))).expect("matched orders"),
    ];
    let pseudo_defect = pipeline::sym2_norm2(&pf, &diff).value().max(0.0).sqrt();
    Ok(PointProbe {
        tau_norm,
        tau2_norm,
        cmc_defect,
        gauss,
        norm_h2: h2.value(),
        pseudo_defect,
    })
}

/// Re-measure every stated expectation of `spec` on a midpoint grid.
/// Returns one record per expectation; `pass` follows the defect/separation
/// convention documented on [`ExpectedValue`].
pub fn check_expectations(
    spec: &ExampleSpec,
    grid: (usize, usize),
) -> Result<Vec<PropertyCheck>, CatalogError> {
    let im = spec.immersion()?;
    let needs_tau2 = spec.expectation(Property::Biharmonic).is_some();
    let order = if needs_tau2 { 4 } else { 3 };
    let probes = quad::sample_map(&im.domain, grid.0, grid.1, |p| {
        probe_point(&im, p, order, needs_tau2)
    })?;

    let fold = |f: &dyn Fn(&PointProbe) -> f64| -> f64 {
        probes.iter().map(|(_, pr)| f(pr)).fold(0.0, f64::max)
    };
    let reports = spec
        .expected
        .iter()
        .map(|e| {
            let measured = match e.property {
                Property::Harmonic => fold(&|pr| pr.tau_norm),
                Property::Biharmonic => fold(&|pr| pr.tau2_norm.expect("computed when expected")),
                Property::Cmc => fold(&|pr| pr.cmc_defect),
                Property::GaussCurvature => {
                    let v = expect_real(e);
                    fold(&|pr| (pr.gauss - v).abs())
                }
                Property::NormH2 => {
                    let v = expect_real(e);
                    fold(&|pr| (pr.norm_h2 - v).abs())
                }
                Property::PseudoUmbilical => fold(&|pr| pr.pseudo_defect),
                Property::Flat => fold(&|pr| pr.gauss.abs()),
            };
            let pass = match e.value {
                ExpectedValue::Bool(true) | ExpectedValue::Real(_) => measured <= e.tolerance,
                ExpectedValue::Bool(false) => measured >= e.tolerance,
            };
            PropertyCheck {
                property: e.property,
                expected: e.value,
                tolerance: e.tolerance,
                measured,
                pass,
            }
        })
        .collect();
    Ok(reports)
}

fn expect_real(e: &Expectation) -> f64 {
    match e.value {
        ExpectedValue::Real(v) => v,
        ExpectedValue::Bool(_) => unreachable!("real-valued property carries a real expectation"),
    }
}

// ---------------------------------------------------------------------------
// Surface description files
// ---------------------------------------------------------------------------

/// Load a surface description file.  The format is line-oriented:
///
/// ```text
/// bitensionlab-spec v1
/// label = my-surface            # optional, before any section
///
/// [ambient]
/// kind = sphere                 # euclidean | sphere | hyperbolic
/// dim = 3
/// radius = 1                    # sphere/hyperbolic only, default 1
///
/// [immersion]
/// u1 = 2.4142135623730951 * sin(x) * cos(y)
/// u2 = 2.4142135623730951 * sin(x) * sin(y)
/// u3 = 2.4142135623730951 * cos(x)
/// # optionally prescribe the surface metric (all three or none):
/// # g11 = 1
/// # g12 = 0
/// # g22 = 1
///
/// [domain]
/// x = 0 : 3.141592653589793
/// y = 0 : 6.283185307179586 periodic
/// closed = true
///
/// [expected]                    # optional section
/// biharmonic = true 1e-8
/// K = 2 1e-8
/// ```
///
/// `#` starts a comment.  Flag expectations take `true`/`false` plus an
/// optional tolerance; value expectations take a number plus an optional
/// tolerance (default 1e-7, and 1e-3 for `false` flags).
pub fn load_spec_file(path: &str) -> Result<ExampleSpec, CatalogError> {
    let src = std::fs::read_to_string(path).map_err(|source| CatalogError::Io {
        path: path.to_string(),
        source,
    })?;
    let stem = std::path::Path::new(path)
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("user-spec");
    parse_spec(&src, stem).map_err(|e| match e {
        SpecErr { location, message } => CatalogError::SpecParse {
            path: path.to_string(),
            location,
            message,
        },
    })
}

/// Parse surface description text; `default_label` names the result when no
/// `label =` line is present.  Exposed for tests and in-memory use; the
/// error is positioned but carries no file path.
pub fn parse_spec_str(src: &str, default_label: &str) -> Result<ExampleSpec, CatalogError> {
    parse_spec(src, default_label).map_err(|SpecErr { location, message }| {
        CatalogError::SpecParse {
            path: "<input>".into(),
            location,
            message,
        }
    })
}

struct SpecErr {
    location: SpecLocation,
    message: String,
}

fn err_at(line: usize, column: usize, message: impl Into<String>) -> SpecErr {
    SpecErr {
        location: SpecLocation { line, column },
        message: message.into(),
    }
}

#[derive(PartialEq, Clone, Copy)]
enum Section {
    Preamble,
    Ambient,
    Immersion,
    DomainSec,
    Expected,
}

#[derive(Default)]
struct SpecDraft {
    label: Option<String>,
    kind: Option<String>,
    dim: Option<usize>,
    radius: Option<f64>,
    u: Vec<(usize, Expr)>,
    g: Vec<(String, Expr)>,
    x_range: Option<((f64, f64), bool)>,
    y_range: Option<((f64, f64), bool)>,
    closed: Option<bool>,
    expected: Vec<Expectation>,
}

fn parse_spec(src: &str, default_label: &str) -> Result<ExampleSpec, SpecErr> {
    let mut saw_header = false;
    let mut section = Section::Preamble;
    let mut draft = SpecDraft::default();
    let mut last_line = 1;

    for (idx, raw) in src.lines().enumerate() {
        let lineno = idx + 1;
        last_line = lineno;
        let uncommented = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let line = uncommented.trim_end();
        let content = line.trim_start();
        if content.is_empty() {
            continue;
        }
        let col0 = line.len() - content.len(); // 0-based column of first token

        if !saw_header {
            if content == "bitensionlab-spec v1" {
                saw_header = true;
                continue;
            }
            return Err(err_at(
                lineno,
                col0 + 1,
                "expected header line `bitensionlab-spec v1`",
            ));
        }

        if let Some(name) = content.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            section = match name {
                "ambient" => Section::Ambient,
                "immersion" => Section::Immersion,
                "domain" => Section::DomainSec,
                "expected" => Section::Expected,
                other => {
                    return Err(err_at(lineno, col0 + 2, format!("unknown section `{other}`")))
                }
            };
            continue;
        }

        let eq = content.find('=').ok_or_else(|| {
            err_at(lineno, col0 + 1, "expected `key = value` or `[section]`")
        })?;
        let key = content[..eq].trim();
        let value_off0 = col0 + eq + 1 + count_leading_ws(&content[eq + 1..]);
        let value = content[eq + 1..].trim();
        let vcol = value_off0 + 1; // 1-based column where the value starts
        if key.is_empty() {
            return Err(err_at(lineno, col0 + 1, "missing key before `=`"));
        }
        if value.is_empty() {
            return Err(err_at(lineno, vcol, format!("missing value for `{key}`")));
        }

        match section {
            Section::Preamble => match key {
                "label" => set_once(&mut draft.label, value.to_string(), key, lineno, vcol)?,
                _ => {
                    return Err(err_at(
                        lineno,
                        col0 + 1,
                        format!("key `{key}` must appear inside a section"),
                    ))
                }
            },
            Section::Ambient => match key {
                "kind" => set_once(&mut draft.kind, value.to_string(), key, lineno, vcol)?,
                "dim" => {
                    let d: usize = value.parse().map_err(|_| {
                        err_at(lineno, vcol, format!("`{value}` is not a dimension"))
                    })?;
                    set_once(&mut draft.dim, d, key, lineno, vcol)?;
                }
                "radius" => {
                    let r = parse_float(value, lineno, vcol)?;
                    set_once(&mut draft.radius, r, key, lineno, vcol)?;
                }
                other => {
                    return Err(err_at(
                        lineno,
                        col0 + 1,
                        format!("unknown [ambient] key `{other}`"),
                    ))
                }
            },
            Section::Immersion => {
                if let Some(ix) = key.strip_prefix('u').and_then(|s| s.parse::<usize>().ok()) {
                    if ix == 0 {
                        return Err(err_at(lineno, col0 + 1, "coordinates are numbered from u1"));
                    }
                    if draft.u.iter().any(|(j, _)| *j == ix) {
                        return Err(err_at(lineno, col0 + 1, format!("duplicate key `{key}`")));
                    }
                    draft.u.push((ix, parse_value_expr(value, lineno, vcol)?));
                } else if matches!(key, "g11" | "g12" | "g22") {
                    if draft.g.iter().any(|(k, _)| k == key) {
                        return Err(err_at(lineno, col0 + 1, format!("duplicate key `{key}`")));
                    }
                    draft
                        .g
                        .push((key.to_string(), parse_value_expr(value, lineno, vcol)?));
                } else {
                    return Err(err_at(
                        lineno,
                        col0 + 1,
                        format!("unknown [immersion] key `{key}`"),
                    ));
                }
            }
            Section::DomainSec => match key {
                "x" | "y" => {
                    let parsed = parse_range(value, lineno, vcol)?;
                    let slot = if key == "x" {
                        &mut draft.x_range
                    } else {
                        &mut draft.y_range
                    };
                    set_once(slot, parsed, key, lineno, vcol)?;
                }
                "closed" => {
                    let b = parse_bool(value, lineno, vcol)?;
                    set_once(&mut draft.closed, b, key, lineno, vcol)?;
                }
                other => {
                    return Err(err_at(
                        lineno,
                        col0 + 1,
                        format!("unknown [domain] key `{other}`"),
                    ))
                }
            },
            Section::Expected => {
                let property = Property::from_name(key).ok_or_else(|| {
                    err_at(lineno, col0 + 1, format!("unknown property `{key}`"))
                })?;
                if draft.expected.iter().any(|e| e.property == property) {
                    return Err(err_at(lineno, col0 + 1, format!("duplicate key `{key}`")));
                }
                draft
                    .expected
                    .push(parse_expectation(property, value, lineno, vcol)?);
            }
        }
    }

    if !saw_header {
        return Err(err_at(1, 1, "empty input: expected `bitensionlab-spec v1`"));
    }
    finish_draft(draft, default_label, last_line)
}

fn count_leading_ws(s: &str) -> usize {
    s.len() - s.trim_start().len()
}

fn set_once<T>(
    slot: &mut Option<T>,
    value: T,
    key: &str,
    line: usize,
    col: usize,
) -> Result<(), SpecErr> {
    if slot.is_some() {
        return Err(err_at(line, col, format!("duplicate key `{key}`")));
    }
    *slot = Some(value);
    Ok(())
}

fn parse_float(s: &str, line: usize, col: usize) -> Result<f64, SpecErr> {
    s.parse()
        .map_err(|_| err_at(line, col, format!("`{s}` is not a number")))
}

fn parse_bool(s: &str, line: usize, col: usize) -> Result<bool, SpecErr> {
    match s {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(err_at(line, col, format!("`{s}` is not `true`/`false`"))),
    }
}

fn parse_value_expr(s: &str, line: usize, col: usize) -> Result<Expr, SpecErr> {
    expr::parse(s).map_err(|e| {
        let offset = match &e {
            expr::ParseError::Syntax { offset, .. } => *offset,
            expr::ParseError::UnknownFunction { offset, .. } => *offset,
        };
        err_at(line, col + offset.saturating_sub(1), e.to_string())
    })
}

/// `lo : hi [periodic]`
fn parse_range(s: &str, line: usize, col: usize) -> Result<((f64, f64), bool), SpecErr> {
    let (range_part, periodic) = match s.strip_suffix("periodic") {
        Some(rest) => (rest.trim_end(), true),
        None => (s, false),
    };
    let (lo_s, hi_s) = range_part
        .split_once(':')
        .ok_or_else(|| err_at(line, col, "expected `lo : hi [periodic]`"))?;
    let lo = parse_float(lo_s.trim(), line, col)?;
    let hi = parse_float(hi_s.trim(), line, col)?;
    if !(lo < hi) {
        return Err(err_at(line, col, format!("empty range {lo} : {hi}")));
    }
    Ok(((lo, hi), periodic))
}

/// `<bool|number> [tolerance]`
fn parse_expectation(
    property: Property,
    s: &str,
    line: usize,
    col: usize,
) -> Result<Expectation, SpecErr> {
    let mut parts = s.split_whitespace();
    let head = parts.next().expect("value checked nonempty");
    let tol_part = parts.next();
    if parts.next().is_some() {
        return Err(err_at(line, col, "expected `<value> [tolerance]`"));
    }
    let value = if property.is_flag() {
        ExpectedValue::Bool(parse_bool(head, line, col)?)
    } else {
        ExpectedValue::Real(parse_float(head, line, col)?)
    };
    let default_tol = match value {
        ExpectedValue::Bool(false) => 1e-3,
        _ => 1e-7,
    };
    let tolerance = match tol_part {
        Some(t) => {
            let t = parse_float(t, line, col)?;
            if !(t > 0.0 && t.is_finite()) {
                return Err(err_at(line, col, format!("tolerance must be positive, got {t}")));
            }
            t
        }
        None => default_tol,
    };
    Ok(Expectation {
        property,
        value,
        tolerance,
    })
}

fn finish_draft(
    draft: SpecDraft,
    default_label: &str,
    last_line: usize,
) -> Result<ExampleSpec, SpecErr> {
    let eof = |msg: &str| err_at(last_line, 1, msg);
    let kind = draft.kind.ok_or_else(|| eof("missing [ambient] kind"))?;
    let dim = draft.dim.ok_or_else(|| eof("missing [ambient] dim"))?;
    if !(2..=16).contains(&dim) {
        return Err(eof(&format!("ambient dimension {dim} out of range 2..=16")));
    }
    let radius = draft.radius.unwrap_or(1.0);
    let ambient = match kind.as_str() {
        "euclidean" => {
            if draft.radius.is_some() {
                return Err(eof("euclidean ambients take no radius"));
            }
            AmbientManifold::euclidean(dim)
        }
        "sphere" => AmbientManifold::sphere(dim, radius),
        "hyperbolic" => AmbientManifold::hyperbolic(dim, radius),
        other => return Err(eof(&format!("unknown ambient kind `{other}`"))),
    }
    .map_err(|e| eof(&e.to_string()))?;

    let mut u = draft.u;
    u.sort_by_key(|(ix, _)| *ix);
    if u.len() != dim || u.iter().enumerate().any(|(i, (ix, _))| *ix != i + 1) {
        return Err(eof(&format!(
            "expected coordinate expressions u1..u{dim}, found {}",
            u.len()
        )));
    }
    let coords: Vec<Expr> = u.into_iter().map(|(_, e)| e).collect();

    let metric = match draft.g.len() {
        0 => MetricMode::Induced,
        3 => {
            let pick = |name: &str| {
                draft
                    .g
                    .iter()
                    .find(|(k, _)| k == name)
                    .map(|(_, e)| e.clone())
                    .expect("length-3 set holds all components")
            };
            MetricMode::Prescribed {
                g11: pick("g11"),
                g12: pick("g12"),
                g22: pick("g22"),
            }
        }
        _ => return Err(eof("prescribed metrics need all of g11, g12, g22")),
    };

    let (x_range, periodic_x) = draft.x_range.ok_or_else(|| eof("missing [domain] x"))?;
    let (y_range, periodic_y) = draft.y_range.ok_or_else(|| eof("missing [domain] y"))?;
    let closed = draft.closed.unwrap_or(false);
    let domain = Domain::new(x_range, y_range, periodic_x, periodic_y, closed)
        .map_err(|e| eof(&e.to_string()))?;

    let label = draft.label.unwrap_or_else(|| default_label.to_string());
    let spec = ExampleSpec {
        summary: format!("user-defined surface `{label}`"),
        name: label,
        ambient,
        coords,
        metric,
        domain,
        expected: draft.expected,
        params: vec![],
    };
    // Surface-level sanity: coordinate count vs ambient dimension.
    spec.immersion().map_err(|e| eof(&e.to_string()))?;
    Ok(spec)
}
