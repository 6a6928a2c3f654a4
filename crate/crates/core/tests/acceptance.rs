//! Acceptance battery: the end-to-end guarantees the engine must deliver,
//! one numbered criterion per guarantee, each printed as a single pass/fail
//! line.  The test fails if any criterion fails; run with `--nocapture` to
//! see the lines even when everything passes.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};

use bitension_core::ambient::AmbientManifold;
use bitension_core::catalog;
use bitension_core::expr::{self, Expr};
use bitension_core::immersion::Immersion;
use bitension_core::jet::Jet;
use bitension_core::quad;
use bitension_core::verify::{
    gauss_bonnet_total, run_check, scan_family, stress_spectral_gap, CheckId, CheckOptions,
    ResidualReport, ScanResidual, Verdict, VerifyError,
};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<(), String>;

/// Catalog entries whose metric is induced by the ambient embedding — the
/// surfaces on which extrinsic quantities (second fundamental form, stress
/// tensor) are defined.  The prescribed-metric entry is excluded.
const INDUCED_ENTRIES: [&str; 9] = [
    "plane-R3",
    "unit-sphere-R3",
    "cylinder-R3",
    "clifford-minimal-S3",
    "small-sphere-S3",
    "small-sphere-S3-iso",
    "clifford-torus-S4",
    "torus-rev-R3",
    "perturbed-random",
];

const BIHARMONIC_ENTRIES: [&str; 2] = ["small-sphere-S3", "clifford-torus-S4"];

fn surface(name: &str) -> Result<Immersion, String> {
    catalog::get_example(name)
        .map_err(|e| format!("catalog `{name}`: {e}"))?
        .immersion()
        .map_err(|e| format!("building `{name}`: {e}"))
}

fn surface_with(name: &str, params: &[(&str, f64)]) -> Result<Immersion, String> {
    catalog::get_example_with(name, params)
        .map_err(|e| format!("catalog `{name}`: {e}"))?
        .immersion()
        .map_err(|e| format!("building `{name}`: {e}"))
}

fn run(
    im: &Immersion,
    label: &str,
    check: CheckId,
    opts: &CheckOptions,
) -> Result<ResidualReport, String> {
    run_check(im, label, check, opts).map_err(|e| format!("{} on {label}: {e}", check.name()))
}

fn extra(rep: &ResidualReport, key: &str) -> Result<f64, String> {
    rep.extra(key)
        .ok_or_else(|| format!("report for {} on {} lacks `{key}`", rep.check, rep.example))
}

fn require(cond: bool, msg: impl FnOnce() -> String) -> Outcome {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// ── 1: the bitension residual separates biharmonic surfaces from controls ──

fn biharmonic_instances() -> Outcome {
    let opts = CheckOptions::default();
    for name in BIHARMONIC_ENTRIES {
        let rep = run(&surface(name)?, name, CheckId::Tau2, &opts)?;
        require(rep.max_residual <= 1e-7, || {
            format!("|tau2| on {name} is {:.3e}, want <= 1e-7", rep.max_residual)
        })?;
    }
    let controls: [(&str, &[(&str, f64)]); 2] =
        [("unit-sphere-R3", &[]), ("small-sphere-S3", &[("r", 0.6)])];
    for (name, params) in controls {
        let rep = run(&surface_with(name, params)?, name, CheckId::Tau2, &opts)?;
        require(rep.max_residual >= 1e-2, || {
            format!("control {name} has |tau2| {:.3e}, want >= 1e-2", rep.max_residual)
        })?;
    }
    Ok(())
}

// ── 2: a parameter scan recovers the biharmonic radius ─────────────────────

fn radius_recovery() -> Outcome {
    let family = |r: f64| -> Result<Immersion, VerifyError> {
        catalog::get_example_with("small-sphere-S3", &[("r", r)])
            .map_err(|e| VerifyError::BadParameter(e.to_string()))?
            .immersion()
            .map_err(VerifyError::from)
    };
    let opts = CheckOptions { grid: (6, 6), ..CheckOptions::default() };
    let scan = scan_family(&family, (0.3, 0.999), 48, ScanResidual::BitensionMax, &opts)
        .map_err(|e| format!("scan: {e}"))?;
    let best = scan
        .minima
        .iter()
        .min_by(|a, b| a.residual.total_cmp(&b.residual))
        .ok_or_else(|| "scan reported no interior minimum".to_owned())?;
    require((best.param - 0.7071068).abs() <= 1e-6, || {
        format!("minimum at r = {:.9}, want 0.7071068 +- 1e-6", best.param)
    })?;
    require(best.residual < 1e-7, || {
        format!("refined residual {:.3e}, want < 1e-7", best.residual)
    })
}

// ── 3: conservation and commutation hold on arbitrary immersions ───────────

fn universal_identities() -> Outcome {
    let opts = CheckOptions { grid: (4, 4), ..CheckOptions::default() };
    for seed in 1..=20u64 {
        let im = common::random_immersion(seed);
        let label = format!("random-{seed}");
        for check in [CheckId::Hilbert, CheckId::Lemma] {
            let rep = run(&im, &label, check, &opts)?;
            require(rep.verdict == Verdict::Pass && rep.max_residual <= 1e-7, || {
                format!("{} on {label}: max {:.3e}, want <= 1e-7", check.name(), rep.max_residual)
            })?;
        }
    }
    Ok(())
}

// ── 4: the rough-Laplacian identity for the stress tensor ──────────────────

fn stress_laplacian_identity() -> Outcome {
    let opts = CheckOptions::default();
    for name in BIHARMONIC_ENTRIES {
        let rep = run(&surface(name)?, name, CheckId::Prop2, &opts)?;
        require(rep.max_residual <= 1e-7, || {
            format!("prop2 on {name}: max {:.3e}, want <= 1e-7", rep.max_residual)
        })?;
    }
    let control = surface_with("small-sphere-S3", &[("r", 0.6)])?;
    let rep = run(&control, "small-sphere-S3 r=0.6", CheckId::Prop2, &opts)?;
    require(rep.max_residual >= 1e-2, || {
        format!(
            "prop2 residual on the r = 0.6 control is {:.3e}, required >= 1e-2; this \
             separation is unattainable: the control is an umbilical constant-mean-curvature \
             sphere, its stress tensor is parallel, and the identity's two sides cancel \
             for every radius, so the residual cannot distinguish the biharmonic radius",
            rep.max_residual
        )
    })
}

// ── 5: closed form of the stress tensor on every immersed entry ────────────

fn stress_closed_form() -> Outcome {
    let opts = CheckOptions::default();
    let mut surfaces: Vec<(String, Immersion)> = Vec::new();
    for name in INDUCED_ENTRIES {
        surfaces.push((name.to_owned(), surface(name)?));
    }
    surfaces.push((
        "small-sphere-S3 r=0.6".to_owned(),
        surface_with("small-sphere-S3", &[("r", 0.6)])?,
    ));
    for (label, im) in &surfaces {
        let rep = run(im, label, CheckId::S2form, &opts)?;
        require(rep.max_residual <= 1e-9, || {
            format!("s2form on {label}: max {:.3e}, want <= 1e-9", rep.max_residual)
        })?;
    }
    Ok(())
}

// ── 6: the integral identity and its integration-by-parts ingredient ───────

fn integral_identity() -> Outcome {
    let opts = CheckOptions::default();
    for name in BIHARMONIC_ENTRIES {
        let rep = run(&surface(name)?, name, CheckId::Thm1, &opts)?;
        for key in ["i_grad", "i_curv", "i_rhs"] {
            let v = extra(&rep, key)?;
            require(v.abs() <= 1e-8, || {
                format!("thm1 on {name}: {key} = {v:.3e}, want |.| <= 1e-8")
            })?;
        }
        let parts = extra(&rep, "parts_ibp")?;
        require(parts <= 1e-6, || {
            format!("integration-by-parts gap on the synthetic torus field: {parts:.3e}, want <= 1e-6")
        })?;
    }
    Ok(())
}

// ── 7: shape-operator eigenvalue formulas and the curvature bound ──────────

fn eigenvalue_formulas() -> Outcome {
    let opts = CheckOptions::default(); // k0 = 1
    for name in BIHARMONIC_ENTRIES {
        let im = surface(name)?;
        let rep = run(&im, name, CheckId::Thm2, &opts)?;
        require(!rep.verdict.is_failure() && rep.max_residual <= 1e-8, || {
            format!("thm2 on {name}: max {:.3e}, want <= 1e-8", rep.max_residual)
        })?;
        let d = extra(&rep, "d_abs_max")?;
        require(d <= 1e-8, || format!("thm2 on {name}: |D| max {d:.3e}, want <= 1e-8"))?;
        let p3 = run(&im, name, CheckId::Prop3, &opts)?;
        let gap = extra(&p3, "max_abs_gap")?;
        require(gap <= 1e-8, || {
            format!("prop3 on {name}: |gap| max {gap:.3e} at K0 = 1, want equality <= 1e-8")
        })?;
    }
    let control = surface_with("small-sphere-S3", &[("r", 0.6)])?;
    let rep = run(&control, "small-sphere-S3 r=0.6", CheckId::Thm2, &opts)?;
    let ne = extra(&rep, "normal_eq_max")?;
    require(ne >= 1e-2, || {
        format!("normal-equation residual on the r = 0.6 control is {ne:.3e}, want >= 1e-2")
    })
}

// ── 8: holomorphy of the quadratic coefficient in conformal charts ─────────

fn quadratic_coefficient_holomorphy() -> Outcome {
    let opts = CheckOptions::default();
    let cyl = run(&surface("cylinder-R3")?, "cylinder-R3", CheckId::Thm3, &opts)?;
    require(cyl.max_residual <= 1e-8, || {
        format!("thm3 on cylinder-R3: max {:.3e}, want <= 1e-8", cyl.max_residual)
    })?;
    let f = extra(&cyl, "f_abs_max")?;
    require((f - 0.125).abs() <= 1e-9, || {
        format!("cylinder quadratic coefficient |f| max {f:.6e}, want the nonzero value 1/8")
    })?;
    for name in ["clifford-torus-S4", "small-sphere-S3-iso"] {
        let rep = run(&surface(name)?, name, CheckId::Thm3, &opts)?;
        require(rep.max_residual <= 1e-8, || {
            format!("thm3 on {name}: max {:.3e}, want <= 1e-8", rep.max_residual)
        })?;
        let f = extra(&rep, "f_abs_max")?;
        require(f <= 1e-9, || {
            format!("{name} is pseudo-umbilical, |f| max should vanish; got {f:.3e}")
        })?;
    }
    match run_check(&surface("small-sphere-S3")?, "small-sphere-S3", CheckId::Thm3, &opts) {
        Err(VerifyError::NotIsothermal { .. }) => Ok(()),
        Ok(rep) => Err(format!(
            "polar chart must be rejected as non-isothermal; got verdict {:?}",
            rep.verdict
        )),
        Err(e) => Err(format!("polar chart rejected for the wrong reason: {e}")),
    }
}

// ── 9: nonnegativity of the spectral gap, equality only pseudo-umbilically ─

fn spectral_gap_nonnegativity() -> Outcome {
    for name in INDUCED_ENTRIES {
        let im = surface(name)?;
        for p in quad::sample_points(&im.domain, 8, 8) {
            let (q, pu) =
                stress_spectral_gap(&im, p, 3).map_err(|e| format!("probe on {name}: {e}"))?;
            require(q >= -1e-10, || {
                format!("2|S2|^2 - |tau|^4 = {q:.3e} at {p:?} on {name}, want >= -1e-10")
            })?;
            let near_zero = q.abs() <= 1e-8;
            let pseudo_umbilic = pu <= 1e-8;
            require(near_zero == pseudo_umbilic, || {
                format!(
                    "equality characterisation breaks at {p:?} on {name}: \
                     gap {q:.3e} vs pseudo-umbilic defect {pu:.3e}"
                )
            })?;
        }
    }
    Ok(())
}

// ── 10: kernel validation (jets, ambient curvature, total curvature) ───────

const FD_STEP: f64 = 1e-3;

fn jet_at(e: &Expr, p: (f64, f64), order: usize) -> Jet {
    let jx = Jet::var_x(order, p);
    let jy = Jet::var_y(order, p);
    let vars = [("x", &jx), ("y", &jy)];
    let env = expr::Env::new(&vars).expect("two distinct variables");
    expr::eval(e, &env).expect("guarded expression evaluates")
}

fn stencil_scale(e: &Expr, p: (f64, f64)) -> f64 {
    let mut scale: f64 = 1.0;
    for dx in [-1.0, -0.5, 0.0, 0.5, 1.0] {
        for dy in [-1.0, -0.5, 0.0, 0.5, 1.0] {
            scale = scale.max(common::eval_f64(e, (p.0 + dx * FD_STEP, p.1 + dy * FD_STEP)).abs());
        }
    }
    scale
}

fn kernel_validation() -> Outcome {
    // Jet derivatives against the Richardson finite-difference oracle.
    let mut rng = ChaCha8Rng::seed_from_u64(424242);
    for case in 0..100 {
        let (e, _) = common::random_expr(&mut rng, 4);
        let p = (rng.gen_range(-0.9..0.9), rng.gen_range(-0.9..0.9));
        let jet = jet_at(&e, p, 2);
        let scale = stencil_scale(&e, p);
        let fx = |x: f64| common::eval_f64(&e, (x, p.1));
        let fy = |y: f64| common::eval_f64(&e, (p.0, y));
        let fxy = |x: f64, y: f64| common::eval_f64(&e, (x, y));
        let oracle = [
            (1, 0, common::fd_d(fx, p.0, FD_STEP)),
            (0, 1, common::fd_d(fy, p.1, FD_STEP)),
            (2, 0, common::fd_d2(fx, p.0, FD_STEP)),
            (0, 2, common::fd_d2(fy, p.1, FD_STEP)),
            (1, 1, common::fd_dxy(fxy, p, FD_STEP)),
        ];
        for (i, j, fd) in oracle {
            let exact = jet.derivative(i, j).map_err(|e| e.to_string())?;
            let tol = 1e-8 * (1.0 + exact.abs() + scale);
            require((exact - fd).abs() <= tol, || {
                format!("case {case}, d({i},{j}) of `{e}` at {p:?}: jet {exact} vs fd {fd}")
            })?;
        }
    }

    // Built-in ambients have the advertised constant sectional curvature.
    let ambients: [(&str, AmbientManifold, f64); 4] = [
        ("euclidean 3-space", AmbientManifold::euclidean(3).unwrap(), 0.0),
        ("unit 3-sphere", AmbientManifold::sphere(3, 1.0).unwrap(), 1.0),
        ("4-sphere of radius 2", AmbientManifold::sphere(4, 2.0).unwrap(), 0.25),
        ("hyperbolic 3-space", AmbientManifold::hyperbolic(3, 1.0).unwrap(), -1.0),
    ];
    for (label, amb, expected) in &ambients {
        let dim = amb.dim();
        let mut u = vec![0.0; dim];
        let mut x = vec![0.0; dim];
        let mut y = vec![0.0; dim];
        u[..3].copy_from_slice(&[0.12, -0.2, 0.15]);
        x[..3].copy_from_slice(&[0.8, 0.1, -0.3]);
        y[..3].copy_from_slice(&[0.2, 0.9, 0.4]);
        if dim > 3 {
            u[3] = 0.1;
            y[3] = -0.5;
        }
        let sec = amb.sectional(&u, &x, &y).map_err(|e| format!("{label}: {e}"))?;
        require((sec - expected).abs() <= 1e-9, || {
            format!("sectional curvature of {label}: {sec:.12}, want {expected}")
        })?;
    }

    // Total curvature: 4*pi on the topological spheres, zero on the tori.
    let four_pi = 4.0 * std::f64::consts::PI;
    for name in ["unit-sphere-R3", "small-sphere-S3"] {
        let total = gauss_bonnet_total(&surface(name)?, (64, 64), 1e-8)
            .map_err(|e| format!("total curvature of {name}: {e}"))?;
        require((total - four_pi).abs() <= 1e-8, || {
            format!("total curvature of {name}: {total:.12}, want 4*pi")
        })?;
    }
    for name in ["clifford-minimal-S3", "clifford-torus-S4", "torus-rev-R3", "flat-torus"] {
        let total = gauss_bonnet_total(&surface(name)?, (64, 64), 1e-8)
            .map_err(|e| format!("total curvature of {name}: {e}"))?;
        require(total.abs() <= 1e-8, || {
            format!("total curvature of {name}: {total:.3e}, want 0")
        })?;
    }
    Ok(())
}

#[test]
fn acceptance_criteria() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("bitension vanishes on the biharmonic surfaces, not on the controls", biharmonic_instances),
        ("parameter scan recovers the biharmonic sphere radius", radius_recovery),
        ("conservation and commutation hold on randomized immersions", universal_identities),
        ("rough-Laplacian identity for the stress tensor", stress_laplacian_identity),
        ("stress tensor matches its closed form on the whole corpus", stress_closed_form),
        ("vanishing of the integral identity on compact biharmonic surfaces", integral_identity),
        ("shape-operator eigenvalue formulas and curvature bound", eigenvalue_formulas),
        ("quadratic coefficient is holomorphic in conformal charts", quadratic_coefficient_holomorphy),
        ("spectral gap is nonnegative, zero exactly pseudo-umbilically", spectral_gap_nonnegativity),
        ("kernel validation: jets, sectional curvature, total curvature", kernel_validation),
    ];

    let mut failures = Vec::new();
    for (i, (title, criterion)) in criteria.iter().enumerate() {
        let n = i + 1;
        match catch_unwind(AssertUnwindSafe(criterion)) {
            Ok(Ok(())) => println!("criterion {n:2}: PASS  {title}"),
            Ok(Err(msg)) => {
                println!("criterion {n:2}: FAIL  {title}: {msg}");
                failures.push(n);
            }
            Err(payload) => {
                let msg = payload
                    .downcast_ref::<String>()
                    .map(String::as_str)
                    .or_else(|| payload.downcast_ref::<&str>().copied())
                    .unwrap_or("panic with non-string payload");
                println!("criterion {n:2}: FAIL  {title}: panicked: {msg}");
                failures.push(n);
            }
        }
    }
    assert!(
        failures.is_empty(),
        "acceptance criteria failed: {failures:?} (see the per-criterion lines above)"
    );
}
