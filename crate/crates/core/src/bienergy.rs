//! Tension, bitension and the biharmonic stress-energy tensor.
//!
//! All operations take an [`Immersion`], a parameter point and a jet order,
//! validate that the order is high enough for the derivatives involved, and
//! return plain-value reports. Conventions:
//!
//! * the Laplacian is the geometer's, `Delta = -trace nabla^2`;
//! * `tau = trace nabla dphi` is the tension field, `H = tau / 2`;
//! * `tau_2 = trace nabla^2 tau - trace R^N(dphi, tau) dphi` is the
//!   bitension field, the Euler–Lagrange operator of the bienergy
//!   `E_2 = (1/2) integral |tau|^2`;
//! * `S_2 = ((1/2)|tau|^2 + <dphi, nabla tau>) g - T` with
//!   `T(X, Y) = <dphi(X), nabla_Y tau> + <dphi(Y), nabla_X tau>` is the
//!   stress-energy tensor of the bienergy.

use crate::expr::{self, Env, Expr};
use crate::immersion::{GeomError, Immersion};
use crate::jet::Jet;
use crate::pipeline::{
    scalar_grad_norm2, scalar_hessian, scalar_laplacian, sym, sym2_divergence, sym2_norm2,
    sym2_rough_laplacian, PointFields,
};
use crate::quad;

/// Tension field at a point; jet order >= 2.
#[derive(Debug, Clone)]
pub struct TensionReport {
    /// Ambient chart components of `tau`.
    pub tau: Vec<f64>,
    /// Metric length `|tau|`.
    pub norm: f64,
    /// `|H|^2 = |tau|^2 / 4`.
    pub norm_h2: f64,
}

pub fn tension_at(im: &Immersion, p: (f64, f64), order: usize) -> Result<TensionReport, GeomError> {
    let pf = PointFields::build_for(im, p, order, "tension_at", 2)?;
    let tau: Vec<f64> = pf.tau.iter().map(|j| j.value()).collect();
    let n2 = pf.norm_tau2().value();
    Ok(TensionReport {
        tau,
        norm: n2.max(0.0).sqrt(),
        norm_h2: n2 / 4.0,
    })
}

/// Bitension field at a point; jet order >= 4.
#[derive(Debug, Clone)]
pub struct BitensionReport {
    /// Ambient chart components of `tau_2`.
    pub tau2: Vec<f64>,
    /// Metric length `|tau_2|`.
    pub norm: f64,
}

pub fn bitension_at(
    im: &Immersion,
    p: (f64, f64),
    order: usize,
) -> Result<BitensionReport, GeomError> {
    let pf = PointFields::build_for(im, p, order, "bitension_at", 4)?;
    let t2 = pf.tau2();
    let norm = pf.hdot(&t2, &t2).value().max(0.0).sqrt();
    Ok(BitensionReport {
        tau2: t2.iter().map(|j| j.value()).collect(),
        norm,
    })
}

/// Stress-energy tensor at a point; jet order >= 3.
#[derive(Debug, Clone)]
pub struct S2Report {
    /// Coordinate components `[S11, S12, S22]`.
    pub s2: [f64; 3],
    /// Coordinate components of the symmetrised derivative part `T`.
    pub t: [f64; 3],
    /// Components of `S_2` in an orthonormal frame.
    pub s2_frame: [f64; 3],
    /// Metric trace `g^{ab} (S_2)_{ab}`; equals `|tau|^2` identically.
    pub trace: f64,
    /// Pointwise squared norm `|S_2|^2`.
    pub norm2: f64,
}

pub fn s2_at(im: &Immersion, p: (f64, f64), order: usize) -> Result<S2Report, GeomError> {
    let pf = PointFields::build_for(im, p, order, "s2_at", 3)?;
    let (s2, t) = pf.s2_and_t();
    let mut trace = 0.0;
    for a in 0..2 {
        for b in 0..2 {
            trace += pf.ginv_at(a, b).value() * s2[sym(a, b)].value();
        }
    }
    let norm2 = sym2_norm2(&pf, &s2).value();
    Ok(S2Report {
        s2: [s2[0].value(), s2[1].value(), s2[2].value()],
        t: [t[0].value(), t[1].value(), t[2].value()],
        s2_frame: pf.frame_sym2(&s2),
        trace,
        norm2,
    })
}

/// The symmetrised first-derivative part `T` of the stress-energy tensor;
/// jet order >= 3.
pub fn t_tensor_at(im: &Immersion, p: (f64, f64), order: usize) -> Result<[f64; 3], GeomError> {
    let pf = PointFields::build_for(im, p, order, "t_tensor_at", 3)?;
    let (_, t) = pf.s2_and_t();
    Ok([t[0].value(), t[1].value(), t[2].value()])
}

/// Divergence of the stress-energy tensor at a point; jet order >= 4.
#[derive(Debug, Clone)]
pub struct DivS2Report {
    /// Covector components `(div S_2)_b = g^{ma} (nabla_m S_2)_{ab}`.
    pub div: [f64; 2],
    /// Metric length of the covector.
    pub norm: f64,
    /// Components of the pairing `<tau_2, dphi(d_b)>`; the conservation law
    /// states `div S_2 = -<tau_2, dphi>`.
    pub tau2_pairing: [f64; 2],
}

pub fn div_s2_at(im: &Immersion, p: (f64, f64), order: usize) -> Result<DivS2Report, GeomError> {
    let pf = PointFields::build_for(im, p, order, "div_s2_at", 4)?;
    let (s2, _) = pf.s2_and_t();
    let div = sym2_divergence(&pf, &s2);
    let divv = [div[0].value(), div[1].value()];
    let mut norm2 = 0.0;
    for a in 0..2 {
        for b in 0..2 {
            norm2 += pf.ginv_at(a, b).value() * divv[a] * divv[b];
        }
    }
    let t2 = pf.tau2();
    let k4 = pf.order - 4;
    let mut pairing = [0.0; 2];
    for (b, out) in pairing.iter_mut().enumerate() {
        let db: Vec<Jet> = pf.dphi[b].iter().map(|j| j.cut(k4)).collect();
        *out = pf.hdot(&t2, &db).value();
    }
    Ok(DivS2Report {
        div: divv,
        norm: norm2.max(0.0).sqrt(),
        tau2_pairing: pairing,
    })
}

/// Rough Laplacian of the stress-energy tensor,
/// `Delta^R S_2 = -g^{mn} (nabla^2 S_2)_{mn}`; jet order >= 5.
pub fn rough_laplacian_s2_at(
    im: &Immersion,
    p: (f64, f64),
    order: usize,
) -> Result<[f64; 3], GeomError> {
    let pf = PointFields::build_for(im, p, order, "rough_laplacian_s2_at", 5)?;
    let (s2, _) = pf.s2_and_t();
    let l = sym2_rough_laplacian(&pf, &s2);
    Ok([l[0].value(), l[1].value(), l[2].value()])
}

/// Normal-bundle derivatives of the mean curvature vector; jet order >= 4
/// and induced-metric mode.
#[derive(Debug, Clone)]
pub struct NormalHReport {
    /// Chart components of `(nabla^perp H)` along each parameter axis.
    pub nabla_perp_h: [Vec<f64>; 2],
    /// `|nabla^perp H|^2` (metric contraction over the axis index).
    pub norm_nabla_perp_h2: f64,
    /// Chart components of the normal Laplacian `Delta^perp H`.
    pub laplace_perp_h: Vec<f64>,
    /// Metric length of `Delta^perp H`.
    pub norm_laplace: f64,
}

pub fn normal_h_at(im: &Immersion, p: (f64, f64), order: usize) -> Result<NormalHReport, GeomError> {
    let pf = PointFields::build_for(im, p, order, "normal_h_at", 4)?;
    if !pf.immersed {
        return Err(GeomError::NotImmersed { op: "normal_h_at" });
    }
    let np = pf.nabla_perp_h();
    let lap = pf.laplace_perp_h();
    let norm_lap = pf.hdot(&lap, &lap).value().max(0.0).sqrt();
    Ok(NormalHReport {
        nabla_perp_h: [
            np[0].iter().map(|j| j.value()).collect(),
            np[1].iter().map(|j| j.value()).collect(),
        ],
        norm_nabla_perp_h2: pf.norm_nabla_perp_h2().value(),
        laplace_perp_h: lap.iter().map(|j| j.value()).collect(),
        norm_laplace: norm_lap,
    })
}

/// Intrinsic scalar calculus for an expression `f(x, y)` over the surface;
/// jet order >= 2.
#[derive(Debug, Clone)]
pub struct ScalarReport {
    /// Covariant Hessian components `[f_xx, f_xy, f_yy]`.
    pub hessian: [f64; 3],
    /// Geometer's Laplacian `-trace Hess f`.
    pub laplacian: f64,
    /// Squared gradient norm `|df|^2`.
    pub grad_norm2: f64,
}

pub fn scalar_calculus_at(
    im: &Immersion,
    p: (f64, f64),
    order: usize,
    f: &Expr,
) -> Result<ScalarReport, GeomError> {
    let pf = PointFields::build_for(im, p, order, "scalar_calculus_at", 2)?;
    let jx = Jet::var_x(order, p);
    let jy = Jet::var_y(order, p);
    let binding = [("x", &jx), ("y", &jy)];
    let env = Env::new(&binding).map_err(GeomError::from)?;
    let fj = expr::eval(f, &env).map_err(GeomError::from)?;
    let h = scalar_hessian(&pf, &fj);
    Ok(ScalarReport {
        hessian: [h[0].value(), h[1].value(), h[2].value()],
        laplacian: scalar_laplacian(&pf, &fj).value(),
        grad_norm2: scalar_grad_norm2(&pf, &fj).value(),
    })
}

/// Total bienergy `E_2 = (1/2) integral |tau|^2 dA` over the parameter
/// domain, with an `nx` by `ny` quadrature grid; jet order >= 2.
pub fn bienergy_total(
    im: &Immersion,
    order: usize,
    nx: usize,
    ny: usize,
) -> Result<f64, GeomError> {
    if order < 2 {
        return Err(GeomError::OrderTooLow { op: "bienergy_total", needed: 2, got: order });
    }
    let half = quad::integrate2(&im.domain, nx, ny, |p| {
        let pf = PointFields::build(im, p, order)?;
        let dens = pf.norm_tau2().value() * pf.det_g.value().max(0.0).sqrt();
        Ok::<_, GeomError>(dens)
    })?;
    Ok(0.5 * half)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambient::AmbientManifold;
    use crate::immersion::{Domain, MetricMode};
    use approx::assert_relative_eq;
    use std::f64::consts::{PI, TAU};

    fn parse_coords(strs: &[&str]) -> Vec<Expr> {
        strs.iter().map(|s| expr::parse(s).unwrap()).collect()
    }

    fn sphere_chart_immersion(scale: f64, ambient: AmbientManifold) -> Immersion {
        let c = format!("{scale:.17}");
        Immersion::new(
            ambient,
            parse_coords(&[
                &format!("{c}*sin(x)*cos(y)"),
                &format!("{c}*sin(x)*sin(y)"),
                &format!("{c}*cos(x)"),
            ]),
            Domain::new((0.0, PI), (0.0, TAU), false, true, true).unwrap(),
            MetricMode::Induced,
        )
        .unwrap()
    }

    #[test]
    fn tension_is_twice_mean_curvature() {
        let im = Immersion::new(
            AmbientManifold::euclidean(3).unwrap(),
            parse_coords(&["(2 + cos(x))*cos(y)", "(2 + cos(x))*sin(y)", "sin(x)"]),
            Domain::torus((0.0, TAU), (0.0, TAU)),
            MetricMode::Induced,
        )
        .unwrap();
        for p in [(0.3, 0.8), (2.0, 4.0)] {
            let t = tension_at(&im, p, 3).unwrap();
            let geo = im.geometry_at(p, 3).unwrap();
            for a in 0..3 {
                assert_relative_eq!(t.tau[a], 2.0 * geo.h_mean[a], epsilon = 1e-10);
            }
            assert_relative_eq!(t.norm_h2, geo.norm_h2, epsilon = 1e-10);
        }
    }

    #[test]
    fn unit_sphere_bitension() {
        let im = sphere_chart_immersion(1.0, AmbientManifold::euclidean(3).unwrap());
        let p = (0.7, 1.1);
        let t = tension_at(&im, p, 4).unwrap();
        assert_relative_eq!(t.norm, 2.0, max_relative = 1e-9);
        let b = bitension_at(&im, p, 4).unwrap();
        assert_relative_eq!(b.norm, 4.0, max_relative = 1e-8);
        // tau_2 = -4 |H|^2 H = -2 tau for the unit sphere.
        for a in 0..3 {
            assert_relative_eq!(b.tau2[a], -2.0 * t.tau[a], epsilon = 1e-8);
        }
    }

    #[test]
    fn small_sphere_bitension_in_s3() {
        // Euclidean radius r inside the unit 3-sphere: |H|^2 = (1-r^2)/r^2
        // and tau_2 = 4 (1 - |H|^2) H.
        let im = sphere_chart_immersion(3.0, AmbientManifold::sphere(3, 1.0).unwrap());
        let p = (1.0, 0.5);
        let b = bitension_at(&im, p, 4).unwrap();
        assert_relative_eq!(b.norm, 112.0 / 27.0, max_relative = 1e-7);
        let t = tension_at(&im, p, 4).unwrap();
        let factor = 4.0 * (1.0 - 16.0 / 9.0) / 2.0; // tau_2 = factor * tau
        for a in 0..3 {
            assert_relative_eq!(b.tau2[a], factor * t.tau[a], epsilon = 1e-7);
        }
    }

    #[test]
    fn half_radius_sphere_is_biharmonic_in_s3() {
        // r = 1/sqrt(2) gives |H| = 1 and tau_2 = 0: the proper biharmonic
        // small hypersphere. Chart scale c = r / (1 - sqrt(1 - r^2)) = 1 + sqrt(2).
        let im = sphere_chart_immersion(1.0 + std::f64::consts::SQRT_2,
            AmbientManifold::sphere(3, 1.0).unwrap());
        for p in [(0.8, 0.3), (1.7, 2.9)] {
            let t = tension_at(&im, p, 4).unwrap();
            assert_relative_eq!(t.norm_h2, 1.0, max_relative = 1e-9);
            let b = bitension_at(&im, p, 4).unwrap();
            assert!(b.norm < 1e-8, "|tau_2| = {} at {p:?}", b.norm);
        }
    }

    #[test]
    fn clifford_torus_is_minimal_in_s3() {
        // Product of two circles of radius 1/sqrt(2), stereographic chart.
        let d = "(1 - sin(y)/sqrt(2))";
        let im = Immersion::new(
            AmbientManifold::sphere(3, 1.0).unwrap(),
            parse_coords(&[
                &format!("cos(x)/sqrt(2)/{d}"),
                &format!("sin(x)/sqrt(2)/{d}"),
                &format!("cos(y)/sqrt(2)/{d}"),
            ]),
            Domain::torus((0.0, TAU), (0.0, TAU)),
            MetricMode::Induced,
        )
        .unwrap();
        for p in [(0.4, 1.0), (3.0, 5.2)] {
            let t = tension_at(&im, p, 4).unwrap();
            assert!(t.norm < 1e-9, "|tau| = {} at {p:?}", t.norm);
            let b = bitension_at(&im, p, 4).unwrap();
            assert!(b.norm < 1e-8, "|tau_2| = {} at {p:?}", b.norm);
            let geo = im.geometry_at(p, 4).unwrap();
            assert!(geo.gauss_k.abs() < 1e-9, "flat torus, K = {}", geo.gauss_k);
        }
    }

    #[test]
    fn product_torus_is_proper_biharmonic_in_s4() {
        // S^1(1/2) x S^1(1/2) sitting in the biharmonic small hypersphere
        // of radius 1/sqrt(2) inside the unit 4-sphere: |H| = 1, tau_2 = 0,
        // flat and pseudo-umbilical.
        let d = "(1 - 1/sqrt(2))";
        let im = Immersion::new(
            AmbientManifold::sphere(4, 1.0).unwrap(),
            parse_coords(&[
                &format!("cos(x)/2/{d}"),
                &format!("sin(x)/2/{d}"),
                &format!("cos(y)/2/{d}"),
                &format!("sin(y)/2/{d}"),
            ]),
            Domain::torus((0.0, TAU), (0.0, TAU)),
            MetricMode::Induced,
        )
        .unwrap();
        let p = (1.3, 0.7);
        let t = tension_at(&im, p, 4).unwrap();
        assert_relative_eq!(t.norm_h2, 1.0, max_relative = 1e-9);
        let b = bitension_at(&im, p, 4).unwrap();
        assert!(b.norm < 1e-8, "|tau_2| = {}", b.norm);
        let geo = im.geometry_at(p, 4).unwrap();
        assert!(geo.gauss_k.abs() < 1e-9);
        assert!(geo.shape.pseudo_umbilic_residual < 1e-9);
    }

    #[test]
    fn stress_energy_trace_and_shape_form() {
        // trace S_2 = |tau|^2, and for immersions
        // S_2 = -2 |H|^2 g + 4 <B, H> as bilinear forms.
        let im = Immersion::new(
            AmbientManifold::euclidean(3).unwrap(),
            parse_coords(&["(2 + cos(x))*cos(y)", "(2 + cos(x))*sin(y)", "sin(x)"]),
            Domain::torus((0.0, TAU), (0.0, TAU)),
            MetricMode::Induced,
        )
        .unwrap();
        for p in [(0.5, 1.0), (1.9, 4.4)] {
            let s = s2_at(&im, p, 4).unwrap();
            let t = tension_at(&im, p, 4).unwrap();
            assert_relative_eq!(s.trace, t.norm * t.norm, epsilon = 1e-9);

            let geo = im.geometry_at(p, 4).unwrap();
            // Build -2|H|^2 g + 4 A_H in the same orthonormal frame.
            let want = [
                -2.0 * geo.norm_h2 + 4.0 * geo.shape.a_h[0],
                4.0 * geo.shape.a_h[1],
                -2.0 * geo.norm_h2 + 4.0 * geo.shape.a_h[2],
            ];
            for k in 0..3 {
                assert_relative_eq!(s.s2_frame[k], want[k], epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn conservation_law_pairs_div_s2_with_bitension() {
        // div S_2 = -<tau_2, dphi> for any map; the cylinder is not
        // biharmonic, so both sides are genuinely nonzero.
        let im = Immersion::new(
            AmbientManifold::euclidean(3).unwrap(),
            parse_coords(&["cos(x)", "sin(x)", "y"]),
            Domain::new((0.0, TAU), (-4.0, 4.0), true, false, false).unwrap(),
            MetricMode::Induced,
        )
        .unwrap();
        let d = div_s2_at(&im, (1.2, 0.3), 4).unwrap();
        for b in 0..2 {
            assert_relative_eq!(d.div[b], -d.tau2_pairing[b], epsilon = 1e-9);
        }
    }

    #[test]
    fn normal_derivatives_vanish_for_parallel_mean_curvature() {
        let im = sphere_chart_immersion(1.0, AmbientManifold::euclidean(3).unwrap());
        let r = normal_h_at(&im, (0.9, 2.0), 4).unwrap();
        assert!(r.norm_nabla_perp_h2 < 1e-10);
        assert!(r.norm_laplace < 1e-9);
    }

    #[test]
    fn scalar_calculus_uses_geometer_sign() {
        let im = Immersion::new(
            AmbientManifold::euclidean(3).unwrap(),
            parse_coords(&["x", "y", "0"]),
            Domain::new((-2.0, 2.0), (-2.0, 2.0), false, false, false).unwrap(),
            MetricMode::Induced,
        )
        .unwrap();
        let f = expr::parse("x^2 + y^2").unwrap();
        let r = scalar_calculus_at(&im, (0.3, 0.4), 3, &f).unwrap();
        assert_relative_eq!(r.laplacian, -4.0, epsilon = 1e-12);
        assert_relative_eq!(r.hessian[0], 2.0, epsilon = 1e-12);
        assert_relative_eq!(r.hessian[1], 0.0, epsilon = 1e-12);
        assert_relative_eq!(r.grad_norm2, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn bienergy_totals_for_known_surfaces() {
        // Cylinder of radius 1: |tau|^2 = 1, area 2*pi*16.
        let im = Immersion::new(
            AmbientManifold::euclidean(3).unwrap(),
            parse_coords(&["cos(x)", "sin(x)", "y"]),
            Domain::new((0.0, TAU), (-8.0, 8.0), true, false, false).unwrap(),
            MetricMode::Induced,
        )
        .unwrap();
        let e2 = bienergy_total(&im, 2, 8, 8).unwrap();
        assert_relative_eq!(e2, 16.0 * PI, max_relative = 1e-10);

        // Unit sphere: |tau|^2 = 4, area 4*pi.
        let im = sphere_chart_immersion(1.0, AmbientManifold::euclidean(3).unwrap());
        let e2 = bienergy_total(&im, 2, 24, 12).unwrap();
        assert_relative_eq!(e2, 8.0 * PI, max_relative = 1e-9);
    }

    #[test]
    fn order_gates() {
        let im = sphere_chart_immersion(1.0, AmbientManifold::euclidean(3).unwrap());
        match bitension_at(&im, (1.0, 1.0), 3) {
            Err(GeomError::OrderTooLow { needed: 4, got: 3, .. }) => {}
            other => panic!("unexpected: {other:?}"),
        }
        match rough_laplacian_s2_at(&im, (1.0, 1.0), 4) {
            Err(GeomError::OrderTooLow { needed: 5, .. }) => {}
            other => panic!("unexpected: {other:?}"),
        }
    }
}
