//! Parametrised surfaces in an ambient chart and their pointwise geometry.
//!
//! An [`Immersion`] couples an [`AmbientManifold`] with two-variable
//! coordinate expressions `u_a(x, y)`, a rectangular parameter domain, and a
//! metric mode: either the metric induced by the ambient (the usual case) or
//! a prescribed symmetric tensor (for map-level tests on synthetic data).
//! [`Immersion::geometry_at`] packages the first and second fundamental
//! forms, mean curvature, shape operator spectrum and curvature data into a
//! plain-value [`PointGeometry`] report.

use crate::ambient::{AmbientError, AmbientManifold};
use crate::expr::{EvalError, Expr};
use crate::jet::Jet;
use crate::pipeline::{sym, PointFields};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeomError {
    /// The requested operation needs more jet orders than were supplied.
    #[error("{op} needs jet order >= {needed}, got {got}")]
    OrderTooLow {
        op: &'static str,
        needed: usize,
        got: usize,
    },
    /// The differential fails to have rank 2 (or a prescribed metric fails
    /// to be positive definite) at a sample point.
    #[error("degenerate surface metric at ({}, {}): {why}", point.0, point.1)]
    ImmersionDegenerate { point: (f64, f64), why: String },
    /// The operation is only meaningful for the induced-metric mode.
    #[error("{op} requires the induced-metric mode (the map must be an immersion)")]
    NotImmersed { op: &'static str },
    /// A sample point lies outside the parameter domain.
    #[error("parameter point ({}, {}) lies outside the domain", point.0, point.1)]
    OutsideDomain { point: (f64, f64) },
    /// The surface definition itself is malformed.
    #[error("invalid surface definition: {0}")]
    BadSurface(String),
    #[error(transparent)]
    Ambient(#[from] AmbientError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Rectangular parameter domain, with optional periodic identification per
/// axis. `closed` records whether the parametrised surface is compact
/// without boundary — integral identities require it, and it is not implied
/// by periodicity alone (a polar chart of a sphere is periodic in only one
/// axis yet closed).
#[derive(Debug, Clone)]
pub struct Domain {
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub periodic_x: bool,
    pub periodic_y: bool,
    pub closed: bool,
}

impl Domain {
    pub fn new(
        x_range: (f64, f64),
        y_range: (f64, f64),
        periodic_x: bool,
        periodic_y: bool,
        closed: bool,
    ) -> Result<Domain, GeomError> {
        for (lo, hi) in [x_range, y_range] {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(GeomError::BadSurface(format!(
                    "domain range ({lo}, {hi}) must be finite and increasing"
                )));
            }
        }
        Ok(Domain {
            x_range,
            y_range,
            periodic_x,
            periodic_y,
            closed,
        })
    }

    /// Fully periodic domain, compact without boundary.
    pub fn torus(x_range: (f64, f64), y_range: (f64, f64)) -> Domain {
        Domain::new(x_range, y_range, true, true, true).expect("static ranges")
    }

    pub(crate) fn check_point(&self, p: (f64, f64)) -> Result<(), GeomError> {
        let inside = |v: f64, (lo, hi): (f64, f64), periodic: bool| {
            let slack = 1e-9 * (hi - lo);
            periodic || (v >= lo - slack && v <= hi + slack)
        };
        if inside(p.0, self.x_range, self.periodic_x) && inside(p.1, self.y_range, self.periodic_y)
        {
            Ok(())
        } else {
            Err(GeomError::OutsideDomain { point: p })
        }
    }

    pub fn x_span(&self) -> f64 {
        self.x_range.1 - self.x_range.0
    }

    pub fn y_span(&self) -> f64 {
        self.y_range.1 - self.y_range.0
    }
}

/// How the surface metric is obtained.
#[derive(Debug, Clone)]
pub enum MetricMode {
    /// Pull back the ambient metric through the map (requires rank-2
    /// differential).
    Induced,
    /// Use the given symmetric tensor in the surface parameters. Map-level
    /// operations still work; operations that need an honest immersion
    /// reject this mode.
    Prescribed { g11: Expr, g12: Expr, g22: Expr },
}

/// A parametrised surface in an ambient chart.
#[derive(Debug, Clone)]
pub struct Immersion {
    pub ambient: AmbientManifold,
    pub coords: Vec<Expr>,
    pub domain: Domain,
    pub metric_mode: MetricMode,
}

impl Immersion {
    pub fn new(
        ambient: AmbientManifold,
        coords: Vec<Expr>,
        domain: Domain,
        metric_mode: MetricMode,
    ) -> Result<Immersion, GeomError> {
        if coords.len() != ambient.dim() {
            return Err(GeomError::BadSurface(format!(
                "ambient has dimension {} but {} coordinate expressions were given",
                ambient.dim(),
                coords.len()
            )));
        }
        Ok(Immersion {
            ambient,
            coords,
            domain,
            metric_mode,
        })
    }

    pub fn is_induced(&self) -> bool {
        matches!(self.metric_mode, MetricMode::Induced)
    }

    /// Full pointwise geometry report. Needs jet order >= 3 (the intrinsic
    /// curvature uses second derivatives of the metric) and the
    /// induced-metric mode.
    pub fn geometry_at(&self, p: (f64, f64), order: usize) -> Result<PointGeometry, GeomError> {
        let pf = PointFields::build_for(self, p, order, "geometry_at", 3)?;
        if !pf.immersed {
            return Err(GeomError::NotImmersed { op: "geometry_at" });
        }
        Ok(PointGeometry::from_fields(&pf))
    }

    /// Shape operator data only; needs jet order >= 2 and the
    /// induced-metric mode.
    pub fn shape_operator_at(&self, p: (f64, f64), order: usize) -> Result<ShapeOperator, GeomError> {
        let pf = PointFields::build_for(self, p, order, "shape_operator_at", 2)?;
        if !pf.immersed {
            return Err(GeomError::NotImmersed { op: "shape_operator_at" });
        }
        Ok(ShapeOperator::from_fields(&pf))
    }
}

/// Spectrum of the shape operator in the mean curvature direction,
/// `A_H = A_{H}` as a symmetric operator on the tangent plane.
#[derive(Debug, Clone)]
pub struct ShapeOperator {
    /// Components `<A_H X_i, X_j>` in an orthonormal frame: [11, 12, 22].
    pub a_h: [f64; 3],
    /// Eigenvalues, `lambda.0 >= lambda.1`.
    pub lambda: (f64, f64),
    /// Eigenvalue gap `lambda.0 - lambda.1`.
    pub mu: f64,
    /// Frobenius distance from `A_H` to `|H|^2 Id`; zero exactly on
    /// pseudo-umbilical surfaces.
    pub pseudo_umbilic_residual: f64,
    /// Squared length of the mean curvature vector.
    pub norm_h2: f64,
}

impl ShapeOperator {
    pub(crate) fn from_fields(pf: &PointFields) -> ShapeOperator {
        let ah_coord = pf.a_h_coord();
        let a_h = pf.frame_sym2(&ah_coord);
        let tr = a_h[0] + a_h[2];
        let mu = ((a_h[0] - a_h[2]).powi(2) + 4.0 * a_h[1] * a_h[1]).sqrt();
        let lambda = ((tr + mu) / 2.0, (tr - mu) / 2.0);
        let norm_h2 = pf.norm_h2().value();
        let pseudo_umbilic_residual = ((a_h[0] - norm_h2).powi(2)
            + 2.0 * a_h[1] * a_h[1]
            + (a_h[2] - norm_h2).powi(2))
        .sqrt();
        ShapeOperator {
            a_h,
            lambda,
            mu,
            pseudo_umbilic_residual,
            norm_h2,
        }
    }
}

/// Plain-value snapshot of the surface geometry at one parameter point.
#[derive(Debug, Clone)]
pub struct PointGeometry {
    pub p: (f64, f64),
    /// Induced metric components [g11, g12, g22].
    pub g: [f64; 3],
    /// Orthonormal tangent frame, `X_i = frame[i][axis] d_axis`.
    pub frame: [[f64; 2]; 2],
    /// Domain Christoffel symbols `conn[c][sym(a, b)]`.
    pub conn: [f64; 6],
    /// Second fundamental form in the frame, ambient components:
    /// `b[sym(i, j)] = B(X_i, X_j)`, projected onto the normal bundle.
    pub b: [Vec<f64>; 3],
    /// Mean curvature vector `H = (B(X_1, X_1) + B(X_2, X_2)) / 2`.
    pub h_mean: Vec<f64>,
    pub norm_h2: f64,
    pub shape: ShapeOperator,
    /// Intrinsic Gaussian curvature of the induced metric.
    pub gauss_k: f64,
    /// Defect of the curvature identity
    /// `K = sec^N(T) + <B11, B22> - |B12|^2`; a consistency diagnostic.
    pub gauss_gap: f64,
    /// Largest tangential component of the raw second derivative tensor;
    /// vanishes for isometric immersions.
    pub tangency_residual: f64,
}

impl PointGeometry {
    pub(crate) fn from_fields(pf: &PointFields) -> PointGeometry {
        let n = pf.n;
        let g = [pf.g[0].value(), pf.g[1].value(), pf.g[2].value()];
        let frame = pf.frame_values();
        let mut conn = [0.0; 6];
        for (k, c) in conn.iter_mut().enumerate() {
            *c = pf.gam[k].value();
        }

        let h_val = |a: usize, b: usize| pf.amb.h(a, b).value();
        let hdot = |u: &[f64], v: &[f64]| {
            let mut acc = 0.0;
            for a in 0..n {
                for b in 0..n {
                    acc += h_val(a, b) * u[a] * v[b];
                }
            }
            acc
        };
        let dphi_val: [Vec<f64>; 2] = [
            pf.dphi[0].iter().map(|j| j.value()).collect(),
            pf.dphi[1].iter().map(|j| j.value()).collect(),
        ];
        let ginv_val = [
            pf.ginv[0].value(),
            pf.ginv[1].value(),
            pf.ginv[2].value(),
        ];
        let normal_part = |v: &[f64]| -> Vec<f64> {
            let mut coeff = [0.0; 2];
            for (al, c) in coeff.iter_mut().enumerate() {
                for be in 0..2 {
                    *c += ginv_val[sym(al, be)] * hdot(v, &dphi_val[be]);
                }
            }
            (0..n)
                .map(|a| v[a] - coeff[0] * dphi_val[0][a] - coeff[1] * dphi_val[1][a])
                .collect()
        };

        // Frame components of the second fundamental form.
        let sff_val: [Vec<f64>; 3] = [
            pf.sff[0].iter().map(|j| j.value()).collect(),
            pf.sff[1].iter().map(|j| j.value()).collect(),
            pf.sff[2].iter().map(|j| j.value()).collect(),
        ];
        let sff_frame = |i: usize, j: usize| -> Vec<f64> {
            let mut out = vec![0.0; n];
            for al in 0..2 {
                for be in 0..2 {
                    let w = frame[i][al] * frame[j][be];
                    for (a, o) in out.iter_mut().enumerate() {
                        *o += w * sff_val[sym(al, be)][a];
                    }
                }
            }
            out
        };
        let raw = [sff_frame(0, 0), sff_frame(0, 1), sff_frame(1, 1)];
        let b: [Vec<f64>; 3] = [
            normal_part(&raw[0]),
            normal_part(&raw[1]),
            normal_part(&raw[2]),
        ];
        let h_mean: Vec<f64> = (0..n).map(|a| (b[0][a] + b[2][a]) / 2.0).collect();
        let norm_h2 = hdot(&h_mean, &h_mean);

        let b_scale = 1.0
            + b.iter()
                .map(|v| hdot(v, v).abs().sqrt())
                .fold(0.0_f64, f64::max);
        let frame_dphi = |i: usize| -> Vec<f64> {
            (0..n)
                .map(|a| frame[i][0] * dphi_val[0][a] + frame[i][1] * dphi_val[1][a])
                .collect()
        };
        let fd = [frame_dphi(0), frame_dphi(1)];
        let mut tangency_residual = 0.0_f64;
        for r in &raw {
            for f in &fd {
                tangency_residual = tangency_residual.max(hdot(r, f).abs() / b_scale);
            }
        }

        let gauss_k = pf.gauss_curvature().value();
        let zero_jets = |v: &[f64]| -> Vec<Jet> {
            v.iter().map(|&x| Jet::constant(x, 0, pf.p)).collect()
        };
        let (u, v) = (zero_jets(&fd[0]), zero_jets(&fd[1]));
        let sec_n = pf.amb.curvature04(&u, &v, &u, &v).value();
        let gauss_gap =
            (gauss_k - (sec_n + hdot(&b[0], &b[2]) - hdot(&b[1], &b[1]))).abs();

        PointGeometry {
            p: pf.p,
            g,
            frame,
            conn,
            b,
            h_mean,
            norm_h2,
            shape: ShapeOperator::from_fields(pf),
            gauss_k,
            gauss_gap,
            tangency_residual,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr;
    use approx::assert_relative_eq;

    fn parse_coords(strs: &[&str]) -> Vec<Expr> {
        strs.iter().map(|s| expr::parse(s).unwrap()).collect()
    }

    fn polar_sphere_r3() -> Immersion {
        Immersion::new(
            AmbientManifold::euclidean(3).unwrap(),
            parse_coords(&["sin(x)*cos(y)", "sin(x)*sin(y)", "cos(x)"]),
            Domain::new((0.0, std::f64::consts::PI), (0.0, std::f64::consts::TAU), false, true, true)
                .unwrap(),
            MetricMode::Induced,
        )
        .unwrap()
    }

    fn cylinder_r3() -> Immersion {
        Immersion::new(
            AmbientManifold::euclidean(3).unwrap(),
            parse_coords(&["cos(x)", "sin(x)", "y"]),
            Domain::new((0.0, std::f64::consts::TAU), (-8.0, 8.0), true, false, false).unwrap(),
            MetricMode::Induced,
        )
        .unwrap()
    }

    #[test]
    fn unit_sphere_geometry() {
        let im = polar_sphere_r3();
        let geo = im.geometry_at((0.7, 1.1), 4).unwrap();
        assert_relative_eq!(geo.gauss_k, 1.0, max_relative = 1e-9);
        assert_relative_eq!(geo.norm_h2, 1.0, max_relative = 1e-9);
        // Umbilical: A_H = |H|^2 Id, eigenvalue gap zero.
        assert!(geo.shape.mu < 1e-9, "mu = {}", geo.shape.mu);
        assert!(geo.shape.pseudo_umbilic_residual < 1e-9);
        assert!(geo.gauss_gap < 1e-9, "gap = {}", geo.gauss_gap);
        assert!(geo.tangency_residual < 1e-10);
        // Frame is orthonormal for the induced metric.
        for (i, j, want) in [(0, 0, 1.0), (0, 1, 0.0), (1, 1, 1.0)] {
            let mut dot = 0.0;
            for a in 0..2 {
                for b in 0..2 {
                    dot += geo.frame[i][a] * geo.frame[j][b] * geo.g[sym(a, b)];
                }
            }
            assert_relative_eq!(dot, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn cylinder_geometry() {
        let im = cylinder_r3();
        let geo = im.geometry_at((1.2, 0.4), 4).unwrap();
        assert_relative_eq!(geo.gauss_k, 0.0, epsilon = 1e-10);
        assert_relative_eq!(geo.norm_h2, 0.25, max_relative = 1e-10);
        assert_relative_eq!(geo.shape.lambda.0, 0.5, max_relative = 1e-10);
        assert!(geo.shape.lambda.1.abs() < 1e-10);
        assert_relative_eq!(geo.shape.mu, 0.5, max_relative = 1e-10);
        // Distance from A_H = diag(1/2, 0) to (1/4) Id is sqrt(2)/4.
        assert_relative_eq!(
            geo.shape.pseudo_umbilic_residual,
            std::f64::consts::SQRT_2 / 4.0,
            max_relative = 1e-10
        );
        assert!(geo.gauss_gap < 1e-10);
    }

    #[test]
    fn torus_of_revolution_curvature() {
        let im = Immersion::new(
            AmbientManifold::euclidean(3).unwrap(),
            parse_coords(&[
                "(2 + cos(x))*cos(y)",
                "(2 + cos(x))*sin(y)",
                "sin(x)",
            ]),
            Domain::torus((0.0, std::f64::consts::TAU), (0.0, std::f64::consts::TAU)),
            MetricMode::Induced,
        )
        .unwrap();
        // K = cos(x) / (2 + cos(x)) for this torus.
        for x in [0.0, 0.9, 2.4] {
            let geo = im.geometry_at((x, 0.3), 4).unwrap();
            assert_relative_eq!(
                geo.gauss_k,
                x.cos() / (2.0 + x.cos()),
                epsilon = 1e-9
            );
            assert!(geo.gauss_gap < 1e-9);
        }
    }

    #[test]
    fn small_sphere_in_s3() {
        // Round sphere of Euclidean radius r inside the unit 3-sphere,
        // via the conformal chart: u = c * (unit sphere in R^3),
        // c = r / (1 - sqrt(1 - r^2)).
        let r: f64 = 0.6;
        let c = r / (1.0 - (1.0 - r * r).sqrt());
        assert_relative_eq!(c, 3.0);
        let im = Immersion::new(
            AmbientManifold::sphere(3, 1.0).unwrap(),
            parse_coords(&[
                "3*sin(x)*cos(y)",
                "3*sin(x)*sin(y)",
                "3*cos(x)",
            ]),
            Domain::new((0.0, std::f64::consts::PI), (0.0, std::f64::consts::TAU), false, true, true)
                .unwrap(),
            MetricMode::Induced,
        )
        .unwrap();
        let geo = im.geometry_at((1.0, 0.5), 4).unwrap();
        // |H|^2 = (1 - r^2)/r^2 = 16/9 and K = 1/r^2 = 25/9.
        assert_relative_eq!(geo.norm_h2, 16.0 / 9.0, max_relative = 1e-9);
        assert_relative_eq!(geo.gauss_k, 25.0 / 9.0, max_relative = 1e-8);
        assert!(geo.shape.pseudo_umbilic_residual < 1e-8);
        assert!(geo.gauss_gap < 1e-8, "gap = {}", geo.gauss_gap);
    }

    #[test]
    fn degenerate_map_is_rejected() {
        let im = Immersion::new(
            AmbientManifold::euclidean(3).unwrap(),
            parse_coords(&["y", "0", "0"]),
            Domain::new((-1.0, 1.0), (-1.0, 1.0), false, false, false).unwrap(),
            MetricMode::Induced,
        )
        .unwrap();
        let err = im.geometry_at((0.1, 0.2), 3).unwrap_err();
        assert!(matches!(err, GeomError::ImmersionDegenerate { .. }), "{err}");
    }

    #[test]
    fn order_and_domain_checks() {
        let im = cylinder_r3();
        match im.geometry_at((1.0, 0.0), 2) {
            Err(GeomError::OrderTooLow { needed: 3, got: 2, .. }) => {}
            other => panic!("unexpected: {other:?}"),
        }
        match im.geometry_at((1.0, 9.5), 3) {
            Err(GeomError::OutsideDomain { .. }) => {}
            other => panic!("unexpected: {other:?}"),
        }
        // Periodic axis accepts any value.
        assert!(im.geometry_at((100.0, 0.0), 3).is_ok());
    }

    #[test]
    fn prescribed_mode_rejects_immersion_only_ops() {
        let im = Immersion::new(
            AmbientManifold::euclidean(3).unwrap(),
            parse_coords(&["x", "y", "0"]),
            Domain::torus((0.0, 1.0), (0.0, 1.0)),
            MetricMode::Prescribed {
                g11: expr::parse("1").unwrap(),
                g12: expr::parse("0").unwrap(),
                g22: expr::parse("1").unwrap(),
            },
        )
        .unwrap();
        match im.geometry_at((0.5, 0.5), 3) {
            Err(GeomError::NotImmersed { .. }) => {}
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn coordinate_count_must_match_ambient() {
        let err = Immersion::new(
            AmbientManifold::euclidean(3).unwrap(),
            parse_coords(&["x", "y"]),
            Domain::torus((0.0, 1.0), (0.0, 1.0)),
            MetricMode::Induced,
        )
        .unwrap_err();
        assert!(matches!(err, GeomError::BadSurface(_)));
    }
}
