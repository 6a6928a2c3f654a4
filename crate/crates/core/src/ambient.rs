//! Chart-presented Riemannian ambient manifolds.
//!
//! A manifold is a single coordinate chart on (a subset of) R^n together
//! with a symmetric matrix of metric component expressions in the chart
//! variables `u1 .. un`. Built-in constructors cover flat space, round
//! spheres and hyperbolic space in conformal charts, plus arbitrary
//! user-supplied conformal factors.
//!
//! Chart derivatives of the metric are taken symbolically once, at
//! construction. Evaluating those derivative expressions on the jets of a
//! composed map phi(x, y) then yields Christoffel symbols and the curvature
//! tensor as exact jets along the surface; their surface derivatives to the
//! jet order come along for free via the chain rule.
//!
//! Curvature conventions: R(X,Y) = [nabla_X, nabla_Y] - nabla_{[X,Y]} and
//! R(X,Y,Z,W) = <R(X,Y)W, Z>, so the round sphere has positive sectional
//! curvature.

use crate::expr::{self, EvalError, Env, Expr};
use crate::jet::Jet;
use crate::linalg;
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Clone)]
pub enum AmbientError {
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("metric degenerate at {where_}: {why}")]
    MetricDegenerate { where_: String, why: String },
    #[error("point {point:?} lies outside the chart ({why})")]
    ChartViolation { point: Vec<f64>, why: String },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Validity region of the chart.
#[derive(Debug, Clone, PartialEq)]
pub enum ChartRegion {
    All,
    Ball { radius: f64 },
}

#[derive(Debug, Clone)]
pub struct AmbientManifold {
    name: String,
    n: usize,
    region: ChartRegion,
    var_names: Vec<String>,
    /// Distinct expressions appearing among metric components and their
    /// first and second chart derivatives; evaluated once per point.
    pool: Vec<Expr>,
    /// h_{ab} -> pool index, n*n row-major.
    m_idx: Vec<usize>,
    /// d_d h_{ab} -> pool index, [d][a][b].
    dm_idx: Vec<usize>,
    /// d_c d_d h_{ab} -> pool index, [c][d][a][b].
    ddm_idx: Vec<usize>,
}

/// Metric, Christoffel symbols and curvature evaluated along a map, as jets
/// in the surface parameters.
///
/// Index conventions: `gamma[a][b][c]` is Gamma^a_{bc}; `riem[a][b][c][d]`
/// is R^a_{bcd}, the ∂_a component of R(∂_c, ∂_d)∂_b.
#[derive(Debug, Clone)]
pub struct AmbientJets {
    pub n: usize,
    pub order: usize,
    pub h: Vec<Jet>,
    pub hinv: Vec<Jet>,
    pub gamma: Vec<Jet>,
    pub riem: Vec<Jet>,
}

impl AmbientJets {
    #[inline]
    pub fn h(&self, a: usize, b: usize) -> &Jet {
        &self.h[a * self.n + b]
    }

    #[inline]
    pub fn hinv(&self, a: usize, b: usize) -> &Jet {
        &self.hinv[a * self.n + b]
    }

    #[inline]
    pub fn gamma(&self, a: usize, b: usize, c: usize) -> &Jet {
        &self.gamma[(a * self.n + b) * self.n + c]
    }

    /// R^a_{bcd}.
    #[inline]
    pub fn riem_up(&self, a: usize, b: usize, c: usize, d: usize) -> &Jet {
        &self.riem[((a * self.n + b) * self.n + c) * self.n + d]
    }

    /// Inner product of two ambient vectors (component jets).
    pub fn dot(&self, u: &[Jet], v: &[Jet]) -> Jet {
        let mut acc = Jet::constant(0.0, u[0].order(), u[0].base());
        for a in 0..self.n {
            for b in 0..self.n {
                acc = &acc + &(&self.h(a, b).cut(acc.order()) * &(&u[a] * &v[b]));
            }
        }
        acc
    }

    /// Components of R(U, V)W.
    pub fn curvature_apply(&self, u: &[Jet], v: &[Jet], w: &[Jet]) -> Vec<Jet> {
        let order = u[0].order();
        let base = u[0].base();
        let mut out = vec![Jet::constant(0.0, order, base); self.n];
        for a in 0..self.n {
            let mut acc = Jet::constant(0.0, order, base);
            for b in 0..self.n {
                for c in 0..self.n {
                    for d in 0..self.n {
                        let r = self.riem_up(a, b, c, d);
                        if r.max_abs_coeff() == 0.0 {
                            continue;
                        }
                        acc = &acc + &(&r.cut(order) * &(&w[b] * &(&u[c] * &v[d])));
                    }
                }
            }
            out[a] = acc;
        }
        out
    }

    /// The (0,4) curvature R(U, V, W, Z) = <R(U, V)Z, W>.
    pub fn curvature04(&self, u: &[Jet], v: &[Jet], w: &[Jet], z: &[Jet]) -> Jet {
        let rv = self.curvature_apply(u, v, z);
        self.dot(&rv, w)
    }
}

fn ball_violation(region: &ChartRegion, u: &[f64]) -> Option<String> {
    match region {
        ChartRegion::All => None,
        ChartRegion::Ball { radius } => {
            let norm2: f64 = u.iter().map(|x| x * x).sum();
            if norm2 >= radius * radius {
                Some(format!("|u| = {} >= chart radius {radius}", norm2.sqrt()))
            } else {
                None
            }
        }
    }
}

impl AmbientManifold {
    fn var_of(i: usize) -> String {
        format!("u{}", i + 1)
    }

    /// General constructor from a full, structurally symmetric matrix of
    /// metric component expressions in the variables `u1..un`.
    pub fn from_metric(
        name: impl Into<String>,
        n: usize,
        metric: Vec<Vec<Expr>>,
        region: ChartRegion,
    ) -> Result<AmbientManifold, AmbientError> {
        if n < 2 {
            return Err(AmbientError::BadParameter(format!(
                "ambient dimension must be at least 2, got {n}"
            )));
        }
        if metric.len() != n || metric.iter().any(|row| row.len() != n) {
            return Err(AmbientError::BadParameter(format!(
                "metric must be an {n}x{n} matrix of expressions"
            )));
        }
        for a in 0..n {
            for b in (a + 1)..n {
                if metric[a][b] != metric[b][a] {
                    return Err(AmbientError::BadParameter(format!(
                        "metric component ({a},{b}) is not structurally symmetric"
                    )));
                }
            }
        }
        let var_names: Vec<String> = (0..n).map(Self::var_of).collect();

        let mut pool: Vec<Expr> = Vec::new();
        let mut seen: HashMap<String, usize> = HashMap::new();
        let mut intern = |e: Expr| -> usize {
            let key = e.to_string();
            *seen.entry(key).or_insert_with(|| {
                pool.push(e);
                pool.len() - 1
            })
        };

        let mut m_idx = vec![0usize; n * n];
        let mut first: Vec<Expr> = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                let e = expr::simplify(&metric[a][b]);
                m_idx[a * n + b] = intern(e.clone());
                first.push(e);
            }
        }
        let mut dm_idx = vec![0usize; n * n * n];
        let mut dfirst: Vec<Expr> = Vec::with_capacity(n * n * n);
        for d in 0..n {
            for a in 0..n {
                for b in 0..n {
                    let e = expr::diff(&first[a * n + b], &var_names[d]);
                    dm_idx[(d * n + a) * n + b] = intern(e.clone());
                    dfirst.push(e);
                }
            }
        }
        let mut ddm_idx = vec![0usize; n * n * n * n];
        for c in 0..n {
            for d in 0..n {
                for a in 0..n {
                    for b in 0..n {
                        let e = expr::diff(&dfirst[(d * n + a) * n + b], &var_names[c]);
                        ddm_idx[((c * n + d) * n + a) * n + b] = intern(e);
                    }
                }
            }
        }

        Ok(AmbientManifold {
            name: name.into(),
            n,
            region,
            var_names,
            pool,
            m_idx,
            dm_idx,
            ddm_idx,
        })
    }

    /// Conformally flat metric factor * delta_{ab}; `factor` is lambda^2(u).
    pub fn conformal(n: usize, factor: Expr) -> Result<AmbientManifold, AmbientError> {
        Self::conformal_named("conformal", n, factor, ChartRegion::All)
    }

    fn conformal_named(
        name: &str,
        n: usize,
        factor: Expr,
        region: ChartRegion,
    ) -> Result<AmbientManifold, AmbientError> {
        let zero = Expr::num(0.0);
        let metric: Vec<Vec<Expr>> = (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| if a == b { factor.clone() } else { zero.clone() })
                    .collect()
            })
            .collect();
        Self::from_metric(name, n, metric, region)
    }

    /// Flat R^n.
    pub fn euclidean(n: usize) -> Result<AmbientManifold, AmbientError> {
        Self::conformal_named("euclidean", n, Expr::num(1.0), ChartRegion::All)
    }

    fn norm2_expr(n: usize) -> Expr {
        let mut acc = Expr::bin(
            expr::BinOp::Pow,
            Expr::var(Self::var_of(0)),
            Expr::num(2.0),
        );
        for i in 1..n {
            acc = Expr::bin(
                expr::BinOp::Add,
                acc,
                Expr::bin(expr::BinOp::Pow, Expr::var(Self::var_of(i)), Expr::num(2.0)),
            );
        }
        acc
    }

    /// Round sphere of radius r in the stereographic chart: the chart covers
    /// the sphere minus one point and the metric is 4r^4/(r^2+|u|^2)^2 delta.
    pub fn sphere(n: usize, r: f64) -> Result<AmbientManifold, AmbientError> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(AmbientError::BadParameter(format!(
                "sphere radius must be positive, got {r}"
            )));
        }
        let factor = Expr::bin(
            expr::BinOp::Div,
            Expr::num(4.0 * r.powi(4)),
            Expr::bin(
                expr::BinOp::Pow,
                Expr::bin(expr::BinOp::Add, Expr::num(r * r), Self::norm2_expr(n)),
                Expr::num(2.0),
            ),
        );
        Self::conformal_named("sphere", n, factor, ChartRegion::All)
    }

    /// Hyperbolic space of curvature -1/r^2 in the ball chart |u| < r with
    /// metric 4r^4/(r^2-|u|^2)^2 delta.
    pub fn hyperbolic(n: usize, r: f64) -> Result<AmbientManifold, AmbientError> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(AmbientError::BadParameter(format!(
                "hyperbolic radius must be positive, got {r}"
            )));
        }
        let factor = Expr::bin(
            expr::BinOp::Div,
            Expr::num(4.0 * r.powi(4)),
            Expr::bin(
                expr::BinOp::Pow,
                Expr::bin(expr::BinOp::Sub, Expr::num(r * r), Self::norm2_expr(n)),
                Expr::num(2.0),
            ),
        );
        Self::conformal_named("hyperbolic", n, factor, ChartRegion::Ball { radius: r })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn chart_region(&self) -> &ChartRegion {
        &self.region
    }

    /// Metric component expression h_{ab}.
    pub fn metric_expr(&self, a: usize, b: usize) -> &Expr {
        &self.pool[self.m_idx[a * self.n + b]]
    }

    fn eval_pool(&self, phi: &[Jet]) -> Result<Vec<Jet>, AmbientError> {
        let names: Vec<(&str, &Jet)> = self
            .var_names
            .iter()
            .map(|s| s.as_str())
            .zip(phi.iter())
            .collect();
        let env = Env::new(&names)?;
        self.pool
            .iter()
            .map(|e| expr::eval(e, &env).map_err(AmbientError::from))
            .collect()
    }

    fn check_point(&self, phi: &[Jet]) -> Result<(), AmbientError> {
        let u: Vec<f64> = phi.iter().map(|j| j.value()).collect();
        if let Some(why) = ball_violation(&self.region, &u) {
            return Err(AmbientError::ChartViolation { point: u, why });
        }
        Ok(())
    }

    /// Metric components along a map, as jets; validates the chart region
    /// and positive definiteness at the base point.
    pub fn metric_jets(&self, phi: &[Jet]) -> Result<Vec<Jet>, AmbientError> {
        if phi.len() != self.n {
            return Err(AmbientError::BadParameter(format!(
                "expected {} chart components, got {}",
                self.n,
                phi.len()
            )));
        }
        self.check_point(phi)?;
        let pool = self.eval_pool(phi)?;
        let h: Vec<Jet> = self.m_idx.iter().map(|&i| pool[i].clone()).collect();
        let values: Vec<f64> = h.iter().map(|j| j.value()).collect();
        if !linalg::positive_definite(self.n, &values) {
            return Err(AmbientError::MetricDegenerate {
                where_: format!("{:?}", phi.iter().map(|j| j.value()).collect::<Vec<_>>()),
                why: "metric is not positive definite".to_string(),
            });
        }
        Ok(h)
    }

    /// Metric, inverse metric, Christoffel symbols and curvature along a
    /// map, as jets in the surface parameters.
    pub fn geometry_jets(&self, phi: &[Jet]) -> Result<AmbientJets, AmbientError> {
        let n = self.n;
        if phi.len() != n {
            return Err(AmbientError::BadParameter(format!(
                "expected {} chart components, got {}",
                n,
                phi.len()
            )));
        }
        self.check_point(phi)?;
        let order = phi[0].order();
        let base = phi[0].base();
        let pool = self.eval_pool(phi)?;

        let h: Vec<Jet> = self.m_idx.iter().map(|&i| pool[i].clone()).collect();
        let values: Vec<f64> = h.iter().map(|j| j.value()).collect();
        if !linalg::positive_definite(n, &values) {
            return Err(AmbientError::MetricDegenerate {
                where_: format!("{:?}", phi.iter().map(|j| j.value()).collect::<Vec<_>>()),
                why: "metric is not positive definite".to_string(),
            });
        }
        let hinv = linalg::invert_jet_matrix(n, &h).ok_or_else(|| AmbientError::MetricDegenerate {
            where_: format!("{:?}", phi.iter().map(|j| j.value()).collect::<Vec<_>>()),
            why: "metric matrix is numerically singular".to_string(),
        })?;

        let dh = |d: usize, a: usize, b: usize| -> &Jet { &pool[self.dm_idx[(d * n + a) * n + b]] };
        let ddh = |c: usize, d: usize, a: usize, b: usize| -> &Jet {
            &pool[self.ddm_idx[((c * n + d) * n + a) * n + b]]
        };

        let zero = Jet::constant(0.0, order, base);

        // Gamma^a_{bc} = 1/2 h^{ad} (d_b h_{dc} + d_c h_{db} - d_d h_{bc})
        let mut gamma = vec![zero.clone(); n * n * n];
        for a in 0..n {
            for b in 0..n {
                for c in b..n {
                    let mut acc = zero.clone();
                    for d in 0..n {
                        let bracket = &(&(dh(b, d, c) + dh(c, d, b)) - dh(d, b, c));
                        if bracket.max_abs_coeff() == 0.0 {
                            continue;
                        }
                        acc = &acc + &(&hinv[a * n + d] * bracket);
                    }
                    let g = acc.scale(0.5);
                    gamma[(a * n + b) * n + c] = g.clone();
                    gamma[(a * n + c) * n + b] = g;
                }
            }
        }

        // d_m h^{ad} = -h^{ae} (d_m h_{ef}) h^{fd}
        let mut dhinv = vec![zero.clone(); n * n * n]; // [m][a][d]
        for m in 0..n {
            for a in 0..n {
                for d in 0..n {
                    let mut acc = zero.clone();
                    for e in 0..n {
                        for f in 0..n {
                            let dm = dh(m, e, f);
                            if dm.max_abs_coeff() == 0.0 {
                                continue;
                            }
                            acc = &acc + &(&(&hinv[a * n + e] * dm) * &hinv[f * n + d]);
                        }
                    }
                    dhinv[(m * n + a) * n + d] = acc.scale(-1.0);
                }
            }
        }

        // d_m Gamma^a_{bc}
        let mut dgamma = vec![zero.clone(); n * n * n * n]; // [m][a][b][c]
        for m in 0..n {
            for a in 0..n {
                for b in 0..n {
                    for c in b..n {
                        let mut acc = zero.clone();
                        for d in 0..n {
                            let bracket = &(&(dh(b, d, c) + dh(c, d, b)) - dh(d, b, c));
                            if bracket.max_abs_coeff() != 0.0 {
                                acc = &acc + &(&dhinv[(m * n + a) * n + d] * bracket);
                            }
                            let dbracket =
                                &(&(ddh(m, b, d, c) + ddh(m, c, d, b)) - ddh(m, d, b, c));
                            if dbracket.max_abs_coeff() != 0.0 {
                                acc = &acc + &(&hinv[a * n + d] * dbracket);
                            }
                        }
                        let g = acc.scale(0.5);
                        dgamma[((m * n + a) * n + b) * n + c] = g.clone();
                        dgamma[((m * n + a) * n + c) * n + b] = g;
                    }
                }
            }
        }

        // R^a_{b cd} = d_c Gamma^a_{db} - d_d Gamma^a_{cb}
        //             + Gamma^a_{ce} Gamma^e_{db} - Gamma^a_{de} Gamma^e_{cb}
        let mut riem = vec![zero.clone(); n * n * n * n];
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in (c + 1)..n {
                        let mut acc = &dgamma[((c * n + a) * n + d) * n + b]
                            - &dgamma[((d * n + a) * n + c) * n + b];
                        for e in 0..n {
                            let g1 = &gamma[(a * n + c) * n + e];
                            let g2 = &gamma[(e * n + d) * n + b];
                            if g1.max_abs_coeff() != 0.0 && g2.max_abs_coeff() != 0.0 {
                                acc = &acc + &(g1 * g2);
                            }
                            let g3 = &gamma[(a * n + d) * n + e];
                            let g4 = &gamma[(e * n + c) * n + b];
                            if g3.max_abs_coeff() != 0.0 && g4.max_abs_coeff() != 0.0 {
                                acc = &acc - &(g3 * g4);
                            }
                        }
                        riem[((a * n + b) * n + d) * n + c] = acc.scale(-1.0);
                        riem[((a * n + b) * n + c) * n + d] = acc;
                    }
                }
            }
        }

        Ok(AmbientJets { n, order, h, hinv, gamma, riem })
    }

    fn constant_jets(&self, u: &[f64], order: usize) -> Vec<Jet> {
        u.iter().map(|&v| Jet::constant(v, order, (0.0, 0.0))).collect()
    }

    /// Metric component values at a chart point.
    pub fn metric_values(&self, u: &[f64]) -> Result<Vec<f64>, AmbientError> {
        let h = self.metric_jets(&self.constant_jets(u, 0))?;
        Ok(h.into_iter().map(|j| j.value()).collect())
    }

    /// Christoffel symbol values Gamma^a_{bc} at a chart point.
    pub fn christoffel_values(&self, u: &[f64]) -> Result<Vec<f64>, AmbientError> {
        let aj = self.geometry_jets(&self.constant_jets(u, 0))?;
        Ok(aj.gamma.iter().map(|j| j.value()).collect())
    }

    /// Curvature values R^a_{bcd} at a chart point.
    pub fn curvature_values(&self, u: &[f64]) -> Result<Vec<f64>, AmbientError> {
        let aj = self.geometry_jets(&self.constant_jets(u, 0))?;
        Ok(aj.riem.iter().map(|j| j.value()).collect())
    }

    /// Sectional curvature of the plane spanned by x and y at u.
    pub fn sectional(&self, u: &[f64], x: &[f64], y: &[f64]) -> Result<f64, AmbientError> {
        let n = self.n;
        let aj = self.geometry_jets(&self.constant_jets(u, 0))?;
        let dot = |a: &[f64], b: &[f64]| -> f64 {
            let mut s = 0.0;
            for i in 0..n {
                for j in 0..n {
                    s += aj.h[i * n + j].value() * a[i] * b[j];
                }
            }
            s
        };
        let gram = dot(x, x) * dot(y, y) - dot(x, y) * dot(x, y);
        if gram.abs() < 1e-12 {
            return Err(AmbientError::BadParameter(
                "sectional plane is degenerate".to_string(),
            ));
        }
        // R(X,Y,X,Y) = <R(X,Y)Y, X> = h_{ae} R^e_{b c d} Y^b X^c Y^d X^a
        let mut num = 0.0;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let r = aj.riem[((a * n + b) * n + c) * n + d].value();
                        if r == 0.0 {
                            continue;
                        }
                        let mut hax = 0.0;
                        for e in 0..n {
                            hax += aj.h[e * n + a].value() * x[e];
                        }
                        num += hax * r * y[b] * x[c] * y[d];
                    }
                }
            }
        }
        Ok(num / gram)
    }

    /// Ricci curvature Ric(Y, Z) at u.
    pub fn ricci(&self, u: &[f64], yv: &[f64], zv: &[f64]) -> Result<f64, AmbientError> {
        let n = self.n;
        let aj = self.geometry_jets(&self.constant_jets(u, 0))?;
        // Ric(Y, Z) = R^m_{s m n} Z^s Y^n
        let mut acc = 0.0;
        for m in 0..n {
            for s in 0..n {
                for nu in 0..n {
                    let r = aj.riem[((m * n + s) * n + m) * n + nu].value();
                    if r != 0.0 {
                        acc += r * zv[s] * yv[nu];
                    }
                }
            }
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn euclidean_is_flat() {
        let e3 = AmbientManifold::euclidean(3).unwrap();
        let u = [0.7, -0.3, 1.2];
        for g in e3.christoffel_values(&u).unwrap() {
            assert_eq!(g, 0.0);
        }
        for r in e3.curvature_values(&u).unwrap() {
            assert_eq!(r, 0.0);
        }
        let h = e3.metric_values(&u).unwrap();
        assert_eq!(h, vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn sphere_chart_origin_christoffels_vanish() {
        let s2 = AmbientManifold::sphere(2, 1.0).unwrap();
        for g in s2.christoffel_values(&[0.0, 0.0]).unwrap() {
            assert_relative_eq!(g, 0.0, epsilon = 1e-14);
        }
        // metric at origin is 4 delta
        let h = s2.metric_values(&[0.0, 0.0]).unwrap();
        assert_relative_eq!(h[0], 4.0, epsilon = 1e-14);
        assert_relative_eq!(h[3], 4.0, epsilon = 1e-14);
        assert_relative_eq!(h[1], 0.0, epsilon = 1e-14);
    }

    #[test]
    fn sphere_sectional_is_inverse_radius_squared() {
        for (n, r) in [(2usize, 1.0f64), (3, 1.0), (3, 0.5), (4, 1.0), (3, 2.0)] {
            let s = AmbientManifold::sphere(n, r).unwrap();
            // a handful of deterministic points and planes
            let pts: Vec<Vec<f64>> = vec![
                (0..n).map(|i| 0.1 + 0.2 * i as f64).collect(),
                (0..n).map(|i| -0.4 + 0.15 * i as f64).collect(),
                (0..n).map(|i| 0.9 - 0.3 * i as f64).collect(),
            ];
            for u in &pts {
                for (i, j) in [(0usize, 1usize), (0, n - 1)] {
                    let mut x = vec![0.0; n];
                    let mut y = vec![0.0; n];
                    x[i] = 1.0;
                    y[j] = 1.0;
                    // tilt the plane so it is not axis-aligned
                    x[j] += 0.3;
                    let k = s.sectional(u, &x, &y).unwrap();
                    assert_relative_eq!(k, 1.0 / (r * r), epsilon = 1e-9, max_relative = 1e-9);
                }
            }
        }
    }

    #[test]
    fn hyperbolic_sectional_and_chart() {
        let h2 = AmbientManifold::hyperbolic(2, 2.0).unwrap();
        let k = h2.sectional(&[0.3, -0.4], &[1.0, 0.2], &[0.1, 1.0]).unwrap();
        assert_relative_eq!(k, -0.25, epsilon = 1e-9, max_relative = 1e-9);

        match h2.metric_values(&[1.9, 0.8]) {
            Err(AmbientError::ChartViolation { .. }) => {}
            other => panic!("expected chart violation, got {other:?}"),
        }
    }

    #[test]
    fn conformal_exponential_factor_christoffel() {
        // factor e^{2 u1}: Gamma^1_{11} = 1 everywhere
        let f = expr::parse("exp(2 * u1)").unwrap();
        let m = AmbientManifold::conformal(2, f).unwrap();
        let g = m.christoffel_values(&[0.37, -1.2]).unwrap();
        let n = 2;
        assert_relative_eq!(g[(0 * n + 0) * n + 0], 1.0, epsilon = 1e-12);
        // For e^{2 psi} delta: Gamma^a_{bc} = d_c psi delta^a_b + d_b psi delta^a_c
        //                                     - d_a psi delta_{bc}, with psi = u1.
        assert_relative_eq!(g[(1 * n + 0) * n + 1], 1.0, epsilon = 1e-12); // Gamma^2_{12}
        assert_relative_eq!(g[(1 * n + 0) * n + 0], 0.0, epsilon = 1e-12); // Gamma^2_{11}
        assert_relative_eq!(g[(0 * n + 1) * n + 1], -1.0, epsilon = 1e-12); // Gamma^1_{22}
    }

    #[test]
    fn conformal_unit_factor_matches_euclidean_bitwise() {
        let e = AmbientManifold::euclidean(3).unwrap();
        let c = AmbientManifold::conformal(3, Expr::num(1.0)).unwrap();
        let u = [0.21, -0.9, 0.55];
        assert_eq!(e.metric_values(&u).unwrap(), c.metric_values(&u).unwrap());
        assert_eq!(
            e.christoffel_values(&u).unwrap(),
            c.christoffel_values(&u).unwrap()
        );
        assert_eq!(
            e.curvature_values(&u).unwrap(),
            c.curvature_values(&u).unwrap()
        );
    }

    #[test]
    fn sphere_ricci() {
        let r = 1.3;
        let s3 = AmbientManifold::sphere(3, r).unwrap();
        let u = [0.2, 0.5, -0.1];
        let v = [0.4, -1.0, 0.7];
        let h = s3.metric_values(&u).unwrap();
        let mut norm2 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                norm2 += h[i * 3 + j] * v[i] * v[j];
            }
        }
        let ric = s3.ricci(&u, &v, &v).unwrap();
        assert_relative_eq!(ric, 2.0 / (r * r) * norm2, epsilon = 1e-9, max_relative = 1e-9);
    }

    #[test]
    fn space_form_model_tensor() {
        // On the unit sphere, R(X,Y,Z,W) = <X,Z><Y,W> - <X,W><Y,Z>.
        let s4 = AmbientManifold::sphere(4, 1.0).unwrap();
        let u = vec![0.3, -0.2, 0.1, 0.4];
        let phi: Vec<Jet> = u.iter().map(|&v| Jet::constant(v, 0, (0.0, 0.0))).collect();
        let aj = s4.geometry_jets(&phi).unwrap();
        let vecs: Vec<Vec<f64>> = vec![
            vec![1.0, 0.3, -0.2, 0.0],
            vec![0.0, 1.0, 0.5, -0.3],
            vec![0.2, 0.0, 1.0, 0.4],
            vec![-0.1, 0.2, 0.0, 1.0],
        ];
        let jv: Vec<Vec<Jet>> = vecs
            .iter()
            .map(|v| v.iter().map(|&c| Jet::constant(c, 0, (0.0, 0.0))).collect())
            .collect();
        let dot = |a: usize, b: usize| aj.dot(&jv[a], &jv[b]).value();
        for x in 0..4 {
            for y in 0..4 {
                for z in 0..4 {
                    for w in 0..4 {
                        let got = aj.curvature04(&jv[x], &jv[y], &jv[z], &jv[w]).value();
                        let model = dot(x, z) * dot(y, w) - dot(x, w) * dot(y, z);
                        assert_relative_eq!(got, model, epsilon = 1e-9, max_relative = 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn curvature_symmetries_and_bianchi() {
        let f = expr::parse("1 + u1^2 + sin(u2)^2 + 0.3 * u3^2").unwrap();
        let m = AmbientManifold::conformal(3, f).unwrap();
        let u = vec![0.4, 0.7, -0.2];
        let phi: Vec<Jet> = u.iter().map(|&v| Jet::constant(v, 0, (0.0, 0.0))).collect();
        let aj = m.geometry_jets(&phi).unwrap();
        let n = 3;
        let r04 = |a: usize, b: usize, c: usize, d: usize| -> f64 {
            // R(∂a,∂b,∂c,∂d) = <R(∂a,∂b)∂d, ∂c> = h_{ce} R^e_{d a b}
            let mut s = 0.0;
            for e in 0..n {
                s += aj.h[c * n + e].value() * aj.riem[((e * n + d) * n + a) * n + b].value();
            }
            s
        };
        let scale: f64 = (0..n.pow(4))
            .map(|i| {
                let (a, b, c, d) = (i / 27 % 3, i / 9 % 3, i / 3 % 3, i % 3);
                r04(a, b, c, d).abs()
            })
            .fold(0.0, f64::max)
            .max(1.0);
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let r = r04(a, b, c, d);
                        assert_relative_eq!(r, -r04(b, a, c, d), epsilon = 1e-10 * scale);
                        assert_relative_eq!(r, -r04(a, b, d, c), epsilon = 1e-10 * scale);
                        assert_relative_eq!(r, r04(c, d, a, b), epsilon = 1e-10 * scale);
                        // first Bianchi over the last three slots of R(X,Y)Z
                        let bianchi = aj.riem[((a * n + b) * n + c) * n + d].value()
                            + aj.riem[((a * n + c) * n + d) * n + b].value()
                            + aj.riem[((a * n + d) * n + b) * n + c].value();
                        assert_relative_eq!(bianchi, 0.0, epsilon = 1e-10 * scale);
                    }
                }
            }
        }
    }

    #[test]
    fn bad_parameters() {
        assert!(matches!(
            AmbientManifold::euclidean(1),
            Err(AmbientError::BadParameter(_))
        ));
        assert!(matches!(
            AmbientManifold::sphere(3, 0.0),
            Err(AmbientError::BadParameter(_))
        ));
        assert!(matches!(
            AmbientManifold::sphere(3, -1.0),
            Err(AmbientError::BadParameter(_))
        ));
        // structurally asymmetric metric
        let m = vec![
            vec![Expr::num(1.0), Expr::var("u1")],
            vec![Expr::var("u2"), Expr::num(1.0)],
        ];
        assert!(matches!(
            AmbientManifold::from_metric("bad", 2, m, ChartRegion::All),
            Err(AmbientError::BadParameter(_))
        ));
    }

    #[test]
    fn nonpositive_user_factor_is_degenerate() {
        let f = expr::parse("u1").unwrap(); // negative on half the chart
        let m = AmbientManifold::conformal(2, f).unwrap();
        match m.metric_values(&[-0.5, 0.2]) {
            Err(AmbientError::MetricDegenerate { .. }) => {}
            other => panic!("expected degenerate metric, got {other:?}"),
        }
        assert!(m.metric_values(&[0.5, 0.2]).is_ok());
    }
}
