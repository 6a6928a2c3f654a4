//! Per-point jet pipeline for a parametrised surface.
//!
//! `PointFields::build` evaluates one map phi: U subset R^2 -> N at one
//! parameter point, to one jet order K, and exposes every derived field as
//! jets in the surface parameters. Downstream quantities lose one jet order
//! per derivative taken; the order of every stored field is written next to
//! it. Mixing orders is a panic (a bug), never silent truncation; inputs are
//! cut explicitly wherever a lower-order field meets a higher-order one.
//!
//! Index conventions, used consistently below:
//! * greek indices alpha, beta, ... in {0,1} are surface coordinate axes;
//! * latin indices a, b, ... in {0..n} are ambient chart axes;
//! * `sym` packs a symmetric pair: (0,0)->0, (0,1)->1, (1,1)->2;
//! * the Laplacian is the geometer's: Delta f = -trace Hess f.

use crate::ambient::AmbientJets;
use crate::expr::{self, Env, EvalError};
use crate::immersion::{GeomError, Immersion, MetricMode};
use crate::jet::Jet;

#[inline]
pub(crate) fn sym(a: usize, b: usize) -> usize {
    a + b
}

/// Symmetric 2x2 of jets: [s11, s12, s22].
pub(crate) type Sym2 = [Jet; 3];

/// All jet-level data for one map at one point and order.
pub(crate) struct PointFields {
    pub n: usize,
    pub order: usize,
    pub p: (f64, f64),
    pub amb: AmbientJets,     // order K
    pub phi: Vec<Jet>,        // order K
    pub dphi: [Vec<Jet>; 2],  // order K-1
    pub g: Sym2,              // order K-1
    pub ginv: Sym2,           // order K-1
    pub det_g: Jet,           // order K-1
    pub gam: [Jet; 6],        // order K-2, domain Christoffels [gamma][sym(a,b)]
    pub sff: [Vec<Jet>; 3],   // order K-2, (nabla dphi)(d_a, d_b) by sym index
    pub tau: Vec<Jet>,        // order K-2
    pub immersed: bool,       // induced metric mode with verified rank 2
}

impl PointFields {
    pub fn build(im: &Immersion, p: (f64, f64), order: usize) -> Result<PointFields, GeomError> {
        if order < 2 {
            return Err(GeomError::OrderTooLow { op: "point fields", needed: 2, got: order });
        }
        im.domain.check_point(p)?;
        let n = im.ambient.dim();
        let jx = Jet::var_x(order, p);
        let jy = Jet::var_y(order, p);
        let binding = [("x", &jx), ("y", &jy)];
        let env = Env::new(&binding).map_err(GeomError::from)?;
        let phi: Vec<Jet> = im
            .coords
            .iter()
            .map(|e| expr::eval(e, &env))
            .collect::<Result<_, EvalError>>()?;
        let amb = im.ambient.geometry_jets(&phi)?;

        let k1 = order - 1;
        let dphi = [
            phi.iter().map(|j| j.dx()).collect::<Vec<_>>(),
            phi.iter().map(|j| j.dy()).collect::<Vec<_>>(),
        ];

        let (g, immersed) = match &im.metric_mode {
            MetricMode::Induced => {
                let mut g: Vec<Jet> = Vec::with_capacity(3);
                for (al, be) in [(0usize, 0usize), (0, 1), (1, 1)] {
                    let mut acc = Jet::constant(0.0, k1, p);
                    for a in 0..n {
                        for b in 0..n {
                            let hab = amb.h(a, b).cut(k1);
                            if hab.max_abs_coeff() == 0.0 {
                                continue;
                            }
                            acc = &acc + &(&hab * &(&dphi[al][a] * &dphi[be][b]));
                        }
                    }
                    g.push(acc);
                }
                let g: Sym2 = [g[0].clone(), g[1].clone(), g[2].clone()];
                let det = g[0].value() * g[2].value() - g[1].value() * g[1].value();
                let scale = (g[0].value() * g[2].value()).abs().max(1e-300);
                if !(det > 0.0) || det < 1e-13 * scale {
                    return Err(GeomError::ImmersionDegenerate {
                        point: p,
                        why: format!("induced metric has determinant {det}; dphi is not rank 2"),
                    });
                }
                (g, true)
            }
            MetricMode::Prescribed { g11, g12, g22 } => {
                let gj: Vec<Jet> = [g11, g12, g22]
                    .iter()
                    .map(|e| expr::eval(e, &env).map(|j| j.cut(k1)))
                    .collect::<Result<_, EvalError>>()?;
                let g: Sym2 = [gj[0].clone(), gj[1].clone(), gj[2].clone()];
                let det = g[0].value() * g[2].value() - g[1].value() * g[1].value();
                if !(g[0].value() > 0.0) || !(det > 0.0) {
                    return Err(GeomError::ImmersionDegenerate {
                        point: p,
                        why: format!(
                            "prescribed metric is not positive definite (g11 = {}, det = {det})",
                            g[0].value()
                        ),
                    });
                }
                (g, false)
            }
        };

        let det_g = &(&g[0] * &g[2]) - &(&g[1] * &g[1]);
        let det_inv = det_g.recip().expect("determinant value already checked positive");
        let ginv: Sym2 = [
            &g[2] * &det_inv,
            (&g[1] * &det_inv).scale(-1.0),
            &g[0] * &det_inv,
        ];

        // Domain Christoffels from jet derivatives of g (order K-2).
        let k2 = order - 2;
        let dg = |axis: usize, a: usize, b: usize| -> Jet { g[sym(a, b)].d(axis) };
        let mut gam: Vec<Jet> = Vec::with_capacity(6);
        for c in 0..2 {
            for (a, b) in [(0usize, 0usize), (0, 1), (1, 1)] {
                let mut acc = Jet::constant(0.0, k2, p);
                for d in 0..2 {
                    let bracket = &(&dg(a, d, b) + &dg(b, d, a)) - &dg(d, a, b);
                    acc = &acc + &(&ginv[sym(c, d)].cut(k2) * &bracket);
                }
                gam.push(acc.scale(0.5));
            }
        }
        let gam: [Jet; 6] = gam.try_into().unwrap();

        // Second fundamental form of the map:
        // (nabla dphi)(d_a, d_b)^c = d_a d_b phi^c
        //   + Gamma^c_{de}(phi) d_a phi^d d_b phi^e - Gamma^g_{ab} d_g phi^c
        let mut sff: [Vec<Jet>; 3] = [Vec::new(), Vec::new(), Vec::new()];
        for (al, be) in [(0usize, 0usize), (0, 1), (1, 1)] {
            let mut comp = Vec::with_capacity(n);
            for c in 0..n {
                let mut acc = phi[c].d(al).d(be);
                for d in 0..n {
                    for e in 0..n {
                        let gam_n = amb.gamma(c, d, e);
                        if gam_n.max_abs_coeff() == 0.0 {
                            continue;
                        }
                        acc = &acc
                            + &(&gam_n.cut(k2)
                                * &(&dphi[al][d].cut(k2) * &dphi[be][e].cut(k2)));
                    }
                }
                for gm in 0..2 {
                    acc = &acc - &(&gam[gm * 3 + sym(al, be)] * &dphi[gm][c].cut(k2));
                }
                comp.push(acc);
            }
            sff[sym(al, be)] = comp;
        }

        // tau = g^{ab} (nabla dphi)_{ab}
        let mut tau = Vec::with_capacity(n);
        for c in 0..n {
            let t = &(&(&ginv[0].cut(k2) * &sff[0][c])
                + &(&ginv[1].cut(k2) * &sff[1][c]).scale(2.0))
                + &(&ginv[2].cut(k2) * &sff[2][c]);
            tau.push(t);
        }

        Ok(PointFields {
            n,
            order,
            p,
            amb,
            phi,
            dphi,
            g,
            ginv,
            det_g,
            gam,
            sff,
            tau,
            immersed,
        })
    }

    pub fn build_for(
        im: &Immersion,
        p: (f64, f64),
        order: usize,
        op: &'static str,
        needed: usize,
    ) -> Result<PointFields, GeomError> {
        if order < needed {
            return Err(GeomError::OrderTooLow { op, needed, got: order });
        }
        Self::build(im, p, order)
    }

    #[inline]
    pub fn ginv_at(&self, a: usize, b: usize) -> &Jet {
        &self.ginv[sym(a, b)]
    }

    #[inline]
    pub fn gam_at(&self, c: usize, a: usize, b: usize) -> &Jet {
        &self.gam[c * 3 + sym(a, b)]
    }

    fn zero(&self, order: usize) -> Jet {
        Jet::constant(0.0, order, self.p)
    }

    /// Ambient inner product of two sections given as component jets of
    /// equal order (at most K).
    pub fn hdot(&self, a: &[Jet], b: &[Jet]) -> Jet {
        let ord = a[0].order();
        let mut acc = self.zero(ord);
        for i in 0..self.n {
            for j in 0..self.n {
                let h = self.amb.h(i, j);
                if h.max_abs_coeff() == 0.0 {
                    continue;
                }
                acc = &acc + &(&h.cut(ord) * &(&a[i] * &b[j]));
            }
        }
        acc
    }

    /// Pull-back covariant derivative of a section along coordinate axis;
    /// drops one order.
    pub fn pullback_d(&self, w: &[Jet], axis: usize) -> Vec<Jet> {
        let ord = w[0].order() - 1;
        let mut out = Vec::with_capacity(self.n);
        for a in 0..self.n {
            let mut acc = w[a].d(axis);
            for b in 0..self.n {
                for c in 0..self.n {
                    let gam_n = self.amb.gamma(a, b, c);
                    if gam_n.max_abs_coeff() == 0.0 {
                        continue;
                    }
                    acc = &acc
                        + &(&gam_n.cut(ord) * &(&self.dphi[axis][b].cut(ord) * &w[c].cut(ord)));
                }
            }
            out.push(acc);
        }
        out
    }

    /// Tangential projection of a section onto dphi (componentwise jets).
    pub fn tangent_project(&self, v: &[Jet]) -> Vec<Jet> {
        let ord = v[0].order();
        let mut coeff = [self.zero(ord), self.zero(ord)];
        for (al, c) in coeff.iter_mut().enumerate() {
            for be in 0..2 {
                let dphi_b: Vec<Jet> = self.dphi[be].iter().map(|j| j.cut(ord)).collect();
                let inner = self.hdot(v, &dphi_b);
                *c = &*c + &(&self.ginv_at(al, be).cut(ord) * &inner);
            }
        }
        let mut out = vec![self.zero(ord); self.n];
        for a in 0..self.n {
            out[a] = &(&coeff[0] * &self.dphi[0][a].cut(ord))
                + &(&coeff[1] * &self.dphi[1][a].cut(ord));
        }
        out
    }

    pub fn normal_project(&self, v: &[Jet]) -> Vec<Jet> {
        let t = self.tangent_project(v);
        v.iter().zip(t.iter()).map(|(a, b)| a - b).collect()
    }

    // ── Bienergy fields ─────────────────────────────────────────────────

    /// nabla tau along both axes; order K-3.
    pub fn nabla_tau(&self) -> [Vec<Jet>; 2] {
        [self.pullback_d(&self.tau, 0), self.pullback_d(&self.tau, 1)]
    }

    /// Second covariant derivative (nabla^2 tau)_{ab}; order K-4.
    pub fn nabla2_tau(&self) -> [[Vec<Jet>; 2]; 2] {
        let nt = self.nabla_tau();
        let k4 = self.order - 4;
        let mut out: [[Vec<Jet>; 2]; 2] = Default::default();
        for mu in 0..2 {
            for nu in 0..2 {
                let mut comp = self.pullback_d(&nt[nu], mu);
                for (c, item) in comp.iter_mut().enumerate() {
                    for gm in 0..2 {
                        *item = &*item
                            - &(&self.gam_at(gm, mu, nu).cut(k4) * &nt[gm][c].cut(k4));
                    }
                }
                out[mu][nu] = comp;
            }
        }
        out
    }

    /// Bitension field tau_2 = tr (nabla)^2 tau - tr R^N(dphi, tau) dphi;
    /// order K-4.
    pub fn tau2(&self) -> Vec<Jet> {
        let n2 = self.nabla2_tau();
        let k4 = self.order - 4;
        let mut out = vec![self.zero(k4); self.n];
        for mu in 0..2 {
            for nu in 0..2 {
                let gmn = self.ginv_at(mu, nu).cut(k4);
                for a in 0..self.n {
                    out[a] = &out[a] + &(&gmn * &n2[mu][nu][a]);
                }
            }
        }
        // curvature term: g^{ab} R(dphi_a, tau) dphi_b
        let tau_c: Vec<Jet> = self.tau.iter().map(|j| j.cut(k4)).collect();
        for al in 0..2 {
            for be in 0..2 {
                let gab = self.ginv_at(al, be).cut(k4);
                let da: Vec<Jet> = self.dphi[al].iter().map(|j| j.cut(k4)).collect();
                let db: Vec<Jet> = self.dphi[be].iter().map(|j| j.cut(k4)).collect();
                let r = self.amb.curvature_apply(&da, &tau_c, &db);
                for a in 0..self.n {
                    out[a] = &out[a] - &(&gab * &r[a]);
                }
            }
        }
        out
    }

    /// |tau|^2 as a jet field; order K-2.
    pub fn norm_tau2(&self) -> Jet {
        self.hdot(&self.tau, &self.tau)
    }

    /// <dphi, nabla tau> = g^{ab} <dphi_a, nabla_b tau>; order K-3.
    pub fn dphi_dot_nabla_tau(&self) -> Jet {
        let nt = self.nabla_tau();
        let k3 = self.order - 3;
        let mut acc = self.zero(k3);
        for al in 0..2 {
            for be in 0..2 {
                let da: Vec<Jet> = self.dphi[al].iter().map(|j| j.cut(k3)).collect();
                let inner = self.hdot(&da, &nt[be]);
                acc = &acc + &(&self.ginv_at(al, be).cut(k3) * &inner);
            }
        }
        acc
    }

    /// Stress-energy tensor S2 and the symmetric part T, coordinate
    /// components; order K-3.
    pub fn s2_and_t(&self) -> (Sym2, Sym2) {
        let nt = self.nabla_tau();
        let k3 = self.order - 3;
        let mut t: Vec<Jet> = Vec::with_capacity(3);
        for (al, be) in [(0usize, 0usize), (0, 1), (1, 1)] {
            let da: Vec<Jet> = self.dphi[al].iter().map(|j| j.cut(k3)).collect();
            let db: Vec<Jet> = self.dphi[be].iter().map(|j| j.cut(k3)).collect();
            let tt = &self.hdot(&da, &nt[be]) + &self.hdot(&db, &nt[al]);
            t.push(tt);
        }
        let t: Sym2 = [t[0].clone(), t[1].clone(), t[2].clone()];
        let scalar = &self.norm_tau2().cut(k3).scale(0.5) + &self.dphi_dot_nabla_tau();
        let s2: Sym2 = [
            &(&scalar * &self.g[0].cut(k3)) - &t[0],
            &(&scalar * &self.g[1].cut(k3)) - &t[1],
            &(&scalar * &self.g[2].cut(k3)) - &t[2],
        ];
        (s2, t)
    }

    /// Mean curvature section H = tau/2; order K-2.
    pub fn h_field(&self) -> Vec<Jet> {
        self.tau.iter().map(|j| j.scale(0.5)).collect()
    }

    /// |H|^2 as a jet field; order K-2.
    pub fn norm_h2(&self) -> Jet {
        self.norm_tau2().scale(0.25)
    }

    /// Normal connection applied to H: (nabla^perp H)_axis; order K-3.
    pub fn nabla_perp_h(&self) -> [Vec<Jet>; 2] {
        let h = self.h_field();
        [
            self.normal_project(&self.pullback_d(&h, 0)),
            self.normal_project(&self.pullback_d(&h, 1)),
        ]
    }

    /// |nabla^perp H|^2 = g^{ab} <(nabla^perp H)_a, (nabla^perp H)_b>;
    /// order K-3.
    pub fn norm_nabla_perp_h2(&self) -> Jet {
        let np = self.nabla_perp_h();
        let k3 = self.order - 3;
        let mut acc = self.zero(k3);
        for al in 0..2 {
            for be in 0..2 {
                let inner = self.hdot(&np[al], &np[be]);
                acc = &acc + &(&self.ginv_at(al, be).cut(k3) * &inner);
            }
        }
        acc
    }

    /// Normal Laplacian Delta^perp H = -g^{ab}(nabla^perp)^2_{ab} H;
    /// order K-4.
    pub fn laplace_perp_h(&self) -> Vec<Jet> {
        let np = self.nabla_perp_h();
        let k4 = self.order - 4;
        let mut trace = vec![self.zero(k4); self.n];
        for mu in 0..2 {
            for nu in 0..2 {
                // (nabla^perp)^2_{mu nu} H
                //   = P_N(pullback_d(np[nu], mu)) - Gamma^g_{mu nu} np[g]
                let mut second = self.normal_project(&self.pullback_d(&np[nu], mu));
                for (a, item) in second.iter_mut().enumerate() {
                    for gm in 0..2 {
                        *item = &*item
                            - &(&self.gam_at(gm, mu, nu).cut(k4) * &np[gm][a].cut(k4));
                    }
                }
                let gmn = self.ginv_at(mu, nu).cut(k4);
                for a in 0..self.n {
                    trace[a] = &trace[a] + &(&gmn * &second[a]);
                }
            }
        }
        trace.iter().map(|j| j.scale(-1.0)).collect()
    }

    /// Covariant derivative of the second fundamental form,
    /// `(nabla_mu sff)_{ab}` with the pull-back connection on the bundle
    /// part and the domain connection on both slots; order K-3.
    pub fn nabla_sff(&self) -> [[Vec<Jet>; 3]; 2] {
        let k3 = self.order - 3;
        let mut out: [[Vec<Jet>; 3]; 2] = Default::default();
        for mu in 0..2 {
            for (al, be) in [(0usize, 0usize), (0, 1), (1, 1)] {
                let mut comp = self.pullback_d(&self.sff[sym(al, be)], mu);
                for (a, item) in comp.iter_mut().enumerate() {
                    for l in 0..2 {
                        *item = &*item
                            - &(&self.gam_at(l, mu, al).cut(k3)
                                * &self.sff[sym(l, be)][a].cut(k3));
                        *item = &*item
                            - &(&self.gam_at(l, mu, be).cut(k3)
                                * &self.sff[sym(al, l)][a].cut(k3));
                    }
                }
                out[mu][sym(al, be)] = comp;
            }
        }
        out
    }

    /// Area element value `sqrt(det g)` at the base point.
    pub fn sqrt_det_g(&self) -> f64 {
        self.det_g.value().max(0.0).sqrt()
    }

    /// Shape-operator bilinear form <B(d_a, d_b), H> in coordinates;
    /// order K-2. (For immersions sff is already normal, so pairing the
    /// raw sff with the normal section H gives exactly <B, H>.)
    pub fn a_h_coord(&self) -> Sym2 {
        let h = self.h_field();
        [
            self.hdot(&self.sff[0], &h),
            self.hdot(&self.sff[1], &h),
            self.hdot(&self.sff[2], &h),
        ]
    }

    /// |A_H|^2 = A^a_b A^b_a as a jet field; order K-2.
    pub fn norm_a_h2(&self) -> Jet {
        let ah = self.a_h_coord();
        let k2 = self.order - 2;
        let mut acc = self.zero(k2);
        for al in 0..2 {
            for be in 0..2 {
                for gm in 0..2 {
                    for dl in 0..2 {
                        let term = &(&self.ginv_at(al, gm).cut(k2) * &self.ginv_at(be, dl).cut(k2))
                            * &(&ah[sym(gm, be)] * &ah[sym(dl, al)]);
                        acc = &acc + &term;
                    }
                }
            }
        }
        acc
    }

    /// Gaussian curvature of the domain metric by the Brioschi formula;
    /// order K-3.
    pub fn gauss_curvature(&self) -> Jet {
        let k3 = self.order.checked_sub(3).expect("Brioschi needs order >= 3");
        let e = self.g[0].cut(k3);
        let f = self.g[1].cut(k3);
        let gg = self.g[2].cut(k3);
        let ex = self.g[0].dx().cut(k3);
        let ey = self.g[0].dy().cut(k3);
        let gx = self.g[2].dx().cut(k3);
        let gy = self.g[2].dy().cut(k3);
        let fx = self.g[1].dx().cut(k3);
        let fy = self.g[1].dy().cut(k3);
        let eyy = self.g[0].dy().dy().cut(k3);
        let gxx = self.g[2].dx().dx().cut(k3);
        let fxy = self.g[1].dx().dy().cut(k3);

        let det3 = |m: [[&Jet; 3]; 3]| -> Jet {
            let minor = |a: &Jet, b: &Jet, c: &Jet, d: &Jet| -> Jet { &(a * d) - &(b * c) };
            let m0 = minor(m[1][1], m[1][2], m[2][1], m[2][2]);
            let m1 = minor(m[1][0], m[1][2], m[2][0], m[2][2]);
            let m2 = minor(m[1][0], m[1][1], m[2][0], m[2][1]);
            &(&(m[0][0] * &m0) - &(m[0][1] * &m1)) + &(m[0][2] * &m2)
        };

        let a11 = &(&eyy.scale(-0.5) + &fxy) - &gxx.scale(0.5);
        let a12 = ex.scale(0.5);
        let a13 = &fx - &ey.scale(0.5);
        let a21 = &fy - &gx.scale(0.5);
        let a31 = gy.scale(0.5);
        let m1 = det3([
            [&a11, &a12, &a13],
            [&a21, &e, &f],
            [&a31, &f, &gg],
        ]);
        let z = self.zero(k3);
        let b12 = ey.scale(0.5);
        let b13 = gx.scale(0.5);
        let m2 = det3([
            [&z, &b12, &b13],
            [&b12, &e, &f],
            [&b13, &f, &gg],
        ]);
        let det = &(&e * &gg) - &(&f * &f);
        (&m1 - &m2)
            .try_div(&(&det * &det))
            .expect("metric determinant is positive")
    }

    /// Orthonormal frame (Gram-Schmidt anchored at d_x), value level:
    /// X_i = frame[i][alpha] d_alpha.
    pub fn frame_values(&self) -> [[f64; 2]; 2] {
        let g11 = self.g[0].value();
        let g12 = self.g[1].value();
        let g22 = self.g[2].value();
        let det = g11 * g22 - g12 * g12;
        let e1 = [1.0 / g11.sqrt(), 0.0];
        let l = (det / g11).sqrt();
        let e2 = [-g12 / (g11 * l), 1.0 / l];
        [e1, e2]
    }

    /// Project a symmetric coordinate 2-tensor (values) onto the frame.
    pub fn frame_sym2(&self, s: &Sym2) -> [f64; 3] {
        let fr = self.frame_values();
        let comp = |i: usize, j: usize| -> f64 {
            let mut acc = 0.0;
            for a in 0..2 {
                for b in 0..2 {
                    acc += fr[i][a] * fr[j][b] * s[sym(a, b)].value();
                }
            }
            acc
        };
        [comp(0, 0), comp(0, 1), comp(1, 1)]
    }
}

// ─── Intrinsic tensor calculus on the domain ────────────────────────────────
//
// These functions operate on jet fields over the surface parameters using
// the domain metric data of a `PointFields`. They are shared between the
// stress-energy machinery and synthetic tensor-field tests.

/// Covariant derivative of a symmetric 2-tensor: (nabla_mu S)_{ab}; input
/// order m, output order m-1 (requires gam order >= m-1).
pub(crate) fn sym2_cov_deriv(pf: &PointFields, s: &Sym2) -> [Sym2; 2] {
    let m1 = s[0].order() - 1;
    let mut out: Vec<Sym2> = Vec::with_capacity(2);
    for mu in 0..2 {
        let mut comps: Vec<Jet> = Vec::with_capacity(3);
        for (a, b) in [(0usize, 0usize), (0, 1), (1, 1)] {
            let mut acc = s[sym(a, b)].d(mu);
            for l in 0..2 {
                acc = &acc - &(&pf.gam_at(l, mu, a).cut(m1) * &s[sym(l, b)].cut(m1));
                acc = &acc - &(&pf.gam_at(l, mu, b).cut(m1) * &s[sym(a, l)].cut(m1));
            }
            comps.push(acc);
        }
        out.push([comps[0].clone(), comps[1].clone(), comps[2].clone()]);
    }
    [out[0].clone(), out[1].clone()]
}

/// Divergence (div S)_b = g^{ma}(nabla_m S)_{ab}; output order m-1.
pub(crate) fn sym2_divergence(pf: &PointFields, s: &Sym2) -> [Jet; 2] {
    let ds = sym2_cov_deriv(pf, s);
    let m1 = ds[0][0].order();
    let mut out = [
        Jet::constant(0.0, m1, pf.p),
        Jet::constant(0.0, m1, pf.p),
    ];
    for (b, o) in out.iter_mut().enumerate() {
        for mu in 0..2 {
            for a in 0..2 {
                *o = &*o + &(&pf.ginv_at(mu, a).cut(m1) * &ds[mu][sym(a, b)]);
            }
        }
    }
    out
}

/// Rough Laplacian Delta^R S = -g^{mn}(nabla^2 S)_{mn, ..}; output order m-2.
pub(crate) fn sym2_rough_laplacian(pf: &PointFields, s: &Sym2) -> Sym2 {
    let ds = sym2_cov_deriv(pf, s);
    let m2 = s[0].order() - 2;
    let mut trace: Vec<Jet> = vec![
        Jet::constant(0.0, m2, pf.p),
        Jet::constant(0.0, m2, pf.p),
        Jet::constant(0.0, m2, pf.p),
    ];
    for mu in 0..2 {
        for nu in 0..2 {
            // (nabla^2 S)_{mu nu, ab} = d_mu (nabla_nu S)_{ab}
            //    - Gamma^l_{mu nu} (nabla_l S)_{ab}
            //    - Gamma^l_{mu a} (nabla_nu S)_{lb} - Gamma^l_{mu b} (nabla_nu S)_{al}
            let gmn = pf.ginv_at(mu, nu).cut(m2);
            for (a, b) in [(0usize, 0usize), (0, 1), (1, 1)] {
                let mut acc = ds[nu][sym(a, b)].d(mu);
                for l in 0..2 {
                    acc = &acc - &(&pf.gam_at(l, mu, nu).cut(m2) * &ds[l][sym(a, b)].cut(m2));
                    acc = &acc - &(&pf.gam_at(l, mu, a).cut(m2) * &ds[nu][sym(l, b)].cut(m2));
                    acc = &acc - &(&pf.gam_at(l, mu, b).cut(m2) * &ds[nu][sym(a, l)].cut(m2));
                }
                trace[sym(a, b)] = &trace[sym(a, b)] + &(&gmn * &acc);
            }
        }
    }
    [
        trace[0].scale(-1.0),
        trace[1].scale(-1.0),
        trace[2].scale(-1.0),
    ]
}

/// Pointwise norm |S|^2 = g^{ac} g^{bd} S_{ab} S_{cd}.
pub(crate) fn sym2_norm2(pf: &PointFields, s: &Sym2) -> Jet {
    sym2_inner(pf, s, s)
}

/// Pointwise inner product <S, T> = g^{ac} g^{bd} S_{ab} T_{cd}.
pub(crate) fn sym2_inner(pf: &PointFields, s: &Sym2, t: &Sym2) -> Jet {
    let m = s[0].order().min(t[0].order());
    let mut acc = Jet::constant(0.0, m, pf.p);
    for a in 0..2 {
        for b in 0..2 {
            for c in 0..2 {
                for d in 0..2 {
                    let term = &(&pf.ginv_at(a, c).cut(m) * &pf.ginv_at(b, d).cut(m))
                        * &(&s[sym(a, b)].cut(m) * &t[sym(c, d)].cut(m));
                    acc = &acc + &term;
                }
            }
        }
    }
    acc
}

/// Norm of the full covariant derivative:
/// |nabla S|^2 = g^{mn} g^{ac} g^{bd} (nabla_m S)_{ab} (nabla_n S)_{cd}.
pub(crate) fn sym2_nabla_norm2(pf: &PointFields, s: &Sym2) -> Jet {
    let ds = sym2_cov_deriv(pf, s);
    let m = ds[0][0].order();
    let mut acc = Jet::constant(0.0, m, pf.p);
    for mu in 0..2 {
        for nu in 0..2 {
            let gmn = pf.ginv_at(mu, nu).cut(m);
            let inner = sym2_inner(pf, &ds[mu], &ds[nu]);
            acc = &acc + &(&gmn * &inner);
        }
    }
    acc
}

/// Covariant Hessian of a scalar: (Hess f)_{ab} = d_a d_b f - Gamma^c_{ab} d_c f;
/// input order m, output order m-2.
pub(crate) fn scalar_hessian(pf: &PointFields, f: &Jet) -> Sym2 {
    let m2 = f.order() - 2;
    let df = [f.dx(), f.dy()];
    let mut out: Vec<Jet> = Vec::with_capacity(3);
    for (a, b) in [(0usize, 0usize), (0, 1), (1, 1)] {
        let mut acc = df[a].d(b);
        for c in 0..2 {
            acc = &acc - &(&pf.gam_at(c, a, b).cut(m2) * &df[c].cut(m2));
        }
        out.push(acc);
    }
    [out[0].clone(), out[1].clone(), out[2].clone()]
}

/// Geometer's Laplacian of a scalar: Delta f = -g^{ab} (Hess f)_{ab}.
pub(crate) fn scalar_laplacian(pf: &PointFields, f: &Jet) -> Jet {
    let h = scalar_hessian(pf, f);
    let m2 = h[0].order();
    let mut acc = Jet::constant(0.0, m2, pf.p);
    for a in 0..2 {
        for b in 0..2 {
            acc = &acc + &(&pf.ginv_at(a, b).cut(m2) * &h[sym(a, b)]);
        }
    }
    acc.scale(-1.0)
}

/// Squared metric norm of the differential of a scalar:
/// |df|^2 = g^{ab} d_a f d_b f; output order m-1.
pub(crate) fn scalar_grad_norm2(pf: &PointFields, f: &Jet) -> Jet {
    let df = [f.dx(), f.dy()];
    let m1 = df[0].order();
    let mut acc = Jet::constant(0.0, m1, pf.p);
    for a in 0..2 {
        for b in 0..2 {
            acc = &acc + &(&pf.ginv_at(a, b).cut(m1) * &(&df[a] * &df[b]));
        }
    }
    acc
}

/// Divergence of a covector field: div w = g^{ab} (d_a w_b - Gamma^c_{ab} w_c);
/// output order m-1.
pub(crate) fn covector_divergence(pf: &PointFields, w: &[Jet; 2]) -> Jet {
    let m1 = w[0].order() - 1;
    let mut acc = Jet::constant(0.0, m1, pf.p);
    for a in 0..2 {
        for b in 0..2 {
            let mut term = w[b].d(a);
            for c in 0..2 {
                term = &term - &(&pf.gam_at(c, a, b).cut(m1) * &w[c].cut(m1));
            }
            acc = &acc + &(&pf.ginv_at(a, b).cut(m1) * &term);
        }
    }
    acc
}
