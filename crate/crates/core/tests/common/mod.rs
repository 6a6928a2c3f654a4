#![allow(dead_code)]
//! Shared helpers for the integration suites: a Richardson-extrapolated
//! finite-difference oracle, and seeded generators for random expressions
//! and random analytic immersions.

use bitension_core::catalog;
use bitension_core::expr::{self, BinOp, Expr, Func};
use bitension_core::immersion::Immersion;
use bitension_core::jet::Jet;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Evaluate an expression to a plain number at a parameter point.
pub fn eval_f64(e: &Expr, p: (f64, f64)) -> f64 {
    let jx = Jet::var_x(0, p);
    let jy = Jet::var_y(0, p);
    let vars = [("x", &jx), ("y", &jy)];
    let env = expr::Env::new(&vars).expect("two distinct variables");
    expr::eval(e, &env).expect("guarded expression evaluates").value()
}

// ---------------------------------------------------------------------------
// Finite differences with one Richardson step: central differences at h and
// h/2 combined as (4·D(h/2) − D(h))/3, cancelling the leading h² error.
// ---------------------------------------------------------------------------

fn central_d(f: &dyn Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

fn central_d2(f: &dyn Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)
}

fn richardson(coarse: f64, fine: f64) -> f64 {
    (4.0 * fine - coarse) / 3.0
}

pub fn fd_d(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    richardson(central_d(&f, x, h), central_d(&f, x, h / 2.0))
}

pub fn fd_d2(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    richardson(central_d2(&f, x, h), central_d2(&f, x, h / 2.0))
}

fn cross(f: &dyn Fn(f64, f64) -> f64, p: (f64, f64), h: f64) -> f64 {
    (f(p.0 + h, p.1 + h) - f(p.0 + h, p.1 - h) - f(p.0 - h, p.1 + h) + f(p.0 - h, p.1 - h))
        / (4.0 * h * h)
}

pub fn fd_dxy(f: impl Fn(f64, f64) -> f64, p: (f64, f64), h: f64) -> f64 {
    richardson(cross(&f, p, h), cross(&f, p, h / 2.0))
}

// ---------------------------------------------------------------------------
// Random expressions.  The generator tracks a magnitude bound for every
// subtree and damps arguments of exp/tan and denominators with it, so the
// result is smooth and evaluable on the whole plane — no domain errors, no
// runaway growth that would drown a finite-difference stencil in roundoff.
// ---------------------------------------------------------------------------

fn scale_by(s: f64, e: Expr) -> Expr {
    Expr::bin(BinOp::Mul, Expr::num(s), e)
}

/// `2 + e/bound`, guaranteed to lie in [1, 3].
fn shifted_unit(e: Expr, bound: f64) -> Expr {
    Expr::bin(BinOp::Add, Expr::num(2.0), scale_by(1.0 / bound, e))
}

/// Returns a random expression together with an upper bound on its absolute
/// value over the closed unit square |x|, |y| <= 1 (the bound keeps every
/// sqrt/ln argument inside its domain there).
pub fn random_expr(rng: &mut ChaCha8Rng, depth: usize) -> (Expr, f64) {
    if depth == 0 || rng.gen_bool(0.2) {
        return match rng.gen_range(0..3) {
            0 => (Expr::var("x"), 1.0),
            1 => (Expr::var("y"), 1.0),
            _ => (Expr::num(rng.gen_range(-1.0..1.0)), 1.0),
        };
    }
    match rng.gen_range(0..10) {
        0 => {
            let (a, _) = random_expr(rng, depth - 1);
            (Expr::call(Func::Sin, a), 1.0)
        }
        1 => {
            let (a, _) = random_expr(rng, depth - 1);
            (Expr::call(Func::Cos, a), 1.0)
        }
        2 => {
            let (a, b) = random_expr(rng, depth - 1);
            (Expr::call(Func::Exp, scale_by(0.5 / b, a)), f64::exp(0.5))
        }
        3 => {
            let (a, b) = random_expr(rng, depth - 1);
            (Expr::call(Func::Sqrt, shifted_unit(a, b)), 3f64.sqrt())
        }
        4 => {
            let (a, b) = random_expr(rng, depth - 1);
            (Expr::call(Func::Ln, shifted_unit(a, b)), 3f64.ln())
        }
        5 => {
            let (a, b) = random_expr(rng, depth - 1);
            (Expr::call(Func::Tan, scale_by(0.7 / b, a)), 0.7f64.tan() + 0.2)
        }
        6 => {
            let (a, ba) = random_expr(rng, depth - 1);
            let (c, bc) = random_expr(rng, depth - 1);
            (Expr::bin(BinOp::Add, a, c), ba + bc)
        }
        7 => {
            let (a, ba) = random_expr(rng, depth - 1);
            let (c, bc) = random_expr(rng, depth - 1);
            (Expr::bin(BinOp::Sub, a, c), ba + bc)
        }
        8 => {
            let (a, ba) = random_expr(rng, depth - 1);
            let (c, bc) = random_expr(rng, depth - 1);
            (Expr::bin(BinOp::Mul, a, c), ba * bc)
        }
        _ => {
            let (a, ba) = random_expr(rng, depth - 1);
            let (c, bc) = random_expr(rng, depth - 1);
            (Expr::bin(BinOp::Div, a, shifted_unit(c, bc)), ba)
        }
    }
}

// ---------------------------------------------------------------------------
// Random analytic immersions: perturbed spheres from the catalog plus random
// graphs, alternating between Euclidean space and the round 3-sphere chart.
// ---------------------------------------------------------------------------

pub fn random_immersion(seed: u64) -> Immersion {
    use bitension_core::ambient::AmbientManifold;
    use bitension_core::immersion::{Domain, MetricMode};
    use rand::SeedableRng;

    match seed % 4 {
        0 | 1 => catalog::get_example_with("perturbed-random", &[("seed", seed as f64)])
            .expect("valid seed")
            .immersion()
            .expect("catalog surface is well-formed"),
        parity => {
            // Graph of a random bounded function over a square, scaled so
            // the patch stays near the chart origin.
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (p, _) = random_expr(&mut rng, 3);
            let coords = vec![
                scale_by(0.4, Expr::var("x")),
                scale_by(0.4, Expr::var("y")),
                scale_by(0.2, p),
            ];
            let ambient = if parity == 2 {
                AmbientManifold::euclidean(3).expect("static ambient")
            } else {
                AmbientManifold::sphere(3, 1.0).expect("static ambient")
            };
            let domain =
                Domain::new((-1.0, 1.0), (-1.0, 1.0), false, false, false).expect("static ranges");
            Immersion::new(ambient, coords, domain, MetricMode::Induced)
                .expect("graph surfaces are well-formed")
        }
    }
}
