//! Quadrature rules over the rectangular parameter domain.
//!
//! Periodic axes use the trapezoid rule on equispaced nodes with the right
//! endpoint omitted — spectrally accurate for smooth periodic integrands.
//! Non-periodic axes use Gauss–Legendre nodes, which are interior to the
//! interval, so chart-boundary points (polar axes and the like) are never
//! evaluated. Pointwise sampling grids use cell midpoints for the same
//! reason.

use crate::immersion::Domain;
use rayon::prelude::*;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, by Newton iteration on
/// the three-term recurrence.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1, "empty quadrature rule");
    let mut rule = vec![(0.0, 0.0); n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi's initial guess for the i-th root.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Evaluate P_n and P_{n-1} by recurrence.
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule[i] = (-x, w);
        rule[n - 1 - i] = (x, w);
    }
    rule
}

/// Nodes and weights for one axis of the domain.
pub fn axis_rule(lo: f64, hi: f64, n: usize, periodic: bool) -> Vec<(f64, f64)> {
    assert!(n >= 1, "empty quadrature rule");
    let span = hi - lo;
    if periodic {
        let h = span / n as f64;
        (0..n).map(|i| (lo + i as f64 * h, h)).collect()
    } else {
        gauss_legendre(n)
            .into_iter()
            .map(|(x, w)| (lo + 0.5 * span * (x + 1.0), 0.5 * span * w))
            .collect()
    }
}

/// Tensor-product integration of `f` over the domain. Rows are evaluated in
/// parallel; the reduction order is fixed by index, so the result is
/// bit-identical regardless of thread count.
pub fn integrate2<E, F>(domain: &Domain, nx: usize, ny: usize, f: F) -> Result<f64, E>
where
    E: Send,
    F: Fn((f64, f64)) -> Result<f64, E> + Sync,
{
    let xs = axis_rule(domain.x_range.0, domain.x_range.1, nx, domain.periodic_x);
    let ys = axis_rule(domain.y_range.0, domain.y_range.1, ny, domain.periodic_y);
    let rows: Result<Vec<f64>, E> = xs
        .par_iter()
        .map(|&(x, wx)| {
            let mut acc = 0.0;
            for &(y, wy) in &ys {
                acc += wx * wy * f((x, y))?;
            }
            Ok(acc)
        })
        .collect();
    Ok(rows?.iter().sum())
}

/// Simultaneous integration of several scalar fields over the domain, with
/// the same node set and deterministic reduction as [`integrate2`].
pub fn integrate_components<E, F, const NC: usize>(
    domain: &Domain,
    nx: usize,
    ny: usize,
    f: F,
) -> Result<[f64; NC], E>
where
    E: Send,
    F: Fn((f64, f64)) -> Result<[f64; NC], E> + Sync,
{
    let xs = axis_rule(domain.x_range.0, domain.x_range.1, nx, domain.periodic_x);
    let ys = axis_rule(domain.y_range.0, domain.y_range.1, ny, domain.periodic_y);
    let rows: Result<Vec<[f64; NC]>, E> = xs
        .par_iter()
        .map(|&(x, wx)| {
            let mut acc = [0.0; NC];
            for &(y, wy) in &ys {
                let v = f((x, y))?;
                for (a, vi) in acc.iter_mut().zip(v.iter()) {
                    *a += wx * wy * vi;
                }
            }
            Ok(acc)
        })
        .collect();
    let mut total = [0.0; NC];
    for row in rows? {
        for (t, r) in total.iter_mut().zip(row.iter()) {
            *t += r;
        }
    }
    Ok(total)
}

/// Deterministic pointwise sampling grid: cell midpoints of an `nx` by `ny`
/// subdivision. Midpoints stay clear of chart seams and poles on every axis.
pub fn sample_points(domain: &Domain, nx: usize, ny: usize) -> Vec<(f64, f64)> {
    assert!(nx >= 1 && ny >= 1, "empty sampling grid");
    let hx = domain.x_span() / nx as f64;
    let hy = domain.y_span() / ny as f64;
    let mut pts = Vec::with_capacity(nx * ny);
    for i in 0..nx {
        for j in 0..ny {
            pts.push((
                domain.x_range.0 + (i as f64 + 0.5) * hx,
                domain.y_range.0 + (j as f64 + 0.5) * hy,
            ));
        }
    }
    pts
}

/// Map `f` over the sampling grid in parallel, preserving grid order.
pub fn sample_map<E, T, F>(
    domain: &Domain,
    nx: usize,
    ny: usize,
    f: F,
) -> Result<Vec<((f64, f64), T)>, E>
where
    E: Send,
    T: Send,
    F: Fn((f64, f64)) -> Result<T, E> + Sync,
{
    sample_points(domain, nx, ny)
        .into_par_iter()
        .map(|p| Ok((p, f(p)?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_legendre_is_exact_on_polynomials() {
        // An n-point rule integrates degree 2n-1 exactly.
        for n in [1usize, 2, 5, 12] {
            let rule = gauss_legendre(n);
            assert_relative_eq!(rule.iter().map(|(_, w)| w).sum::<f64>(), 2.0, epsilon = 1e-13);
            let deg = 2 * n - 1;
            let integral: f64 = rule.iter().map(|&(x, w)| w * x.powi(deg as i32)).sum();
            assert!(integral.abs() < 1e-13, "odd power must vanish, got {integral}");
            let even = deg - 1;
            let integral: f64 = rule.iter().map(|&(x, w)| w * x.powi(even as i32)).sum();
            assert_relative_eq!(integral, 2.0 / (even as f64 + 1.0), epsilon = 1e-12);
        }
    }

    #[test]
    fn smooth_integrals_over_mixed_domains() {
        let dom = Domain::new((0.0, std::f64::consts::PI), (0.0, std::f64::consts::TAU), false, true, true)
            .unwrap();
        // Area form of the unit sphere in polar coordinates.
        let area: f64 = integrate2(&dom, 24, 16, |(x, _)| Ok::<_, ()>(x.sin())).unwrap();
        assert_relative_eq!(area, 4.0 * std::f64::consts::PI, epsilon = 1e-10);

        let torus = Domain::torus((0.0, std::f64::consts::TAU), (0.0, std::f64::consts::TAU));
        let v: f64 = integrate2(&torus, 8, 8, |(x, y)| Ok::<_, ()>(x.sin().powi(2) * y.cos().powi(2)))
            .unwrap();
        assert_relative_eq!(v, std::f64::consts::PI * std::f64::consts::PI, epsilon = 1e-12);
    }

    #[test]
    fn integration_short_circuits_errors() {
        let dom = Domain::torus((0.0, 1.0), (0.0, 1.0));
        let r: Result<f64, &str> = integrate2(&dom, 4, 4, |(x, _)| {
            if x > 0.5 {
                Err("boom")
            } else {
                Ok(1.0)
            }
        });
        assert_eq!(r.unwrap_err(), "boom");
    }

    #[test]
    fn midpoint_samples_stay_interior() {
        let dom = Domain::new((0.0, 1.0), (2.0, 4.0), false, false, false).unwrap();
        let pts = sample_points(&dom, 3, 2);
        assert_eq!(pts.len(), 6);
        for (x, y) in pts {
            assert!(x > 0.0 && x < 1.0 && y > 2.0 && y < 4.0);
        }
        assert_eq!(sample_points(&dom, 3, 2)[0], (1.0 / 6.0, 2.5));
    }
}
