//! Gauss–Legendre rules and Lagrange interpolation weights.

use super::Quadrature;

pub const MAX_GAUSS_ORDER: usize = 16;

/// Nodes and weights of the `order`-point Gauss–Legendre rule on `[−1, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1);
    let mut x = vec![0.0; order];
    let mut w = vec![0.0; order];
    let n = order as f64;
    for i in 0..order.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for j in 0..order {
                let p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j as f64 + 1.0) * z * p1 - j as f64 * p2) / (j as f64 + 1.0);
            }
            dp = n * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[order - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[order - 1 - i] = w[i];
    }
    if order % 2 == 1 {
        x[order / 2] = 0.0;
    }
    (x, w)
}

/// `(σ, w)` pairs on `[0, 1]`; `refine` multiplies the number of
/// subintervals.
pub fn unit_rule(q: &Quadrature, refine: usize) -> Vec<(f64, f64)> {
    let refine = refine.max(1);
    match q {
        Quadrature::Trapezoid => {
            let m = refine as f64;
            (0..=refine)
                .map(|k| {
                    let w = if k == 0 || k == refine { 0.5 / m } else { 1.0 / m };
                    (k as f64 / m, w)
                })
                .collect()
        }
        Quadrature::GaussPanels { order, panels } => {
            let (x, w) = gauss_legendre(*order);
            let m = (panels * refine) as f64;
            let mut out = Vec::with_capacity(order * panels * refine);
            for p in 0..panels * refine {
                let a = p as f64 / m;
                for (xi, wi) in x.iter().zip(&w) {
                    out.push((a + (xi + 1.0) / (2.0 * m), wi / (2.0 * m)));
                }
            }
            out
        }
    }
}

/// Lagrange basis weights at `x` for the nodes `xs`.
pub fn lagrange_weights(xs: &[f64], x: f64) -> Vec<f64> {
    (0..xs.len())
        .map(|i| {
            xs.iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .fold(1.0, |acc, (_, &xj)| acc * (x - xj) / (xs[i] - xj))
        })
        .collect()
}

/// Node indices used to interpolate the source on interval `i`
/// (between nodes `i−1` and `i`).
pub(crate) fn stencil(q: &Quadrature, i: usize, nodes: usize) -> Vec<usize> {
    match q {
        Quadrature::Trapezoid => vec![i - 1, i],
        Quadrature::GaussPanels { .. } => {
            let width = 4.min(nodes);
            let lo = (i as isize - 2).clamp(0, (nodes - width) as isize) as usize;
            (lo..lo + width).collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_integrates_polynomials_exactly() {
        for order in 1..=MAX_GAUSS_ORDER {
            let (x, w) = gauss_legendre(order);
            for deg in 0..2 * order {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-13, "order {order} degree {deg}: {q} vs {exact}");
            }
        }
    }

    #[test]
    fn unit_rules_sum_to_one() {
        for q in [Quadrature::Trapezoid, Quadrature::GaussPanels { order: 5, panels: 3 }] {
            for refine in 1..4 {
                let s: f64 = unit_rule(&q, refine).iter().map(|p| p.1).sum();
                assert!((s - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn lagrange_reproduces_cubics() {
        let xs = [0.0, 0.3, 1.1, 2.0];
        let f = |x: f64| 1.0 - 2.0 * x + 0.5 * x * x * x;
        let w = lagrange_weights(&xs, 0.7);
        let v: f64 = w.iter().zip(&xs).map(|(w, x)| w * f(*x)).sum();
        assert!((v - f(0.7)).abs() < 1e-13);
    }

    #[test]
    fn stencils_stay_in_range() {
        let q = Quadrature::GaussPanels { order: 4, panels: 1 };
        assert_eq!(stencil(&q, 1, 10), vec![0, 1, 2, 3]);
        assert_eq!(stencil(&q, 9, 10), vec![6, 7, 8, 9]);
        assert_eq!(stencil(&q, 5, 10), vec![3, 4, 5, 6]);
        assert_eq!(stencil(&q, 1, 2), vec![0, 1]);
    }
}
