//! Tensor-product Gauss–Legendre rules on the reference cube `[-1, 1]^dim`.

/// Largest number of points per axis supported by [`gauss_rule`].
pub const MAX_POINTS_PER_AXIS: usize = 10;

/// A quadrature rule on `[-1, 1]^dim`.
///
/// Points are stored as 3-tuples; coordinates beyond `dim` are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub dim: usize,
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64; 3], f64)> {
        self.points.iter().zip(self.weights.iter().copied())
    }
}

/// One-dimensional Gauss–Legendre nodes and weights on `[-1, 1]`, ascending.
///
/// Roots of `P_n` are found by Newton iteration from the Chebyshev-like
/// initial guess; weights follow from `2 / ((1 - x^2) P_n'(x)^2)`.
pub fn gauss_legendre_1d(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(
        (1..=MAX_POINTS_PER_AXIS).contains(&n),
        "gauss rule needs 1..={MAX_POINTS_PER_AXIS} points per axis, got {n}"
    );
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Tensor-product Gauss–Legendre rule with `n_per_axis` points per axis.
///
/// Point ordering is lexicographic with the first axis fastest.
pub fn gauss_rule(n_per_axis: usize, dim: usize) -> QuadratureRule {
    assert!((1..=3).contains(&dim), "dimension must be 1, 2 or 3");
    let (x, w) = gauss_legendre_1d(n_per_axis);
    let n = n_per_axis;
    let total = n.pow(dim as u32);
    let mut points = Vec::with_capacity(total);
    let mut weights = Vec::with_capacity(total);
    for flat in 0..total {
        let mut p = [0.0; 3];
        let mut wt = 1.0;
        let mut rem = flat;
        for coord in p.iter_mut().take(dim) {
            let i = rem % n;
            rem /= n;
            *coord = x[i];
            wt *= w[i];
        }
        points.push(p);
        weights.push(wt);
    }
    QuadratureRule {
        dim,
        points,
        weights,
    }
}
