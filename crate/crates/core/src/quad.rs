//! Gauss–Legendre quadrature, fixed and adaptive.

const NODES: [f64; 5] = [
    0.148_874_338_981_631_2,
    0.433_395_394_129_247_2,
    0.679_409_568_299_024_4,
    0.865_063_366_688_984_5,
    0.973_906_528_517_171_7,
];
const WEIGHTS: [f64; 5] = [
    0.295_524_224_714_752_9,
    0.269_266_719_309_996_4,
    0.219_086_362_515_982_0,
    0.149_451_349_150_580_6,
    0.066_671_344_308_688_1,
];

/// Ten-point Gauss–Legendre rule on [a, b].
pub fn gauss10(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let mut s = 0.0;
    for (x, w) in NODES.iter().zip(WEIGHTS.iter()) {
        s += w * (f(c - r * x) + f(c + r * x));
    }
    s * r
}

/// Recursive bisection until the ten-point rule agrees with its two halves.
pub fn adaptive(f: &impl Fn(f64) -> f64, a: f64, b: f64, rel: f64, abs: f64) -> f64 {
    fn go(f: &impl Fn(f64) -> f64, a: f64, b: f64, whole: f64, rel: f64, abs: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let left = gauss10(f, a, m);
        let right = gauss10(f, m, b);
        let both = left + right;
        if depth >= 30 || (both - whole).abs() <= abs.max(rel * both.abs()) {
            return both;
        }
        go(f, a, m, left, rel, abs / 2.0, depth + 1) + go(f, m, b, right, rel, abs / 2.0, depth + 1)
    }
    if a == b {
        return 0.0;
    }
    go(f, a, b, gauss10(f, a, b), rel, abs, 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let f = |x: f64| x.powi(19) - 3.0 * x.powi(4);
        let exact = 1.0 / 20.0 - 3.0 / 5.0;
        assert!((gauss10(&f, 0.0, 1.0) - exact).abs() < 1e-15);
    }

    #[test]
    fn adaptive_peaked() {
        let eps = 1e-3;
        let f = |x: f64| eps / (x * x + eps * eps);
        let exact = 2.0 * (1.0 / eps).atan();
        let got = adaptive(&f, -1.0, 1.0, 1e-13, 1e-300);
        assert!((got - exact).abs() < 1e-11 * exact);
    }
}
