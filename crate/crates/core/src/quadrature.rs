//! Adaptive Gauss–Kronrod (7/15) quadrature by interval halving.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadratureError {
    #[error("integrand is not finite at {at}")]
    NonFinite { at: f64 },
    #[error("panel [{a}, {b}] did not reach tolerance after {depth} halvings")]
    MaxDepth { a: f64, b: f64, depth: u32 },
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_41,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct Quadrature {
    /// Absolute error target for an accepted panel.
    pub panel_tolerance: f64,
    pub max_depth: u32,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature {
            panel_tolerance: 1e-9,
            max_depth: 60,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    /// Sum of the per-panel Kronrod-minus-Gauss differences.
    pub error: f64,
    pub panels: usize,
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<(f64, f64), QuadratureError> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let eval = |x: f64| {
        let v = f(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(QuadratureError::NonFinite { at: x })
        }
    };
    let fc = eval(center)?;
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for (k, (&x, &wk)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let s = eval(center - dx)? + eval(center + dx)?;
        kronrod += wk * s;
        if k % 2 == 1 {
            gauss += WG[k / 2] * s;
        }
    }
    Ok((kronrod * half, ((kronrod - gauss) * half).abs()))
}

impl Quadrature {
    pub fn integrate<F: Fn(f64) -> f64>(
        &self,
        f: F,
        a: f64,
        b: f64,
    ) -> Result<Estimate, QuadratureError> {
        let mut est = Estimate {
            value: 0.0,
            error: 0.0,
            panels: 0,
        };
        // Depth-first, left to right, so the summation order is fixed.
        let mut stack = vec![(a, b, 0u32)];
        while let Some((lo, hi, depth)) = stack.pop() {
            let (v, e) = gk15(&f, lo, hi)?;
            if e <= self.panel_tolerance {
                est.value += v;
                est.error += e;
                est.panels += 1;
            } else if depth >= self.max_depth {
                return Err(QuadratureError::MaxDepth {
                    a: lo,
                    b: hi,
                    depth,
                });
            } else {
                let mid = 0.5 * (lo + hi);
                stack.push((mid, hi, depth + 1));
                stack.push((lo, mid, depth + 1));
            }
        }
        Ok(est)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let q = Quadrature::default();
        let e = q.integrate(|x| x.powi(5) - 3.0 * x * x, -1.0, 2.0).unwrap();
        // [x^6/6 - x^3] from -1 to 2
        assert!((e.value - ((64.0 / 6.0 - 8.0) - (1.0 / 6.0 + 1.0))).abs() < 1e-13);
        assert_eq!(e.panels, 1);
    }

    #[test]
    fn reversed_bounds_negate() {
        let q = Quadrature::default();
        let f = |x: f64| (3.0 * x).sin() * x.exp();
        let fwd = q.integrate(f, -1.0, 4.0).unwrap();
        let rev = q.integrate(f, 4.0, -1.0).unwrap();
        assert!((fwd.value + rev.value).abs() < 1e-12);
        assert!(rev.error >= 0.0);
        assert_eq!(fwd.panels, rev.panels);
    }

    #[test]
    fn reciprocal_log() {
        let e = Quadrature::default()
            .integrate(|w| 1.0 / w, 1.0, 1e4)
            .unwrap();
        assert!((e.value - 1e4f64.ln()).abs() < 1e-8);
        assert!(e.panels > 1);
    }

    #[test]
    fn non_finite_reported() {
        let r = Quadrature::default().integrate(|x| 1.0 / x, 0.0, 1.0);
        assert!(r.is_err());
    }
}
