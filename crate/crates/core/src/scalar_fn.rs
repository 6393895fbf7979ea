//! Closed-form scalar functions of one variable with derivatives to third order.

use serde::{Deserialize, Serialize};

/// A smooth scalar function `g(x)` carrying its own derivatives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScalarFn {
    Constant {
        value: f64,
    },
    /// `sum_k coeffs[k] x^k`
    Polynomial {
        coeffs: Vec<f64>,
    },
    /// `sum_i coef_i x^{power_i}` for integer powers (negative allowed).
    PowerSum {
        terms: Vec<(i32, f64)>,
    },
    /// `coef * ln(x - shift)`
    LogShift {
        coef: f64,
        shift: f64,
    },
    Sum {
        parts: Vec<ScalarFn>,
    },
    /// `y_scale * inner(x * x_scale)`
    Scaled {
        inner: Box<ScalarFn>,
        x_scale: f64,
        y_scale: f64,
    },
}

impl ScalarFn {
    pub fn constant(value: f64) -> Self {
        ScalarFn::Constant { value }
    }

    pub fn zero() -> Self {
        ScalarFn::Constant { value: 0.0 }
    }

    /// Value and derivatives `[g, g', g'', g''']`.
    pub fn eval(&self, x: f64) -> [f64; 4] {
        match self {
            ScalarFn::Constant { value } => [*value, 0.0, 0.0, 0.0],
            ScalarFn::Polynomial { coeffs } => {
                // Horner for value and derivatives simultaneously
                let mut d = [0.0; 4];
                for &c in coeffs.iter().rev() {
                    d[3] = d[3] * x + 3.0 * d[2];
                    d[2] = d[2] * x + 2.0 * d[1];
                    d[1] = d[1] * x + d[0];
                    d[0] = d[0] * x + c;
                }
                d
            }
            ScalarFn::PowerSum { terms } => {
                let mut d = [0.0; 4];
                for &(p, c) in terms {
                    let pf = p as f64;
                    d[0] += c * x.powi(p);
                    d[1] += c * pf * x.powi(p - 1);
                    d[2] += c * pf * (pf - 1.0) * x.powi(p - 2);
                    d[3] += c * pf * (pf - 1.0) * (pf - 2.0) * x.powi(p - 3);
                }
                d
            }
            ScalarFn::LogShift { coef, shift } => {
                let y = x - shift;
                [coef * y.ln(), coef / y, -coef / (y * y), 2.0 * coef / (y * y * y)]
            }
            ScalarFn::Sum { parts } => parts.iter().fold([0.0; 4], |mut acc, p| {
                let v = p.eval(x);
                for k in 0..4 {
                    acc[k] += v[k];
                }
                acc
            }),
            ScalarFn::Scaled {
                inner,
                x_scale,
                y_scale,
            } => {
                let v = inner.eval(x * x_scale);
                let mut k = *y_scale;
                let mut out = [0.0; 4];
                for (o, d) in out.iter_mut().zip(v) {
                    *o = k * d;
                    k *= x_scale;
                }
                out
            }
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.eval(x)[0]
    }

    pub fn derivative(&self, x: f64) -> f64 {
        self.eval(x)[1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_check(g: &ScalarFn, x: f64) {
        let h = 1e-4;
        let e = g.eval(x);
        for k in 0..3 {
            let fp = g.eval(x + h)[k];
            let fm = g.eval(x - h)[k];
            let num = (fp - fm) / (2.0 * h);
            assert!(
                (num - e[k + 1]).abs() <= 1e-6 * (1.0 + e[k + 1].abs()),
                "order {}: {num} vs {}",
                k + 1,
                e[k + 1]
            );
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let fns = [
            ScalarFn::Polynomial {
                coeffs: vec![1.0, -2.0, 0.5, 3.0, -0.25],
            },
            ScalarFn::PowerSum {
                terms: vec![(-1, 1.125), (-2, -0.375), (2, 0.1)],
            },
            ScalarFn::LogShift {
                coef: 8.0 / 3.0,
                shift: 1.0 / 3.0,
            },
            ScalarFn::Sum {
                parts: vec![ScalarFn::constant(2.0), ScalarFn::LogShift { coef: 1.0, shift: 0.0 }],
            },
            ScalarFn::Scaled {
                inner: Box::new(ScalarFn::PowerSum {
                    terms: vec![(-1, 2.0), (3, 0.5)],
                }),
                x_scale: 1.7,
                y_scale: -0.3,
            },
        ];
        for g in &fns {
            for x in [0.7, 1.0, 2.3] {
                fd_check(g, x);
            }
        }
    }

    #[test]
    fn serde_tagging() {
        let g = ScalarFn::LogShift { coef: 2.0, shift: 0.5 };
        let s = serde_json::to_string(&g).unwrap();
        assert_eq!(s, r#"{"kind":"log_shift","coef":2.0,"shift":0.5}"#);
        let back: ScalarFn = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
    }
}
