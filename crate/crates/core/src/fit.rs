//! Reconstruction of `alpha(V)` and `f(V)` from two measured isotherms.
//!
//! At a fixed volume the two isotherms give the linear system
//! `T1 = alpha P1 + f`, `T2 = alpha P2 + f`, so
//! `alpha = (T1 - T2)/(P1 - P2)` and `f = T1 - alpha P1`.

use std::io::BufRead;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::eos::{EosSpec, TabulatedEos};
use crate::error::{Error, Result};
use crate::interp::MonotoneCubic;

pub const MIN_SAMPLES: usize = 8;
/// Penalty order used on `alpha` and `f`; fourth differences leave cubics,
/// and so the inflection that fixes the critical point, unbiased.
pub const SMOOTHING_ORDER: usize = 4;

/// One isotherm: `(V, P)` samples at temperature `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsothermDataset {
    pub t: f64,
    pub samples: Vec<(f64, f64)>,
}

impl IsothermDataset {
    pub fn new(t: f64, samples: Vec<(f64, f64)>) -> Result<Self> {
        let d = Self { t, samples };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t.is_finite() && self.t > 0.0) {
            return Err(Error::invalid("T", format!("must be positive, got {}", self.t)));
        }
        if self.samples.len() < MIN_SAMPLES {
            return Err(Error::invalid(
                "samples",
                format!("need at least {MIN_SAMPLES}, got {}", self.samples.len()),
            ));
        }
        if self.samples.iter().any(|(v, p)| !(v.is_finite() && p.is_finite())) {
            return Err(Error::invalid("samples", "non-finite value"));
        }
        if self.samples.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::invalid("samples", "V must be strictly increasing"));
        }
        Ok(())
    }

    pub fn volume_range(&self) -> (f64, f64) {
        (self.samples[0].0, self.samples[self.samples.len() - 1].0)
    }

    /// Read CSV with a `# T=<value>` line, an optional `V,P` header and
    /// `V,P` rows.
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut t = None;
        let mut samples = Vec::new();
        for (no, line) in r.lines().enumerate() {
            let line = line?;
            let s = line.trim();
            if s.is_empty() {
                continue;
            }
            if let Some(rest) = s.strip_prefix('#') {
                if let Some(v) = rest.trim().strip_prefix("T=") {
                    t = Some(
                        v.trim()
                            .parse::<f64>()
                            .map_err(|e| Error::Parse(format!("line {}: bad temperature: {e}", no + 1)))?,
                    );
                }
                continue;
            }
            if s.eq_ignore_ascii_case("v,p") {
                continue;
            }
            let mut it = s.split(',');
            let mut next = |what: &str| -> Result<f64> {
                it.next()
                    .ok_or_else(|| Error::Parse(format!("line {}: missing {what}", no + 1)))?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("line {}: bad {what}: {e}", no + 1)))
            };
            let v = next("V")?;
            let p = next("P")?;
            samples.push((v, p));
        }
        let t = t.ok_or_else(|| Error::Parse("missing '# T=<value>' header line".into()))?;
        Self::new(t, samples)
    }

    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# T={:e}", self.t)?;
        writeln!(w, "V,P")?;
        for (v, p) in &self.samples {
            writeln!(w, "{v:e},{p:e}")?;
        }
        Ok(())
    }
}

/// Options for [`fit_alpha_f_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct FitOptions {
    /// Smooth the reconstructed `alpha` and `f` with a cross-validated
    /// penalised fit. Smoothing the raw isotherms does little: the steep
    /// repulsive wall dominates any curvature penalty.
    pub smooth: bool,
}

/// Fit without smoothing.
pub fn fit_alpha_f(d1: &IsothermDataset, d2: &IsothermDataset) -> Result<EosSpec> {
    fit_alpha_f_with(d1, d2, FitOptions::default())
}

pub fn fit_alpha_f_with(d1: &IsothermDataset, d2: &IsothermDataset, opts: FitOptions) -> Result<EosSpec> {
    d1.validate()?;
    d2.validate()?;
    if d1.t == d2.t {
        return Err(Error::invalid(
            "T",
            "the two isotherms must have different temperatures",
        ));
    }
    let (a_lo, a_hi) = d1.volume_range();
    let (b_lo, b_hi) = d2.volume_range();
    let (lo, hi) = (a_lo.max(b_lo), a_hi.min(b_hi));
    if !(lo < hi) {
        return Err(Error::invalid("samples", "the volume ranges do not overlap"));
    }
    let mut nodes: Vec<f64> = d1
        .samples
        .iter()
        .chain(&d2.samples)
        .map(|s| s.0)
        .filter(|&v| v >= lo && v <= hi)
        .collect();
    nodes.sort_by(f64::total_cmp);
    nodes.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs());
    if nodes.len() < 4 {
        return Err(Error::invalid("samples", "fewer than 4 volumes in the overlap"));
    }
    let c1 = interpolant(d1)?;
    let c2 = interpolant(d2)?;
    let mut alpha = Vec::with_capacity(nodes.len());
    let mut f = Vec::with_capacity(nodes.len());
    for &v in &nodes {
        let p1 = c1.eval(v).0;
        let p2 = c2.eval(v).0;
        let dp = p1 - p2;
        if !(dp.abs() > 1e-12 * p1.abs().max(p2.abs()).max(f64::MIN_POSITIVE)) {
            return Err(Error::SingularSystem { v });
        }
        let a = (d1.t - d2.t) / dp;
        alpha.push(a);
        f.push(0.5 * ((d1.t - a * p1) + (d2.t - a * p2)));
    }
    if opts.smooth {
        let sm = Smoother::new(&nodes, SMOOTHING_ORDER)?;
        alpha = sm.smooth(&alpha)?.values;
        f = sm.smooth(&f)?.values;
    }
    Ok(EosSpec::Tabulated(TabulatedEos::new(nodes, alpha, f)?))
}

fn interpolant(d: &IsothermDataset) -> Result<MonotoneCubic> {
    let (v, p): (Vec<f64>, Vec<f64>) = d.samples.iter().copied().unzip();
    MonotoneCubic::new(v, p)
}

/// Result of a cross-validated smoothing pass.
#[derive(Debug, Clone, PartialEq)]
pub struct Smoothed {
    pub values: Vec<f64>,
    pub lambda: f64,
    pub gcv: f64,
}

/// Penalised least squares `min |y - z|^2 + lambda |D z|^2` where `D`
/// takes divided differences of a fixed order, so polynomials below that
/// degree pass through unchanged. `lambda` is chosen by generalised
/// cross-validation on a logarithmic grid. The eigendecomposition of
/// `D^T D` depends only on the abscissae and is reused across fits.
#[derive(Debug, Clone)]
pub struct Smoother {
    q: DMatrix<f64>,
    mu: Vec<f64>,
}

impl Smoother {
    pub fn new(x: &[f64], order: usize) -> Result<Self> {
        let n = x.len();
        if !(1..=4).contains(&order) {
            return Err(Error::invalid("order", format!("must be 1..=4, got {order}")));
        }
        if n < order + 3 {
            return Err(Error::invalid("samples", "too few points to smooth"));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("samples", "abscissae must be strictly increasing"));
        }
        let fact: f64 = (1..=order).map(|k| k as f64).product();
        let mut d = DMatrix::<f64>::zeros(n - order, n);
        for i in 0..n - order {
            for j in i..=i + order {
                let denom: f64 = (i..=i + order).filter(|&m| m != j).map(|m| x[j] - x[m]).product();
                d[(i, j)] = fact / denom;
            }
        }
        let eig = SymmetricEigen::new(d.transpose() * d);
        let mu = eig.eigenvalues.iter().map(|m| m.max(0.0)).collect();
        Ok(Self {
            q: eig.eigenvectors,
            mu,
        })
    }

    pub fn smooth(&self, y: &[f64]) -> Result<Smoothed> {
        let n = self.mu.len();
        if y.len() != n {
            return Err(Error::invalid(
                "samples",
                format!("expected {n} values, got {}", y.len()),
            ));
        }
        let yv = DVector::from_column_slice(y);
        let qy = self.q.transpose() * &yv;
        // grid relative to the stiffest mode
        let scale = self.mu.iter().copied().fold(0.0, f64::max);
        let mut best: Option<(f64, f64, DVector<f64>)> = None;
        for k in 0..=160 {
            let lambda = 10f64.powf(-8.0 + 0.125 * k as f64) / scale;
            let shrink: Vec<f64> = self.mu.iter().map(|m| 1.0 / (1.0 + lambda * m)).collect();
            let trace: f64 = shrink.iter().sum();
            let zq = DVector::from_iterator(n, qy.iter().zip(&shrink).map(|(a, s)| a * s));
            // residual in the eigenbasis, no back-transform needed
            let rss: f64 = qy.iter().zip(&shrink).map(|(a, s)| (a * (1.0 - s)).powi(2)).sum();
            let denom = (n as f64 - trace).max(1e-300);
            let gcv = n as f64 * rss / (denom * denom);
            if best.as_ref().is_none_or(|b| gcv < b.1) {
                best = Some((lambda, gcv, zq));
            }
        }
        let (lambda, gcv, zq) = best.expect("non-empty lambda grid");
        let z = &self.q * zq;
        Ok(Smoothed {
            values: z.iter().copied().collect(),
            lambda,
            gcv,
        })
    }
}

/// One-shot second-order smoothing.
pub fn smooth_gcv(x: &[f64], y: &[f64]) -> Result<Smoothed> {
    if y.len() != x.len() {
        return Err(Error::invalid("samples", "x and y lengths differ"));
    }
    Smoother::new(x, 2)?.smooth(y)
}

/// `P(V) = (T - f(V)) / alpha(V)` on the nodes of a tabulated fit.
pub fn predict_isotherm(eos: &EosSpec, t: f64) -> Result<Vec<(f64, f64)>> {
    let EosSpec::Tabulated(tab) = eos else {
        return Err(Error::invalid("eos", "prediction works on a tabulated fit"));
    };
    predict_isotherm_at(eos, t, tab.volumes())
}

/// `P(V)` at the given volumes, which must lie in the fitted window.
pub fn predict_isotherm_at(eos: &EosSpec, t: f64, volumes: &[f64]) -> Result<Vec<(f64, f64)>> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::invalid("T", format!("must be positive, got {t}")));
    }
    let (lo, hi) = eos.domain();
    volumes
        .iter()
        .map(|&v| {
            if !eos.contains(v) {
                return Err(Error::Extrapolation { value: v, lo, hi });
            }
            let p = eos.isotherm_pressure(v, t)?;
            Ok((v, p))
        })
        .collect()
}
