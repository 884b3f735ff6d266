//! Closed-form strong-field, thermal and near-factorization estimates.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{fourier_couplings, Axis, CouplingProfile};

/// Inputs of the second-order strong-field concurrence.
#[derive(Clone, Debug)]
pub struct StrongFieldInputs {
    /// `v_±(j) = (v^x(j) ± v^y(j))/2`, length `n` with `v_±(0) = 0`.
    pub v_plus: Vec<f64>,
    pub v_minus: Vec<f64>,
    /// `λ = b + f ṽ^z_0`.
    pub lambda: f64,
    pub b: f64,
}

impl StrongFieldInputs {
    /// Uses `f = tanh(λ/2T)` solved self-consistently for `T > 0`, `f = 1` at `T = 0`.
    pub fn new(couplings: &CouplingProfile, b: f64, temperature: f64) -> Self {
        let x = couplings.real_table(Axis::X);
        let y = couplings.real_table(Axis::Y);
        let vz = couplings.total()[2];
        let mut lambda = b.abs() + vz;
        if temperature > 0.0 {
            for _ in 0..200 {
                lambda = b.abs() + vz * (0.5 * lambda / temperature).tanh();
            }
        }
        Self {
            v_plus: x.iter().zip(y).map(|(a, c)| 0.5 * (a + c)).collect(),
            v_minus: x.iter().zip(y).map(|(a, c)| 0.5 * (a - c)).collect(),
            lambda,
            b,
        }
    }

    pub fn n(&self) -> usize {
        self.v_plus.len()
    }
}

/// `C^+_j ≈ |v_-(j)/λ + Σ_i v_+(j-i) v_-(i)/λ^2| - Σ_i v_-(i)^2/(2λ^2)`, indices mod `n`.
pub fn strong_field_concurrence(j: usize, inputs: &StrongFieldInputs) -> f64 {
    let n = inputs.n();
    let (vp, vm, l) = (&inputs.v_plus, &inputs.v_minus, inputs.lambda);
    let j = j % n;
    let conv: f64 = (1..n).map(|i| vp[(j + n - i) % n] * vm[i]).sum();
    let square: f64 = vm.iter().map(|v| v * v).sum();
    (vm[j] / l + conv / (l * l)).abs() - square / (2.0 * l * l)
}

/// `C^+_j(T) ≈ C^+_j(0) - 2 e^{-λ/T}`; returns `(raw, max(raw, 0))`.
pub fn thermal_corrected_concurrence(c0: f64, lambda: f64, temperature: f64) -> (f64, f64) {
    let raw = if temperature > 0.0 { c0 - 2.0 * (-lambda / temperature).exp() } else { c0 };
    (raw, raw.max(0.0))
}

/// `T^+_j ≈ λ / ln(2/C^+_j(0))`.
pub fn limit_temperature_estimate(c0: f64, lambda: f64) -> Result<f64> {
    if !(c0 > 0.0 && c0 < 2.0) {
        return Err(Error::DomainError(format!("zero-temperature concurrence {c0} outside (0, 2)")));
    }
    Ok(lambda / (2.0 / c0).ln())
}

/// Slope coefficient `γ_j` of the concurrence at the factorizing field.
#[derive(Clone, Debug)]
pub struct FactorizationSlope {
    pub j: usize,
    /// `(1/n) Σ_k e^{i2πkj/n} r_k/(1 - χ r_k)`.
    pub gamma: f64,
    /// `Σ_{m<=M} χ^m r^{m+1}(j)`.
    pub series: f64,
    pub order: usize,
    /// Bound on the truncated tail, `ρ(ρ|χ|)^{M+1}/(1 - ρ|χ|)`, `ρ = max_k |r_k|`.
    pub tail_bound: f64,
    pub chi: f64,
}

/// Cyclic convolution `(a * c)(j) = Σ_i a(j-i) c(i)`.
fn cyclic_convolution(a: &[f64], c: &[f64]) -> Vec<f64> {
    let n = a.len();
    (0..n).map(|j| (0..n).map(|i| a[(j + n - i) % n] * c[i]).sum()).collect()
}

/// `γ_j` by the mode sum and by the convolution series truncated at order `m_max`.
///
/// `profile` is the length-`n` range profile `r(j)` with `r(0) = 0`.
pub fn factorization_slope(j: usize, profile: &[f64], chi: f64, m_max: usize) -> Result<FactorizationSlope> {
    let n = profile.len();
    if n < 2 {
        return Err(Error::InvalidChain(format!("profile length {n}")));
    }
    if m_max < 1 {
        return Err(Error::DomainError("series order must be >= 1".into()));
    }
    let rk = fourier_couplings(&profile[1..])?;
    let rho = rk.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if chi.abs() * rho >= 1.0 {
        return Err(Error::SeriesDivergence(chi.abs() * rho));
    }
    let j = j % n;
    let gamma = rk
        .iter()
        .enumerate()
        .map(|(k, r)| (2.0 * PI * ((k * j) % n) as f64 / n as f64).cos() * r / (1.0 - chi * r))
        .sum::<f64>()
        / n as f64;
    let mut power = profile.to_vec();
    let mut series = 0.0;
    let mut chi_m = 1.0;
    for m in 0..=m_max {
        if m > 0 {
            power = cyclic_convolution(&power, profile);
            chi_m *= chi;
        }
        series += chi_m * power[j];
    }
    let q = rho * chi.abs();
    Ok(FactorizationSlope {
        j,
        gamma,
        series,
        order: m_max,
        tail_bound: rho * q.powi(m_max as i32 + 1) / (1.0 - q),
        chi,
    })
}

/// `C^±_j ≈ ±γ_j (b_s/b_c)(b - b_s)/v^x`: parallel above `b_s`, antiparallel below.
pub fn near_factorization_concurrence(b: f64, bs: f64, bc: f64, vx: f64, gamma: f64) -> (f64, f64) {
    let c = gamma * (bs / bc) * (b - bs) / vx;
    (c, -c)
}
