//! Per-mode RPA energies and static correction factors.
//!
//! For a uniform mean field the fluctuation correction factorizes over the
//! Fourier modes `k`, each mode being a single-site problem with couplings
//! `ṽ^μ_k`. Two independent routes are provided:
//!
//! * closed spin-1/2 forms for `ω_k` and `c⁰_k`;
//! * the generic local route: local spectrum, local response matrices
//!   `r(ω)`, the `2 x 2` RPA matrix and the static determinant.
//!
//! In the generic route the pair interaction matrix of a mode is
//! `2 ṽ^μ_k δ_{μν}`, because both ordered pairs `(i, j)` and `(j, i)` enter the
//! chain Hamiltonian.

use nalgebra::{Matrix2, Matrix3, Vector2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::meanfield::{d_tanhc, log_two_cosh_per_beta, MeanFieldSolution};
use crate::model::CouplingProfile;

/// Modes whose `ω_k^2/λ^2` falls below this are flagged critical.
pub const CRITICAL_RADICAND: f64 = 1e-10;

type C64 = Complex64;

fn spin_matrices() -> [Matrix2<C64>; 3] {
    let z = C64::new(0.0, 0.0);
    let h = C64::new(0.5, 0.0);
    let ih = C64::new(0.0, 0.5);
    [Matrix2::new(z, h, h, z), Matrix2::new(z, -ih, ih, z), Matrix2::new(h, z, z, -h)]
}

/// Transition between two local eigenstates `α = (κ, κ')`.
#[derive(Clone, Debug)]
pub struct Transition {
    pub from: usize,
    pub to: usize,
    /// `λ_α = ε_κ - ε_κ'`.
    pub lambda: f64,
    /// `f_α = p_κ - p_κ'`.
    pub f: f64,
    /// `O_{μα} = <κ|s_μ|κ'>`.
    pub o: [C64; 3],
}

/// Spectrum of the local MF Hamiltonian `(b^μ - φ^μ) s_μ`.
#[derive(Clone, Debug)]
pub struct LocalSpectrum {
    /// Ascending energies.
    pub energies: [f64; 2],
    pub probs: [f64; 2],
    /// `<κ|s_μ|κ>` for each level.
    pub diagonal: [[f64; 3]; 2],
    pub transitions: Vec<Transition>,
    pub beta: Option<f64>,
}

impl LocalSpectrum {
    /// Local magnetization `Σ_κ p_κ <κ|s_μ|κ>`.
    pub fn magnetization(&self) -> [f64; 3] {
        [0, 1, 2].map(|m| (0..2).map(|k| self.probs[k] * self.diagonal[k][m]).sum())
    }

    /// Positive transition energy (the MF gap).
    pub fn gap(&self) -> f64 {
        self.energies[1] - self.energies[0]
    }
}

/// Diagonalizes the local MF Hamiltonian built from `phi`, `b` and `beta`.
pub fn local_spectrum_from_fields(phi: [f64; 3], b: f64, beta: Option<f64>) -> LocalSpectrum {
    let s = spin_matrices();
    let field = [-phi[0], -phi[1], b - phi[2]];
    let h = s[0] * C64::from(field[0]) + s[1] * C64::from(field[1]) + s[2] * C64::from(field[2]);
    let eig = h.symmetric_eigen();
    let mut order = [0usize, 1];
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let energies = order.map(|i| eig.eigenvalues[i]);
    let vecs: [Vector2<C64>; 2] = order.map(|i| eig.eigenvectors.column(i).into_owned());
    let probs = match beta {
        None => [1.0, 0.0],
        Some(beta) => {
            let w = (-beta * (energies[1] - energies[0])).exp();
            [1.0 / (1.0 + w), w / (1.0 + w)]
        }
    };
    let elem = |a: usize, m: usize, c: usize| (vecs[a].adjoint() * s[m] * vecs[c])[(0, 0)];
    let diagonal = [0, 1].map(|a| [0, 1, 2].map(|m| elem(a, m, a).re));
    let mut transitions = Vec::new();
    for (from, to) in [(1, 0), (0, 1)] {
        transitions.push(Transition {
            from,
            to,
            lambda: energies[from] - energies[to],
            f: probs[from] - probs[to],
            o: [0, 1, 2].map(|m| elem(from, m, to)),
        });
    }
    LocalSpectrum { energies, probs, diagonal, transitions, beta }
}

pub fn local_spectrum(mf: &MeanFieldSolution) -> LocalSpectrum {
    local_spectrum_from_fields(mf.phi, mf.b, mf.beta)
}

/// Dynamic local response `r_{μν}(ω) = Σ_α O_{μα} O*_{να} f_α/(λ_α + ω)`.
pub fn local_response(spec: &LocalSpectrum, omega: C64) -> Result<Matrix3<C64>> {
    let mut r = Matrix3::zeros();
    for t in &spec.transitions {
        if t.f == 0.0 {
            continue;
        }
        let denom = omega + t.lambda;
        if denom.norm() < 1e-14 * (1.0 + t.lambda.abs()) {
            return Err(Error::PoleHit { omega: omega.re });
        }
        for m in 0..3 {
            for nu in 0..3 {
                r[(m, nu)] += t.o[m] * t.o[nu].conj() * t.f / denom;
            }
        }
    }
    Ok(r)
}

/// Static response `r⁰ = r(0) - Σ_κ <κ|s_μ|κ> ∂p_κ/∂φ^ν = -∂<s_μ>_φ/∂φ^ν`.
pub fn static_response(spec: &LocalSpectrum) -> Result<Matrix3<C64>> {
    let mut r = local_response(spec, C64::new(0.0, 0.0))?;
    if let Some(beta) = spec.beta {
        let m = spec.magnetization();
        for mu in 0..3 {
            for nu in 0..3 {
                let corr: f64 = (0..2).map(|k| spec.probs[k] * spec.diagonal[k][mu] * spec.diagonal[k][nu]).sum();
                r[(mu, nu)] -= C64::from(beta * (corr - m[mu] * m[nu]));
            }
        }
    }
    Ok(r)
}

fn pair_coupling(v: [f64; 3]) -> Matrix3<C64> {
    Matrix3::from_diagonal(&nalgebra::Vector3::new(C64::from(2.0 * v[0]), C64::from(2.0 * v[1]), C64::from(2.0 * v[2])))
}

/// Local RPA matrix `a_{αα'} = λ_α δ_{αα'} + f_α O_{μ,-α} Ṽ^{μν} O_{να'}`.
pub fn rpa_matrix(v: [f64; 3], spec: &LocalSpectrum) -> Matrix2<C64> {
    let t = &spec.transitions;
    Matrix2::from_fn(|a, b| {
        let reverse = &t[1 - a];
        let mut acc = C64::new(0.0, 0.0);
        for m in 0..3 {
            acc += reverse.o[m] * 2.0 * v[m] * t[b].o[m];
        }
        let diag = if a == b { t[a].lambda } else { 0.0 };
        C64::from(diag) + t[a].f * acc
    })
}

/// Eigenvalues `(-ω, +ω)` of the local RPA matrix for couplings `v = ṽ_k`.
pub fn rpa_energies_generic(v: [f64; 3], spec: &LocalSpectrum) -> Result<[f64; 2]> {
    let a = rpa_matrix(v, spec);
    let half_tr = 0.5 * (a[(0, 0)] + a[(1, 1)]);
    let det = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)];
    let disc = half_tr * half_tr - det;
    let scale = spec.gap().max(1e-300).powi(2);
    if disc.im.abs() > 1e-10 * scale || disc.re < -1e-14 * scale {
        return Err(Error::ComplexEigenvalue { k: usize::MAX });
    }
    let root = disc.re.max(0.0).sqrt();
    Ok([half_tr.re - root, half_tr.re + root])
}

/// `Det[1 + Ṽ r(ω)]`; vanishes at the RPA energies.
pub fn rpa_determinant(v: [f64; 3], spec: &LocalSpectrum, omega: f64) -> Result<C64> {
    let r = local_response(spec, C64::from(omega))?;
    Ok((Matrix3::identity() + pair_coupling(v) * r).determinant())
}

/// `Det[1 + Ṽ r⁰]`, the static determinant of a mode.
pub fn static_determinant(v: [f64; 3], spec: &LocalSpectrum) -> Result<f64> {
    let r0 = static_response(spec)?;
    Ok((Matrix3::identity() + pair_coupling(v) * r0).determinant().re)
}

/// Static factor through the generic route, `Det[1 + Ṽ r⁰]^{-1/2} ω/λ`.
pub fn static_correction_generic(v: [f64; 3], spec: &LocalSpectrum, omega: f64) -> Result<f64> {
    let det = static_determinant(v, spec)?;
    if det <= 0.0 {
        return Err(Error::StaticInstability { k: usize::MAX, value: det });
    }
    Ok(omega / spec.gap() / det.sqrt())
}

/// Static factor through `R'⁰ = [r⁰ - r(0)][1 + Ṽ r(0)]^{-1}`, `Det[1 + Ṽ R'⁰]^{-1/2}`.
pub fn static_correction_reduced(v: [f64; 3], spec: &LocalSpectrum) -> Result<f64> {
    let r0 = static_response(spec)?;
    let rw = local_response(spec, C64::new(0.0, 0.0))?;
    let vm = pair_coupling(v);
    let inv =
        (Matrix3::identity() + vm * rw).try_inverse().ok_or(Error::StaticInstability { k: usize::MAX, value: 0.0 })?;
    let reduced = (r0 - rw) * inv;
    let det = (Matrix3::identity() + vm * reduced).determinant().re;
    if det <= 0.0 {
        return Err(Error::StaticInstability { k: usize::MAX, value: det });
    }
    Ok(1.0 / det.sqrt())
}

/// Stability marker of a mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModeFlag {
    Stable,
    /// `ω_k^2 < 1e-10 λ^2`: at or next to an MF critical point.
    CriticalRegion,
    /// Static determinant close to zero.
    NearSingularStatic,
}

/// Displacement of the per-mode inputs used for directional derivatives.
///
/// `f` is not independent: it follows `λ` at fixed `β`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Tangent {
    pub d_lambda: f64,
    pub d_gx2: f64,
    pub d_gz2: f64,
    pub dv: [f64; 3],
}

impl Tangent {
    pub fn coupling(axis: usize) -> Self {
        let mut dv = [0.0; 3];
        dv[axis] = 1.0;
        Self { dv, ..Self::default() }
    }

    /// Change of `(λ, γ_x^2, γ_z^2)` when `u = φ - b` moves by `(du_x, du_z)`.
    pub fn displacement(mf: &MeanFieldSolution, du: [f64; 2]) -> Self {
        let [gx, _, gz] = mf.gamma;
        let d_lambda = gx * du[0] + gz * du[1];
        let d_gx2 = if mf.lambda > 0.0 { 2.0 * gx * (gz * gz * du[0] - gx * gz * du[1]) / mf.lambda } else { 0.0 };
        Self { d_lambda, d_gx2, d_gz2: -d_gx2, dv: [0.0; 3] }
    }

    /// Change per unit field at fixed `φ`.
    pub fn field(mf: &MeanFieldSolution) -> Self {
        Self::displacement(mf, [0.0, -1.0])
    }
}

/// Closed-form per-mode quantities at fixed mean field.
#[derive(Clone, Debug)]
pub struct ModeTerms {
    pub v: [f64; 3],
    pub lambda: f64,
    pub gx2: f64,
    pub gz2: f64,
    pub f: f64,
    pub beta: Option<f64>,
    /// `f/λ`.
    h: f64,
    /// `1 - f ṽ^y_k/λ`.
    pub a: f64,
    /// `1 - f(γ_z^2 ṽ^x_k + γ_x^2 ṽ^z_k)/λ`.
    pub bq: f64,
    pub omega: f64,
    /// Argument of the static square root (1 at `T = 0`).
    pub x_static: f64,
    q_static: f64,
}

fn ln_sinhc(x: f64) -> f64 {
    let x = x.abs();
    if x < 1e-3 {
        let x2 = x * x;
        x2 / 6.0 - x2 * x2 / 180.0
    } else if x > 20.0 {
        x - (2.0 * x).ln() + (-(2.0 * x)).exp().ln_1p()
    } else {
        (x.sinh() / x).ln()
    }
}

/// `x coth x`.
fn x_coth(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 + x * x / 3.0
    } else {
        x / x.tanh()
    }
}

impl ModeTerms {
    pub fn new(mf: &MeanFieldSolution, v: [f64; 3], k: usize) -> Result<Self> {
        let [gx, _, gz] = mf.gamma;
        let (gx2, gz2) = (gx * gx, gz * gz);
        let lambda = mf.lambda;
        if mf.beta.is_none() && !(lambda > 0.0) {
            return Err(Error::DomainError("zero MF gap at T = 0 (free spins at zero field)".into()));
        }
        let f = mf.f;
        let h = mf.f_over_lambda();
        let a = 1.0 - h * v[1];
        let bq = 1.0 - h * (gz2 * v[0] + gx2 * v[2]);
        let radicand = a * bq;
        if radicand < 0.0 || a < 0.0 {
            return Err(Error::RpaInstability { k, radicand });
        }
        let omega = lambda * radicand.sqrt();
        let (x_static, q_static) = match mf.beta {
            None => (1.0, 0.0),
            Some(beta) => {
                let g = 0.5 * beta * (1.0 - f * f);
                let s_par = gz2 * v[2] + gx2 * v[0];
                let q = (s_par - h * v[0] * v[2]) / bq;
                (1.0 - g * q, q)
            }
        };
        if x_static <= 0.0 {
            return Err(Error::StaticInstability { k, value: x_static });
        }
        Ok(Self { v, lambda, gx2, gz2, f, beta: mf.beta, h, a, bq, omega, x_static, q_static })
    }

    pub fn static_factor(&self) -> f64 {
        1.0 / self.x_static.sqrt()
    }

    pub fn flag(&self) -> ModeFlag {
        if self.a * self.bq < CRITICAL_RADICAND {
            ModeFlag::CriticalRegion
        } else if self.x_static < CRITICAL_RADICAND {
            ModeFlag::NearSingularStatic
        } else {
            ModeFlag::Stable
        }
    }

    /// `ln c⁰_k + ln[sinh(βλ/2)/sinh(βω_k/2)]`; at `T = 0` the per-β limit `(λ - ω_k)/2`.
    pub fn log_correction(&self) -> f64 {
        match self.beta {
            None => 0.5 * (self.lambda - self.omega),
            Some(beta) => {
                let boson = -0.5 * (self.a * self.bq).ln() + ln_sinhc(0.5 * beta * self.lambda)
                    - ln_sinhc(0.5 * beta * self.omega);
                -0.5 * self.x_static.ln() + boson
            }
        }
    }

    /// Directional derivative of [`Self::log_correction`] along `t`.
    pub fn directional(&self, t: &Tangent) -> f64 {
        let d_h = d_tanhc(self.beta, self.lambda, self.f) * t.d_lambda;
        let s_perp = self.gz2 * self.v[0] + self.gx2 * self.v[2];
        let ds_perp = t.d_gz2 * self.v[0] + self.gz2 * t.dv[0] + t.d_gx2 * self.v[2] + self.gx2 * t.dv[2];
        let da = -d_h * self.v[1] - self.h * t.dv[1];
        let dbq = -d_h * s_perp - self.h * ds_perp;
        let rel = 0.5 * (da / self.a + dbq / self.bq);
        match self.beta {
            None => {
                let d_omega = self.omega * (t.d_lambda / self.lambda + rel);
                0.5 * (t.d_lambda - d_omega)
            }
            Some(beta) => {
                let q_l = x_coth(0.5 * beta * self.lambda);
                let q_w = x_coth(0.5 * beta * self.omega);
                let lambda_term =
                    if self.lambda > 0.0 && t.d_lambda != 0.0 { (q_l - q_w) * t.d_lambda / self.lambda } else { 0.0 };
                let boson = lambda_term - q_w * rel;

                let df = 0.5 * beta * (1.0 - self.f * self.f) * t.d_lambda;
                let g = 0.5 * beta * (1.0 - self.f * self.f);
                let dg = -beta * self.f * df;
                let ds_par = t.d_gz2 * self.v[2] + self.gz2 * t.dv[2] + t.d_gx2 * self.v[0] + self.gx2 * t.dv[0];
                let dnum = ds_par - d_h * self.v[0] * self.v[2] - self.h * (t.dv[0] * self.v[2] + self.v[0] * t.dv[2]);
                let dq = dnum / self.bq - self.q_static * dbq / self.bq;
                let dx = -(dg * self.q_static + g * dq);
                -0.5 * dx / self.x_static + boson
            }
        }
    }

    /// `∂ω_k/∂ṽ^μ_k` at fixed mean field.
    pub fn d_omega_dv(&self, axis: usize) -> f64 {
        let t = Tangent::coupling(axis);
        let ds_perp = self.gz2 * t.dv[0] + self.gx2 * t.dv[2];
        let da = -self.h * t.dv[1];
        let dbq = -self.h * ds_perp;
        self.omega * 0.5 * (da / self.a + dbq / self.bq)
    }
}

/// Closed-form RPA energy `ω_k = λ sqrt[(1 - fṽ^y_k/λ)(1 - f(γ_z^2ṽ^x_k + γ_x^2ṽ^z_k)/λ)]`.
pub fn rpa_energy_closed(k: usize, mf: &MeanFieldSolution, couplings: &CouplingProfile) -> Result<f64> {
    Ok(ModeTerms::new(mf, couplings.mode(k), k)?.omega)
}

/// Closed-form static factor `c⁰_k`; exactly 1 at `T = 0`.
pub fn static_correction(k: usize, mf: &MeanFieldSolution, couplings: &CouplingProfile) -> Result<f64> {
    Ok(ModeTerms::new(mf, couplings.mode(k), k)?.static_factor())
}

#[derive(Clone, Debug)]
pub struct RpaSpectrum {
    pub omegas: Vec<f64>,
    pub static_factors: Vec<f64>,
    pub flags: Vec<ModeFlag>,
    pub modes: Vec<ModeTerms>,
}

impl RpaSpectrum {
    pub fn is_stable(&self) -> bool {
        self.flags.iter().all(|&f| f == ModeFlag::Stable)
    }

    pub fn lowest(&self) -> f64 {
        self.omegas.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

pub fn rpa_spectrum(mf: &MeanFieldSolution, couplings: &CouplingProfile) -> Result<RpaSpectrum> {
    let n = couplings.n();
    let modes = (0..n).map(|k| ModeTerms::new(mf, couplings.mode(k), k)).collect::<Result<Vec<_>>>()?;
    Ok(RpaSpectrum {
        omegas: modes.iter().map(|m| m.omega).collect(),
        static_factors: modes.iter().map(|m| m.static_factor()).collect(),
        flags: modes.iter().map(|m| m.flag()).collect(),
        modes,
    })
}

/// `ln C(φ)` summed over modes; at `T = 0` the per-β limit `Σ_k (λ - ω_k)/2`.
#[derive(Clone, Debug)]
pub struct LogCorrection {
    pub total: f64,
    pub per_mode: Vec<f64>,
    /// True when values are `β^{-1} ln C` in the `T -> 0` limit.
    pub per_beta: bool,
}

pub fn log_correction(spectrum: &RpaSpectrum) -> LogCorrection {
    let per_mode: Vec<f64> = spectrum.modes.iter().map(ModeTerms::log_correction).collect();
    LogCorrection {
        total: per_mode.iter().sum(),
        per_beta: spectrum.modes.first().is_some_and(|m| m.beta.is_none()),
        per_mode,
    }
}

/// CMF thermodynamics of the whole chain.
#[derive(Clone, Debug)]
pub struct CmfPartition {
    /// `ln Z_CMF`; `None` at `T = 0`.
    pub log_z: Option<f64>,
    /// `-T ln Z_CMF`, or the CMF ground energy at `T = 0`.
    pub free_energy: f64,
    /// MF part of `free_energy`.
    pub mf_free_energy: f64,
}

pub fn partition_cmf(mf: &MeanFieldSolution, spectrum: &RpaSpectrum, n: usize) -> CmfPartition {
    let s = mf.mf_magnetizations();
    let coupling: f64 = (0..3).map(|m| mf.totals[m] * s[m] * s[m]).sum();
    let lc = log_correction(spectrum);
    let nf = n as f64;
    match mf.beta {
        None => {
            let e_mf = nf * (coupling - 0.5 * mf.lambda);
            CmfPartition { log_z: None, free_energy: e_mf - lc.total, mf_free_energy: e_mf }
        }
        Some(beta) => {
            let log_z_mf = nf * (-beta * coupling + beta * log_two_cosh_per_beta(Some(beta), mf.lambda));
            let log_z = log_z_mf + lc.total;
            CmfPartition { log_z: Some(log_z), free_energy: -log_z / beta, mf_free_energy: -log_z_mf / beta }
        }
    }
}

/// CMF ground-state energy `<H(φ)>_φ + ½ Σ_k (ω_k - λ)`.
pub fn ground_energy_cmf(mf: &MeanFieldSolution, spectrum: &RpaSpectrum, n: usize) -> f64 {
    let s = mf.mf_magnetizations();
    let h_mf: f64 = n as f64 * (mf.b * s[2] - (0..3).map(|m| mf.totals[m] * s[m] * s[m]).sum::<f64>());
    h_mf + 0.5 * spectrum.omegas.iter().map(|w| w - mf.lambda).sum::<f64>()
}
