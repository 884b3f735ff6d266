//! Uniform mean-field solution of the chain.
//!
//! For a uniform static field `φ` every site sees the local Hamiltonian
//! `(b^μ - φ^μ) s_μ` with `b^μ = (0, 0, b)`, and self-consistency reads
//! `φ^μ = ṽ^μ_0 γ_μ f` with `γ_μ = (φ^μ - b^μ)/λ`, `λ = |φ - b|` and
//! `f = tanh(βλ/2)`. Two branches exist in the attractive anisotropic regime:
//! the normal one (`φ^x = 0`) and the degenerate parity-breaking pair
//! (`φ^x = ±|φ^x|`).

use crate::error::{Error, Result};
use crate::model::{ChainSpec, CouplingProfile};

/// Maximum number of Newton steps on the gap equation.
const MAX_ITERATIONS: usize = 100_000;
/// Residual tolerance on the self-consistency equations.
pub const RESIDUAL_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    Normal,
    ParityBroken,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeanFieldSolution {
    pub phi: [f64; 3],
    pub lambda: f64,
    pub gamma: [f64; 3],
    /// `tanh(βλ/2)`, exactly 1 at `T = 0`.
    pub f: f64,
    pub branch: Branch,
    /// Field `b` the solution was computed at.
    pub b: f64,
    /// `None` at `T = 0`.
    pub beta: Option<f64>,
    /// Total couplings `ṽ^μ_0` used in the solution.
    pub totals: [f64; 3],
}

impl MeanFieldSolution {
    /// Local MF magnetizations `<s_μ>_φ = γ_μ f / 2`.
    pub fn mf_magnetizations(&self) -> [f64; 3] {
        self.gamma.map(|g| 0.5 * g * self.f)
    }

    /// `f/λ = tanh(βλ/2)/λ`, evaluated by series when `βλ` is small.
    pub fn f_over_lambda(&self) -> f64 {
        match self.beta {
            None => 1.0 / self.lambda,
            Some(beta) => tanhc(beta, self.lambda),
        }
    }

    /// Residuals `φ^μ - ṽ^μ_0 γ_μ f` of the self-consistency equations.
    pub fn residuals(&self) -> [f64; 3] {
        let s = self.mf_magnetizations();
        [0, 1, 2].map(|m| self.phi[m] - 2.0 * self.totals[m] * s[m])
    }

    /// MF free energy per site, `-(nβ)^{-1} ln Z_MF`; the `T -> 0` limit at `T = 0`.
    pub fn free_energy_per_site(&self) -> f64 {
        let s = self.mf_magnetizations();
        let coupling: f64 = (0..3).map(|m| self.totals[m] * s[m] * s[m]).sum();
        coupling - log_two_cosh_per_beta(self.beta, self.lambda)
    }

    /// Response of `u = φ - b` to the parameters `(ṽ^x_0, ṽ^z_0, b)`, each as `[du_x, du_z]`.
    ///
    /// Implicit differentiation of `u_μ(1 - ṽ^μ_0 f/λ) + b^μ = 0`. Non-finite at `b = b_c`.
    pub fn sensitivities(&self) -> [[f64; 2]; 3] {
        let [vx, _, vz] = self.totals;
        let (ux, uz) = (self.phi[0], self.phi[2] - self.b);
        let (gx, gz) = if self.lambda > 0.0 { (self.gamma[0], self.gamma[2]) } else { (0.0, 0.0) };
        let big_f = self.f_over_lambda();
        let df = d_tanhc(self.beta, self.lambda, self.f);
        let j = [
            [1.0 - vx * big_f - vx * ux * df * gx, -vx * ux * df * gz],
            [-vz * uz * df * gx, 1.0 - vz * big_f - vz * uz * df * gz],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        let solve = |r: [f64; 2]| [-(j[1][1] * r[0] - j[0][1] * r[1]) / det, -(j[0][0] * r[1] - j[1][0] * r[0]) / det];
        [solve([-ux * big_f, 0.0]), solve([0.0, -uz * big_f]), solve([0.0, 1.0])]
    }

    /// Partner solution with `φ^x -> -φ^x`.
    pub fn mirrored(&self) -> Self {
        let mut m = self.clone();
        m.phi[0] = -m.phi[0];
        m.gamma[0] = -m.gamma[0];
        m
    }
}

/// `β^{-1} ln(2 cosh(βλ/2))`, or `λ/2` at `T = 0`.
pub(crate) fn log_two_cosh_per_beta(beta: Option<f64>, lambda: f64) -> f64 {
    match beta {
        None => 0.5 * lambda,
        Some(beta) => {
            let x = 0.5 * beta * lambda.abs();
            (x + (1.0 + (-2.0 * x).exp()).ln()) / beta
        }
    }
}

/// `tanh(βλ/2)/λ` with the small-argument series.
pub(crate) fn tanhc(beta: f64, lambda: f64) -> f64 {
    let x = 0.5 * beta * lambda;
    if x.abs() < 1e-4 {
        let x2 = x * x;
        0.5 * beta * (1.0 - x2 / 3.0 + 2.0 * x2 * x2 / 15.0)
    } else {
        x.tanh() / lambda
    }
}

/// `d(f/λ)/dλ` at fixed `β`.
pub(crate) fn d_tanhc(beta: Option<f64>, lambda: f64, f: f64) -> f64 {
    match beta {
        None => -1.0 / (lambda * lambda),
        Some(beta) => {
            let x = 0.5 * beta * lambda;
            if x.abs() < 1e-3 {
                let hb = 0.5 * beta;
                hb * hb * (-2.0 * x / 3.0 + 8.0 * x.powi(3) / 15.0)
            } else {
                (0.5 * beta * (1.0 - f * f) * lambda - f) / (lambda * lambda)
            }
        }
    }
}

/// `b_c = ṽ^x_0 - ṽ^z_0`.
pub fn critical_field(couplings: &CouplingProfile) -> f64 {
    let t = couplings.total();
    t[0] - t[2]
}

/// Temperature above which the normal branch is selected at `|b| < b_c`.
///
/// This is the temperature at which the parity-breaking solution merges with
/// the normal one, `T_c = |b| ṽ^x_0 / (b_c ln[(b_c + |b|)/(b_c - |b|)])`,
/// which reduces to `|b| / ln[(b_c + |b|)/(b_c - |b|)]` when `ṽ^z_0 = 0`.
pub fn critical_temperature(b: f64, couplings: &CouplingProfile) -> Option<f64> {
    let bc = critical_field(couplings);
    let vx = couplings.total()[0];
    let b = b.abs();
    if !(bc > 0.0) || b >= bc {
        return None;
    }
    let ratio = b / bc;
    if ratio < 1e-6 {
        // ln((1+r)/(1-r)) = 2r (1 + r^2/3 + ...)
        return Some(0.5 * vx / (1.0 + ratio * ratio / 3.0));
    }
    Some(b * vx / (bc * ((bc + b) / (bc - b)).ln()))
}

/// Factorizing field `b_s = sqrt((v^x - v^z)(v^y - v^z))` for common-range couplings.
pub fn factorizing_field(vx: f64, vy: f64, vz: f64) -> Result<f64> {
    if !(vz <= vy && vy < vx) {
        return Err(Error::NotFactorizable(format!("need v^z <= v^y < v^x, got ({vx}, {vy}, {vz})")));
    }
    Ok(((vx - vz) * (vy - vz)).sqrt())
}

fn check_regime(totals: [f64; 3]) -> Result<()> {
    let [vx, vy, vz] = totals;
    let ok = vz >= 0.0 && vx >= vy.abs() && vx >= vz;
    if !ok {
        return Err(Error::OutsideTreatedRegime(format!("need ṽx >= |ṽy|, ṽz >= 0, ṽx >= ṽz; got ({vx}, {vy}, {vz})")));
    }
    Ok(())
}

/// Largest root of `λ = c + a tanh(βλ/2)` with `a, c >= 0`.
///
/// The map is increasing and concave on `λ >= 0`, so Newton started at the
/// upper bound `c + a` decreases monotonically onto the largest root.
fn largest_gap_root(c: f64, a: f64, beta: f64) -> Result<f64> {
    let mut lambda = c + a;
    if lambda == 0.0 {
        return Ok(0.0);
    }
    for _ in 0..MAX_ITERATIONS {
        let t = (0.5 * beta * lambda).tanh();
        let g = lambda - c - a * t;
        let dg = 1.0 - 0.5 * a * beta * (1.0 - t * t);
        if g <= 0.0 {
            return Ok(lambda);
        }
        let next = if dg > 0.0 { lambda - g / dg } else { 0.5 * lambda };
        let next = next.max(0.0);
        if (lambda - next).abs() <= 1e-15 * lambda.max(1e-300) || next == 0.0 {
            return Ok(next);
        }
        lambda = next;
    }
    Err(Error::NoConvergence(format!("gap equation λ = {c} + {a} tanh(βλ/2) at β = {beta}")))
}

/// Solution on a prescribed branch, or `None` if that branch does not exist.
pub fn solve_branch(
    chain: &ChainSpec,
    couplings: &CouplingProfile,
    branch: Branch,
) -> Result<Option<MeanFieldSolution>> {
    chain.validate()?;
    let totals = couplings.total();
    check_regime(totals)?;
    let [vx, _, vz] = totals;
    let b = chain.b;
    let beta = chain.beta();
    let bc = vx - vz;
    let thermal = |lambda: f64| beta.map_or(1.0, |bt| (0.5 * bt * lambda).tanh());

    let sol = match branch {
        Branch::Normal => {
            let lambda = match beta {
                None => b.abs() + vz,
                Some(bt) => largest_gap_root(b.abs(), vz, bt)?,
            };
            let f = thermal(lambda);
            // at b = 0 the orientation is a convention (f = 0 unless ṽz orders)
            let gz = if b < 0.0 { 1.0 } else { -1.0 };
            MeanFieldSolution {
                phi: [0.0, 0.0, vz * gz * f],
                lambda,
                gamma: [0.0, 0.0, gz],
                f,
                branch,
                b,
                beta,
                totals,
            }
        }
        Branch::ParityBroken => {
            if !(bc > 0.0) || b.abs() >= bc {
                return Ok(None);
            }
            let lambda = match beta {
                None => vx,
                Some(bt) => largest_gap_root(0.0, vx, bt)?,
            };
            let phi_z = -vz * b / bc;
            let gz = (phi_z - b) / lambda;
            if !(lambda > 0.0) || gz.abs() >= 1.0 {
                return Ok(None);
            }
            let gx = (1.0 - gz * gz).sqrt();
            MeanFieldSolution {
                phi: [lambda * gx, 0.0, phi_z],
                lambda,
                gamma: [gx, 0.0, gz],
                f: thermal(lambda),
                branch,
                b,
                beta,
                totals,
            }
        }
    };
    let worst = sol.residuals().iter().fold(0.0_f64, |m, r| m.max(r.abs()));
    if worst > RESIDUAL_TOL * (1.0 + vx.abs()) {
        return Err(Error::NoConvergence(format!("mean-field residual {worst:e} on {branch:?} branch")));
    }
    Ok(Some(sol))
}

/// Lowest-free-energy uniform mean field.
///
/// Normal iff `|b| >= b_c` or `T >= T_c(b)`; otherwise the parity-breaking
/// branch with `φ^x >= 0`.
pub fn solve_uniform_mf(chain: &ChainSpec, couplings: &CouplingProfile) -> Result<MeanFieldSolution> {
    chain.validate()?;
    check_regime(couplings.total())?;
    let bc = critical_field(couplings);
    let normal = chain.b.abs() >= bc
        || match (chain.beta(), critical_temperature(chain.b, couplings)) {
            (_, None) => true,
            (None, Some(_)) => false,
            (Some(_), Some(tc)) => chain.temperature >= tc,
        };
    let preferred = if normal { Branch::Normal } else { Branch::ParityBroken };
    match solve_branch(chain, couplings, preferred)? {
        Some(sol) => Ok(sol),
        // Numerically at the merge point the broken branch may be absent.
        None => solve_branch(chain, couplings, Branch::Normal)?
            .ok_or_else(|| Error::NoConvergence("no mean-field solution".into())),
    }
}
