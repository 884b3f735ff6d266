//! Correlations, the two-site density matrix and concurrences from the CMF
//! partition function.

use nalgebra::Matrix4;

use crate::error::{Error, Result};
use crate::meanfield::{solve_uniform_mf, MeanFieldSolution};
use crate::model::{ChainSpec, CouplingProfile};
use crate::rpa::{rpa_spectrum, ModeFlag, ModeTerms, RpaSpectrum, Tangent};

/// Tolerance on the imaginary Fourier residue of the correlators.
pub const FOURIER_RESIDUE_TOL: f64 = 1e-10;

/// Concurrences at or below this are reported as zero (separable); mode sums
/// leave residues of a few ulps where the exact value vanishes.
pub const CONCURRENCE_FLOOR: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ObservableFlag {
    /// Some RPA mode is at or next to an MF critical point.
    CriticalRegion,
    /// `|α_{μj}| > 1/4`.
    SpinBound { axis: usize, j: usize },
    /// `|<s_z>| > 1/2`.
    MagnetizationBound,
    /// `p^±_j < 0` or a negative eigenvalue of the two-site matrix.
    NegativeProbability { j: usize, value: f64 },
    /// Both `C^+_j` and `C^-_j` positive; only possible when `ρ_j` is not positive.
    BothBranchesPositive { j: usize },
}

/// `α_{μj} = <S_{μi} S_{μ,i+j}>` and `<s_z>` in spin-1/2 units.
#[derive(Clone, Debug)]
pub struct CorrelationSet {
    pub n: usize,
    /// Indexed `[μ][j]`, `j = 0..n`; the on-site entry `j = 0` is `1/4`.
    pub alpha: [Vec<f64>; 3],
    pub alpha_mf: [f64; 3],
    /// `α^c_{μj}`; zero at `j = 0`.
    pub alpha_fluct: [Vec<f64>; 3],
    /// Part of `α^c_{μj}` carried by the MF response, common to all `j`.
    pub alpha_shift: [f64; 3],
    pub sz: f64,
    pub sz_mf: f64,
    pub flags: Vec<ObservableFlag>,
}

impl CorrelationSet {
    pub fn at(&self, j: usize) -> [f64; 3] {
        [0, 1, 2].map(|m| self.alpha[m][j % self.n])
    }
}

fn scale(mf: &MeanFieldSolution) -> f64 {
    // ln C is stored per β at T = 0
    mf.beta.map_or(1.0, |b| 1.0 / b)
}

/// Mode sum `(1/n) Σ_k e^{i 2π k j/n} d_k`, with the imaginary residue checked.
fn fourier_sum(d: &[f64], j: usize) -> Result<f64> {
    let n = d.len();
    let (mut re, mut im) = (0.0, 0.0);
    for (k, dk) in d.iter().enumerate() {
        let th = 2.0 * std::f64::consts::PI * ((k * j) % n) as f64 / n as f64;
        re += th.cos() * dk;
        im += th.sin() * dk;
    }
    let norm = d.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if im.abs() > FOURIER_RESIDUE_TOL * (1.0 + norm) * n as f64 {
        return Err(Error::DomainError(format!("Fourier residue {im:e} at j = {j}")));
    }
    Ok(re / n as f64)
}

/// `(nβ)^{-1} ∂ln C/∂u` for `u = φ - b` along x and z, at fixed couplings.
fn log_c_gradient(mf: &MeanFieldSolution, rpa: &RpaSpectrum) -> [f64; 2] {
    let n = rpa.modes.len() as f64;
    [[1.0, 0.0], [0.0, 1.0]].map(|du| {
        let t = Tangent::displacement(mf, du);
        scale(mf) * rpa.modes.iter().map(|m| m.directional(&t)).sum::<f64>() / n
    })
}

/// `<s_z> = -(nβ)^{-1} d ln Z_CMF/db`.
///
/// The MF part is stationary in `φ`; the correction follows `φ(b)`.
pub fn sz_expectation(mf: &MeanFieldSolution, rpa: &RpaSpectrum) -> f64 {
    let g = log_c_gradient(mf, rpa);
    let du = mf.sensitivities()[2];
    0.5 * mf.gamma[2] * mf.f - (g[0] * du[0] + g[1] * du[1])
}

/// Correlation functions `α_{μj} = (nβ)^{-1} d ln Z_CMF/dv^μ(j)`.
///
/// `α^c_{μj}` is the mode sum `(nβ)^{-1} Σ_k e^{i2πkj/n} ∂ln C/∂ṽ^μ_k` at fixed `φ`
/// plus the `j`-independent term from the dependence of `φ` on `ṽ^μ_0`.
pub fn correlations(mf: &MeanFieldSolution, rpa: &RpaSpectrum) -> Result<CorrelationSet> {
    let n = rpa.modes.len();
    let s = mf.mf_magnetizations();
    let alpha_mf = s.map(|x| x * x);
    let mut alpha: [Vec<f64>; 3] = Default::default();
    let mut alpha_fluct: [Vec<f64>; 3] = Default::default();
    let mut flags = Vec::new();
    if !rpa.is_stable() {
        flags.push(ObservableFlag::CriticalRegion);
    }
    let g = log_c_gradient(mf, rpa);
    let du = mf.sensitivities();
    let shift = [g[0] * du[0][0] + g[1] * du[0][1], 0.0, g[0] * du[1][0] + g[1] * du[1][1]];
    if shift.iter().any(|x| !x.is_finite()) {
        return Err(Error::RpaInstability { k: 0, radicand: 0.0 });
    }
    for axis in 0..3 {
        let t = Tangent::coupling(axis);
        let d: Vec<f64> = rpa.modes.iter().map(|m| m.directional(&t)).collect();
        if let Some(k) = d.iter().position(|x| !x.is_finite()) {
            let m = &rpa.modes[k];
            return Err(Error::RpaInstability { k, radicand: m.a * m.bq });
        }
        let mut fl = vec![0.0; n];
        for j in 1..n {
            fl[j] = scale(mf) * fourier_sum(&d, j)? + shift[axis];
        }
        let mut al: Vec<f64> = fl.iter().map(|c| alpha_mf[axis] + c).collect();
        al[0] = 0.25;
        for (j, a) in al.iter().enumerate().skip(1) {
            if a.abs() > 0.25 + 1e-9 {
                flags.push(ObservableFlag::SpinBound { axis, j });
            }
        }
        alpha[axis] = al;
        alpha_fluct[axis] = fl;
    }
    let sz = sz_expectation(mf, rpa);
    if !sz.is_finite() {
        return Err(Error::RpaInstability { k: 0, radicand: 0.0 });
    }
    if sz.abs() > 0.5 + 1e-9 {
        flags.push(ObservableFlag::MagnetizationBound);
    }
    Ok(CorrelationSet { n, alpha, alpha_mf, alpha_fluct, alpha_shift: shift, sz, sz_mf: s[2], flags })
}

/// Local MF quantities with `u = φ - b` moved by `du`, couplings and field kept.
fn displaced(mf: &MeanFieldSolution, du: [f64; 2]) -> MeanFieldSolution {
    let mut out = mf.clone();
    let ux = mf.phi[0] + du[0];
    let uz = mf.phi[2] - mf.b + du[1];
    let lambda = (ux * ux + uz * uz).sqrt();
    out.phi = [ux, 0.0, uz + mf.b];
    out.lambda = lambda;
    out.gamma = [ux / lambda, 0.0, uz / lambda];
    out.f = mf.beta.map_or(1.0, |bt| (0.5 * bt * lambda).tanh());
    out
}

fn stencil(f: impl Fn(f64) -> Result<f64>, h: f64) -> Result<f64> {
    Ok((8.0 * (f(h)? - f(-h)?) - (f(2.0 * h)? - f(-2.0 * h)?)) / (12.0 * h))
}

/// Checks the analytic mode derivatives against central differences.
///
/// Five-point stencils with steps `1e-4 max(|ṽ^x_0|, 1)` and `1e-4 max(λ, 1)`.
pub fn verify_derivatives(mf: &MeanFieldSolution, rpa: &RpaSpectrum, rel_tol: f64) -> Result<()> {
    let hv = 1e-4 * mf.totals[0].abs().max(1.0);
    let check = |an: f64, fd: f64, what: &str| {
        let scale = an.abs().max(fd.abs()).max(1e-4);
        if (an - fd).abs() > rel_tol * scale {
            Err(Error::DerivativeMismatch(format!("{what}: analytic {an:e}, finite difference {fd:e}")))
        } else {
            Ok(())
        }
    };
    for (k, m) in rpa.modes.iter().enumerate() {
        for axis in 0..3 {
            let eval = |h: f64| -> Result<f64> {
                let mut v = m.v;
                v[axis] += h;
                Ok(ModeTerms::new(mf, v, k)?.log_correction())
            };
            let fd = stencil(eval, hv)?;
            check(m.directional(&Tangent::coupling(axis)), fd, &format!("mode {k} axis {axis}"))?;
        }
        if mf.lambda > 0.0 {
            let hu = 1e-4 * mf.lambda.max(1.0);
            for (c, du) in [[1.0, 0.0], [0.0, 1.0]].into_iter().enumerate() {
                let eval = |h: f64| Ok(ModeTerms::new(&displaced(mf, du.map(|x| x * h)), m.v, k)?.log_correction());
                let fd = stencil(eval, hu)?;
                check(m.directional(&Tangent::displacement(mf, du)), fd, &format!("mode {k} field {c}"))?;
            }
        }
    }
    Ok(())
}

/// Reduced two-site density matrix in the basis `(↑↑, ↑↓, ↓↑, ↓↓)`.
#[derive(Clone, Debug)]
pub struct TwoSiteDensity {
    pub j: usize,
    pub rho: Matrix4<f64>,
    pub p_plus: f64,
    pub p_minus: f64,
    /// Ascending eigenvalues.
    pub eigenvalues: [f64; 4],
    pub flags: Vec<ObservableFlag>,
}

pub fn two_site_rho(corr: &CorrelationSet, j: usize) -> TwoSiteDensity {
    let [ax, ay, az] = corr.at(j);
    let sz = corr.sz;
    let p_plus = 0.25 + az + sz;
    let p_minus = 0.25 + az - sz;
    let mid = 0.25 - az;
    let mut rho = Matrix4::zeros();
    rho[(0, 0)] = p_plus;
    rho[(1, 1)] = mid;
    rho[(2, 2)] = mid;
    rho[(3, 3)] = p_minus;
    rho[(0, 3)] = ax - ay;
    rho[(3, 0)] = ax - ay;
    rho[(1, 2)] = ax + ay;
    rho[(2, 1)] = ax + ay;
    // X-form: two independent 2 x 2 blocks
    let block = |a: f64, d: f64, c: f64| {
        let m = 0.5 * (a + d);
        let r = (0.25 * (a - d).powi(2) + c * c).sqrt();
        [m - r, m + r]
    };
    let outer = block(p_plus, p_minus, ax - ay);
    let inner = [mid - (ax + ay).abs(), mid + (ax + ay).abs()];
    let mut eigenvalues = [outer[0], outer[1], inner[0], inner[1]];
    eigenvalues.sort_by(f64::total_cmp);
    let mut flags = Vec::new();
    for value in [p_plus, p_minus] {
        if value < -1e-9 {
            flags.push(ObservableFlag::NegativeProbability { j, value });
        }
    }
    if eigenvalues[0] < -1e-8 && flags.is_empty() {
        flags.push(ObservableFlag::NegativeProbability { j, value: eigenvalues[0] });
    }
    TwoSiteDensity { j, rho, p_plus, p_minus, eigenvalues, flags }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConcurrenceKind {
    Parallel,
    Antiparallel,
    Separable,
}

impl ConcurrenceKind {
    pub fn label(self) -> &'static str {
        match self {
            Self::Parallel => "parallel",
            Self::Antiparallel => "antiparallel",
            Self::Separable => "separable",
        }
    }
}

/// `C^±_j` per separation; entry `j = 0` is left at zero and `Separable`.
#[derive(Clone, Debug)]
pub struct ConcurrenceProfile {
    pub c_plus: Vec<f64>,
    pub c_minus: Vec<f64>,
    pub c: Vec<f64>,
    pub kind: Vec<ConcurrenceKind>,
    pub flags: Vec<ObservableFlag>,
}

/// `(C^+, C^-)` for correlators `α` and magnetization `sz`.
pub fn concurrence_pair(alpha: [f64; 3], sz: f64) -> (f64, f64) {
    let [ax, ay, az] = alpha;
    let c_plus = 2.0 * ((ax - ay).abs() + az - 0.25);
    let rad = (0.25 + az).powi(2) - sz * sz;
    let c_minus = 2.0 * ((ax + ay).abs() - rad.max(0.0).sqrt());
    (c_plus, c_minus)
}

pub fn concurrence_profile(corr: &CorrelationSet) -> ConcurrenceProfile {
    let n = corr.n;
    let sz = corr.sz;
    let mut out = ConcurrenceProfile {
        c_plus: vec![0.0; n],
        c_minus: vec![0.0; n],
        c: vec![0.0; n],
        kind: vec![ConcurrenceKind::Separable; n],
        flags: corr.flags.clone(),
    };
    for j in 1..n {
        let alpha = corr.at(j);
        let (cp, cm) = concurrence_pair(alpha, sz);
        let rad = (0.25 + alpha[2]).powi(2) - sz * sz;
        if rad < -1e-9 {
            out.flags.push(ObservableFlag::NegativeProbability { j, value: rad });
        }
        if cp > 0.0 && cm > 0.0 {
            out.flags.push(ObservableFlag::BothBranchesPositive { j });
        }
        out.c_plus[j] = cp;
        out.c_minus[j] = cm;
        let c = cp.max(cm);
        out.c[j] = if c > CONCURRENCE_FLOOR { c } else { 0.0 };
        out.kind[j] = if out.c[j] == 0.0 {
            ConcurrenceKind::Separable
        } else if cp >= cm {
            ConcurrenceKind::Parallel
        } else {
            ConcurrenceKind::Antiparallel
        };
    }
    out
}

/// Full CMF evaluation at one `(b, T)` point.
#[derive(Clone, Debug)]
pub struct CmfPoint {
    pub mf: MeanFieldSolution,
    pub rpa: RpaSpectrum,
    pub corr: CorrelationSet,
    pub concurrence: ConcurrenceProfile,
}

pub fn evaluate(chain: &ChainSpec, couplings: &CouplingProfile) -> Result<CmfPoint> {
    let mf = solve_uniform_mf(chain, couplings)?;
    let rpa = rpa_spectrum(&mf, couplings)?;
    let corr = correlations(&mf, &rpa)?;
    let concurrence = concurrence_profile(&corr);
    Ok(CmfPoint { mf, rpa, corr, concurrence })
}

impl CmfPoint {
    pub fn is_critical(&self) -> bool {
        self.rpa.flags.iter().any(|f| *f != ModeFlag::Stable)
    }
}

/// Temperature where the pairwise concurrence `C_j` vanishes (bisection, 1e-6 absolute).
pub fn limit_temperature_scan(j: usize, b: f64, couplings: &CouplingProfile) -> Result<f64> {
    let n = couplings.n();
    let ground = evaluate(&ChainSpec::ground(n, b)?, couplings)?;
    let j = j % n;
    let (cp, cm) = (ground.concurrence.c_plus[j], ground.concurrence.c_minus[j]);
    if j == 0 || !(cp.max(cm) > 1e-12) {
        return Err(Error::NoPositiveConcurrence { j });
    }
    let parallel = cp > cm;
    let signed = |t: f64| -> Result<f64> {
        let p = evaluate(&ChainSpec::new(n, b, t)?, couplings)?;
        Ok(if parallel { p.concurrence.c_plus[j] } else { p.concurrence.c_minus[j] })
    };
    let c0 = cp.max(cm);
    let mut lo = 0.0;
    let mut hi = (ground.mf.lambda / (2.0 / c0).ln().max(0.1)).max(1e-3);
    let mut tries = 0;
    while signed(hi)? > 0.0 {
        lo = hi;
        hi *= 2.0;
        tries += 1;
        if tries > 60 {
            return Err(Error::NoConvergence("concurrence stays positive at high T".into()));
        }
    }
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if signed(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meanfield::{critical_field, factorizing_field};
    use crate::model::{build_couplings, Axis, CouplingFamily, FamilyKind};
    use crate::rpa::partition_cmf;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn couplings(n: usize, kind: FamilyKind, chi: f64, vz: f64) -> CouplingProfile {
        build_couplings(&CouplingFamily::xy(kind, chi, vz), n).unwrap()
    }

    #[test]
    fn free_chain_is_product_state() {
        let zero = CouplingProfile::zero(6).unwrap();
        let p = evaluate(&ChainSpec::ground(6, 1.0).unwrap(), &zero).unwrap();
        assert_eq!(p.corr.sz, -0.5);
        for j in 1..6 {
            let a = p.corr.at(j);
            assert!(a[0].abs() < 1e-15 && a[1].abs() < 1e-15 && a[2] == 0.25);
            assert!(p.concurrence.c[j] < 1e-15);
        }
        let rho = two_site_rho(&p.corr, 1);
        assert_eq!(rho.rho[(3, 3)], 1.0);
        assert!((rho.rho.trace() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn hot_chain_density_is_maximally_mixed() {
        let c = couplings(8, FamilyKind::NearestNeighbor, 0.5, 0.0);
        let p = evaluate(&ChainSpec::new(8, 1.0, 1e4).unwrap(), &c).unwrap();
        let rho = two_site_rho(&p.corr, 1);
        assert!((rho.rho - Matrix4::identity() * 0.25).abs().max() < 1e-4);
    }

    #[test]
    fn strong_field_magnetization_approaches_saturation() {
        let c = couplings(10, FamilyKind::NearestNeighbor, 0.5, 0.0);
        let dev = |b: f64| {
            let p = evaluate(&ChainSpec::ground(10, b).unwrap(), &c).unwrap();
            p.corr.sz + 0.5
        };
        let (d1, d2) = (dev(20.0), dev(40.0));
        assert!(d1 > 0.0 && d2 > 0.0);
        assert!((d1 / d2 - 4.0).abs() < 0.1, "ratio {}", d1 / d2);
    }

    #[test]
    fn mean_field_level_concurrence_is_never_positive() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            // any single-spin state: |<s>| <= 1/2
            let (r, th) = (rng.gen_range(0.0..0.5), rng.gen_range(0.0..std::f64::consts::TAU));
            let s = [r * th.cos(), 0.0, r * th.sin()];
            let alpha = s.map(|x| x * x);
            let (cp, cm) = concurrence_pair(alpha, s[2]);
            assert!(cp <= 1e-15 && cm <= 1e-15);
        }
    }

    #[test]
    fn factorizing_field_gives_zero_fluctuations() {
        for (kind, n) in [
            (FamilyKind::NearestNeighbor, 10),
            (FamilyKind::FiniteRangeConstant { range: 2 }, 12),
            (FamilyKind::PowerLaw { alpha: 1.0 }, 9),
        ] {
            let c = couplings(n, kind.clone(), 0.5, 0.2);
            let [vx, vy, vz] = c.total();
            let bs = factorizing_field(vx, vy, vz).unwrap();
            let p = evaluate(&ChainSpec::ground(n, bs).unwrap(), &c).unwrap();
            for axis in 0..3 {
                for j in 1..n {
                    assert!(p.corr.alpha_fluct[axis][j].abs() < 1e-12, "{kind:?} axis {axis} j {j}");
                }
            }
            assert!((p.corr.sz - p.corr.sz_mf).abs() < 1e-12);
            for j in 1..n {
                assert!(p.concurrence.c_plus[j].abs() < 1e-11);
                assert!(p.concurrence.c_minus[j].abs() < 1e-11);
            }
        }
    }

    #[test]
    fn lipkin_concurrence_is_uniform() {
        let c = couplings(18, FamilyKind::Lipkin, 0.5, 0.0);
        for b in [0.3, 2.0] {
            let p = evaluate(&ChainSpec::ground(18, b).unwrap(), &c).unwrap();
            for j in 2..18 {
                assert!((p.concurrence.c_plus[j] - p.concurrence.c_plus[1]).abs() < 1e-12);
                assert!((p.concurrence.c_minus[j] - p.concurrence.c_minus[1]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn derivatives_pass_self_test() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut checked = 0;
        for _ in 0..40 {
            let n = rng.gen_range(4..=12);
            let kind = FamilyKind::PowerLaw { alpha: rng.gen_range(0.5..3.0) };
            let c = couplings(n, kind, rng.gen_range(0.0..0.9), rng.gen_range(0.0..0.3));
            let t = if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(0.05..2.0) };
            let Ok(mf) = solve_uniform_mf(&ChainSpec::new(n, rng.gen_range(0.05..3.0), t).unwrap(), &c) else {
                continue;
            };
            let Ok(rpa) = rpa_spectrum(&mf, &c) else { continue };
            if !rpa.is_stable() {
                continue;
            }
            verify_derivatives(&mf, &rpa, 1e-6).unwrap();
            checked += 1;
        }
        assert!(checked > 20);
    }

    #[test]
    fn correlations_match_partition_function_derivative() {
        let n = 8;
        for (vz, b, t) in
            [(0.0, 1.8, 0.0), (0.0, 1.8, 0.6), (0.2, 1.5, 0.0), (0.2, 0.3, 0.0), (0.2, 0.3, 0.25), (0.1, 0.5, 1.0)]
        {
            let c = couplings(n, FamilyKind::PowerLaw { alpha: 1.0 }, 0.5, vz);
            let chain = ChainSpec::new(n, b, t).unwrap();
            let p = evaluate(&chain, &c).unwrap();
            let log_z = |cc: &CouplingProfile| {
                let mf = solve_uniform_mf(&chain, cc).unwrap();
                let rpa = rpa_spectrum(&mf, cc).unwrap();
                // per-β ln Z at T = 0
                -partition_cmf(&mf, &rpa, n).free_energy
            };
            let h = 1e-5;
            for axis in [Axis::X, Axis::Y, Axis::Z] {
                if axis == Axis::Z && vz == 0.0 {
                    continue;
                }
                for j in 1..=n / 2 {
                    let mult = if 2 * j == n { 1.0 } else { 2.0 };
                    let fd = (log_z(&c.perturbed(axis, j, h).unwrap()) - log_z(&c.perturbed(axis, j, -h).unwrap()))
                        / (2.0 * h);
                    let alpha = p.corr.alpha[axis.index()][j];
                    assert!((fd / (n as f64 * mult) - alpha).abs() < 1e-6, "vz={vz} b={b} T={t} {axis:?} j={j}");
                }
            }
            let fd = (log_z_at(&c, n, b + h, t) - log_z_at(&c, n, b - h, t)) / (2.0 * h);
            assert!((-fd / n as f64 - p.corr.sz).abs() < 1e-6, "vz={vz} b={b} T={t}");
        }
    }

    fn log_z_at(c: &CouplingProfile, n: usize, b: f64, t: f64) -> f64 {
        let mf = solve_uniform_mf(&ChainSpec::new(n, b, t).unwrap(), c).unwrap();
        let rpa = rpa_spectrum(&mf, c).unwrap();
        -partition_cmf(&mf, &rpa, n).free_energy
    }

    #[test]
    fn exclusivity_and_bounds() {
        let c = couplings(12, FamilyKind::FiniteRangeConstant { range: 2 }, 0.5, 0.0);
        let bc = critical_field(&c);
        for i in 1..40 {
            let b = 0.05 * i as f64 * bc;
            let Ok(p) = evaluate(&ChainSpec::ground(12, b).unwrap(), &c) else { continue };
            for j in 1..12 {
                let (cp, cm) = (p.concurrence.c_plus[j], p.concurrence.c_minus[j]);
                let rho = two_site_rho(&p.corr, j);
                if cp > 1e-12 && cm > 1e-12 {
                    assert!(rho.eigenvalues[0] < 0.0, "b={b} j={j}");
                    assert!(p.concurrence.flags.contains(&ObservableFlag::BothBranchesPositive { j }));
                }
                if rho.eigenvalues[0] >= 0.0 {
                    assert!(cp * cm <= 1e-12 || cp <= 0.0 || cm <= 0.0);
                }
                assert!((0.0..=1.0).contains(&p.concurrence.c[j]));
                assert!((rho.rho.trace() - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn linear_onset_around_factorizing_field() {
        let (n, chi) = (12, 0.5);
        let c = couplings(n, FamilyKind::FiniteRangeConstant { range: 2 }, chi, 0.0);
        let [vx, vy, vz] = c.total();
        let (bs, bc) = (factorizing_field(vx, vy, vz).unwrap(), critical_field(&c));
        let r = c.real_table(Axis::X).iter().map(|v| v / vx).collect::<Vec<_>>();
        let h = 1e-4;
        for sign in [-1.0, 1.0] {
            let p = evaluate(&ChainSpec::ground(n, bs + sign * h).unwrap(), &c).unwrap();
            for j in 1..n {
                let g = crate::asymptotics::factorization_slope(j, &r, chi, 60).unwrap().gamma;
                let (want, _) = crate::asymptotics::near_factorization_concurrence(bs + sign * h, bs, bc, vx, g);
                let (cp, cm) = (p.concurrence.c_plus[j], p.concurrence.c_minus[j]);
                assert!((cp - want).abs() < 0.05 * want.abs(), "j={j} C+={cp} want {want}");
                assert!((cm + want).abs() < 0.05 * want.abs(), "j={j} C-={cm} want {}", -want);
                let kind = if sign > 0.0 { ConcurrenceKind::Parallel } else { ConcurrenceKind::Antiparallel };
                assert_eq!(p.concurrence.kind[j], kind);
            }
        }
    }

    #[test]
    fn magnetization_choices_converge_at_strong_field() {
        let c = couplings(10, FamilyKind::NearestNeighbor, 0.5, 0.0);
        let gap = |b: f64| {
            let p = evaluate(&ChainSpec::ground(10, b).unwrap(), &c).unwrap();
            (p.corr.sz - p.corr.sz_mf).abs()
        };
        let (d1, d2) = (gap(10.0), gap(20.0));
        assert!(d1 < 1e-3 && (d1 / d2 - 4.0).abs() < 0.2, "{d1} {d2}");
    }

    #[test]
    fn limit_temperature_behaviour() {
        let c = couplings(10, FamilyKind::NearestNeighbor, 0.5, 0.0);
        let bc = critical_field(&c);
        let t2 = limit_temperature_scan(1, 2.0 * bc, &c).unwrap();
        let t4 = limit_temperature_scan(1, 4.0 * bc, &c).unwrap();
        assert!(t4 > t2);
        let bs = factorizing_field(1.0, 0.5, 0.0).unwrap();
        assert!(matches!(limit_temperature_scan(1, bs, &c), Err(Error::NoPositiveConcurrence { j: 1 })));
    }
}
