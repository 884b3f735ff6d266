//! Exact diagonalization of the chain on the full `2^n` spin basis.
//!
//! Basis states are `n`-bit integers, bit `i` set meaning spin `i` up. The
//! Hamiltonian conserves `S_z` parity `P_z = (-1)^{#up}`, so every solve works
//! inside one parity sector.

use nalgebra::{DMatrix, Matrix4, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{Axis, CouplingProfile};

pub const MAX_SITES: usize = 20;
/// Largest chain whose ground state is found densely; longer chains use Lanczos.
pub const DENSE_GROUND_MAX_SITES: usize = 10;
/// Largest chain for full-spectrum thermal states.
pub const THERMAL_MAX_SITES: usize = 12;
pub const LANCZOS_TOL: f64 = 1e-10;
const LANCZOS_SEED: u64 = 0x5eed_cafe;

#[derive(Clone, Copy, Debug)]
struct Bond {
    mask: usize,
    i: usize,
    j: usize,
    /// Element between states whose two bond spins differ / agree.
    flip_anti: f64,
    flip_par: f64,
    wz: f64,
}

/// Bit-coded Hamiltonian `b Σ S_z - Σ_{i<i'} w^μ(i'-i) S_μi S_μi'`, `w(d) = v(d) + v(n-d)`.
#[derive(Clone, Debug)]
pub struct EdHamiltonian {
    pub n: usize,
    pub b: f64,
    bonds: Vec<Bond>,
    diag: Vec<f64>,
}

impl EdHamiltonian {
    pub fn new(couplings: &CouplingProfile, b: f64) -> Result<Self> {
        let n = couplings.n();
        if n > MAX_SITES {
            return Err(Error::ResourceLimit(format!("n = {n} > {MAX_SITES} sites")));
        }
        let w = |axis: Axis, d: usize| couplings.real(axis, d) + couplings.real(axis, n - d);
        let mut bonds = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let d = j - i;
                let (wx, wy, wz) = (w(Axis::X, d), w(Axis::Y, d), w(Axis::Z, d));
                if wx == 0.0 && wy == 0.0 && wz == 0.0 {
                    continue;
                }
                bonds.push(Bond {
                    mask: (1 << i) | (1 << j),
                    i,
                    j,
                    flip_anti: -(wx + wy) / 4.0,
                    flip_par: -(wx - wy) / 4.0,
                    wz,
                });
            }
        }
        let diag = (0..1usize << n)
            .into_par_iter()
            .map(|s| {
                let sz = |i: usize| if s >> i & 1 == 1 { 0.5 } else { -0.5 };
                let field: f64 = (0..n).map(sz).sum::<f64>() * b;
                field - bonds.iter().map(|bd| bd.wz * sz(bd.i) * sz(bd.j)).sum::<f64>()
            })
            .collect();
        Ok(Self { n, b, bonds, diag })
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    fn row(&self, s: usize, x: impl Fn(usize) -> f64) -> f64 {
        let mut acc = self.diag[s] * x(s);
        for bd in &self.bonds {
            let anti = ((s >> bd.i) ^ (s >> bd.j)) & 1 == 1;
            let c = if anti { bd.flip_anti } else { bd.flip_par };
            if c != 0.0 {
                acc += c * x(s ^ bd.mask);
            }
        }
        acc
    }

    /// `H x` on the full space.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim());
        (0..self.dim()).into_par_iter().map(|s| self.row(s, |t| x[t])).collect()
    }

    /// States of one parity sector. Bit 0 is fixed by the others, so the
    /// sector index of a state is `s >> 1`.
    pub fn sector(&self, parity: Parity) -> Sector<'_> {
        let states: Vec<usize> = (0..self.dim() / 2)
            .map(|a| {
                let high = a << 1;
                if Parity::of(high) == parity {
                    high
                } else {
                    high | 1
                }
            })
            .collect();
        Sector { h: self, parity, states }
    }
}

/// `H x` for a full-space vector `x`.
pub fn apply_hamiltonian(state: &[f64], couplings: &CouplingProfile, b: f64) -> Result<Vec<f64>> {
    let h = EdHamiltonian::new(couplings, b)?;
    if state.len() != h.dim() {
        return Err(Error::InvalidChain(format!("state length {} != 2^{}", state.len(), h.n)));
    }
    Ok(h.apply(state))
}

/// Eigenvalue of `P_z = (-1)^{#up}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(state: usize) -> Self {
        if state.count_ones().is_multiple_of(2) {
            Self::Even
        } else {
            Self::Odd
        }
    }

    pub fn sign(self) -> i8 {
        match self {
            Self::Even => 1,
            Self::Odd => -1,
        }
    }
}

pub struct Sector<'a> {
    h: &'a EdHamiltonian,
    pub parity: Parity,
    pub states: Vec<usize>,
}

impl Sector<'_> {
    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        const BLOCK: usize = 1 << 12;
        let states = &self.states;
        out.par_chunks_mut(BLOCK).enumerate().for_each(|(blk, chunk)| {
            let offset = blk * BLOCK;
            for (o, a) in chunk.iter_mut().zip(offset..) {
                *o = self.h.diag[states[a]] * x[a];
            }
            for bd in &self.h.bonds {
                for (o, a) in chunk.iter_mut().zip(offset..) {
                    let s = states[a];
                    let anti = ((s >> bd.i) ^ (s >> bd.j)) & 1 == 1;
                    let c = if anti { bd.flip_anti } else { bd.flip_par };
                    *o += c * x[(s ^ bd.mask) >> 1];
                }
            }
        });
    }

    pub fn dense(&self) -> DMatrix<f64> {
        let d = self.dim();
        let mut m = DMatrix::zeros(d, d);
        let mut e = vec![0.0; d];
        let mut col = vec![0.0; d];
        for c in 0..d {
            e[c] = 1.0;
            self.apply(&e, &mut col);
            m.set_column(c, &nalgebra::DVector::from_column_slice(&col));
            e[c] = 0.0;
        }
        m
    }

    /// Embeds a sector vector in the full space.
    pub fn embed(&self, x: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.h.dim()];
        for (a, &s) in self.states.iter().enumerate() {
            full[s] = x[a];
        }
        full
    }

    /// Lowest eigenpair.
    pub fn ground(&self) -> Result<(f64, Vec<f64>)> {
        if self.h.n <= DENSE_GROUND_MAX_SITES {
            let eig = SymmetricEigen::new(self.dense());
            let k = eig.eigenvalues.imin();
            Ok((eig.eigenvalues[k], eig.eigenvectors.column(k).iter().copied().collect()))
        } else {
            lanczos_lowest(self, 60, 400)
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(a: &mut [f64]) -> f64 {
    let nrm = dot(a, a).sqrt();
    a.iter_mut().for_each(|x| *x /= nrm);
    nrm
}

/// Lowest eigenpair of the tridiagonal Lanczos matrix and its residual estimate.
fn tridiagonal_lowest(alpha: &[f64], beta: &[f64]) -> (f64, Vec<f64>, f64) {
    let k = alpha.len();
    let t = DMatrix::from_fn(k, k, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j || j + 1 == i {
            beta[i.min(j)]
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(t);
    let lo = eig.eigenvalues.imin();
    let y: Vec<f64> = eig.eigenvectors.column(lo).iter().copied().collect();
    let residual = (beta[k - 1] * y[k - 1]).abs();
    (eig.eigenvalues[lo], y, residual)
}

/// Restarted Lanczos with full reorthogonalization, restarting from the lowest Ritz vector.
fn lanczos_lowest(sector: &Sector<'_>, m: usize, max_restarts: usize) -> Result<(f64, Vec<f64>)> {
    let d = sector.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(LANCZOS_SEED);
    let mut start: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
    normalize(&mut start);
    let m = m.min(d);
    let mut w = vec![0.0; d];
    for _ in 0..max_restarts {
        let mut basis: Vec<Vec<f64>> = vec![start.clone()];
        let mut alpha = Vec::with_capacity(m);
        let mut beta: Vec<f64> = Vec::with_capacity(m);
        let mut lowest = (0.0, Vec::new(), f64::INFINITY);
        for it in 0..m {
            sector.apply(&basis[it], &mut w);
            alpha.push(dot(&w, &basis[it]));
            for _ in 0..2 {
                for q in &basis {
                    let c = dot(&w, q);
                    w.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
                }
            }
            let nb = dot(&w, &w).sqrt();
            beta.push(nb);
            let last = it + 1 == m || nb < 1e-14;
            if last || (it >= 8 && it % 4 == 0) {
                lowest = tridiagonal_lowest(&alpha, &beta);
                if lowest.2 < LANCZOS_TOL * lowest.0.abs().max(1.0) {
                    break;
                }
            }
            if last {
                break;
            }
            basis.push(w.iter().map(|x| x / nb).collect());
        }
        let (theta, y, residual) = lowest;
        let mut ritz = vec![0.0; d];
        for (c, q) in y.iter().zip(&basis) {
            ritz.iter_mut().zip(q).for_each(|(r, x)| *r += c * x);
        }
        normalize(&mut ritz);
        if residual < LANCZOS_TOL * theta.abs().max(1.0) {
            return Ok((theta, ritz));
        }
        start = ritz;
    }
    Err(Error::NoConvergence("Lanczos did not reach the residual tolerance".into()))
}

/// Reduced density matrix of spins `(i, j)` in the basis `(↑↑, ↑↓, ↓↑, ↓↓)`.
pub fn reduced_two_spin(state: &[f64], n: usize, i: usize, j: usize) -> Matrix4<f64> {
    assert!(i != j && i < n && j < n);
    let mut rho = Matrix4::zeros();
    let idx = |s: usize| (1 - (s >> i & 1)) * 2 + (1 - (s >> j & 1));
    let clear = !((1 << i) | (1 << j));
    for (s, &amp) in state.iter().enumerate() {
        if amp == 0.0 {
            continue;
        }
        let base = s & clear;
        let a = idx(s);
        for (up_i, up_j) in [(1, 1), (1, 0), (0, 1), (0, 0)] {
            let t = base | (up_i << i) | (up_j << j);
            rho[(a, idx(t))] += amp * state[t];
        }
    }
    rho
}

fn sigma_y_y() -> Matrix4<f64> {
    let mut m = Matrix4::zeros();
    m[(0, 3)] = -1.0;
    m[(3, 0)] = -1.0;
    m[(1, 2)] = 1.0;
    m[(2, 1)] = 1.0;
    m
}

/// Wootters concurrence of a real two-qubit density matrix.
pub fn wootters_concurrence(rho: &Matrix4<f64>) -> Result<f64> {
    if (rho - rho.transpose()).abs().max() > 1e-10 {
        return Err(Error::InvalidDensityMatrix("not symmetric".into()));
    }
    if (rho.trace() - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidDensityMatrix(format!("trace {}", rho.trace())));
    }
    let eig = SymmetricEigen::new(*rho);
    if eig.eigenvalues.min() < -1e-10 {
        return Err(Error::InvalidDensityMatrix(format!("eigenvalue {}", eig.eigenvalues.min())));
    }
    let sqrt_diag = eig.eigenvalues.map(|x| x.max(0.0).sqrt());
    let sqrt_rho = eig.eigenvectors * Matrix4::from_diagonal(&sqrt_diag) * eig.eigenvectors.transpose();
    let yy = sigma_y_y();
    let flipped = yy * rho * yy;
    let r = sqrt_rho * flipped * sqrt_rho;
    let r = 0.5 * (r + r.transpose());
    let mut l: Vec<f64> = SymmetricEigen::new(r).eigenvalues.iter().map(|x| x.max(0.0).sqrt()).collect();
    l.sort_by(|a, b| b.total_cmp(a));
    Ok((l[0] - l[1] - l[2] - l[3]).max(0.0))
}

/// `(<S_x S_x>, <S_y S_y>, <S_z S_z>)` and `<S_z>` of the first spin from a two-spin matrix.
pub fn correlators_from_rho(rho: &Matrix4<f64>) -> ([f64; 3], f64) {
    let ax = 0.25 * (rho[(0, 3)] + rho[(3, 0)] + rho[(1, 2)] + rho[(2, 1)]);
    let ay = 0.25 * (-rho[(0, 3)] - rho[(3, 0)] + rho[(1, 2)] + rho[(2, 1)]);
    let az = 0.25 * (rho[(0, 0)] - rho[(1, 1)] - rho[(2, 2)] + rho[(3, 3)]);
    let sz = 0.5 * (rho[(0, 0)] + rho[(1, 1)] - rho[(2, 2)] - rho[(3, 3)]);
    ([ax, ay, az], sz)
}

/// Observables of an exact state (pure or Gibbs), referenced to site 0.
#[derive(Clone, Debug)]
pub struct EdResult {
    pub n: usize,
    /// Ground energy, or the internal energy for a Gibbs state.
    pub energy: f64,
    /// Parity of the state used (`None` for Gibbs states).
    pub parity: Option<Parity>,
    /// Lowest energies of the even and odd sectors.
    pub sector_energies: Option<[f64; 2]>,
    /// Sector gap below 1e-10.
    pub degenerate: bool,
    /// `rho[j]` for spins `(0, j)`; entry 0 is unused (zero).
    pub rho: Vec<Matrix4<f64>>,
    pub concurrence: Vec<f64>,
    /// `[μ][j]`; the on-site entry is `1/4`.
    pub alpha: [Vec<f64>; 3],
    pub sz: f64,
    /// Ground vector on the full space (pure states only).
    pub state: Option<Vec<f64>>,
}

impl EdResult {
    fn from_rhos(n: usize, energy: f64, rho: Vec<Matrix4<f64>>) -> Result<Self> {
        let mut alpha: [Vec<f64>; 3] = [vec![0.25; n], vec![0.25; n], vec![0.25; n]];
        let mut concurrence = vec![0.0; n];
        let mut sz = 0.0;
        for j in 1..n {
            let (a, s) = correlators_from_rho(&rho[j]);
            for m in 0..3 {
                alpha[m][j] = a[m];
            }
            sz = s;
            concurrence[j] = wootters_concurrence(&rho[j])?;
        }
        Ok(Self {
            n,
            energy,
            parity: None,
            sector_energies: None,
            degenerate: false,
            rho,
            concurrence,
            alpha,
            sz,
            state: None,
        })
    }

    pub fn at(&self, j: usize) -> [f64; 3] {
        [0, 1, 2].map(|m| self.alpha[m][j % self.n])
    }
}

fn pure_rhos(state: &[f64], n: usize, site: usize) -> Vec<Matrix4<f64>> {
    let mut out = vec![Matrix4::zeros(); n];
    out.par_iter_mut().enumerate().skip(1).for_each(|(j, r)| *r = reduced_two_spin(state, n, site, (site + j) % n));
    out
}

/// Lowest definite-parity eigenstate and its observables.
pub fn ground_state(couplings: &CouplingProfile, b: f64) -> Result<EdResult> {
    let h = EdHamiltonian::new(couplings, b)?;
    let n = h.n;
    let even = h.sector(Parity::Even);
    let odd = h.sector(Parity::Odd);
    let (e_even, v_even) = even.ground()?;
    let (e_odd, v_odd) = odd.ground()?;
    let (energy, parity, state) = if e_even <= e_odd {
        (e_even, Parity::Even, even.embed(&v_even))
    } else {
        (e_odd, Parity::Odd, odd.embed(&v_odd))
    };
    let mut res = EdResult::from_rhos(n, energy, pure_rhos(&state, n, 0))?;
    res.parity = Some(parity);
    res.sector_energies = Some([e_even, e_odd]);
    res.degenerate = (e_even - e_odd).abs() < 1e-10;
    res.state = Some(state);
    Ok(res)
}

/// `T → 0⁺` state: the ground state, or the equal mixture of both parity
/// ground states when they are degenerate (as at the factorizing field).
pub fn zero_temperature_state(couplings: &CouplingProfile, b: f64) -> Result<EdResult> {
    let pure = ground_state(couplings, b)?;
    if !pure.degenerate {
        return Ok(pure);
    }
    let h = EdHamiltonian::new(couplings, b)?;
    let n = h.n;
    let [e_even, e_odd] = pure.sector_energies.expect("pure states carry sector energies");
    let mut rhos = vec![Matrix4::zeros(); n];
    for parity in [Parity::Even, Parity::Odd] {
        let sector = h.sector(parity);
        let (_, v) = sector.ground()?;
        for (acc, r) in rhos.iter_mut().zip(pure_rhos(&sector.embed(&v), n, 0)) {
            *acc += 0.5 * r;
        }
    }
    let mut res = EdResult::from_rhos(n, 0.5 * (e_even + e_odd), rhos)?;
    res.sector_energies = Some([e_even, e_odd]);
    res.degenerate = true;
    Ok(res)
}

/// Full spectrum with the per-level two-spin matrices `(0, j)`, reusable across temperatures.
#[derive(Clone, Debug)]
pub struct ThermalEnsemble {
    pub n: usize,
    pub energies: Vec<f64>,
    /// `level_rhos[l][j]`; entry `j = 0` is unused.
    level_rhos: Vec<Vec<Matrix4<f64>>>,
}

impl ThermalEnsemble {
    /// Diagonalizes both parity sectors densely (`n <= 12`).
    pub fn new(couplings: &CouplingProfile, b: f64) -> Result<Self> {
        let n = couplings.n();
        if n > THERMAL_MAX_SITES {
            return Err(Error::ResourceLimit(format!("thermal ED needs n <= {THERMAL_MAX_SITES}, got {n}")));
        }
        let h = EdHamiltonian::new(couplings, b)?;
        let mut levels: Vec<(f64, Vec<f64>)> = Vec::with_capacity(h.dim());
        for parity in [Parity::Even, Parity::Odd] {
            let sector = h.sector(parity);
            let eig = SymmetricEigen::new(sector.dense());
            for (k, &e) in eig.eigenvalues.iter().enumerate() {
                let v: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
                levels.push((e, sector.embed(&v)));
            }
        }
        levels.sort_by(|x, y| x.0.total_cmp(&y.0));
        let level_rhos = levels.par_iter().map(|(_, v)| pure_rhos(v, n, 0)).collect();
        Ok(Self { n, energies: levels.into_iter().map(|l| l.0).collect(), level_rhos })
    }

    /// Gibbs state at temperature `t > 0`.
    pub fn at(&self, t: f64) -> Result<EdResult> {
        if !(t > 0.0) {
            return Err(Error::DomainError(format!("temperature {t} must be positive")));
        }
        let e0 = self.energies[0];
        let weights: Vec<f64> = self.energies.iter().map(|e| (-(e - e0) / t).exp()).collect();
        let z: f64 = weights.iter().sum();
        let energy = self.energies.iter().zip(&weights).map(|(e, w)| e * w).sum::<f64>() / z;
        let mut rho = vec![Matrix4::zeros(); self.n];
        for (level, w) in self.level_rhos.iter().zip(&weights) {
            if *w > 1e-18 * z {
                for j in 1..self.n {
                    rho[j] += level[j] * (*w / z);
                }
            }
        }
        EdResult::from_rhos(self.n, energy, rho)
    }

    /// Temperature where `C_j(T)` reaches zero, by bisection to `tol`.
    pub fn limit_temperature(&self, j: usize, tol: f64) -> Result<f64> {
        let c0 = self.at(1e-9)?.concurrence[j];
        if !(c0 > 0.0) {
            return Err(Error::NoPositiveConcurrence { j });
        }
        let gap = self.energies.iter().find(|&&e| e > self.energies[0] + 1e-9).map_or(1.0, |e| e - self.energies[0]);
        let (mut lo, mut hi) = (1e-9, gap.max(1e-3));
        while self.at(hi)?.concurrence[j] > 0.0 {
            lo = hi;
            hi *= 2.0;
            if hi > 1e6 {
                return Err(Error::NoConvergence(format!("C_{j} positive up to T = {hi}")));
            }
        }
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if self.at(mid)?.concurrence[j] > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

/// Gibbs state at temperature `t > 0` from the full spectrum (`n <= 12`).
pub fn thermal_state(couplings: &CouplingProfile, b: f64, t: f64) -> Result<EdResult> {
    if !(t > 0.0) {
        return Err(Error::DomainError(format!("temperature {t} must be positive")));
    }
    ThermalEnsemble::new(couplings, b)?.at(t)
}

/// Concurrence `C_j` from the ground state on one side of a level crossing: `b = b0 ± offset`.
pub fn lateral_concurrence(couplings: &CouplingProfile, b0: f64, offset: f64, j: usize) -> Result<f64> {
    Ok(ground_state(couplings, b0 + offset)?.concurrence[j % couplings.n()])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_couplings, CouplingFamily, FamilyKind};
    use crate::observables::concurrence_pair;

    fn nn(n: usize, chi: f64, vz: f64) -> CouplingProfile {
        build_couplings(&CouplingFamily::xy(FamilyKind::NearestNeighbor, chi, vz), n).unwrap()
    }

    fn random_vec(d: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    #[test]
    fn degenerate_doublet_mixture_suppresses_pair_entanglement() {
        let chi = 0.5;
        let c = nn(8, chi, 0.0);
        let bs = chi.sqrt();
        let pure = ground_state(&c, bs).unwrap();
        assert!(pure.degenerate && pure.concurrence[1] > 0.05);
        let mixed = zero_temperature_state(&c, bs).unwrap();
        assert!(mixed.parity.is_none() && mixed.state.is_none());
        // the two product states are not orthogonal, so only the leading part cancels
        for j in 1..8 {
            assert!(mixed.concurrence[j] < 0.1 * pure.concurrence[j], "j={j} C={}", mixed.concurrence[j]);
            assert!((mixed.rho[j].trace() - 1.0).abs() < 1e-12);
        }
        let away = zero_temperature_state(&c, 1.5).unwrap();
        assert_eq!(away.concurrence, ground_state(&c, 1.5).unwrap().concurrence);
    }

    #[test]
    fn two_sites_match_closed_form() {
        // n = 2: v(1) is both separations, bond weight 2v
        let (v, chi, b) = (0.7, 0.4, 0.9);
        let c = CouplingProfile::from_tables(2, [&[v], &[chi * v], &[0.0]]).unwrap();
        let h = EdHamiltonian::new(&c, b).unwrap();
        let mut m = DMatrix::zeros(4, 4);
        for col in 0..4 {
            let mut e = vec![0.0; 4];
            e[col] = 1.0;
            m.set_column(col, &nalgebra::DVector::from_vec(h.apply(&e)));
        }
        let mut got: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
        got.sort_by(f64::total_cmp);
        // H = b(Sz1+Sz2) - 2v Sx Sx - 2χv Sy Sy
        let (wx, wy) = (2.0 * v, 2.0 * chi * v);
        let outer = ((b * b) + ((wx - wy) / 4.0).powi(2)).sqrt();
        let mut want = vec![-outer, outer, -(wx + wy) / 4.0, (wx + wy) / 4.0];
        want.sort_by(f64::total_cmp);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-13, "{got:?} vs {want:?}");
        }
        let free = EdHamiltonian::new(&CouplingProfile::zero(2).unwrap(), b).unwrap();
        assert_eq!(free.diag, vec![-b, 0.0, 0.0, b]);
    }

    #[test]
    fn hamiltonian_is_hermitian_and_conserves_parity() {
        let c = build_couplings(&CouplingFamily::xy(FamilyKind::PowerLaw { alpha: 1.0 }, 0.3, 0.2), 8).unwrap();
        let h = EdHamiltonian::new(&c, 0.7).unwrap();
        let u = random_vec(256, 1);
        let w = random_vec(256, 2);
        assert!((dot(&u, &h.apply(&w)) - dot(&w, &h.apply(&u))).abs() < 1e-12);
        let p =
            |x: &[f64]| -> Vec<f64> { x.iter().enumerate().map(|(s, v)| v * Parity::of(s).sign() as f64).collect() };
        let ph = p(&h.apply(&u));
        let hp = h.apply(&p(&u));
        assert!(ph.iter().zip(&hp).all(|(a, b)| (a - b).abs() < 1e-10));
    }

    #[test]
    fn resource_guard() {
        let c = CouplingProfile::zero(21).unwrap();
        assert!(matches!(EdHamiltonian::new(&c, 1.0), Err(Error::ResourceLimit(_))));
    }

    #[test]
    fn lanczos_matches_dense() {
        let c = build_couplings(&CouplingFamily::xy(FamilyKind::PowerLaw { alpha: 1.0 }, 0.5, 0.1), 10).unwrap();
        let h = EdHamiltonian::new(&c, 0.6).unwrap();
        for parity in [Parity::Even, Parity::Odd] {
            let s = h.sector(parity);
            let (dense, _) = s.ground().unwrap();
            let (lz, v) = lanczos_lowest(&s, 40, 400).unwrap();
            assert!((dense - lz).abs() < 1e-9);
            assert!((dot(&v, &v) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn aligned_limit_at_strong_field() {
        let c = nn(6, 0.5, 0.0);
        let r = ground_state(&c, 200.0).unwrap();
        let state = r.state.unwrap();
        assert!(state[0].abs() > 1.0 - 1e-4);
        assert!((r.sz + 0.5).abs() < 1e-4);
        let norm: f64 = state.iter().map(|x| x * x).sum();
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn partial_trace_matches_brute_force() {
        let n = 4;
        let mut psi = random_vec(16, 9);
        normalize(&mut psi);
        let bit = |s: usize, k: usize| s >> k & 1;
        for (i, j) in [(0, 1), (0, 2), (1, 3), (3, 0)] {
            let fast = reduced_two_spin(&psi, n, i, j);
            let mut slow = Matrix4::zeros();
            for s in 0..16 {
                for t in 0..16 {
                    let rest = (0..n).filter(|&k| k != i && k != j).all(|k| bit(s, k) == bit(t, k));
                    if rest {
                        let a = (1 - bit(s, i)) * 2 + (1 - bit(s, j));
                        let c = (1 - bit(t, i)) * 2 + (1 - bit(t, j));
                        slow[(a, c)] += psi[s] * psi[t];
                    }
                }
            }
            assert!((fast - slow).abs().max() < 1e-14);
            assert!((fast.trace() - 1.0).abs() < 1e-12);
        }
        // product state and maximally mixed input
        let mut prod = vec![0.0; 16];
        prod[0b0101] = 1.0;
        assert_eq!(
            SymmetricEigen::new(reduced_two_spin(&prod, 4, 0, 1))
                .eigenvalues
                .iter()
                .filter(|x| x.abs() > 1e-14)
                .count(),
            1
        );
    }

    #[test]
    fn wootters_reference_states() {
        let mut bell = Matrix4::zeros();
        for (a, c) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
            bell[(a, c)] = 0.5;
        }
        assert!((wootters_concurrence(&bell).unwrap() - 1.0).abs() < 1e-12);
        let mut prod = Matrix4::zeros();
        prod[(3, 3)] = 1.0;
        assert!(wootters_concurrence(&prod).unwrap().abs() < 1e-12);
        let p = 0.8;
        let werner = bell * p + Matrix4::identity() * ((1.0 - p) / 4.0);
        assert!((wootters_concurrence(&werner).unwrap() - 0.7).abs() < 1e-12);
        let mut bad = Matrix4::identity() * 0.25;
        bad[(0, 0)] = 0.5;
        assert!(matches!(wootters_concurrence(&bad), Err(Error::InvalidDensityMatrix(_))));
    }

    #[test]
    fn x_form_concurrence_matches_wootters() {
        let c = nn(8, 0.5, 0.0);
        for b in [0.3, 0.9, 1.5, 3.0] {
            let r = ground_state(&c, b).unwrap();
            for j in 1..8 {
                let (cp, cm) = concurrence_pair(r.at(j), r.sz);
                assert!((cp.max(cm).max(0.0) - r.concurrence[j]).abs() < 1e-10, "b={b} j={j}");
            }
        }
    }

    #[test]
    fn selection_rules_and_translation_invariance() {
        let c = build_couplings(&CouplingFamily::xy(FamilyKind::PowerLaw { alpha: 1.5 }, 0.4, 0.1), 8).unwrap();
        let r = ground_state(&c, 0.8).unwrap();
        let state = r.state.as_ref().unwrap();
        let other = pure_rhos(state, 8, 3);
        for j in 1..8 {
            let rho = &r.rho[j];
            // X-form
            for (a, b) in [(0, 1), (0, 2), (1, 3), (2, 3)] {
                assert!(rho[(a, b)].abs() < 1e-10 && rho[(b, a)].abs() < 1e-10);
            }
            assert!((rho - other[j]).abs().max() < 1e-10);
            for m in 0..3 {
                assert!((r.alpha[m][j] - r.alpha[m][8 - j]).abs() < 1e-10);
            }
        }
        let t = thermal_state(&c, 0.8, 0.4).unwrap();
        for j in 1..8 {
            assert!(t.rho[j][(0, 1)].abs() < 1e-10 && t.rho[j][(0, 2)].abs() < 1e-10);
        }
    }

    #[test]
    fn thermal_limits() {
        let c = nn(6, 0.5, 0.0);
        let hot = thermal_state(&c, 1.0, 1e4).unwrap();
        assert!(hot.concurrence.iter().all(|&x| x == 0.0));
        let cold = thermal_state(&c, 2.0, 1e-3).unwrap();
        let ground = ground_state(&c, 2.0).unwrap();
        assert!((cold.energy - ground.energy).abs() < 1e-8);
        for j in 1..6 {
            assert!((cold.concurrence[j] - ground.concurrence[j]).abs() < 1e-8);
        }
    }

    #[test]
    fn limit_temperature_grows_with_field() {
        let c = nn(8, 0.5, 0.0);
        let t2 = ThermalEnsemble::new(&c, 2.0).unwrap().limit_temperature(1, 1e-6).unwrap();
        let ens = ThermalEnsemble::new(&c, 4.0).unwrap();
        let t4 = ens.limit_temperature(1, 1e-6).unwrap();
        assert!(t4 > t2 && t2 > 0.0);
        assert!(ens.at(t4 * 0.98).unwrap().concurrence[1] > 0.0);
        assert_eq!(ens.at(t4 * 1.02).unwrap().concurrence[1], 0.0);
        // far pairs never entangle at this field
        assert!(matches!(ens.limit_temperature(4, 1e-6), Err(Error::NoPositiveConcurrence { j: 4 })));
    }
}
