//! Free-fermion solution of the nearest-neighbor XY chain at `T = 0`.
//!
//! Spins map to fermions with `n_i = S_zi + 1/2`. In the sector of fermion
//! parity `P = (-1)^N` (equal to the spin parity `P_z`) the ring closes with
//! `c_n = -P c_0`, so the even sector is antiperiodic. Each sector is solved
//! in real space through its `2n x 2n` BdG matrix; the quasiparticle vacuum is
//! corrected by one excitation when its parity does not match the sector.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::ed::Parity;
use crate::error::{Error, Result};
use crate::model::{Axis, CouplingProfile};

/// Pfaffian of a real antisymmetric matrix (Parlett-Reid with pivoting).
pub fn pfaffian(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    if n % 2 == 1 {
        return 0.0;
    }
    let mut a = a.clone();
    let mut pf = 1.0;
    for k in (0..n.saturating_sub(1)).step_by(2) {
        let kp = (k + 1..n).max_by(|&x, &y| a[(x, k)].abs().total_cmp(&a[(y, k)].abs())).unwrap();
        if kp != k + 1 {
            a.swap_rows(k + 1, kp);
            a.swap_columns(k + 1, kp);
            pf = -pf;
        }
        let pivot = a[(k, k + 1)];
        if pivot == 0.0 {
            return 0.0;
        }
        pf *= pivot;
        if k + 2 < n {
            let tau: Vec<f64> = (k + 2..n).map(|c| a[(k, c)] / pivot).collect();
            let col: Vec<f64> = (k + 2..n).map(|r| a[(r, k + 1)]).collect();
            for (ri, r) in (k + 2..n).enumerate() {
                for (ci, c) in (k + 2..n).enumerate() {
                    a[(r, c)] += tau[ri] * col[ci] - col[ri] * tau[ci];
                }
            }
        }
    }
    pf
}

/// Ground state of one fermion-parity sector.
#[derive(Clone, Debug)]
pub struct SectorSolution {
    pub parity: Parity,
    /// Non-negative quasiparticle energies `Λ_k`, ascending.
    pub energies: Vec<f64>,
    /// Lowest energy within the sector.
    pub energy: f64,
    /// True when the lowest quasiparticle is occupied to fix the parity.
    pub excited: bool,
    /// Majorana covariance `M_ab = -i<γ_a γ_b>` (`a != b`).
    pub majorana: DMatrix<f64>,
}

/// Both parity sectors of the chain.
#[derive(Clone, Debug)]
pub struct FermionSpectrum {
    pub n: usize,
    pub b: f64,
    /// Hopping `t = (w_x + w_y)/4` and pairing `Δ = (w_x - w_y)/4`, `w = 2 v(1)`.
    pub hopping: f64,
    pub pairing: f64,
    pub even: SectorSolution,
    pub odd: SectorSolution,
}

impl FermionSpectrum {
    pub fn ground(&self) -> &SectorSolution {
        if self.even.energy <= self.odd.energy {
            &self.even
        } else {
            &self.odd
        }
    }

    pub fn ground_energy(&self) -> f64 {
        self.ground().energy
    }

    /// `E_odd - E_even`.
    pub fn gap(&self) -> f64 {
        self.odd.energy - self.even.energy
    }
}

fn bdg_matrix(n: usize, b: f64, t: f64, delta: f64, parity: Parity) -> DMatrix<f64> {
    let p = parity.sign() as f64;
    let mut a = DMatrix::zeros(n, n);
    let mut bm = DMatrix::zeros(n, n);
    for i in 0..n {
        a[(i, i)] = b;
        let (j, s) = if i + 1 < n { (i + 1, 1.0) } else { (0, -p) };
        a[(i, j)] += -t * s;
        a[(j, i)] += -t * s;
        bm[(i, j)] += -delta * s;
        bm[(j, i)] += delta * s;
    }
    let mut h = DMatrix::zeros(2 * n, 2 * n);
    h.view_mut((0, 0), (n, n)).copy_from(&a);
    h.view_mut((0, n), (n, n)).copy_from(&bm);
    h.view_mut((n, 0), (n, n)).copy_from(&(-&bm));
    h.view_mut((n, n), (n, n)).copy_from(&(-&a));
    h
}

/// `M = -i W Γ' W^T` with `γ_{2i} = c_i + c†_i`, `γ_{2i+1} = i(c†_i - c_i)`.
fn majorana_covariance(gamma: &DMatrix<f64>, n: usize) -> DMatrix<f64> {
    // <Ψ_c Ψ_d> = Γ[c][σ(d)], σ swapping the c and c† halves
    let pair = |c: usize, d: usize| gamma[(c, (d + n) % (2 * n))];
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let (ci, di) = (i, i + n);
            let (cj, dj) = (j, j + n);
            // γ_{2i} = Ψ_ci + Ψ_di ; γ_{2i+1} = i(Ψ_di - Ψ_ci)
            let ee = pair(ci, cj) + pair(ci, dj) + pair(di, cj) + pair(di, dj);
            // <γ_{2i} γ_{2j+1}> = i(<γ_{2i}Ψ_dj> - <γ_{2i}Ψ_cj>)
            let eo = (pair(ci, dj) + pair(di, dj)) - (pair(ci, cj) + pair(di, cj));
            let oe = (pair(di, cj) + pair(di, dj)) - (pair(ci, cj) + pair(ci, dj));
            // <γ_{2i+1} γ_{2j+1}> = -<(Ψ_di - Ψ_ci)(Ψ_dj - Ψ_cj)>
            let oo = -(pair(di, dj) - pair(di, cj) - pair(ci, dj) + pair(ci, cj));
            // M = -i <γγ>: real parts of -i·(ee), -i·(i eo), -i·(i oe), -i·(oo)
            // ee and oo are imaginary-free only off the diagonal, where they vanish
            m[(2 * i, 2 * j + 1)] = eo;
            m[(2 * i + 1, 2 * j)] = oe;
            if i != j {
                debug_assert!(ee.abs() < 1e-9 && oo.abs() < 1e-9);
            }
        }
    }
    for a in 0..2 * n {
        m[(a, a)] = 0.0;
    }
    m
}

/// `n` quasiparticle vectors, softest last. Zero modes are degenerate with
/// their particle-hole partners, so the solver may return mixtures of the two;
/// they are re-paired into vectors `w` orthogonal to `τ_x w`.
fn quasiparticle_modes(vecs: &DMatrix<f64>, vals: &DVector<f64>, order: &[usize], n: usize) -> Vec<DVector<f64>> {
    let tol = 1e-9 * vals.amax().max(1.0);
    let mut modes: Vec<DVector<f64>> =
        order.iter().filter(|&&k| vals[k] > tol).map(|&k| vecs.column(k).into_owned()).collect();
    let zero: Vec<usize> = order.iter().copied().filter(|&k| vals[k].abs() <= tol).collect();
    if zero.is_empty() {
        return modes;
    }
    let z = DMatrix::from_columns(&zero.iter().map(|&k| vecs.column(k)).collect::<Vec<_>>());
    let mut swapped = z.clone();
    for c in 0..z.ncols() {
        for i in 0..n {
            swapped[(i, c)] = z[(i + n, c)];
            swapped[(i + n, c)] = z[(i, c)];
        }
    }
    // τ_x restricted to the zero space has eigenvalues ±1 in equal numbers
    let t = SymmetricEigen::new(z.transpose() * swapped);
    let mut idx: Vec<usize> = (0..zero.len()).collect();
    idx.sort_by(|&a, &b| t.eigenvalues[b].total_cmp(&t.eigenvalues[a]));
    let m = zero.len() / 2;
    for i in 0..m {
        let p = &z * t.eigenvectors.column(idx[i]);
        let q = &z * t.eigenvectors.column(idx[m + i]);
        modes.push((p + q) * std::f64::consts::FRAC_1_SQRT_2);
    }
    modes
}

fn solve_sector(n: usize, b: f64, t: f64, delta: f64, parity: Parity) -> SectorSolution {
    let h = bdg_matrix(n, b, t, delta, parity);
    let eig = SymmetricEigen::new(h.clone());
    let mut order: Vec<usize> = (0..2 * n).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[y].total_cmp(&eig.eigenvalues[x]));
    let modes = quasiparticle_modes(&eig.eigenvectors, &eig.eigenvalues, &order, n);
    let mut gamma = DMatrix::zeros(2 * n, 2 * n);
    for u in &modes {
        gamma += u * u.transpose();
    }
    let mut energies: Vec<f64> = order[..n].iter().map(|&k| eig.eigenvalues[k].max(0.0)).collect();
    energies.sort_by(f64::total_cmp);
    let mut majorana = majorana_covariance(&gamma, n);
    let mut excited = false;
    if (pfaffian(&majorana) > 0.0) != (parity == Parity::Even) {
        // occupy the softest quasiparticle: swap w for its partner τ_x w
        let w = modes[n - 1].clone();
        let mut partner = w.clone();
        for i in 0..n {
            partner[i] = w[i + n];
            partner[i + n] = w[i];
        }
        gamma -= &w * w.transpose();
        gamma += &partner * partner.transpose();
        majorana = majorana_covariance(&gamma, n);
        excited = true;
    }
    let trace_a = n as f64 * b;
    let energy = -0.5 * (&h * &gamma).trace() + 0.5 * trace_a - 0.5 * b * n as f64;
    SectorSolution { parity, energies, energy, excited, majorana }
}

/// Solves both parity sectors of a nearest-neighbor XY chain with `n >= 3`.
pub fn jw_ground(couplings: &CouplingProfile, b: f64) -> Result<FermionSpectrum> {
    let n = couplings.n();
    if n < 3 {
        return Err(Error::InvalidChain(format!("Jordan-Wigner solver needs n >= 3, got {n}")));
    }
    if !couplings.is_nearest_neighbor() {
        return Err(Error::NotNearestNeighbor("couplings beyond separation 1".into()));
    }
    if couplings.real_table(Axis::Z).iter().any(|&v| v != 0.0) {
        return Err(Error::NotNearestNeighbor("v^z must vanish".into()));
    }
    let w = |axis: Axis| couplings.real(axis, 1) + couplings.real(axis, n - 1);
    let (wx, wy) = (w(Axis::X), w(Axis::Y));
    let (t, delta) = ((wx + wy) / 4.0, (wx - wy) / 4.0);
    Ok(FermionSpectrum {
        n,
        b,
        hopping: t,
        pairing: delta,
        even: solve_sector(n, b, t, delta, Parity::Even),
        odd: solve_sector(n, b, t, delta, Parity::Odd),
    })
}

fn sub_pfaffian(m: &DMatrix<f64>, idx: &[usize]) -> f64 {
    let k = idx.len();
    pfaffian(&DMatrix::from_fn(k, k, |r, c| m[(idx[r], idx[c])]))
}

/// `([α_x, α_y, α_z], <s_z>)` at separation `j` in the sector's state.
pub fn sector_correlations(sector: &SectorSolution, j: usize) -> ([f64; 3], f64) {
    let m = &sector.majorana;
    let n = m.nrows() / 2;
    let sz = -0.5 * m[(0, 1)];
    let j = j % n;
    if j == 0 {
        return ([0.25; 3], sz);
    }
    let az = 0.25 * sub_pfaffian(m, &[0, 1, 2 * j, 2 * j + 1]);
    let xs: Vec<usize> = (1..=2 * j).collect();
    let ax = 0.25 * sub_pfaffian(m, &xs);
    let mut ys: Vec<usize> = vec![0];
    ys.extend(2..2 * j);
    ys.push(2 * j + 1);
    let ay = -0.25 * sub_pfaffian(m, &ys);
    ([ax, ay, az], sz)
}

/// Correlators of the global ground state.
pub fn jw_correlations(spectrum: &FermionSpectrum, j: usize) -> ([f64; 3], f64) {
    sector_correlations(spectrum.ground(), j)
}
