//! Chain geometry, coupling families and their lattice Fourier transforms.
//!
//! Couplings follow the cyclic convention `v(j) = v(n - j)`, and the chain
//! Hamiltonian is `H = b Σ_i S_zi - Σ_μ Σ_{i≠j} v^μ(i-j) S_μi S_μj`, so an
//! unordered pair at separation `j` is bound with total weight `2 v^μ(j)`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Absolute tolerance on the imaginary residue of a symmetric transform.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Spin axis label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }
}

/// Site count, transverse field and temperature of a cyclic chain.
///
/// Energies are in the units of the coupling amplitudes and `k_B = 1`.
/// `temperature == 0.0` selects the exact ground-state limit everywhere.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChainSpec {
    pub n: usize,
    pub b: f64,
    pub temperature: f64,
}

impl ChainSpec {
    pub fn new(n: usize, b: f64, temperature: f64) -> Result<Self> {
        let spec = Self { n, b, temperature };
        spec.validate()?;
        Ok(spec)
    }

    pub fn ground(n: usize, b: f64) -> Result<Self> {
        Self::new(n, b, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidChain(format!("n = {} < 2", self.n)));
        }
        if !self.b.is_finite() {
            return Err(Error::InvalidChain(format!("field b = {}", self.b)));
        }
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return Err(Error::InvalidChain(format!("temperature T = {}", self.temperature)));
        }
        Ok(())
    }

    pub fn is_ground(&self) -> bool {
        self.temperature == 0.0
    }

    /// Inverse temperature, `None` at `T = 0`.
    pub fn beta(&self) -> Option<f64> {
        (self.temperature > 0.0).then(|| 1.0 / self.temperature)
    }

    pub fn with_field(self, b: f64) -> Self {
        Self { b, ..self }
    }

    pub fn with_temperature(self, temperature: f64) -> Self {
        Self { temperature, ..self }
    }
}

/// Shape of the real-space coupling profile.
#[derive(Clone, Debug, PartialEq)]
pub enum FamilyKind {
    /// `v(j) ∝ 1/d(j)^alpha` with cyclic distance `d(j) = min(j, n - j)`.
    PowerLaw {
        alpha: f64,
    },
    /// Constant strength up to cyclic distance `range`.
    FiniteRangeConstant {
        range: usize,
    },
    /// Every pair identically coupled (`PowerLaw` with `alpha = 0`).
    Lipkin,
    NearestNeighbor,
    /// Unnormalized profile `r(j)`, `j = 1..n-1`; `v^μ(j) = v^μ r(j)`.
    Custom(Vec<f64>),
}

/// A coupling family with per-axis amplitudes.
///
/// For every generated kind the table is normalized so that
/// `ṽ^μ_0 = Σ_j v^μ(j) = v^μ`.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingFamily {
    pub kind: FamilyKind,
    pub vx: f64,
    pub vy: f64,
    pub vz: f64,
}

impl CouplingFamily {
    pub fn new(kind: FamilyKind, vx: f64, vy: f64, vz: f64) -> Self {
        Self { kind, vx, vy, vz }
    }

    /// `XY`-type family with `v^x = 1`, `v^y = chi`, `v^z = vz`.
    pub fn xy(kind: FamilyKind, chi: f64, vz: f64) -> Self {
        Self::new(kind, 1.0, chi, vz)
    }

    pub fn amplitudes(&self) -> [f64; 3] {
        [self.vx, self.vy, self.vz]
    }

    /// Real-space range profile `r(j)` for `j = 0..n-1` (`r(0) = 0`).
    pub fn range_profile(&self, n: usize) -> Result<Vec<f64>> {
        if n < 2 {
            return Err(Error::InvalidChain(format!("n = {n} < 2")));
        }
        let dist = |j: usize| j.min(n - j);
        let mut r = vec![0.0; n];
        match &self.kind {
            FamilyKind::Custom(table) => {
                if table.len() != n - 1 {
                    return Err(Error::InvalidFamilyParameter(format!(
                        "custom table has length {}, expected n - 1 = {}",
                        table.len(),
                        n - 1
                    )));
                }
                r[1..].copy_from_slice(table);
                check_symmetric(&r).map_err(|e| Error::InvalidFamilyParameter(e.to_string()))?;
                return Ok(r);
            }
            FamilyKind::PowerLaw { alpha } => {
                if !(alpha.is_finite() && *alpha >= 0.0) {
                    return Err(Error::InvalidFamilyParameter(format!(
                        "power-law exponent alpha = {alpha} must be >= 0"
                    )));
                }
                for (j, rj) in r.iter_mut().enumerate().skip(1) {
                    *rj = (dist(j) as f64).powf(-alpha);
                }
            }
            FamilyKind::Lipkin => r[1..].fill(1.0),
            FamilyKind::FiniteRangeConstant { range } => {
                if *range < 1 || *range > n / 2 {
                    return Err(Error::InvalidFamilyParameter(format!("range L = {range} outside 1..={}", n / 2)));
                }
                for (j, rj) in r.iter_mut().enumerate().skip(1) {
                    if dist(j) <= *range {
                        *rj = 1.0;
                    }
                }
            }
            FamilyKind::NearestNeighbor => {
                for (j, rj) in r.iter_mut().enumerate().skip(1) {
                    if dist(j) == 1 {
                        *rj = 1.0;
                    }
                }
            }
        }
        let total: f64 = r.iter().sum();
        r.iter_mut().for_each(|x| *x /= total);
        Ok(r)
    }
}

/// Real-space and Fourier coupling tables of a chain.
///
/// Tables are stored with length `n`; entry `j = 0` of the real-space table is
/// the (absent) self coupling and is always zero.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingProfile {
    n: usize,
    real_space: [Vec<f64>; 3],
    fourier: [Vec<f64>; 3],
}

impl CouplingProfile {
    /// Builds a profile from explicit per-axis tables `v^μ(j)`, `j = 1..n-1`.
    pub fn from_tables(n: usize, tables: [&[f64]; 3]) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidChain(format!("n = {n} < 2")));
        }
        let mut real_space: [Vec<f64>; 3] = Default::default();
        let mut fourier: [Vec<f64>; 3] = Default::default();
        for axis in 0..3 {
            let table = tables[axis];
            if table.len() != n - 1 {
                return Err(Error::InvalidFamilyParameter(format!(
                    "table length {} != n - 1 = {}",
                    table.len(),
                    n - 1
                )));
            }
            fourier[axis] = fourier_couplings(table)?;
            let mut full = Vec::with_capacity(n);
            full.push(0.0);
            full.extend_from_slice(table);
            real_space[axis] = full;
        }
        Ok(Self { n, real_space, fourier })
    }

    /// Free chain: all couplings zero.
    pub fn zero(n: usize) -> Result<Self> {
        let z = vec![0.0; n.saturating_sub(1)];
        Self::from_tables(n, [&z, &z, &z])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `v^μ(j)` for `j` taken modulo `n` (`v(0) = 0`).
    pub fn real(&self, axis: Axis, j: usize) -> f64 {
        self.real_space[axis.index()][j % self.n]
    }

    /// `ṽ^μ_k` for `k` taken modulo `n`.
    pub fn fourier(&self, axis: Axis, k: usize) -> f64 {
        self.fourier[axis.index()][k % self.n]
    }

    /// Full real-space table (length `n`, entry 0 is zero).
    pub fn real_table(&self, axis: Axis) -> &[f64] {
        &self.real_space[axis.index()]
    }

    pub fn fourier_table(&self, axis: Axis) -> &[f64] {
        &self.fourier[axis.index()]
    }

    /// `(ṽ^x_k, ṽ^y_k, ṽ^z_k)`.
    pub fn mode(&self, k: usize) -> [f64; 3] {
        Axis::ALL.map(|a| self.fourier(a, k))
    }

    /// Total couplings `ṽ^μ_0`.
    pub fn total(&self) -> [f64; 3] {
        self.mode(0)
    }

    /// Copy with `v^μ(j)` and `v^μ(n - j)` shifted by `delta` (once if `j = n/2`).
    pub fn perturbed(&self, axis: Axis, j: usize, delta: f64) -> Result<Self> {
        let mut tables = self.real_space.clone();
        let t = &mut tables[axis.index()];
        t[j] += delta;
        if self.n - j != j {
            t[self.n - j] += delta;
        }
        Self::from_tables(self.n, [&tables[0][1..], &tables[1][1..], &tables[2][1..]])
    }

    /// Largest `|v^μ(j)|` over all axes and separations.
    pub fn max_abs(&self) -> f64 {
        self.real_space.iter().flat_map(|t| t.iter()).fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    /// True when only separations `1` and `n - 1` carry couplings.
    pub fn is_nearest_neighbor(&self) -> bool {
        self.real_space.iter().all(|t| t.iter().enumerate().all(|(j, &v)| v == 0.0 || j == 1 || j == self.n - 1))
    }
}

/// Builds the coupling profile of `family` on an `n`-site ring.
pub fn build_couplings(family: &CouplingFamily, n: usize) -> Result<CouplingProfile> {
    let r = family.range_profile(n)?;
    let amps = family.amplitudes();
    let tables: Vec<Vec<f64>> = amps.iter().map(|&a| r[1..].iter().map(|&x| a * x).collect()).collect();
    CouplingProfile::from_tables(n, [&tables[0], &tables[1], &tables[2]])
}

fn check_symmetric(full: &[f64]) -> Result<()> {
    let n = full.len();
    let scale = full.iter().fold(0.0_f64, |m, x| m.max(x.abs())).max(1.0);
    for j in 1..n {
        if (full[j] - full[n - j]).abs() > SYMMETRY_TOL * scale {
            return Err(Error::SymmetryViolation(format!("v({j}) = {} but v({}) = {}", full[j], n - j, full[n - j])));
        }
    }
    Ok(())
}

/// Direct `O(n^2)` transform `ṽ_k = Σ_{j=1}^{n-1} e^{-i2πkj/n} v(j)` of a
/// symmetric table `v(1..n-1)`; returns the `n` real values.
pub fn fourier_couplings(table: &[f64]) -> Result<Vec<f64>> {
    let n = table.len() + 1;
    let mut full = Vec::with_capacity(n);
    full.push(0.0);
    full.extend_from_slice(table);
    check_symmetric(&full)?;
    let scale = table.iter().map(|x| x.abs()).sum::<f64>().max(1.0);
    (0..n)
        .map(|k| {
            let (mut re, mut im) = (0.0, 0.0);
            for (j, &v) in full.iter().enumerate().skip(1) {
                // Reduce kj mod n first so the phase stays accurate for large n.
                let phase = 2.0 * PI * ((k * j) % n) as f64 / n as f64;
                re += v * phase.cos();
                im -= v * phase.sin();
            }
            if im.abs() > SYMMETRY_TOL * scale {
                return Err(Error::SymmetryViolation(format!("imaginary residue {im:e} at k = {k}")));
            }
            Ok(re)
        })
        .collect()
}

/// Inverse transform `v(j) = n^{-1} Σ_k e^{i2πkj/n} ṽ_k` for `j = 0..n-1`.
pub fn inverse_fourier(fourier: &[f64]) -> Vec<f64> {
    let n = fourier.len();
    (0..n)
        .map(|j| {
            fourier
                .iter()
                .enumerate()
                .map(|(k, &f)| f * (2.0 * PI * ((k * j) % n) as f64 / n as f64).cos())
                .sum::<f64>()
                / n as f64
        })
        .collect()
}

/// Cyclic cosine sum `n^{-1} Σ_k cos(2πkj/n) g_k`, used to map per-mode
/// quantities back to separations.
pub fn cosine_sum(values: &[f64], j: usize) -> f64 {
    let n = values.len();
    values.iter().enumerate().map(|(k, &g)| g * (2.0 * PI * ((k * j) % n) as f64 / n as f64).cos()).sum::<f64>()
        / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force_fourier(v: &[f64], k: usize) -> (f64, f64) {
        let n = v.len();
        let mut acc = num_complex::Complex64::new(0.0, 0.0);
        for (j, &x) in v.iter().enumerate() {
            acc += x * num_complex::Complex64::from_polar(1.0, -2.0 * PI * (k * j) as f64 / n as f64);
        }
        (acc.re, acc.im)
    }

    #[test]
    fn lipkin_table_and_transform() {
        let fam = CouplingFamily::new(FamilyKind::Lipkin, 1.0, 0.5, 0.0);
        let p = build_couplings(&fam, 18).unwrap();
        for j in 1..18 {
            assert!((p.real(Axis::X, j) - 1.0 / 17.0).abs() < 1e-15);
        }
        for k in 0..18 {
            let expected = (18.0 * (k == 0) as i32 as f64 - 1.0) / 17.0;
            assert!((p.fourier(Axis::X, k) - expected).abs() < 1e-13, "k={k}");
        }
    }

    #[test]
    fn nearest_neighbor_transform_is_cosine() {
        let fam = CouplingFamily::new(FamilyKind::NearestNeighbor, 1.0, 0.0, 0.0);
        let p = build_couplings(&fam, 4).unwrap();
        let expected = [1.0, 0.0, -1.0, 0.0];
        for k in 0..4 {
            assert!((p.fourier(Axis::X, k) - expected[k]).abs() < 1e-15);
        }
        let p6 = build_couplings(&fam, 6).unwrap();
        for k in 0..6 {
            let c = (2.0 * PI * k as f64 / 6.0).cos();
            assert!((p6.fourier(Axis::X, k) - c).abs() < 1e-14);
        }
    }

    #[test]
    fn finite_range_constant_table() {
        let fam = CouplingFamily::new(FamilyKind::FiniteRangeConstant { range: 3 }, 1.0, 0.0, 0.0);
        let p = build_couplings(&fam, 18).unwrap();
        for j in 1..18 {
            let expected = if [1, 2, 3, 15, 16, 17].contains(&j) { 1.0 / 6.0 } else { 0.0 };
            assert_eq!(p.real(Axis::X, j), expected, "j={j}");
        }
        assert!((p.fourier(Axis::X, 0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_table_transforms_to_zero() {
        let f = fourier_couplings(&[0.0; 7]).unwrap();
        assert!(f.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn power_law_matches_brute_force_sum() {
        let fam = CouplingFamily::new(FamilyKind::PowerLaw { alpha: 2.0 }, 1.0, 0.0, 0.0);
        let p = build_couplings(&fam, 8).unwrap();
        let v = p.real_table(Axis::X);
        assert!((p.fourier(Axis::X, 0) - 1.0).abs() < 1e-14);
        for k in 0..8 {
            let (re, im) = brute_force_fourier(v, k);
            assert!(im.abs() < 1e-14);
            assert!((p.fourier(Axis::X, k) - re).abs() < 1e-14);
        }
        // even n: the j = n/2 bond sits at a self-symmetric position and is counted once
        let raw: f64 = (1..8).map(|j: usize| 1.0 / (j.min(8 - j) as f64).powi(2)).sum();
        assert!((p.real(Axis::X, 4) - 1.0 / 16.0 / raw).abs() < 1e-15);
    }

    #[test]
    fn family_parameter_errors() {
        let n = 10;
        let bad_alpha = CouplingFamily::new(FamilyKind::PowerLaw { alpha: -1.0 }, 1.0, 0.0, 0.0);
        assert!(matches!(build_couplings(&bad_alpha, n), Err(Error::InvalidFamilyParameter(_))));
        for range in [0, 6] {
            let fam = CouplingFamily::new(FamilyKind::FiniteRangeConstant { range }, 1.0, 0.0, 0.0);
            assert!(matches!(build_couplings(&fam, n), Err(Error::InvalidFamilyParameter(_))));
        }
        let mut table = vec![0.0; n - 1];
        table[0] = 1.0;
        let asym = CouplingFamily::new(FamilyKind::Custom(table), 1.0, 0.0, 0.0);
        assert!(matches!(build_couplings(&asym, n), Err(Error::InvalidFamilyParameter(_))));
        assert!(matches!(fourier_couplings(&[1.0, 0.0, 0.0]), Err(Error::SymmetryViolation(_))));
    }

    #[test]
    fn perturbation_keeps_symmetry() {
        let fam = CouplingFamily::new(FamilyKind::NearestNeighbor, 1.0, 0.5, 0.0);
        let p = build_couplings(&fam, 8).unwrap();
        let q = p.perturbed(Axis::Y, 3, 0.1).unwrap();
        assert_eq!(q.real(Axis::Y, 3), 0.1);
        assert_eq!(q.real(Axis::Y, 5), 0.1);
        let h = p.perturbed(Axis::Y, 4, 0.1).unwrap();
        assert!((h.fourier(Axis::Y, 0) - 0.6).abs() < 1e-15);
    }
}
