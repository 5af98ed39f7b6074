//! Truncated Fock-space states of the amplifier families: two-mode
//! macrostates, coherent-state superpositions, and seed vectors.
//!
//! Amplitude coefficients are evaluated in log-scaled arithmetic so that
//! cutoffs of a few hundred photons per mode stay clear of overflow.
//! Builders never renormalize: the tail mass lost to truncation is
//! measured and reported as a deficit instead.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::specfun::ln_factorial;
use crate::{Error, Result, C64};

/// Hyperbolic functions of the amplifier gain, computed once.
#[derive(Clone, Copy, Debug)]
pub struct GainParams {
    /// Dimensionless gain, g ≥ 0.
    pub g: f64,
    /// cosh g
    pub c: f64,
    /// sinh g
    pub s: f64,
    /// tanh g
    pub gamma: f64,
    /// Mean spontaneous photon number per polarization, sinh²g.
    pub mean_spontaneous: f64,
}

impl GainParams {
    pub fn new(g: f64) -> Result<Self> {
        if !g.is_finite() || g < 0.0 {
            return Err(Error::Domain("gain must be finite and non-negative"));
        }
        let c = libm::cosh(g);
        let s = libm::sinh(g);
        Ok(GainParams {
            g,
            c,
            s,
            gamma: s / c,
            mean_spontaneous: s * s,
        })
    }
}

/// Cutoff policy for truncated expansions.
#[derive(Clone, Copy, Debug)]
pub enum CutoffSpec {
    /// Derive a cutoff from the state parameters, measure the tail mass
    /// against `deficit`, and escalate once before giving up.
    Auto {
        /// Largest acceptable truncation deficit.
        deficit: f64,
    },
    /// Highest retained photon number per mode. The deficit is measured
    /// and recorded but not enforced.
    Fixed(usize),
}

impl Default for CutoffSpec {
    fn default() -> Self {
        CutoffSpec::Auto { deficit: 1e-8 }
    }
}

/// Polarization basis in which a two-mode state's amplitudes are indexed.
/// Bases are never mixed silently; every builder tags its output.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BasisLabel {
    /// The ± linear-polarization pair.
    PlusMinus,
    /// Horizontal/vertical pair.
    Hv,
    /// The equatorial pair (φ, φ⊥); the angle is carried along.
    PhiEquatorial(f64),
}

/// Seed selection for the collinear amplifier.
#[derive(Clone, Copy, Debug)]
pub enum CollinearSeed {
    /// Single photon in the + mode.
    Plus,
    /// Single photon in the − mode.
    Minus,
    /// Equatorial superposition cos(φ/2)|Φ⁺⟩ + i sin(φ/2)|Φ⁻⟩.
    Equatorial(f64),
}

/// Seed selection for the non-degenerate H/V amplifier.
#[derive(Clone, Copy, Debug)]
pub enum HvSeed {
    H,
    V,
}

/// Relative sign inside a coherent-state superposition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CssSign {
    Plus,
    Minus,
}

/// Parameters of the coherent-state superposition
/// N/√2 (|αe^{iφ}⟩ ± |αe^{−iφ}⟩) with real α ≥ 0.
#[derive(Clone, Copy, Debug)]
pub struct CssParams {
    pub alpha: f64,
    pub phi: f64,
    pub sign: CssSign,
}

impl CssParams {
    /// Squared normalization factor N±². Errors when the superposition
    /// degenerates (the two coherent components cancel).
    pub fn norm_sq_factor(&self) -> Result<f64> {
        let a2 = self.alpha * self.alpha;
        let overlap = libm::exp(-2.0 * a2 * libm::sin(self.phi) * libm::sin(self.phi))
            * libm::cos(a2 * libm::sin(2.0 * self.phi));
        let denom = match self.sign {
            CssSign::Plus => 1.0 + overlap,
            CssSign::Minus => 1.0 - overlap,
        };
        if denom <= 1e-14 {
            return Err(Error::Domain("coherent superposition is degenerate"));
        }
        Ok(1.0 / denom)
    }
}

/// Photon numbers of a generic |N, M⟩ input.
#[derive(Clone, Copy, Debug)]
pub struct SeedSpec {
    pub n: u32,
    pub m: u32,
}

/// Pure two-mode state over a truncated Fock basis, amplitudes indexed
/// row-major as `n_a * dim_b + n_b`.
#[derive(Clone, Debug)]
pub struct TwoModeFockState {
    dims: (usize, usize),
    amps: Vec<C64>,
    pub basis: BasisLabel,
    pub trace_deficit: f64,
}

impl TwoModeFockState {
    /// Wraps raw amplitudes; the truncation deficit is taken from the
    /// missing norm.
    pub fn from_amplitudes(
        dims: (usize, usize),
        amps: Vec<C64>,
        basis: BasisLabel,
    ) -> Result<Self> {
        if amps.len() != dims.0 * dims.1 {
            return Err(Error::Internal("amplitude array does not match dims"));
        }
        let norm_sq: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        Ok(TwoModeFockState {
            dims,
            amps,
            basis,
            trace_deficit: (1.0 - norm_sq).max(0.0),
        })
    }

    /// Dimension (cutoff + 1) of each mode.
    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn amp(&self, n_a: usize, n_b: usize) -> C64 {
        self.amps[n_a * self.dims.1 + n_b]
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Mean photon number in each mode, from the stored amplitudes.
    pub fn mean_occupations(&self) -> (f64, f64) {
        let (da, db) = self.dims;
        let mut na = 0.0;
        let mut nb = 0.0;
        for i in 0..da {
            for j in 0..db {
                let p = self.amps[i * db + j].norm_sqr();
                na += i as f64 * p;
                nb += j as f64 * p;
            }
        }
        (na, nb)
    }

    /// Inner product ⟨self|other⟩ over the common truncation.
    pub fn overlap(&self, other: &TwoModeFockState) -> C64 {
        let da = self.dims.0.min(other.dims.0);
        let db = self.dims.1.min(other.dims.1);
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..da {
            for j in 0..db {
                acc += self.amp(i, j).conj() * other.amp(i, j);
            }
        }
        acc
    }

    pub fn to_density(&self) -> DensityMatrix {
        let d = self.amps.len();
        let mat = DMatrix::from_fn(d, d, |r, c| self.amps[r] * self.amps[c].conj());
        DensityMatrix {
            dims: self.dims,
            mat,
            trace_deficit: self.trace_deficit,
        }
    }
}

/// Pure single-mode state over a truncated Fock basis.
#[derive(Clone, Debug)]
pub struct SingleModeState {
    amps: Vec<C64>,
    pub trace_deficit: f64,
}

impl SingleModeState {
    /// Wraps raw amplitudes; the truncation deficit is taken from the
    /// missing norm.
    pub fn from_amplitudes(amps: Vec<C64>) -> Self {
        let norm_sq: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        SingleModeState {
            amps,
            trace_deficit: (1.0 - norm_sq).max(0.0),
        }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amp(&self, n: usize) -> C64 {
        self.amps[n]
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn mean_photons(&self) -> f64 {
        self.amps
            .iter()
            .enumerate()
            .map(|(n, a)| n as f64 * a.norm_sqr())
            .sum()
    }

    pub fn to_density(&self) -> DensityMatrix {
        let d = self.amps.len();
        let mat = DMatrix::from_fn(d, d, |r, c| self.amps[r] * self.amps[c].conj());
        DensityMatrix {
            dims: (d, 1),
            mat,
            trace_deficit: self.trace_deficit,
        }
    }
}

/// Hermitian operator over the flattened (one- or two-mode) Fock basis.
/// Single-mode operators use `dims = (d, 1)`.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    dims: (usize, usize),
    pub mat: DMatrix<C64>,
    pub trace_deficit: f64,
}

/// Mode selector for two-mode operations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Mode {
    A,
    B,
}

impl DensityMatrix {
    pub fn new(dims: (usize, usize), mat: DMatrix<C64>, trace_deficit: f64) -> Result<Self> {
        if mat.nrows() != dims.0 * dims.1 || !mat.is_square() {
            return Err(Error::Internal("density matrix shape mismatch"));
        }
        Ok(DensityMatrix {
            dims,
            mat,
            trace_deficit,
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn flat_dim(&self) -> usize {
        self.dims.0 * self.dims.1
    }

    /// Flat index of a two-mode basis ket |n_a, n_b⟩.
    pub fn index(&self, n_a: usize, n_b: usize) -> usize {
        n_a * self.dims.1 + n_b
    }

    pub fn element(&self, row: (usize, usize), col: (usize, usize)) -> C64 {
        self.mat[(self.index(row.0, row.1), self.index(col.0, col.1))]
    }

    pub fn trace(&self) -> f64 {
        (0..self.flat_dim()).map(|i| self.mat[(i, i)].re).sum()
    }

    /// Largest |ρ − ρ†| entry.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.flat_dim();
        let mut worst: f64 = 0.0;
        for r in 0..d {
            for c in r..d {
                let diff = (self.mat[(r, c)] - self.mat[(c, r)].conj()).norm();
                if diff > worst {
                    worst = diff;
                }
            }
        }
        worst
    }

    /// Diagonal weights in basis order; tiny negative rounding is kept as-is.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.flat_dim()).map(|i| self.mat[(i, i)].re).collect()
    }

    /// Mean photon number per mode (single-mode operators report mode B as 0).
    pub fn mean_occupations(&self) -> (f64, f64) {
        let (da, db) = self.dims;
        let mut na = 0.0;
        let mut nb = 0.0;
        for i in 0..da {
            for j in 0..db {
                let p = self.mat[(self.index(i, j), self.index(i, j))].re;
                na += i as f64 * p;
                nb += j as f64 * p;
            }
        }
        (na, nb)
    }
}

/// Reduces a two-mode density matrix to one mode.
pub fn partial_trace(rho: &DensityMatrix, keep: Mode) -> Result<DensityMatrix> {
    let (da, db) = rho.dims();
    if db == 1 && keep == Mode::B {
        return Err(Error::Domain("operator has no second mode to keep"));
    }
    let dim = match keep {
        Mode::A => da,
        Mode::B => db,
    };
    let mut mat = DMatrix::from_element(dim, dim, C64::new(0.0, 0.0));
    match keep {
        Mode::A => {
            for r in 0..da {
                for c in 0..da {
                    let mut acc = C64::new(0.0, 0.0);
                    for j in 0..db {
                        acc += rho.mat[(r * db + j, c * db + j)];
                    }
                    mat[(r, c)] = acc;
                }
            }
        }
        Mode::B => {
            for r in 0..db {
                for c in 0..db {
                    let mut acc = C64::new(0.0, 0.0);
                    for i in 0..da {
                        acc += rho.mat[(i * db + r, i * db + c)];
                    }
                    mat[(r, c)] = acc;
                }
            }
        }
    }
    DensityMatrix::new((dim, 1), mat, rho.trace_deficit)
}

/// Tensor product of two single-mode density matrices into a two-mode
/// matrix, flat row-major in the second factor.
pub fn tensor_product(a: &DensityMatrix, b: &DensityMatrix) -> Result<DensityMatrix> {
    if a.dims().1 != 1 || b.dims().1 != 1 {
        return Err(Error::Domain("tensor factors must be single-mode"));
    }
    let da = a.dims().0;
    let db = b.dims().0;
    let mut mat = DMatrix::from_element(da * db, da * db, C64::new(0.0, 0.0));
    for i in 0..da {
        for k in 0..da {
            let aik = a.mat[(i, k)];
            if aik.norm_sqr() == 0.0 {
                continue;
            }
            for j in 0..db {
                for q in 0..db {
                    mat[(i * db + j, k * db + q)] = aik * b.mat[(j, q)];
                }
            }
        }
    }
    let deficit = a.trace_deficit + b.trace_deficit - a.trace_deficit * b.trace_deficit;
    DensityMatrix::new((da, db), mat, deficit)
}

/// Fock amplitudes e^{−|a|²/2} aⁿ/√(n!) of a coherent state.
pub fn coherent_amplitudes(amplitude: C64, dim: usize) -> Vec<C64> {
    let mut amps = vec![C64::new(0.0, 0.0); dim];
    let mut cur = C64::new(libm::exp(-0.5 * amplitude.norm_sqr()), 0.0);
    for (n, slot) in amps.iter_mut().enumerate() {
        *slot = cur;
        cur *= amplitude / libm::sqrt((n + 1) as f64);
    }
    amps
}

// Tail masses of the amplified families decay geometrically in the photon
// number, so one escalation sized from the measured miss is enough.
fn escalate_cutoff(n_max: usize, achieved: f64, requested: f64, gamma: f64) -> usize {
    let extra = if gamma > 0.0 && gamma < 1.0 && achieved > requested {
        let step = libm::log(requested / achieved) / libm::log(gamma);
        libm::ceil(step) as usize
    } else {
        64
    };
    n_max + extra + 16
}

fn check_auto_deficit(deficit: f64) -> Result<()> {
    if !(deficit > 0.0 && deficit < 1.0) {
        return Err(Error::Domain("requested deficit must lie in (0, 1)"));
    }
    Ok(())
}

// Shared build-measure-escalate driver. `fill` returns amplitudes and
// their squared norm for a given per-mode cutoff.
fn resolve_cutoff<T, F>(cutoff: CutoffSpec, base: usize, gamma: f64, mut fill: F) -> Result<(T, f64)>
where
    F: FnMut(usize) -> (T, f64),
{
    match cutoff {
        CutoffSpec::Fixed(n_max) => {
            let (amps, norm_sq) = fill(n_max);
            Ok((amps, (1.0 - norm_sq).max(0.0)))
        }
        CutoffSpec::Auto { deficit } => {
            check_auto_deficit(deficit)?;
            let (amps, norm_sq) = fill(base);
            let achieved = (1.0 - norm_sq).max(0.0);
            if achieved <= deficit {
                return Ok((amps, achieved));
            }
            let bumped = escalate_cutoff(base, achieved, deficit, gamma);
            let (amps, norm_sq) = fill(bumped);
            let achieved = (1.0 - norm_sq).max(0.0);
            if achieved <= deficit {
                Ok((amps, achieved))
            } else {
                Err(Error::Truncation {
                    requested: deficit,
                    achieved,
                })
            }
        }
    }
}

fn auto_base_cutoff(gain: GainParams) -> usize {
    libm::ceil(12.0 * gain.mean_spontaneous + 25.0) as usize
}

// Coefficient (Γ/2)^i (−Γ/2)^j √((2i+1)!) √((2j)!) / (C² i! j!), the
// weight of |2i+1, 2j⟩ in a one-photon-seeded collinear macrostate.
fn collinear_coeff(gain: GainParams, i: usize, j: usize) -> f64 {
    if gain.gamma == 0.0 {
        return if i == 0 && j == 0 { 1.0 } else { 0.0 };
    }
    let lg_half = libm::log(gain.gamma / 2.0);
    let ln_mag = (i + j) as f64 * lg_half
        + 0.5 * (ln_factorial(2 * i as u64 + 1) + ln_factorial(2 * j as u64))
        - ln_factorial(i as u64)
        - ln_factorial(j as u64)
        - 2.0 * libm::log(gain.c);
    let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
    sign * libm::exp(ln_mag)
}

fn collinear_fill(gain: GainParams, seed: CollinearSeed, n_max: usize) -> (Vec<C64>, f64) {
    let dim = n_max + 1;
    let mut amps = vec![C64::new(0.0, 0.0); dim * dim];
    let mut norm_sq = 0.0;
    let (w_plus, w_minus) = match seed {
        CollinearSeed::Plus => (C64::new(1.0, 0.0), C64::new(0.0, 0.0)),
        CollinearSeed::Minus => (C64::new(0.0, 0.0), C64::new(1.0, 0.0)),
        CollinearSeed::Equatorial(phi) => (
            C64::new(libm::cos(phi / 2.0), 0.0),
            C64::new(0.0, libm::sin(phi / 2.0)),
        ),
    };
    for i in 0..=(n_max.saturating_sub(1)) / 2 {
        for j in 0..=n_max / 2 {
            let coeff = collinear_coeff(gain, i, j);
            if coeff == 0.0 {
                continue;
            }
            // Odd comb in the seeded mode, even comb in the conjugate one;
            // the two seeds occupy disjoint index sets.
            let odd = 2 * i + 1;
            let even = 2 * j;
            if w_plus.norm_sqr() > 0.0 {
                let a = w_plus * coeff;
                amps[odd * dim + even] += a;
                norm_sq += a.norm_sqr();
            }
            if w_minus.norm_sqr() > 0.0 {
                let a = w_minus * coeff;
                amps[even * dim + odd] += a;
                norm_sq += a.norm_sqr();
            }
        }
    }
    (amps, norm_sq)
}

/// Builds the collinear amplified macrostate for a one-photon seed, in
/// the ± basis. The equatorial seed returns the superposition
/// cos(φ/2)|Φ⁺⟩ + i sin(φ/2)|Φ⁻⟩; its two branches occupy disjoint
/// parity combs, so the result stays normalized.
pub fn build_collinear_macrostate(
    gain: GainParams,
    seed: CollinearSeed,
    cutoff: CutoffSpec,
) -> Result<TwoModeFockState> {
    let base = auto_base_cutoff(gain);
    let (amps, deficit) = resolve_cutoff(cutoff, base, gain.gamma, |n_max| {
        collinear_fill(gain, seed, n_max)
    })?;
    let dim = libm::sqrt(amps.len() as f64) as usize;
    Ok(TwoModeFockState {
        dims: (dim, dim),
        amps,
        basis: BasisLabel::PlusMinus,
        trace_deficit: deficit,
    })
}

/// Builds the equatorial macrostate in its own (φ, φ⊥) basis, where it
/// factors into the product form with amplitudes
/// (e^{−iφ}Γ/2)^i (−e^{iφ}Γ/2)^j √((2i+1)!) √((2j)!) / (C² i! j!)
/// on |2i+1, 2j⟩.
pub fn build_equatorial_product_state(
    gain: GainParams,
    phi: f64,
    cutoff: CutoffSpec,
) -> Result<TwoModeFockState> {
    let base = auto_base_cutoff(gain);
    let (amps, deficit) = resolve_cutoff(cutoff, base, gain.gamma, |n_max| {
        let dim = n_max + 1;
        let mut amps = vec![C64::new(0.0, 0.0); dim * dim];
        let mut norm_sq = 0.0;
        for i in 0..=(n_max.saturating_sub(1)) / 2 {
            for j in 0..=n_max / 2 {
                let coeff = collinear_coeff(gain, i, j);
                if coeff == 0.0 {
                    continue;
                }
                let phase = C64::from_polar(1.0, phi * (j as f64 - i as f64));
                let a = phase * coeff;
                amps[(2 * i + 1) * dim + 2 * j] = a;
                norm_sq += a.norm_sqr();
            }
        }
        (amps, norm_sq)
    })?;
    let dim = libm::sqrt(amps.len() as f64) as usize;
    Ok(TwoModeFockState {
        dims: (dim, dim),
        amps,
        basis: BasisLabel::PhiEquatorial(phi),
        trace_deficit: deficit,
    })
}

/// Builds the non-degenerate amplified macrostate for a single H or V
/// seed photon: amplitudes Γⁿ √(n+1)/C² on |n+1, n⟩ in the (H, V) index
/// order (mirrored for a V seed).
pub fn build_hv_macrostate(
    gain: GainParams,
    seed: HvSeed,
    cutoff: CutoffSpec,
) -> Result<TwoModeFockState> {
    let base = auto_base_cutoff(gain);
    let (amps, deficit) = resolve_cutoff(cutoff, base, gain.gamma, |n_max| {
        let dim = n_max + 1;
        let mut amps = vec![C64::new(0.0, 0.0); dim * dim];
        let mut norm_sq = 0.0;
        for n in 0..n_max {
            let coeff = if gain.gamma == 0.0 && n > 0 {
                0.0
            } else {
                let mag = if n == 0 {
                    1.0
                } else {
                    libm::exp(n as f64 * libm::log(gain.gamma))
                };
                mag * libm::sqrt((n + 1) as f64) / (gain.c * gain.c)
            };
            if coeff == 0.0 {
                continue;
            }
            let idx = match seed {
                HvSeed::H => (n + 1) * dim + n,
                HvSeed::V => n * dim + (n + 1),
            };
            amps[idx] = C64::new(coeff, 0.0);
            norm_sq += coeff * coeff;
        }
        (amps, norm_sq)
    })?;
    let dim = libm::sqrt(amps.len() as f64) as usize;
    Ok(TwoModeFockState {
        dims: (dim, dim),
        amps,
        basis: BasisLabel::Hv,
        trace_deficit: deficit,
    })
}

/// Builds the normalized coherent-state superposition
/// N±/√2 (|αe^{iφ}⟩ ± |αe^{−iφ}⟩).
pub fn build_css_state(params: CssParams, cutoff: CutoffSpec) -> Result<SingleModeState> {
    if !(params.alpha.is_finite() && params.alpha >= 0.0) {
        return Err(Error::Domain("css amplitude must be finite and non-negative"));
    }
    let norm = libm::sqrt(params.norm_sq_factor()? / 2.0);
    let a = params.alpha;
    let base = libm::ceil(a * a + 10.0 * a + 20.0) as usize;
    let (amps, deficit) = resolve_cutoff(cutoff, base, 0.0, |n_max| {
        let dim = n_max + 1;
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        let mut norm_sq = 0.0;
        for n in 0..dim {
            // ln of e^{−α²/2} αⁿ/√(n!); the α = 0 superposition is vacuum.
            let ln_mag = if a == 0.0 {
                if n == 0 {
                    0.0
                } else {
                    continue;
                }
            } else {
                -0.5 * a * a + n as f64 * libm::log(a) - 0.5 * ln_factorial(n as u64)
            };
            let plus = C64::from_polar(1.0, n as f64 * params.phi);
            let pair = match params.sign {
                CssSign::Plus => plus + plus.conj(),
                CssSign::Minus => plus - plus.conj(),
            };
            let amp = pair * (norm * libm::exp(ln_mag));
            amps[n] = amp;
            norm_sq += amp.norm_sqr();
        }
        (amps, norm_sq)
    })?;
    Ok(SingleModeState {
        amps,
        trace_deficit: deficit,
    })
}

/// Builds the single-mode amplified state for an N-photon seed. The
/// amplitudes come from normal-ordering the squeezer: a double sum over
/// j pairs removed from the seed and k pairs created,
/// c_m = Σ (−Γ/2)^j (Γ/2)^k √(N!) √(m!) C^{−(N−2j)−1/2} / (j! k! (N−2j)!)
/// with m = N − 2j + 2k.
pub fn build_single_mode_macrostate(
    gain: GainParams,
    seed_photons: u32,
    cutoff: CutoffSpec,
) -> Result<SingleModeState> {
    let n_seed = seed_photons as usize;
    let base = auto_base_cutoff(gain) + n_seed;
    let (amps, deficit) = resolve_cutoff(cutoff, base, gain.gamma, |n_max| {
        let dim = n_max + 1;
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        for j in 0..=n_seed / 2 {
            let remaining = n_seed - 2 * j;
            let mut k = 0usize;
            loop {
                let m = remaining + 2 * k;
                if m > n_max {
                    break;
                }
                if gain.gamma == 0.0 && (j > 0 || k > 0) {
                    break;
                }
                let lg_half = if gain.gamma > 0.0 {
                    libm::log(gain.gamma / 2.0)
                } else {
                    0.0
                };
                let ln_mag = (j + k) as f64 * lg_half
                    + 0.5 * (ln_factorial(n_seed as u64) + ln_factorial(m as u64))
                    - ln_factorial(j as u64)
                    - ln_factorial(k as u64)
                    - ln_factorial(remaining as u64)
                    - (remaining as f64 + 0.5) * libm::log(gain.c);
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                amps[m] += C64::new(sign * libm::exp(ln_mag), 0.0);
                k += 1;
            }
        }
        let norm_sq = amps.iter().map(|x| x.norm_sqr()).sum();
        (amps, norm_sq)
    })?;
    Ok(SingleModeState {
        amps,
        trace_deficit: deficit,
    })
}

/// Builds the seed produced by subtracting photons from a squeezed
/// p-photon input: N Σ_k p!(−1)^k/(2^k k! √((p−2k)!)) w^k |p−2k⟩ with
/// w = e^{iθ} sinh s cosh s, normalized over k ≤ ⌊p/2⌋.
pub fn build_photon_subtracted_seed(
    p: u32,
    s: f64,
    theta: f64,
    cutoff: CutoffSpec,
) -> Result<SingleModeState> {
    if !s.is_finite() || !theta.is_finite() {
        return Err(Error::Domain("seed parameters must be finite"));
    }
    let p = p as usize;
    let n_max = match cutoff {
        CutoffSpec::Fixed(n) => {
            if n < p {
                return Err(Error::Domain("cutoff below the seed photon number"));
            }
            n
        }
        CutoffSpec::Auto { deficit } => {
            check_auto_deficit(deficit)?;
            p
        }
    };
    let dim = n_max + 1;
    let mut amps = vec![C64::new(0.0, 0.0); dim];
    let w = C64::from_polar(libm::sinh(s) * libm::cosh(s), theta);
    for k in 0..=p / 2 {
        let ln_mag = ln_factorial(p as u64)
            - k as f64 * libm::log(2.0)
            - ln_factorial(k as u64)
            - 0.5 * ln_factorial((p - 2 * k) as u64);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        amps[p - 2 * k] = w.powu(k as u32) * (sign * libm::exp(ln_mag));
    }
    let norm = libm::sqrt(amps.iter().map(|a| a.norm_sqr()).sum::<f64>());
    for a in amps.iter_mut() {
        *a /= norm;
    }
    Ok(SingleModeState {
        amps,
        trace_deficit: 0.0,
    })
}

/// Closed-form mode populations of the equatorial macrostate and the
/// interference visibility of their fringe:
/// ⟨n_φ⟩ = m̄ + (2m̄+1)cos²(φ/2), ⟨n_φ⊥⟩ = m̄ + (2m̄+1)sin²(φ/2),
/// V = (2m̄+1)/(4m̄+1).
pub fn mean_photons_and_visibility(gain: GainParams, phi: f64) -> (f64, f64, f64) {
    let m = gain.mean_spontaneous;
    let cos_half = libm::cos(phi / 2.0);
    let sin_half = libm::sin(phi / 2.0);
    let n_plus = m + (2.0 * m + 1.0) * cos_half * cos_half;
    let n_minus = m + (2.0 * m + 1.0) * sin_half * sin_half;
    let visibility = (2.0 * m + 1.0) / (4.0 * m + 1.0);
    (n_plus, n_minus, visibility)
}
