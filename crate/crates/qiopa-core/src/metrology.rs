//! Fidelity, Bures distance, closed-form decoherence curves for
//! coherent-state superpositions, macro-qubit distance points, and the
//! orthogonality filter.
//!
//! Matrix square roots run through real symmetric eigendecompositions
//! of the 2d×2d embedding [[Re, −Im], [Im, Re]], which represents the
//! complex algebra faithfully: spectra double and traces halve.

use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::channel::{lossy_density_from_pure, lossy_density_from_pure_single, LossChannel};
use crate::fock::{
    build_hv_macrostate, build_single_mode_macrostate, tensor_product, CutoffSpec, DensityMatrix,
    GainParams, HvSeed,
};
use crate::{Error, Result, C64};

/// Eigenvalues this far below zero are corruption, not truncation noise.
const EIG_ERROR_FLOOR: f64 = -1e-6;

/// Conclusive probability below this leaves nothing to renormalize.
const FILTER_FLOOR: f64 = 1e-12;

/// Real symmetric embedding of a Hermitian matrix; round-off asymmetry
/// is absorbed by symmetrizing.
fn embed_hermitian(m: &DMatrix<C64>) -> faer::Mat<f64> {
    let d = m.nrows();
    let mut e = faer::Mat::<f64>::zeros(2 * d, 2 * d);
    for i in 0..d {
        for j in 0..=i {
            let z = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            e[(i, j)] = z.re;
            e[(j, i)] = z.re;
            e[(i + d, j + d)] = z.re;
            e[(j + d, i + d)] = z.re;
            e[(i + d, j)] = z.im;
            e[(j, i + d)] = z.im;
            e[(i, j + d)] = -z.im;
            e[(j + d, i)] = -z.im;
        }
    }
    e
}

/// Eigendecomposition of a real symmetric matrix.
fn sym_eigen(a: faer::Mat<f64>) -> Result<faer::linalg::solvers::SelfAdjointEigen<f64>> {
    a.self_adjoint_eigen(faer::Side::Lower)
        .map_err(|_| Error::Internal("eigendecomposition failed to converge"))
}

/// Clamps an eigenvalue destined for a square root: slightly negative
/// values are truncation noise and flatten to zero, anything below the
/// error floor reports an invalid state.
fn clamped_root(v: f64) -> Result<f64> {
    if !v.is_finite() {
        return Err(Error::Internal("eigensolver produced a non-finite value"));
    }
    if v < EIG_ERROR_FLOOR {
        return Err(Error::InvalidState(
            "matrix square root met an eigenvalue below -1e-6",
        ));
    }
    Ok(libm::sqrt(v.max(0.0)))
}

/// Tr√(√ρ σ √ρ) over the complex space, i.e. half the embedded trace.
///
/// Basis indices with an exactly zero row in both ρ and σ span a joint
/// kernel of √ρ σ √ρ, so the trace is computed on the complement; the
/// restriction is exact and keeps sparse supports (number combs, filter
/// projections) from feeding the eigensolver rows of zeros. With
/// ρ = U Λ Uᵀ the product is unitarily similar to √Λ Uᵀ σ U √Λ, and
/// columns with a zero clamped root drop out exactly.
fn trace_sqrt_product(rho: &DMatrix<C64>, sigma: &DMatrix<C64>) -> Result<f64> {
    let n = rho.nrows();
    let zero = C64::new(0.0, 0.0);
    let live: Vec<usize> = (0..n)
        .filter(|&i| (0..n).any(|j| rho[(i, j)] != zero || sigma[(i, j)] != zero))
        .collect();
    if live.is_empty() {
        return Ok(0.0);
    }
    let gather =
        |m: &DMatrix<C64>| DMatrix::from_fn(live.len(), live.len(), |r, c| m[(live[r], live[c])]);
    let eig = sym_eigen(embed_hermitian(&gather(rho)))?;
    let m = 2 * live.len();
    let mut roots = Vec::with_capacity(m);
    for i in 0..m {
        roots.push(clamped_root(eig.S()[i])?);
    }
    let kept: Vec<usize> = (0..m).filter(|&i| roots[i] > 0.0).collect();
    if kept.is_empty() {
        return Ok(0.0);
    }
    let u = eig.U();
    let w = faer::Mat::<f64>::from_fn(m, kept.len(), |r, c| u[(r, kept[c])] * roots[kept[c]]);
    let p = w.transpose() * embed_hermitian(&gather(sigma)) * &w;
    let sym = faer::Mat::<f64>::from_fn(kept.len(), kept.len(), |r, c| {
        (p[(r, c)] + p[(c, r)]) * 0.5
    });
    let eig_p = sym_eigen(sym)?;
    let mut total = 0.0;
    for i in 0..kept.len() {
        total += clamped_root(eig_p.S()[i])?;
    }
    Ok(total / 2.0)
}

/// Fidelity Tr²√(√ρ σ √ρ) between two density matrices on matching
/// truncations, clipped to [0, 1].
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dims() != sigma.dims() {
        return Err(Error::Domain("fidelity needs matching truncations"));
    }
    let t = trace_sqrt_product(&rho.mat, &sigma.mat)?;
    Ok((t * t).clamp(0.0, 1.0))
}

/// Bures distance √(1 − √F).
pub fn bures_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    let f = fidelity(rho, sigma)?;
    Ok(libm::sqrt((1.0 - libm::sqrt(f)).max(0.0)))
}

/// The universal decoherence curve for orthogonal coherent-state
/// superpositions, D = √(1 − √(1 − e^{−4x})) at x = R|α|²sin²φ.
pub fn css_universal_distance(x: f64) -> f64 {
    let inner = (1.0 - libm::exp(-4.0 * x)).max(0.0);
    libm::sqrt((1.0 - libm::sqrt(inner)).max(0.0))
}

/// Closed-form Bures distances for a lossy coherent-state superposition.
#[derive(Clone, Copy, Debug)]
pub struct CssBures {
    /// Distance between the two surviving coherent components,
    /// √(1 − e^{−2T|α|²sin²φ}).
    pub components: f64,
    /// Distance between the two superposition states (the universal
    /// curve at x = R|α|²sin²φ).
    pub superpositions: f64,
    /// True when the components stay effectively orthogonal
    /// (T|α|²sin²φ > 1), the regime where the superposition branch is
    /// quantitative.
    pub orthogonal_regime: bool,
}

/// Evaluates both closed-form distance branches for a coherent-state
/// superposition of amplitude `alpha` and half-angle `phi` after loss.
pub fn css_bures_analytic(alpha: f64, phi: f64, ch: LossChannel) -> CssBures {
    let s = libm::sin(phi);
    let base = alpha * alpha * s * s;
    let components = libm::sqrt((1.0 - libm::exp(-2.0 * ch.t * base)).max(0.0));
    CssBures {
        components,
        superpositions: css_universal_distance(ch.r * base),
        orthogonal_regime: ch.t * base > 1.0,
    }
}

/// Threshold configuration of the orthogonality filter.
#[derive(Clone, Copy, Debug)]
pub struct OFilterConfig {
    /// Minimum photon-number surplus accepted as conclusive.
    pub k: usize,
}

/// The three diagonal POVM elements of the orthogonality filter,
/// recorded as one outcome label per two-mode basis pair.
#[derive(Clone, Debug)]
pub struct OFilterPovm {
    dims: (usize, usize),
    outcome: Vec<i8>,
}

impl OFilterPovm {
    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    /// Outcome for the basis pair (n_a, n_b): +1, −1, or 0.
    pub fn outcome_of(&self, n_a: usize, n_b: usize) -> i8 {
        self.outcome[n_a * self.dims.1 + n_b]
    }

    /// Diagonal of the projector for one outcome, flat row-major.
    pub fn element_diagonal(&self, outcome: i8) -> Vec<f64> {
        self.outcome
            .iter()
            .map(|o| if *o == outcome { 1.0 } else { 0.0 })
            .collect()
    }
}

/// Builds the filter POVM on a truncated two-mode basis: +1 when
/// n_a − n_b ≥ k, −1 mirrored, 0 otherwise. A tie can never resolve,
/// so k = 0 acts as k = 1.
pub fn ofilter_povm(config: OFilterConfig, dims: (usize, usize)) -> OFilterPovm {
    let k_eff = config.k.max(1);
    let mut outcome = Vec::with_capacity(dims.0 * dims.1);
    for n_a in 0..dims.0 {
        for n_b in 0..dims.1 {
            outcome.push(if n_a >= n_b + k_eff {
                1
            } else if n_b >= n_a + k_eff {
                -1
            } else {
                0
            });
        }
    }
    OFilterPovm { dims, outcome }
}

/// Probability of a conclusive (±1) filter outcome, Tr[ρ(F⁺ + F⁻)].
pub fn ofilter_success_probability(rho: &DensityMatrix, config: OFilterConfig) -> Result<f64> {
    let povm = ofilter_povm(config, rho.dims());
    let mut p = 0.0;
    for (n, o) in povm.outcome.iter().enumerate() {
        if *o != 0 {
            p += rho.mat[(n, n)].re;
        }
    }
    Ok(p.clamp(0.0, 1.0))
}

/// Projects onto the conclusive subspace and renormalizes by the
/// conclusive trace; returns the filtered state and that trace.
pub fn ofilter_project_conclusive(
    rho: &DensityMatrix,
    config: OFilterConfig,
) -> Result<(DensityMatrix, f64)> {
    let povm = ofilter_povm(config, rho.dims());
    let flat = rho.flat_dim();
    let keep: Vec<bool> = povm.outcome.iter().map(|o| *o != 0).collect();
    let mut p = 0.0;
    for n in 0..flat {
        if keep[n] {
            p += rho.mat[(n, n)].re;
        }
    }
    if p <= FILTER_FLOOR {
        return Err(Error::DegenerateFilter(p.max(0.0)));
    }
    let inv = 1.0 / p;
    let mut mat = DMatrix::from_element(flat, flat, C64::new(0.0, 0.0));
    for r in 0..flat {
        if !keep[r] {
            continue;
        }
        for c in 0..flat {
            if keep[c] {
                mat[(r, c)] = rho.mat[(r, c)] * inv;
            }
        }
    }
    let filtered = DensityMatrix::new(rho.dims(), mat, rho.trace_deficit)?;
    Ok((filtered, p.clamp(0.0, 1.0)))
}

/// Macro-qubit pair selection for distance curves.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MacroBasis {
    /// Orthogonal equatorial seeds, amplified into the ± parity combs.
    Equatorial,
    /// Polar H/V seeds, amplified into the photon-ladder combs.
    Hv,
}

/// One sample of a distance-versus-lost-particles curve.
#[derive(Clone, Copy, Debug)]
pub struct BuresPoint {
    /// Mean lost particles x = R⟨n⟩.
    pub x: f64,
    /// Bures distance at that loss.
    pub d: f64,
    /// Largest trace deficit among the compared truncated states.
    pub truncation_deficit: f64,
}

/// Family label for assembled distance curves.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BuresFamily {
    Equatorial,
    Hv,
    Css,
}

/// A sampled distance curve with the parameters that produced it.
#[derive(Clone, Debug)]
pub struct BuresCurve {
    pub family: BuresFamily,
    pub g: Option<f64>,
    pub alpha: Option<f64>,
    pub phi: Option<f64>,
    pub filter_k: Option<usize>,
    pub samples: Vec<BuresPoint>,
}

/// Mean total photon number of a one-photon-seeded macro-qubit,
/// 4·sinh²g + 1; coherent-superposition comparisons match |α|² to it.
pub fn macroqubit_mean_photons(gain: GainParams) -> f64 {
    4.0 * gain.mean_spontaneous + 1.0
}

/// Post-loss amplified one-photon and vacuum seeds at a shared cutoff.
fn lossy_amplified_pair(
    gain: GainParams,
    ch: LossChannel,
) -> Result<(DensityMatrix, DensityMatrix)> {
    let seeded = build_single_mode_macrostate(gain, 1, CutoffSpec::Auto { deficit: 1e-10 })?;
    let spontaneous = build_single_mode_macrostate(gain, 0, CutoffSpec::Fixed(seeded.dim() - 1))?;
    let rho1 = lossy_density_from_pure_single(&seeded, ch, None)?;
    let rho0 = lossy_density_from_pure_single(&spontaneous, ch, None)?;
    Ok((rho1, rho0))
}

/// Smallest dimension whose discarded diagonal tail stays below `eps`.
fn mass_cutoff(rho: &DensityMatrix, eps: f64) -> usize {
    let d = rho.dims().0;
    let mut tail = 0.0;
    for n in (0..d).rev() {
        tail += rho.mat[(n, n)].re;
        if tail > eps {
            return n + 1;
        }
    }
    1
}

/// Truncates a single-mode matrix to `dim`, folding the discarded mass
/// into the deficit; the result stays unnormalized.
fn trim_single_mode(rho: &DensityMatrix, dim: usize) -> Result<DensityMatrix> {
    let d = rho.dims().0;
    if dim >= d {
        return Ok(rho.clone());
    }
    let mut dropped = 0.0;
    for n in dim..d {
        dropped += rho.mat[(n, n)].re;
    }
    let mat = rho.mat.view((0, 0), (dim, dim)).into_owned();
    DensityMatrix::new((dim, 1), mat, rho.trace_deficit + dropped.max(0.0))
}

/// Fidelity between two-mode matrices that conserve total photon
/// parity: √F adds over the even and odd blocks, which cuts the cubic
/// eigendecomposition cost fourfold. Falls back to the dense path when
/// either input carries cross-parity weight.
fn fidelity_two_mode_blocked(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dims() != sigma.dims() {
        return Err(Error::Domain("fidelity needs matching truncations"));
    }
    let (_, db) = rho.dims();
    let flat = rho.flat_dim();
    let parity = |n: usize| (n / db + n % db) % 2;
    let mut cross: f64 = 0.0;
    for r in 0..flat {
        for c in 0..flat {
            if parity(r) != parity(c) {
                cross = cross.max(rho.mat[(r, c)].norm().max(sigma.mat[(r, c)].norm()));
            }
        }
    }
    if cross > 1e-12 {
        return fidelity(rho, sigma);
    }
    let mut t = 0.0;
    for want in 0..2usize {
        let idx: Vec<usize> = (0..flat).filter(|n| parity(*n) == want).collect();
        let gather = |m: &DensityMatrix| {
            DMatrix::from_fn(idx.len(), idx.len(), |r, c| m.mat[(idx[r], idx[c])])
        };
        t += trace_sqrt_product(&gather(rho), &gather(sigma))?;
    }
    Ok((t * t).clamp(0.0, 1.0))
}

fn bures_from_fidelity(f: f64) -> f64 {
    libm::sqrt((1.0 - libm::sqrt(f.clamp(0.0, 1.0))).max(0.0))
}

/// Bures distance between the two orthogonal lossy macro-qubits of one
/// basis, optionally after conclusive-outcome filtering; returns the
/// curve sample (x = R⟨n⟩, D).
///
/// The equatorial pair factorizes over the ± modes, where the − mode
/// differs from the + mode only by a number-diagonal phase that drops
/// out of both the fidelity and the (diagonal) filter, so the
/// unfiltered distance reduces to single-mode fidelities:
/// √F = F(ρ₁, ρ₀).
pub fn macroqubit_bures(
    gain: GainParams,
    ch: LossChannel,
    basis: MacroBasis,
    filter: Option<OFilterConfig>,
) -> Result<BuresPoint> {
    if gain.g > 1.5 {
        return Err(Error::Domain(
            "macro-qubit distances are desk-scale only (g ≤ 1.5)",
        ));
    }
    let x = ch.r * macroqubit_mean_photons(gain);
    let (d, deficit) = match basis {
        MacroBasis::Equatorial => {
            let (rho1, rho0) = lossy_amplified_pair(gain, ch)?;
            let deficit = rho1.trace_deficit.max(rho0.trace_deficit);
            match filter {
                None => {
                    let f10 = fidelity(&rho1, &rho0)?;
                    (bures_from_fidelity(f10 * f10), deficit)
                }
                Some(cfg) => {
                    let dim = mass_cutoff(&rho1, 1e-8).max(mass_cutoff(&rho0, 1e-8));
                    let r1 = trim_single_mode(&rho1, dim)?;
                    let r0 = trim_single_mode(&rho0, dim)?;
                    let ra = tensor_product(&r1, &r0)?;
                    let rb = tensor_product(&r0, &r1)?;
                    let (fa, _) = ofilter_project_conclusive(&ra, cfg)?;
                    let (fb, _) = ofilter_project_conclusive(&rb, cfg)?;
                    let deficit = deficit.max(ra.trace_deficit);
                    (
                        bures_from_fidelity(fidelity_two_mode_blocked(&fa, &fb)?),
                        deficit,
                    )
                }
            }
        }
        MacroBasis::Hv => {
            let psi_h = build_hv_macrostate(gain, HvSeed::H, CutoffSpec::Auto { deficit: 1e-10 })?;
            let n_max = psi_h.dims().0 - 1;
            let psi_v = build_hv_macrostate(gain, HvSeed::V, CutoffSpec::Fixed(n_max))?;
            let rho_h = lossy_density_from_pure(&psi_h, ch, ch, None)?;
            let rho_v = lossy_density_from_pure(&psi_v, ch, ch, None)?;
            let deficit = rho_h.trace_deficit.max(rho_v.trace_deficit);
            let f = match filter {
                None => fidelity_two_mode_blocked(&rho_h, &rho_v)?,
                Some(cfg) => {
                    let (fh, _) = ofilter_project_conclusive(&rho_h, cfg)?;
                    let (fv, _) = ofilter_project_conclusive(&rho_v, cfg)?;
                    fidelity_two_mode_blocked(&fh, &fv)?
                }
            };
            (bures_from_fidelity(f), deficit)
        }
    };
    Ok(BuresPoint {
        x,
        d,
        truncation_deficit: deficit,
    })
}
