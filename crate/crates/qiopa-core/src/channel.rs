//! Photon-loss channel on truncated Fock spaces.
//!
//! Three routes to the same map, kept as separate code paths so they can
//! cross-validate each other: a Kraus-operator sum acting on density
//! matrices, an explicit beam-splitter unitary with a traced-out ancilla,
//! and a direct assembly of the post-loss matrix from pure-state
//! amplitudes with an optional output restriction (the cheap route when
//! only a low-photon block is wanted).

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::fock::{DensityMatrix, Mode, SingleModeState, TwoModeFockState};
use crate::specfun::log_binomial;
use crate::{Error, Result, C64};

/// Beam-splitter loss channel with reflectivity R and transmittivity
/// T = 1 − R.
#[derive(Clone, Copy, Debug)]
pub struct LossChannel {
    pub r: f64,
    pub t: f64,
}

impl LossChannel {
    pub fn new(r: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::Domain("reflectivity must lie in [0, 1]"));
        }
        Ok(LossChannel { r, t: 1.0 - r })
    }
}

// √(binom(n,p) T^{n−p} R^p): the amplitude for p photons of n leaking
// into the reflected port. Endpoint channels avoid 0·log(0).
fn loss_coeff(n: usize, p: usize, ch: LossChannel) -> f64 {
    if p > n {
        return 0.0;
    }
    let binom = log_binomial(n as u64, p as i64);
    let t_pow = libm::pow(ch.t, (n - p) as f64);
    let r_pow = libm::pow(ch.r, p as f64);
    libm::sqrt(binom.value() * t_pow * r_pow)
}

/// Damping operators M_p for p = 0..=p_max on a `dim`-dimensional mode.
/// Each M_p maps |n⟩ ↦ √(binom(n,p) T^{n−p} R^p) |n−p⟩.
#[derive(Clone, Debug)]
pub struct KrausSet {
    /// coeffs[p][m] multiplies |m+p⟩ ↦ |m⟩.
    coeffs: Vec<Vec<f64>>,
    dim: usize,
}

impl KrausSet {
    pub fn new(ch: LossChannel, dim: usize, p_max: usize) -> Self {
        let coeffs = (0..=p_max.min(dim.saturating_sub(1)))
            .map(|p| (0..dim - p).map(|m| loss_coeff(m + p, p, ch)).collect())
            .collect();
        KrausSet { coeffs, dim }
    }

    pub fn p_max(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Largest deviation of Σ_p M_p†M_p from the identity. Zero (up to
    /// rounding) whenever p_max covers the full cutoff, since the
    /// binomial weights sum to (T+R)^n = 1.
    pub fn completeness_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for n in 0..self.dim {
            let mut sum = 0.0;
            for (p, c) in self.coeffs.iter().enumerate() {
                if n >= p {
                    sum += c[n - p] * c[n - p];
                }
            }
            worst = worst.max((1.0 - sum).abs());
        }
        worst
    }
}

/// Applies the loss map ρ ↦ Σ_p M_p ρ M_p† to one mode of a density
/// matrix. `p_max = None` keeps every operator up to the mode cutoff;
/// an explicit truncation is rejected when it misses completeness by
/// more than 1e−9.
pub fn apply_loss_kraus(
    rho: &DensityMatrix,
    ch: LossChannel,
    mode: Mode,
    p_max: Option<usize>,
) -> Result<DensityMatrix> {
    let (da, db) = rho.dims();
    if mode == Mode::B && db == 1 {
        return Err(Error::Domain("operator has no second mode"));
    }
    let target_dim = match mode {
        Mode::A => da,
        Mode::B => db,
    };
    let kraus = KrausSet::new(ch, target_dim, p_max.unwrap_or(target_dim - 1));
    if p_max.is_some() {
        let defect = kraus.completeness_defect();
        if defect > 1e-9 {
            return Err(Error::Completeness(defect));
        }
    }
    let flat = rho.flat_dim();
    let mut out = DMatrix::from_element(flat, flat, C64::new(0.0, 0.0));
    for (p, c) in kraus.coeffs.iter().enumerate() {
        match mode {
            Mode::A => {
                for i in 0..da - p {
                    for k in 0..da - p {
                        let w = c[i] * c[k];
                        if w == 0.0 {
                            continue;
                        }
                        for j in 0..db {
                            for l in 0..db {
                                out[(i * db + j, k * db + l)] +=
                                    rho.mat[((i + p) * db + j, (k + p) * db + l)] * w;
                            }
                        }
                    }
                }
            }
            Mode::B => {
                for j in 0..db - p {
                    for l in 0..db - p {
                        let w = c[j] * c[l];
                        if w == 0.0 {
                            continue;
                        }
                        for i in 0..da {
                            for k in 0..da {
                                out[(i * db + j, k * db + l)] +=
                                    rho.mat[(i * db + j + p, k * db + l + p)] * w;
                            }
                        }
                    }
                }
            }
        }
    }
    DensityMatrix::new((da, db), out, rho.trace_deficit)
}

// Embeds |ψ⟩|0⟩_anc, applies the beam-splitter columns
// |n,0⟩ ↦ Σ_k √(binom(n,k)) (√T)^{n−k} (i√R)^k |n−k, k⟩,
// and returns the system density Ψ Ψ† after tracing the ancilla.
fn unitary_loss_single(amps: &[C64], ch: LossChannel) -> DMatrix<C64> {
    let dim = amps.len();
    let mut embedded = DMatrix::from_element(dim, dim, C64::new(0.0, 0.0));
    for (n, a) in amps.iter().enumerate() {
        if a.norm_sqr() == 0.0 {
            continue;
        }
        for k in 0..=n {
            let phase = match k % 4 {
                0 => C64::new(1.0, 0.0),
                1 => C64::new(0.0, 1.0),
                2 => C64::new(-1.0, 0.0),
                _ => C64::new(0.0, -1.0),
            };
            embedded[(n - k, k)] += *a * phase * loss_coeff(n, k, ch);
        }
    }
    let adj = embedded.adjoint();
    embedded * adj
}

/// Beam-splitter-unitary route for a single-mode pure state.
pub fn apply_loss_unitary_single(state: &SingleModeState, ch: LossChannel) -> Result<DensityMatrix> {
    let mat = unitary_loss_single(state.amps(), ch);
    let trace: f64 = (0..mat.nrows()).map(|i| mat[(i, i)].re).sum();
    DensityMatrix::new((state.dim(), 1), mat, (1.0 - trace).max(0.0))
}

/// Beam-splitter-unitary route for a two-mode pure state: one vacuum
/// ancilla per mode, both traced out. Memory grows as (dim_a·dim_b)²,
/// so this route is for cross-validation at modest cutoffs.
pub fn apply_loss_unitary(
    state: &TwoModeFockState,
    ch_a: LossChannel,
    ch_b: LossChannel,
) -> Result<DensityMatrix> {
    let (da, db) = state.dims();
    let flat = da * db;
    if flat * flat > 32_000_000 {
        return Err(Error::Unsupported("ancilla embedding too large"));
    }
    // Amplitude tensor ψ[(i,j), (ka,kb)] after both beam splitters.
    let mut embedded = DMatrix::from_element(flat, flat, C64::new(0.0, 0.0));
    for i in 0..da {
        for j in 0..db {
            let a = state.amp(i, j);
            if a.norm_sqr() == 0.0 {
                continue;
            }
            for ka in 0..=i {
                let ca = loss_coeff(i, ka, ch_a);
                if ca == 0.0 {
                    continue;
                }
                for kb in 0..=j {
                    let cb = loss_coeff(j, kb, ch_b);
                    if cb == 0.0 {
                        continue;
                    }
                    let phase = match (ka + kb) % 4 {
                        0 => C64::new(1.0, 0.0),
                        1 => C64::new(0.0, 1.0),
                        2 => C64::new(-1.0, 0.0),
                        _ => C64::new(0.0, -1.0),
                    };
                    embedded[((i - ka) * db + (j - kb), ka * db + kb)] += a * phase * ca * cb;
                }
            }
        }
    }
    let adj = embedded.adjoint();
    let mat = embedded * adj;
    let trace: f64 = (0..flat).map(|i| mat[(i, i)].re).sum();
    DensityMatrix::new((da, db), mat, (1.0 - trace).max(0.0))
}

/// Assembles the post-loss density matrix of a two-mode pure state
/// directly from its amplitudes, keeping only the `out_dims` block.
/// Columns of leaked-photon combinations with negligible weight are
/// skipped, which makes high input cutoffs affordable when only a small
/// output block is needed.
pub fn lossy_density_from_pure(
    state: &TwoModeFockState,
    ch_a: LossChannel,
    ch_b: LossChannel,
    out_dims: Option<(usize, usize)>,
) -> Result<DensityMatrix> {
    let (da, db) = state.dims();
    let (oa, ob) = out_dims.unwrap_or((da, db));
    let (oa, ob) = (oa.min(da), ob.min(db));
    let flat = oa * ob;
    let mut mat = DMatrix::from_element(flat, flat, C64::new(0.0, 0.0));
    let mut block = vec![C64::new(0.0, 0.0); flat];
    for pa in 0..da {
        for pb in 0..db {
            // Conditional (unnormalized) amplitudes after losing exactly
            // (pa, pb) photons; ρ gains their outer product.
            let mut weight: f64 = 0.0;
            for i in 0..oa.min(da - pa) {
                let ca = loss_coeff(i + pa, pa, ch_a);
                for j in 0..ob.min(db - pb) {
                    let cb = loss_coeff(j + pb, pb, ch_b);
                    let v = state.amp(i + pa, j + pb) * (ca * cb);
                    block[i * ob + j] = v;
                    weight = weight.max(v.norm_sqr());
                }
                for j in ob.min(db - pb)..ob {
                    block[i * ob + j] = C64::new(0.0, 0.0);
                }
            }
            for i in oa.min(da - pa)..oa {
                for j in 0..ob {
                    block[i * ob + j] = C64::new(0.0, 0.0);
                }
            }
            if weight < 1e-28 {
                continue;
            }
            for r in 0..flat {
                if block[r].norm_sqr() == 0.0 {
                    continue;
                }
                for c in 0..flat {
                    mat[(r, c)] += block[r] * block[c].conj();
                }
            }
        }
    }
    let trace: f64 = (0..flat).map(|i| mat[(i, i)].re).sum();
    DensityMatrix::new((oa, ob), mat, (1.0 - trace).max(0.0))
}

/// Single-mode variant of [`lossy_density_from_pure`].
pub fn lossy_density_from_pure_single(
    state: &SingleModeState,
    ch: LossChannel,
    out_dim: Option<usize>,
) -> Result<DensityMatrix> {
    let dim = state.dim();
    let od = out_dim.unwrap_or(dim).min(dim);
    let mut mat = DMatrix::from_element(od, od, C64::new(0.0, 0.0));
    let mut block = vec![C64::new(0.0, 0.0); od];
    for p in 0..dim {
        let mut weight: f64 = 0.0;
        for (n, slot) in block.iter_mut().enumerate() {
            *slot = if n + p < dim {
                state.amp(n + p) * loss_coeff(n + p, p, ch)
            } else {
                C64::new(0.0, 0.0)
            };
            weight = weight.max(slot.norm_sqr());
        }
        if weight < 1e-30 {
            continue;
        }
        for r in 0..od {
            for c in 0..od {
                mat[(r, c)] += block[r] * block[c].conj();
            }
        }
    }
    let trace: f64 = (0..od).map(|i| mat[(i, i)].re).sum();
    DensityMatrix::new((od, 1), mat, (1.0 - trace).max(0.0))
}

/// Diagonal of a density matrix as a photon-number probability table in
/// flat basis order.
pub fn photon_distribution(rho: &DensityMatrix) -> Vec<f64> {
    rho.diagonal()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{
        build_collinear_macrostate, build_css_state, coherent_amplitudes, CollinearSeed,
        CssParams, CssSign, CutoffSpec, GainParams,
    };
    use approx::assert_abs_diff_eq;
    use nalgebra::DMatrix;

    fn max_abs(m: &DMatrix<C64>) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn fock_ket(dim: usize, n: usize) -> DensityMatrix {
        let mut mat = DMatrix::from_element(dim, dim, C64::new(0.0, 0.0));
        mat[(n, n)] = C64::new(1.0, 0.0);
        DensityMatrix::new((dim, 1), mat, 0.0).unwrap()
    }

    #[test]
    fn kraus_identity_and_total_loss() {
        let rho = fock_ket(6, 3);
        let same = apply_loss_kraus(&rho, LossChannel::new(0.0).unwrap(), Mode::A, None).unwrap();
        assert_abs_diff_eq!((&same.mat - &rho.mat).norm(), 0.0, epsilon = 1e-14);
        let vac = apply_loss_kraus(&rho, LossChannel::new(1.0).unwrap(), Mode::A, None).unwrap();
        assert_abs_diff_eq!(vac.mat[(0, 0)].re, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(vac.trace(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn kraus_single_photon_mixture() {
        let rho = fock_ket(4, 1);
        let out = apply_loss_kraus(&rho, LossChannel::new(0.3).unwrap(), Mode::A, None).unwrap();
        assert_abs_diff_eq!(out.mat[(1, 1)].re, 0.7, epsilon = 1e-14);
        assert_abs_diff_eq!(out.mat[(0, 0)].re, 0.3, epsilon = 1e-14);
    }

    #[test]
    fn kraus_completeness_guard() {
        let rho = fock_ket(12, 9);
        let err = apply_loss_kraus(&rho, LossChannel::new(0.4).unwrap(), Mode::A, Some(2));
        assert!(matches!(err, Err(Error::Completeness(_))));
        let full = KrausSet::new(LossChannel::new(0.4).unwrap(), 12, 11);
        assert!(full.completeness_defect() <= 1e-12);
    }

    #[test]
    fn coherent_states_stay_coherent() {
        let alpha = C64::new(1.1, 0.4);
        let ch = LossChannel::new(0.35).unwrap();
        let dim = 36;
        let amps = coherent_amplitudes(alpha, dim);
        let mut mat = DMatrix::from_element(dim, dim, C64::new(0.0, 0.0));
        for r in 0..dim {
            for c in 0..dim {
                mat[(r, c)] = amps[r] * amps[c].conj();
            }
        }
        let rho = DensityMatrix::new((dim, 1), mat, 0.0).unwrap();
        let out = apply_loss_kraus(&rho, ch, Mode::A, None).unwrap();
        let scaled = coherent_amplitudes(alpha * libm::sqrt(ch.t), dim);
        for r in 0..dim {
            for c in 0..dim {
                let expect = scaled[r] * scaled[c].conj();
                assert!((out.mat[(r, c)] - expect).norm() < 1e-12, "({r},{c})");
            }
        }
    }

    #[test]
    fn unitary_and_kraus_routes_agree() {
        let gain = GainParams::new(1.0).unwrap();
        let st = build_collinear_macrostate(gain, CollinearSeed::Equatorial(0.9), CutoffSpec::Fixed(24))
            .unwrap();
        for &r in &[0.0, 0.1, 0.5, 0.9] {
            let ch = LossChannel::new(r).unwrap();
            let via_unitary = apply_loss_unitary(&st, ch, ch).unwrap();
            let mut via_kraus = st.to_density();
            via_kraus = apply_loss_kraus(&via_kraus, ch, Mode::A, None).unwrap();
            via_kraus = apply_loss_kraus(&via_kraus, ch, Mode::B, None).unwrap();
            let diff = max_abs(&(&via_unitary.mat - &via_kraus.mat));
            assert!(diff <= 1e-10, "R={r}: {diff}");
        }
    }

    #[test]
    fn restricted_pure_assembly_matches_unitary_block() {
        let gain = GainParams::new(0.8).unwrap();
        let st = build_collinear_macrostate(gain, CollinearSeed::Plus, CutoffSpec::Fixed(20))
            .unwrap();
        let ch = LossChannel::new(0.45).unwrap();
        let full = apply_loss_unitary(&st, ch, ch).unwrap();
        let block = lossy_density_from_pure(&st, ch, ch, Some((8, 8))).unwrap();
        let (_, db) = st.dims();
        for i in 0..8 {
            for j in 0..8 {
                for k in 0..8 {
                    for l in 0..8 {
                        let a = full.mat[(i * db + j, k * db + l)];
                        let b = block.mat[(i * 8 + j, k * 8 + l)];
                        assert!((a - b).norm() <= 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn single_mode_routes_agree_on_css() {
        let css = build_css_state(
            CssParams {
                alpha: 1.6,
                phi: core::f64::consts::FRAC_PI_2,
                sign: CssSign::Plus,
            },
            CutoffSpec::default(),
        )
        .unwrap();
        let ch = LossChannel::new(0.25).unwrap();
        let a = apply_loss_unitary_single(&css, ch).unwrap();
        let b = lossy_density_from_pure_single(&css, ch, None).unwrap();
        assert!(max_abs(&(&a.mat - &b.mat)) <= 1e-12);
        let mut via_kraus = css.to_density();
        via_kraus = apply_loss_kraus(&via_kraus, ch, Mode::A, None).unwrap();
        assert!(max_abs(&(&a.mat - &via_kraus.mat)) <= 1e-12);
    }

    #[test]
    fn loss_composition_multiplies_transmittivities() {
        let gain = GainParams::new(0.9).unwrap();
        let st = build_collinear_macrostate(gain, CollinearSeed::Plus, CutoffSpec::Fixed(18))
            .unwrap();
        let r1 = LossChannel::new(0.2).unwrap();
        let r2 = LossChannel::new(0.35).unwrap();
        let combined = LossChannel::new(1.0 - r1.t * r2.t).unwrap();
        let mut seq = st.to_density();
        for ch in [r1, r2] {
            seq = apply_loss_kraus(&seq, ch, Mode::A, None).unwrap();
            seq = apply_loss_kraus(&seq, ch, Mode::B, None).unwrap();
        }
        let mut direct = st.to_density();
        direct = apply_loss_kraus(&direct, combined, Mode::A, None).unwrap();
        direct = apply_loss_kraus(&direct, combined, Mode::B, None).unwrap();
        assert!(max_abs(&(&seq.mat - &direct.mat)) <= 1e-9);
    }

    #[test]
    fn distribution_comb_and_trace() {
        let gain = GainParams::new(1.5).unwrap();
        let st = build_collinear_macrostate(
            gain,
            CollinearSeed::Equatorial(0.7),
            CutoffSpec::Fixed(41),
        )
        .unwrap();
        let rho = st.to_density();
        let probs = photon_distribution(&rho);
        let (da, db) = rho.dims();
        let mut mixed_mass = 0.0;
        for i in 0..da {
            for j in 0..db {
                let p = probs[i * db + j];
                assert!(p >= -1e-12);
                // The lossless equatorial state only populates pairs of
                // opposite parity.
                if i % 2 == j % 2 {
                    mixed_mass += p;
                }
            }
        }
        assert!(mixed_mass <= 1e-12);
        let total: f64 = probs.iter().sum();
        assert_abs_diff_eq!(total, rho.trace(), epsilon = 1e-12);
    }
}
