//! Brute-force reference computations on truncated Fock spaces.
//!
//! Wigner values come from the displaced-parity form, which is exact on
//! the truncated space and needs no quadrature; states are regenerated
//! by numerically exponentiating the squeezer generators, a route that
//! shares no code with the closed-form amplitude builders it checks.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::fock::DensityMatrix;
use crate::specfun::{assoc_laguerre_scaled, ln_factorial};
use crate::wigner::WignerField;
use crate::{Error, Result, C64};

/// Matrix elements ⟨m|D(α)|n⟩ of the displacement operator on a
/// truncated basis.
#[derive(Clone, Debug)]
pub struct DisplacementMatrix {
    pub mat: DMatrix<C64>,
}

impl DisplacementMatrix {
    pub fn new(alpha: C64, dim: usize) -> Result<Self> {
        let mut mat = DMatrix::from_element(dim, dim, C64::new(0.0, 0.0));
        if alpha.norm_sqr() == 0.0 {
            for i in 0..dim {
                mat[(i, i)] = C64::new(1.0, 0.0);
            }
            return Ok(DisplacementMatrix { mat });
        }
        let x = alpha.norm_sqr();
        let ln_a = 0.5 * libm::log(x);
        for m in 0..dim {
            for n in 0..dim {
                // ⟨m|D|n⟩ = √(n!/m!) α^{m−n} e^{−x/2} L_n^{(m−n)}(x) for
                // m ≥ n; the m < n block mirrors it with (−α*)^{n−m}.
                let (lo, hi) = if m >= n { (n, m) } else { (m, n) };
                let diff = (hi - lo) as u32;
                let lag = assoc_laguerre_scaled(lo as u32, diff, x)?;
                if lag.is_zero() {
                    continue;
                }
                let ln_mag = 0.5 * (ln_factorial(lo as u64) - ln_factorial(hi as u64))
                    + f64::from(diff) * ln_a
                    - 0.5 * x
                    + lag.log_magnitude;
                let dir = if m >= n {
                    alpha / alpha.norm()
                } else {
                    -alpha.conj() / alpha.norm()
                };
                let phase = dir.powu(diff);
                mat[(m, n)] = phase * (f64::from(lag.sign) * libm::exp(ln_mag));
            }
        }
        Ok(DisplacementMatrix { mat })
    }

    /// Largest deviation of D†D from the identity on the lowest
    /// `block` × `block` corner; grows once displaced states leak past
    /// the truncation.
    pub fn unitarity_defect(&self, block: usize) -> f64 {
        let d = self.mat.nrows();
        let b = block.min(d);
        let mut worst: f64 = 0.0;
        for r in 0..b {
            for c in 0..b {
                let mut acc = C64::new(0.0, 0.0);
                for i in 0..d {
                    acc += self.mat[(i, r)].conj() * self.mat[(i, c)];
                }
                let expect = if r == c { 1.0 } else { 0.0 };
                worst = worst.max((acc - expect).norm());
            }
        }
        worst
    }
}

/// Displaced-parity Wigner value of a single-mode density matrix:
/// W(α) = (2/π) Σ_n (−1)^n ⟨n|D†(α) ρ D(α)|n⟩.
pub fn wigner_numeric_1mode(rho: &DensityMatrix, alpha: C64) -> Result<f64> {
    let (dim, db) = rho.dims();
    if db != 1 {
        return Err(Error::Domain("expected a single-mode density matrix"));
    }
    let d = DisplacementMatrix::new(alpha, dim)?;
    let moved = d.mat.adjoint() * &rho.mat * &d.mat;
    let mut acc = 0.0;
    for n in 0..dim {
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * moved[(n, n)].re;
    }
    Ok(acc * core::f64::consts::FRAC_2_PI)
}

/// Two-mode displaced parity,
/// W(α, β) = (2/π)² Tr[ρ (D_α Π D_α†) ⊗ (D_β Π D_β†)].
pub fn wigner_numeric_2mode(rho: &DensityMatrix, alpha: C64, beta: C64) -> Result<f64> {
    let (da, db) = rho.dims();
    if db == 1 {
        return Err(Error::Domain("expected a two-mode density matrix"));
    }
    let dmat_a = DisplacementMatrix::new(alpha, da)?.mat;
    let dmat_b = DisplacementMatrix::new(beta, db)?.mat;
    let kron = kron_c64(&dmat_a, &dmat_b);
    let moved = kron.adjoint() * &rho.mat * kron;
    let mut acc = 0.0;
    for i in 0..da {
        for j in 0..db {
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * moved[(i * db + j, i * db + j)].re;
        }
    }
    let f = core::f64::consts::FRAC_2_PI;
    Ok(acc * f * f)
}

fn kron_c64(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    DMatrix::from_fn(ra * rb, ca * cb, |r, c| {
        a[(r / rb, c / cb)] * b[(r % rb, c % cb)]
    })
}

// One generator application for the single-mode squeezer
// G = (g/2)(a†² − a²): couples n to n±2.
fn squeezer_apply_1mode(g: f64, v: &[C64], out: &mut [C64]) {
    let dim = v.len();
    for (n, slot) in out.iter_mut().enumerate() {
        let mut acc = C64::new(0.0, 0.0);
        if n >= 2 {
            let nf = n as f64;
            acc += v[n - 2] * (0.5 * g * libm::sqrt(nf * (nf - 1.0)));
        }
        if n + 2 < dim {
            let nf = n as f64;
            acc -= v[n + 2] * (0.5 * g * libm::sqrt((nf + 1.0) * (nf + 2.0)));
        }
        *slot = acc;
    }
}

// One application of G = g(a†b† − ab) on a two-mode vector.
fn squeezer_apply_2mode(g: f64, dims: (usize, usize), v: &[C64], out: &mut [C64]) {
    let (da, db) = dims;
    for i in 0..da {
        for j in 0..db {
            let mut acc = C64::new(0.0, 0.0);
            if i >= 1 && j >= 1 {
                acc += v[(i - 1) * db + (j - 1)] * (g * libm::sqrt((i * j) as f64));
            }
            if i + 1 < da && j + 1 < db {
                acc -= v[(i + 1) * db + (j + 1)]
                    * (g * libm::sqrt(((i + 1) * (j + 1)) as f64));
            }
            out[i * db + j] = acc;
        }
    }
}

// exp(G)|v⟩ by scaling and squaring on the vector: split the evolution
// into steps of generator norm ≲ 1 and run a Taylor series per step.
fn expm_apply<F>(mut apply: F, v: Vec<C64>, norm_bound: f64) -> Vec<C64>
where
    F: FnMut(&[C64], &mut [C64]),
{
    let steps = libm::ceil(norm_bound.max(1.0)) as usize;
    let scale = 1.0 / steps as f64;
    let dim = v.len();
    let mut state = v;
    let mut term = vec![C64::new(0.0, 0.0); dim];
    let mut next = vec![C64::new(0.0, 0.0); dim];
    for _ in 0..steps {
        term.copy_from_slice(&state);
        let mut k = 1.0;
        loop {
            apply(&term, &mut next);
            let mut sup: f64 = 0.0;
            for (t, n) in term.iter_mut().zip(next.iter()) {
                *t = *n * (scale / k);
                sup = sup.max(t.norm_sqr());
            }
            for (s, t) in state.iter_mut().zip(term.iter()) {
                *s += *t;
            }
            if sup < 1e-40 {
                break;
            }
            k += 1.0;
        }
    }
    state
}

/// Evolves |seed⟩ under exp[(g/2)(a†² − a²)] by numerical
/// exponentiation; negative `g` squeezes the conjugate quadrature.
///
/// The generator is truncated at `dim`, so the evolution is unitary on
/// the truncated space and boundary mass recirculates instead of
/// leaking. Pick `dim` with enough headroom that the amplitude at the
/// cutoff is below the accuracy wanted at the indices of interest.
pub fn evolve_single_mode_squeezer(seed: usize, g: f64, dim: usize) -> Result<Vec<C64>> {
    if seed >= dim {
        return Err(Error::Domain("seed index beyond cutoff"));
    }
    let mut v = vec![C64::new(0.0, 0.0); dim];
    v[seed] = C64::new(1.0, 0.0);
    let bound = g.abs() * (dim as f64 + 2.0);
    Ok(expm_apply(
        |x, out| squeezer_apply_1mode(g, x, out),
        v,
        bound,
    ))
}

/// Evolves |seed_a, seed_b⟩ under exp[g(a†b† − ab)] by numerical
/// exponentiation. Amplitudes are returned flat, row-major in the
/// second index.
pub fn evolve_two_mode_squeezer(
    seed: (usize, usize),
    g: f64,
    dims: (usize, usize),
) -> Result<Vec<C64>> {
    if seed.0 >= dims.0 || seed.1 >= dims.1 {
        return Err(Error::Domain("seed index beyond cutoff"));
    }
    let mut v = vec![C64::new(0.0, 0.0); dims.0 * dims.1];
    v[seed.0 * dims.1 + seed.1] = C64::new(1.0, 0.0);
    let bound = g.abs() * (dims.0.max(dims.1) as f64 + 2.0);
    Ok(expm_apply(
        |x, out| squeezer_apply_2mode(g, dims, x, out),
        v,
        bound,
    ))
}

/// Trapezoid integral of a sampled field together with a
/// Richardson-style error estimate.
#[derive(Clone, Copy, Debug)]
pub struct IntegrationEstimate {
    /// Full-resolution trapezoid value.
    pub value: f64,
    /// Estimated discretization error, `|fine − half-resolution| / 3`.
    pub error_estimate: f64,
}

impl IntegrationEstimate {
    /// True when the estimated discretization error stays within `tol`;
    /// false flags an under-resolved grid.
    pub fn resolved(&self, tol: f64) -> bool {
        self.error_estimate <= tol
    }
}

/// Trapezoid over the sub-grid of indices {0, s, 2s, ...} with `nx` by
/// `ny` retained points; the spacing scales with `s`.
fn trapezoid_subsampled(field: &WignerField, s: usize, nx: usize, ny: usize) -> f64 {
    let hx = field.x.step() * s as f64;
    let hy = field.y.step() * s as f64;
    let mut sum = 0.0;
    for ix in 0..nx {
        let wx = if ix == 0 || ix == nx - 1 { 0.5 } else { 1.0 };
        for iy in 0..ny {
            let wy = if iy == 0 || iy == ny - 1 { 0.5 } else { 1.0 };
            sum += wx * wy * field.value(ix * s, iy * s);
        }
    }
    sum * hx * hy
}

/// Integrates a sampled Wigner field by the 2-D trapezoid rule.
///
/// The error estimate halves the resolution over the largest odd point
/// count per axis, rescales the mismatch to the full area, and divides
/// by 3 (the leading-order trapezoid ratio). A large estimate flags an
/// under-resolved grid; the value itself is still returned.
pub fn integrate_wigner(field: &WignerField) -> Result<IntegrationEstimate> {
    let (nx, ny) = (field.x.count, field.y.count);
    if nx < 2 || ny < 2 {
        return Err(Error::Domain("integration needs at least 2 points per axis"));
    }
    if field.values.len() != nx * ny {
        return Err(Error::Internal("field buffer does not match its grid"));
    }
    if !field.values.iter().all(|v| v.is_finite()) {
        return Err(Error::Domain("non-finite sample in integration grid"));
    }
    let value = trapezoid_subsampled(field, 1, nx, ny);
    let px = if nx % 2 == 1 { nx } else { nx - 1 };
    let py = if ny % 2 == 1 { ny } else { ny - 1 };
    let error_estimate = if px < 3 || py < 3 {
        f64::INFINITY
    } else {
        let fine = trapezoid_subsampled(field, 1, px, py);
        let coarse = trapezoid_subsampled(field, 2, (px + 1) / 2, (py + 1) / 2);
        let area_full = ((nx - 1) * (ny - 1)) as f64;
        let area_prefix = ((px - 1) * (py - 1)) as f64;
        (fine - coarse).abs() / 3.0 * (area_full / area_prefix)
    };
    Ok(IntegrationEstimate {
        value,
        error_estimate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{
        build_collinear_macrostate, build_hv_macrostate, build_single_mode_macrostate,
        CollinearSeed, CutoffSpec, GainParams, HvSeed, SingleModeState,
    };
    use approx::assert_abs_diff_eq;

    fn vacuum_density(dim: usize) -> DensityMatrix {
        let mut mat = DMatrix::from_element(dim, dim, C64::new(0.0, 0.0));
        mat[(0, 0)] = C64::new(1.0, 0.0);
        DensityMatrix::new((dim, 1), mat, 0.0).unwrap()
    }

    #[test]
    fn convention_lock_on_vacuum() {
        let rho = vacuum_density(40);
        for &(x, y) in &[(0.0, 0.0), (0.7, -0.3), (1.5, 1.1), (-2.0, 0.4)] {
            let w = wigner_numeric_1mode(&rho, C64::new(x, y)).unwrap();
            let expect =
                core::f64::consts::FRAC_2_PI * libm::exp(-2.0 * (x * x + y * y));
            assert_abs_diff_eq!(w, expect, epsilon = 1e-10);
        }
    }

    #[test]
    fn single_photon_parity_at_origin() {
        let dim = 24;
        let mut mat = DMatrix::from_element(dim, dim, C64::new(0.0, 0.0));
        mat[(1, 1)] = C64::new(1.0, 0.0);
        let rho = DensityMatrix::new((dim, 1), mat, 0.0).unwrap();
        let w = wigner_numeric_1mode(&rho, C64::new(0.0, 0.0)).unwrap();
        assert_abs_diff_eq!(w, -core::f64::consts::FRAC_2_PI, epsilon = 1e-13);
    }

    #[test]
    fn origin_value_equals_direct_parity_sum() {
        let gain = GainParams::new(0.9).unwrap();
        let st = build_single_mode_macrostate(gain, 1, CutoffSpec::Auto { deficit: 1e-12 })
            .unwrap();
        let rho = st.to_density();
        let w = wigner_numeric_1mode(&rho, C64::new(0.0, 0.0)).unwrap();
        let mut parity = 0.0;
        for n in 0..st.dim() {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            parity += sign * st.amp(n).norm_sqr();
        }
        assert_abs_diff_eq!(w, core::f64::consts::FRAC_2_PI * parity, epsilon = 1e-12);
    }

    #[test]
    fn displacement_matrix_is_unitary_on_low_block() {
        let d = DisplacementMatrix::new(C64::new(1.3, -0.8), 70).unwrap();
        assert!(d.unitarity_defect(30) <= 1e-10);
    }

    #[test]
    fn wigner_is_linear_in_the_state() {
        let dim = 30;
        let sq = SingleModeState::from_amplitudes(
            evolve_single_mode_squeezer(0, 0.6, dim).unwrap(),
        );
        let one = SingleModeState::from_amplitudes(
            evolve_single_mode_squeezer(1, -0.4, dim).unwrap(),
        );
        let mixture = DensityMatrix::new(
            (dim, 1),
            sq.to_density().mat * C64::new(0.3, 0.0)
                + one.to_density().mat * C64::new(0.7, 0.0),
            0.0,
        )
        .unwrap();
        let pt = C64::new(0.4, -0.9);
        let w_mix = wigner_numeric_1mode(&mixture, pt).unwrap();
        let w_parts = 0.3 * wigner_numeric_1mode(&sq.to_density(), pt).unwrap()
            + 0.7 * wigner_numeric_1mode(&one.to_density(), pt).unwrap();
        assert_abs_diff_eq!(w_mix, w_parts, epsilon = 1e-12);
    }

    #[test]
    fn exponentiated_squeezer_matches_amplitude_builders() {
        let gain = GainParams::new(0.8).unwrap();
        // Headroom above the compared block keeps truncation recirculation
        // below the comparison tolerance.
        let dim = 140;
        for seed in 0..3usize {
            let numeric = evolve_single_mode_squeezer(seed, gain.g, dim).unwrap();
            let built =
                build_single_mode_macrostate(gain, seed as u32, CutoffSpec::Fixed(dim - 1))
                    .unwrap();
            for n in 0..48 {
                assert!(
                    (numeric[n] - built.amp(n)).norm() <= 1e-11,
                    "seed {seed}, n {n}"
                );
            }
        }
    }

    #[test]
    fn exponentiated_pair_squeezer_matches_hv_builder() {
        let gain = GainParams::new(1.0).unwrap();
        let dims = (108, 108);
        let numeric = evolve_two_mode_squeezer((1, 0), gain.g, dims).unwrap();
        let built = build_hv_macrostate(gain, HvSeed::H, CutoffSpec::Fixed(107)).unwrap();
        for i in 0..44 {
            for j in 0..44 {
                assert!(
                    (numeric[i * dims.1 + j] - built.amp(i, j)).norm() <= 1e-11,
                    "({i},{j})"
                );
            }
        }
    }

    #[test]
    fn collinear_builder_matches_independent_mode_product() {
        let gain = GainParams::new(0.8).unwrap();
        let dim = 140;
        let plus_mode = evolve_single_mode_squeezer(1, gain.g, dim).unwrap();
        let minus_mode = evolve_single_mode_squeezer(0, -gain.g, dim).unwrap();
        let built =
            build_collinear_macrostate(gain, CollinearSeed::Plus, CutoffSpec::Fixed(dim - 1))
                .unwrap();
        for i in 0..40 {
            for j in 0..40 {
                let product = plus_mode[i] * minus_mode[j];
                assert!((product - built.amp(i, j)).norm() <= 1e-11, "({i},{j})");
            }
        }
    }

    #[test]
    fn two_mode_vacuum_origin() {
        let dim = 16;
        let mut mat =
            DMatrix::from_element(dim * dim, dim * dim, C64::new(0.0, 0.0));
        mat[(0, 0)] = C64::new(1.0, 0.0);
        let rho = DensityMatrix::new((dim, dim), mat, 0.0).unwrap();
        let w =
            wigner_numeric_2mode(&rho, C64::new(0.0, 0.0), C64::new(0.0, 0.0)).unwrap();
        let f = core::f64::consts::FRAC_2_PI;
        assert_abs_diff_eq!(w, f * f, epsilon = 1e-12);
        let w_off =
            wigner_numeric_2mode(&rho, C64::new(0.5, 0.0), C64::new(0.0, -0.5)).unwrap();
        assert_abs_diff_eq!(w_off, f * f * libm::exp(-1.0), epsilon = 1e-10);
    }

    #[test]
    fn integration_normalizes_known_fields() {
        use crate::channel::LossChannel;
        use crate::fock::{CssParams, CssSign};
        use crate::wigner::{
            sample_grid, w_css, w_single_mode, FieldMeta, GridSpec1D, WignerFamilyTag,
        };

        let square = GridSpec1D::new(-4.0, 4.0, 201).unwrap();
        let vacuum = sample_grid(square, square, WignerFamilyTag::Numeric, FieldMeta::default(), |x, y| {
            Ok(core::f64::consts::FRAC_2_PI * libm::exp(-2.0 * (x * x + y * y)))
        })
        .unwrap();
        let est = integrate_wigner(&vacuum).unwrap();
        assert_abs_diff_eq!(est.value, 1.0, epsilon = 1e-6);
        assert!(est.resolved(1e-6));

        let gain = GainParams::new(1.0).unwrap();
        let idle = LossChannel::new(0.0).unwrap();
        let wide = GridSpec1D::new(-12.0, 12.0, 241).unwrap();
        let narrow = GridSpec1D::new(-3.0, 3.0, 121).unwrap();
        let one = sample_grid(wide, narrow, WignerFamilyTag::SingleMode, FieldMeta::default(), |x, y| {
            w_single_mode(1, gain, idle, C64::new(x, y))
        })
        .unwrap();
        let est = integrate_wigner(&one).unwrap();
        assert_abs_diff_eq!(est.value, 1.0, epsilon = 1e-3);

        let css = CssParams {
            alpha: 4.0,
            phi: core::f64::consts::FRAC_PI_2,
            sign: CssSign::Plus,
        };
        let fringe = GridSpec1D::new(-3.0, 3.0, 601).unwrap();
        let envelope = GridSpec1D::new(-7.0, 7.0, 281).unwrap();
        let cat = sample_grid(fringe, envelope, WignerFamilyTag::Css, FieldMeta::default(), |x, y| {
            w_css(css, idle, x, y)
        })
        .unwrap();
        let est = integrate_wigner(&cat).unwrap();
        assert_abs_diff_eq!(est.value, 1.0, epsilon = 1e-3);
        assert!(est.resolved(1e-3));
    }

    #[test]
    fn integration_flags_unresolved_grids() {
        use crate::channel::LossChannel;
        use crate::fock::{CssParams, CssSign};
        use crate::wigner::{sample_grid, w_css, FieldMeta, GridSpec1D, WignerFamilyTag};

        // 31 points across fringes of period ~0.4 cannot resolve them.
        let css = CssParams {
            alpha: 4.0,
            phi: core::f64::consts::FRAC_PI_2,
            sign: CssSign::Plus,
        };
        let idle = LossChannel::new(0.0).unwrap();
        let coarse_x = GridSpec1D::new(-3.0, 3.0, 31).unwrap();
        let coarse_y = GridSpec1D::new(-7.0, 7.0, 41).unwrap();
        let cat = sample_grid(coarse_x, coarse_y, WignerFamilyTag::Css, FieldMeta::default(), |x, y| {
            w_css(css, idle, x, y)
        })
        .unwrap();
        let est = integrate_wigner(&cat).unwrap();
        assert!(!est.resolved(1e-3));

        let two = GridSpec1D::new(0.0, 1.0, 2).unwrap();
        let tiny = sample_grid(two, two, WignerFamilyTag::Numeric, FieldMeta::default(), |_, _| {
            Ok(1.0)
        })
        .unwrap();
        let est = integrate_wigner(&tiny).unwrap();
        assert_abs_diff_eq!(est.value, 1.0, epsilon = 1e-12);
        assert!(est.error_estimate.is_infinite());

        let one_point = GridSpec1D::new(0.0, 0.0, 1).unwrap();
        let degenerate = WignerField {
            x: one_point,
            y: two,
            values: alloc::vec![0.0; 2],
            family: WignerFamilyTag::Numeric,
            meta: FieldMeta::default(),
        };
        assert!(matches!(
            integrate_wigner(&degenerate),
            Err(Error::Domain(_))
        ));
    }
}
