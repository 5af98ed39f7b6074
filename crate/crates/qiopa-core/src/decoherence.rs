//! Closed-form post-loss density matrices: the coherent-superposition
//! qubit form, and elementwise expressions for both macroqubit families.
//!
//! Matrix elements are assembled in log-scaled arithmetic from powers of
//! Γ, R, T, factorial ratios, and terminating hypergeometric sums; the
//! brute-force channel is the reference wherever the two routes can be
//! compared.

use nalgebra::DMatrix;

use crate::channel::LossChannel;
use crate::fock::{coherent_amplitudes, CssParams, CssSign, CutoffSpec, DensityMatrix, GainParams};
use crate::specfun::{hyp2f1_terminating, ln_factorial, log_binomial, LogScaledReal};
use crate::{Error, Result, C64};

/// Derived decoherence parameters of a lossy coherent superposition:
/// damping exponent χ = 2R|α|²sin²φ, rotation ψ = R|α|²sin2φ, and the
/// surviving/lost component amplitudes √T·α and √R·α.
#[derive(Clone, Copy, Debug)]
pub struct CssQubitParams {
    pub chi: f64,
    pub psi: f64,
    pub beta: f64,
    pub gamma_r: f64,
}

impl CssQubitParams {
    pub fn new(params: CssParams, ch: LossChannel) -> Self {
        let a2 = params.alpha * params.alpha;
        let sin_phi = libm::sin(params.phi);
        CssQubitParams {
            chi: 2.0 * ch.r * a2 * sin_phi * sin_phi,
            psi: ch.r * a2 * libm::sin(2.0 * params.phi),
            beta: libm::sqrt(ch.t) * params.alpha,
            gamma_r: libm::sqrt(ch.r) * params.alpha,
        }
    }
}

/// Post-loss coherent-superposition state: the Fock-basis matrix, its
/// 2×2 form in the (damped) coherent-component pair, and whether the
/// pair is orthogonal enough (T|α|²sin²φ > 1) for the qubit reading.
#[derive(Clone, Debug)]
pub struct CssLossyOutput {
    pub rho: DensityMatrix,
    pub qubit: [[C64; 2]; 2],
    pub orthogonal_regime: bool,
}

/// Lossy coherent superposition in closed form: the four-dyad mixture
/// (N±²/2)[|a₁⟩⟨a₁| + |a₂⟩⟨a₂| ± (λ|a₁⟩⟨a₂| + λ*|a₂⟩⟨a₁|)] with
/// a₁,₂ = √T·αe^{±iφ} and off-diagonal damping λ = e^{−χ+iψ}.
pub fn css_lossy_density(
    params: CssParams,
    ch: LossChannel,
    cutoff: CutoffSpec,
) -> Result<CssLossyOutput> {
    let norm_sq = params.norm_sq_factor()?;
    let derived = CssQubitParams::new(params, ch);
    let lambda = C64::from_polar(libm::exp(-derived.chi), derived.psi);
    let sign = match params.sign {
        CssSign::Plus => 1.0,
        CssSign::Minus => -1.0,
    };
    let a1 = C64::from_polar(derived.beta, params.phi);
    let a2 = C64::from_polar(derived.beta, -params.phi);

    let base = libm::ceil(derived.beta * derived.beta + 10.0 * derived.beta + 20.0) as usize;
    let build = |n_max: usize| -> (DMatrix<C64>, f64) {
        let dim = n_max + 1;
        let c1 = coherent_amplitudes(a1, dim);
        let c2 = coherent_amplitudes(a2, dim);
        let half_norm = 0.5 * norm_sq;
        let mat = DMatrix::from_fn(dim, dim, |r, c| {
            let direct = c1[r] * c1[c].conj() + c2[r] * c2[c].conj();
            let interf = lambda * c1[r] * c2[c].conj()
                + lambda.conj() * c2[r] * c1[c].conj();
            (direct + interf * sign) * half_norm
        });
        let trace: f64 = (0..dim).map(|n| mat[(n, n)].re).sum();
        (mat, trace)
    };

    let (mat, deficit) = match cutoff {
        CutoffSpec::Fixed(n_max) => {
            let (mat, trace) = build(n_max);
            (mat, (1.0 - trace).max(0.0))
        }
        CutoffSpec::Auto { deficit } => {
            if !(deficit > 0.0 && deficit < 1.0) {
                return Err(Error::Domain("requested deficit must lie in (0, 1)"));
            }
            let (mat, trace) = build(base);
            let achieved = (1.0 - trace).max(0.0);
            if achieved <= deficit {
                (mat, achieved)
            } else {
                let (mat, trace) = build(base + 80);
                let achieved = (1.0 - trace).max(0.0);
                if achieved > deficit {
                    return Err(Error::Truncation {
                        requested: deficit,
                        achieved,
                    });
                }
                (mat, achieved)
            }
        }
    };
    let dim = mat.nrows();
    let qubit_off = lambda * sign;
    Ok(CssLossyOutput {
        rho: DensityMatrix::new((dim, 1), mat, deficit)?,
        qubit: [
            [C64::new(0.5, 0.0), qubit_off * 0.5],
            [qubit_off.conj() * 0.5, C64::new(0.5, 0.0)],
        ],
        orthogonal_regime: ch.t * params.alpha * params.alpha
            * libm::sin(params.phi) * libm::sin(params.phi)
            > 1.0,
    })
}

/// Fock indices of a post-loss equatorial-macroqubit element
/// ⟨i_φ, j_φ⊥| ρ |k_φ, q_φ⊥⟩.
#[derive(Clone, Copy, Debug)]
pub struct EquatorialElementIndex {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub q: usize,
}

fn pow_log(base: f64, exp: usize) -> LogScaledReal {
    if exp == 0 {
        LogScaledReal::ONE
    } else if base == 0.0 {
        LogScaledReal::ZERO
    } else {
        LogScaledReal::from_parts(1, exp as f64 * libm::log(base))
    }
}

// (Γ/2)^a (−Γ/2)^b in log-scaled form with the sign carried explicitly.
fn gamma_half_powers(gamma: f64, a: usize, b: usize) -> LogScaledReal {
    let mag = pow_log(gamma / 2.0, a + b);
    let sign = if b % 2 == 0 { 1 } else { -1 };
    LogScaledReal::from_parts(sign * mag.sign, mag.log_magnitude)
}

/// Closed-form post-loss matrix element of the equatorial macroqubit in
/// its own (φ, φ⊥) basis. Elements whose bra/ket indices differ in
/// parity within either mode vanish identically; the four surviving
/// parity classes each carry two terminating hypergeometric factors in
/// R²Γ².
pub fn equatorial_lossy_element(
    idx: EquatorialElementIndex,
    gain: GainParams,
    phi: f64,
    ch: LossChannel,
) -> Result<C64> {
    let EquatorialElementIndex { i, j, k, q } = idx;
    if i % 2 != k % 2 || j % 2 != q % 2 {
        return Ok(C64::new(0.0, 0.0));
    }
    let x = ch.r * ch.r * gain.gamma * gain.gamma;
    let total = i + j + k + q;

    // Factorial ratio √(i!j!k!q!) / (half-index factorials), the class
    // prefactor, and the two hypergeometric sums.
    let (ratio, class, f_first, f_second) = if i % 2 == 0 && j % 2 == 0 {
        let ratio = 0.5
            * (ln_factorial(i as u64)
                + ln_factorial(j as u64)
                + ln_factorial(k as u64)
                + ln_factorial(q as u64))
            - ln_factorial(i as u64 / 2)
            - ln_factorial(j as u64 / 2)
            - ln_factorial(k as u64 / 2)
            - ln_factorial(q as u64 / 2);
        let class = pow_log(ch.r, 1)
            .mul(&LogScaledReal::from_value(((i + 1) * (k + 1)) as f64))
            .mul(&gamma_half_powers(gain.gamma, (i + k) / 2, (j + q) / 2));
        let f1 = hyp2f1_terminating(-(i as f64) / 2.0, -(k as f64) / 2.0, 1.5, x)?;
        let f2 = hyp2f1_terminating(-(j as f64) / 2.0, -(q as f64) / 2.0, 0.5, x)?;
        (ratio, class, f1, f2)
    } else if i % 2 == 1 && j % 2 == 0 {
        let ratio = 0.5
            * (ln_factorial(i as u64)
                + ln_factorial(j as u64)
                + ln_factorial(k as u64)
                + ln_factorial(q as u64))
            - ln_factorial((i as u64 - 1) / 2)
            - ln_factorial(j as u64 / 2)
            - ln_factorial((k as u64 - 1) / 2)
            - ln_factorial(q as u64 / 2);
        let class = gamma_half_powers(gain.gamma, (i + k) / 2 - 1, (j + q) / 2);
        let f1 = hyp2f1_terminating(
            -((1 + i) as f64) / 2.0,
            -((1 + k) as f64) / 2.0,
            0.5,
            x,
        )?;
        let f2 = hyp2f1_terminating(-(j as f64) / 2.0, -(q as f64) / 2.0, 0.5, x)?;
        (ratio, class, f1, f2)
    } else if i % 2 == 0 && j % 2 == 1 {
        let ratio = 0.5
            * (ln_factorial(i as u64)
                + ln_factorial(j as u64)
                + ln_factorial(k as u64)
                + ln_factorial(q as u64))
            - ln_factorial(i as u64 / 2)
            - ln_factorial((j as u64 - 1) / 2)
            - ln_factorial(k as u64 / 2)
            - ln_factorial((q as u64 - 1) / 2);
        let class = pow_log(ch.r * ch.r * gain.gamma * gain.gamma, 1)
            .mul(&LogScaledReal::from_value(((i + 1) * (k + 1)) as f64))
            .mul(&gamma_half_powers(gain.gamma, (i + k) / 2, (j + q) / 2 - 1));
        let f1 = hyp2f1_terminating(-(i as f64) / 2.0, -(k as f64) / 2.0, 1.5, x)?;
        let f2 = hyp2f1_terminating(
            (1.0 - j as f64) / 2.0,
            (1.0 - q as f64) / 2.0,
            1.5,
            x,
        )?;
        (ratio, class, f1, f2)
    } else {
        let ratio = 0.5
            * (ln_factorial(i as u64)
                + ln_factorial(j as u64)
                + ln_factorial(k as u64)
                + ln_factorial(q as u64))
            - ln_factorial((i as u64 - 1) / 2)
            - ln_factorial((j as u64 - 1) / 2)
            - ln_factorial((k as u64 - 1) / 2)
            - ln_factorial((q as u64 - 1) / 2);
        let class = pow_log(ch.r * gain.gamma * gain.gamma, 1).mul(&gamma_half_powers(
            gain.gamma,
            (i + k) / 2 - 1,
            (j + q) / 2 - 1,
        ));
        let f1 = hyp2f1_terminating(
            -((1 + i) as f64) / 2.0,
            -((1 + k) as f64) / 2.0,
            0.5,
            x,
        )?;
        let f2 = hyp2f1_terminating(
            (1.0 - j as f64) / 2.0,
            (1.0 - q as f64) / 2.0,
            1.5,
            x,
        )?;
        (ratio, class, f1, f2)
    };

    let common = pow_log(libm::sqrt(ch.t), total)
        .mul(&LogScaledReal::from_parts(
            1,
            -(2.0 + total as f64 / 2.0) * libm::log(1.0 - x),
        ))
        .mul(&LogScaledReal::from_parts(1, -4.0 * libm::log(gain.c)))
        .mul(&LogScaledReal::from_parts(1, ratio));
    let magnitude = common
        .mul(&class)
        .mul(&LogScaledReal::from_value(f_first))
        .mul(&LogScaledReal::from_value(f_second));
    // Phase e^{iφ(j+k−i−q)/2}; the half-difference is integral whenever
    // the parity classes match.
    let half_diff = (j + k) as f64 - (i + q) as f64;
    let phase = C64::from_polar(1.0, phi * half_diff / 2.0);
    Ok(phase * magnitude.value())
}

/// Closed-form post-loss matrix element ⟨iH, jV| ρ |kH, qV⟩ of the
/// H-seeded macroqubit; the V index of the ket is fixed at
/// q = k + j − i by photon-number-difference conservation, and the
/// element is a geometric-weight sum over the number p of photon pairs
/// lost from the seeded branch.
pub fn hv_lossy_element(
    i: usize,
    j: usize,
    k: usize,
    gain: GainParams,
    ch: LossChannel,
    p_max: Option<usize>,
) -> f64 {
    if k + j < i {
        return 0.0;
    }
    let q = k + j - i;
    let gamma = gain.gamma;
    let p_hi = p_max.unwrap_or_else(|| {
        if gamma < 1e-12 {
            4
        } else {
            libm::ceil(libm::log(1e-18) / (2.0 * libm::log(gamma))) as usize + 8
        }
    });
    let ln_c4 = 4.0 * libm::log(gain.c);
    let mut sum = 0.0;
    for p in 0..=p_hi {
        if p + i == 0 || p + k == 0 {
            continue;
        }
        let b1 = log_binomial((p + i) as u64, i as i64);
        let b2 = log_binomial((p + i - 1) as u64, j as i64);
        let b3 = log_binomial((p + k) as u64, k as i64);
        let b4 = log_binomial((p + k - 1) as u64, q as i64);
        if b1.is_zero() || b2.is_zero() || b3.is_zero() || b4.is_zero() {
            continue;
        }
        let gamma_exp = 2 * p + i + k;
        let r_exp = (2 * p + i) as i64 - 1 - j as i64;
        debug_assert!(gamma_exp >= 2 && r_exp >= 0);
        let gamma_pow = pow_log(gamma, gamma_exp - 2);
        let t_pow = pow_log(ch.t, k + j);
        let r_pow = pow_log(ch.r, r_exp as usize);
        if gamma_pow.is_zero() || t_pow.is_zero() || r_pow.is_zero() {
            continue;
        }
        let ln_mag = gamma_pow.log_magnitude
            + t_pow.log_magnitude
            + r_pow.log_magnitude
            + 0.5 * (libm::log((p + i) as f64) + libm::log((p + k) as f64))
            + 0.5
                * (b1.log_magnitude + b2.log_magnitude + b3.log_magnitude + b4.log_magnitude)
            - ln_c4;
        sum += libm::exp(ln_mag);
    }
    sum
}

/// Assembles the equatorial post-loss matrix from its closed-form
/// elements on a `dim` × `dim` per-mode truncation.
pub fn assemble_equatorial_lossy(
    gain: GainParams,
    phi: f64,
    ch: LossChannel,
    dim: usize,
) -> Result<DensityMatrix> {
    let flat = dim * dim;
    let mut mat = DMatrix::from_element(flat, flat, C64::new(0.0, 0.0));
    for i in 0..dim {
        for j in 0..dim {
            let row = i * dim + j;
            for k in 0..dim {
                for q in 0..dim {
                    let col = k * dim + q;
                    if col < row {
                        continue;
                    }
                    let v = equatorial_lossy_element(
                        EquatorialElementIndex { i, j, k, q },
                        gain,
                        phi,
                        ch,
                    )?;
                    mat[(row, col)] = v;
                    if col != row {
                        mat[(col, row)] = v.conj();
                    }
                }
            }
        }
    }
    let trace: f64 = (0..flat).map(|r| mat[(r, r)].re).sum();
    DensityMatrix::new((dim, dim), mat, (1.0 - trace).max(0.0))
}

/// Assembles the H-seeded post-loss matrix from its closed-form
/// elements; only the q = k + j − i diagonal band is populated.
pub fn assemble_hv_lossy(gain: GainParams, ch: LossChannel, dim: usize) -> Result<DensityMatrix> {
    let flat = dim * dim;
    let mut mat = DMatrix::from_element(flat, flat, C64::new(0.0, 0.0));
    for i in 0..dim {
        for j in 0..dim {
            let row = i * dim + j;
            for k in 0..dim {
                if k + j < i {
                    continue;
                }
                let q = k + j - i;
                if q >= dim {
                    continue;
                }
                let col = k * dim + q;
                if col < row {
                    continue;
                }
                let v = hv_lossy_element(i, j, k, gain, ch, None);
                mat[(row, col)] = C64::new(v, 0.0);
                if col != row {
                    mat[(col, row)] = C64::new(v, 0.0);
                }
            }
        }
    }
    let trace: f64 = (0..flat).map(|r| mat[(r, r)].re).sum();
    DensityMatrix::new((dim, dim), mat, (1.0 - trace).max(0.0))
}
