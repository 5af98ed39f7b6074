//! Closed-form Wigner functions for the amplified macrostates and the
//! coherent superposition, with and without linear loss, plus the
//! origin-negativity witnesses and quadrature uncertainties.
//!
//! Convention: a phase-space point is α = X + iY, the vacuum is
//! W(α) = (2/π)e^{−2|α|²}, and ∫∫ W dX dY = 1 per mode. The lossy
//! forms are Gaussian-integral reductions; every family is checked
//! against the displaced-parity oracle on the truncated Fock space.

use alloc::vec::Vec;

use crate::channel::LossChannel;
use crate::fock::{CssParams, CssSign, GainParams};
use crate::specfun::{laguerre, ln_factorial, log_binomial};
use crate::{Error, Result, C64};

pub type PhasePoint = C64;

/// Gaussian-kernel parameters of the lossy closed forms:
/// ε = (1 + 2RS²)/2 and κ = RCS/2 for the collinear geometry,
/// μ = RCS = 2κ for the non-collinear one (ε is shared).
#[derive(Clone, Copy, Debug)]
pub struct LossWignerParams {
    pub epsilon: f64,
    pub kappa: f64,
    pub mu: f64,
}

impl LossWignerParams {
    pub fn new(gain: GainParams, ch: LossChannel) -> Self {
        let rs2 = ch.r * gain.s * gain.s;
        LossWignerParams {
            epsilon: 0.5 * (1.0 + 2.0 * rs2),
            kappa: 0.5 * ch.r * gain.c * gain.s,
            mu: ch.r * gain.c * gain.s,
        }
    }

    /// Determinant (1 + 4RTS²)/4 of the shared Gaussian kernel; equals
    /// ε² − 4κ² = ε² − μ² and stays ≥ T²/4 > 0 below total loss.
    pub fn det(&self) -> f64 {
        self.epsilon * self.epsilon - 4.0 * self.kappa * self.kappa
    }
}

// binom(N,n)(−T)^n/n!: the seed-expansion weights of the lossy sums.
fn seed_coeff(cap_n: usize, n: usize, t: f64) -> f64 {
    let binom = log_binomial(cap_n as u64, n as i64).value();
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    binom * sign * libm::pow(t, n as f64) * libm::exp(-ln_factorial(n as u64))
}

/// Gaussian moment integrals I_n = (−1)^n ∂²ⁿ/∂zⁿ∂z*ⁿ of
/// (τ²−4μν)^{−1/2} exp[−(μz² + νz*² + τ|z|²)/(τ²−4μν)], written out
/// for n ≤ 2. For the symmetric parameter sets used here (μ = ν) the
/// value is real.
pub fn i_n_integral(n: usize, mu: f64, nu: f64, tau: f64, z: C64) -> Result<f64> {
    let d = tau * tau - 4.0 * mu * nu;
    if !(d > 0.0) {
        return Err(Error::Domain("gaussian kernel requires tau^2 - 4*mu*nu > 0"));
    }
    let zc = z.conj();
    let q = (z * z * mu + zc * zc * nu + z * zc * tau) / d;
    let f = (-q).exp() / libm::sqrt(d);
    let value = match n {
        0 => f,
        1 => {
            let u = (z * (2.0 * mu) + zc * tau) / d;
            let v = (zc * (2.0 * nu) + z * tau) / d;
            f * (C64::new(tau / d, 0.0) - u * v)
        }
        2 => {
            let u = (z * (2.0 * mu) + zc * tau) / d;
            let v = (zc * (2.0 * nu) + z * tau) / d;
            let poly = C64::new(2.0 * tau * tau / (d * d) + 4.0 * mu * nu / (d * d), 0.0)
                - v * v * (2.0 * mu / d)
                - u * u * (2.0 * nu / d)
                - u * v * (4.0 * tau / d)
                + u * u * v * v;
            f * poly
        }
        _ => return Err(Error::Unsupported("moment order capped at n = 2")),
    };
    Ok(value.re)
}

/// Two-mode Gaussian moment integrals J_{n,m} over the kernel
/// (τ²−μ²)^{−1} exp[−(τ(|z|²+|w|²) + μ(zw + z*w*))/(τ²−μ²)], with the
/// mixed-derivative order capped at (n, m) = (1, 0).
pub fn j_nm_integral(n: usize, m: usize, tau: f64, mu: f64, z: C64, w: C64) -> Result<f64> {
    let e = tau * tau - mu * mu;
    if !(e > 0.0) {
        return Err(Error::Domain("gaussian kernel requires tau^2 - mu^2 > 0"));
    }
    if m != 0 || n > 1 {
        return Err(Error::Unsupported("mixed moment order capped at (1, 0)"));
    }
    let expo = (tau * (z.norm_sqr() + w.norm_sqr()) + 2.0 * mu * (z * w).re) / e;
    let base = libm::exp(-expo) / e;
    if n == 0 {
        return Ok(base);
    }
    let a = (z.conj() * tau + w * mu) / e;
    let b = (z * tau + w.conj() * mu) / e;
    Ok(base * (tau / e - (a * b).re))
}

// Evolved single-mode coordinate ᾱ = αC − α*S = Xe^{−g} + iYe^{g}.
fn evolved_single(pt: C64, gain: GainParams) -> C64 {
    C64::new(pt.re * (gain.c - gain.s), pt.im * (gain.c + gain.s))
}

fn lossy_seed_sum(
    cap_n: usize,
    t: f64,
    mu: f64,
    nu: f64,
    tau: f64,
    z: C64,
) -> Result<f64> {
    let mut sum = 0.0;
    for n in 0..=cap_n {
        sum += seed_coeff(cap_n, n, t) * i_n_integral(n, mu, nu, tau, z)?;
    }
    Ok(sum)
}

/// Wigner function of the single-mode amplified N-photon seed after
/// loss R, at phase-space point α = X + iY. Closed form for N ≤ 2; at
/// R = 0 any N reduces to (2/π)(−1)^N L_N(4|ᾱ|²) e^{−2|ᾱ|²}.
pub fn w_single_mode(
    seed: usize,
    gain: GainParams,
    ch: LossChannel,
    pt: PhasePoint,
) -> Result<f64> {
    let zbar = evolved_single(pt, gain);
    if seed <= 2 {
        let p = LossWignerParams::new(gain, ch);
        let sum = lossy_seed_sum(seed, ch.t, p.kappa, p.kappa, p.epsilon, zbar)?;
        return Ok(sum / core::f64::consts::PI);
    }
    if ch.r == 0.0 {
        let arg = 4.0 * zbar.norm_sqr();
        let sign = if seed % 2 == 0 { 1.0 } else { -1.0 };
        return Ok(core::f64::consts::FRAC_2_PI
            * sign
            * laguerre(seed as u32, arg)?
            * libm::exp(-2.0 * zbar.norm_sqr()));
    }
    Err(Error::Unsupported(
        "lossy closed form covers seeds 0..=2; use the numeric oracle above that",
    ))
}

// Evolved symmetric/antisymmetric coordinates of the collinear pair:
// ᾱ = [(α+β)C − (α*+β*)S]/√2, β̄ = [(β−α)C + (β*−α*)S]/√2.
fn evolved_collinear(alpha: C64, beta: C64, gain: GainParams) -> (C64, C64) {
    let inv_sqrt2 = 1.0 / libm::sqrt(2.0);
    let sum = alpha + beta;
    let diff = beta - alpha;
    let abar = (sum * gain.c - sum.conj() * gain.s) * inv_sqrt2;
    let bbar = (diff * gain.c + diff.conj() * gain.s) * inv_sqrt2;
    (abar, bbar)
}

/// Wigner function of the collinear macrostate with (N, M) seed photons
/// in the symmetric/antisymmetric modes, evaluated at the lab-mode pair
/// (α, β). The lossy closed form covers (N, M) ∈ {(0,0), (1,0), (0,1)};
/// at R = 0 any seed pair is a Laguerre product.
pub fn w_collinear(
    seed_n: usize,
    seed_m: usize,
    gain: GainParams,
    ch: LossChannel,
    alpha: C64,
    beta: C64,
) -> Result<f64> {
    let (abar, bbar) = evolved_collinear(alpha, beta, gain);
    let pi2 = core::f64::consts::PI * core::f64::consts::PI;
    let supported = matches!((seed_n, seed_m), (0, 0) | (1, 0) | (0, 1));
    if supported {
        let p = LossWignerParams::new(gain, ch);
        let plus = lossy_seed_sum(seed_n, ch.t, p.kappa, p.kappa, p.epsilon, abar)?;
        let minus = lossy_seed_sum(seed_m, ch.t, -p.kappa, -p.kappa, p.epsilon, bbar)?;
        return Ok(plus * minus / pi2);
    }
    if ch.r == 0.0 {
        let sign = if (seed_n + seed_m) % 2 == 0 { 1.0 } else { -1.0 };
        return Ok((4.0 / pi2)
            * sign
            * laguerre(seed_n as u32, 4.0 * abar.norm_sqr())?
            * laguerre(seed_m as u32, 4.0 * bbar.norm_sqr())?
            * libm::exp(-2.0 * (abar.norm_sqr() + bbar.norm_sqr())));
    }
    Err(Error::Unsupported(
        "lossy closed form covers seed pairs (0,0), (1,0), (0,1); use the numeric oracle",
    ))
}

/// Squeezing and quadrature variables of the non-collinear geometry at
/// a four-mode phase-space point (α₁, α₂, β₁, β₂).
#[derive(Clone, Copy, Debug)]
pub struct QuadratureDeltas {
    pub gamma_a_plus: C64,
    pub gamma_a_minus: C64,
    pub gamma_b_plus: C64,
    pub gamma_b_minus: C64,
    pub delta_a: C64,
    pub delta_b: C64,
    pub delta_sq: f64,
}

impl QuadratureDeltas {
    pub fn new(pt: [C64; 4], gain: GainParams) -> Self {
        let [a1, a2, b1, b2] = pt;
        let eg = libm::exp(gain.g);
        let emg = libm::exp(-gain.g);
        let i = C64::new(0.0, 1.0);
        let gamma_a_plus = (a1 - a2.conj()) * eg;
        let gamma_a_minus = (a1 + a2.conj()) * emg * i;
        let gamma_b_plus = (b1 + b2.conj()) * eg;
        let gamma_b_minus = (b1 - b2.conj()) * emg * i;
        let sqrt2 = libm::sqrt(2.0);
        let delta_a = (a1 * gain.c - a2.conj() * gain.s) * sqrt2;
        let delta_b = (b1 * gain.c + b2.conj() * gain.s) * sqrt2;
        let delta_sq = 0.5
            * (gamma_a_plus.norm_sqr()
                + gamma_a_minus.norm_sqr()
                + gamma_b_plus.norm_sqr()
                + gamma_b_minus.norm_sqr());
        QuadratureDeltas {
            gamma_a_plus,
            gamma_a_minus,
            gamma_b_plus,
            gamma_b_minus,
            delta_a,
            delta_b,
            delta_sq,
        }
    }
}

// Rotated and evolved coordinates of the two squeezed pairs behind the
// non-collinear state: pair A couples (α₁, α₂), pair B couples (β₁, β₂),
// with the injection phase φ entering through the mode rotation.
fn evolved_noncollinear(pt: [C64; 4], gain: GainParams, phi: f64) -> [C64; 4] {
    let [a1, a2, b1, b2] = pt;
    let inv_sqrt2 = 1.0 / libm::sqrt(2.0);
    let e_m = C64::from_polar(1.0, -phi);
    let e_p = C64::from_polar(1.0, phi);
    let ra1 = (a1 + e_m * b1) * inv_sqrt2;
    let rb1 = (b1 - e_p * a1) * inv_sqrt2;
    let ra2 = (a2 - e_p * b2) * inv_sqrt2;
    let rb2 = (b2 + e_m * a2) * inv_sqrt2;
    [
        ra1 * gain.c - ra2.conj() * gain.s,
        ra2 * gain.c - ra1.conj() * gain.s,
        rb1 * gain.c + rb2.conj() * gain.s,
        rb2 * gain.c + rb1.conj() * gain.s,
    ]
}

/// Wigner function of the non-collinear macrostate with (N, M) seed
/// photons in the two rotated pair modes, injection phase φ, at the
/// four-mode point (α₁, α₂, β₁, β₂). Lossy closed form for
/// (N, M) ∈ {(0,0), (1,0)}; any seeds at R = 0.
pub fn w_noncollinear(
    seed_n: usize,
    seed_m: usize,
    gain: GainParams,
    phi: f64,
    ch: LossChannel,
    pt: [C64; 4],
) -> Result<f64> {
    let [za1, za2, zb1, zb2] = evolved_noncollinear(pt, gain, phi);
    let pi2 = core::f64::consts::PI * core::f64::consts::PI;
    let supported = matches!((seed_n, seed_m), (0, 0) | (1, 0));
    if supported {
        let p = LossWignerParams::new(gain, ch);
        let mut plus = 0.0;
        for n in 0..=seed_n {
            plus += seed_coeff(seed_n, n, ch.t)
                * j_nm_integral(n, 0, p.epsilon, p.mu, za1, za2)?;
        }
        let mut minus = 0.0;
        for m in 0..=seed_m {
            minus += seed_coeff(seed_m, m, ch.t)
                * j_nm_integral(m, 0, p.epsilon, -p.mu, zb1, zb2)?;
        }
        return Ok(plus * minus / (pi2 * pi2));
    }
    if ch.r == 0.0 {
        let sign = if (seed_n + seed_m) % 2 == 0 { 1.0 } else { -1.0 };
        let total = za1.norm_sqr() + za2.norm_sqr() + zb1.norm_sqr() + zb2.norm_sqr();
        return Ok((16.0 / (pi2 * pi2))
            * sign
            * laguerre(seed_n as u32, 4.0 * za1.norm_sqr())?
            * laguerre(seed_m as u32, 4.0 * zb1.norm_sqr())?
            * libm::exp(-2.0 * total));
    }
    Err(Error::Unsupported(
        "lossy closed form covers seed pairs (0,0) and (1,0); use the numeric oracle",
    ))
}

/// Wigner function of the lossy coherent superposition at (X, Y): two
/// displaced Gaussians at (√Tαcosφ, ±√Tαsinφ) plus an interference
/// fringe damped by e^{−2R|α|²sin²φ}.
pub fn w_css(params: CssParams, ch: LossChannel, x: f64, y: f64) -> Result<f64> {
    let norm_sq = params.norm_sq_factor()?;
    let beta = libm::sqrt(ch.t) * params.alpha;
    let cx = beta * libm::cos(params.phi);
    let cy = beta * libm::sin(params.phi);
    let sign = match params.sign {
        CssSign::Plus => 1.0,
        CssSign::Minus => -1.0,
    };
    let g_plus = libm::exp(-2.0 * ((x - cx) * (x - cx) + (y - cy) * (y - cy)));
    let g_minus = libm::exp(-2.0 * ((x - cx) * (x - cx) + (y + cy) * (y + cy)));
    let sin_phi = libm::sin(params.phi);
    let chi = 2.0 * ch.r * params.alpha * params.alpha * sin_phi * sin_phi;
    let fringe_phase = 4.0 * x * beta * sin_phi
        - (ch.t - ch.r) * params.alpha * params.alpha * libm::sin(2.0 * params.phi);
    let interference = 2.0
        * libm::exp(-chi)
        * libm::exp(-2.0 * ((x - cx) * (x - cx) + y * y))
        * libm::cos(fringe_phase);
    Ok(0.5 * norm_sq * core::f64::consts::FRAC_2_PI * (g_plus + g_minus + sign * interference))
}

/// Selects a negativity-witness family together with its state
/// parameters; the loss channel is supplied at evaluation time.
#[derive(Clone, Copy, Debug)]
pub enum WitnessFamily {
    SingleMode(GainParams),
    Collinear(GainParams),
    Noncollinear(GainParams),
    Css(CssParams),
}

// Interference-trough coordinate of the lossy superposition: the
// cosine minimum (sign +) or maximum (sign −) nearest the fringe
// envelope center X = √Tαcosφ, paired with Y = 0.
fn css_trough_x(params: CssParams, ch: LossChannel) -> f64 {
    let beta = libm::sqrt(ch.t) * params.alpha;
    let center = beta * libm::cos(params.phi);
    let freq = 4.0 * beta * libm::sin(params.phi);
    if libm::fabs(freq) < 1e-12 {
        return center;
    }
    // Fringe phase at the center is α²sin2φ; step to the nearest odd
    // (Plus) or even (Minus) multiple of π.
    let tau = 2.0 * core::f64::consts::PI;
    let at_center = params.alpha * params.alpha * libm::sin(2.0 * params.phi);
    let target = match params.sign {
        CssSign::Plus => core::f64::consts::PI,
        CssSign::Minus => 0.0,
    };
    let mut delta_phase = target - libm::fmod(at_center, tau);
    while delta_phase > core::f64::consts::PI {
        delta_phase -= tau;
    }
    while delta_phase < -core::f64::consts::PI {
        delta_phase += tau;
    }
    center + delta_phase / freq
}

/// Origin-negativity witness: an analytic Wigner value whose sign
/// tracks 2R − 1 for every family. The amplified families use the
/// origin of their evolved coordinates; the coherent superposition uses
/// the interference trough nearest the fringe center at Y = 0.
pub fn negativity_at_origin(family: WitnessFamily, ch: LossChannel) -> Result<f64> {
    let two_r_minus_1 = 2.0 * ch.r - 1.0;
    match family {
        WitnessFamily::SingleMode(gain) => {
            let d4 = 1.0 + 4.0 * ch.r * ch.t * gain.s * gain.s;
            Ok(core::f64::consts::FRAC_2_PI * two_r_minus_1 / libm::pow(d4, 1.5))
        }
        WitnessFamily::Collinear(gain) => {
            let d4 = 1.0 + 4.0 * ch.r * ch.t * gain.s * gain.s;
            Ok(two_r_minus_1 / d4)
        }
        WitnessFamily::Noncollinear(gain) => {
            let d4 = 1.0 + 4.0 * ch.r * ch.t * gain.s * gain.s;
            let pi4 = libm::pow(core::f64::consts::PI, 4.0);
            Ok(16.0 / pi4 * two_r_minus_1 / libm::pow(d4, 3.0))
        }
        WitnessFamily::Css(params) => w_css(params, ch, css_trough_x(params, ch), 0.0),
    }
}

/// Quadrature standard deviations (ΔX, ΔY) of the lossy single-mode
/// state: ΔX = ½√((2N+1)Te^{2g} + R), ΔY = ½√((2N+1)Te^{−2g} + R) for
/// seeds N ∈ {0, 1}.
pub fn quadrature_uncertainty(
    seed: usize,
    gain: GainParams,
    ch: LossChannel,
) -> Result<(f64, f64)> {
    let stretch = match seed {
        0 => 1.0,
        1 => 3.0,
        _ => {
            return Err(Error::Unsupported(
                "uncertainty closed form covers seeds 0 and 1",
            ))
        }
    };
    let e2g = libm::exp(2.0 * gain.g);
    let dx = 0.5 * libm::sqrt(stretch * ch.t * e2g + ch.r);
    let dy = 0.5 * libm::sqrt(stretch * ch.t / e2g + ch.r);
    Ok((dx, dy))
}

/// Maps a planar section (X, Y, φ) to the collinear lab-mode pair:
/// α = ((X−Y)/2)e^{iφ}, β = ((X+Y)/2)e^{−iφ}, so that X = α + β* and
/// Y = β − α* at φ = 0.
pub fn collinear_slice(x: f64, y: f64, phi: f64) -> (C64, C64) {
    let alpha = C64::from_polar((x - y) / 2.0, phi);
    let beta = C64::from_polar((x + y) / 2.0, -phi);
    (alpha, beta)
}

/// Planar section of the four-mode geometry: the seeded pair modes
/// carry the collinear-style coordinates and the conjugate modes sit at
/// their origin.
pub fn noncollinear_slice(x: f64, y: f64, phi: f64) -> [C64; 4] {
    let (alpha, beta) = collinear_slice(x, y, phi);
    [alpha, C64::new(0.0, 0.0), beta, C64::new(0.0, 0.0)]
}

/// Uniform 1-D sampling grid with `count` points from `start` to
/// `stop` inclusive.
#[derive(Clone, Copy, Debug)]
pub struct GridSpec1D {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl GridSpec1D {
    pub fn new(start: f64, stop: f64, count: usize) -> Result<Self> {
        if count == 0 || !start.is_finite() || !stop.is_finite() || stop < start {
            return Err(Error::Domain("grid requires finite start <= stop, count >= 1"));
        }
        Ok(GridSpec1D { start, stop, count })
    }

    pub fn step(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.stop - self.start) / (self.count - 1) as f64
        }
    }

    pub fn point(&self, index: usize) -> f64 {
        self.start + self.step() * index as f64
    }
}

/// Family tag carried by a sampled field.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WignerFamilyTag {
    SingleMode,
    Collinear,
    Noncollinear,
    Css,
    Numeric,
}

/// State parameters recorded alongside a sampled field.
#[derive(Clone, Copy, Debug, Default)]
pub struct FieldMeta {
    pub g: Option<f64>,
    pub r: Option<f64>,
    pub seed_n: Option<usize>,
    pub seed_m: Option<usize>,
    pub alpha: Option<f64>,
    pub phi: Option<f64>,
}

/// A Wigner function sampled on a rectangular (X, Y) grid; values are
/// stored X-major: `values[ix * y.count + iy]`.
#[derive(Clone, Debug)]
pub struct WignerField {
    pub x: GridSpec1D,
    pub y: GridSpec1D,
    pub values: Vec<f64>,
    pub family: WignerFamilyTag,
    pub meta: FieldMeta,
}

impl WignerField {
    pub fn value(&self, ix: usize, iy: usize) -> f64 {
        self.values[ix * self.y.count + iy]
    }
}

/// Samples a point-evaluation closure over the grid in deterministic
/// X-major order.
pub fn sample_grid<F>(
    x: GridSpec1D,
    y: GridSpec1D,
    family: WignerFamilyTag,
    meta: FieldMeta,
    mut eval: F,
) -> Result<WignerField>
where
    F: FnMut(f64, f64) -> Result<f64>,
{
    let mut values = Vec::with_capacity(x.count * y.count);
    for ix in 0..x.count {
        for iy in 0..y.count {
            values.push(eval(x.point(ix), y.point(iy))?);
        }
    }
    Ok(WignerField {
        x,
        y,
        values,
        family,
        meta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{lossy_density_from_pure, lossy_density_from_pure_single};
    use crate::fock::{
        build_single_mode_macrostate, BasisLabel, CutoffSpec, TwoModeFockState,
    };
    use crate::oracle::{
        evolve_two_mode_squeezer, wigner_numeric_1mode, wigner_numeric_2mode,
    };
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    const PI: f64 = core::f64::consts::PI;

    // −(1/4)∇² of a scalar field over (Re z, Im z), five-point stencil.
    fn neg_quarter_laplacian<F: Fn(C64) -> f64>(f: &F, z: C64, h: f64) -> f64 {
        let fx = f(z + C64::new(h, 0.0)) + f(z - C64::new(h, 0.0));
        let fy = f(z + C64::new(0.0, h)) + f(z - C64::new(0.0, h));
        -(fx + fy - 4.0 * f(z)) / (4.0 * h * h)
    }

    #[test]
    fn i_integrals_match_their_derivative_definition() {
        assert_relative_eq!(
            i_n_integral(0, 0.0, 0.0, 1.0, C64::new(0.3, -0.4)).unwrap(),
            libm::exp(-0.25),
            max_relative = 1e-14
        );
        assert_abs_diff_eq!(
            i_n_integral(1, 0.0, 0.0, 1.0, C64::new(0.0, 0.0)).unwrap(),
            1.0,
            epsilon = 1e-14
        );
        let (mu, tau) = (0.11, 0.9);
        let z = C64::new(0.3, 0.2);
        let i0 = |p: C64| i_n_integral(0, mu, mu, tau, p).unwrap();
        let i1 = |p: C64| i_n_integral(1, mu, mu, tau, p).unwrap();
        let h = 1e-3;
        assert_relative_eq!(
            i_n_integral(1, mu, mu, tau, z).unwrap(),
            neg_quarter_laplacian(&i0, z, h),
            max_relative = 1e-5
        );
        // I₂ = −(1/4)∇² I₁ once more.
        assert_relative_eq!(
            i_n_integral(2, mu, mu, tau, z).unwrap(),
            neg_quarter_laplacian(&i1, z, h),
            max_relative = 1e-5
        );
        assert!(i_n_integral(0, 1.0, 1.0, 1.0, z).is_err());
        assert!(i_n_integral(3, 0.0, 0.0, 1.0, z).is_err());
    }

    #[test]
    fn j_integrals_match_their_derivative_definition() {
        assert_abs_diff_eq!(
            j_nm_integral(0, 0, 1.0, 0.0, C64::new(0.0, 0.0), C64::new(0.0, 0.0)).unwrap(),
            1.0,
            epsilon = 1e-14
        );
        assert_relative_eq!(
            j_nm_integral(0, 0, 1.0, 0.5, C64::new(0.0, 0.0), C64::new(0.0, 0.0)).unwrap(),
            4.0 / 3.0,
            max_relative = 1e-14
        );
        let (tau, mu) = (0.8, 0.35);
        let w = C64::new(-0.2, 0.5);
        let j0 = |p: C64| j_nm_integral(0, 0, tau, mu, p, w).unwrap();
        let z = C64::new(0.4, 0.1);
        assert_relative_eq!(
            j_nm_integral(1, 0, tau, mu, z, w).unwrap(),
            neg_quarter_laplacian(&j0, z, 1e-3),
            max_relative = 1e-5
        );
        assert!(j_nm_integral(0, 0, 0.5, 0.5, w, w).is_err());
        assert!(j_nm_integral(1, 1, 1.0, 0.0, w, w).is_err());
    }

    #[test]
    fn single_mode_corner_values() {
        let g0 = GainParams::new(0.0).unwrap();
        let g3 = GainParams::new(3.0).unwrap();
        let lossless = LossChannel::new(0.0).unwrap();
        let origin = C64::new(0.0, 0.0);
        assert_relative_eq!(
            w_single_mode(0, g0, lossless, origin).unwrap(),
            2.0 / PI,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            w_single_mode(1, g3, lossless, origin).unwrap(),
            -2.0 / PI,
            max_relative = 1e-14
        );
        let half = LossChannel::new(0.5).unwrap();
        assert_abs_diff_eq!(
            w_single_mode(1, g3, half, origin).unwrap(),
            0.0,
            epsilon = 1e-14
        );
        // Lossy origin closed form for the one-photon seed. At g = 3 the
        // master sum cancels two O(1) terms down to O(1e-3) of their
        // size, so conditioning costs a few digits.
        let ch = LossChannel::new(0.3).unwrap();
        let d4 = 1.0 + 4.0 * ch.r * ch.t * g3.s * g3.s;
        assert_relative_eq!(
            w_single_mode(1, g3, ch, origin).unwrap(),
            (2.0 / PI) * (2.0 * ch.r - 1.0) / libm::pow(d4, 1.5),
            max_relative = 1e-10
        );
        let g1 = GainParams::new(1.0).unwrap();
        let d4 = 1.0 + 4.0 * ch.r * ch.t * g1.s * g1.s;
        assert_relative_eq!(
            w_single_mode(1, g1, ch, origin).unwrap(),
            (2.0 / PI) * (2.0 * ch.r - 1.0) / libm::pow(d4, 1.5),
            max_relative = 1e-13
        );
        // Above the closed-form cap only R = 0 is served.
        assert!(w_single_mode(3, g3, ch, origin).is_err());
        assert!(w_single_mode(3, g0, lossless, origin).is_ok());
    }

    #[test]
    fn single_mode_matches_oracle_on_a_grid() {
        let gain = GainParams::new(0.6).unwrap();
        for r in [0.0, 0.3] {
            let ch = LossChannel::new(r).unwrap();
            for seed in 0..=2usize {
                let pure =
                    build_single_mode_macrostate(gain, seed as u32, CutoffSpec::Fixed(71))
                        .unwrap();
                let rho = lossy_density_from_pure_single(&pure, ch, None).unwrap();
                for (x, y) in [(0.0, 0.0), (0.6, -0.4), (-1.1, 0.8), (0.2, 1.3)] {
                    let pt = C64::new(x, y);
                    let analytic = w_single_mode(seed, gain, ch, pt).unwrap();
                    let numeric = wigner_numeric_1mode(&rho, pt).unwrap();
                    assert_abs_diff_eq!(analytic, numeric, epsilon = 1e-8);
                }
            }
        }
    }

    #[test]
    fn collinear_corner_values() {
        let g1 = GainParams::new(1.0).unwrap();
        let g3 = GainParams::new(3.0).unwrap();
        let origin = C64::new(0.0, 0.0);
        let w = w_collinear(0, 0, g1, LossChannel::new(0.3).unwrap(), origin, origin).unwrap();
        let d4 = 1.0 + 4.0 * 0.3 * 0.7 * g1.s * g1.s;
        assert_relative_eq!(w, (2.0 / PI) * (2.0 / PI) / d4, max_relative = 1e-12);
        assert_relative_eq!(
            w_collinear(1, 0, g1, LossChannel::new(0.0).unwrap(), origin, origin).unwrap(),
            -(2.0 / PI) * (2.0 / PI),
            max_relative = 1e-12
        );
        assert_abs_diff_eq!(
            w_collinear(1, 0, g3, LossChannel::new(0.5).unwrap(), origin, origin).unwrap(),
            0.0,
            epsilon = 1e-14
        );
        assert!(
            w_collinear(1, 1, g1, LossChannel::new(0.2).unwrap(), origin, origin).is_err()
        );
        assert!(w_collinear(2, 1, g1, LossChannel::new(0.0).unwrap(), origin, origin).is_ok());
    }

    #[test]
    fn collinear_matches_oracle_through_mode_rotation() {
        // The symmetric/antisymmetric modes evolve as independent
        // single-mode squeezers with opposite signs, so the two-mode
        // Wigner at the rotated coordinates is a product of single-mode
        // oracle values. Evolution headroom (dim 130, kept 72) keeps
        // squeezer recirculation negligible.
        let gain = GainParams::new(0.6).unwrap();
        let inv_sqrt2 = 1.0 / libm::sqrt(2.0);
        let evolve_dim = 130;
        let keep = 72;
        let lossy_mode = |seed: usize, g: f64, ch: LossChannel| {
            let full = crate::oracle::evolve_single_mode_squeezer(seed, g, evolve_dim).unwrap();
            let state = crate::fock::SingleModeState::from_amplitudes(
                full[..keep].to_vec(),
            );
            lossy_density_from_pure_single(&state, ch, None).unwrap()
        };
        for (seed_n, seed_m) in [(0usize, 0usize), (1, 0), (0, 1)] {
            for r in [0.0, 0.3] {
                let ch = LossChannel::new(r).unwrap();
                let rho_plus = lossy_mode(seed_n, gain.g, ch);
                let rho_minus = lossy_mode(seed_m, -gain.g, ch);
                for (x, y) in [(0.0, 0.0), (0.5, 0.3), (-0.7, 0.9)] {
                    let (alpha, beta) = collinear_slice(x, y, 0.0);
                    let analytic =
                        w_collinear(seed_n, seed_m, gain, ch, alpha, beta).unwrap();
                    let u = (alpha + beta) * inv_sqrt2;
                    let v = (beta - alpha) * inv_sqrt2;
                    let numeric = wigner_numeric_1mode(&rho_plus, u).unwrap()
                        * wigner_numeric_1mode(&rho_minus, v).unwrap();
                    assert_abs_diff_eq!(analytic, numeric, epsilon = 1e-8);
                }
            }
        }
    }

    #[test]
    fn collinear_slice_reconstructs_the_projection_quadratures() {
        for (x, y) in [(0.4, -0.2), (1.0, 0.7), (0.0, 0.0)] {
            let (alpha, beta) = collinear_slice(x, y, 0.0);
            let x_back = alpha + beta.conj();
            let y_back = beta - alpha.conj();
            assert_abs_diff_eq!(x_back.re, x, epsilon = 1e-15);
            assert_abs_diff_eq!(x_back.im, 0.0, epsilon = 1e-15);
            assert_abs_diff_eq!(y_back.re, y, epsilon = 1e-15);
            assert_abs_diff_eq!(y_back.im, 0.0, epsilon = 1e-15);
        }
        // β = α* is exactly the Y = 0 section of the projection plane.
        let (alpha, beta) = collinear_slice(1.3, 0.0, 0.0);
        assert!((beta - alpha.conj()).norm() <= 1e-15);
    }

    #[test]
    fn noncollinear_corner_values() {
        let g0 = GainParams::new(0.0).unwrap();
        let g1 = GainParams::new(1.0).unwrap();
        let origin = [C64::new(0.0, 0.0); 4];
        let pi4 = libm::pow(PI, 4.0);
        assert_relative_eq!(
            w_noncollinear(0, 0, g0, 0.0, LossChannel::new(0.0).unwrap(), origin).unwrap(),
            16.0 / pi4,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            w_noncollinear(1, 0, g1, 0.4, LossChannel::new(0.0).unwrap(), origin).unwrap(),
            -16.0 / pi4,
            max_relative = 1e-12
        );
        assert_abs_diff_eq!(
            w_noncollinear(1, 0, g1, 0.4, LossChannel::new(0.5).unwrap(), origin).unwrap(),
            0.0,
            epsilon = 1e-14
        );
        let ch = LossChannel::new(0.2).unwrap();
        let d4 = 1.0 + 4.0 * ch.r * ch.t * g1.s * g1.s;
        assert_relative_eq!(
            w_noncollinear(1, 0, g1, 0.4, ch, origin).unwrap(),
            (16.0 / pi4) * (2.0 * ch.r - 1.0) / libm::pow(d4, 3.0),
            max_relative = 1e-12
        );
        assert!(w_noncollinear(0, 1, g1, 0.0, ch, origin).is_err());
    }

    #[test]
    fn noncollinear_matches_pairwise_oracle() {
        let gain = GainParams::new(0.5).unwrap();
        let phi = 0.4;
        // Headroom above the restricted output block keeps squeezer
        // truncation recirculation below the comparison tolerance.
        let dim = 32;
        // Pair A evolves |N,0⟩ with +g coupling, pair B with −g.
        let make_pair = |seed_n: usize, g: f64| {
            let amps = evolve_two_mode_squeezer((seed_n, 0), g, (dim, dim)).unwrap();
            TwoModeFockState::from_amplitudes((dim, dim), amps, BasisLabel::PlusMinus).unwrap()
        };
        for (seed_n, seed_m) in [(0usize, 0usize), (1, 0)] {
            let pair_a = make_pair(seed_n, gain.g);
            let pair_b = make_pair(seed_m, -gain.g);
            for r in [0.0, 0.3] {
                let ch = LossChannel::new(r).unwrap();
                let rho_a = lossy_density_from_pure(&pair_a, ch, ch, Some((20, 20))).unwrap();
                let rho_b = lossy_density_from_pure(&pair_b, ch, ch, Some((20, 20))).unwrap();
                for pt in [
                    [C64::new(0.0, 0.0); 4],
                    [
                        C64::new(0.3, 0.1),
                        C64::new(-0.2, 0.4),
                        C64::new(0.1, -0.3),
                        C64::new(0.2, 0.2),
                    ],
                ] {
                    let inv_sqrt2 = 1.0 / libm::sqrt(2.0);
                    let e_m = C64::from_polar(1.0, -phi);
                    let e_p = C64::from_polar(1.0, phi);
                    let ra1 = (pt[0] + e_m * pt[2]) * inv_sqrt2;
                    let rb1 = (pt[2] - e_p * pt[0]) * inv_sqrt2;
                    let ra2 = (pt[1] - e_p * pt[3]) * inv_sqrt2;
                    let rb2 = (pt[3] + e_m * pt[1]) * inv_sqrt2;
                    let analytic =
                        w_noncollinear(seed_n, seed_m, gain, phi, ch, pt).unwrap();
                    let numeric = wigner_numeric_2mode(&rho_a, ra1, ra2).unwrap()
                        * wigner_numeric_2mode(&rho_b, rb1, rb2).unwrap();
                    assert_abs_diff_eq!(analytic, numeric, epsilon = 1e-8);
                }
            }
        }
    }

    #[test]
    fn css_matches_oracle_and_scales_with_damping() {
        let params = CssParams {
            alpha: 2.0,
            phi: 1.0,
            sign: CssSign::Plus,
        };
        for r in [0.0, 0.4] {
            let ch = LossChannel::new(r).unwrap();
            let rho = crate::decoherence::css_lossy_density(params, ch, CutoffSpec::Fixed(45))
                .unwrap()
                .rho;
            for (x, y) in [(0.0, 0.0), (0.8, 0.3), (-0.5, 1.4), (1.9, -1.1)] {
                let analytic = w_css(params, ch, x, y).unwrap();
                let numeric = wigner_numeric_1mode(&rho, C64::new(x, y)).unwrap();
                assert_abs_diff_eq!(analytic, numeric, epsilon = 1e-8);
            }
        }
        // Interference amplitude ratio across loss values is exactly
        // exp(−2ΔR·|α|²sin²φ) at the fringe center with N² divided out.
        let probe = |r: f64| {
            let ch = LossChannel::new(r).unwrap();
            let x = css_trough_x(params, ch);
            let beta = libm::sqrt(ch.t) * params.alpha;
            let cx = beta * libm::cos(params.phi);
            let cy = beta * libm::sin(params.phi);
            let diag = libm::exp(-2.0 * ((x - cx) * (x - cx) + cy * cy));
            let w = w_css(params, ch, x, 0.0).unwrap();
            let norm = params.norm_sq_factor().unwrap();
            // Remove normalization and the two diagonal Gaussians, keep
            // the damped fringe magnitude.
            libm::fabs(w / (0.5 * norm * (2.0 / PI)) - 2.0 * diag) / 2.0
                / libm::exp(-2.0 * ((x - cx) * (x - cx)))
        };
        let sin_phi = libm::sin(params.phi);
        let expected_ratio = libm::exp(
            -2.0 * (0.5 - 0.2) * params.alpha * params.alpha * sin_phi * sin_phi,
        );
        assert_relative_eq!(probe(0.5) / probe(0.2), expected_ratio, max_relative = 1e-9);
    }

    #[test]
    fn css_total_loss_is_the_vacuum_gaussian() {
        let params = CssParams {
            alpha: 3.0,
            phi: 0.8,
            sign: CssSign::Minus,
        };
        let ch = LossChannel::new(1.0).unwrap();
        for (x, y) in [(0.0, 0.0), (0.7, -0.6)] {
            assert_relative_eq!(
                w_css(params, ch, x, y).unwrap(),
                (2.0 / PI) * libm::exp(-2.0 * (x * x + y * y)),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn witnesses_agree_with_the_wigner_functions() {
        let gain = GainParams::new(1.2).unwrap();
        let ch = LossChannel::new(0.35).unwrap();
        let origin = C64::new(0.0, 0.0);
        assert_relative_eq!(
            negativity_at_origin(WitnessFamily::SingleMode(gain), ch).unwrap(),
            w_single_mode(1, gain, ch, origin).unwrap(),
            max_relative = 1e-12
        );
        let d4 = 1.0 + 4.0 * ch.r * ch.t * gain.s * gain.s;
        assert_relative_eq!(
            negativity_at_origin(WitnessFamily::Collinear(gain), ch).unwrap()
                * (2.0 / PI)
                * (2.0 / PI)
                / d4,
            w_collinear(1, 0, gain, ch, origin, origin).unwrap(),
            max_relative = 1e-12
        );
        assert_relative_eq!(
            negativity_at_origin(WitnessFamily::Noncollinear(gain), ch).unwrap(),
            w_noncollinear(1, 0, gain, 0.0, ch, [origin; 4]).unwrap(),
            max_relative = 1e-12
        );
        let css = CssParams {
            alpha: 2.55,
            phi: core::f64::consts::FRAC_PI_2,
            sign: CssSign::Plus,
        };
        let x0 = css_trough_x(css, ch);
        assert_relative_eq!(
            negativity_at_origin(WitnessFamily::Css(css), ch).unwrap(),
            w_css(css, ch, x0, 0.0).unwrap(),
            max_relative = 1e-12
        );
        // Sign law across the R = 1/2 transition for all four families.
        for family in [
            WitnessFamily::SingleMode(gain),
            WitnessFamily::Collinear(gain),
            WitnessFamily::Noncollinear(gain),
            WitnessFamily::Css(css),
        ] {
            assert!(
                negativity_at_origin(family, LossChannel::new(0.49).unwrap()).unwrap() < 0.0
            );
            assert!(
                libm::fabs(
                    negativity_at_origin(family, LossChannel::new(0.5).unwrap()).unwrap()
                ) <= 1e-12
            );
            assert!(
                negativity_at_origin(family, LossChannel::new(0.51).unwrap()).unwrap() > 0.0
            );
        }
    }

    #[test]
    fn uncertainty_corner_values() {
        let g3 = GainParams::new(3.0).unwrap();
        let (dx, dy) = quadrature_uncertainty(0, g3, LossChannel::new(0.0).unwrap()).unwrap();
        assert_relative_eq!(dx * dy, 0.25, max_relative = 1e-12);
        let (dx, dy) = quadrature_uncertainty(0, g3, LossChannel::new(1.0).unwrap()).unwrap();
        assert_relative_eq!(dx, 0.5, max_relative = 1e-14);
        assert_relative_eq!(dy, 0.5, max_relative = 1e-14);
        let (dx, dy) = quadrature_uncertainty(1, g3, LossChannel::new(0.0).unwrap()).unwrap();
        assert_relative_eq!(dx * dy, 0.75, max_relative = 1e-12);
        assert!(quadrature_uncertainty(2, g3, LossChannel::new(0.0).unwrap()).is_err());
    }

    #[test]
    fn uncertainty_matches_the_lossy_gaussian_widths() {
        // The N = 0 closed form must agree with the second moments of
        // the lossy Wigner Gaussian; probe the curvature ratio at axis
        // points against w_single_mode.
        let gain = GainParams::new(0.9).unwrap();
        let ch = LossChannel::new(0.4).unwrap();
        let (dx, dy) = quadrature_uncertainty(0, gain, ch).unwrap();
        let w0 = w_single_mode(0, gain, ch, C64::new(0.0, 0.0)).unwrap();
        // W is exactly a centered Gaussian, so W(h)/W(0) = exp(−h²/(2σ²))
        // holds at any probe offset.
        let h = 0.25;
        let wx = w_single_mode(0, gain, ch, C64::new(h, 0.0)).unwrap();
        let wy = w_single_mode(0, gain, ch, C64::new(0.0, h)).unwrap();
        let var_x = -h * h / (2.0 * libm::log(wx / w0));
        let var_y = -h * h / (2.0 * libm::log(wy / w0));
        assert_relative_eq!(var_x, dx * dx, max_relative = 1e-10);
        assert_relative_eq!(var_y, dy * dy, max_relative = 1e-10);
    }

    #[test]
    fn quadrature_deltas_carry_the_exponent_identity() {
        let gain = GainParams::new(0.7).unwrap();
        let phi = 0.9;
        let pt = [
            C64::new(0.4, -0.1),
            C64::new(0.2, 0.3),
            C64::new(-0.5, 0.6),
            C64::new(0.1, 0.2),
        ];
        let deltas = QuadratureDeltas::new(pt, gain);
        let [za1, za2, zb1, zb2] = evolved_noncollinear(pt, gain, phi);
        let total = za1.norm_sqr() + za2.norm_sqr() + zb1.norm_sqr() + zb2.norm_sqr();
        assert_relative_eq!(deltas.delta_sq, total, max_relative = 1e-12);
        // Laguerre arguments written through Δ_A, Δ_B.
        let e_m = C64::from_polar(1.0, -phi);
        let e_p = C64::from_polar(1.0, phi);
        assert_relative_eq!(
            (deltas.delta_a + e_m * deltas.delta_b).norm_sqr(),
            4.0 * za1.norm_sqr(),
            max_relative = 1e-12
        );
        assert_relative_eq!(
            (deltas.delta_b - e_p * deltas.delta_a).norm_sqr(),
            4.0 * zb1.norm_sqr(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn grid_sampling_is_deterministic_and_indexed() {
        let x = GridSpec1D::new(-1.0, 1.0, 5).unwrap();
        let y = GridSpec1D::new(0.0, 2.0, 3).unwrap();
        let field = sample_grid(x, y, WignerFamilyTag::Numeric, FieldMeta::default(), |a, b| {
            Ok(10.0 * a + b)
        })
        .unwrap();
        assert_eq!(field.values.len(), 15);
        assert_relative_eq!(field.value(0, 0), -10.0, max_relative = 1e-15);
        assert_relative_eq!(field.value(4, 2), 12.0, max_relative = 1e-15);
        assert_relative_eq!(field.value(2, 1), 1.0, max_relative = 1e-15);
        assert!(GridSpec1D::new(1.0, -1.0, 5).is_err());
    }
}
