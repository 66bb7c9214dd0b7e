//! Collisions read as measurements: smeared phase-space effect operators, their
//! square roots and Kraus operators acting on Gaussian labels, the non-readout
//! transformation of a superposition, the Gaussian decomposition of the thermal
//! gas, collision rates and the validity regime of the whole description.

use std::f64::consts::PI;

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;

use crate::collision::{CatState, GaussianLabel};
use crate::error::{Error, Result};
use crate::gas::GasModel;
use crate::numeric::{quad, CMatrix, OscillatorBasis};
use crate::C64;

/// Smeared position–momentum measurement with basis width `w` and imperfection `n_bar`
/// (n̄ = 0 is the quantum-limited measurement).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PovmSpec {
    pub w: f64,
    pub n_bar: f64,
}

impl PovmSpec {
    pub fn new(w: f64, n_bar: f64) -> Result<Self> {
        if !(w > 0.0 && w.is_finite() && n_bar >= 0.0 && n_bar.is_finite()) {
            return Err(Error::InvalidParameter(format!("POVM needs W > 0 and n̄ ≥ 0, got W = {w}, n̄ = {n_bar}")));
        }
        Ok(Self { w, n_bar })
    }

    /// Measurement a gas particle of mass ratio α performs on a packet of width `w`:
    /// n̄/(n̄+1) = ((1−α)/(1+α))², i.e. n̄ = (1−α)²/(4α).
    pub fn from_collision(alpha: f64, w: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!("mass ratio must be positive, got {alpha}")));
        }
        Self::new(w, (1.0 - alpha).powi(2) / (4.0 * alpha))
    }

    /// e^{−λ/2} = √(n̄/(n̄+1)).
    pub fn contraction(&self) -> f64 {
        (self.n_bar / (self.n_bar + 1.0)).sqrt()
    }
}

/// (Δx̃, Δp̃) = (W√(n̄+½), √(n̄+½)/W).
pub fn measurement_uncertainties(spec: &PovmSpec) -> (f64, f64) {
    let f = (spec.n_bar + 0.5).sqrt();
    (spec.w * f, f / spec.w)
}

fn check_width(spec_w: f64, label: &GaussianLabel) -> Result<()> {
    if (label.w - spec_w).abs() > 1e-12 * spec_w {
        return Err(Error::InvalidParameter(format!("state width {} differs from the measurement width {spec_w}", label.w)));
    }
    Ok(())
}

/// Outcome density ⟨x,p|π̂(x̃,p̃)|x,p⟩ =
/// exp[−((x−x̃)²/W² + W²(p−p̃)²)/(2(n̄+1))]/(2π(n̄+1)).
pub fn effect_probability(spec: &PovmSpec, outcome: (f64, f64), state: &GaussianLabel) -> Result<f64> {
    check_width(spec.w, state)?;
    let s = spec.n_bar + 1.0;
    let (dx, dp) = (state.x - outcome.0, state.p - outcome.1);
    Ok((-(dx * dx / (spec.w * spec.w) + spec.w * spec.w * dp * dp) / (2.0 * s)).exp() / (2.0 * PI * s))
}

/// Brownian-side outcome inferred from a gas-side outcome (x̃_g, p̃_g):
/// x̃ = ((1−α)x_g + (1+α)x̃_g)/2, p̃ = ((1−α)p_g + (1+α)p̃_g)/(2α).
pub fn inferred_outcome(alpha: f64, gas: &GaussianLabel, gas_outcome: (f64, f64)) -> (f64, f64) {
    (
        0.5 * ((1.0 - alpha) * gas.x + (1.0 + alpha) * gas_outcome.0),
        ((1.0 - alpha) * gas.p + (1.0 + alpha) * gas_outcome.1) / (2.0 * alpha),
    )
}

/// Logarithm of the amplitude and the outgoing label of
/// D̂(x̃,p̃) e^{n̂ ln e} D̂†(x̃,p̃)|x,p⟩ · √(1−e²)/√(2π) for a real contraction e
/// (|e| < 1; e < 0 composes the square root with the parity operator).
fn sqrt_effect_log(e: f64, w: f64, outcome: (f64, f64), label: &GaussianLabel) -> (GaussianLabel, C64) {
    let (xt, pt) = outcome;
    let (x, p) = (label.x, label.p);
    let q = 1.0 - e * e;
    let gauss = -0.25 * q * ((x - xt).powi(2) / (w * w) + w * w * (p - pt).powi(2));
    let phase = -0.5 * ((pt * x - p * xt) - e * (pt * (x - xt) - xt * (p - pt)));
    let out = GaussianLabel { x: e * (x - xt) + xt, p: e * (p - pt) + pt, ..*label };
    (out, C64::new(0.5 * (q / (2.0 * PI)).ln() + gauss, phase))
}

/// √π̂(x̃,p̃)|x,p⟩ = amplitude·|e^{−λ/2}(x−x̃)+x̃, e^{−λ/2}(p−p̃)+p̃⟩.
/// For n̄ = 0 this is the projection onto |x̃,p̃⟩ with amplitude ⟨x̃,p̃|x,p⟩/√(2π).
pub fn sqrt_sigma_apply(spec: &PovmSpec, outcome: (f64, f64), label: &GaussianLabel) -> Result<(GaussianLabel, C64)> {
    check_width(spec.w, label)?;
    let (out, log) = sqrt_effect_log(spec.contraction(), spec.w, outcome, label);
    Ok((out, log.exp()))
}

fn matched_alpha(gas: &GaussianLabel, label: &GaussianLabel) -> Result<f64> {
    let lhs = label.m * label.w * label.w;
    if (lhs - gas.m * gas.w * gas.w).abs() > 1e-9 * lhs {
        return Err(Error::InvalidParameter(format!(
            "gas width {} does not match the packet width {} (need m W² = m_g W_g²)",
            gas.w, label.w
        )));
    }
    Ok(gas.m / label.m)
}

fn kraus_b_log(alpha: f64, gas: &GaussianLabel, outcome: (f64, f64), label: &GaussianLabel) -> (GaussianLabel, C64) {
    let e = (1.0 - alpha) / (1.0 + alpha);
    let (mid, log) = sqrt_effect_log(e, label.w, outcome, label);
    let dx = 2.0 * alpha * (gas.x - outcome.0) / (1.0 + alpha);
    let dp = 2.0 * (gas.p - alpha * outcome.1) / (1.0 + alpha);
    let out = GaussianLabel { x: mid.x + dx, p: mid.p + dp, ..mid };
    (out, log + C64::new(0.0, 0.5 * (dp * mid.x - dx * mid.p)))
}

/// B̂(x_g,p_g; x̃,p̃)|x,p⟩ with B̂ = D̂(2α(x_g−x̃)/(1+α), 2(p_g−αp̃)/(1+α))√π̂(x̃,p̃), the
/// collisional Kraus operator without free evolution. The outgoing label is the
/// scattered label for every outcome. For α > 1 the contraction (1−α)/(1+α) is
/// negative and the square root carries the parity operator.
pub fn kraus_b_apply(gas: &GaussianLabel, outcome: (f64, f64), label: &GaussianLabel) -> Result<(GaussianLabel, C64)> {
    let alpha = matched_alpha(gas, label)?;
    let (out, log) = kraus_b_log(alpha, gas, outcome, label);
    Ok((out, log.exp()))
}

/// ∫∫ exp E(x̃,p̃) dx̃dp̃ for a quadratic exponent E with negative-definite real part.
/// The coefficients are read off by exact central differences around `center`
/// with steps `h`.
fn gaussian_integral(e: impl Fn(f64, f64) -> C64, center: (f64, f64), h: (f64, f64)) -> Result<(f64, C64)> {
    let f = |u: f64, v: f64| e(center.0 + u * h.0, center.1 + v * h.1);
    let c = f(0.0, 0.0);
    let (fu, fmu, fv, fmv, fuv) = (f(1.0, 0.0), f(-1.0, 0.0), f(0.0, 1.0), f(0.0, -1.0), f(1.0, 1.0));
    let j = [(fu - fmu) * 0.5, (fv - fmv) * 0.5];
    let m11 = -(fu + fmu - c * 2.0);
    let m22 = -(fv + fmv - c * 2.0);
    let m12 = -(fuv - fu - fv + c);
    let det = m11 * m22 - m12 * m12;
    if !(m11.re > 0.0 && det.re > 0.0) {
        return Err(Error::Undefined("outcome integral does not converge".into()));
    }
    let inv = [[m22 / det, -m12 / det], [-m12 / det, m11 / det]];
    let quad = j[0] * (inv[0][0] * j[0] + inv[0][1] * j[1]) + j[1] * (inv[1][0] * j[0] + inv[1][1] * j[1]);
    let pref = C64::from(2.0 * PI * h.0 * h.1) / det.sqrt();
    let z = c + quad * 0.5;
    Ok((pref.norm(), z + C64::new(0.0, pref.arg())))
}

/// Non-readout measurement ∫∫ B̂ρB̂† dx̃dp̃ applied to a two-branch superposition.
/// Both branches land on their scattered labels; the coherence is multiplied by
/// ∫∫ A_a conj(A_b), evaluated as a closed Gaussian integral over the outcome.
pub fn non_readout_transform(cat: &CatState, gas: &GaussianLabel) -> Result<CatState> {
    let alpha = matched_alpha(gas, &cat.a)?;
    matched_alpha(gas, &cat.b)?;
    let w = cat.width();
    let exponent = |xt: f64, pt: f64| {
        let (_, la) = kraus_b_log(alpha, gas, (xt, pt), &cat.a);
        let (_, lb) = kraus_b_log(alpha, gas, (xt, pt), &cat.b);
        la + lb.conj()
    };
    let (modulus, z) = gaussian_integral(exponent, (cat.x_mean(), cat.p_mean()), (w, 1.0 / w))?;
    let out_a = kraus_b_log(alpha, gas, (0.0, 0.0), &cat.a).0;
    let out_b = kraus_b_log(alpha, gas, (0.0, 0.0), &cat.b).0;
    let c = cat.c * modulus * z.re.exp();
    Ok(CatState { a: out_a, b: out_b, c, phi: cat.phi + z.im })
}

/// Gaussian-packet decomposition of the thermal gas: packets of width W_g carry the
/// temperature T̄ = 1/(2m_gW_g²), their centers are Maxwell–Boltzmann distributed at
/// T̃ = T − T̄.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalDecomposition {
    pub temperature: f64,
    pub t_tilde: f64,
    pub t_bar: f64,
    pub m_g: f64,
    pub w_g: f64,
    /// T̄ ≤ T/10, the regime in which T̃ ≈ T may be used.
    pub t_tilde_close_to_t: bool,
}

impl ThermalDecomposition {
    /// Maxwell–Boltzmann weight μ_T̃(p_g) of the packet centers.
    pub fn weight(&self, p_g: f64) -> f64 {
        let s2 = self.m_g * self.t_tilde;
        (-p_g * p_g / (2.0 * s2)).exp() / (2.0 * PI * s2).sqrt()
    }

    /// Momentum density of the reconstructed mixture, ∫dp_g μ_T̃(p_g)|⟨p|x_g,p_g⟩|²,
    /// by quadrature; equals μ_T(p) when the decomposition is exact.
    pub fn reconstructed_momentum_density(&self, p: f64) -> f64 {
        let w = self.w_g;
        quad::real_line(|pg| self.weight(pg) * w / PI.sqrt() * (-(w * (p - pg)).powi(2)).exp(), p, 1e-13)
    }
}

pub fn thermal_decomposition(temperature: f64, w_g: f64, m_g: f64) -> Result<ThermalDecomposition> {
    if !(temperature > 0.0 && w_g > 0.0 && m_g > 0.0) {
        return Err(Error::InvalidParameter("thermal decomposition needs T, W_g, m_g > 0".into()));
    }
    let t_bar = 1.0 / (2.0 * m_g * w_g * w_g);
    let t_tilde = temperature - t_bar;
    if t_tilde <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "packet width W_g = {w_g} too small for T = {temperature}: T̃ = {t_tilde} ≤ 0"
        )));
    }
    Ok(ThermalDecomposition { temperature, t_tilde, t_bar, m_g, w_g, t_tilde_close_to_t: t_bar <= 0.1 * temperature })
}

/// Rate density R(p_g) = n_g μ_T(p_g)|p_g/m_g − p/m| for a Brownian momentum p.
pub fn rate_density(gas: &GasModel, m: f64, p: f64, p_g: f64) -> f64 {
    gas.n_g * gas.maxwell_boltzmann(p_g) * (p_g / gas.m_g - p / m).abs()
}

/// Total rate R(p) = n_g√(2T/(πm_g)){exp[−m_g p²/(2Tm²)] + √(πm_g/(2T))(p/m)erf[√(m_g/(2T))p/m]}.
pub fn rate_total(gas: &GasModel, m: f64, p: f64) -> f64 {
    let (t, mg) = (gas.temperature, gas.m_g);
    let u = (mg / (2.0 * t)).sqrt() * p / m;
    gas.n_g * (2.0 * t / (PI * mg)).sqrt() * ((-u * u).exp() + PI.sqrt() * u * erf(u))
}

/// Slow-particle rate n_g√(2T/(πm_g))(1 + m_g p²/(2Tm²)).
pub fn rate_total_slow(gas: &GasModel, m: f64, p: f64) -> f64 {
    gas.rest_rate() * (1.0 + gas.m_g * p * p / (2.0 * gas.temperature * m * m))
}

/// Classical phase-space region of Brownian states (x, p) hit by the gas particle
/// (x_g, p_g) within the coarse-grain time δ: 0 < (x − x_g)/(p_g/m_g − p/m) < δ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SDeltaRegion {
    pub x_g: f64,
    pub p_g: f64,
    pub delta: f64,
    pub m: f64,
    pub m_g: f64,
}

impl SDeltaRegion {
    pub fn contains(&self, x: f64, p: f64) -> bool {
        let dv = self.p_g / self.m_g - p / self.m;
        if dv == 0.0 {
            return false;
        }
        let tau = (x - self.x_g) / dv;
        tau > 0.0 && tau < self.delta
    }
}

/// One "≫" relation checked with a factor-10 margin: `small`·10 ≤ `large`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub name: String,
    pub statement: String,
    pub small: f64,
    pub large: f64,
    pub ok: bool,
}

fn relation(name: &str, statement: &str, small: f64, large: f64) -> InequalityCheck {
    InequalityCheck { name: name.into(), statement: statement.into(), small, large, ok: 10.0 * small <= large }
}

/// Regime of validity of the collisional master equation for a gas and Brownian mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidityCheck {
    /// n_g/√(m_g T); the description needs it ≪ 1.
    pub headline: f64,
    pub checks: Vec<InequalityCheck>,
}

impl ValidityCheck {
    pub fn all_ok(&self) -> bool {
        self.checks.iter().all(|c| c.ok)
    }

    pub fn violated(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.ok).map(|c| c.name.as_str()).collect()
    }

    /// Human-readable table, one relation per line.
    pub fn table(&self) -> String {
        let mut s = format!("n_g/sqrt(m_g T) = {:.4e}\n", self.headline);
        for c in &self.checks {
            s.push_str(&format!(
                "{:<22} {:<34} {:>12.4e} vs {:>12.4e}  {}\n",
                c.name,
                c.statement,
                c.small,
                c.large,
                if c.ok { "ok" } else { "VIOLATED" }
            ));
        }
        s
    }
}

pub fn validity_check(gas: &GasModel, m: f64) -> ValidityCheck {
    let a = gas.alpha(m);
    let (t, mg, ng, wg, d) = (gas.temperature, gas.m_g, gas.n_g, gas.w_g, gas.delta);
    let headline = ng / (mg * t).sqrt();
    let checks = vec![
        relation("momentum_resolution", "W_g >> sqrt(1+a)/sqrt(m_g T)", (1.0 + a).sqrt() / (mg * t).sqrt(), wg),
        relation("high_temperature", "delta >> (1+a)/T", (1.0 + a) / t, d),
        relation("density_bound", "W_g << sqrt(pi/(2(1+a)))/n_g", wg * ng, (PI / (2.0 * (1.0 + a))).sqrt()),
        relation("single_collision", "delta n_g sqrt(2T/(pi m_g)) << 1", d * gas.rest_rate(), 1.0),
        relation("thermal_width", "1/(2 m_g W_g^2) << T", 1.0 / (2.0 * mg * wg * wg), t),
        relation("high_temperature_low_density", "n_g/sqrt(m_g T) << 1", headline, 1.0),
    ];
    ValidityCheck { headline, checks }
}

/// Phase-space weights f(x,p) of the shift identities
/// ∫∫ dx dp/(2π) f(x,p) D̂(x,p) Ô D̂†(x,p) = R_f(Ô).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftWeight {
    One,
    X,
    P,
    XX,
    PP,
    TwoXP,
}

impl ShiftWeight {
    pub const ALL: [ShiftWeight; 6] = [Self::One, Self::X, Self::P, Self::XX, Self::PP, Self::TwoXP];

    pub fn value(self, x: f64, p: f64) -> f64 {
        match self {
            Self::One => 1.0,
            Self::X => x,
            Self::P => p,
            Self::XX => x * x,
            Self::PP => p * p,
            Self::TwoXP => 2.0 * x * p,
        }
    }

    /// Right-hand side R_f(Ô) in the truncated basis, e.g.
    /// R_{x²}(Ô) = Tr(Ô)x̂² − 2Tr(Ôx̂)x̂ + Tr(Ôx̂²).
    pub fn shifted_operator(self, basis: &OscillatorBasis<f64>, o: &CMatrix<f64>) -> CMatrix<f64> {
        let (x, p) = (basis.position(), basis.momentum());
        let id = CMatrix::<f64>::identity(basis.dim, basis.dim);
        let tr = |m: &CMatrix<f64>| (o * m).trace();
        let t = o.trace();
        match self {
            Self::One => id * t,
            Self::X => &x * t - id * tr(&x),
            Self::P => &p * t - id * tr(&p),
            Self::XX => {
                let xx = &x * &x;
                &xx * t - &x * (tr(&x) * 2.0) + id * tr(&xx)
            }
            Self::PP => {
                let pp = &p * &p;
                &pp * t - &p * (tr(&p) * 2.0) + id * tr(&pp)
            }
            Self::TwoXP => {
                let anti = &x * &p + &p * &x;
                &anti * t - &p * (tr(&x) * 2.0) - &x * (tr(&p) * 2.0) + id * tr(&anti)
            }
        }
    }
}

/// ⟨a| ∫∫ dx dp/(2π) f(x,p) D̂(x,p) Ô D̂†(x,p) |b⟩ between the Gaussian labels `a`, `b`
/// by adaptive quadrature over |x| ≤ `radius`·W, |p| ≤ `radius`/W.
pub fn shifted_operator_integral(
    basis: &OscillatorBasis<f64>,
    o: &CMatrix<f64>,
    weight: ShiftWeight,
    a: (f64, f64),
    b: (f64, f64),
    radius: f64,
) -> C64 {
    let w = basis.width;
    let element = |x: f64, p: f64| -> C64 {
        let va = basis.displaced_coherent(-x, -p, a.0, a.1);
        let vb = basis.displaced_coherent(-x, -p, b.0, b.1);
        (va.adjoint() * o * vb)[(0, 0)] * (weight.value(x, p) / (2.0 * PI))
    };
    let part = |pick: fn(C64) -> f64| {
        quad::finite(|x| quad::finite(|p| pick(element(x, p)), -radius / w, radius / w, 1e-11), -radius * w, radius * w, 1e-10)
    };
    Complex::new(part(|z| z.re), part(|z| z.im))
}
