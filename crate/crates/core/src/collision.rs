//! Hard-core collision of two Gaussian wave packets in one dimension: validity
//! gates, the classical-map scattering of labels, the time-resolved densities
//! during the collision and the update of a two-branch superposition.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::numeric::PositionGrid;
use crate::C64;

/// Minimum-uncertainty packet |x,p⟩_W = D̂(x,p)|0,0⟩ of a particle of mass `m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianLabel {
    pub x: f64,
    pub p: f64,
    pub w: f64,
    pub m: f64,
}

impl GaussianLabel {
    pub fn new(x: f64, p: f64, w: f64, m: f64) -> Result<Self> {
        if !(x.is_finite() && p.is_finite()) {
            return Err(Error::InvalidParameter("label center must be finite".into()));
        }
        if !(w > 0.0 && w.is_finite() && m > 0.0 && m.is_finite()) {
            return Err(Error::InvalidParameter(format!("label needs W > 0 and m > 0, got W = {w}, m = {m}")));
        }
        Ok(Self { x, p, w, m })
    }

    pub fn velocity(&self) -> f64 {
        self.p / self.m
    }

    /// Position wave function ⟨x'|x,p⟩ = e^{−ixp/2}e^{ix'p}e^{−(x−x')²/2W²}/√(√π W).
    pub fn wave_function(&self, xp: f64) -> C64 {
        let d = self.x - xp;
        C64::from_polar((-d * d / (2.0 * self.w * self.w)).exp() / (PI.sqrt() * self.w).sqrt(), xp * self.p - self.x * self.p / 2.0)
    }

    /// ⟨self|other⟩ for packets of equal width.
    pub fn overlap(&self, other: &Self) -> Result<C64> {
        if (self.w - other.w).abs() > 1e-12 * self.w {
            return Err(Error::InvalidParameter(format!("overlap needs equal widths, got {} and {}", self.w, other.w)));
        }
        let (dx, dp) = (self.x - other.x, self.p - other.p);
        let w2 = self.w * self.w;
        let modulus = (-(dx * dx / w2 + w2 * dp * dp) / 4.0).exp();
        Ok(C64::from_polar(modulus, (self.x * other.p - other.x * self.p) / 2.0))
    }
}

/// A Brownian packet and the gas packet about to hit it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollisionInput {
    pub brownian: GaussianLabel,
    pub gas: GaussianLabel,
}

impl CollisionInput {
    /// Mass ratio α = m_g/m.
    pub fn alpha(&self) -> f64 {
        self.gas.m / self.brownian.m
    }

    /// The same configuration seen from the center of mass at rest at the origin.
    pub fn center_of_mass_frame(&self) -> Self {
        let (b, g) = (self.brownian, self.gas);
        let mass = b.m + g.m;
        let x_cm = (b.m * b.x + g.m * g.x) / mass;
        let v_cm = (b.p + g.p) / mass;
        Self {
            brownian: GaussianLabel { x: b.x - x_cm, p: b.p - b.m * v_cm, ..b },
            gas: GaussianLabel { x: g.x - x_cm, p: g.p - g.m * v_cm, ..g },
        }
    }
}

/// Diagnosis of the conditions under which the two packets scatter like classical particles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidityReport {
    /// Initial separation at least five combined widths.
    pub overlap_ok: bool,
    /// Relative momentum |αp − p_g| at least five momentum uncertainties √(1+α)/W_g.
    pub momentum_ok: bool,
    /// m W² = m_g W_g², the no-entanglement condition.
    pub matched_widths: bool,
    /// Time the packets need to cross, 2√(W_g² + W²)/|v − v_g|; infinite for equal velocities.
    pub t_c: f64,
}

impl ValidityReport {
    pub fn all_ok(&self) -> bool {
        self.overlap_ok && self.momentum_ok && self.matched_widths
    }
}

pub fn validity(input: &CollisionInput) -> ValidityReport {
    let (b, g) = (input.brownian, input.gas);
    let alpha = input.alpha();
    let spread = (g.w * g.w + b.w * b.w).sqrt();
    let dv = (b.velocity() - g.velocity()).abs();
    let t_c = if dv > 0.0 { 2.0 * spread / dv } else { f64::INFINITY };
    ValidityReport {
        overlap_ok: (g.x - b.x).abs() >= 5.0 * spread,
        momentum_ok: dv > 0.0 && (alpha * b.p - g.p).abs() >= 5.0 * (1.0 + alpha).sqrt() / g.w,
        matched_widths: (b.m * b.w * b.w - g.m * g.w * g.w).abs() <= 1e-9 * b.m * b.w * b.w,
        t_c,
    }
}

/// Outgoing labels; `report` says whether the classical-map result applies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scattered {
    pub brownian: GaussianLabel,
    pub gas: GaussianLabel,
    pub report: ValidityReport,
}

/// Labels after the collision, written as free packets evolved back to t = 0:
/// x̄_g = (2x − (1−α)x_g)/(1+α), p̄_g = (2αp − (1−α)p_g)/(1+α),
/// x̄ = (2αx_g + (1−α)x)/(1+α), p̄ = (2p_g + (1−α)p)/(1+α). Widths are unchanged.
pub fn scatter(input: &CollisionInput) -> Scattered {
    let (b, g) = (input.brownian, input.gas);
    let a = input.alpha();
    let s = 1.0 + a;
    Scattered {
        brownian: GaussianLabel { x: (2.0 * a * g.x + (1.0 - a) * b.x) / s, p: (2.0 * g.p + (1.0 - a) * b.p) / s, ..b },
        gas: GaussianLabel { x: (2.0 * b.x - (1.0 - a) * g.x) / s, p: (2.0 * a * b.p - (1.0 - a) * g.p) / s, ..g },
        report: validity(input),
    }
}

/// Coefficient of u·u_g in the exponent of the outgoing two-particle wave function,
/// −4(1−α)(W² − αW_g²)/(2(1+α)²); the outgoing state factorizes iff it vanishes.
pub fn entanglement_coefficient(w: f64, w_g: f64, m: f64, m_g: f64) -> f64 {
    let a = m_g / m;
    -4.0 * (1.0 - a) * (w * w - a * w_g * w_g) / (2.0 * (1.0 + a) * (1.0 + a))
}

/// Er(x) = (1/√π)∫_{−∞}^x e^{−u²}du = erfc(−x)/2.
pub fn er(x: f64) -> f64 {
    0.5 * erfc(-x)
}

/// Center-of-mass configuration with the Brownian packet on the right (x > 0);
/// the flag records whether coordinates were mirrored to get there.
fn oriented(input: &CollisionInput) -> Result<(GaussianLabel, f64, bool)> {
    let report = validity(input);
    if !report.matched_widths {
        return Err(Error::InvalidParameter("in-collision densities need m W² = m_g W_g²".into()));
    }
    if !report.momentum_ok {
        return Err(Error::InvalidParameter("relative momentum too small for a complete collision".into()));
    }
    let com = input.center_of_mass_frame();
    let mut b = com.brownian;
    let mirrored = b.x < 0.0;
    if mirrored {
        b.x = -b.x;
        b.p = -b.p;
    }
    Ok((b, input.alpha(), mirrored))
}

fn spread2(b: &GaussianLabel, t: f64) -> f64 {
    let v = t / (b.m * b.w);
    b.w * b.w + v * v
}

/// Brownian position density at time t during the collision, in center-of-mass
/// coordinates:
/// (1/√π σ)[Er((αx'+s)/(√α σ))e^{−(x'−s)²/σ²} + Er((αx'−s)/(√α σ))e^{−(x'+s)²/σ²}]
/// with s = x + pt/m and σ² = W² + t²/(m²W²). The interference of the incoming and
/// reflected branches is dropped, as in the complete-collision regime.
pub fn in_collision_position_density(input: &CollisionInput, t: f64, xp: f64) -> Result<f64> {
    let (b, a, mirrored) = oriented(input)?;
    let xp = if mirrored { -xp } else { xp };
    let sig2 = spread2(&b, t);
    let sig = sig2.sqrt();
    let s = b.x + b.p * t / b.m;
    let k = (a.sqrt() * sig).recip();
    let incoming = er((a * xp + s) * k) * (-(xp - s).powi(2) / sig2).exp();
    let reflected = er((a * xp - s) * k) * (-(xp + s).powi(2) / sig2).exp();
    Ok((incoming + reflected) / (PI.sqrt() * sig))
}

/// Probabilities of the incoming and the reflected branch at time t, Er(±√((1+α)/α)·s/σ).
pub fn branch_weights(input: &CollisionInput, t: f64) -> Result<(f64, f64)> {
    let (b, a, _) = oriented(input)?;
    let z = ((1.0 + a) / a).sqrt() * (b.x + b.p * t / b.m) / spread2(&b, t).sqrt();
    Ok((er(z), er(-z)))
}

/// Two-particle wave function in center-of-mass coordinates (x_g', x'), up to a
/// constant factor; zero when the gas particle is to the right of the Brownian one.
fn two_particle_amplitude(b: &GaussianLabel, a: f64, t: f64, xg: f64, xp: f64) -> C64 {
    let xt = xg - xp;
    if xt >= 0.0 {
        return C64::new(0.0, 0.0);
    }
    let xb = a * xg + xp;
    let big_a = (1.0 + a) / a;
    let (w2, tau) = (b.w * b.w, t / b.m);
    let den = w2 * w2 + tau * tau;
    let s = b.x + b.p * tau;
    let quad = xt * xt + xb * xb / a;
    let g = -(C64::from(big_a * big_a * w2 * s * s) + C64::new(w2, -tau) * quad) / (2.0 * big_a * den);
    let k = C64::new(w2 * s, b.p * w2 * w2 - b.x * tau) / den;
    (g - k * xt).exp() - (g + k * xt).exp()
}

/// Brownian momentum density during the collision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentumDensity {
    pub ps: Vec<f64>,
    pub density: Vec<f64>,
    /// ∫ density dp over the requested range; close to 1 when the range covers the support.
    pub norm: f64,
}

/// Momentum density of the Brownian particle at time t, in the center-of-mass frame,
/// by Fourier transforming the two-particle wave function along x' for every gas
/// coordinate and summing |·|² over the gas coordinate. `x_grid` samples the
/// Brownian coordinate; the gas grid is chosen from the packet geometry.
pub fn in_collision_momentum_density(input: &CollisionInput, t: f64, x_grid: &PositionGrid<f64>, p: (f64, f64, usize)) -> Result<MomentumDensity> {
    let (b, a, mirrored) = oriented(input)?;
    let nyquist = PI / x_grid.dx;
    if p.0.abs() > nyquist || p.1.abs() > nyquist {
        return Err(Error::GridTooCoarse(format!("|p| up to {} exceeds the Nyquist limit {nyquist}", p.0.abs().max(p.1.abs()))));
    }
    if p.2 < 2 || !(p.1 > p.0) {
        return Err(Error::InvalidParameter("momentum range must be increasing with ≥ 2 points".into()));
    }
    let ps: Vec<f64> = (0..p.2).map(|k| p.0 + (p.1 - p.0) * k as f64 / (p.2 - 1) as f64).collect();
    let sig = spread2(&b, t).sqrt();
    let s = b.x + b.p * t / b.m;
    let half = s.abs() / a + 12.0 * sig / a.sqrt();
    let gas = PositionGrid::span(-half, half, 801)?;
    let xs = x_grid.points();
    let phases: Vec<Vec<C64>> = ps
        .iter()
        .map(|&q| xs.iter().map(|&x| C64::from_polar(1.0, -q * x)).collect())
        .collect();
    let rows: Vec<(Vec<f64>, f64)> = gas
        .points()
        .into_par_iter()
        .map(|xg| {
            let psi: Vec<C64> = xs.iter().map(|&x| two_particle_amplitude(&b, a, t, xg, x)).collect();
            let weight: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>() * x_grid.dx;
            let spectrum = phases
                .iter()
                .map(|row| {
                    let amp: C64 = row.iter().zip(&psi).map(|(e, z)| e * z).sum::<C64>() * x_grid.dx;
                    amp.norm_sqr() / (2.0 * PI)
                })
                .collect();
            (spectrum, weight)
        })
        .collect();
    let total: f64 = rows.iter().map(|r| r.1).sum::<f64>() * gas.dx;
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::Undefined("wave function vanishes on the supplied grid".into()));
    }
    let mut density = vec![0.0; ps.len()];
    for (spectrum, _) in &rows {
        for (d, v) in density.iter_mut().zip(spectrum) {
            *d += v * gas.dx / total;
        }
    }
    if mirrored {
        density.reverse();
    }
    let ps = if mirrored { ps.iter().rev().map(|q| -q).collect() } else { ps };
    let dp = (p.1 - p.0) / (p.2 - 1) as f64;
    let norm = crate::numeric::quad::trapezoid(&density, dp);
    Ok(MomentumDensity { ps, density, norm })
}

/// Two-branch superposition ρ ∝ |a⟩⟨a| + |b⟩⟨b| + c e^{iφ}|a⟩⟨b| + c e^{−iφ}|b⟩⟨a|.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CatState {
    pub a: GaussianLabel,
    pub b: GaussianLabel,
    pub c: f64,
    pub phi: f64,
}

impl CatState {
    pub fn new(a: GaussianLabel, b: GaussianLabel, c: f64, phi: f64) -> Result<Self> {
        if (a.w - b.w).abs() > 1e-12 * a.w || a.m != b.m {
            return Err(Error::InvalidParameter("cat branches must share width and mass".into()));
        }
        if !(0.0..=1.0).contains(&c) || !phi.is_finite() {
            return Err(Error::InvalidParameter(format!("coherence must lie in [0, 1], got {c}")));
        }
        Ok(Self { a, b, c, phi })
    }

    /// Pure superposition |a⟩ + |b⟩.
    pub fn pure(a: GaussianLabel, b: GaussianLabel) -> Result<Self> {
        Self::new(a, b, 1.0, 0.0)
    }

    pub fn x_mean(&self) -> f64 {
        0.5 * (self.a.x + self.b.x)
    }

    pub fn p_mean(&self) -> f64 {
        0.5 * (self.a.p + self.b.p)
    }

    pub fn x_diff(&self) -> f64 {
        self.a.x - self.b.x
    }

    pub fn p_diff(&self) -> f64 {
        self.a.p - self.b.p
    }

    pub fn width(&self) -> f64 {
        self.a.w
    }

    /// (x_A p_D − p_A x_D)/2 + φ, unchanged by collisions.
    pub fn phase_invariant(&self) -> f64 {
        0.5 * (self.x_mean() * self.p_diff() - self.p_mean() * self.x_diff()) + self.phi
    }
}

/// Collision of both branches with the same gas packet, the gas traced out:
/// branches follow [`scatter`], c picks up exp[−α/(1+α)²(x_D²/W² + W²p_D²)] and φ
/// picks up [2α(x_A p_D − x_D p_A) + (1−α)p_g x_D − α(1−α)x_g p_D]/(1+α)².
pub fn collide_cat(cat: &CatState, gas: &GaussianLabel) -> Result<CatState> {
    let w = cat.width();
    let m = cat.a.m;
    if (m * w * w - gas.m * gas.w * gas.w).abs() > 1e-9 * m * w * w {
        return Err(Error::InvalidParameter(format!(
            "gas width {} does not match the branch width {w} (need m W² = m_g W_g²)",
            gas.w
        )));
    }
    let a = gas.m / m;
    let s2 = (1.0 + a) * (1.0 + a);
    let (xa, pa, xd, pd) = (cat.x_mean(), cat.p_mean(), cat.x_diff(), cat.p_diff());
    let damping = (-a / s2 * (xd * xd / (w * w) + w * w * pd * pd)).exp();
    let dphi = (2.0 * a * (xa * pd - xd * pa) + (1.0 - a) * gas.p * xd - a * (1.0 - a) * gas.x * pd) / s2;
    let out_a = scatter(&CollisionInput { brownian: cat.a, gas: *gas }).brownian;
    let out_b = scatter(&CollisionInput { brownian: cat.b, gas: *gas }).brownian;
    Ok(CatState { a: out_a, b: out_b, c: cat.c * damping, phi: cat.phi + dphi })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical;
    use crate::numeric::quad;

    fn figdis() -> CollisionInput {
        let w = 4.0;
        let a = 0.3;
        CollisionInput {
            brownian: GaussianLabel::new(10.0, -2.0, w, 1.0).unwrap(),
            gas: GaussianLabel::new(-10.0 / a, 2.0, w / a.sqrt(), a).unwrap(),
        }
    }

    #[test]
    fn overlap_matches_wave_function_quadrature() {
        let u = GaussianLabel::new(0.7, -0.4, 1.3, 1.0).unwrap();
        let v = GaussianLabel::new(-0.5, 0.9, 1.3, 1.0).unwrap();
        let re = quad::real_line(|x| (u.wave_function(x).conj() * v.wave_function(x)).re, 0.0, 1e-13);
        let im = quad::real_line(|x| (u.wave_function(x).conj() * v.wave_function(x)).im, 0.0, 1e-13);
        let z = u.overlap(&v).unwrap();
        assert!((z.re - re).abs() < 1e-10 && (z.im - im).abs() < 1e-10, "{z} vs {re} + {im}i");
    }

    #[test]
    fn equal_masses_swap() {
        let input = CollisionInput {
            brownian: GaussianLabel::new(3.0, -1.0, 2.0, 1.0).unwrap(),
            gas: GaussianLabel::new(-4.0, 2.5, 2.0, 1.0).unwrap(),
        };
        let out = scatter(&input);
        assert_eq!((out.brownian.x, out.brownian.p), (-4.0, 2.5));
        assert_eq!((out.gas.x, out.gas.p), (3.0, -1.0));
    }

    #[test]
    fn center_of_mass_outputs_are_mirrored_inputs() {
        let com = figdis().center_of_mass_frame();
        let out = scatter(&com);
        assert!((out.brownian.x + com.brownian.x).abs() < 1e-12 && (out.brownian.p + com.brownian.p).abs() < 1e-12);
        assert!((out.gas.x + com.gas.x).abs() < 1e-12 && (out.gas.p + com.gas.p).abs() < 1e-12);
    }

    #[test]
    fn momenta_follow_the_classical_rule() {
        let input = figdis();
        let out = scatter(&input);
        let (p, pg) = classical::collide(input.brownian.p, input.gas.p, input.brownian.m, input.gas.m);
        assert!((out.brownian.p - p).abs() < 1e-14 && (out.gas.p - pg).abs() < 1e-14);
    }

    #[test]
    fn collision_time_and_validity_on_figure_parameters() {
        let r = validity(&figdis());
        assert!(r.overlap_ok && r.momentum_ok && r.matched_widths);
        let a: f64 = 0.3;
        let expected = 2.0 * (a / (1.0 + a)).sqrt() * 4.0 / 2.0;
        assert!((r.t_c - expected).abs() < 1e-12);
    }

    #[test]
    fn equal_velocities_mean_no_collision() {
        let input = CollisionInput {
            brownian: GaussianLabel::new(5.0, 1.0, 1.0, 1.0).unwrap(),
            gas: GaussianLabel::new(-5.0, 0.5, 2.0_f64.sqrt(), 0.5).unwrap(),
        };
        let r = validity(&input);
        assert!(r.t_c.is_infinite() && !r.momentum_ok);
    }

    #[test]
    fn entanglement_vanishes_for_matched_widths_or_equal_masses() {
        assert!(entanglement_coefficient(2.0, 2.0 / 0.5f64.sqrt(), 1.0, 0.5).abs() < 1e-14);
        assert_eq!(entanglement_coefficient(2.0, 0.7, 1.0, 1.0), 0.0);
        let v = entanglement_coefficient(2.0, 1.0, 1.0, 0.5);
        assert!((v - (-4.0 * 0.5 * 3.5 / (2.0 * 2.25))).abs() < 1e-14);
    }

    #[test]
    fn position_density_matches_joint_density_quadrature() {
        let input = figdis();
        let (b, a, _) = oriented(&input).unwrap();
        let big_a = (1.0 + a) / a;
        for &(t, xp) in &[(0.0, 9.0), (4.0, 1.5), (5.0, -0.5), (6.5, 3.0), (9.0, 8.0)] {
            let sig2 = spread2(&b, t);
            let s = b.x + b.p * t / b.m;
            let joint = |xg: f64, sign: f64| {
                let (xt, xb) = (xg - xp, a * xg + xp);
                a.sqrt() / (PI * sig2) * (-(xb * xb / a + (xt + sign * big_a * s).powi(2)) / (big_a * sig2)).exp()
            };
            let direct = quad::to_infinity(|u| joint(xp - u, 1.0) + joint(xp - u, -1.0), 0.0, 1e-14);
            let closed = in_collision_position_density(&input, t, xp).unwrap();
            assert!((closed - direct).abs() < 1e-10 * closed.max(1e-300), "t = {t}: {closed} vs {direct}");
        }
    }

    #[test]
    fn position_density_is_normalized_and_starts_as_one_hump() {
        let input = figdis();
        for &t in &[0.0, 3.0, 5.0, 7.0, 12.0] {
            let n = quad::real_line(|x| in_collision_position_density(&input, t, x).unwrap(), 0.0, 1e-12);
            assert!((n - 1.0).abs() < 1e-6, "t = {t}: {n}");
        }
        let hump = |x: f64| in_collision_position_density(&input, 0.0, x).unwrap();
        let free = |x: f64| (-(x - 10.0).powi(2) / 16.0).exp() / (PI.sqrt() * 4.0);
        for x in [2.0, 6.0, 10.0, 14.0] {
            assert!((hump(x) - free(x)).abs() < 1e-4 * free(10.0));
        }
    }

    #[test]
    fn cat_update_equals_gas_overlap() {
        let w = 1.5;
        let m = 1.0;
        let a: f64 = 0.2;
        let cat = CatState::new(GaussianLabel::new(2.0, 0.3, w, m).unwrap(), GaussianLabel::new(-1.0, -0.6, w, m).unwrap(), 0.8, 0.4).unwrap();
        let gas = GaussianLabel::new(-7.0, 1.9, w / a.sqrt(), a * m).unwrap();
        let out = collide_cat(&cat, &gas).unwrap();
        let ga = scatter(&CollisionInput { brownian: cat.a, gas }).gas;
        let gb = scatter(&CollisionInput { brownian: cat.b, gas }).gas;
        let expected = C64::from_polar(cat.c, cat.phi) * gb.overlap(&ga).unwrap();
        let got = C64::from_polar(out.c, out.phi);
        assert!((got - expected).norm() < 1e-12, "{got} vs {expected}");
        assert!((out.phase_invariant() - cat.phase_invariant()).abs() < 1e-12);
    }

    #[test]
    fn width_mismatch_is_rejected() {
        let cat = CatState::pure(GaussianLabel::new(1.0, 0.0, 1.0, 1.0).unwrap(), GaussianLabel::new(-1.0, 0.0, 1.0, 1.0).unwrap()).unwrap();
        let gas = GaussianLabel::new(-9.0, 1.0, 1.0, 0.5).unwrap();
        assert!(collide_cat(&cat, &gas).is_err());
    }
}
