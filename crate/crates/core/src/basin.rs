//! Sector-shaped basins `B_t` / `B_{t,s}` around the characteristic direction.
//!
//! Points are tested in the coordinates of the reduced germ, where
//! `z_1 = z − z^ν/(ν−1) + …` and `A = 1/k`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::germ::{resonant_monomial, GermMap};
use crate::normal_form::InvariantProfile;
use crate::series::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SectorKind {
    /// `0 < |t| < a`
    V,
    /// `|t| > R`
    U,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sector {
    pub kind: SectorKind,
    pub radius: f64,
    pub halfangle: f64,
    pub center_arg: f64,
}

impl Sector {
    pub fn v(a: f64, halfangle: f64) -> Self {
        Sector { kind: SectorKind::V, radius: a, halfangle, center_arg: 0.0 }
    }

    pub fn u(r: f64, halfangle: f64) -> Self {
        Sector { kind: SectorKind::U, radius: r, halfangle, center_arg: 0.0 }
    }

    pub fn rotated(self, center_arg: f64) -> Self {
        Sector { center_arg, ..self }
    }

    pub fn contains(&self, t: C64) -> bool {
        let r = t.norm();
        let radial = match self.kind {
            SectorKind::V => r > 0.0 && r < self.radius,
            SectorKind::U => r > self.radius,
        };
        radial && (t * C64::from_polar(1.0, -self.center_arg)).arg().abs() < self.halfangle
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasinCase {
    /// `l < ν − 1`: `|z| < |u|^γ`
    Power,
    /// `l = ν − 1`: `|u|^γ log|z| < −1/l`
    Log,
}

impl fmt::Display for BasinCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BasinCase::Power => "power",
            BasinCase::Log => "log",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BasinParams {
    pub case: BasinCase,
    pub epsilon: f64,
    pub epsilon_prime: f64,
    pub delta: f64,
    pub delta_prime: f64,
    pub beta: f64,
    pub gamma: f64,
    /// `u`-petal, `1..=k`.
    pub t: u32,
    /// `z`-petal, `1..=ν−1`, when the construction splits `z` as well.
    pub s: Option<u32>,
    pub alpha: Vec<u32>,
    pub k: u32,
    pub nu: u32,
    pub l: u32,
    /// Normalized `a_j λ_j^{-1}` (the values they take once `A = 1/k`).
    pub ratios: Vec<C64>,
}

impl BasinParams {
    pub fn big_r(&self) -> f64 {
        self.epsilon.powi(-(self.k as i32))
    }

    pub fn big_r_prime(&self) -> f64 {
        self.epsilon_prime.powi(-((self.nu - 1) as i32))
    }

    pub fn eta(&self) -> C64 {
        C64::from_polar(1.0, 2.0 * PI * (self.t - 1) as f64 / self.k as f64)
    }

    pub fn rho(&self) -> C64 {
        let s = self.s.unwrap_or(1);
        C64::from_polar(1.0, 2.0 * PI * (s - 1) as f64 / (self.nu - 1) as f64)
    }

    pub fn alpha_norm(&self) -> u32 {
        self.alpha.iter().sum()
    }

    /// The `l = 0` petals follow the `l = ν − 1` pattern by analogy only.
    pub fn extrapolated(&self) -> bool {
        self.l == 0 && self.s.is_some()
    }

    pub fn with_petal(&self, t: u32, s: Option<u32>) -> Self {
        BasinParams { t, s, ..self.clone() }
    }

    pub fn with_epsilons(&self, epsilon: f64, epsilon_prime: f64) -> Self {
        BasinParams { epsilon, epsilon_prime, ..self.clone() }
    }

    pub fn delta_prime_bound(&self) -> f64 {
        let (l, nu) = (self.l as f64, (self.nu - 1) as f64);
        match self.case {
            BasinCase::Log => (self.delta / (2.0 * l * nu)).min(self.delta / (2.0 * l * l)),
            BasinCase::Power if self.l >= 1 => self.delta / (2.0 * l * nu),
            BasinCase::Power => self.delta / (2.0 * nu),
        }
    }

    /// Checks every inequality the construction relies on.
    pub fn validate(&self) -> Result<()> {
        let k = self.k as f64;
        let fail = |what: String| Err(Error::Params(what));
        for (name, x) in [("epsilon", self.epsilon), ("epsilon'", self.epsilon_prime), ("beta", self.beta)] {
            if !(x > 0.0 && x < 1.0) {
                return fail(format!("{name} = {x} must lie in (0, 1)"));
            }
        }
        if !(self.delta > 0.0 && self.delta < 1.0 / k) {
            return fail(format!("delta = {} must lie in (0, 1/k)", self.delta));
        }
        let max_arg = self.ratios.iter().map(|r| r.arg().abs()).fold(0.0, f64::max);
        if !(max_arg + 2.0 * k * self.delta < FRAC_PI_2) {
            return fail(format!(
                "max |arg(a_j/lambda_j)| + 2k delta = {} is not below pi/2",
                max_arg + 2.0 * k * self.delta
            ));
        }
        if !(self.delta_prime > 0.0 && self.delta_prime < self.delta_prime_bound()) {
            return fail(format!("delta' = {} must lie in (0, {})", self.delta_prime, self.delta_prime_bound()));
        }
        let min_re = self.ratios.iter().map(|r| r.re).fold(f64::INFINITY, f64::min);
        if !(self.beta < k * min_re) {
            return fail(format!("beta = {} must be below k min Re(a_j/lambda_j) = {}", self.beta, k * min_re));
        }
        let (nu, l) = (self.nu as f64, self.l as f64);
        match self.case {
            BasinCase::Power => {
                let (lo, hi) = (k / (nu - l), k / (nu - l - 1.0));
                if !(self.gamma > lo && self.gamma < hi) {
                    return fail(format!("gamma = {} must lie in ({lo}, {hi})", self.gamma));
                }
            }
            BasinCase::Log => {
                let hi = k / (1.0 + 1f64.tan()).sqrt();
                if !(self.gamma > 0.0 && self.gamma < hi) {
                    return fail(format!("gamma = {} must lie in (0, {hi})", self.gamma));
                }
            }
        }
        let petals_ok = self.t >= 1 && self.t <= self.k && self.s.is_none_or(|s| s >= 1 && s < self.nu);
        if !petals_ok {
            return fail(format!("petal ({}, {:?}) out of range", self.t, self.s));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Overrides {
    pub epsilon: Option<f64>,
    pub epsilon_prime: Option<f64>,
}

pub const DEFAULT_EPSILON: f64 = 0.1;

/// Deterministic parameter choice for petal `(1, s_1)`: midpoints and half-bounds.
pub fn choose_params(profile: &InvariantProfile, overrides: &Overrides) -> Result<BasinParams> {
    if !profile.attracting {
        return Err(Error::Precondition("germ is not attracting; the delta interval is empty".into()));
    }
    if !profile.degenerately_separating {
        return Err(Error::Precondition("germ is not degenerately separating".into()));
    }
    let l = profile.l.ok_or_else(|| Error::Precondition("separation order l is undefined".into()))?;
    let nu = profile.nu.expect("attracting profiles have a finite nu");
    let k = profile.k.expect("attracting profiles have k");
    let kf = k as f64;
    let ratios = profile.normalized_ratios();
    let case = if l + 1 == nu { BasinCase::Log } else { BasinCase::Power };
    let gamma = match case {
        BasinCase::Power => 0.5 * (kf / (nu - l) as f64 + kf / (nu - l - 1) as f64),
        BasinCase::Log => 0.5 * kf / (1.0 + 1f64.tan()).sqrt(),
    };
    let max_arg = ratios.iter().map(|r| r.arg().abs()).fold(0.0, f64::max);
    let delta = (1.0 / (2.0 * kf)).min((FRAC_PI_2 - max_arg) / (4.0 * kf));
    let min_re = ratios.iter().map(|r| r.re).fold(f64::INFINITY, f64::min);
    let beta = (0.5 * kf * min_re).min(0.9);
    let mut p = BasinParams {
        case,
        epsilon: overrides.epsilon.unwrap_or(DEFAULT_EPSILON),
        epsilon_prime: overrides.epsilon_prime.unwrap_or(DEFAULT_EPSILON),
        delta,
        delta_prime: 0.0,
        beta,
        gamma,
        t: 1,
        s: None,
        alpha: profile.alpha.clone(),
        k,
        nu,
        l,
        ratios,
    };
    p.delta_prime = 0.5 * p.delta_prime_bound();
    if l == 0 || case == BasinCase::Log {
        p.s = Some(1);
    }
    p.validate()?;
    Ok(p)
}

/// `(t, s)` petal indices.
pub fn petal_list(profile: &InvariantProfile) -> Result<Vec<(u32, Option<u32>)>> {
    let l = profile.l.ok_or_else(|| Error::Precondition("separation order l is undefined".into()))?;
    let (nu, k) = match (profile.nu, profile.k) {
        (Some(nu), Some(k)) => (nu, k),
        _ => return Err(Error::Precondition("nu and k are required for the petal list".into())),
    };
    let mut out = Vec::new();
    for t in 1..=k {
        if l == 0 || l + 1 == nu {
            for s in 1..nu {
                out.push((t, Some(s)));
            }
        } else {
            out.push((t, None));
        }
    }
    Ok(out)
}

/// One basin inequality.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Condition {
    /// `u = 0`
    UVanishes,
    /// `|z| < |u|^γ`, or `|u|^γ log|z| < −1/l` in the log case
    ZBelowU,
    /// `|w_j| < |u|^β` (zero-based `j`)
    WBound(usize),
    /// `u ∈ η_t V(ε, δ)`
    USector,
    /// `z ∈ ϱ_s V(ε′, δ′)`
    ZSector,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Condition::UVanishes => f.write_str("u = 0"),
            Condition::ZBelowU => f.write_str("z below |u|^gamma"),
            Condition::WBound(j) => write!(f, "|w{}| < |u|^beta", j + 1),
            Condition::USector => f.write_str("u in eta_t V(eps, delta)"),
            Condition::ZSector => f.write_str("z in rho_s V(eps', delta')"),
        }
    }
}

/// The basin inequalities that `p` violates (empty for members).
pub fn violations(p: &[C64], params: &BasinParams) -> Vec<Condition> {
    let u = resonant_monomial(p, &params.alpha);
    if u.norm() == 0.0 {
        return vec![Condition::UVanishes];
    }
    let mut out = Vec::new();
    let au = u.norm();
    let z = p[0];
    let z_ok = match params.case {
        BasinCase::Power => z.norm() < au.powf(params.gamma),
        BasinCase::Log => au.powf(params.gamma) * z.norm().ln() < -1.0 / params.l as f64,
    };
    if !z_ok {
        out.push(Condition::ZBelowU);
    }
    let wb = au.powf(params.beta);
    for (j, w) in p[1..].iter().enumerate() {
        if !(w.norm() < wb) {
            out.push(Condition::WBound(j));
        }
    }
    if !Sector::v(params.epsilon, params.delta).contains(u / params.eta()) {
        out.push(Condition::USector);
    }
    if !Sector::v(params.epsilon_prime, params.delta_prime).contains(z / params.rho()) {
        out.push(Condition::ZSector);
    }
    out
}

pub fn membership(p: &[C64], params: &BasinParams) -> bool {
    p.len() == params.alpha.len() + 1 && violations(p, params).is_empty()
}

/// `w` with `w^α = u`, every coordinate of modulus `|u|^{1/|α|}` (up to `moduli`),
/// taking the phase from the first coordinate with `α_j > 0`.
fn w_for_u(u: C64, alpha: &[u32], moduli: &[f64], phases: &[f64]) -> Vec<C64> {
    let base = u.norm().powf(1.0 / alpha.iter().sum::<u32>() as f64);
    let j0 = alpha.iter().position(|&a| a > 0).expect("alpha is nonzero");
    let mut w: Vec<C64> = moduli.iter().zip(phases).map(|(m, ph)| C64::from_polar(base * m, *ph)).collect();
    let mut rest = C64::new(1.0, 0.0);
    for (j, (&wj, &a)) in w.iter().zip(alpha).enumerate() {
        if j != j0 && a > 0 {
            rest *= wj.powu(a);
        }
    }
    w[j0] = (u / rest).powf(1.0 / alpha[j0] as f64);
    w
}

/// The point `(ϱ_s r^{2|α|γ}, r, …, r)` rotated into petal `t`; in the log
/// case `z = ϱ_s exp(−2/(l|u|^γ))`, since `r^{2|α|γ}` is not small enough there.
pub fn witness(params: &BasinParams, r: f64) -> Vec<C64> {
    let a = params.alpha_norm() as f64;
    let au = r.powf(a);
    let zmod = match params.case {
        BasinCase::Power => r.powf(2.0 * a * params.gamma),
        BasinCase::Log => (-2.0 / (params.l as f64 * au.powf(params.gamma))).exp(),
    };
    let mut p = vec![params.rho() * zmod];
    let j0 = params.alpha.iter().position(|&a| a > 0).expect("alpha is nonzero");
    for j in 0..params.alpha.len() {
        let mut w = C64::new(r, 0.0);
        if j == j0 {
            let turn = (params.t - 1) as f64 / (params.k * params.alpha[j0]) as f64;
            w *= C64::from_polar(1.0, 2.0 * PI * turn);
        }
        p.push(w);
    }
    p
}

/// Witness radius with `|u| = ε/10`.
pub fn default_witness(params: &BasinParams) -> Vec<C64> {
    witness(params, (params.epsilon / 10.0).powf(1.0 / params.alpha_norm() as f64))
}

/// Starting point for long orbits: `|u| = ε/2` on the petal axis, `z` well
/// inside the `z`-condition but not so small that its decay is swamped.
pub fn orbit_start(params: &BasinParams) -> Vec<C64> {
    let au = params.epsilon / 2.0;
    let zmod = match params.case {
        BasinCase::Power => (params.epsilon_prime / 2.0).min(au.powf(params.gamma) / 2.0),
        BasinCase::Log => (params.epsilon_prime / 2.0).min((-1.5 / (params.l as f64 * au.powf(params.gamma))).exp()),
    };
    let n = params.alpha.len();
    let mut p = vec![params.rho() * zmod];
    p.extend(w_for_u(params.eta() * au, &params.alpha, &vec![1.0; n], &vec![0.0; n]));
    p
}

/// Per-petal RNG seed, so petals draw independent streams from one user seed.
pub fn petal_seed(seed: u64, params: &BasinParams) -> u64 {
    seed ^ (u64::from(params.t) << 32 | u64::from(params.s.unwrap_or(0))).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Seeded sample of `m` basin points near the witness curve, rejection-filtered
/// by [`membership`]. `spread = 0` returns copies of [`default_witness`].
pub fn sample_basin(params: &BasinParams, m: usize, seed: u64, spread: f64) -> Result<Vec<Vec<C64>>> {
    if m == 0 {
        return Err(Error::Precondition("sample size must be at least 1".into()));
    }
    if spread == 0.0 {
        let w = default_witness(params);
        if !membership(&w, params) {
            return Err(Error::Rejection { attempts: 1, accepted: 0 });
        }
        return Ok(vec![w; m]);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(petal_seed(seed, params));
    let n = params.alpha.len();
    let max_attempts = 1000 * m;
    let mut out = Vec::with_capacity(m);
    let mut attempts = 0;
    while out.len() < m {
        if attempts == max_attempts {
            return Err(Error::Rejection { attempts, accepted: out.len() });
        }
        attempts += 1;
        // |u| log-uniform in (ε·10^-3, ε), arg u across the sector
        let au = params.epsilon * 10f64.powf(-3.0 * rng.gen::<f64>());
        let u = params.eta() * C64::from_polar(au, params.delta * rng.gen_range(-1.0..1.0));
        let moduli: Vec<f64> = (0..n).map(|_| (0.1 * spread * rng.gen_range(-1.0..1.0)).exp()).collect();
        let phases: Vec<f64> = (0..n).map(|_| spread * rng.gen_range(-PI..PI)).collect();
        let w = w_for_u(u, &params.alpha, &moduli, &phases);
        let zmod = match params.case {
            BasinCase::Power => au.powf(params.gamma * rng.gen_range(1.0..2.5)),
            BasinCase::Log => (-rng.gen_range(1.0..3.0) / (params.l as f64 * au.powf(params.gamma))).exp(),
        };
        let z = params.rho() * C64::from_polar(zmod, params.delta_prime * rng.gen_range(-1.0..1.0));
        let mut p = Vec::with_capacity(n + 1);
        p.push(z);
        p.extend(w);
        if membership(&p, params) {
            out.push(p);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct Calibration {
    pub params: Vec<BasinParams>,
    pub halvings: u32,
    /// Empirical `max |1/z_1^{ν−1} − 1/z^{ν−1} − 1|` over the samples.
    pub c_const: f64,
}

pub const EPSILON_FLOOR: f64 = 1e-6;

/// Halves `ε` and `ε′` jointly for all petals until one-step invariance holds
/// on `samples` points per petal and `ε′ C < tan((ν−1)δ′)`.
pub fn calibrate_epsilons(germ: &GermMap, petals: &[BasinParams], samples: usize, seed: u64) -> Result<Calibration> {
    let mut current: Vec<BasinParams> = petals.to_vec();
    let mut halvings = 0;
    loop {
        let mut failure: Option<String> = None;
        let mut c_const: f64 = 0.0;
        for params in &current {
            params.validate()?;
            let report = crate::orbit::verify_invariance(germ, params, samples, seed)?;
            if report.failed > 0 {
                let w = &report.witnesses[0];
                failure = Some(format!(
                    "petal {}: point {} violates {}",
                    crate::report::petal_label(params.t, params.s),
                    crate::report::fmt_point(&w.point),
                    crate::report::fmt_conditions(&w.violated)
                ));
                break;
            }
            c_const = c_const.max(report.c_const);
            let margin = ((params.nu - 1) as f64 * params.delta_prime).tan();
            if !(params.epsilon_prime * report.c_const < margin) {
                failure = Some(format!(
                    "petal {}: eps' C = {} is not below tan((nu-1) delta') = {margin}",
                    crate::report::petal_label(params.t, params.s),
                    params.epsilon_prime * report.c_const
                ));
                break;
            }
        }
        match failure {
            None => return Ok(Calibration { params: current, halvings, c_const }),
            Some(what) => {
                let (e, ep) = (current[0].epsilon / 2.0, current[0].epsilon_prime / 2.0);
                if e < EPSILON_FLOOR || ep < EPSILON_FLOOR {
                    return Err(Error::CalibrationFloor(what));
                }
                current = current.iter().map(|p| p.with_epsilons(e, ep)).collect();
                halvings += 1;
            }
        }
    }
}
