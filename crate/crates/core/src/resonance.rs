//! Spectrum `{1, λ_1, ..., λ_n}` on the unit circle, enumeration of
//! multiplicative resonances `λ_s = λ^β`, and the one-resonance certificate.
//!
//! Angles are stored in turns (`λ_j = exp(2πi θ_j)`), so a resonance is an
//! integer relation `Σ β_j θ_j − θ_s ∈ Z` and its residual is the distance of
//! the left side to the nearest integer.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};
use crate::series::C64;

pub const DEFAULT_RES_TOL: f64 = 1e-9;
pub const DEFAULT_DEGREE_BOUND: u32 = 6;
pub const ROOT_OF_UNITY_BOUND: u32 = 64;
pub const ROOT_TOL: f64 = 1e-9;
pub const ENUMERATION_CAP: u128 = 10_000_000;

/// Distance from `x` to the nearest integer.
pub fn frac_dist(x: f64) -> f64 {
    (x - x.round()).abs()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    theta: Vec<f64>,
}

impl Spectrum {
    pub fn new(theta: Vec<f64>) -> Result<Self> {
        Self::with_checks(theta, ROOT_OF_UNITY_BOUND, ROOT_TOL)
    }

    pub fn with_checks(theta: Vec<f64>, root_bound: u32, root_tol: f64) -> Result<Self> {
        if theta.is_empty() {
            return Err(Error::InvalidSpectrum("at least one eigenvalue besides 1 is required".into()));
        }
        for (j, &t) in theta.iter().enumerate() {
            if !(0.0..1.0).contains(&t) || !t.is_finite() {
                return Err(Error::InvalidSpectrum(format!("theta_{} = {t} is outside [0, 1)", j + 1)));
            }
            for q in 1..=root_bound {
                let p = (t * q as f64).round();
                if (t - p / q as f64).abs() <= root_tol {
                    return Err(Error::InvalidSpectrum(format!(
                        "lambda_{} is (within {root_tol:e}) a root of unity: theta = {p}/{q}",
                        j + 1
                    )));
                }
            }
        }
        for i in 0..theta.len() {
            for j in i + 1..theta.len() {
                if frac_dist(theta[i] - theta[j]) <= root_tol {
                    return Err(Error::InvalidSpectrum(format!("lambda_{} and lambda_{} coincide", i + 1, j + 1)));
                }
            }
        }
        Ok(Self { theta })
    }

    pub fn n(&self) -> usize {
        self.theta.len()
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// `λ_j` for zero-based `j`.
    pub fn lambda(&self, j: usize) -> C64 {
        C64::from_polar(1.0, 2.0 * PI * self.theta[j])
    }

    pub fn lambdas(&self) -> Vec<C64> {
        (0..self.n()).map(|j| self.lambda(j)).collect()
    }

    /// Angle of `λ^β / λ_s` in turns, where `s = 0` is the eigenvalue 1 and
    /// `s = j + 1` is `λ_j`.
    pub fn relation_angle(&self, beta: &[u32], s: usize) -> f64 {
        let mut x: f64 = beta.iter().zip(&self.theta).map(|(&b, &t)| b as f64 * t).sum();
        if s > 0 {
            x -= self.theta[s - 1];
        }
        x - x.floor()
    }

    /// `λ^β − λ_s`, evaluated through the reduced angle for accuracy.
    pub fn divisor(&self, beta: &[u32], s: usize) -> C64 {
        let base = if s == 0 { C64::new(1.0, 0.0) } else { self.lambda(s - 1) };
        let phase = C64::from_polar(1.0, 2.0 * PI * self.relation_angle(beta, s));
        base * (phase - 1.0)
    }

    /// Residual of `Σ α_j θ_j` against the integers, i.e. how far `λ^α` is from 1.
    pub fn unit_residual(&self, alpha: &[u32]) -> f64 {
        frac_dist(self.relation_angle(alpha, 0))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResonanceRelation {
    /// One-based component index.
    pub s: usize,
    pub beta: Vec<u32>,
    pub residual: f64,
}

impl fmt::Display for ResonanceRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s={} beta={:?} residual={}", self.s, self.beta, crate::report::sig(self.residual))
    }
}

/// Number of `β ∈ N^n` with `|β| <= d`, i.e. `C(d + n, n)`, saturating.
fn count_upto(n: usize, d: u32) -> u128 {
    let mut acc: u128 = 1;
    for i in 1..=n as u128 {
        acc = acc.saturating_mul(d as u128 + i) / i;
    }
    acc
}

/// All `β ∈ N^n` with `|β| = d`, in ascending lexicographic order.
pub fn compositions(n: usize, d: u32) -> Vec<Vec<u32>> {
    fn rec(prefix: &mut Vec<u32>, left: u32, slots: usize, out: &mut Vec<Vec<u32>>) {
        if slots == 1 {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in 0..=left {
            prefix.push(first);
            rec(prefix, left - first, slots - 1, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(n), d, n, &mut out);
    out
}

/// Every relation `λ_s = λ^β` with `2 <= |β| <= degree_bound` holding within
/// `res_tol`, sorted by `(|β|, s, β)`.
pub fn find_resonances(spec: &Spectrum, degree_bound: u32, res_tol: f64) -> Result<Vec<ResonanceRelation>> {
    if degree_bound < 2 {
        return Err(Error::Precondition(format!("degree bound {degree_bound} < 2")));
    }
    let n = spec.n();
    let candidates = count_upto(n, degree_bound).saturating_mul(n as u128);
    if candidates > ENUMERATION_CAP {
        return Err(Error::EnumerationCap { candidates, cap: ENUMERATION_CAP });
    }
    let mut out = Vec::new();
    for d in 2..=degree_bound {
        let betas = compositions(n, d);
        for s in 1..=n {
            for beta in &betas {
                let residual = frac_dist(spec.relation_angle(beta, s));
                if residual <= res_tol {
                    out.push(ResonanceRelation { s, beta: beta.clone(), residual });
                }
            }
        }
    }
    Ok(out)
}

/// If `v = k·α` for a non-negative integer `k`, returns `k`.
pub fn multiple_of(v: &[u32], alpha: &[u32]) -> Option<u32> {
    let mut k: Option<u32> = None;
    for (&x, &a) in v.iter().zip(alpha) {
        if a == 0 {
            if x != 0 {
                return None;
            }
            continue;
        }
        if x % a != 0 {
            return None;
        }
        let q = x / a;
        match k {
            Some(prev) if prev != q => return None,
            _ => k = Some(q),
        }
    }
    Some(k.unwrap_or(0))
}

/// If `β = k·α + e_j` (zero-based `j`), returns `k`.
pub fn resonant_power(beta: &[u32], alpha: &[u32], j: usize) -> Option<u32> {
    if beta[j] == 0 {
        return None;
    }
    let mut v = beta.to_vec();
    v[j] -= 1;
    multiple_of(&v, alpha)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Certified,
    Refuted,
    Inconclusive,
    /// The generator was supplied by the user and detection was skipped.
    Asserted,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Verdict::Certified => "certified",
            Verdict::Refuted => "refuted",
            Verdict::Inconclusive => "inconclusive",
            Verdict::Asserted => "asserted",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OneResonanceCertificate {
    pub alpha: Vec<u32>,
    pub degree_bound: u32,
    pub res_tol: f64,
    pub relations: Vec<ResonanceRelation>,
    pub alpha_unit_residual: f64,
    pub verdict: Verdict,
    pub witness: Option<ResonanceRelation>,
}

impl OneResonanceCertificate {
    /// Accepts `alpha` without enumerating relations.
    pub fn asserted(spec: &Spectrum, alpha: &[u32], res_tol: f64) -> Result<Self> {
        check_alpha(spec, alpha)?;
        Ok(Self {
            alpha: alpha.to_vec(),
            degree_bound: 0,
            res_tol,
            relations: Vec::new(),
            alpha_unit_residual: spec.unit_residual(alpha),
            verdict: Verdict::Asserted,
            witness: None,
        })
    }

    pub fn holds(&self) -> bool {
        matches!(self.verdict, Verdict::Certified | Verdict::Asserted)
    }
}

fn check_alpha(spec: &Spectrum, alpha: &[u32]) -> Result<()> {
    if alpha.len() != spec.n() {
        return Err(Error::Precondition(format!("alpha has {} entries, spectrum has {}", alpha.len(), spec.n())));
    }
    if alpha.iter().all(|&a| a == 0) {
        return Err(Error::Precondition("alpha must be nonzero".into()));
    }
    Ok(())
}

pub fn certify_one_resonance(
    spec: &Spectrum,
    alpha: &[u32],
    degree_bound: u32,
    res_tol: f64,
) -> Result<OneResonanceCertificate> {
    check_alpha(spec, alpha)?;
    let relations = find_resonances(spec, degree_bound, res_tol)?;
    let alpha_unit_residual = spec.unit_residual(alpha);
    let witness =
        relations.iter().find(|r| !matches!(resonant_power(&r.beta, alpha, r.s - 1), Some(k) if k >= 1)).cloned();
    let verdict = if witness.is_some() {
        Verdict::Refuted
    } else if alpha_unit_residual <= res_tol {
        Verdict::Certified
    } else {
        Verdict::Inconclusive
    };
    Ok(OneResonanceCertificate {
        alpha: alpha.to_vec(),
        degree_bound,
        res_tol,
        relations,
        alpha_unit_residual,
        verdict,
        witness,
    })
}
