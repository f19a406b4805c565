//! Extraction of the classification data of a germ: orders `ν`, `μ`, the
//! characteristic direction `[1:0:…:0]`, dynamical separation, the leading
//! resonant block `a_j z^{l_j} w^{kα} w_j`, and the invariants `A`, `c`.

use crate::error::{Error, Result};
use crate::germ::GermMap;
use crate::resonance::resonant_power;
use crate::series::{MultiIndex, C64};

/// Coefficients at or below this modulus count as absent.
pub const PRESENCE_TOL: f64 = 1e-12;

/// `|A|` at or below this counts as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-12;

fn present(c: &C64) -> bool {
    c.norm() > PRESENCE_TOL
}

#[derive(Clone, Debug, PartialEq)]
pub struct Orders {
    pub nu: Option<u32>,
    pub mu: Option<u32>,
    pub ultra_resonant: bool,
    /// `ν` or `μ` is absent up to `order_cap`, so the answer only holds for
    /// the truncated representative.
    pub truncation_limited: bool,
}

pub fn compute_orders(germ: &GermMap) -> Orders {
    let least_pure_z = |s: usize| {
        germ.components()[s].terms().filter(|(i, c)| i.is_pure_z() && i.z >= 2 && present(c)).map(|(i, _)| i.z).min()
    };
    let nu = least_pure_z(0);
    let mu = (1..=germ.n()).filter_map(least_pure_z).min();
    let ultra_resonant = match (nu, mu) {
        (Some(nu), Some(mu)) => mu >= nu,
        (Some(_), None) => true,
        (None, _) => false,
    };
    Orders { nu, mu, ultra_resonant, truncation_limited: nu.is_none() || mu.is_none() }
}

fn require_nu(germ: &GermMap) -> Result<u32> {
    compute_orders(germ).nu.ok_or_else(|| Error::Precondition("the order nu is not finite up to order_cap".into()))
}

/// The `λ` with `F_ν(v) = λ v` for `v = (1, 0, …, 0)`, if `v` is a
/// non-degenerate characteristic direction.
pub fn check_characteristic_direction(germ: &GermMap) -> Result<Option<C64>> {
    let nu = require_nu(germ)?;
    let part = germ.homogeneous_part(nu)?;
    let mut v = vec![C64::default(); germ.n() + 1];
    v[0] = C64::new(1.0, 0.0);
    let image: Vec<C64> = part.iter().map(|s| s.eval(&v)).collect();
    if image[1..].iter().any(present) || !present(&image[0]) {
        return Ok(None);
    }
    Ok(Some(image[0]))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Separation {
    pub dynamically_separating: bool,
    pub degenerately_separating: bool,
    /// Least `i >= 1` with a `z^i w_j` term in component `j`.
    pub r_js: Vec<Option<u32>>,
}

pub fn check_dynamical_separation(germ: &GermMap) -> Result<Separation> {
    let nu = require_nu(germ)?;
    let n = germ.n();
    let r_js: Vec<Option<u32>> = (0..n)
        .map(|j| {
            let unit = MultiIndex::w_unit(n, j).w;
            germ.w_component(j).terms().filter(|(i, c)| i.z >= 1 && i.w == unit && present(c)).map(|(i, _)| i.z).min()
        })
        .collect();
    let dynamically_separating = r_js.iter().all(|r| r.is_none_or(|r| r + 1 >= nu));
    let degenerately_separating = dynamically_separating && r_js.iter().all(|r| r.is_none_or(|r| r + 1 > nu));
    Ok(Separation { dynamically_separating, degenerately_separating, r_js })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResonantLeading {
    /// One-resonant order: least `k >= 1` with a `z^m w^{kα} w_j` term.
    pub k: u32,
    pub l_js: Vec<Option<u32>>,
    pub a: Vec<C64>,
    pub b: Vec<C64>,
    /// Common separation order, when all `l_j` agree and `l <= ν − 1`.
    pub l: Option<u32>,
    pub diagnostic: Option<String>,
}

/// Resonant monomials `z^m w^{k'α} w_j` (`k' >= 1`) of component `j`, as `(k', m, coefficient)`.
pub fn resonant_terms(germ: &GermMap, alpha: &[u32], j: usize) -> Vec<(u32, u32, C64)> {
    germ.w_component(j)
        .terms()
        .filter(|(_, c)| present(c))
        .filter_map(|(i, c)| match resonant_power(&i.w, alpha, j) {
            Some(kp) if kp >= 1 => Some((kp, i.z, *c)),
            _ => None,
        })
        .collect()
}

pub fn extract_resonant_leading(germ: &GermMap, alpha: &[u32]) -> Result<ResonantLeading> {
    let orders = compute_orders(germ);
    let nu = orders.nu.ok_or_else(|| Error::Precondition("the order nu is not finite up to order_cap".into()))?;
    if !orders.ultra_resonant {
        return Err(Error::Precondition("germ is not ultra-resonant".into()));
    }
    let sep = check_dynamical_separation(germ)?;
    if !sep.dynamically_separating {
        return Err(Error::Precondition("germ is not dynamically separating".into()));
    }
    let n = germ.n();
    let per_comp: Vec<Vec<(u32, u32, C64)>> = (0..n).map(|j| resonant_terms(germ, alpha, j)).collect();
    let k =
        per_comp.iter().flatten().map(|&(kp, _, _)| kp).min().ok_or_else(|| {
            Error::TruncationLimited("no resonant monomial z^m w^{k alpha} w_j up to order_cap".into())
        })?;

    let mut l_js = Vec::with_capacity(n);
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    for j in 0..n {
        let lead = per_comp[j].iter().filter(|t| t.0 == k).min_by_key(|t| t.1);
        l_js.push(lead.map(|t| t.1));
        a.push(lead.map_or(C64::default(), |t| -t.2));
        let bj = sep.r_js[j].map_or(C64::default(), |r| {
            let mut w = vec![0; n];
            w[j] = 1;
            -germ.w_component(j).coeff(&MultiIndex::new(r, w))
        });
        b.push(bj);
    }

    let (l, diagnostic) = match l_js[0] {
        Some(l0) if l_js.iter().all(|x| *x == Some(l0)) => {
            if l0 < nu {
                (Some(l0), None)
            } else {
                (None, Some(format!("separation order l = {l0} exceeds nu - 1 = {}", nu - 1)))
            }
        }
        _ => (None, Some(format!("separation orders differ across components: {}", fmt_opt_list(&l_js)))),
    };
    Ok(ResonantLeading { k, l_js, a, b, l, diagnostic })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Attraction {
    /// `A = Σ α_j a_j λ_j^{-1}`
    pub a_invariant: C64,
    /// `c = Σ α_j b_j λ_j^{-1}`
    pub c_invariant: C64,
    pub nondegenerate: bool,
    pub attracting: bool,
    /// `a_j λ_j^{-1} A^{-1}` (empty when degenerate).
    pub ratios: Vec<C64>,
}

pub fn compute_a_c_attracting(lambdas: &[C64], alpha: &[u32], a: &[C64], b: &[C64]) -> Attraction {
    let weighted = |x: &[C64]| -> C64 { x.iter().zip(lambdas).zip(alpha).map(|((x, l), &al)| x / l * al as f64).sum() };
    let a_invariant = weighted(a);
    let c_invariant = weighted(b);
    let nondegenerate = a_invariant.norm() > DEGENERACY_TOL;
    let ratios: Vec<C64> =
        if nondegenerate { a.iter().zip(lambdas).map(|(a, l)| a / l / a_invariant).collect() } else { Vec::new() };
    let attracting = nondegenerate && ratios.iter().all(|r| r.re > 0.0);
    Attraction { a_invariant, c_invariant, nondegenerate, attracting, ratios }
}

/// Everything the classification needs, assembled in one pass. Missing
/// pieces are `None`/`false` with a diagnostic rather than an error.
#[derive(Clone, Debug, PartialEq)]
pub struct InvariantProfile {
    pub alpha: Vec<u32>,
    pub lambdas: Vec<C64>,
    pub nu: Option<u32>,
    pub mu: Option<u32>,
    pub ultra_resonant: bool,
    pub truncation_limited: bool,
    pub char_dir_lambda: Option<C64>,
    pub dynamically_separating: bool,
    pub degenerately_separating: bool,
    pub r_js: Vec<Option<u32>>,
    pub k: Option<u32>,
    pub l_js: Vec<Option<u32>>,
    pub l: Option<u32>,
    pub a: Vec<C64>,
    pub b: Vec<C64>,
    pub a_invariant: C64,
    pub c_invariant: C64,
    pub nondegenerate: bool,
    pub attracting: bool,
    pub diagnostics: Vec<String>,
}

impl InvariantProfile {
    pub fn extract(germ: &GermMap, alpha: &[u32]) -> Self {
        let n = germ.n();
        let lambdas = germ.spectrum().lambdas();
        let orders = compute_orders(germ);
        let mut p = InvariantProfile {
            alpha: alpha.to_vec(),
            lambdas: lambdas.clone(),
            nu: orders.nu,
            mu: orders.mu,
            ultra_resonant: orders.ultra_resonant,
            truncation_limited: orders.truncation_limited,
            char_dir_lambda: None,
            dynamically_separating: false,
            degenerately_separating: false,
            r_js: vec![None; n],
            k: None,
            l_js: vec![None; n],
            l: None,
            a: vec![C64::default(); n],
            b: vec![C64::default(); n],
            a_invariant: C64::default(),
            c_invariant: C64::default(),
            nondegenerate: false,
            attracting: false,
            diagnostics: Vec::new(),
        };
        if orders.nu.is_none() {
            p.diagnostics.push("no pure z^i term (i >= 2) in the z-component up to order_cap".into());
            return p;
        }
        if orders.mu.is_none() {
            p.diagnostics.push("mu: no pure z^i term in the w-components up to order_cap (truncation-limited)".into());
        }
        p.char_dir_lambda = check_characteristic_direction(germ).ok().flatten();
        if let Ok(sep) = check_dynamical_separation(germ) {
            p.dynamically_separating = sep.dynamically_separating;
            p.degenerately_separating = sep.degenerately_separating;
            p.r_js = sep.r_js;
        }
        match extract_resonant_leading(germ, alpha) {
            Ok(lead) => {
                p.k = Some(lead.k);
                p.l_js = lead.l_js;
                p.l = lead.l;
                p.a = lead.a;
                p.b = lead.b;
                if let Some(d) = lead.diagnostic {
                    p.diagnostics.push(d);
                }
                let att = compute_a_c_attracting(&lambdas, alpha, &p.a, &p.b);
                p.a_invariant = att.a_invariant;
                p.c_invariant = att.c_invariant;
                p.nondegenerate = att.nondegenerate;
                p.attracting = att.attracting;
            }
            Err(e) => p.diagnostics.push(format!("resonant leading terms: {e}")),
        }
        p
    }

    /// `a_j λ_j^{-1} / (kA)`: the values `a_j λ_j^{-1}` take once `A` is scaled to `1/k`.
    pub fn normalized_ratios(&self) -> Vec<C64> {
        let k = self.k.unwrap_or(1) as f64;
        self.a.iter().zip(&self.lambdas).map(|(a, l)| a / l / (self.a_invariant * k)).collect()
    }

    pub fn alpha_norm(&self) -> u32 {
        self.alpha.iter().sum()
    }
}

pub(crate) fn fmt_opt_list(xs: &[Option<u32>]) -> String {
    let parts: Vec<String> = xs.iter().map(|x| x.map_or_else(|| "none".to_string(), |v| v.to_string())).collect();
    format!("({})", parts.join(", "))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::{self, golden_spectrum, Preset};
    use crate::series::Series;
    use proptest::prelude::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    /// Germ over the golden pair built from extra terms `(component, z, w, coeff)`.
    fn germ_with(z_terms: &[(u32, f64)], extra: &[(usize, u32, [u32; 2], C64)]) -> GermMap {
        let spec = golden_spectrum();
        let cap = 8;
        let mut comps = vec![Series::variable(2, cap, 0)];
        for j in 0..2 {
            comps.push(Series::variable(2, cap, j + 1).scale(spec.lambda(j)));
        }
        for &(e, v) in z_terms {
            comps[0].add_term(MultiIndex::z_pow(2, e), c(v));
        }
        for &(s, z, w, v) in extra {
            comps[s].add_term(MultiIndex::new(z, w.to_vec()), v);
        }
        GermMap::new(spec, comps).unwrap()
    }

    #[test]
    fn orders_examples() {
        let e1 = presets::build(Preset::E1, 6).germ;
        let o = compute_orders(&e1);
        assert_eq!((o.nu, o.mu, o.ultra_resonant), (Some(2), None, true));

        let g = germ_with(&[(3, 1.0)], &[(1, 2, [0, 0], c(1.0))]);
        let o = compute_orders(&g);
        assert_eq!((o.nu, o.mu, o.ultra_resonant), (Some(3), Some(2), false));

        let lin = germ_with(&[], &[]);
        assert_eq!(compute_orders(&lin).nu, None);
        assert!(!compute_orders(&lin).ultra_resonant);
    }

    #[test]
    fn characteristic_direction_examples() {
        let e1 = presets::build(Preset::E1, 6).germ;
        assert_eq!(check_characteristic_direction(&e1).unwrap(), Some(c(-1.0)));

        let g = germ_with(&[(2, -1.0)], &[(1, 2, [0, 0], c(0.3))]);
        assert_eq!(check_characteristic_direction(&g).unwrap(), None);

        let good = germ_with(&[(3, -0.5)], &[]);
        assert_eq!(check_characteristic_direction(&good).unwrap(), Some(c(-0.5)));

        assert!(check_characteristic_direction(&germ_with(&[], &[])).is_err());
    }

    #[test]
    fn separation_examples() {
        let e1 = presets::build(Preset::E1, 6).germ;
        let s = check_dynamical_separation(&e1).unwrap();
        assert!(s.dynamically_separating && s.degenerately_separating);
        assert_eq!(s.r_js, vec![None, None]);

        let g = germ_with(&[(3, -0.5)], &[(1, 1, [1, 0], c(0.2))]);
        assert!(!check_dynamical_separation(&g).unwrap().dynamically_separating);

        let g = germ_with(&[(2, -1.0)], &[(1, 2, [1, 0], c(0.2))]);
        let s = check_dynamical_separation(&g).unwrap();
        assert!(s.dynamically_separating && s.degenerately_separating);
        assert_eq!(s.r_js, vec![Some(2), None]);

        // r_j = ν − 1 separates but not degenerately
        let g = germ_with(&[(2, -1.0)], &[(2, 1, [0, 1], c(0.2))]);
        let s = check_dynamical_separation(&g).unwrap();
        assert!(s.dynamically_separating && !s.degenerately_separating);
    }

    #[test]
    fn resonant_leading_examples() {
        let e1 = presets::build(Preset::E1, 6).germ;
        let lead = extract_resonant_leading(&e1, &[1, 1]).unwrap();
        let lam = golden_spectrum().lambdas();
        assert_eq!(lead.k, 1);
        assert_eq!(lead.l_js, vec![Some(0), Some(0)]);
        assert_eq!(lead.l, Some(0));
        for (a, l) in lead.a.iter().zip(&lam) {
            assert!((a - l / 2.0).norm() < 1e-15);
        }

        let e3 = presets::build(Preset::E3, 6).germ;
        assert_eq!(extract_resonant_leading(&e3, &[1, 1]).unwrap().k, 2);

        let g = germ_with(&[(2, -1.0)], &[(1, 0, [2, 1], c(0.5)), (2, 2, [1, 2], c(0.5))]);
        let lead = extract_resonant_leading(&g, &[1, 1]).unwrap();
        assert_eq!(lead.l_js, vec![Some(0), Some(2)]);
        assert_eq!(lead.l, None);
        assert!(lead.diagnostic.unwrap().contains("differ"));

        assert!(matches!(
            extract_resonant_leading(&germ_with(&[(2, -1.0)], &[]), &[1, 1]),
            Err(Error::TruncationLimited(_))
        ));
    }

    #[test]
    fn b_coefficients_are_read_with_sign() {
        let g = germ_with(&[(2, -1.0)], &[(1, 0, [2, 1], c(0.5)), (2, 0, [1, 2], c(0.5)), (1, 3, [1, 0], c(0.7))]);
        let lead = extract_resonant_leading(&g, &[1, 1]).unwrap();
        assert_eq!(lead.b, vec![c(-0.7), C64::default()]);
    }

    #[test]
    fn attraction_examples() {
        let lam = golden_spectrum().lambdas();
        let half: Vec<C64> = lam.iter().map(|l| l / 2.0).collect();
        let att = compute_a_c_attracting(&lam, &[1, 1], &half, &[C64::default(); 2]);
        assert!((att.a_invariant - c(1.0)).norm() < 1e-15);
        assert_eq!(att.c_invariant, C64::default());
        assert!(att.attracting);
        assert!(att.ratios.iter().all(|r| (r - c(0.5)).norm() < 1e-15));

        let a = vec![lam[0], -lam[1]];
        let att = compute_a_c_attracting(&lam, &[1, 1], &a, &[C64::default(); 2]);
        assert!(!att.nondegenerate && !att.attracting);

        let a = vec![lam[0] * 2.0, -lam[1] / 2.0];
        let att = compute_a_c_attracting(&lam, &[1, 1], &a, &[C64::default(); 2]);
        assert!((att.a_invariant - c(1.5)).norm() < 1e-15);
        assert!((att.ratios[1].re + 1.0 / 3.0).abs() < 1e-15);
        assert!(!att.attracting);
    }

    #[test]
    fn profile_of_presets() {
        for (p, expect) in [(Preset::E1, (2, 1, 0)), (Preset::E2, (2, 1, 1)), (Preset::E3, (2, 2, 0))] {
            let prof = InvariantProfile::extract(&presets::build(p, 6).germ, &[1, 1]);
            assert_eq!((prof.nu, prof.k, prof.l), (Some(expect.0), Some(expect.1), Some(expect.2)), "{p}");
            assert!(prof.attracting && prof.degenerately_separating && prof.ultra_resonant);
            assert!((prof.a_invariant - c(1.0)).norm() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn a_scales_linearly(t_re in -3.0..3.0f64, t_im in -3.0..3.0f64, a0 in -1.0..1.0f64, a1 in -1.0..1.0f64) {
            let lam = golden_spectrum().lambdas();
            let t = C64::new(t_re, t_im);
            let a = vec![C64::new(a0, 0.3), C64::new(a1, -0.2)];
            let ta: Vec<C64> = a.iter().map(|x| x * t).collect();
            let base = compute_a_c_attracting(&lam, &[1, 2], &a, &a).a_invariant;
            let scaled = compute_a_c_attracting(&lam, &[1, 2], &ta, &a).a_invariant;
            prop_assert!((scaled - base * t).norm() <= 1e-12 * (1.0 + (base * t).norm()));
        }
    }
}
