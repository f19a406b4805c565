//! Degree-by-degree removal of non-resonant monomials.

use crate::error::{Error, Result};
use crate::germ::{compose_maps, GermMap};
use crate::series::{Series, C64};

/// Divisors `|λ^β − λ_s|` at or below this are treated as resonant.
pub const DEFAULT_SD_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct PdStep {
    pub germ: GermMap,
    /// `Φ = id + H` with `G = Φ^{-1} ∘ F ∘ Φ`.
    pub change: Vec<Series>,
    pub removed: usize,
    /// Degree-`d` monomials left in place because their divisor is small.
    pub kept_small_divisors: usize,
}

/// Inverse of `id + H` for `H` of order `>= 2`, by the fixed point `Ψ = id − H ∘ Ψ`.
pub fn invert_near_identity(h: &[Series]) -> Result<Vec<Series>> {
    let n = h[0].n();
    let cap = h[0].order_cap();
    let id: Vec<Series> = (0..=n).map(|v| Series::variable(n, cap, v)).collect();
    let mut psi = id.clone();
    // each pass fixes at least one more degree
    for _ in 0..cap {
        let h_psi = compose_maps(h, &psi)?;
        let next: Vec<Series> = id.iter().zip(&h_psi).map(|(i, hp)| i.sub(hp)).collect::<Result<_>>()?;
        if next == psi {
            break;
        }
        psi = next;
    }
    Ok(psi)
}

pub fn poincare_dulac_step(germ: &GermMap, degree: u32, sd_tol: f64) -> Result<PdStep> {
    if degree < 2 || degree > germ.order_cap() {
        return Err(Error::DegreeOutOfRange { degree, order_cap: germ.order_cap() });
    }
    let n = germ.n();
    let cap = germ.order_cap();
    let spectrum = germ.spectrum();
    let mut h = vec![Series::zero(n, cap); n + 1];
    let mut removed_idx = vec![Vec::new(); n + 1];
    let mut kept = 0;
    for (s, comp) in germ.components().iter().enumerate() {
        for (idx, c) in comp.homogeneous(degree).terms() {
            // the z-exponent carries eigenvalue 1 and drops out of the divisor
            let divisor: C64 = spectrum.divisor(&idx.w, s);
            if divisor.norm() > sd_tol {
                h[s].add_term(idx.clone(), c / divisor);
                removed_idx[s].push(idx.clone());
            } else {
                kept += 1;
            }
        }
    }
    let removed = removed_idx.iter().map(Vec::len).sum();
    let id: Vec<Series> = germ.identity();
    let phi: Vec<Series> = id.iter().zip(&h).map(|(i, hs)| i.add(hs)).collect::<Result<_>>()?;
    if removed == 0 {
        return Ok(PdStep { germ: germ.clone(), change: phi, removed, kept_small_divisors: kept });
    }
    let psi = invert_near_identity(&h)?;
    let f_phi = germ.compose_after(&phi)?;
    let mut comps = compose_maps(&psi, &f_phi)?;
    for (s, idxs) in removed_idx.into_iter().enumerate() {
        for idx in idxs {
            comps[s].remove(&idx);
        }
    }
    Ok(PdStep { germ: germ.with_components(comps)?, change: phi, removed, kept_small_divisors: kept })
}

#[derive(Clone, Debug)]
pub struct Normalization {
    pub germ: GermMap,
    /// Composite change `Φ` with `G = Φ^{-1} ∘ F ∘ Φ`.
    pub change: Vec<Series>,
    pub removed: usize,
    pub kept_small_divisors: usize,
}

/// Applies [`poincare_dulac_step`] for degrees `2..=order`.
pub fn normalize(germ: &GermMap, order: u32, sd_tol: f64) -> Result<Normalization> {
    let mut g = germ.clone();
    let mut change = germ.identity();
    let mut removed = 0;
    let mut kept = 0;
    for d in 2..=order.min(germ.order_cap()) {
        let step = poincare_dulac_step(&g, d, sd_tol)?;
        change = compose_maps(&change, &step.change)?;
        removed += step.removed;
        kept += step.kept_small_divisors;
        g = step.germ;
    }
    Ok(Normalization { germ: g, change, removed, kept_small_divisors: kept })
}

/// Largest coefficient of `F ∘ Φ − Φ ∘ G` up to degree `d`.
pub fn conjugacy_residual(f: &GermMap, g: &GermMap, change: &[Series], d: u32) -> Result<f64> {
    let lhs = f.compose_after(change)?;
    let rhs = compose_maps(change, g.components())?;
    let mut worst: f64 = 0.0;
    for (a, b) in lhs.iter().zip(&rhs) {
        worst = worst.max(a.max_diff_upto(b, d)?);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normal_form::invariants::compute_orders;
    use crate::presets::{self, golden_spectrum, Preset};
    use crate::series::MultiIndex;
    use proptest::prelude::*;

    fn perturbed_e1(cap: u32, extra: &[(usize, u32, [u32; 2], C64)]) -> GermMap {
        let e1 = presets::build(Preset::E1, cap).germ;
        let mut comps = e1.components().to_vec();
        for &(s, z, w, c) in extra {
            comps[s].add_term(MultiIndex::new(z, w.to_vec()), c);
        }
        e1.with_components(comps).unwrap()
    }

    #[test]
    fn removes_single_nonresonant_term() {
        let c = C64::new(0.3, -0.1);
        let f = perturbed_e1(6, &[(1, 0, [2, 0], c)]);
        let step = poincare_dulac_step(&f, 2, DEFAULT_SD_TOL).unwrap();
        assert_eq!(step.removed, 1);
        // z² in the z-component and every resonant monomial stay
        assert_eq!(step.kept_small_divisors, 1);
        let g = step.germ;
        assert_eq!(g.w_component(0).coeff(&MultiIndex::new(0, vec![2, 0])), C64::default());
        assert_eq!(g.z_component().coeff(&MultiIndex::z_pow(2, 2)), C64::new(-1.0, 0.0));

        // coefficient of h: c / (λ_1² − λ_1)
        let spec = golden_spectrum();
        let l1 = spec.lambda(0);
        let h = step.change[1].coeff(&MultiIndex::new(0, vec![2, 0]));
        assert!((h - c / (l1 * l1 - l1)).norm() < 1e-14);
        assert!(conjugacy_residual(&f, &g, &step.change, 6).unwrap() < 1e-12);
    }

    #[test]
    fn pure_z_terms_in_w_components_are_removed() {
        let f = perturbed_e1(6, &[(2, 2, [0, 0], C64::new(0.5, 0.0)), (2, 3, [0, 0], C64::new(0.2, 0.1))]);
        let norm = normalize(&f, 5, DEFAULT_SD_TOL).unwrap();
        let o = compute_orders(&norm.germ);
        assert_eq!(o.nu, Some(2));
        assert!(o.mu.is_none_or(|mu| mu >= 6));
        assert!(conjugacy_residual(&f, &norm.germ, &norm.change, 5).unwrap() < 1e-10);
    }

    #[test]
    fn degree_range_is_checked() {
        let f = presets::build(Preset::E1, 4).germ;
        assert!(poincare_dulac_step(&f, 1, DEFAULT_SD_TOL).is_err());
        assert!(poincare_dulac_step(&f, 5, DEFAULT_SD_TOL).is_err());
    }

    #[test]
    fn presets_are_already_normal() {
        for p in Preset::ALL {
            let f = presets::build(p, 6).germ;
            let norm = normalize(&f, 6, DEFAULT_SD_TOL).unwrap();
            assert_eq!(norm.removed, 0);
            assert_eq!(norm.germ, f);
        }
    }

    #[test]
    fn inverse_of_near_identity() {
        let n = 2;
        let cap = 6;
        let mut h = vec![Series::zero(n, cap); 3];
        h[0].add_term(MultiIndex::new(1, vec![1, 0]), C64::new(0.4, 0.2));
        h[1].add_term(MultiIndex::new(2, vec![0, 0]), C64::new(-0.3, 0.0));
        h[2].add_term(MultiIndex::new(0, vec![1, 1]), C64::new(0.0, 0.7));
        let id: Vec<Series> = (0..=n).map(|v| Series::variable(n, cap, v)).collect();
        let phi: Vec<Series> = id.iter().zip(&h).map(|(a, b)| a.add(b).unwrap()).collect();
        let psi = invert_near_identity(&h).unwrap();
        let round = compose_maps(&psi, &phi).unwrap();
        for (r, i) in round.iter().zip(&id) {
            assert!(r.max_diff_upto(i, cap).unwrap() < 1e-14);
        }
    }

    fn arb_term() -> impl Strategy<Value = (usize, u32, [u32; 2], C64)> {
        (0usize..3, 0u32..4, 0u32..4, 0u32..4, -1.0..1.0f64, -1.0..1.0f64)
            .prop_filter("degree 2..=5", |t| (2..=5).contains(&(t.1 + t.2 + t.3)))
            .prop_map(|(s, z, a, b, re, im)| (s, z, [a, b], C64::new(re, im)))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn normalization_conjugates_and_keeps_nu(terms in prop::collection::vec(arb_term(), 1..6)) {
            // keep ν = 2: only perturb pure-z terms of the z-component at degree >= 3
            let terms: Vec<_> = terms
                .into_iter()
                .filter(|t| !(t.0 == 0 && t.2 == [0, 0] && t.1 == 2))
                .collect();
            let f = perturbed_e1(6, &terms);
            let norm = normalize(&f, 5, DEFAULT_SD_TOL).unwrap();
            prop_assert!(conjugacy_residual(&f, &norm.germ, &norm.change, 5).unwrap() < 1e-9);
            prop_assert_eq!(compute_orders(&norm.germ).nu, Some(2));
        }
    }
}
