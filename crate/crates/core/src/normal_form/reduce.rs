//! Blowing up until the leading resonant block controls every higher one,
//! and the two scalings that bring the germ to its working form.

use crate::error::{Error, Result};
use crate::germ::GermMap;
use crate::series::{MultiIndex, Series, C64};

use super::blowup::blowup;
use super::invariants::{extract_resonant_leading, fmt_opt_list, resonant_terms, InvariantProfile};

/// Default bound on the number of blow-ups in [`reduce_to_good_form`].
pub const DEFAULT_MAX_BLOWUPS: u32 = 16;

#[derive(Clone, Debug)]
pub struct Reduction {
    pub germ: GermMap,
    pub blowups: u32,
    pub k: u32,
    pub l_js: Vec<Option<u32>>,
}

/// Monomials `z^m w^{k'α} w_j` with `k' > k` and `m < l_j`, as `(j, index)`.
pub fn offending_monomials(germ: &GermMap, alpha: &[u32], k: u32, l_js: &[Option<u32>]) -> Vec<(usize, MultiIndex)> {
    let n = germ.n();
    let mut out = Vec::new();
    for j in 0..n {
        let Some(lj) = l_js[j] else { continue };
        for (kp, m, _) in resonant_terms(germ, alpha, j) {
            if kp > k && m < lj {
                let mut w: Vec<u32> = alpha.iter().map(|a| a * kp).collect();
                w[j] += 1;
                out.push((j, MultiIndex::new(m, w)));
            }
        }
    }
    out
}

fn describe(offending: &[(usize, MultiIndex)]) -> String {
    let parts: Vec<String> = offending.iter().map(|(j, i)| format!("{i} in w{}", j + 1)).collect();
    parts.join(", ")
}

fn all_equal(xs: &[Option<u32>]) -> bool {
    xs.windows(2).all(|w| w[0] == w[1])
}

pub fn reduce_to_good_form(germ: &GermMap, alpha: &[u32], max_blowups: u32) -> Result<Reduction> {
    let lead = extract_resonant_leading(germ, alpha)?;
    let k = lead.k;
    let equal = all_equal(&lead.l_js);
    let mut g = germ.clone();
    let mut l_js = lead.l_js;
    let mut blowups = 0;
    loop {
        let offending = offending_monomials(&g, alpha, k, &l_js);
        if offending.is_empty() {
            return Ok(Reduction { germ: g, blowups, k, l_js });
        }
        if blowups == max_blowups {
            return Err(Error::BlowupsExhausted { max: max_blowups, offending: describe(&offending) });
        }
        g = blowup(&g)?;
        blowups += 1;
        let lead = extract_resonant_leading(&g, alpha)?;
        if lead.k != k {
            return Err(Error::InvariantBroken(format!("k changed from {k} to {}", lead.k)));
        }
        if all_equal(&lead.l_js) != equal {
            return Err(Error::InvariantBroken(format!(
                "separation orders {} changed equality status",
                fmt_opt_list(&lead.l_js)
            )));
        }
        l_js = lead.l_js;
    }
}

fn principal_root(x: C64, n: u32) -> C64 {
    x.powf(1.0 / n as f64)
}

/// Scales `z ↦ c z` so the characteristic direction has eigen-coefficient
/// `−1/(ν−1)`, i.e. `z_1 = z − z^ν/(ν−1) + …`. Returns the germ and `c`.
pub fn normalize_parabolic_coefficient(germ: &GermMap, nu: u32, char_lambda: C64) -> Result<(GermMap, C64)> {
    if nu < 2 {
        return Err(Error::Precondition(format!("nu = {nu} must be at least 2")));
    }
    let e = nu - 1;
    let c = principal_root(-C64::new(1.0, 0.0) / (char_lambda * e as f64), e);
    let n = germ.n();
    let cap = germ.order_cap();
    let mut repl = vec![Series::variable(n, cap, 0).scale(c)];
    for j in 0..n {
        repl.push(Series::variable(n, cap, j + 1));
    }
    let mut comps = germ.compose_after(&repl)?;
    comps[0] = comps[0].scale(c.inv());
    Ok((germ.with_components(comps)?, c))
}

/// Scales `ŵ = σ w` with `σ^{k|α|} = kA` (principal root), which sends
/// `a_j ↦ a_j σ^{-k|α|}` and therefore `A ↦ 1/k`. Returns the germ and `σ`.
pub fn rescale_to_unit_a(germ: &GermMap, profile: &InvariantProfile) -> Result<(GermMap, C64)> {
    let k = profile.k.ok_or_else(|| Error::Precondition("no resonant leading term to rescale".into()))?;
    if !profile.nondegenerate {
        return Err(Error::Precondition("A vanishes; the germ is degenerate".into()));
    }
    let sigma = principal_root(profile.a_invariant * k as f64, k * profile.alpha_norm());
    let n = germ.n();
    let cap = germ.order_cap();
    let mut repl = vec![Series::variable(n, cap, 0)];
    for j in 0..n {
        repl.push(Series::variable(n, cap, j + 1).scale(sigma.inv()));
    }
    let mut comps = germ.compose_after(&repl)?;
    for comp in comps.iter_mut().skip(1) {
        *comp = comp.scale(sigma);
    }
    Ok((germ.with_components(comps)?, sigma))
}
