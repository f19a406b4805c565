//! Normal-form reduction: Poincaré–Dulac normalization, classification data,
//! blow-ups and the scalings used by the basin construction.

pub mod blowup;
pub mod invariants;
pub mod poincare_dulac;
pub mod reduce;

pub use blowup::blowup;
pub use invariants::{
    check_characteristic_direction, check_dynamical_separation, compute_a_c_attracting, compute_orders,
    extract_resonant_leading, Attraction, InvariantProfile, Orders, ResonantLeading, Separation,
};
pub use poincare_dulac::{conjugacy_residual, normalize, poincare_dulac_step, Normalization, PdStep, DEFAULT_SD_TOL};
pub use reduce::{
    normalize_parabolic_coefficient, offending_monomials, reduce_to_good_form, rescale_to_unit_a, Reduction,
    DEFAULT_MAX_BLOWUPS,
};

use crate::error::Result;
use crate::germ::GermMap;
use crate::series::C64;

/// The germ at each stage of the reduction, with the data read off it.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub normalized: GermMap,
    pub pd_removed: usize,
    pub pd_kept: usize,
    pub conjugacy_residual: f64,
    /// Profile of the normalized germ before any scaling or blow-up.
    pub raw_profile: InvariantProfile,
    pub z_scale: Option<C64>,
    pub blowups: u32,
    pub sigma: Option<C64>,
    /// Germ the basin and orbit code work with.
    pub working: GermMap,
    pub profile: InvariantProfile,
    pub diagnostics: Vec<String>,
}

impl Prepared {
    pub fn is_reduced(&self) -> bool {
        self.sigma.is_some()
    }
}

/// Normalizes up to `nf_order`, then (when the data allow) fixes the
/// parabolic coefficient, blows up to good form and rescales `A` to `1/k`.
pub fn prepare(germ: &GermMap, alpha: &[u32], nf_order: u32, max_blowups: u32) -> Result<Prepared> {
    let order = nf_order.min(germ.order_cap());
    let norm = normalize(germ, order, DEFAULT_SD_TOL)?;
    let residual = conjugacy_residual(germ, &norm.germ, &norm.change, order)?;
    let raw_profile = InvariantProfile::extract(&norm.germ, alpha);
    let mut diagnostics = raw_profile.diagnostics.clone();
    let mut working = norm.germ.clone();
    let mut z_scale = None;
    let mut blowups = 0;
    let mut sigma = None;

    if let (Some(nu), Some(lam)) = (raw_profile.nu, raw_profile.char_dir_lambda) {
        let (g, c) = normalize_parabolic_coefficient(&working, nu, lam)?;
        working = g;
        z_scale = Some(c);
    }
    if raw_profile.k.is_some() {
        match reduce_to_good_form(&working, alpha, max_blowups) {
            Ok(red) => {
                blowups = red.blowups;
                working = red.germ;
            }
            Err(e) => diagnostics.push(format!("reduction: {e}")),
        }
    }
    let mut profile = InvariantProfile::extract(&working, alpha);
    if profile.nondegenerate && profile.k.is_some() {
        let (g, s) = rescale_to_unit_a(&working, &profile)?;
        working = g;
        sigma = Some(s);
        profile = InvariantProfile::extract(&working, alpha);
    }
    Ok(Prepared {
        normalized: norm.germ,
        pd_removed: norm.removed,
        pd_kept: norm.kept_small_divisors,
        conjugacy_residual: residual,
        raw_profile,
        z_scale,
        blowups,
        sigma,
        working,
        profile,
        diagnostics,
    })
}
