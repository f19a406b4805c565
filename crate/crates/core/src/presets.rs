//! Built-in reference germs over the golden pair `θ = ((3−√5)/2, 1−(3−√5)/2)`
//! with generator `α = (1, 1)`:
//!
//! * `E1`: `z − z²`, `λ_j w_j − (λ_j/2)(w_1 w_2) w_j`
//! * `E2`: as E1 with the resonant term multiplied by `z` (log case)
//! * `E3`: as E1 with `(w_1 w_2)²` in place of `w_1 w_2` (two petals)

use std::fmt;
use std::str::FromStr;

use crate::germ::GermMap;
use crate::germfile::GermFile;
use crate::resonance::Spectrum;
use crate::series::{MultiIndex, Series, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    E1,
    E2,
    E3,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::E1, Preset::E2, Preset::E3];
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Preset::E1 => "E1",
            Preset::E2 => "E2",
            Preset::E3 => "E3",
        };
        f.write_str(s)
    }
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "E1" => Ok(Preset::E1),
            "E2" => Ok(Preset::E2),
            "E3" => Ok(Preset::E3),
            other => Err(format!("unknown example {other:?} (expected E1, E2 or E3)")),
        }
    }
}

pub fn golden_theta() -> Vec<f64> {
    let t = (3.0 - 5f64.sqrt()) / 2.0;
    vec![t, 1.0 - t]
}

pub fn golden_spectrum() -> Spectrum {
    Spectrum::new(golden_theta()).expect("golden pair is a valid spectrum")
}

/// Builds a preset with the given truncation degree (at least 5 for E3).
pub fn build(preset: Preset, order_cap: u32) -> GermFile {
    let spectrum = golden_spectrum();
    let n = 2;
    let (block_power, z_factor) = match preset {
        Preset::E1 => (1, 0),
        Preset::E2 => (1, 1),
        Preset::E3 => (2, 0),
    };
    let z_comp = Series::from_terms(
        n,
        order_cap,
        [(MultiIndex::z_pow(n, 1), C64::new(1.0, 0.0)), (MultiIndex::z_pow(n, 2), C64::new(-1.0, 0.0))],
    );
    let mut comps = vec![z_comp];
    for j in 0..n {
        let lam = spectrum.lambda(j);
        let mut w = vec![block_power; n];
        w[j] += 1;
        comps.push(Series::from_terms(
            n,
            order_cap,
            [(MultiIndex::w_unit(n, j), lam), (MultiIndex::new(z_factor, w), -lam / 2.0)],
        ));
    }
    let germ = GermMap::new(spectrum, comps).expect("presets have a valid linear part");
    GermFile { germ, alpha: vec![1, 1] }
}
