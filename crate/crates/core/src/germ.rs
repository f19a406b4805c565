//! Polynomial representatives of germs `F(z, w) = (z + f, Λw + g)` fixing the origin.

use crate::error::{Error, Result};
use crate::resonance::Spectrum;
use crate::series::{MultiIndex, Series, C64};

/// Tolerance for validating the linear part against the spectrum.
pub const LIN_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct GermMap {
    spectrum: Spectrum,
    /// `[z_1, w_{1,1}, ..., w_{n,1}]`
    components: Vec<Series>,
}

impl GermMap {
    pub fn new(spectrum: Spectrum, components: Vec<Series>) -> Result<Self> {
        let n = spectrum.n();
        if components.len() != n + 1 {
            return Err(Error::InvalidGerm(format!("expected {} components, got {}", n + 1, components.len())));
        }
        let cap = components[0].order_cap();
        if cap < 1 {
            return Err(Error::InvalidGerm("order_cap must be positive".into()));
        }
        for (s, comp) in components.iter().enumerate() {
            if comp.n() != n || comp.order_cap() != cap {
                return Err(Error::InvalidGerm(format!("component {} has a different shape", name(s))));
            }
            let c0 = comp.coeff(&MultiIndex::constant(n));
            if c0 != C64::default() {
                return Err(Error::InvalidGerm(format!(
                    "component {} has constant term {c0}; the germ must fix the origin",
                    name(s)
                )));
            }
            for v in 0..=n {
                let idx = if v == 0 { MultiIndex::z_pow(n, 1) } else { MultiIndex::w_unit(n, v - 1) };
                let expected = if v != s {
                    C64::default()
                } else if s == 0 {
                    C64::new(1.0, 0.0)
                } else {
                    spectrum.lambda(s - 1)
                };
                let got = comp.coeff(&idx);
                if (got - expected).norm() > LIN_TOL {
                    return Err(Error::InvalidGerm(format!(
                        "linear coefficient of {idx} in component {} is {got}, expected {expected}",
                        name(s)
                    )));
                }
            }
        }
        Ok(Self { spectrum, components })
    }

    pub fn n(&self) -> usize {
        self.spectrum.n()
    }

    pub fn order_cap(&self) -> u32 {
        self.components[0].order_cap()
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn components(&self) -> &[Series] {
        &self.components
    }

    pub fn z_component(&self) -> &Series {
        &self.components[0]
    }

    /// Component `w_{j,1}` for zero-based `j`.
    pub fn w_component(&self, j: usize) -> &Series {
        &self.components[j + 1]
    }

    /// Replaces the components, re-validating the linear part.
    pub fn with_components(&self, components: Vec<Series>) -> Result<Self> {
        Self::new(self.spectrum.clone(), components)
    }

    /// Evaluates all `n + 1` components at `p`. Overflow shows up as
    /// non-finite entries; see [`is_finite_point`].
    pub fn evaluate(&self, p: &[C64]) -> Vec<C64> {
        self.components.iter().map(|c| c.eval(p)).collect()
    }

    pub fn homogeneous_part(&self, d: u32) -> Result<Vec<Series>> {
        if d < 1 || d > self.order_cap() {
            return Err(Error::DegreeOutOfRange { degree: d, order_cap: self.order_cap() });
        }
        Ok(self.components.iter().map(|c| c.homogeneous(d)).collect())
    }

    /// `F ∘ Φ` for a coordinate change `Φ` given by its `n + 1` components.
    pub fn compose_after(&self, inner: &[Series]) -> Result<Vec<Series>> {
        self.components.iter().map(|c| c.substitute(inner)).collect()
    }

    /// Identity coordinate map with this germ's shape.
    pub fn identity(&self) -> Vec<Series> {
        identity_map(self.n(), self.order_cap())
    }
}

pub fn identity_map(n: usize, order_cap: u32) -> Vec<Series> {
    (0..=n).map(|v| Series::variable(n, order_cap, v)).collect()
}

/// Composition of two maps given componentwise: `outer ∘ inner`.
pub fn compose_maps(outer: &[Series], inner: &[Series]) -> Result<Vec<Series>> {
    outer.iter().map(|c| c.substitute(inner)).collect()
}

pub fn is_finite_point(p: &[C64]) -> bool {
    p.iter().all(|c| c.re.is_finite() && c.im.is_finite())
}

/// Euclidean norm of a point of `C^{n+1}`.
pub fn point_norm(p: &[C64]) -> f64 {
    p.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// `u = w^α` at a point `(z, w)`.
pub fn resonant_monomial(p: &[C64], alpha: &[u32]) -> C64 {
    let mut u = C64::new(1.0, 0.0);
    for (w, &a) in p[1..].iter().zip(alpha) {
        if a > 0 {
            u *= w.powu(a);
        }
    }
    u
}

/// Component name as used in germ files: `z1`, `w1`, ..., `wn`.
pub fn name(s: usize) -> String {
    if s == 0 {
        "z1".to_string()
    } else {
        format!("w{s}")
    }
}
