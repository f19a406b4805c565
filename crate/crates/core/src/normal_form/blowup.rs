//! The blow-up chart `w = z ŵ` centred on the characteristic direction.
//!
//! With `F = (Z, W)` the blown-up germ is
//! `z_1 = Z(z, zŵ)` and `ŵ_{j,1} = W_j(z, zŵ) / Z(z, zŵ)`, computed as
//! `(W_j(z, zŵ) / z) · Q^{-1}` with `Q = Z(z, zŵ) / z`.
//!
//! A monomial `z^m w^β` becomes `z^{m+|β|} ŵ^β`, so every term of degree `d`
//! in `w` gains `d` in `z`. Since the truncation is by total degree, terms
//! that carry no `w` lose one degree of validity in the `ŵ`-components;
//! callers blow up with a cap a few degrees above what they inspect.

use crate::error::{Error, Result};
use crate::germ::GermMap;
use crate::series::{MultiIndex, Series};

fn divide_by_z(s: &Series, what: &str) -> Result<Series> {
    let mut terms = Vec::with_capacity(s.len());
    for (idx, c) in s.terms() {
        if idx.z == 0 {
            return Err(Error::InvalidGerm(format!("{what} has the term {idx} without a factor z")));
        }
        terms.push((MultiIndex::new(idx.z - 1, idx.w.clone()), *c));
    }
    Ok(Series::from_terms(s.n(), s.order_cap(), terms))
}

pub fn blowup(germ: &GermMap) -> Result<GermMap> {
    let n = germ.n();
    let cap = germ.order_cap();
    // Substitute one degree higher: dividing by z brings degree cap + 1 back to cap.
    let wide = cap + 1;
    let z = Series::variable(n, wide, 0);
    let mut repl = vec![z.clone()];
    for j in 0..n {
        repl.push(Series::variable(n, wide, j + 1).mul(&z)?);
    }
    let z_new = germ.z_component().with_order_cap(wide).substitute(&repl)?;
    let q = divide_by_z(&z_new, "Z(z, z w)")?.with_order_cap(cap);
    let q_inv = q.inverse().map_err(|_| Error::InvalidGerm("Z(z, z w) / z vanishes at the origin".into()))?;
    let mut comps = vec![z_new.with_order_cap(cap)];
    for j in 0..n {
        let w_new = germ.w_component(j).with_order_cap(wide).substitute(&repl)?;
        comps.push(divide_by_z(&w_new, "W_j(z, z w)")?.with_order_cap(cap).mul(&q_inv)?);
    }
    germ.with_components(comps)
}
