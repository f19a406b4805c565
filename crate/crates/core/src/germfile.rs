//! JSON germ files.
//!
//! ```json
//! {
//!   "n": 2,
//!   "order_cap": 6,
//!   "lambda_angles": ["0.3819660112501051", "0.6180339887498949"],
//!   "alpha": [1, 1],
//!   "components": {
//!     "z1": [{"re": 1.0, "im": 0.0, "z_exp": 1, "w_exp": [0, 0]}, ...],
//!     "w1": [...],
//!     "w2": [...]
//!   }
//! }
//! ```
//!
//! Angles are decimal strings in turns. The linear part must be listed
//! explicitly and agree with the angles.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::germ::{name, GermMap};
use crate::resonance::Spectrum;
use crate::series::{MultiIndex, Series, C64};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GermDocument {
    n: usize,
    order_cap: u32,
    lambda_angles: Vec<String>,
    alpha: Vec<u32>,
    components: BTreeMap<String, Vec<TermRecord>>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct TermRecord {
    re: f64,
    im: f64,
    z_exp: u32,
    w_exp: Vec<u32>,
}

/// A parsed germ file: the map plus its declared resonance generator.
#[derive(Clone, Debug, PartialEq)]
pub struct GermFile {
    pub germ: GermMap,
    pub alpha: Vec<u32>,
}

pub fn parse_germ(text: &str) -> Result<GermFile> {
    let doc: GermDocument = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    let n = doc.n;
    if n == 0 {
        return Err(Error::Format("field `n`: must be positive".into()));
    }
    if doc.order_cap == 0 {
        return Err(Error::Format("field `order_cap`: must be positive".into()));
    }
    if doc.lambda_angles.len() != n {
        return Err(Error::Format(format!(
            "field `lambda_angles`: expected {n} entries, got {}",
            doc.lambda_angles.len()
        )));
    }
    if doc.alpha.len() != n {
        return Err(Error::Format(format!("field `alpha`: expected {n} entries, got {}", doc.alpha.len())));
    }
    let theta = doc
        .lambda_angles
        .iter()
        .enumerate()
        .map(|(j, s)| {
            s.trim().parse::<f64>().map_err(|e| Error::Format(format!("field `lambda_angles[{j}]`: {s:?}: {e}")))
        })
        .collect::<Result<Vec<f64>>>()?;
    let spectrum = Spectrum::new(theta)?;

    let expected: BTreeSet<String> = (0..=n).map(name).collect();
    let found: BTreeSet<String> = doc.components.keys().cloned().collect();
    if let Some(missing) = expected.difference(&found).next() {
        return Err(Error::Format(format!("field `components.{missing}`: missing")));
    }
    if let Some(extra) = found.difference(&expected).next() {
        return Err(Error::Format(format!("field `components.{extra}`: unknown component")));
    }

    let mut comps = Vec::with_capacity(n + 1);
    for s in 0..=n {
        let key = name(s);
        let mut series = Series::zero(n, doc.order_cap);
        let mut seen = BTreeSet::new();
        for (i, t) in doc.components[&key].iter().enumerate() {
            let at = format!("field `components.{key}[{i}]`");
            if t.w_exp.len() != n {
                return Err(Error::Format(format!("{at}: w_exp needs {n} entries")));
            }
            if !t.re.is_finite() || !t.im.is_finite() {
                return Err(Error::Format(format!("{at}: non-finite coefficient")));
            }
            let idx = MultiIndex::new(t.z_exp, t.w_exp.clone());
            if idx.degree() > doc.order_cap {
                return Err(Error::Format(format!("{at}: degree {} exceeds order_cap", idx.degree())));
            }
            if !seen.insert(idx.clone()) {
                return Err(Error::Format(format!("{at}: duplicate monomial {idx}")));
            }
            series.set_coeff(idx, C64::new(t.re, t.im));
        }
        comps.push(series);
    }
    let germ = GermMap::new(spectrum, comps)?;
    Ok(GermFile { germ, alpha: doc.alpha })
}

pub fn read_germ_file(path: &Path) -> Result<GermFile> {
    let text = std::fs::read_to_string(path)?;
    parse_germ(&text)
}

/// Serializes a germ in the file format, terms in canonical order.
pub fn to_json(germ: &GermMap, alpha: &[u32]) -> String {
    let mut components = Map::new();
    for (s, comp) in germ.components().iter().enumerate() {
        let terms: Vec<Value> =
            comp.terms().map(|(idx, c)| json!({"re": c.re, "im": c.im, "z_exp": idx.z, "w_exp": idx.w})).collect();
        components.insert(name(s), Value::Array(terms));
    }
    let angles: Vec<String> = germ.spectrum().theta().iter().map(|t| format!("{t}")).collect();
    let doc = json!({
        "n": germ.n(),
        "order_cap": germ.order_cap(),
        "lambda_angles": angles,
        "alpha": alpha,
        "components": Value::Object(components),
    });
    let mut out = serde_json::to_string_pretty(&doc).expect("germ documents always serialize");
    out.push('\n');
    out
}
