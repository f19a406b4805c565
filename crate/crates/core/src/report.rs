//! Pipeline drivers and plain-text reports.
//!
//! Reports are `key = value` lines in a fixed order, numbers with twelve
//! significant digits, and a `# note` naming the tolerance or source where a
//! number depends on one.

use std::fmt::{Display, Write as _};
use std::io::Write;

use sha2::{Digest, Sha256};

use crate::basin::{
    calibrate_epsilons, choose_params, membership, orbit_start, petal_list, sample_basin, BasinParams, Calibration,
    Condition, Overrides, EPSILON_FLOOR,
};
use crate::error::{Error, Result};
use crate::germ::{resonant_monomial, GermMap};
use crate::germfile::{parse_germ, GermFile};
use crate::normal_form::invariants::{fmt_opt_list, PRESENCE_TOL};
use crate::normal_form::{prepare, InvariantProfile, Prepared, DEFAULT_MAX_BLOWUPS, DEFAULT_SD_TOL};
use crate::orbit::{
    fit_rates, iterate, recurrence_residuals, verify_invariance, InvarianceReport, IterateOptions, OrbitStatus,
    OrbitTrace, RateFit,
};
use crate::resonance::{certify_one_resonance, OneResonanceCertificate, DEFAULT_DEGREE_BOUND, DEFAULT_RES_TOL};
use crate::series::C64;

/// Twelve significant digits in scientific notation.
pub fn sig(x: f64) -> String {
    // normalizes -0 so reports do not depend on the sign of zero
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.11e}")
}

pub fn fmt_c(c: C64) -> String {
    let im = if c.im == 0.0 { 0.0 } else { c.im };
    format!("{}{}i", sig(c.re), if im < 0.0 || im.is_nan() { format!("{im:.11e}") } else { format!("+{im:.11e}") })
}

pub fn fmt_point(p: &[C64]) -> String {
    let parts: Vec<String> = p.iter().map(|c| fmt_c(*c)).collect();
    format!("({})", parts.join(", "))
}

pub fn fmt_conditions(cs: &[Condition]) -> String {
    let parts: Vec<String> = cs.iter().map(|c| c.to_string()).collect();
    parts.join("; ")
}

pub fn petal_label(t: u32, s: Option<u32>) -> String {
    match s {
        Some(s) => format!("{t},{s}"),
        None => format!("{t}"),
    }
}

fn fmt_opt<T: Display>(x: Option<T>) -> String {
    x.map_or_else(|| "none".to_string(), |v| v.to_string())
}

struct Lines(String);

impl Lines {
    fn kv(&mut self, key: &str, value: impl Display) {
        writeln!(self.0, "{key} = {value}").expect("writing to a String");
    }

    fn kvn(&mut self, key: &str, value: impl Display, note: &str) {
        writeln!(self.0, "{key} = {value}  # {note}").expect("writing to a String");
    }

    fn blank(&mut self) {
        self.0.push('\n');
    }
}

#[derive(Clone, Debug)]
pub struct AnalyzeOptions {
    /// Poincaré–Dulac order; `None` means the file's `order_cap`.
    pub nf_order: Option<u32>,
    pub degree_bound: u32,
    pub res_tol: f64,
    pub max_blowups: u32,
    /// Trust the file's `alpha` instead of enumerating resonances.
    pub assert_alpha: bool,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        AnalyzeOptions {
            nf_order: None,
            degree_bound: DEFAULT_DEGREE_BOUND,
            res_tol: DEFAULT_RES_TOL,
            max_blowups: DEFAULT_MAX_BLOWUPS,
            assert_alpha: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Checklist {
    pub items: Vec<(&'static str, bool)>,
}

impl Checklist {
    pub fn applies(&self) -> bool {
        self.items.iter().all(|(_, ok)| *ok)
    }

    pub fn failing(&self) -> Vec<&'static str> {
        self.items.iter().filter(|(_, ok)| !ok).map(|(k, _)| *k).collect()
    }
}

#[derive(Clone, Debug)]
pub struct Analysis {
    pub digest: String,
    pub file: GermFile,
    pub options: AnalyzeOptions,
    pub certificate: OneResonanceCertificate,
    pub prepared: Prepared,
    pub reduction_failed: bool,
    pub checklist: Checklist,
}

impl Analysis {
    pub fn applies(&self) -> bool {
        self.checklist.applies()
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Certifies, normalizes, reduces and classifies the germ in `text`.
pub fn analyze(text: &str, options: &AnalyzeOptions) -> Result<Analysis> {
    let file = parse_germ(text)?;
    analyze_file(sha256_hex(text.as_bytes()), file, options)
}

pub fn analyze_file(digest: String, file: GermFile, options: &AnalyzeOptions) -> Result<Analysis> {
    let germ = &file.germ;
    let alpha = &file.alpha;
    let certificate = if options.assert_alpha {
        OneResonanceCertificate::asserted(germ.spectrum(), alpha, options.res_tol)?
    } else {
        certify_one_resonance(germ.spectrum(), alpha, options.degree_bound, options.res_tol)?
    };
    let nf_order = options.nf_order.unwrap_or(germ.order_cap());
    let prepared = prepare(germ, alpha, nf_order, options.max_blowups)?;
    let reduction_failed = prepared.diagnostics.iter().any(|d| d.starts_with("reduction:"));
    let raw = &prepared.raw_profile;
    let red = &prepared.profile;
    let l_ok = match (red.l, red.nu) {
        (Some(l), Some(nu)) => l < nu,
        _ => false,
    };
    let checklist = Checklist {
        items: vec![
            ("one_resonant", certificate.holds()),
            ("ultra_resonant", raw.ultra_resonant),
            ("characteristic_direction", raw.char_dir_lambda.is_some()),
            ("dynamically_separating", raw.dynamically_separating),
            ("good_form", raw.k.is_some() && !reduction_failed),
            ("degenerately_separating", red.degenerately_separating),
            ("l_defined", l_ok),
            ("nondegenerate", red.nondegenerate),
            ("attracting", red.attracting),
        ],
    };
    Ok(Analysis { digest, file, options: options.clone(), certificate, prepared, reduction_failed, checklist })
}

fn write_profile(out: &mut Lines, prefix: &str, p: &InvariantProfile) {
    let key = |k: &str| format!("{prefix}.{k}");
    let pres = format!("coefficients above {PRESENCE_TOL:e} count as present");
    out.kvn(&key("nu"), fmt_opt(p.nu), &pres);
    let mu_note = if p.mu.is_none() {
        "no pure z^i in the w-components up to order_cap (truncation-limited)"
    } else {
        "least pure z^i in the w-components"
    };
    out.kvn(&key("mu"), fmt_opt(p.mu), mu_note);
    out.kv(&key("ultra_resonant"), p.ultra_resonant);
    out.kvn(
        &key("char_dir_lambda"),
        p.char_dir_lambda.map_or("none".into(), fmt_c),
        "F_nu(1,0,..,0) = lambda (1,0,..,0)",
    );
    out.kv(&key("dynamically_separating"), p.dynamically_separating);
    out.kv(&key("degenerately_separating"), p.degenerately_separating);
    out.kv(&key("r_j"), fmt_opt_list(&p.r_js));
    out.kv(&key("k"), fmt_opt(p.k));
    out.kv(&key("l_j"), fmt_opt_list(&p.l_js));
    out.kv(&key("l"), fmt_opt(p.l));
    for (j, a) in p.a.iter().enumerate() {
        out.kvn(&key(&format!("a_{}", j + 1)), fmt_c(*a), "minus the coefficient of z^l_j w^(k alpha) w_j");
    }
    for (j, b) in p.b.iter().enumerate() {
        out.kvn(&key(&format!("b_{}", j + 1)), fmt_c(*b), "minus the coefficient of z^r_j w_j");
    }
    out.kvn(&key("A"), fmt_c(p.a_invariant), "sum alpha_j a_j / lambda_j");
    out.kvn(&key("c"), fmt_c(p.c_invariant), "sum alpha_j b_j / lambda_j");
    out.kvn(&key("nondegenerate"), p.nondegenerate, "|A| > 1e-12");
    if p.nondegenerate {
        for (j, r) in p.normalized_ratios().iter().enumerate() {
            out.kvn(&key(&format!("ratio_{}", j + 1)), fmt_c(*r), "a_j / (lambda_j k A)");
        }
    }
    out.kvn(&key("attracting"), p.attracting, "Re(a_j / (lambda_j A)) > 0 for all j");
}

pub fn render_analysis(a: &Analysis) -> String {
    let mut out = Lines(String::new());
    let g = &a.file.germ;
    out.kv("report", "analysis");
    out.kv("input.sha256", &a.digest);
    out.kv("input.n", g.n());
    out.kv("input.order_cap", g.order_cap());
    for (j, t) in g.spectrum().theta().iter().enumerate() {
        out.kvn(&format!("input.theta_{}", j + 1), sig(*t), "lambda_j = exp(2 pi i theta_j)");
    }
    out.kv("input.alpha", format!("{:?}", a.file.alpha));
    out.blank();

    let c = &a.certificate;
    out.kv("certificate.verdict", c.verdict);
    if c.verdict != crate::resonance::Verdict::Asserted {
        out.kv("certificate.degree_bound", c.degree_bound);
    }
    out.kvn("certificate.res_tol", sig(c.res_tol), "resonance residual tolerance");
    out.kvn(
        "certificate.alpha_unit_residual",
        sig(c.alpha_unit_residual),
        "distance of sum alpha_j theta_j to the integers",
    );
    out.kv("certificate.relations", c.relations.len());
    for (i, r) in c.relations.iter().enumerate() {
        out.kv(&format!("certificate.relation_{}", i + 1), r);
    }
    if let Some(w) = &c.witness {
        out.kvn("certificate.witness", w, "relation not generated by alpha");
    }
    out.blank();

    let p = &a.prepared;
    let order = a.options.nf_order.unwrap_or(g.order_cap()).min(g.order_cap());
    out.kv("normal_form.order", order);
    out.kvn("normal_form.removed", p.pd_removed, &format!("divisors above {DEFAULT_SD_TOL:e}"));
    out.kvn("normal_form.kept", p.pd_kept, "resonant monomials left in place");
    out.kvn(
        "normal_form.conjugacy_residual",
        sig(p.conjugacy_residual),
        &format!("max coefficient of F.Phi - Phi.G up to degree {order}"),
    );
    out.blank();
    write_profile(&mut out, "raw", &p.raw_profile);
    out.blank();
    out.kvn(
        "reduction.z_scale",
        p.z_scale.map_or("none".into(), fmt_c),
        "z -> c z so that z_1 = z - z^nu/(nu-1) + ...",
    );
    out.kv("reduction.blowups", p.blowups);
    out.kv("reduction.max_blowups", a.options.max_blowups);
    out.kvn("reduction.sigma", p.sigma.map_or("none".into(), fmt_c), "w -> w / sigma with sigma^(k|alpha|) = k A");
    out.blank();
    write_profile(&mut out, "reduced", &p.profile);
    for (i, d) in p.diagnostics.iter().enumerate() {
        out.kv(&format!("diagnostic_{}", i + 1), d);
    }
    out.blank();
    for (k, v) in &a.checklist.items {
        out.kv(&format!("checklist.{k}"), v);
    }
    out.kv("verdict.theorem_applies", a.applies());
    if !a.applies() {
        out.kv("verdict.failing", a.checklist.failing().join(", "));
    }
    out.0
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub samples: usize,
    pub seed: u64,
    pub max_iter: u64,
    pub rate_tol: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { samples: 1000, seed: 0, max_iter: 100_000, rate_tol: 0.05 }
    }
}

#[derive(Clone, Debug)]
pub struct PetalVerification {
    pub params: BasinParams,
    pub invariance: InvarianceReport,
    pub cross_hits: usize,
    pub cross_checked: usize,
    pub start: Vec<C64>,
    pub status: OrbitStatus,
    pub steps: u64,
    pub fits: std::result::Result<Vec<RateFit>, String>,
    /// `max |d_z(m)| / |z_m|` over stored `m >= 100`.
    pub dz_ratio: Option<f64>,
    /// `max |d_v(m)|` over the last decade of steps.
    pub dv_tail: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct Verification {
    pub options: VerifyOptions,
    pub stage_error: Option<String>,
    pub calibration: Option<Calibration>,
    pub petals: Vec<PetalVerification>,
}

impl Verification {
    pub fn passed(&self, analysis: &Analysis) -> bool {
        analysis.applies()
            && self.stage_error.is_none()
            && !self.petals.is_empty()
            && self.petals.iter().all(|p| {
                p.invariance.failed == 0
                    && p.cross_hits == 0
                    && matches!(&p.fits, Ok(f) if f.iter().all(|r| r.rel_error <= self.options.rate_tol))
            })
    }
}

pub fn trace_for(germ: &GermMap, params: &BasinParams, start: &[C64], max_iter: u64) -> Result<OrbitTrace> {
    iterate(germ, start, &params.alpha, params.k, params.nu, params.l, &IterateOptions::with_max_iter(max_iter))
}

pub fn verify(analysis: &Analysis, options: &VerifyOptions) -> Verification {
    let mut v = Verification { options: options.clone(), stage_error: None, calibration: None, petals: Vec::new() };
    if !analysis.applies() {
        v.stage_error = Some(format!("hypotheses fail: {}", analysis.checklist.failing().join(", ")));
        return v;
    }
    let germ = &analysis.prepared.working;
    let profile = &analysis.prepared.profile;
    let staged = (|| -> Result<Calibration> {
        let base = choose_params(profile, &Overrides::default())?;
        let petals: Vec<BasinParams> = petal_list(profile)?.into_iter().map(|(t, s)| base.with_petal(t, s)).collect();
        calibrate_epsilons(germ, &petals, options.samples, options.seed)
    })();
    let cal = match staged {
        Ok(c) => c,
        Err(e) => {
            v.stage_error = Some(e.to_string());
            return v;
        }
    };
    for params in &cal.params {
        match verify_petal(germ, params, &cal.params, options) {
            Ok(pv) => v.petals.push(pv),
            Err(e) => {
                v.stage_error = Some(format!("petal {}: {e}", petal_label(params.t, params.s)));
                break;
            }
        }
    }
    v.calibration = Some(cal);
    v
}

fn verify_petal(
    germ: &GermMap,
    params: &BasinParams,
    all: &[BasinParams],
    options: &VerifyOptions,
) -> Result<PetalVerification> {
    let invariance = verify_invariance(germ, params, options.samples, options.seed)?;
    let samples = sample_basin(params, options.samples, options.seed, 1.0)?;
    let mut cross_hits = 0;
    let mut cross_checked = 0;
    for other in all.iter().filter(|o| (o.t, o.s) != (params.t, params.s)) {
        cross_checked += samples.len();
        cross_hits += samples.iter().filter(|p| membership(p, other)).count();
    }
    let start = orbit_start(params);
    let trace = trace_for(germ, params, &start, options.max_iter)?;
    let fits = fit_rates(&trace, params.nu, params.l).map_err(|e| e.to_string());
    let (mut dz_ratio, mut dv_tail) = (None, None);
    if trace.status == OrbitStatus::Converging {
        if let Ok(res) = recurrence_residuals(germ, &trace, params.nu, params.l) {
            let last = trace.last_m();
            dz_ratio = res
                .m
                .iter()
                .zip(res.d_z.iter().zip(&res.abs_z))
                .filter(|(m, _)| **m >= 100)
                .map(|(_, (d, z))| d.norm() / z)
                .reduce(f64::max);
            dv_tail = res
                .m
                .iter()
                .zip(&res.d_v)
                .filter(|(m, _)| **m * 10 >= last * 9)
                .map(|(_, d)| d.norm())
                .reduce(f64::max);
        }
    }
    Ok(PetalVerification {
        params: params.clone(),
        invariance,
        cross_hits,
        cross_checked,
        start,
        status: trace.status,
        steps: trace.last_m(),
        fits,
        dz_ratio,
        dv_tail,
    })
}

pub fn render_verification(a: &Analysis, v: &Verification) -> String {
    let mut out = Lines(render_analysis(a));
    out.blank();
    out.kv("report", "verification");
    out.kv("verify.samples", v.options.samples);
    out.kv("verify.seed", v.options.seed);
    out.kv("verify.max_iter", v.options.max_iter);
    out.kvn("verify.rate_tol", sig(v.options.rate_tol), "tolerance on the relative error of fitted exponents");
    if let Some(cal) = &v.calibration {
        let p0 = &cal.params[0];
        out.kv("calibration.halvings", cal.halvings);
        out.kvn("calibration.epsilon", sig(p0.epsilon), &format!("halved from 0.1, floor {EPSILON_FLOOR:e}"));
        out.kvn(
            "calibration.epsilon_prime",
            sig(p0.epsilon_prime),
            &format!("halved from 0.1, floor {EPSILON_FLOOR:e}"),
        );
        out.kvn("calibration.C", sig(cal.c_const), "max |1/z_1^(nu-1) - 1/z^(nu-1) - 1| over the samples");
    }
    for pv in &v.petals {
        let p = &pv.params;
        let key = |k: &str| format!("petal[{}].{k}", petal_label(p.t, p.s));
        out.blank();
        out.kv(&key("case"), p.case);
        if p.extrapolated() {
            out.kv(&key("note"), "l = 0 petal split in z by analogy with l = nu - 1 (extrapolated)");
        }
        out.kv(&key("gamma"), sig(p.gamma));
        out.kv(&key("beta"), sig(p.beta));
        out.kv(&key("delta"), sig(p.delta));
        out.kv(&key("delta_prime"), sig(p.delta_prime));
        out.kv(&key("epsilon"), sig(p.epsilon));
        out.kv(&key("epsilon_prime"), sig(p.epsilon_prime));
        out.kv(&key("R"), sig(p.big_r()));
        out.kv(&key("R_prime"), sig(p.big_r_prime()));
        let inv = &pv.invariance;
        out.kvn(
            &key("invariance"),
            format!("{}/{}", inv.passed, inv.samples),
            "images of sampled members that are members",
        );
        out.kv(&key("pass_rate"), sig(inv.pass_rate()));
        for (i, w) in inv.witnesses.iter().enumerate() {
            out.kv(
                &key(&format!("failure_{}", i + 1)),
                format!("{} -> {} violates {}", fmt_point(&w.point), fmt_point(&w.image), fmt_conditions(&w.violated)),
            );
        }
        out.kvn(
            &key("cross_membership"),
            format!("{}/{}", pv.cross_hits, pv.cross_checked),
            "samples lying in another petal",
        );
        out.kv(&key("orbit.start"), fmt_point(&pv.start));
        out.kv(&key("orbit.status"), pv.status);
        out.kv(&key("orbit.steps"), pv.steps);
        match &pv.fits {
            Ok(fits) => {
                for f in fits {
                    let name = format!("rate.{}", f.quantity);
                    out.kvn(
                        &key(&name),
                        format!(
                            "fitted={} expected={} abs_error={} rel_error={} window=({}, {}] points={} model={}",
                            sig(f.fitted_exponent),
                            sig(f.expected_exponent),
                            sig(f.abs_error),
                            sig(f.rel_error),
                            f.window.0,
                            f.window.1,
                            f.points,
                            f.model
                        ),
                        if f.rel_error <= v.options.rate_tol { "within rate_tol" } else { "outside rate_tol" },
                    );
                }
            }
            Err(e) => out.kv(&key("rate"), format!("not fitted: {e}")),
        }
        if let Some(r) = pv.dz_ratio {
            out.kvn(&key("residual.dz_over_z"), sig(r), "max |d_z(m)|/|z_m| for m >= 100");
        }
        if let Some(r) = pv.dv_tail {
            out.kvn(&key("residual.dv_tail"), sig(r), "max |d_v(m)| over the last decade");
        }
    }
    out.blank();
    if let Some(e) = &v.stage_error {
        out.kv("verify.error", e);
    }
    out.kv("verdict.verified", v.passed(a));
    out.0
}

/// `m,re_z,im_z,abs_z,abs_u,abs_v,arg_u_rel,abs_w_1..abs_w_n,theta` plus a status footer.
pub fn write_orbit_csv<W: Write>(trace: &OrbitTrace, mut w: W) -> Result<()> {
    let n = trace.alpha.len();
    let mut header = String::from("m,re_z,im_z,abs_z,abs_u,abs_v,arg_u_rel");
    for j in 1..=n {
        write!(header, ",abs_w_{j}").expect("writing to a String");
    }
    header.push_str(",theta\n");
    w.write_all(header.as_bytes())?;
    for (i, q) in trace.points.iter().enumerate() {
        let o = trace.observables(i);
        let u = resonant_monomial(&q.p, &trace.alpha);
        // argument of u relative to the nearest k-th root of unity
        let arg_rel = if u.norm() > 0.0 { u.powi(trace.k as i32).arg() / trace.k as f64 } else { 0.0 };
        let theta =
            if o.abs_u > 0.0 && o.abs_u != 1.0 && o.abs_z > 0.0 { o.abs_z.ln() / o.abs_u.ln() } else { f64::NAN };
        let mut row = format!(
            "{},{},{},{},{},{},{}",
            q.m,
            sig(q.p[0].re),
            sig(q.p[0].im),
            sig(o.abs_z),
            sig(o.abs_u),
            sig(o.abs_v),
            sig(arg_rel)
        );
        for wj in &q.p[1..] {
            write!(row, ",{}", sig(wj.norm())).expect("writing to a String");
        }
        writeln!(row, ",{}", sig(theta)).expect("writing to a String");
        w.write_all(row.as_bytes())?;
    }
    writeln!(w, "# status={} steps={} non_finite={}", trace.status, trace.last_m(), trace.non_finite)?;
    Ok(())
}

/// A real coordinate of `C^{n+1}`: real or imaginary part of coordinate `v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Axis {
    pub v: usize,
    pub imaginary: bool,
}

impl Axis {
    /// `re_z`, `im_w2`, ...
    pub fn parse(s: &str, n: usize) -> Result<Axis> {
        let (imaginary, name) = match s.split_once('_') {
            Some(("re", rest)) => (false, rest),
            Some(("im", rest)) => (true, rest),
            _ => return Err(Error::Format(format!("axis {s:?} must look like re_z, im_z, re_w1, ..."))),
        };
        let v = if name == "z" {
            0
        } else {
            match name.strip_prefix('w').and_then(|j| j.parse::<usize>().ok()) {
                Some(j) if j >= 1 && j <= n => j,
                _ => return Err(Error::Format(format!("axis {s:?} names no coordinate of C^{}", n + 1))),
            }
        };
        Ok(Axis { v, imaginary })
    }

    fn set(&self, p: &mut [C64], x: f64) {
        if self.imaginary {
            p[self.v].im = x;
        } else {
            p[self.v].re = x;
        }
    }
}

#[derive(Clone, Debug)]
pub struct SliceSpec {
    pub base: Vec<C64>,
    pub x_axis: Axis,
    pub y_axis: Axis,
    pub grid: (usize, usize),
    /// `(x_min, x_max, y_min, y_max)`
    pub window: (f64, f64, f64, f64),
}

/// One row per grid cell: `x,y,re_z,im_z,abs_u,petal_t,petal_s,member`.
pub fn write_slice_csv<W: Write>(spec: &SliceSpec, petals: &[BasinParams], mut w: W) -> Result<()> {
    let (nx, ny) = spec.grid;
    let (x0, x1, y0, y1) = spec.window;
    if nx < 1 || ny < 1 || !(x1 > x0) || !(y1 > y0) || spec.x_axis == spec.y_axis {
        return Err(Error::Precondition("degenerate slice window or grid".into()));
    }
    let step = |a: f64, b: f64, i: usize, m: usize| {
        if m == 1 {
            0.5 * (a + b)
        } else {
            a + (b - a) * i as f64 / (m - 1) as f64
        }
    };
    let alpha = &petals[0].alpha;
    w.write_all(b"x,y,re_z,im_z,abs_u,petal_t,petal_s,member\n")?;
    for iy in 0..ny {
        let y = step(y0, y1, iy, ny);
        for ix in 0..nx {
            let x = step(x0, x1, ix, nx);
            let mut p = spec.base.clone();
            spec.x_axis.set(&mut p, x);
            spec.y_axis.set(&mut p, y);
            let hit = petals.iter().find(|q| membership(&p, q));
            let (t, s) = hit.map_or((0, 0), |q| (q.t, q.s.unwrap_or(0)));
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                sig(x),
                sig(y),
                sig(p[0].re),
                sig(p[0].im),
                sig(resonant_monomial(&p, alpha).norm()),
                t,
                s,
                u8::from(hit.is_some())
            )?;
        }
    }
    Ok(())
}

/// Basin parameters for every petal of an analysis whose hypotheses hold.
pub fn petal_params(analysis: &Analysis, overrides: &Overrides) -> Result<Vec<BasinParams>> {
    let profile = &analysis.prepared.profile;
    let base = choose_params(profile, overrides)?;
    Ok(petal_list(profile)?.into_iter().map(|(t, s)| base.with_petal(t, s)).collect())
}
