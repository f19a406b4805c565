//! Orbits of the reduced germ: one-step invariance checks, long runs, the
//! telescoping recurrences for `1/z^{ν−1}` and `1/v`, and decay-rate fits.

use std::fmt;

use crate::basin::{membership, sample_basin, violations, BasinParams, Condition};
use crate::error::{Error, Result};
use crate::germ::{is_finite_point, point_norm, resonant_monomial, GermMap};
use crate::series::C64;

pub const DEFAULT_ESCAPE_RADIUS: f64 = 10.0;
/// Steps stored densely at the start of every trace.
pub const DENSE_PREFIX: u64 = 100;
/// Shortest trace [`fit_rates`] accepts.
pub const MIN_FIT_STEPS: u64 = 10_000;

#[derive(Clone, Debug, PartialEq)]
pub struct FailWitness {
    pub point: Vec<C64>,
    pub image: Vec<C64>,
    pub violated: Vec<Condition>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InvarianceReport {
    pub t: u32,
    pub s: Option<u32>,
    pub samples: usize,
    pub passed: usize,
    pub failed: usize,
    /// At most ten.
    pub witnesses: Vec<FailWitness>,
    /// `max |1/z_1^{ν−1} − 1/z^{ν−1} − 1|` over the samples.
    pub c_const: f64,
}

impl InvarianceReport {
    pub fn pass_rate(&self) -> f64 {
        self.passed as f64 / self.samples as f64
    }
}

/// Samples `m` points of the petal in `params`, applies `F` once and checks
/// that every image is still a member.
pub fn verify_invariance(germ: &GermMap, params: &BasinParams, m: usize, seed: u64) -> Result<InvarianceReport> {
    let points = sample_basin(params, m, seed, 1.0)?;
    let e = (params.nu - 1) as i32;
    let mut report = InvarianceReport {
        t: params.t,
        s: params.s,
        samples: m,
        passed: 0,
        failed: 0,
        witnesses: Vec::new(),
        c_const: 0.0,
    };
    for p in points {
        let image = germ.evaluate(&p);
        let dz = (image[0].powi(-e) - p[0].powi(-e) - 1.0).norm();
        if dz.is_finite() {
            report.c_const = report.c_const.max(dz);
        }
        if membership(&image, params) {
            report.passed += 1;
        } else {
            report.failed += 1;
            if report.witnesses.len() < 10 {
                let violated = violations(&image, params);
                report.witnesses.push(FailWitness { point: p, image, violated });
            }
        }
    }
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrbitStatus {
    Converging,
    Escaped,
    MaxIter,
}

impl fmt::Display for OrbitStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OrbitStatus::Converging => "converging",
            OrbitStatus::Escaped => "escaped",
            OrbitStatus::MaxIter => "max_iter",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrbitPoint {
    pub m: u64,
    pub p: Vec<C64>,
    /// `S_m = Σ_{j<m} |z_j|^l`
    pub sum_zl: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Observables {
    pub abs_z: f64,
    pub abs_u: f64,
    pub abs_v: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrbitTrace {
    pub alpha: Vec<u32>,
    pub k: u32,
    pub points: Vec<OrbitPoint>,
    pub status: OrbitStatus,
    /// The orbit produced a non-finite coordinate (counted as escaped).
    pub non_finite: bool,
}

impl OrbitTrace {
    pub fn observables(&self, i: usize) -> Observables {
        let p = &self.points[i].p;
        let u = resonant_monomial(p, &self.alpha);
        Observables { abs_z: p[0].norm(), abs_u: u.norm(), abs_v: u.norm().powi(self.k as i32) }
    }

    pub fn last_m(&self) -> u64 {
        self.points.last().map_or(0, |p| p.m)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterateOptions {
    pub max_iter: u64,
    pub escape_radius: f64,
    pub thin_stride: u64,
}

impl IterateOptions {
    /// Stride chosen so that about `10^4` points are kept.
    pub fn with_max_iter(max_iter: u64) -> Self {
        IterateOptions { max_iter, escape_radius: DEFAULT_ESCAPE_RADIUS, thin_stride: (max_iter / 10_000).max(1) }
    }
}

fn inv_z_power(z: C64, nu: u32) -> f64 {
    1.0 / z.norm().powi((nu - 1) as i32)
}

/// Iterates `germ` from `p0`. The orbit is stored densely for the first
/// [`DENSE_PREFIX`] steps, then at multiples of `thin_stride`, plus the last point.
pub fn iterate(
    germ: &GermMap,
    p0: &[C64],
    alpha: &[u32],
    k: u32,
    nu: u32,
    l: u32,
    opts: &IterateOptions,
) -> Result<OrbitTrace> {
    if opts.max_iter < 1 {
        return Err(Error::Precondition("max_iter must be at least 1".into()));
    }
    if p0.len() != germ.n() + 1 {
        return Err(Error::Precondition(format!(
            "start point has {} coordinates, expected {}",
            p0.len(),
            germ.n() + 1
        )));
    }
    let stride = opts.thin_stride.max(1);
    let mut trace =
        OrbitTrace { alpha: alpha.to_vec(), k, points: Vec::new(), status: OrbitStatus::MaxIter, non_finite: false };
    let mut p = p0.to_vec();
    let mut sum = 0.0;
    trace.points.push(OrbitPoint { m: 0, p: p.clone(), sum_zl: 0.0 });
    if p.iter().all(|c| *c == C64::default()) {
        trace.status = OrbitStatus::Converging;
        return Ok(trace);
    }
    for m in 1..=opts.max_iter {
        sum += p[0].norm().powi(l as i32);
        p = germ.evaluate(&p);
        if !is_finite_point(&p) {
            trace.non_finite = true;
            trace.status = OrbitStatus::Escaped;
            return Ok(trace);
        }
        let keep = m <= DENSE_PREFIX || m % stride == 0 || m == opts.max_iter;
        let escaped = point_norm(&p) > opts.escape_radius;
        if keep || escaped {
            trace.points.push(OrbitPoint { m, p: p.clone(), sum_zl: sum });
        }
        if escaped {
            trace.status = OrbitStatus::Escaped;
            return Ok(trace);
        }
    }
    // 1/|z|^{ν−1} grows by about one per step; ask for half of that over the second half
    let last = trace.points.last().expect("trace is nonempty");
    let half = trace.points.iter().find(|q| q.m * 2 >= last.m).expect("the last point qualifies");
    let window = (last.m - half.m) as f64;
    let gain = inv_z_power(last.p[0], nu) - inv_z_power(half.p[0], nu);
    if window > 0.0 && gain >= 0.5 * window && point_norm(&last.p) < 0.5 {
        trace.status = OrbitStatus::Converging;
    }
    Ok(trace)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Residuals {
    pub m: Vec<u64>,
    /// `1/z_{m+1}^{ν−1} − 1/z_m^{ν−1} − 1`
    pub d_z: Vec<C64>,
    /// `1/v_{m+1} − 1/v_m − z_m^l`
    pub d_v: Vec<C64>,
    pub abs_z: Vec<f64>,
}

/// Recomputes the step after every stored point and evaluates both telescoping
/// residuals there.
pub fn recurrence_residuals(germ: &GermMap, trace: &OrbitTrace, nu: u32, l: u32) -> Result<Residuals> {
    let e = (nu - 1) as i32;
    let k = trace.k as i32;
    let mut out = Residuals { m: Vec::new(), d_z: Vec::new(), d_v: Vec::new(), abs_z: Vec::new() };
    for pt in &trace.points {
        let z = pt.p[0];
        let v = resonant_monomial(&pt.p, &trace.alpha).powi(k);
        if z.norm() == 0.0 {
            return Err(Error::Orbit(format!("z vanishes at m = {}", pt.m)));
        }
        if v.norm() == 0.0 {
            return Err(Error::Orbit(format!("v vanishes at m = {}", pt.m)));
        }
        let next = germ.evaluate(&pt.p);
        let v1 = resonant_monomial(&next, &trace.alpha).powi(k);
        out.m.push(pt.m);
        out.d_z.push(next[0].powi(-e) - z.powi(-e) - 1.0);
        out.d_v.push(v1.inv() - v.inv() - z.powi(l as i32));
        out.abs_z.push(z.norm());
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quantity {
    Z,
    U,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RateModel {
    /// Slope of `log |q|` against `log m`.
    Power,
    /// Slope of `1/|v_m|` against `Σ_{j<m} |z_j|^l`.
    Log,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RateFit {
    pub quantity: Quantity,
    pub model: RateModel,
    pub fitted_exponent: f64,
    pub expected_exponent: f64,
    pub abs_error: f64,
    pub rel_error: f64,
    pub window: (u64, u64),
    pub points: usize,
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Quantity::Z => "z",
            Quantity::U => "u",
        })
    }
}

impl fmt::Display for RateModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RateModel::Power => "power",
            RateModel::Log => "log",
        })
    }
}

/// Ordinary least-squares slope.
pub fn ols_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn make_fit(
    quantity: Quantity,
    model: RateModel,
    fitted: f64,
    expected: f64,
    window: (u64, u64),
    points: usize,
) -> RateFit {
    let abs_error = (fitted - expected).abs();
    RateFit {
        quantity,
        model,
        fitted_exponent: fitted,
        expected_exponent: expected,
        abs_error,
        rel_error: abs_error / expected.abs(),
        window,
        points,
    }
}

/// Fits the decay of `z` and `u` over the window `(m_hi/10, m_hi]`.
pub fn fit_rates(trace: &OrbitTrace, nu: u32, l: u32) -> Result<Vec<RateFit>> {
    let m_hi = trace.last_m();
    if m_hi < MIN_FIT_STEPS {
        return Err(Error::Orbit(format!("trace too short: {m_hi} steps, rate fits need at least {MIN_FIT_STEPS}")));
    }
    if trace.status != OrbitStatus::Converging {
        return Err(Error::Orbit(format!("trace is not converging (status {})", trace.status)));
    }
    let m_lo = m_hi / 10;
    let idx: Vec<usize> = (0..trace.points.len()).filter(|&i| trace.points[i].m > m_lo).collect();
    let window = (m_lo, m_hi);
    let logm: Vec<f64> = idx.iter().map(|&i| (trace.points[i].m as f64).ln()).collect();
    let obs: Vec<Observables> = idx.iter().map(|&i| trace.observables(i)).collect();
    let log_z: Vec<f64> = obs.iter().map(|o| o.abs_z.ln()).collect();
    let nu1 = (nu - 1) as f64;
    let mut fits =
        vec![make_fit(Quantity::Z, RateModel::Power, ols_slope(&logm, &log_z), -1.0 / nu1, window, idx.len())];
    if l + 1 < nu {
        let log_u: Vec<f64> = obs.iter().map(|o| o.abs_u.ln()).collect();
        let expected = -(1.0 - l as f64 / nu1) / trace.k as f64;
        fits.push(make_fit(Quantity::U, RateModel::Power, ols_slope(&logm, &log_u), expected, window, idx.len()));
    } else {
        let sums: Vec<f64> = idx.iter().map(|&i| trace.points[i].sum_zl).collect();
        let inv_v: Vec<f64> = obs.iter().map(|o| 1.0 / o.abs_v).collect();
        fits.push(make_fit(Quantity::U, RateModel::Log, ols_slope(&sums, &inv_v), 1.0, window, idx.len()));
    }
    Ok(fits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basin::{choose_params, orbit_start, petal_list, Overrides};
    use crate::normal_form::{prepare, DEFAULT_MAX_BLOWUPS};
    use crate::presets::{self, Preset};
    use crate::series::{MultiIndex, Series};

    fn working(p: Preset) -> (GermMap, crate::normal_form::InvariantProfile) {
        let prep = prepare(&presets::build(p, 8).germ, &[1, 1], 8, DEFAULT_MAX_BLOWUPS).unwrap();
        (prep.working, prep.profile)
    }

    fn run(g: &GermMap, p0: &[C64], max_iter: u64, l: u32) -> OrbitTrace {
        iterate(g, p0, &[1, 1], 1, 2, l, &IterateOptions::with_max_iter(max_iter)).unwrap()
    }

    #[test]
    fn e1_on_the_z_axis() {
        let (g, _) = working(Preset::E1);
        let t = run(&g, &[C64::new(0.1, 0.0), C64::default(), C64::default()], 100_000, 0);
        assert_eq!(t.status, OrbitStatus::Converging);
        assert!(t.points.iter().all(|q| q.p[1] == C64::default() && q.p[2] == C64::default()));
        assert!(t.points.windows(2).all(|w| w[1].p[0].re < w[0].p[0].re && w[1].p[0].im == 0.0));
        let last = t.points.last().unwrap();
        assert_eq!(last.m, 100_000);
        assert!((last.m as f64 * last.p[0].re - 1.0).abs() < 1e-3);
    }

    #[test]
    fn origin_and_repelling_starts() {
        let (g, _) = working(Preset::E1);
        let t = run(&g, &[C64::default(); 3], 10, 0);
        assert_eq!(t.points.len(), 1);
        assert_eq!(t.status, OrbitStatus::Converging);

        let t = run(&g, &[C64::new(-0.1, 0.0), C64::default(), C64::default()], 100_000, 0);
        assert_eq!(t.status, OrbitStatus::Escaped);
    }

    #[test]
    fn thinning_keeps_prefix_and_stride() {
        let (g, _) = working(Preset::E1);
        let opts = IterateOptions { max_iter: 1000, escape_radius: 10.0, thin_stride: 50 };
        let t = iterate(&g, &[C64::new(0.1, 0.0), C64::default(), C64::default()], &[1, 1], 1, 2, 0, &opts).unwrap();
        let ms: Vec<u64> = t.points.iter().map(|q| q.m).collect();
        assert_eq!(ms.len(), 101 + 18);
        assert!(ms.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(*ms.last().unwrap(), 1000);
    }

    #[test]
    fn exact_model_map_has_zero_z_residual() {
        // z_1 = z/(1+z): 1/z_1 = 1/z + 1 exactly; keep a resonant block so v ≠ 0
        let (g, _) = working(Preset::E1);
        let mut comps = g.components().to_vec();
        let mut z = Series::zero(2, 12);
        for i in 1..=12u32 {
            z.add_term(MultiIndex::z_pow(2, i), C64::new(if i % 2 == 1 { 1.0 } else { -1.0 }, 0.0));
        }
        comps[0] = z;
        for c in comps.iter_mut().skip(1) {
            *c = c.with_order_cap(12);
        }
        let model = GermMap::new(g.spectrum().clone(), comps).unwrap();
        let p0 = vec![C64::new(0.01, 0.0), C64::new(0.1, 0.0), C64::new(0.1, 0.0)];
        let t = run(&model, &p0, 200, 0);
        let res = recurrence_residuals(&model, &t, 2, 0).unwrap();
        // z^13 truncation only
        assert!(res.d_z.iter().all(|d| d.norm() < 1e-12));
    }

    #[test]
    fn residuals_along_e1() {
        let (g, prof) = working(Preset::E1);
        let params = choose_params(&prof, &Overrides::default()).unwrap();
        let t = run(&g, &orbit_start(&params), 100_000, 0);
        let res = recurrence_residuals(&g, &t, 2, 0).unwrap();
        for i in 0..res.m.len() {
            if res.m[i] >= 100 {
                assert!(res.d_z[i].norm() <= 10.0 * res.abs_z[i]);
            }
        }
        let tail = res.m.iter().zip(&res.d_v).filter(|(m, _)| **m >= 90_000).map(|(_, d)| d.norm()).fold(0.0, f64::max);
        assert!(tail < 1e-3, "{tail}");
    }

    #[test]
    fn too_short_trace_is_rejected() {
        let (g, prof) = working(Preset::E1);
        let params = choose_params(&prof, &Overrides::default()).unwrap();
        let t = run(&g, &orbit_start(&params), 1000, 0);
        assert!(matches!(fit_rates(&t, 2, 0), Err(Error::Orbit(_))));
    }

    #[test]
    fn ols_recovers_a_line() {
        let x: Vec<f64> = (0..50).map(|i| i as f64 * 0.3).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.5 * v - 1.0).collect();
        assert!((ols_slope(&x, &y) - 2.5).abs() < 1e-12);
    }

    #[test]
    fn invariance_e1_and_miscalibration_probe() {
        let (g, prof) = working(Preset::E1);
        let params = choose_params(&prof, &Overrides::default()).unwrap();
        let rep = verify_invariance(&g, &params, 500, 3).unwrap();
        assert_eq!(rep.failed, 0);

        let wide = params.with_epsilons(0.9, 0.9);
        let rep = verify_invariance(&g, &wide, 500, 3).unwrap();
        assert!(rep.witnesses.iter().all(|w| !w.violated.is_empty()));
    }

    #[test]
    fn orbits_stay_in_their_petal() {
        let (g, prof) = working(Preset::E3);
        let base = choose_params(&prof, &Overrides::default()).unwrap();
        for (t, s) in petal_list(&prof).unwrap() {
            let params = base.with_petal(t, s);
            let trace =
                iterate(&g, &orbit_start(&params), &[1, 1], 2, 2, 0, &IterateOptions::with_max_iter(20_000)).unwrap();
            for (i, q) in trace.points.iter().enumerate() {
                let u = resonant_monomial(&q.p, &[1, 1]);
                let rel = (u / params.eta()).arg().abs();
                assert!(rel < params.delta * params.k as f64);
                let o = trace.observables(i);
                assert!(q.p[1..].iter().all(|w| w.norm() < o.abs_u.powf(params.beta)));
                let prod: f64 = q.p[1..].iter().map(|w| w.norm()).product();
                assert!((prod - o.abs_u).abs() <= 1e-12 * o.abs_u);
            }
        }
    }
}
