//! Numerical overlap integrals by Gauss-Laguerre quadrature in extended
//! precision.
//!
//! With `t = 2 r^2 / w_n^2` the overlap becomes
//!
//! ```text
//! I_p = (w_n^2 / w0^2) integral_0^inf exp(-a t) L_p(t) dt,   a = w_n^2 / w0^2 + 1/2
//!     = c sum_j w_j L_p(x_j / a),                             c = 2 w_n^2 / (2 w_n^2 + w0^2)
//! ```
//!
//! where `(x_j, w_j)` are the nodes and weights of the M-point rule for the
//! weight `exp(-x)`; the rule is exact once `2M > p`. For large `p` and
//! `w0` comparable to `w_n` the overlap is many orders of magnitude below
//! the individual terms, so the sum is accumulated in binary floating point
//! of adjustable precision. The
//! precision is raised until a running bound on the accumulated rounding
//! error meets the tolerance, and the result is cross-checked against a
//! rule of higher order.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;
use rayon::prelude::*;

use super::{OpticalMode, OverlapValue};
use crate::error::{invalid, Error, Result};
use crate::resonator_modes::{waist_squared, ModeIndex, PlanoConvexGeometry};

type Big = FBig<HalfEven, 2>;

/// Tolerances and budgets for [`overlap_quadrature`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSettings {
    /// Relative accuracy required of every overlap.
    pub rel_tol: f64,
    /// Largest number of quadrature nodes tried.
    pub max_order: usize,
    /// Largest working precision in bits.
    pub max_precision_bits: usize,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            max_order: 1024,
            max_precision_bits: 2048,
        }
    }
}

impl QuadratureSettings {
    fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(invalid("rel_tol", format!("must lie in (0, 1), got {}", self.rel_tol)));
        }
        if self.max_precision_bits < 64 {
            return Err(invalid("max_precision_bits", "must be at least 64"));
        }
        Ok(())
    }
}

const START_PRECISION: usize = 128;
const ORDER_STEP: usize = 16;

/// Overlap of the optical intensity with mode `idx`, computed by
/// quadrature.
pub fn overlap_quadrature(
    opt: &OpticalMode,
    geom: &PlanoConvexGeometry,
    idx: ModeIndex,
    settings: &QuadratureSettings,
) -> Result<OverlapValue> {
    let series = overlap_quadrature_series(opt, geom, idx.n(), idx.p(), settings)?;
    Ok(series[idx.p() as usize])
}

/// Overlaps for `p = 0..=p_max` at longitudinal index `n`, from one set of
/// quadrature nodes.
pub fn overlap_quadrature_series(
    opt: &OpticalMode,
    geom: &PlanoConvexGeometry,
    n: u32,
    p_max: u32,
    settings: &QuadratureSettings,
) -> Result<Vec<OverlapValue>> {
    ModeIndex::new(n, p_max)?;
    settings.validate()?;
    let values = integrate(waist_squared(geom, n), opt.waist_squared(), p_max as usize, settings)?;
    Ok(values.into_iter().map(|value| OverlapValue { value }).collect())
}

struct Estimate {
    values: Vec<Big>,
    rounding: Vec<f64>,
}

impl Estimate {
    fn value(&self, p: usize) -> f64 {
        self.values[p].to_f64().value()
    }

    fn target(&self, p: usize, rel_tol: f64) -> f64 {
        (rel_tol * self.value(p).abs()).max(f64::MIN_POSITIVE)
    }

    fn rounding_ok(&self, rel_tol: f64) -> bool {
        (0..self.values.len()).all(|p| self.rounding[p] <= self.target(p, rel_tol))
    }
}

fn integrate(wn2: f64, w02: f64, p_max: usize, settings: &QuadratureSettings) -> Result<Vec<f64>> {
    let low = (p_max / 2 + 1).max(16);
    let high = low + ORDER_STEP;
    if high > settings.max_order {
        return Err(Error::QuadratureNotConverged(format!(
            "p = {p_max} needs {high} nodes, budget is {}",
            settings.max_order
        )));
    }
    let tol = settings.rel_tol;
    let mut precision = START_PRECISION.min(settings.max_precision_bits);
    loop {
        let coarse = estimate(wn2, w02, p_max, low, precision)?;
        if coarse.rounding_ok(tol) {
            let fine = estimate(wn2, w02, p_max, high, precision)?;
            let agree = (0..=p_max).all(|p| {
                let gap = (&coarse.values[p] - &fine.values[p]).to_f64().value().abs();
                gap <= fine.target(p, tol) + coarse.rounding[p] + fine.rounding[p]
            });
            if fine.rounding_ok(tol) && agree {
                return Ok((0..=p_max).map(|p| fine.value(p)).collect());
            }
        }
        if precision >= settings.max_precision_bits {
            return Err(Error::QuadratureNotConverged(format!(
                "tolerance {tol:e} not met at {precision} bits (w_n^2 = {wn2:e}, w0^2 = {w02:e}, p <= {p_max})"
            )));
        }
        precision = (2 * precision).min(settings.max_precision_bits);
    }
}

fn estimate(wn2: f64, w02: f64, p_max: usize, order: usize, precision: usize) -> Result<Estimate> {
    let rule = gauss_laguerre(order, precision)?;
    let wn2 = big(wn2, precision);
    let w02 = big(w02, precision);
    let two_wn2 = &wn2 + &wn2;
    let denom = &two_wn2 + &w02;
    let prefactor = &two_wn2 / &denom;
    let scale = &(&w02 + &w02) / &denom;
    let ints: Vec<Big> = (0..=2 * p_max + 1).map(|k| big(k as f64, precision)).collect();

    let per_node: Vec<Vec<Big>> = rule
        .par_iter()
        .map(|node| {
            let y = &node.x * &scale;
            let mut terms = Vec::with_capacity(p_max + 1);
            let mut prev = node.w.clone();
            terms.push(prev.clone());
            if p_max > 0 {
                let mut cur = &node.w - &(&node.w * &y);
                terms.push(cur.clone());
                for k in 1..p_max {
                    let next = (&(&(&ints[2 * k + 1] - &y) * &cur) - &(&ints[k] * &prev)) / &ints[k + 1];
                    prev = cur;
                    cur = next;
                    terms.push(cur.clone());
                }
            }
            terms
        })
        .collect();

    let zero = big(0.0, precision);
    let mut sums = vec![zero.clone(); p_max + 1];
    let mut magnitudes = vec![zero; p_max + 1];
    for terms in &per_node {
        for (p, t) in terms.iter().enumerate() {
            sums[p] = &sums[p] + t;
            magnitudes[p] = &magnitudes[p] + &abs(t);
        }
    }
    let unit = 2f64.powi(-(precision as i32));
    let prefactor_f = prefactor.to_f64().value();
    let rounding = magnitudes
        .iter()
        .enumerate()
        .map(|(p, m)| unit * (4.0 * (p as f64 + 1.0) + 64.0) * m.to_f64().value() * prefactor_f)
        .collect();
    let values = sums.iter().map(|s| &prefactor * s).collect();
    Ok(Estimate { values, rounding })
}

fn big(x: f64, precision: usize) -> Big {
    Big::try_from(x).expect("finite input").with_precision(precision).value()
}

fn abs(x: &Big) -> Big {
    if *x < Big::ZERO {
        -x
    } else {
        x.clone()
    }
}

struct Node {
    x: Big,
    w: Big,
}

type RuleCache = Mutex<HashMap<(usize, usize), Arc<Vec<Node>>>>;

fn gauss_laguerre(order: usize, precision: usize) -> Result<Arc<Vec<Node>>> {
    static CACHE: OnceLock<RuleCache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(rule) = cache.lock().expect("rule cache poisoned").get(&(order, precision)) {
        return Ok(Arc::clone(rule));
    }
    let rule = Arc::new(build_rule(order, precision)?);
    cache
        .lock()
        .expect("rule cache poisoned")
        .insert((order, precision), Arc::clone(&rule));
    Ok(rule)
}

fn build_rule(order: usize, precision: usize) -> Result<Vec<Node>> {
    let roots = roots_f64(order)?;
    let working = precision + 32;
    roots
        .par_iter()
        .map(|&z| refine_node(z, order, working).map(|(x, w)| Node {
            x: x.with_precision(precision).value(),
            w: w.with_precision(precision).value(),
        }))
        .collect()
}

/// `(L_m(x), L_{m-1}(x))` rescaled by a common positive factor.
fn laguerre_pair_scaled(m: usize, x: f64) -> (f64, f64) {
    let mut prev = 1.0;
    let mut cur = 1.0 - x;
    for k in 1..m {
        let k = k as f64;
        let next = ((2.0 * k + 1.0 - x) * cur - k * prev) / (k + 1.0);
        prev = cur;
        cur = next;
        if cur.abs() > 1e150 {
            cur *= 1e-150;
            prev *= 1e-150;
        }
    }
    (cur, prev)
}

fn roots_f64(m: usize) -> Result<Vec<f64>> {
    let mf = m as f64;
    let mut roots: Vec<f64> = Vec::with_capacity(m);
    for i in 0..m {
        let mut z = match i {
            0 => 3.0 / (1.0 + 2.4 * mf),
            1 => roots[0] + 15.0 / (1.0 + 2.5 * mf),
            _ => {
                let ai = (i - 1) as f64;
                roots[i - 1] + (1.0 + 2.55 * ai) / (1.9 * ai) * (roots[i - 1] - roots[i - 2])
            }
        };
        let mut converged = false;
        for _ in 0..100 {
            let (lm, lm1) = laguerre_pair_scaled(m, z);
            let slope = mf * (lm - lm1) / z;
            let step = lm / slope;
            z -= step;
            if step.abs() <= 1e-12 * z.abs() {
                converged = true;
                break;
            }
        }
        if !converged || !z.is_finite() || (i > 0 && z <= roots[i - 1]) {
            return Err(Error::QuadratureNotConverged(format!(
                "Laguerre root {i} of order {m} did not converge"
            )));
        }
        roots.push(z);
    }
    Ok(roots)
}

/// Laguerre recurrence in extended precision up to `L_m`, returning
/// `(L_m(x), L_{m-1}(x))`.
fn laguerre_pair_big(m: usize, x: &Big, precision: usize) -> (Big, Big) {
    let one = big(1.0, precision);
    let mut prev = one.clone();
    let mut cur = &one - x;
    for k in 1..m {
        let kf = big(k as f64, precision);
        let next = (&(&big((2 * k + 1) as f64, precision) - x) * &cur - &kf * &prev) / big((k + 1) as f64, precision);
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

fn refine_node(z: f64, m: usize, precision: usize) -> Result<(Big, Big)> {
    let mf = big(m as f64, precision);
    // The f64 root carries roughly 40 correct bits; Newton doubles them.
    let mut bits = 40usize;
    let mut x = big(z, 2 * bits);
    let mut final_steps = 0;
    loop {
        bits = (2 * bits).min(precision);
        x = x.with_precision(bits).value();
        let (lm, lm1) = laguerre_pair_big(m, &x, bits);
        let slope = &(&mf * &(&lm - &lm1)) / &x;
        x = &x - &(&lm / &slope);
        if bits == precision {
            final_steps += 1;
            if final_steps == 2 {
                break;
            }
        }
    }
    if !(x > Big::ZERO) {
        return Err(Error::QuadratureNotConverged(format!("node refinement failed near {z}")));
    }
    // w = x / ((m+1)^2 L_{m+1}(x)^2), with L_{m+1} from one more recurrence step.
    let (lm, lm1) = laguerre_pair_big(m, &x, precision);
    let two_m1 = big((2 * m + 1) as f64, precision);
    let next = (&(&two_m1 - &x) * &lm - &mf * &lm1) / big((m + 1) as f64, precision);
    let m1 = big((m + 1) as f64, precision);
    let denom = &(&m1 * &m1) * &(&next * &next);
    let w = &x / &denom;
    Ok((x, w))
}
