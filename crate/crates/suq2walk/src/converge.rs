//! Path-space deviation norms and the exponential convergence diagnostics.
//!
//! The central quantity is the squared (phi_t (x) phi_s)-norm of
//! 1_t (x) pi_s(x) - (pi_t (x) pi_s) coprod(x). Summed against the
//! convolution constants c_{n,s} it gives the exact path-space gap
//! norm of j_n(x) - j_{n+1}(x); no truncation enters because c_{n,.}
//! is finitely supported for finitely supported step measures.

use std::collections::BTreeMap;
use std::io::Write;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;

use crate::chain::{c_constants_series, lambda_rate, FusionRing, Measure, SuqFusionRing};
use crate::coproduct::{coproduct_pair, eval_block, AlgebraElement};
use crate::mat::{eye, kron, CMat};
use crate::martin::fmt_g17;
use crate::qarith::{QContext, Spin};
use crate::repsuq2::intertwiner_basis;
use crate::Result;

/// The squared deviation norms of one element at a pair of spins.
#[derive(Debug, Clone)]
pub struct DeviationRecord {
    pub t: Spin,
    pub s: Spin,
    /// (phi_t (x) phi_s)(D* D) with D = 1 (x) pi_s(x) - coprod(x)|_{t,s}.
    pub value: f64,
    /// Same with D D* (the adjoint-side norm).
    pub value_star: f64,
}

/// Computes both deviation norms for the pair (t, s).
///
/// Elements whose words involve only k, k^-1 (with at most lambdatilde
/// central factors) evaluate diagonally in every block; for those the
/// difference is cancelled analytically before any float subtraction, which
/// keeps the result accurate even where it decays below the f64 noise floor
/// of the dense route (the value shrinks like a high power of q in s while
/// the matrices being subtracted stay order one).
pub fn deviation(ctx: QContext, t: Spin, s: Spin, x: &AlgebraElement) -> Result<DeviationRecord> {
    if let Some(terms) = diagonal_power_terms(x) {
        let (value, value_star) = deviation_diagonal(ctx, t, s, &terms)?;
        return Ok(DeviationRecord {
            t,
            s,
            value,
            value_star,
        });
    }
    let xs = eval_block(ctx, x, s);
    let pair = coproduct_pair(ctx, x, t, s)?;
    let d = kron(&eye(t.dim()), &xs) - pair.matrix;

    // product state weights: (rho_t^-1 (x) rho_s^-1) / (d_t d_s)
    let bt = crate::repsuq2::irrep(ctx, t);
    let bs = crate::repsuq2::irrep(ctx, s);
    let norm = bt.qdim * bs.qdim;
    let weighted_trace = |m: &CMat| -> f64 {
        let mut acc = 0.0;
        for (a, wa) in bt.rho_inv_diag.iter().enumerate() {
            for (b, wb) in bs.rho_inv_diag.iter().enumerate() {
                let p = a * bs.dim + b;
                acc += m[(p, p)].re * wa * wb;
            }
        }
        acc / norm
    };
    let value = weighted_trace(&(d.adjoint() * &d));
    let value_star = weighted_trace(&(&d * d.adjoint()));
    Ok(DeviationRecord {
        t,
        s,
        value,
        value_star,
    })
}

/// One monomial of a k-diagonal element: coeff * q^{(a*2s + b*2j + c)/2}
/// evaluated at block spin 2s and magnetic index 2j.
#[derive(Debug, Clone, Copy)]
struct PowerTerm {
    coeff: f64,
    per_ts: i64,
    per_tj: i64,
    constant: i64,
}

impl PowerTerm {
    fn exponent(&self, ts: i64, tj: i64) -> i64 {
        self.per_ts * ts + self.per_tj * tj + self.constant
    }
}

/// Power-sum form of an element whose terms are words in k, k^-1 with real
/// coefficients and at most lambdatilde-type central factors.
fn diagonal_power_terms(x: &AlgebraElement) -> Option<Vec<PowerTerm>> {
    use crate::coproduct::{CentralScalar, Gen};
    let mut out = Vec::with_capacity(x.terms.len());
    for term in &x.terms {
        if term.coeff.im != 0.0 {
            return None;
        }
        let mut net_k = 0i64;
        for g in &term.word {
            match g {
                Gen::K => net_k += 1,
                Gen::KInv => net_k -= 1,
                Gen::E | Gen::F => return None,
            }
        }
        let per_ts = match term.central {
            None => 0,
            Some(CentralScalar::LambdaTilde) => -2,
            Some(CentralScalar::LambdaTildeInv) => 2,
            Some(_) => return None,
        };
        out.push(PowerTerm {
            coeff: term.coeff.re,
            per_ts,
            per_tj: -net_k, // each k contributes q^{-j}
            constant: 0,
        });
    }
    Some(out)
}

/// Stable difference of two q-powers with doubled exponents.
fn q_power_diff(ctx: QContext, e2_a: i64, e2_b: i64) -> f64 {
    use std::cmp::Ordering;
    match e2_a.cmp(&e2_b) {
        Ordering::Equal => 0.0,
        Ordering::Less => ctx.q_pow_half(e2_a) * (1.0 - ctx.q_pow_half(e2_b - e2_a)),
        Ordering::Greater => -ctx.q_pow_half(e2_b) * (1.0 - ctx.q_pow_half(e2_a - e2_b)),
    }
}

/// Cancellation-free deviation for k-diagonal elements.
///
/// With Y_{v v'} = T_v^* (1 (x) pi_s(x)) T_{v'} - delta_{v v'} pi_v(x), the
/// completeness and orthonormality of the intertwiners give
///   Y_{v v'}[m, m] = sum_{(a,b) of weight m} conj(T_v[(a,b), m]) T_{v'}[(a,b), m]
///                    (g(s, j_b) - g(v', m)),
/// and the deviation is the rho-weighted square sum of these entries. The
/// power differences g(s, j_b) - g(v', m) are evaluated in factored form.
fn deviation_diagonal(
    ctx: QContext,
    t: Spin,
    s: Spin,
    terms: &[PowerTerm],
) -> Result<(f64, f64)> {
    let basis = intertwiner_basis(ctx, t, s)?;
    let ds = s.dim();
    let ts = s.twice() as i64;
    let tj_t: Vec<i64> = t.magnetic_indices().collect();
    let tj_s: Vec<i64> = s.magnetic_indices().collect();
    let comps = &basis.components;

    let mut total = 0.0f64;
    // weights tm run over all magnetic indices of all components
    let t_plus_s = (t.twice() + s.twice()) as i64;
    let mut tm = -t_plus_s;
    while tm <= t_plus_s {
        // pairs (a, b) of weight tm
        let pairs: Vec<(usize, usize)> = (0..tj_t.len())
            .flat_map(|a| (0..ds).map(move |b| (a, b)))
            .filter(|&(a, b)| tj_t[a] + tj_s[b] == tm)
            .collect();
        for vp in comps {
            let tvp = vp.v.twice() as i64;
            if tm.abs() > tvp {
                continue;
            }
            let col_vp = ((tm + tvp) / 2) as usize;
            // delta g per pair against the target eigenvalue g(v', m)
            let dg: Vec<f64> = pairs
                .iter()
                .map(|&(_, b)| {
                    terms
                        .iter()
                        .map(|pt| {
                            pt.coeff
                                * q_power_diff(
                                    ctx,
                                    pt.exponent(ts, tj_s[b]),
                                    pt.exponent(tvp, tm),
                                )
                        })
                        .sum()
                })
                .collect();
            let mut sq_sum = 0.0;
            for v in comps {
                let tv = v.v.twice() as i64;
                if tm.abs() > tv {
                    continue;
                }
                let col_v = ((tm + tv) / 2) as usize;
                let mut y = Complex64::new(0.0, 0.0);
                for (&(a, b), &g) in pairs.iter().zip(dg.iter()) {
                    let p = a * ds + b;
                    y += v.isometry[(p, col_v)].conj() * vp.isometry[(p, col_vp)] * g;
                }
                sq_sum += y.norm_sqr();
            }
            total += sq_sum * ctx.q_pow(-tm); // rho^-1 entry q^{-2m}
        }
        tm += 2;
    }
    let value = total / (ctx.quantum_dim(t) * ctx.quantum_dim(s));
    // for diagonal x the defect is weight-diagonal, so both norms coincide
    Ok((value, value))
}

/// Closed form of the Xtilde_0 deviation at t = 1/2:
/// d_{1/2}^-1 d_s^-2 q^{4s} (q - q^-1)
///   ((q^{2s-2} + q^{2s+4}) [2s+1]_{q^3} - (q^-2 + q^2) [2s+1]_{q^2}).
pub fn deviation_xt0_closed_form(ctx: QContext, s: Spin) -> f64 {
    let q = ctx.q();
    let ts = s.twice() as i64;
    let d_half = ctx.q_number(2);
    let d_s = ctx.quantum_dim(s);
    let bracket = (ctx.q_pow(ts - 2) + ctx.q_pow(ts + 4)) * ctx.q_number_base(ts + 1, 3)
        - (ctx.q_pow(-2) + ctx.q_pow(2)) * ctx.q_number_base(ts + 1, 2);
    ctx.q_pow(2 * ts) * (q - 1.0 / q) * bracket / (d_half * d_s * d_s)
}

/// The measure-averaged deviation sum_t mu(t) deviation(t, s, x).
pub fn deviation_mu(ctx: QContext, mu: &Measure, s: Spin, x: &AlgebraElement) -> Result<f64> {
    let mut acc = 0.0;
    for (label, w) in mu.iter() {
        acc += w * deviation(ctx, Spin::from_twice(label), s, x)?.value;
    }
    Ok(acc)
}

/// The exact path-space gap ||j_n(x) - j_{n+1}(x)||^2 as the c-constant sum.
pub fn jn_gap(ctx: QContext, mu: &Measure, x: &AlgebraElement, n: u32) -> Result<f64> {
    let ring = SuqFusionRing::new(ctx);
    let window = mu.max_label().max(1) * n;
    let cn = crate::chain::c_constants(&ring, mu, n, window)?;
    let mut acc = 0.0;
    for (&label, &c) in &cn {
        acc += c * deviation_mu(ctx, mu, Spin::from_twice(label), x)?;
    }
    Ok(acc)
}

/// Value of the convergence-theorem condition sum_t mu(t) (1 + q^2)^{2t},
/// plus the generating condition (half-odd-integer support).
pub fn thm_condition(ctx: QContext, mu: &Measure) -> (f64, bool) {
    let base = 1.0 + ctx.q() * ctx.q();
    let sum = mu
        .iter()
        .map(|(label, w)| w * base.powi(label as i32))
        .sum();
    let ring = SuqFusionRing::new(ctx);
    let window = 2 * mu.max_label() + 2;
    let generating = crate::chain::is_generating(&ring, mu, window).generating;
    debug_assert_eq!(generating, SuqFusionRing::generating_criterion(mu));
    (sum, generating)
}

/// The full gap series with its geometric envelope and theorem conditions.
#[derive(Debug, Clone, Serialize)]
pub struct RateReport {
    pub mu: Vec<(u32, f64)>,
    pub x_name: String,
    /// (n, gap squared) for n = 1..=n_max.
    pub series: Vec<(u32, f64)>,
    pub lambda: f64,
    /// Observed Proposition constant: max_s d_s * deviation(1/2, s, x).
    pub c_obs: f64,
    /// Envelope constant C' of the corollary bound gap(n) <= C' lambda^n.
    pub envelope_c: f64,
    pub summable: bool,
    pub thm_condition: f64,
    pub generating: bool,
}

impl RateReport {
    /// CSV columns: n, gap_sq, bound.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "n,gap_sq,bound")?;
        for &(n, gap) in &self.series {
            let bound = self.envelope_c * self.lambda.powi(n as i32);
            writeln!(w, "{},{},{}", n, fmt_g17(gap), fmt_g17(bound))?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "mu": self.mu,
            "x": self.x_name,
            "lambda": self.lambda,
            "c_obs": self.c_obs,
            "envelope_c": self.envelope_c,
            "summable": self.summable,
            "thm_condition": self.thm_condition,
            "generating": self.generating,
            "series": self.series,
        })
    }
}

/// Builds the gap series for n = 1..=n_max along with the envelope constant
/// assembled from the averaging lemma: C' = C [2]_q / (sqrt([2]_q) - sqrt(2))^2
/// * sum_t mu(t) d_{1/2}^{2t} / d_t, with C the observed max of d_s * deviation.
pub fn rate_report(
    ctx: QContext,
    mu: &Measure,
    x: &AlgebraElement,
    x_name: &str,
    n_max: u32,
) -> Result<RateReport> {
    let ring = SuqFusionRing::new(ctx);
    let lambda = lambda_rate(&ring, mu);
    let window = mu.max_label().max(1) * n_max;
    let c_series = c_constants_series(&ring, mu, n_max, window)?;

    // measure-averaged deviations, one per reachable spin
    let mut dev_cache: BTreeMap<u32, f64> = BTreeMap::new();
    let mut series = Vec::with_capacity(n_max as usize);
    for (idx, cn) in c_series.iter().enumerate() {
        let mut acc = 0.0;
        for (&label, &cw) in cn {
            let dev = match dev_cache.get(&label) {
                Some(&d) => d,
                None => {
                    let d = deviation_mu(ctx, mu, Spin::from_twice(label), x)?;
                    dev_cache.insert(label, d);
                    d
                }
            };
            acc += cw * dev;
        }
        series.push((idx as u32 + 1, acc));
    }

    // observed constant of the half-leg estimate, over a calibration range
    let cal_max = 80u32.max(window.min(80));
    let mut c_obs = 0.0f64;
    for ts in 1..=cal_max {
        let s = Spin::from_twice(ts);
        let dev = deviation(ctx, Spin::HALF, s, x)?.value;
        c_obs = c_obs.max(ctx.quantum_dim(s) * dev);
    }
    let d_half = ctx.q_number(2);
    let averaging = d_half / (d_half.sqrt() - 2.0f64.sqrt()).powi(2);
    let mu_factor: f64 = mu
        .iter()
        .map(|(label, w)| w * d_half.powi(label as i32) / ring.qdim(label))
        .sum();
    let envelope_c = c_obs * averaging * mu_factor;

    let (thm_sum, generating) = thm_condition(ctx, mu);
    Ok(RateReport {
        mu: mu.iter().collect(),
        x_name: x_name.to_string(),
        series,
        lambda,
        c_obs,
        envelope_c,
        summable: lambda < 1.0,
        thm_condition: thm_sum,
        generating,
    })
}
