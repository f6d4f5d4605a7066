//! The classical shadow random walk on the fusion ring: transition kernel,
//! iterated-convolution constants, transience diagnostics and Green functions.
//!
//! Everything here is generic over a [`FusionRing`]; the SU_q(2) instance is
//! [`SuqFusionRing`] with labels equal to doubled spins, and arbitrary rings
//! can be loaded from a JSON table description.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::qarith::{QContext, Spin};
use crate::repsuq2::fusion_components;
use crate::{Error, Result};

/// Fusion data: multiplicities, quantum and classical dimensions, duals.
///
/// Labels are nonnegative integers with an explicit enumeration. Rings are
/// assumed to satisfy Frobenius reciprocity, m_{r,t}^u = m_{rbar,u}^t, which
/// holds for any ring coming from an actual tensor category.
pub trait FusionRing {
    fn multiplicity(&self, r: u32, s: u32, t: u32) -> u64;
    /// Labels t with multiplicity(r, s, t) > 0, ascending.
    fn fusion_support(&self, r: u32, s: u32) -> Vec<u32>;
    fn qdim(&self, s: u32) -> f64;
    fn cdim(&self, s: u32) -> u64;
    fn dual(&self, s: u32) -> u32;
    /// All labels of the enumeration up to and including `window`.
    fn labels_upto(&self, window: u32) -> Vec<u32>;
}

/// The SU_q(2) fusion ring; the label of spin s is 2s.
#[derive(Debug, Clone, Copy)]
pub struct SuqFusionRing {
    ctx: QContext,
}

impl SuqFusionRing {
    pub fn new(ctx: QContext) -> Self {
        SuqFusionRing { ctx }
    }

    pub fn ctx(&self) -> QContext {
        self.ctx
    }

    /// Closed generating criterion: some half-odd-integer spin in the support.
    pub fn generating_criterion(mu: &Measure) -> bool {
        mu.support().any(|l| l % 2 == 1)
    }
}

impl FusionRing for SuqFusionRing {
    fn multiplicity(&self, r: u32, s: u32, t: u32) -> u64 {
        let lo = r.abs_diff(s);
        let hi = r + s;
        if t >= lo && t <= hi && (t + hi) % 2 == 0 {
            1
        } else {
            0
        }
    }

    fn fusion_support(&self, r: u32, s: u32) -> Vec<u32> {
        fusion_components(Spin::from_twice(r), Spin::from_twice(s))
            .into_iter()
            .map(|v| v.twice())
            .collect()
    }

    fn qdim(&self, s: u32) -> f64 {
        self.ctx.q_number(s as i64 + 1)
    }

    fn cdim(&self, s: u32) -> u64 {
        s as u64 + 1
    }

    fn dual(&self, s: u32) -> u32 {
        s
    }

    fn labels_upto(&self, window: u32) -> Vec<u32> {
        (0..=window).collect()
    }
}

/// Serializable description of a finite fusion ring.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FusionRingSpec {
    /// Number of labels; labels are 0..labels.
    pub labels: u32,
    pub qdim: Vec<f64>,
    pub cdim: Vec<u64>,
    pub dual: Vec<u32>,
    /// Sparse multiplicity triples (r, s, t, m) with m > 0.
    pub mult: Vec<(u32, u32, u32, u64)>,
}

/// A fusion ring backed by an explicit finite table.
#[derive(Debug, Clone)]
pub struct TableFusionRing {
    spec: FusionRingSpec,
    support: BTreeMap<(u32, u32), Vec<(u32, u64)>>,
}

impl TableFusionRing {
    pub fn new(spec: FusionRingSpec) -> Self {
        let mut support: BTreeMap<(u32, u32), Vec<(u32, u64)>> = BTreeMap::new();
        for &(r, s, t, m) in &spec.mult {
            if m > 0 {
                support.entry((r, s)).or_default().push((t, m));
            }
        }
        for list in support.values_mut() {
            list.sort_unstable_by_key(|&(t, _)| t);
        }
        TableFusionRing { spec, support }
    }

    pub fn from_json(json: &str) -> serde_json::Result<Self> {
        Ok(Self::new(serde_json::from_str(json)?))
    }

    /// Snapshot of the SU_q(2) ring with labels up to `max_twice`.
    ///
    /// Only triples whose output stays within the window are recorded, so the
    /// table is exact as long as all fusions used stay below the cutoff.
    pub fn from_suq2(ctx: QContext, max_twice: u32) -> Self {
        let ring = SuqFusionRing::new(ctx);
        let mut mult = Vec::new();
        for r in 0..=max_twice {
            for s in 0..=max_twice {
                for t in ring.fusion_support(r, s) {
                    if t <= max_twice {
                        mult.push((r, s, t, 1));
                    }
                }
            }
        }
        Self::new(FusionRingSpec {
            labels: max_twice + 1,
            qdim: (0..=max_twice).map(|l| ring.qdim(l)).collect(),
            cdim: (0..=max_twice).map(|l| ring.cdim(l)).collect(),
            dual: (0..=max_twice).collect(),
            mult,
        })
    }

    pub fn spec(&self) -> &FusionRingSpec {
        &self.spec
    }
}

impl FusionRing for TableFusionRing {
    fn multiplicity(&self, r: u32, s: u32, t: u32) -> u64 {
        self.support
            .get(&(r, s))
            .and_then(|list| list.iter().find(|&&(u, _)| u == t))
            .map(|&(_, m)| m)
            .unwrap_or(0)
    }

    fn fusion_support(&self, r: u32, s: u32) -> Vec<u32> {
        self.support
            .get(&(r, s))
            .map(|list| list.iter().map(|&(t, _)| t).collect())
            .unwrap_or_default()
    }

    fn qdim(&self, s: u32) -> f64 {
        self.spec.qdim[s as usize]
    }

    fn cdim(&self, s: u32) -> u64 {
        self.spec.cdim[s as usize]
    }

    fn dual(&self, s: u32) -> u32 {
        self.spec.dual[s as usize]
    }

    fn labels_upto(&self, window: u32) -> Vec<u32> {
        (0..=window.min(self.spec.labels.saturating_sub(1))).collect()
    }
}

/// Finitely supported probability measure on the label set.
#[derive(Debug, Clone, PartialEq)]
pub struct Measure {
    weights: BTreeMap<u32, f64>,
}

impl Measure {
    /// Builds a measure, requiring positive weights summing to 1 within 1e-12.
    pub fn from_pairs(pairs: &[(u32, f64)]) -> Result<Self> {
        let mut weights = BTreeMap::new();
        let mut sum = 0.0;
        for &(label, w) in pairs {
            if w <= 0.0 || !w.is_finite() {
                return Err(Error::BadMeasure(w));
            }
            *weights.entry(label).or_insert(0.0) += w;
            sum += w;
        }
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::BadMeasure(sum));
        }
        Ok(Measure { weights })
    }

    pub fn delta(label: u32) -> Self {
        let mut weights = BTreeMap::new();
        weights.insert(label, 1.0);
        Measure { weights }
    }

    pub fn delta_spin(s: Spin) -> Self {
        Self::delta(s.twice())
    }

    pub fn weight(&self, label: u32) -> f64 {
        self.weights.get(&label).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.weights.iter().map(|(&l, &w)| (l, w))
    }

    pub fn support(&self) -> impl Iterator<Item = u32> + '_ {
        self.weights.keys().copied()
    }

    pub fn max_label(&self) -> u32 {
        self.weights.keys().next_back().copied().unwrap_or(0)
    }

    /// Pushforward under the dual map of the ring: mubar(s) = mu(sbar).
    pub fn conjugate<R: FusionRing>(&self, ring: &R) -> Measure {
        let mut weights = BTreeMap::new();
        for (l, w) in self.iter() {
            *weights.entry(ring.dual(l)).or_insert(0.0) += w;
        }
        Measure { weights }
    }
}

/// Transition probability p_mu(s, t) = sum_r mu(r) m_{r,s}^t d_t / (d_r d_s).
pub fn p_mu<R: FusionRing>(ring: &R, mu: &Measure, s: u32, t: u32) -> f64 {
    let qs = ring.qdim(s);
    let mut acc = 0.0;
    for (r, w) in mu.iter() {
        let m = ring.multiplicity(r, s, t);
        if m > 0 {
            acc += w * m as f64 * ring.qdim(t) / (ring.qdim(r) * qs);
        }
    }
    acc
}

/// Full transition row from s, sparse over the reachable labels.
pub fn p_row<R: FusionRing>(ring: &R, mu: &Measure, s: u32) -> BTreeMap<u32, f64> {
    let qs = ring.qdim(s);
    let mut row = BTreeMap::new();
    for (r, w) in mu.iter() {
        for t in ring.fusion_support(r, s) {
            let m = ring.multiplicity(r, s, t) as f64;
            *row.entry(t).or_insert(0.0) += w * m * ring.qdim(t) / (ring.qdim(r) * qs);
        }
    }
    row
}

/// Distributions p^n(s, .) for n = 0..=n_max, computed exactly by pushforward.
pub fn p_powers_from<R: FusionRing>(
    ring: &R,
    mu: &Measure,
    s: u32,
    n_max: u32,
) -> Vec<BTreeMap<u32, f64>> {
    let mut out = Vec::with_capacity(n_max as usize + 1);
    let mut dist = BTreeMap::new();
    dist.insert(s, 1.0);
    out.push(dist.clone());
    for _ in 1..=n_max {
        let mut next: BTreeMap<u32, f64> = BTreeMap::new();
        for (&u, &p) in &dist {
            let qu = ring.qdim(u);
            for (r, w) in mu.iter() {
                for t in ring.fusion_support(r, u) {
                    let m = ring.multiplicity(r, u, t) as f64;
                    *next.entry(t).or_insert(0.0) += p * w * m * ring.qdim(t) / (ring.qdim(r) * qu);
                }
            }
        }
        out.push(next.clone());
        dist = next;
    }
    out
}

/// Return probabilities to the unit: maps n -> {t -> p^n(t, 0)} for n = 0..=n_max.
///
/// Uses Frobenius reciprocity m_{r,t}^u = m_{rbar,u}^t to propagate the
/// column of the unit label instead of one row per start.
pub fn unit_return_series<R: FusionRing>(
    ring: &R,
    mu: &Measure,
    n_max: u32,
) -> Vec<BTreeMap<u32, f64>> {
    let mut out = Vec::with_capacity(n_max as usize + 1);
    let mut col = BTreeMap::new();
    col.insert(0u32, 1.0);
    out.push(col.clone());
    for _ in 1..=n_max {
        let mut next: BTreeMap<u32, f64> = BTreeMap::new();
        for (&u, &val) in &col {
            let qu = ring.qdim(u);
            for (r, w) in mu.iter() {
                let rbar = ring.dual(r);
                for t in ring.fusion_support(rbar, u) {
                    let m = ring.multiplicity(rbar, u, t) as f64;
                    *next.entry(t).or_insert(0.0) += val * w * m * qu / (ring.qdim(r) * ring.qdim(t));
                }
            }
        }
        out.push(next.clone());
        col = next;
    }
    out
}

/// The convolution constants c_{n,r}(mu) for a fixed n, via the recursion
/// c_{n+1,s} = sum_{r,t} c_{n,r} mu(t) m_{r,t}^s d_s / (d_r d_t).
pub fn c_constants<R: FusionRing>(
    ring: &R,
    mu: &Measure,
    n: u32,
    window: u32,
) -> Result<BTreeMap<u32, f64>> {
    let series = c_constants_series(ring, mu, n, window)?;
    Ok(series.into_iter().last().unwrap_or_default())
}

/// The constants c_{k,r}(mu) for k = 1..=n_max (index 0 holds k = 1).
pub fn c_constants_series<R: FusionRing>(
    ring: &R,
    mu: &Measure,
    n_max: u32,
    window: u32,
) -> Result<Vec<BTreeMap<u32, f64>>> {
    let mut out = Vec::with_capacity(n_max as usize);
    let mut cur: BTreeMap<u32, f64> = mu.iter().collect();
    if let Some(&reached) = cur.keys().next_back() {
        if reached > window {
            return Err(Error::WindowTooSmall { window, reached });
        }
    }
    out.push(cur.clone());
    for _ in 2..=n_max {
        let mut next: BTreeMap<u32, f64> = BTreeMap::new();
        for (&r, &cr) in &cur {
            let qr = ring.qdim(r);
            for (t, w) in mu.iter() {
                for s in ring.fusion_support(r, t) {
                    if s > window {
                        return Err(Error::WindowTooSmall { window, reached: s });
                    }
                    let m = ring.multiplicity(r, t, s) as f64;
                    *next.entry(s).or_insert(0.0) += cr * w * m * ring.qdim(s) / (qr * ring.qdim(t));
                }
            }
        }
        out.push(next.clone());
        cur = next;
    }
    Ok(out)
}

/// The transience rate lambda = sum_r mu(r) dim(U_r) / d_r.
pub fn lambda_rate<R: FusionRing>(ring: &R, mu: &Measure) -> f64 {
    mu.iter()
        .map(|(r, w)| w * ring.cdim(r) as f64 / ring.qdim(r))
        .sum()
}

/// Reachability result of [`is_generating`].
#[derive(Debug, Clone)]
pub struct GeneratingReport {
    pub generating: bool,
    /// First step count at which each reached label gets positive mass.
    pub witnesses: BTreeMap<u32, u32>,
}

/// Breadth-first reachability of every label in the window from the unit
/// under positive p_mu steps. The search runs on a slightly enlarged working
/// set so paths may overshoot the window and come back.
pub fn is_generating<R: FusionRing>(ring: &R, mu: &Measure, window: u32) -> GeneratingReport {
    let slack = 2 * mu.max_label();
    let bound = window.saturating_add(slack);
    let mut witnesses: BTreeMap<u32, u32> = BTreeMap::new();
    witnesses.insert(0, 0);
    let mut frontier = vec![0u32];
    let mut n = 0u32;
    while !frontier.is_empty() {
        n += 1;
        let mut next = Vec::new();
        for &u in &frontier {
            for (r, _) in mu.iter() {
                for t in ring.fusion_support(r, u) {
                    if t <= bound && !witnesses.contains_key(&t) {
                        witnesses.insert(t, n);
                        next.push(t);
                    }
                }
            }
        }
        frontier = next;
    }
    let generating = ring
        .labels_upto(window)
        .iter()
        .all(|l| witnesses.contains_key(l));
    let witnesses = witnesses.into_iter().filter(|&(l, _)| l <= window).collect();
    GeneratingReport {
        generating,
        witnesses,
    }
}

/// Truncated Green function g(s, t) = sum_{n=0}^{n_max} p^n(s, t) with its
/// geometric tail bound. Requires the lambda < 1 transience certificate.
pub fn green_classical<R: FusionRing>(
    ring: &R,
    mu: &Measure,
    s: u32,
    t: u32,
    n_max: u32,
) -> Result<(f64, f64)> {
    let lambda = lambda_rate(ring, mu);
    if lambda >= 1.0 {
        return Err(Error::NotTransient(lambda));
    }
    let powers = p_powers_from(ring, mu, s, n_max);
    let value: f64 = powers.iter().map(|d| d.get(&t).copied().unwrap_or(0.0)).sum();
    let tail = green_tail_bound(ring, lambda, s, t, n_max);
    Ok((value, tail))
}

/// Tail bound (d_t/d_s)(dim_s/dim_t) lambda^{n_max+1} / (1 - lambda).
pub fn green_tail_bound<R: FusionRing>(ring: &R, lambda: f64, s: u32, t: u32, n_max: u32) -> f64 {
    (ring.qdim(t) / ring.qdim(s)) * (ring.cdim(s) as f64 / ring.cdim(t) as f64)
        * lambda.powi(n_max as i32 + 1)
        / (1.0 - lambda)
}

/// Multiplicity of t in the iterated fusion of the given labels.
pub fn multiplicity_chain<R: FusionRing>(ring: &R, labels: &[u32], t: u32) -> u64 {
    let mut counts: BTreeMap<u32, u64> = BTreeMap::new();
    match labels.split_first() {
        None => {
            return if t == 0 { 1 } else { 0 };
        }
        Some((&first, rest)) => {
            counts.insert(first, 1);
            for &l in rest {
                let mut next: BTreeMap<u32, u64> = BTreeMap::new();
                for (&u, &cnt) in &counts {
                    for v in ring.fusion_support(u, l) {
                        *next.entry(v).or_insert(0) += cnt * ring.multiplicity(u, l, v);
                    }
                }
                counts = next;
            }
        }
    }
    counts.get(&t).copied().unwrap_or(0)
}

/// Monte Carlo estimate of the Green values g(start, target) for several
/// targets, with an absorbing cutoff label and a seedable generator.
/// Returns (estimate, standard error) per target.
pub fn green_monte_carlo<R: FusionRing>(
    ring: &R,
    mu: &Measure,
    start: u32,
    targets: &[u32],
    paths: u64,
    cutoff: u32,
    seed: u64,
) -> Vec<(f64, f64)> {
    let max_step = mu.max_label();
    let bound = cutoff + max_step;
    // precompute cumulative rows for all labels that can appear pre-absorption
    let rows: Vec<Vec<(f64, u32)>> = (0..=bound)
        .map(|u| {
            let row = p_row(ring, mu, u);
            let mut cum = Vec::with_capacity(row.len());
            let mut acc = 0.0;
            for (t, p) in row {
                acc += p;
                cum.push((acc, t));
            }
            cum
        })
        .collect();
    let max_steps = 200_000u64;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut sums = vec![0.0f64; targets.len()];
    let mut sumsqs = vec![0.0f64; targets.len()];
    let mut visits = vec![0u64; targets.len()];
    for _ in 0..paths {
        for v in visits.iter_mut() {
            *v = 0;
        }
        let mut pos = start;
        let mut steps = 0u64;
        loop {
            for (i, &t) in targets.iter().enumerate() {
                if pos == t {
                    visits[i] += 1;
                }
            }
            if pos > cutoff || steps >= max_steps {
                break;
            }
            let z: f64 = rng.gen();
            let row = &rows[pos as usize];
            let mut chosen = row.last().map(|&(_, t)| t).unwrap_or(pos);
            for &(cum, t) in row {
                if z <= cum {
                    chosen = t;
                    break;
                }
            }
            pos = chosen;
            steps += 1;
        }
        for (i, &v) in visits.iter().enumerate() {
            let x = v as f64;
            sums[i] += x;
            sumsqs[i] += x * x;
        }
    }
    let n = paths as f64;
    targets
        .iter()
        .enumerate()
        .map(|(i, _)| {
            let mean = sums[i] / n;
            let var = (sumsqs[i] - sums[i] * sums[i] / n) / (n - 1.0);
            (mean, (var / n).sqrt())
        })
        .collect()
}

/// One Green-table entry of a [`ChainReport`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GreenEntry {
    pub s: u32,
    pub t: u32,
    pub value: f64,
    pub tail_bound: f64,
}

/// Summary of the classical chain diagnostics for one measure.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChainReport {
    pub lambda: f64,
    pub generating: bool,
    pub witnesses: BTreeMap<u32, u32>,
    pub transient_sufficient: bool,
    pub green_table: Vec<GreenEntry>,
}

/// Runs the full classical diagnostics on a window of start/target labels.
pub fn chain_report<R: FusionRing>(
    ring: &R,
    mu: &Measure,
    window: u32,
    n_max: u32,
) -> Result<ChainReport> {
    let lambda = lambda_rate(ring, mu);
    let gen = is_generating(ring, mu, window);
    let transient_sufficient = lambda < 1.0;
    let mut green_table = Vec::new();
    if transient_sufficient {
        for s in ring.labels_upto(window) {
            let powers = p_powers_from(ring, mu, s, n_max);
            for t in ring.labels_upto(window) {
                let value: f64 = powers.iter().map(|d| d.get(&t).copied().unwrap_or(0.0)).sum();
                green_table.push(GreenEntry {
                    s,
                    t,
                    value,
                    tail_bound: green_tail_bound(ring, lambda, s, t, n_max),
                });
            }
        }
    }
    Ok(ChainReport {
        lambda,
        generating: gen.generating,
        witnesses: gen.witnesses,
        transient_sufficient,
        green_table,
    })
}
