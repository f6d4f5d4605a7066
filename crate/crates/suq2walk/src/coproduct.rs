//! The dual comultiplication on symbolic algebra elements and block
//! operators, and the Markov operator P_mu = (phi_mu (x) id) o coprod.
//!
//! Algebra elements are shallow symbolic sums: scalar coefficients times
//! words in k, k^-1, e, f, optionally multiplied by one of the central
//! spin-dependent scalars lambda, lambdatilde or their inverses. That is
//! exactly enough to express the boundary generators and their relatives.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::chain::Measure;
use crate::mat::{c, eye, kron, CMat};
use crate::qarith::{QContext, Spin};
use crate::repsuq2::{fusion_components, intertwiner_basis, irrep, phi_state};
use crate::{Error, Result};

/// Generators of U_q(su2) usable inside words.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gen {
    K,
    KInv,
    E,
    F,
}

/// Central spin-dependent scalars.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CentralScalar {
    /// pi_s(lambda) = q(q^{2s+1} + q^{-2s-1}) / ((q - q^-1) sqrt([2]_q))
    Lambda,
    LambdaInv,
    /// pi_s(lambdatilde) = q^{-2s}
    LambdaTilde,
    LambdaTildeInv,
}

/// Value of a central scalar in the block of spin s.
pub fn central_value(ctx: QContext, scalar: CentralScalar, s: Spin) -> f64 {
    let q = ctx.q();
    let ts = s.twice() as i64;
    match scalar {
        CentralScalar::Lambda => {
            q * (ctx.q_pow(ts + 1) + ctx.q_pow(-ts - 1)) / ((q - 1.0 / q) * ctx.q_number(2).sqrt())
        }
        CentralScalar::LambdaInv => 1.0 / central_value(ctx, CentralScalar::Lambda, s),
        CentralScalar::LambdaTilde => ctx.q_pow(-ts),
        CentralScalar::LambdaTildeInv => ctx.q_pow(ts),
    }
}

/// One term: coefficient * central(s) * product of the word's generators.
#[derive(Debug, Clone)]
pub struct Term {
    pub coeff: Complex64,
    pub word: Vec<Gen>,
    pub central: Option<CentralScalar>,
}

/// A finite sum of terms; evaluable in every block.
#[derive(Debug, Clone)]
pub struct AlgebraElement {
    pub terms: Vec<Term>,
}

impl AlgebraElement {
    /// The unit (empty word, coefficient one).
    pub fn identity() -> Self {
        AlgebraElement {
            terms: vec![Term {
                coeff: c(1.0),
                word: Vec::new(),
                central: None,
            }],
        }
    }

    /// A single scaled word.
    pub fn word(coeff: f64, word: &[Gen]) -> Self {
        AlgebraElement {
            terms: vec![Term {
                coeff: c(coeff),
                word: word.to_vec(),
                central: None,
            }],
        }
    }

    /// A central scalar alone.
    pub fn central(scalar: CentralScalar) -> Self {
        AlgebraElement {
            terms: vec![Term {
                coeff: c(1.0),
                word: Vec::new(),
                central: Some(scalar),
            }],
        }
    }

    /// Multiplies every term by the given central scalar.
    pub fn with_central(mut self, scalar: CentralScalar) -> Self {
        for term in &mut self.terms {
            assert!(term.central.is_none(), "term already carries a central factor");
            term.central = Some(scalar);
        }
        self
    }

    pub fn add(mut self, other: AlgebraElement) -> Self {
        self.terms.extend(other.terms);
        self
    }

    pub fn scale(mut self, factor: f64) -> Self {
        for term in &mut self.terms {
            term.coeff *= factor;
        }
        self
    }

    pub fn has_central(&self) -> bool {
        self.terms.iter().any(|t| t.central.is_some())
    }
}

/// pi_s(a) as a dense matrix.
pub fn eval_block(ctx: QContext, a: &AlgebraElement, s: Spin) -> CMat {
    let block = irrep(ctx, s);
    let d = block.dim;
    let k_inv = diag_inverse(&block.k);
    let mut out = CMat::zeros(d, d);
    for term in &a.terms {
        let mut m = eye(d);
        for g in &term.word {
            let gm = match g {
                Gen::K => &block.k,
                Gen::KInv => &k_inv,
                Gen::E => &block.e,
                Gen::F => &block.f,
            };
            m = m * gm;
        }
        let mut factor = term.coeff;
        if let Some(cs) = term.central {
            factor *= central_value(ctx, cs, s);
        }
        out += m * factor;
    }
    out
}

fn diag_inverse(k: &CMat) -> CMat {
    let mut out = CMat::zeros(k.nrows(), k.ncols());
    for i in 0..k.nrows() {
        out[(i, i)] = 1.0 / k[(i, i)];
    }
    out
}

/// The image of coprod(a) restricted to one pair of blocks H_t (x) H_s.
#[derive(Debug, Clone)]
pub struct PairOperator {
    pub t: Spin,
    pub s: Spin,
    pub matrix: CMat,
}

/// Hopf route: applies coprod(k) = k (x) k, coprod(e) = e (x) k^-1 + k (x) e,
/// coprod(f) = f (x) k^-1 + k (x) f multiplicatively over each word.
/// Refuses elements with central factors.
pub fn coproduct_pair_word(
    ctx: QContext,
    a: &AlgebraElement,
    t: Spin,
    s: Spin,
) -> Result<PairOperator> {
    if a.has_central() {
        return Err(Error::UnsupportedElement);
    }
    let bt = irrep(ctx, t);
    let bs = irrep(ctx, s);
    let kt_inv = diag_inverse(&bt.k);
    let ks_inv = diag_inverse(&bs.k);
    let n = bt.dim * bs.dim;
    let pair_gen = |g: Gen| -> CMat {
        match g {
            Gen::K => kron(&bt.k, &bs.k),
            Gen::KInv => kron(&kt_inv, &ks_inv),
            Gen::E => kron(&bt.e, &ks_inv) + kron(&bt.k, &bs.e),
            Gen::F => kron(&bt.f, &ks_inv) + kron(&bt.k, &bs.f),
        }
    };
    let mut out = CMat::zeros(n, n);
    for term in &a.terms {
        let mut m = eye(n);
        for &g in &term.word {
            m = m * pair_gen(g);
        }
        out += m * term.coeff;
    }
    Ok(PairOperator { t, s, matrix: out })
}

/// Spectral route: coprod(a)|_{t,s} = sum_v T_v pi_v(a) T_v^*.
/// Central factors are exact here since pi_v(central) is scalar.
pub fn coproduct_pair(ctx: QContext, a: &AlgebraElement, t: Spin, s: Spin) -> Result<PairOperator> {
    let basis = intertwiner_basis(ctx, t, s)?;
    let n = t.dim() * s.dim();
    let mut out = CMat::zeros(n, n);
    for comp in &basis.components {
        let block = eval_block(ctx, a, comp.v);
        out += &comp.isometry * block * comp.isometry.adjoint();
    }
    Ok(PairOperator { t, s, matrix: out })
}

/// A finitely supported element of the discrete dual: one dense matrix per
/// spin in the support.
#[derive(Debug, Clone, Default)]
pub struct BlockOperator {
    blocks: BTreeMap<Spin, CMat>,
}

impl BlockOperator {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts a block, validating its shape against the spin.
    pub fn insert(&mut self, s: Spin, m: CMat) -> Result<()> {
        let d = s.dim();
        if m.shape() != (d, d) {
            return Err(Error::ShapeMismatch {
                twice_s: s.twice(),
                expected: d,
                got: m.shape(),
            });
        }
        self.blocks.insert(s, m);
        Ok(())
    }

    /// The identity I_s as a single-block operator.
    pub fn identity_at(s: Spin) -> Self {
        let mut out = Self::new();
        out.blocks.insert(s, eye(s.dim()));
        out
    }

    /// The matrix unit m_{ij}^s as a single-block operator.
    pub fn unit_at(s: Spin, i: usize, j: usize) -> Self {
        let d = s.dim();
        assert!(i < d && j < d);
        let mut m = CMat::zeros(d, d);
        m[(i, j)] = c(1.0);
        let mut out = Self::new();
        out.blocks.insert(s, m);
        out
    }

    /// Identity on every spin up to `window` (inclusive, half-integer steps).
    pub fn identity_window(window: Spin) -> Self {
        let mut out = Self::new();
        for twice in 0..=window.twice() {
            let s = Spin::from_twice(twice);
            out.blocks.insert(s, eye(s.dim()));
        }
        out
    }

    pub fn get(&self, s: Spin) -> Option<&CMat> {
        self.blocks.get(&s)
    }

    pub fn support(&self) -> impl Iterator<Item = Spin> + '_ {
        self.blocks.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Spin, &CMat)> {
        self.blocks.iter().map(|(&s, m)| (s, m))
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn max_spin(&self) -> Option<Spin> {
        self.blocks.keys().next_back().copied()
    }

    /// Adds `factor * other` into self, blockwise.
    pub fn add_scaled(&mut self, other: &BlockOperator, factor: Complex64) {
        for (s, m) in other.iter() {
            match self.blocks.get_mut(&s) {
                Some(acc) => *acc += m * factor,
                None => {
                    self.blocks.insert(s, m * factor);
                }
            }
        }
    }

    /// Drops all blocks above the window spin.
    pub fn restrict(&mut self, window: Spin) {
        self.blocks.retain(|s, _| *s <= window);
    }

    /// Largest entry magnitude over all blocks.
    pub fn max_abs(&self) -> f64 {
        self.blocks
            .values()
            .map(crate::mat::max_abs)
            .fold(0.0, f64::max)
    }

    /// Operator norm: the largest block spectral norm.
    pub fn op_norm(&self) -> f64 {
        self.blocks
            .values()
            .map(crate::mat::spectral_norm)
            .fold(0.0, f64::max)
    }
}

/// Applies the Markov operator P_mu = (phi_mu (x) id) o coprod to a finitely
/// supported block operator. Exact: no truncation, the output support is the
/// full fusion image of the input support under the measure's support.
pub fn markov_apply(ctx: QContext, mu: &Measure, x: &BlockOperator) -> BlockOperator {
    let mut out = BlockOperator::new();
    for (v, xv) in x.iter() {
        let dv = v.dim();
        // nonzero entries of this block, scanned once
        let nnz: Vec<(usize, usize, Complex64)> = (0..dv)
            .flat_map(|m| (0..dv).map(move |m2| (m, m2)))
            .filter_map(|(m, m2)| {
                let z = xv[(m, m2)];
                if z.norm_sqr() > 0.0 {
                    Some((m, m2, z))
                } else {
                    None
                }
            })
            .collect();
        if nnz.is_empty() {
            continue;
        }
        for (r_label, w) in mu.iter() {
            let r = Spin::from_twice(r_label);
            let br = irrep(ctx, r);
            let dr = br.dim;
            // state weights of phi_r on the left leg
            let weights: Vec<f64> = br.rho_inv_diag.iter().map(|x| x / br.qdim).collect();
            for t in fusion_components(r, v) {
                let dt = t.dim();
                let basis = intertwiner_basis(ctx, r, t).expect("fusion decomposition");
                let comp = basis.component(v).expect("v lies in fusion(r, t)");
                let acc = out
                    .blocks
                    .entry(t)
                    .or_insert_with(|| CMat::zeros(dt, dt));
                let _ = dr;
                for &(m, m2, zval) in &nnz {
                    for &(p, tz) in comp.col_nonzeros(m) {
                        let a = p / dt;
                        let b = p % dt;
                        let scale = c(w * weights[a]) * tz * zval;
                        for &(p2, tz2) in comp.col_nonzeros(m2) {
                            if p2 / dt == a {
                                acc[(b, p2 % dt)] += scale * tz2.conj();
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

/// The right-invariant Haar weight psi(x) = sum_s d_s Tr(x_s rho_s^-1).
pub fn haar_weight(ctx: QContext, x: &BlockOperator) -> Complex64 {
    let mut total = Complex64::new(0.0, 0.0);
    for (s, m) in x.iter() {
        let ds = ctx.quantum_dim(s);
        for (idx, tj) in s.magnetic_indices().enumerate() {
            total += m[(idx, idx)] * (ds * ctx.q_pow(-tj));
        }
    }
    total
}

/// Transition scalars of the shadow chain read off the quantum route:
/// phi_t(P_mu(I_v)|_t) equals p_mu(t, v).
pub fn shadow_transition(ctx: QContext, mu: &Measure, t: Spin, v: Spin) -> Result<f64> {
    let p = markov_apply(ctx, mu, &BlockOperator::identity_at(v));
    match p.get(t) {
        None => Ok(0.0),
        Some(block) => Ok(phi_state(ctx, t, block)?.re),
    }
}
