//! Irreducible representations of U_q(su2), the states phi_s, fusion rules,
//! and intertwiner bases decomposing tensor products.
//!
//! The basis of H_s is fixed once and for all as xi_j for j = -s, ..., s in
//! ascending order; k and rho = k^-2 act diagonally in this basis. All spins
//! are multiplicity-free under fusion, so every tensor product H_t (x) H_s
//! decomposes as a direct sum over v = |t-s|, ..., t+s with one isometry each.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use crate::mat::{c, CMat};
use crate::qarith::{QContext, Spin};
use crate::{Error, Result};

/// The generator matrices of one irreducible block.
#[derive(Debug, Clone)]
pub struct IrrepBlock {
    pub s: Spin,
    /// pi_s(k) = diag(q^-j), ascending j.
    pub k: CMat,
    /// pi_s(e); lowers the magnetic index by one.
    pub e: CMat,
    /// pi_s(f); raises the magnetic index by one.
    pub f: CMat,
    /// rho_s = pi_s(k^-2) = diag(q^{2j}).
    pub rho: CMat,
    /// Diagonal of rho_s.
    pub rho_diag: Vec<f64>,
    /// Diagonal of rho_s^-1 (the state weight).
    pub rho_inv_diag: Vec<f64>,
    pub dim: usize,
    pub qdim: f64,
}

/// Builds the block of spin s with the standard raising/lowering coefficients.
pub fn irrep(ctx: QContext, s: Spin) -> IrrepBlock {
    let d = s.dim();
    let ts = s.twice() as i64;
    let mut k = CMat::zeros(d, d);
    let mut e = CMat::zeros(d, d);
    let mut f = CMat::zeros(d, d);
    let mut rho = CMat::zeros(d, d);
    let mut rho_diag = vec![0.0; d];
    let mut rho_inv_diag = vec![0.0; d];
    for (idx, tj) in s.magnetic_indices().enumerate() {
        k[(idx, idx)] = c(ctx.q_pow_half(-tj));
        rho_diag[idx] = ctx.q_pow(tj); // q^{2j}, tj = 2j
        rho_inv_diag[idx] = ctx.q_pow(-tj);
        rho[(idx, idx)] = c(rho_diag[idx]);
        if idx > 0 {
            // e: xi_j -> ([s+j][s-j+1])^{1/2} xi_{j-1}
            let m1 = (ts + tj) / 2;
            let m2 = (ts - tj) / 2 + 1;
            e[(idx - 1, idx)] = c((ctx.q_number(m1) * ctx.q_number(m2)).sqrt());
        }
        if idx + 1 < d {
            // f: xi_j -> ([s-j][s+j+1])^{1/2} xi_{j+1}
            let m1 = (ts - tj) / 2;
            let m2 = (ts + tj) / 2 + 1;
            f[(idx + 1, idx)] = c((ctx.q_number(m1) * ctx.q_number(m2)).sqrt());
        }
    }
    IrrepBlock {
        s,
        k,
        e,
        f,
        rho,
        rho_diag,
        rho_inv_diag,
        dim: d,
        qdim: ctx.quantum_dim(s),
    }
}

/// The state phi_s(x) = Tr(x rho_s^-1) / d_s on B(H_s).
pub fn phi_state(ctx: QContext, s: Spin, x: &CMat) -> Result<Complex64> {
    let d = s.dim();
    if x.shape() != (d, d) {
        return Err(Error::ShapeMismatch {
            twice_s: s.twice(),
            expected: d,
            got: x.shape(),
        });
    }
    let mut t = Complex64::new(0.0, 0.0);
    for (idx, tj) in s.magnetic_indices().enumerate() {
        t += x[(idx, idx)] * ctx.q_pow(-tj);
    }
    Ok(t / ctx.quantum_dim(s))
}

/// Fusion components of U_t (x) U_s: spins |t-s|, |t-s|+1, ..., t+s ascending.
pub fn fusion_components(t: Spin, s: Spin) -> Vec<Spin> {
    let lo = t.twice().abs_diff(s.twice());
    let hi = t.twice() + s.twice();
    (lo..=hi).step_by(2).map(Spin::from_twice).collect()
}

/// Explicit Clebsch-Gordan coefficient C_q(1/2, s, target; eps/2, j, j + eps/2).
///
/// `eps` is the sign of the spin-1/2 magnetic index, `target` is s + 1/2 or
/// s - 1/2 and `twice_j` is the doubled magnetic index in block s.
pub fn cg_half(ctx: QContext, s: Spin, eps: i8, target: Spin, twice_j: i64) -> Result<f64> {
    assert!(eps == 1 || eps == -1, "eps must be +1 or -1");
    let ts = s.twice() as i64;
    let e = eps as i64;
    if twice_j.abs() > ts || (twice_j - ts) % 2 != 0 {
        return Err(Error::IndexOutOfRange {
            twice_s: s.twice(),
            twice_j,
        });
    }
    let tt = target.twice() as i64;
    if (tt - ts).abs() != 1 {
        return Err(Error::InvalidCouplingTarget {
            twice_s: s.twice(),
            twice_target: target.twice(),
        });
    }
    // resulting index j + eps/2 must fit in the target block
    if (twice_j + e).abs() > tt {
        return Err(Error::IndexOutOfRange {
            twice_s: target.twice(),
            twice_j: twice_j + e,
        });
    }
    let norm = ctx.q_number(ts + 1);
    let q = ctx.q();
    if tt == ts + 1 {
        // q^{(-eps*s + j)/2} ([s + eps*j + 1]/[2s+1])^{1/2}
        let quarter = twice_j - e * ts; // 4 * exponent
        let num = ctx.q_number((ts + e * twice_j) / 2 + 1);
        Ok(q.powf(quarter as f64 / 4.0) * (num / norm).sqrt())
    } else {
        // -eps q^{(eps*s + j + eps)/2} ([s - eps*j]/[2s+1])^{1/2}
        let quarter = e * ts + twice_j + 2 * e;
        let num = ctx.q_number((ts - e * twice_j) / 2);
        Ok(-(e as f64) * q.powf(quarter as f64 / 4.0) * (num / norm).sqrt())
    }
}

/// One fusion component: the isometry H_v -> H_t (x) H_s.
#[derive(Debug, Clone)]
pub struct IntertwinerComponent {
    pub v: Spin,
    /// Isometry of shape (dim_t * dim_s) x dim_v; column m holds T xi^v_m.
    pub isometry: CMat,
    /// Nonzero entries per column, for sparse application downstream.
    col_nnz: Vec<Vec<(usize, Complex64)>>,
}

impl IntertwinerComponent {
    pub fn col_nonzeros(&self, col: usize) -> &[(usize, Complex64)] {
        &self.col_nnz[col]
    }
}

/// The full decomposition of H_t (x) H_s into irreducible components.
#[derive(Debug, Clone)]
pub struct IntertwinerBasis {
    pub t: Spin,
    pub s: Spin,
    /// Components in ascending spin order, one per fusion component.
    pub components: Vec<IntertwinerComponent>,
}

impl IntertwinerBasis {
    pub fn component(&self, v: Spin) -> Option<&IntertwinerComponent> {
        self.components.iter().find(|comp| comp.v == v)
    }

    /// Projection T_v T_v^* onto the component of spin v.
    pub fn projector(&self, v: Spin) -> Option<CMat> {
        self.component(v)
            .map(|comp| &comp.isometry * comp.isometry.adjoint())
    }
}

/// Relative singular-value threshold for the weight-space kernel.
const KERNEL_SV_THRESHOLD: f64 = 1e-8;

type CacheKey = (u64, u32, u32);
type Cache = Mutex<HashMap<CacheKey, Arc<IntertwinerBasis>>>;

fn cache() -> &'static Cache {
    static CACHE: OnceLock<Cache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Intertwiner basis for the pair (t, s), memoized per (q, t, s).
///
/// Construction: for each component v, the extreme (lowest-weight) vector is
/// the unique unit vector of weight -v annihilated by (pi_t (x) pi_s)(coprod e);
/// the remaining columns follow by laddering with (pi_t (x) pi_s)(coprod f),
/// dividing out the pi_v(f) coefficient at each step. The overall phase is
/// fixed by making the coefficient on the smallest first-leg index real and
/// positive, which reproduces the explicit spin-1/2 coupling formulas.
pub fn intertwiner_basis(ctx: QContext, t: Spin, s: Spin) -> Result<Arc<IntertwinerBasis>> {
    let key = (ctx.q().to_bits(), t.twice(), s.twice());
    let mut guard = cache().lock().expect("intertwiner cache poisoned");
    if let Some(hit) = guard.get(&key) {
        return Ok(hit.clone());
    }
    let built = Arc::new(build_basis(ctx, t, s)?);
    guard.insert(key, built.clone());
    Ok(built)
}

fn build_basis(ctx: QContext, t: Spin, s: Spin) -> Result<IntertwinerBasis> {
    let bt = irrep(ctx, t);
    let bs = irrep(ctx, s);
    let (dt, ds) = (bt.dim, bs.dim);
    let n = dt * ds;

    // doubled weight of each product basis pair, in kron order (t-leg major)
    let tj_t: Vec<i64> = t.magnetic_indices().collect();
    let tj_s: Vec<i64> = s.magnetic_indices().collect();
    let weight_of = |p: usize| tj_t[p / ds] + tj_s[p % ds];
    let members = |w: i64| -> Vec<usize> {
        (0..n).filter(|&p| weight_of(p) == w).collect() // ascending first-leg index
    };

    // coprod(e) and coprod(f) as sparse column actions
    let apply_e = |src: &[Complex64], dst: &mut [Complex64]| {
        for z in dst.iter_mut() {
            *z = Complex64::new(0.0, 0.0);
        }
        for p in 0..n {
            if src[p].norm_sqr() == 0.0 {
                continue;
            }
            let (a, b) = (p / ds, p % ds);
            // e (x) k^-1
            if a > 0 {
                dst[(a - 1) * ds + b] += src[p] * bt.e[(a - 1, a)] / bs.k[(b, b)];
            }
            // k (x) e
            if b > 0 {
                dst[a * ds + b - 1] += src[p] * bt.k[(a, a)] * bs.e[(b - 1, b)];
            }
        }
    };
    let apply_f = |src: &[Complex64], dst: &mut [Complex64]| {
        for z in dst.iter_mut() {
            *z = Complex64::new(0.0, 0.0);
        }
        for p in 0..n {
            if src[p].norm_sqr() == 0.0 {
                continue;
            }
            let (a, b) = (p / ds, p % ds);
            // f (x) k^-1
            if a + 1 < dt {
                dst[(a + 1) * ds + b] += src[p] * bt.f[(a + 1, a)] / bs.k[(b, b)];
            }
            // k (x) f
            if b + 1 < ds {
                dst[a * ds + b + 1] += src[p] * bt.k[(a, a)] * bs.f[(b + 1, b)];
            }
        }
    };

    // Components are built in descending spin order and every ladder vector is
    // deflated against the already-built higher components at its weight.
    // Ladder errors along higher components would otherwise grow: their f
    // coefficients exceed the current component's normalization.
    let mut built_per_weight: HashMap<i64, Vec<Vec<Complex64>>> = HashMap::new();
    let deflate = |vec: &mut Vec<Complex64>, higher: Option<&Vec<Vec<Complex64>>>| {
        if let Some(list) = higher {
            for u in list {
                let mut inner = Complex64::new(0.0, 0.0);
                for (a, b) in u.iter().zip(vec.iter()) {
                    inner += a.conj() * b;
                }
                for (a, b) in u.iter().zip(vec.iter_mut()) {
                    *b -= a * inner;
                }
            }
        }
    };

    let mut components = Vec::new();
    for v in fusion_components(t, s).into_iter().rev() {
        let tv = v.twice() as i64;
        let cols = members(-tv);
        let rows = members(-tv - 2);
        let nw = cols.len();

        // lowest-weight vector: kernel of coprod(e) restricted to weight -v
        let coords = weight_kernel(&apply_e, &cols, &rows, n, t, s, v)?;

        let mut vec = vec![Complex64::new(0.0, 0.0); n];
        for (ci, &p) in cols.iter().enumerate() {
            vec[p] = coords[ci];
        }
        deflate(&mut vec, built_per_weight.get(&(-tv)));
        // phase: smallest first-leg index carries a positive real coefficient
        let anchor = vec[cols[0]];
        if anchor.norm() < 1e-12 {
            return Err(Error::DegenerateKernel {
                twice_t: t.twice(),
                twice_s: s.twice(),
                twice_v: v.twice(),
                found: nw,
            });
        }
        let phase = anchor.conj() / anchor.norm();
        let nrm = vec.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in vec.iter_mut() {
            *z = *z * phase / nrm;
        }

        // ladder up: column for m+1 is coprod(f) column(m) / ([v-m][v+m+1])^{1/2}
        let dv = v.dim();
        let mut isometry = CMat::zeros(n, dv);
        for (p, z) in vec.iter().enumerate() {
            isometry[(p, 0)] = *z;
        }
        built_per_weight.entry(-tv).or_default().push(vec.clone());
        let mut cur = vec;
        let mut next = vec![Complex64::new(0.0, 0.0); n];
        for col in 0..dv - 1 {
            let tm = -tv + 2 * col as i64; // doubled m
            apply_f(&cur, &mut next);
            let coeff = (ctx.q_number((tv - tm) / 2) * ctx.q_number((tv + tm) / 2 + 1)).sqrt();
            for z in next.iter_mut() {
                *z /= coeff;
            }
            deflate(&mut next, built_per_weight.get(&(tm + 2)));
            for (p, z) in next.iter().enumerate() {
                isometry[(p, col + 1)] = *z;
            }
            built_per_weight.entry(tm + 2).or_default().push(next.clone());
            std::mem::swap(&mut cur, &mut next);
        }

        let col_nnz = (0..dv)
            .map(|col| {
                (0..n)
                    .filter(|&p| isometry[(p, col)].norm_sqr() > 0.0)
                    .map(|p| (p, isometry[(p, col)]))
                    .collect()
            })
            .collect();
        components.push(IntertwinerComponent {
            v,
            isometry,
            col_nnz,
        });
    }
    components.reverse();
    Ok(IntertwinerBasis { t, s, components })
}

/// Kernel of the restriction of coprod(e) to one weight space, via SVD with
/// relative singular-value thresholding. Expects a one-dimensional kernel.
fn weight_kernel(
    apply_e: &dyn Fn(&[Complex64], &mut [Complex64]),
    cols: &[usize],
    rows: &[usize],
    n: usize,
    t: Spin,
    s: Spin,
    v: Spin,
) -> Result<Vec<Complex64>> {
    let nw = cols.len();
    if nw == 1 && rows.is_empty() {
        return Ok(vec![Complex64::new(1.0, 0.0)]);
    }
    // build the restricted matrix column by column, padded square so the SVD
    // exposes the full null space
    let m = rows.len().max(nw);
    let mut a = CMat::zeros(m, nw);
    let mut src = vec![Complex64::new(0.0, 0.0); n];
    let mut dst = vec![Complex64::new(0.0, 0.0); n];
    for (ci, &p) in cols.iter().enumerate() {
        for z in src.iter_mut() {
            *z = Complex64::new(0.0, 0.0);
        }
        src[p] = Complex64::new(1.0, 0.0);
        apply_e(&src, &mut dst);
        for (ri, &rp) in rows.iter().enumerate() {
            a[(ri, ci)] = dst[rp];
        }
    }
    let svd = a.svd(false, true);
    let sv = &svd.singular_values;
    let smax = sv.iter().fold(0.0_f64, |acc, &x| acc.max(x));
    let vt = svd.v_t.expect("svd V^H requested");
    let null: Vec<usize> = (0..nw)
        .filter(|&i| sv[i] <= KERNEL_SV_THRESHOLD * smax || smax == 0.0)
        .collect();
    if null.len() != 1 {
        return Err(Error::DegenerateKernel {
            twice_t: t.twice(),
            twice_s: s.twice(),
            twice_v: v.twice(),
            found: null.len(),
        });
    }
    let row = null[0];
    Ok((0..nw).map(|j| vt[(row, j)].conj()).collect())
}
