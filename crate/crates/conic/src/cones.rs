//! Per-cone primitives: Jordan products, Nesterov-Todd scalings, step lengths.

use nalgebra::{DMatrix, DVector};

use crate::problem::Cone;
use crate::svec::{smat, svec, svec_len};

/// A solver-side cone block: kind plus its row offset in `h - Gx`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Block {
    pub kind: Cone,
    pub offset: usize,
    pub rows: usize,
}

pub(crate) fn layout(cones: &[Cone]) -> Vec<Block> {
    let mut offset = 0;
    cones
        .iter()
        .map(|&kind| {
            let rows = kind.rows();
            let b = Block { kind, offset, rows };
            offset += rows;
            b
        })
        .collect()
}

/// Identity element of the product cone.
pub(crate) fn identity(blocks: &[Block], m: usize) -> DVector<f64> {
    let mut e = DVector::zeros(m);
    for b in blocks {
        match b.kind {
            Cone::NonNeg(d) => e.rows_mut(b.offset, d).fill(1.0),
            Cone::SecondOrder(_) => e[b.offset] = 1.0,
            Cone::Psd(n) => {
                let mut k = b.offset;
                for j in 0..n {
                    e[k] = 1.0;
                    k += n - j;
                }
            }
            Cone::Free(_) => unreachable!("free rows are removed before solving"),
        }
    }
    e
}

/// Jordan product `u ∘ v`.
pub(crate) fn jordan(blocks: &[Block], u: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
    let mut out = DVector::zeros(u.len());
    for b in blocks {
        let us = u.rows(b.offset, b.rows);
        let vs = v.rows(b.offset, b.rows);
        let mut os = out.rows_mut(b.offset, b.rows);
        match b.kind {
            Cone::NonNeg(_) => os.copy_from(&us.component_mul(&vs)),
            Cone::SecondOrder(d) => {
                os[0] = us.dot(&vs);
                for i in 1..d {
                    os[i] = us[0] * vs[i] + vs[0] * us[i];
                }
            }
            Cone::Psd(n) => {
                let um = smat(us.as_slice(), n);
                let vm = smat(vs.as_slice(), n);
                let p = &um * &vm;
                let sym = (&p + p.transpose()) * 0.5;
                os.copy_from(&svec(&sym));
            }
            Cone::Free(_) => unreachable!(),
        }
    }
    out
}

/// Solves `lambda ∘ x = r` for `x`, where `lambda` is an NT-scaled point.
/// PSD blocks of `lambda` are diagonal by construction.
pub(crate) fn jordan_inv(blocks: &[Block], lambda: &DVector<f64>, r: &DVector<f64>) -> DVector<f64> {
    let mut out = DVector::zeros(r.len());
    for b in blocks {
        let ls = lambda.rows(b.offset, b.rows);
        let rs = r.rows(b.offset, b.rows);
        let mut os = out.rows_mut(b.offset, b.rows);
        match b.kind {
            Cone::NonNeg(_) => os.copy_from(&rs.component_div(&ls)),
            Cone::SecondOrder(d) => {
                let l0 = ls[0];
                let l1 = ls.rows(1, d - 1);
                let r1 = rs.rows(1, d - 1);
                let r = l1.norm();
                let det = (l0 - r) * (l0 + r);
                let x0 = (l0 * rs[0] - l1.dot(&r1)) / det;
                os[0] = x0;
                for i in 1..d {
                    os[i] = (rs[i] - x0 * ls[i]) / l0;
                }
            }
            Cone::Psd(n) => {
                let diag = psd_diag(ls.as_slice(), n);
                let mut k = 0;
                for j in 0..n {
                    for i in j..n {
                        os[k] = 2.0 * rs[k] / (diag[i] + diag[j]);
                        k += 1;
                    }
                }
            }
            Cone::Free(_) => unreachable!(),
        }
    }
    out
}

fn psd_diag(v: &[f64], n: usize) -> Vec<f64> {
    let mut d = Vec::with_capacity(n);
    let mut k = 0;
    for j in 0..n {
        d.push(v[k]);
        k += n - j;
    }
    d
}

/// Nesterov-Todd scaling of one block, stored densely (blocks are tiny).
#[derive(Debug, Clone)]
pub(crate) enum BlockScaling {
    /// `W = diag(w)`.
    Diag(DVector<f64>),
    /// Symmetric `W` and its inverse.
    Dense { w: DMatrix<f64>, winv: DMatrix<f64> },
}

/// Scaling `W` with `W z = W^{-T} s = lambda`.
#[derive(Debug, Clone)]
pub(crate) struct Scaling {
    pub blocks: Vec<BlockScaling>,
    pub lambda: DVector<f64>,
}

#[derive(Debug)]
pub(crate) struct NotInterior;

impl Scaling {
    pub fn new(blocks: &[Block], s: &DVector<f64>, z: &DVector<f64>) -> Result<Self, NotInterior> {
        let mut scal = Vec::with_capacity(blocks.len());
        let mut lambda = DVector::zeros(s.len());
        for b in blocks {
            let ss = s.rows(b.offset, b.rows).clone_owned();
            let zs = z.rows(b.offset, b.rows).clone_owned();
            let (bs, lam) = match b.kind {
                Cone::NonNeg(_) => {
                    if ss.iter().chain(zs.iter()).any(|&v| !(v > 0.0)) {
                        return Err(NotInterior);
                    }
                    let w = ss.zip_map(&zs, |a, c| (a / c).sqrt());
                    let lam = ss.zip_map(&zs, |a, c| (a * c).sqrt());
                    (BlockScaling::Diag(w), lam)
                }
                Cone::SecondOrder(d) => soc_scaling(&ss, &zs, d)?,
                Cone::Psd(n) => psd_scaling(&ss, &zs, n)?,
                Cone::Free(_) => unreachable!(),
            };
            lambda.rows_mut(b.offset, b.rows).copy_from(&lam);
            scal.push(bs);
        }
        Ok(Self { blocks: scal, lambda })
    }

    fn apply(&self, blocks: &[Block], x: &DVector<f64>, f: impl Fn(&BlockScaling, &DVector<f64>) -> DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(x.len());
        for (b, sc) in blocks.iter().zip(&self.blocks) {
            let xs = x.rows(b.offset, b.rows).clone_owned();
            out.rows_mut(b.offset, b.rows).copy_from(&f(sc, &xs));
        }
        out
    }

    /// `W x`.
    pub fn w(&self, blocks: &[Block], x: &DVector<f64>) -> DVector<f64> {
        self.apply(blocks, x, |sc, xs| match sc {
            BlockScaling::Diag(w) => xs.component_mul(w),
            BlockScaling::Dense { w, .. } => w * xs,
        })
    }

    /// `W' x`.
    pub fn wt(&self, blocks: &[Block], x: &DVector<f64>) -> DVector<f64> {
        self.apply(blocks, x, |sc, xs| match sc {
            BlockScaling::Diag(w) => xs.component_mul(w),
            BlockScaling::Dense { w, .. } => w.tr_mul(xs),
        })
    }

    /// `W^{-T} x`.
    pub fn winv_t(&self, blocks: &[Block], x: &DVector<f64>) -> DVector<f64> {
        self.apply(blocks, x, |sc, xs| match sc {
            BlockScaling::Diag(w) => xs.component_div(w),
            BlockScaling::Dense { winv, .. } => winv.tr_mul(xs),
        })
    }

    /// `W^{-1} x`.
    pub fn winv(&self, blocks: &[Block], x: &DVector<f64>) -> DVector<f64> {
        self.apply(blocks, x, |sc, xs| match sc {
            BlockScaling::Diag(w) => xs.component_div(w),
            BlockScaling::Dense { winv, .. } => winv * xs,
        })
    }

    /// `W^{-T} G` for a row-partitioned matrix `G`.
    pub fn winv_t_mat(&self, blocks: &[Block], g: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(g.nrows(), g.ncols());
        for (b, sc) in blocks.iter().zip(&self.blocks) {
            let gs = g.rows(b.offset, b.rows);
            match sc {
                BlockScaling::Diag(w) => {
                    for i in 0..b.rows {
                        let inv = 1.0 / w[i];
                        for j in 0..g.ncols() {
                            out[(b.offset + i, j)] = gs[(i, j)] * inv;
                        }
                    }
                }
                BlockScaling::Dense { winv, .. } => {
                    out.rows_mut(b.offset, b.rows).copy_from(&(winv.transpose() * gs));
                }
            }
        }
        out
    }
}

fn soc_scaling(s: &DVector<f64>, z: &DVector<f64>, d: usize) -> Result<(BlockScaling, DVector<f64>), NotInterior> {
    let jnorm = |v: &DVector<f64>| {
        let r = v.rows(1, d - 1).norm();
        (v[0] - r) * (v[0] + r)
    };
    let sj = jnorm(s);
    let zj = jnorm(z);
    if !(s[0] > 0.0 && z[0] > 0.0 && sj > 0.0 && zj > 0.0) {
        return Err(NotInterior);
    }
    let sn = sj.sqrt();
    let zn = zj.sqrt();
    let sbar = s / sn;
    let zbar = z / zn;
    let gamma = ((1.0 + sbar.dot(&zbar)) / 2.0).sqrt();
    // wbar = (sbar + J zbar) / (2 gamma)
    let mut wbar = sbar.clone();
    wbar[0] += zbar[0];
    for i in 1..d {
        wbar[i] -= zbar[i];
    }
    wbar /= 2.0 * gamma;
    let beta = (sn / zn).sqrt();
    let mut v = wbar.clone();
    v[0] += 1.0;
    v /= (2.0 * (wbar[0] + 1.0)).sqrt();

    let mut j = DMatrix::<f64>::identity(d, d);
    for i in 1..d {
        j[(i, i)] = -1.0;
    }
    let vvt = &v * v.transpose();
    let w = (&vvt * 2.0 - &j) * beta;
    let jv = &j * &v;
    let winv = (&jv * jv.transpose() * 2.0 - &j) / beta;
    let lam = &w * z;
    Ok((BlockScaling::Dense { w, winv }, lam))
}

fn psd_scaling(s: &DVector<f64>, z: &DVector<f64>, n: usize) -> Result<(BlockScaling, DVector<f64>), NotInterior> {
    let sm = smat(s.as_slice(), n);
    let zm = smat(z.as_slice(), n);
    let ls = sm.cholesky().ok_or(NotInterior)?.l();
    let lz = zm.cholesky().ok_or(NotInterior)?.l();
    let prod = lz.transpose() * &ls;
    let svd = prod.svd(false, true);
    let vt = svd.v_t.ok_or(NotInterior)?;
    let sig = svd.singular_values;
    if sig.iter().any(|&x| !(x > 0.0)) {
        return Err(NotInterior);
    }
    let v = vt.transpose();
    let mut r = &ls * &v;
    for (jcol, &sv) in sig.iter().enumerate() {
        let f = 1.0 / sv.sqrt();
        r.column_mut(jcol).scale_mut(f);
    }
    let ls_inv = ls.clone().try_inverse().ok_or(NotInterior)?;
    let mut rinv = &vt * ls_inv;
    for (irow, &sv) in sig.iter().enumerate() {
        let f = sv.sqrt();
        rinv.row_mut(irow).scale_mut(f);
    }

    // W(X) = R' X R expressed on svec coordinates.
    let dim = svec_len(n);
    let mut w = DMatrix::zeros(dim, dim);
    let mut winv = DMatrix::zeros(dim, dim);
    let mut basis = vec![0.0; dim];
    for col in 0..dim {
        basis.iter_mut().for_each(|b| *b = 0.0);
        basis[col] = 1.0;
        let e = smat(&basis, n);
        w.set_column(col, &svec(&(r.transpose() * &e * &r)));
        winv.set_column(col, &svec(&(rinv.transpose() * &e * &rinv)));
    }

    let mut lam = DVector::zeros(dim);
    let mut k = 0;
    for j in 0..n {
        lam[k] = sig[j];
        k += n - j;
    }
    Ok((BlockScaling::Dense { w, winv }, lam))
}

/// Largest `alpha <= cap` keeping `x + alpha d` inside the cone (boundary allowed).
pub(crate) fn max_step(blocks: &[Block], x: &DVector<f64>, d: &DVector<f64>, cap: f64) -> f64 {
    let mut alpha = cap;
    for b in blocks {
        let xs = x.rows(b.offset, b.rows);
        let ds = d.rows(b.offset, b.rows);
        let a = match b.kind {
            Cone::NonNeg(_) => xs
                .iter()
                .zip(ds.iter())
                .filter(|(_, &di)| di < 0.0)
                .map(|(&xi, &di)| -xi / di)
                .fold(f64::INFINITY, f64::min),
            Cone::SecondOrder(d) => soc_step(xs.as_slice(), ds.as_slice(), d),
            Cone::Psd(n) => psd_step(xs.as_slice(), ds.as_slice(), n),
            Cone::Free(_) => unreachable!(),
        };
        alpha = alpha.min(a);
    }
    alpha.max(0.0)
}

fn soc_step(x: &[f64], d: &[f64], dim: usize) -> f64 {
    // q(a) = (x0 + a d0)^2 - ||x1 + a d1||^2 = qa a^2 + 2 qb a + qc, qc > 0
    let mut qa = d[0] * d[0];
    let mut qb = x[0] * d[0];
    let mut qc = x[0] * x[0];
    for i in 1..dim {
        qa -= d[i] * d[i];
        qb -= x[i] * d[i];
        qc -= x[i] * x[i];
    }
    if qc <= 0.0 {
        return 0.0;
    }
    let scale = qa.abs().max(qb.abs()).max(qc);
    if qa.abs() <= 1e-15 * scale {
        // linear: 2 qb a + qc = 0
        let lin = if qb < 0.0 { -qc / (2.0 * qb) } else { f64::INFINITY };
        return if d[0] < 0.0 { lin.min(-x[0] / d[0]) } else { lin };
    }
    let disc = qb * qb - qa * qc;
    let root = if disc < 0.0 {
        // q never vanishes: the ray stays inside the cone or its negative;
        // starting inside, it stays inside as long as x0 + a d0 > 0
        f64::INFINITY
    } else {
        let sq = disc.sqrt();
        // roots of qa a^2 + 2 qb a + qc
        let t = -(qb + qb.signum() * sq);
        let r1 = t / qa;
        let r2 = if t != 0.0 { qc / t } else { f64::INFINITY };
        [r1, r2]
            .into_iter()
            .filter(|r| *r > 0.0)
            .fold(f64::INFINITY, f64::min)
    };
    if d[0] < 0.0 {
        root.min(-x[0] / d[0])
    } else {
        root
    }
}

fn psd_step(x: &[f64], d: &[f64], n: usize) -> f64 {
    let xm = smat(x, n);
    let dm = smat(d, n);
    let Some(chol) = xm.cholesky() else {
        return 0.0;
    };
    let l = chol.l();
    let Some(linv) = l.try_inverse() else {
        return 0.0;
    };
    let m = &linv * dm * linv.transpose();
    let m = (&m + m.transpose()) * 0.5;
    let eig = m.symmetric_eigenvalues();
    let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
    if min >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / min
    }
}
