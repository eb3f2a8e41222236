//! Primal-dual interior-point method with Nesterov-Todd scaling for the
//! basis-pursuit cone program
//!
//! `min sum_j t_j  s.t.  sum_j a_j x_j = b,  |x_j| <= t_j`,
//!
//! one three-dimensional second-order cone `(t_j, Re x_j, Im x_j)` per column.

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::columns::{spd_solve, RealColumns, CHUNK};
use super::IpmOutcome;

const STEP_FRACTION: f64 = 0.99;
const INNER_TOL: f64 = 1e-11;

type V3 = [f64; 3];

#[inline]
fn dot3(a: &V3, b: &V3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// `x^T J x` computed without cancellation.
#[inline]
fn jnorm2(x: &V3) -> f64 {
    let t = (x[1] * x[1] + x[2] * x[2]).sqrt();
    (x[0] - t) * (x[0] + t)
}

#[inline]
fn arrow(u: &V3, v: &V3) -> V3 {
    [dot3(u, v), u[0] * v[1] + v[0] * u[1], u[0] * v[2] + v[0] * u[2]]
}

/// Solves `lambda o q = r` for `q`.
#[inline]
fn arrow_solve(l: &V3, r: &V3) -> V3 {
    let det = jnorm2(l);
    let q0 = (l[0] * r[0] - l[1] * r[1] - l[2] * r[2]) / det;
    [q0, (r[1] - q0 * l[1]) / l[0], (r[2] - q0 * l[2]) / l[0]]
}

/// Nesterov-Todd scaling `W = beta [[w0, w1^T], [w1, I + w1 w1^T / (1 + w0)]]`
/// with `W z = W^{-1} s`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Nt {
    beta: f64,
    w: V3,
}

impl Nt {
    pub(crate) fn new(z: &V3, s: &V3) -> Nt {
        let zn = jnorm2(z).sqrt();
        let sn = jnorm2(s).sqrt();
        let zb = [z[0] / zn, z[1] / zn, z[2] / zn];
        let sb = [s[0] / sn, s[1] / sn, s[2] / sn];
        let gamma = ((1.0 + dot3(&zb, &sb)) / 2.0).sqrt();
        let w = [
            (sb[0] + zb[0]) / (2.0 * gamma),
            (sb[1] - zb[1]) / (2.0 * gamma),
            (sb[2] - zb[2]) / (2.0 * gamma),
        ];
        Nt { beta: (sn / zn).sqrt(), w }
    }

    #[inline]
    fn apply(&self, v: &V3, inverse: bool) -> V3 {
        let w = &self.w;
        let sgn = if inverse { -1.0 } else { 1.0 };
        let wv = w[1] * v[1] + w[2] * v[2];
        let c = wv / (1.0 + w[0]) + sgn * v[0];
        let f = if inverse { 1.0 / self.beta } else { self.beta };
        [f * (w[0] * v[0] + sgn * wv), f * (v[1] + c * w[1]), f * (v[2] + c * w[2])]
    }

    #[inline]
    pub(crate) fn w(&self, v: &V3) -> V3 {
        self.apply(v, false)
    }

    #[inline]
    pub(crate) fn winv(&self, v: &V3) -> V3 {
        self.apply(v, true)
    }

    #[inline]
    fn winv2(&self, v: &V3) -> V3 {
        self.winv(&self.winv(v))
    }

    /// Lower-right 2x2 block of `W^{-2}` as `(h11, h12, h22)`.
    fn winv2_block(&self) -> (f64, f64, f64) {
        let c1 = self.winv2(&[0.0, 1.0, 0.0]);
        let c2 = self.winv2(&[0.0, 0.0, 1.0]);
        (c1[1], 0.5 * (c1[2] + c2[1]), c2[2])
    }
}

/// Largest `alpha` with `x + alpha d` in the cone (infinity if unbounded).
fn cone_step(x: &V3, d: &V3) -> f64 {
    let c = jnorm2(x).max(0.0);
    let a = jnorm2(d);
    let b = x[0] * d[0] - x[1] * d[1] - x[2] * d[2];
    let mut best = f64::INFINITY;
    if d[0] < 0.0 {
        best = -x[0] / d[0];
    }
    let scale = a.abs().max(b.abs()).max(c);
    if scale == 0.0 {
        return best;
    }
    if a.abs() <= 1e-15 * scale {
        if b < 0.0 {
            best = best.min(-c / (2.0 * b));
        }
        return best;
    }
    let disc = b * b - a * c;
    if disc < 0.0 {
        return best;
    }
    let sq = disc.sqrt();
    let qv = -(b + b.signum() * sq);
    for root in [qv / a, if qv != 0.0 { c / qv } else { f64::INFINITY }] {
        if root > 0.0 {
            best = best.min(root);
        }
    }
    best
}

/// `(g1 . y, g2 . y)` for column `(ar, ai)`: the real and imaginary parts of `a^H y`.
#[inline]
fn gty(col: &[f64], y: &[f64], r: usize) -> (f64, f64) {
    let (ar, ai) = col.split_at(r);
    let (yr, yi) = y.split_at(r);
    let mut re = 0.0;
    let mut im = 0.0;
    for k in 0..r {
        re += ar[k] * yr[k] + ai[k] * yi[k];
        im += ar[k] * yi[k] - ai[k] * yr[k];
    }
    (re, im)
}

/// `acc += g1 u + g2 v`, i.e. the real form of `a (u + i v)`.
#[inline]
fn g_add(col: &[f64], u: f64, v: f64, acc: &mut [f64], r: usize) {
    let (ar, ai) = col.split_at(r);
    for k in 0..r {
        acc[k] += ar[k] * u - ai[k] * v;
        acc[r + k] += ai[k] * u + ar[k] * v;
    }
}

fn all_gty(cols: &RealColumns, y: &[f64]) -> Vec<(f64, f64)> {
    let r = cols.width() / 2;
    let mut out = vec![(0.0, 0.0); cols.len()];
    out.par_chunks_mut(CHUNK).enumerate().for_each(|(k, o)| {
        let start = k * CHUNK;
        cols.for_range(start..start + o.len(), |j, a| o[j - start] = gty(a, y, r));
    });
    out
}

fn g_times(cols: &RealColumns, uv: &[(f64, f64)]) -> Vec<f64> {
    let r = cols.width() / 2;
    cols.reduce(2 * r, |range, acc| {
        cols.for_range(range, |j, a| {
            let (u, v) = uv[j];
            if u != 0.0 || v != 0.0 {
                g_add(a, u, v, acc, r);
            }
        })
    })
}

fn normal_matrix(cols: &RealColumns, h: &[(f64, f64, f64)]) -> DMatrix<f64> {
    let w = cols.width();
    let r = w / 2;
    let flat = cols.reduce(w * w, |range, acc| {
        let mut g1 = vec![0.0; w];
        let mut g2 = vec![0.0; w];
        cols.for_range(range, |j, a| {
            let (h11, h12, h22) = h[j];
            g1.copy_from_slice(a);
            for k in 0..r {
                g2[k] = -a[r + k];
                g2[r + k] = a[k];
            }
            for u in 0..w {
                let c1 = h11 * g1[u] + h12 * g2[u];
                let c2 = h12 * g1[u] + h22 * g2[u];
                let row = &mut acc[u * w..u * w + w];
                for v in u..w {
                    row[v] += c1 * g1[v] + c2 * g2[v];
                }
            }
        });
    });
    DMatrix::from_fn(w, w, |u, v| if u <= v { flat[u * w + v] } else { flat[v * w + u] })
}

pub(crate) fn solve_socp(cols: &RealColumns, b: &[f64], max_iter: usize) -> IpmOutcome {
    let n = cols.len();
    let w = cols.width();

    // Minimum-norm start, shifted into the cone interior.
    let wv = cols.gram_solve(b);
    let x0 = all_gty(cols, &wv);
    let shift = 1.0 + x0.iter().map(|(u, v)| u.hypot(*v)).fold(0.0, f64::max);
    let mut z: Vec<V3> = x0.iter().map(|&(u, v)| [shift, u, v]).collect();
    let mut s: Vec<V3> = vec![[1.0, 0.0, 0.0]; n];
    let mut y = vec![0.0; w];

    let bnorm = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut iterations = 0;
    let mut converged = false;
    let mut stalled = 0;
    // Iterates past the attainable accuracy can break down; keep the best one.
    let mut best = (f64::INFINITY, z.clone(), y.clone());
    for it in 0..max_iter {
        iterations = it + 1;
        let gy = all_gty(cols, &y);
        let uv: Vec<(f64, f64)> = z.iter().map(|c| (c[1], c[2])).collect();
        let gz = g_times(cols, &uv);
        let rp: Vec<f64> = b.iter().zip(&gz).map(|(a, c)| a - c).collect();
        let rd: Vec<V3> = (0..n).map(|j| [1.0 - s[j][0], -gy[j].0 - s[j][1], -gy[j].1 - s[j][2]]).collect();
        let gap: f64 = z.iter().zip(&s).map(|(a, c)| dot3(a, c)).sum();
        let mu = gap / n as f64;
        let pres = rp.iter().fold(0.0f64, |m, v| m.max(v.abs())) / (1.0 + bnorm);
        let dres = rd.iter().flat_map(|v| v.iter()).fold(0.0f64, |m, v| m.max(v.abs()));
        let pobj: f64 = z.iter().map(|c| c[0]).sum();
        let dobj: f64 = b.iter().zip(&y).map(|(a, c)| a * c).sum();
        let rgap = (pobj - dobj).abs() / pobj.abs().max(1.0);
        // `f64::max` drops NaN, so test the sums that propagate it.
        if !(pobj.is_finite() && dobj.is_finite() && mu.is_finite()) {
            break;
        }
        let merit = pres.max(dres).max(rgap);
        if merit < best.0 {
            best = (merit, z.clone(), y.clone());
        }
        if merit < INNER_TOL {
            converged = true;
            break;
        }

        let nt: Vec<Nt> = (0..n).map(|j| Nt::new(&z[j], &s[j])).collect();
        let lam: Vec<V3> = (0..n).map(|j| nt[j].w(&z[j])).collect();
        let h: Vec<(f64, f64, f64)> = nt.iter().map(|t| t.winv2_block()).collect();
        let m = normal_matrix(cols, &h);

        let solve = |rc: &[V3]| -> (Vec<V3>, Vec<V3>, Vec<f64>) {
            let qv: Vec<V3> = (0..n).map(|j| arrow_solve(&lam[j], &rc[j])).collect();
            let t: Vec<V3> = (0..n)
                .map(|j| {
                    let a = nt[j].winv(&qv[j]);
                    let c = nt[j].winv2(&rd[j]);
                    [a[0] - c[0], a[1] - c[1], a[2] - c[2]]
                })
                .collect();
            let tuv: Vec<(f64, f64)> = t.iter().map(|c| (c[1], c[2])).collect();
            let gt = g_times(cols, &tuv);
            let rhs: Vec<f64> = rp.iter().zip(&gt).map(|(a, c)| a - c).collect();
            let dy = spd_solve(&m, &rhs);
            let gdy = all_gty(cols, &dy);
            let ds: Vec<V3> = (0..n).map(|j| [rd[j][0], rd[j][1] - gdy[j].0, rd[j][2] - gdy[j].1]).collect();
            let dz: Vec<V3> = (0..n)
                .map(|j| {
                    let a = nt[j].winv(&qv[j]);
                    let c = nt[j].winv2(&ds[j]);
                    [a[0] - c[0], a[1] - c[1], a[2] - c[2]]
                })
                .collect();
            (dz, ds, dy)
        };

        let rc_aff: Vec<V3> = lam.iter().map(|l| {
            let ll = arrow(l, l);
            [-ll[0], -ll[1], -ll[2]]
        }).collect();
        let (dza, dsa, _) = solve(&rc_aff);
        let mut alpha = 1.0f64;
        for j in 0..n {
            alpha = alpha.min(cone_step(&z[j], &dza[j])).min(cone_step(&s[j], &dsa[j]));
        }
        let mut gap_aff = 0.0;
        for j in 0..n {
            let zz = [z[j][0] + alpha * dza[j][0], z[j][1] + alpha * dza[j][1], z[j][2] + alpha * dza[j][2]];
            let ss = [s[j][0] + alpha * dsa[j][0], s[j][1] + alpha * dsa[j][1], s[j][2] + alpha * dsa[j][2]];
            gap_aff += dot3(&zz, &ss);
        }
        let sigma = (gap_aff / gap).clamp(0.0, 1.0).powi(3);

        let rc: Vec<V3> = (0..n)
            .map(|j| {
                let ll = arrow(&lam[j], &lam[j]);
                let corr = arrow(&nt[j].winv(&dsa[j]), &nt[j].w(&dza[j]));
                [sigma * mu - ll[0] - corr[0], -ll[1] - corr[1], -ll[2] - corr[2]]
            })
            .collect();
        let (dz, ds, dy) = solve(&rc);
        let mut amax = f64::INFINITY;
        for j in 0..n {
            amax = amax.min(cone_step(&z[j], &dz[j])).min(cone_step(&s[j], &ds[j]));
        }
        let alpha = (STEP_FRACTION * amax).min(1.0);
        for j in 0..n {
            for k in 0..3 {
                z[j][k] += alpha * dz[j][k];
                s[j][k] += alpha * ds[j][k];
            }
        }
        for (a, c) in y.iter_mut().zip(&dy) {
            *a += alpha * c;
        }
        if alpha < 1e-10 {
            stalled += 1;
            if stalled >= 3 {
                break;
            }
        } else {
            stalled = 0;
        }
    }
    let (_, z, y) = best;
    IpmOutcome {
        x_re: z.iter().map(|c| c[1]).collect(),
        x_im: Some(z.iter().map(|c| c[2]).collect()),
        y,
        iterations,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nt_scaling_identity() {
        let z = [2.0, 0.3, -1.1];
        let s = [1.5, -0.7, 0.2];
        let nt = Nt::new(&z, &s);
        let wz = nt.w(&z);
        let ws = nt.winv(&s);
        for k in 0..3 {
            assert!((wz[k] - ws[k]).abs() < 1e-12, "{wz:?} vs {ws:?}");
        }
        let back = nt.winv(&nt.w(&[0.4, 0.1, -0.3]));
        assert!((back[0] - 0.4).abs() < 1e-12 && (back[2] + 0.3).abs() < 1e-12);
    }

    #[test]
    fn arrow_solve_inverts_product() {
        let l = [2.0, 0.5, -0.4];
        let q = [0.3, -1.0, 0.7];
        let r = arrow(&l, &q);
        let back = arrow_solve(&l, &r);
        for k in 0..3 {
            assert!((back[k] - q[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn cone_step_hits_boundary() {
        let x = [1.0, 0.0, 0.0];
        let d = [0.0, 1.0, 0.0];
        assert!((cone_step(&x, &d) - 1.0).abs() < 1e-12);
        let d = [1.0, 0.0, 0.0];
        assert!(cone_step(&x, &d).is_infinite());
    }
}
