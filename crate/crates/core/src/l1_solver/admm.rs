//! Operator-splitting basis pursuit: alternating projection onto the affine
//! constraint set (through the cached factorization of `A A^H`) and the
//! l1 proximal map.

use rayon::prelude::*;

use super::columns::{RealColumns, CHUNK};
use super::IpmOutcome;

/// `A^H y` per column as `(re, im)`.
pub(crate) fn adjoint(cols: &RealColumns, y: &[f64]) -> Vec<(f64, f64)> {
    let w = cols.width();
    let real = cols.real;
    let r = if real { w } else { w / 2 };
    let mut out = vec![(0.0, 0.0); cols.len()];
    out.par_chunks_mut(CHUNK).enumerate().for_each(|(k, o)| {
        let start = k * CHUNK;
        cols.for_range(start..start + o.len(), |j, a| {
            o[j - start] = if real {
                (a.iter().zip(y).map(|(u, v)| u * v).sum(), 0.0)
            } else {
                let mut re = 0.0;
                let mut im = 0.0;
                for t in 0..r {
                    re += a[t] * y[t] + a[r + t] * y[r + t];
                    im += a[t] * y[r + t] - a[r + t] * y[t];
                }
                (re, im)
            };
        });
    });
    out
}

/// `A x` in compressed real coordinates.
pub(crate) fn forward(cols: &RealColumns, x: &[(f64, f64)]) -> Vec<f64> {
    let w = cols.width();
    let real = cols.real;
    cols.reduce(w, |range, acc| {
        cols.for_range(range, |j, a| {
            let (u, v) = x[j];
            if u == 0.0 && v == 0.0 {
                return;
            }
            if real {
                for (t, c) in acc.iter_mut().zip(a) {
                    *t += u * c;
                }
            } else {
                let r = w / 2;
                for t in 0..r {
                    acc[t] += a[t] * u - a[r + t] * v;
                    acc[r + t] += a[r + t] * u + a[t] * v;
                }
            }
        })
    })
}

pub(crate) fn solve_admm(cols: &RealColumns, b: &[f64], max_iter: usize, tol: f64) -> IpmOutcome {
    let n = cols.len();
    let project = |v: &[(f64, f64)]| -> Vec<(f64, f64)> {
        let av = forward(cols, v);
        let diff: Vec<f64> = av.iter().zip(b).map(|(a, c)| a - c).collect();
        let g = cols.gram_solve(&diff);
        let corr = adjoint(cols, &g);
        v.iter().zip(&corr).map(|(a, c)| (a.0 - c.0, a.1 - c.1)).collect()
    };
    let mut z = project(&vec![(0.0, 0.0); n]);
    let mut u = vec![(0.0, 0.0); n];
    let l1_0: f64 = z.iter().map(|(a, c)| a.hypot(*c)).sum();
    let mut rho = (n as f64).sqrt() / l1_0.max(1e-12);
    let mut iterations = 0;
    let mut converged = false;
    for it in 0..max_iter {
        iterations = it + 1;
        let v: Vec<(f64, f64)> = z.iter().zip(&u).map(|(a, c)| (a.0 - c.0, a.1 - c.1)).collect();
        let x = project(&v);
        let kappa = 1.0 / rho;
        let z_old = std::mem::take(&mut z);
        z = x
            .iter()
            .zip(&u)
            .map(|(a, c)| {
                let (wr, wi) = (a.0 + c.0, a.1 + c.1);
                let m = wr.hypot(wi);
                if m <= kappa {
                    (0.0, 0.0)
                } else {
                    let f = 1.0 - kappa / m;
                    (wr * f, wi * f)
                }
            })
            .collect();
        for j in 0..n {
            u[j].0 += x[j].0 - z[j].0;
            u[j].1 += x[j].1 - z[j].1;
        }
        if it % 10 == 9 {
            let pr = x.iter().zip(&z).map(|(a, c)| (a.0 - c.0).hypot(a.1 - c.1)).fold(0.0, f64::max);
            let dr = rho * z.iter().zip(&z_old).map(|(a, c)| (a.0 - c.0).hypot(a.1 - c.1)).fold(0.0, f64::max);
            if pr < tol && dr < tol {
                converged = true;
                break;
            }
            // Residual balancing.
            if pr > 10.0 * dr {
                rho *= 2.0;
                u.iter_mut().for_each(|c| {
                    c.0 /= 2.0;
                    c.1 /= 2.0;
                });
            } else if dr > 10.0 * pr {
                rho /= 2.0;
                u.iter_mut().for_each(|c| {
                    c.0 *= 2.0;
                    c.1 *= 2.0;
                });
            }
        }
    }
    // Dual from the scaled multiplier: y = (A A^H)^{-1} A (rho u).
    let ru: Vec<(f64, f64)> = u.iter().map(|c| (rho * c.0, rho * c.1)).collect();
    let y = cols.gram_solve(&forward(cols, &ru));
    IpmOutcome {
        x_re: z.iter().map(|c| c.0).collect(),
        x_im: if cols.real { None } else { Some(z.iter().map(|c| c.1).collect()) },
        y,
        iterations,
        converged,
    }
}
