//! Mehrotra predictor-corrector method for the split-variable LP
//! `min sum(p + q)  s.t.  A (p - q) = b,  p, q >= 0`.

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::columns::{spd_solve, RealColumns, CHUNK};
use super::IpmOutcome;

const STEP_FRACTION: f64 = 0.99;
const INNER_TOL: f64 = 1e-11;

pub(crate) fn solve_lp(cols: &RealColumns, b: &[f64], max_iter: usize) -> IpmOutcome {
    let n = cols.len();
    let r = cols.width();

    // Starting point from the minimum-norm solution of [A, -A] z = b.
    let w = cols.gram_solve(b);
    let mut p = vec![0.0; n];
    let mut q = vec![0.0; n];
    at_times(cols, &w, &mut p);
    for j in 0..n {
        p[j] *= 0.5;
        q[j] = -p[j];
    }
    let mut sp = vec![1.0; n];
    let mut sq = vec![1.0; n];
    let mut y = vec![0.0; r];
    let min_x = p.iter().chain(&q).copied().fold(f64::INFINITY, f64::min);
    let dx = (-1.5 * min_x).max(0.0);
    p.iter_mut().chain(q.iter_mut()).for_each(|v| *v += dx);
    let xs: f64 = p.iter().zip(&sp).map(|(a, b)| a * b).sum::<f64>() + q.iter().zip(&sq).map(|(a, b)| a * b).sum::<f64>();
    let sum_x: f64 = p.iter().sum::<f64>() + q.iter().sum::<f64>();
    let sum_s = 2.0 * n as f64;
    let hx = 0.5 * xs / sum_s;
    let hs = 0.5 * xs / sum_x.max(1e-300);
    p.iter_mut().chain(q.iter_mut()).for_each(|v| *v += hx + 1e-8);
    sp.iter_mut().chain(sq.iter_mut()).for_each(|v| *v += hs);

    let bnorm = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut aty = vec![0.0; n];
    let mut iterations = 0;
    let mut stalled = 0;
    let mut converged = false;
    // Iterates past the attainable accuracy can break down; keep the best one.
    let mut best = (f64::INFINITY, Vec::new(), y.clone());
    for it in 0..max_iter {
        iterations = it + 1;
        at_times(cols, &y, &mut aty);
        let xdiff: Vec<f64> = p.iter().zip(&q).map(|(a, c)| a - c).collect();
        let ax = a_times(cols, &xdiff);
        let rb: Vec<f64> = b.iter().zip(&ax).map(|(a, c)| a - c).collect();
        let rcp: Vec<f64> = (0..n).map(|j| 1.0 - aty[j] - sp[j]).collect();
        let rcq: Vec<f64> = (0..n).map(|j| 1.0 + aty[j] - sq[j]).collect();
        let comp: f64 = p.iter().zip(&sp).map(|(a, c)| a * c).sum::<f64>()
            + q.iter().zip(&sq).map(|(a, c)| a * c).sum::<f64>();
        let mu = comp / (2 * n) as f64;
        let pres = rb.iter().fold(0.0f64, |m, v| m.max(v.abs())) / (1.0 + bnorm);
        let dres = rcp.iter().chain(&rcq).fold(0.0f64, |m, v| m.max(v.abs()));
        let pobj: f64 = p.iter().sum::<f64>() + q.iter().sum::<f64>();
        let dobj: f64 = b.iter().zip(&y).map(|(a, c)| a * c).sum();
        let gap = (pobj - dobj).abs() / pobj.abs().max(1.0);
        // `f64::max` drops NaN, so test the sums that propagate it.
        if !(pobj.is_finite() && dobj.is_finite() && mu.is_finite()) {
            break;
        }
        let merit = pres.max(dres).max(gap);
        if merit < best.0 {
            best = (merit, xdiff, y.clone());
        }
        if merit < INNER_TOL {
            converged = true;
            break;
        }

        let d: Vec<f64> = (0..n).map(|j| p[j] / sp[j] + q[j] / sq[j]).collect();
        let m = normal_matrix(cols, &d);

        let solve = |rxp: &[f64], rxq: &[f64]| -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) {
            let wv: Vec<f64> = (0..n)
                .map(|j| (rxp[j] - p[j] * rcp[j]) / sp[j] - (rxq[j] - q[j] * rcq[j]) / sq[j])
                .collect();
            let aw = a_times(cols, &wv);
            let rhs: Vec<f64> = rb.iter().zip(&aw).map(|(a, c)| a - c).collect();
            let dy = spd_solve(&m, &rhs);
            let mut t = vec![0.0; n];
            at_times(cols, &dy, &mut t);
            let dsp: Vec<f64> = (0..n).map(|j| rcp[j] - t[j]).collect();
            let dsq: Vec<f64> = (0..n).map(|j| rcq[j] + t[j]).collect();
            let dp: Vec<f64> = (0..n).map(|j| (rxp[j] - p[j] * dsp[j]) / sp[j]).collect();
            let dq: Vec<f64> = (0..n).map(|j| (rxq[j] - q[j] * dsq[j]) / sq[j]).collect();
            (dp, dq, dy, dsp, dsq)
        };

        let rxp: Vec<f64> = (0..n).map(|j| -p[j] * sp[j]).collect();
        let rxq: Vec<f64> = (0..n).map(|j| -q[j] * sq[j]).collect();
        let (dpa, dqa, _, dspa, dsqa) = solve(&rxp, &rxq);
        let ap = max_step(&p, &dpa).min(max_step(&q, &dqa)).min(1.0);
        let ad = max_step(&sp, &dspa).min(max_step(&sq, &dsqa)).min(1.0);
        let mut mu_aff = 0.0;
        for j in 0..n {
            mu_aff += (p[j] + ap * dpa[j]) * (sp[j] + ad * dspa[j]) + (q[j] + ap * dqa[j]) * (sq[j] + ad * dsqa[j]);
        }
        mu_aff /= (2 * n) as f64;
        let sigma = (mu_aff / mu).powi(3).clamp(0.0, 1.0);

        let rxp: Vec<f64> = (0..n).map(|j| -p[j] * sp[j] - dpa[j] * dspa[j] + sigma * mu).collect();
        let rxq: Vec<f64> = (0..n).map(|j| -q[j] * sq[j] - dqa[j] * dsqa[j] + sigma * mu).collect();
        let (dp, dq, dy, dsp, dsq) = solve(&rxp, &rxq);
        let ap = (STEP_FRACTION * max_step(&p, &dp).min(max_step(&q, &dq))).min(1.0);
        let ad = (STEP_FRACTION * max_step(&sp, &dsp).min(max_step(&sq, &dsq))).min(1.0);
        for j in 0..n {
            p[j] += ap * dp[j];
            q[j] += ap * dq[j];
            sp[j] += ad * dsp[j];
            sq[j] += ad * dsq[j];
        }
        for (a, c) in y.iter_mut().zip(&dy) {
            *a += ad * c;
        }
        if ap < 1e-10 && ad < 1e-10 {
            stalled += 1;
            if stalled >= 3 {
                break;
            }
        } else {
            stalled = 0;
        }
    }
    let (_, x, y) = best;
    let x = if x.is_empty() { p.iter().zip(&q).map(|(a, c)| a - c).collect() } else { x };
    IpmOutcome { x_re: x, x_im: None, y, iterations, converged }
}

fn max_step(x: &[f64], dx: &[f64]) -> f64 {
    x.iter().zip(dx).fold(f64::INFINITY, |m, (v, d)| if *d < 0.0 { m.min(-v / d) } else { m })
}

/// `out_j = a_j . y`.
fn at_times(cols: &RealColumns, y: &[f64], out: &mut [f64]) {
    out.par_chunks_mut(CHUNK).enumerate().for_each(|(k, o)| {
        let start = k * CHUNK;
        cols.for_range(start..start + o.len(), |j, a| {
            o[j - start] = a.iter().zip(y).map(|(u, v)| u * v).sum();
        });
    });
}

/// `sum_j x_j a_j`.
fn a_times(cols: &RealColumns, x: &[f64]) -> Vec<f64> {
    cols.reduce(cols.width(), |range, acc| {
        cols.for_range(range, |j, a| {
            let xj = x[j];
            if xj != 0.0 {
                for (t, v) in acc.iter_mut().zip(a) {
                    *t += xj * v;
                }
            }
        });
    })
}

/// `sum_j d_j a_j a_j^T`.
fn normal_matrix(cols: &RealColumns, d: &[f64]) -> DMatrix<f64> {
    let r = cols.width();
    let flat = cols.reduce(r * r, |range, acc| {
        cols.for_range(range, |j, a| {
            let dj = d[j];
            for u in 0..r {
                let du = dj * a[u];
                if du == 0.0 {
                    continue;
                }
                let row = &mut acc[u * r..u * r + r];
                for v in u..r {
                    row[v] += du * a[v];
                }
            }
        });
    });
    DMatrix::from_fn(r, r, |u, v| if u <= v { flat[u * r + v] } else { flat[v * r + u] })
}
