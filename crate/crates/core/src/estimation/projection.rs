//! Projections of a pilot estimate onto the set of Pickands functions.

use crate::error::{Error, Result};
use crate::pickands::{PickandsFn, TabulatedPickands, PROJECTION_TOL};

use super::{EstimateCurve, Projection};

/// Convergence threshold for the L2 projection's KKT residual.
pub const L2_KKT_TOL: f64 = 1e-8;
const L2_VIOLATION_TOL: f64 = 1e-14;

fn is_feasible(grid: &[f64], values: &[f64]) -> bool {
    TabulatedPickands::new(grid.to_vec(), values.to_vec())
        .map(|tab| PickandsFn::Tabulated(tab).validate(PROJECTION_TOL).passed())
        .unwrap_or(false)
}

/// Applies `kind` to `curve`.
pub fn project(curve: &EstimateCurve, kind: Projection) -> Result<EstimateCurve> {
    match kind {
        Projection::None => Ok(curve.clone()),
        Projection::Gcm => Ok(project_gcm(curve)),
        Projection::L2 => project_l2(curve),
    }
}

/// Clips to `[max(t, 1-t), 1]` and takes the greatest convex minorant.
pub fn project_gcm(curve: &EstimateCurve) -> EstimateCurve {
    let values = if is_feasible(&curve.grid, &curve.values) {
        curve.values.clone()
    } else {
        gcm(&curve.grid, &curve.values)
    };
    EstimateCurve {
        values,
        projection: Projection::Gcm,
        kkt_residual: None,
        ..curve.clone()
    }
}

/// Greatest convex minorant of the clipped points `(t_k, p_k)`.
pub(crate) fn gcm(grid: &[f64], pilot: &[f64]) -> Vec<f64> {
    let last = grid.len() - 1;
    let clipped: Vec<f64> = grid
        .iter()
        .zip(pilot)
        .enumerate()
        .map(|(k, (&t, &p))| {
            if k == 0 || k == last || p.is_nan() {
                1.0
            } else {
                p.clamp(t.max(1.0 - t), 1.0)
            }
        })
        .collect();
    // lower hull by monotone chain
    let mut hull: Vec<usize> = Vec::with_capacity(grid.len());
    for k in 0..grid.len() {
        while hull.len() >= 2 {
            let (i, j) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (grid[j] - grid[i]) * (clipped[k] - clipped[i])
                - (clipped[j] - clipped[i]) * (grid[k] - grid[i]);
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(k);
    }
    let mut out = clipped.clone();
    for w in hull.windows(2) {
        let (i, j) = (w[0], w[1]);
        let slope = (clipped[j] - clipped[i]) / (grid[j] - grid[i]);
        for k in i + 1..j {
            out[k] = clipped[i] + slope * (grid[k] - grid[i]);
        }
    }
    out
}

/// Weighted least-squares projection onto convex curves with
/// `A(0) = A(1) = 1` and `max(t, 1-t) <= A <= 1`, using trapezoid weights.
pub fn project_l2(curve: &EstimateCurve) -> Result<EstimateCurve> {
    let (values, residual) = if is_feasible(&curve.grid, &curve.values) {
        (curve.values.clone(), 0.0)
    } else {
        l2(&curve.grid, &curve.values)?
    };
    Ok(EstimateCurve {
        values,
        projection: Projection::L2,
        kkt_residual: Some(residual),
        ..curve.clone()
    })
}

/// A sparse constraint row `sum coef * x[col] >= rhs`.
#[derive(Debug, Clone)]
struct Row {
    entries: Vec<(usize, f64)>,
    rhs: f64,
}

impl Row {
    fn dot(&self, x: &[f64]) -> f64 {
        self.entries.iter().map(|&(j, c)| c * x[j]).sum()
    }
}

/// Rows of `G x >= h` over the interior nodes `x_j = a_{j+1}`. With fixed
/// endpoints and convexity, `a <= 1` holds automatically and the lower
/// bound reduces to the two end slopes.
fn constraints(grid: &[f64]) -> Vec<Row> {
    let m = grid.len() - 1;
    let h: Vec<f64> = grid.windows(2).map(|w| w[1] - w[0]).collect();
    let mut rows = Vec::with_capacity(m + 1);
    rows.push(Row {
        entries: vec![(0, 1.0)],
        rhs: 1.0 - h[0],
    });
    for k in 1..m {
        let scale = h[k - 1] * h[k] / (h[k - 1] + h[k]);
        let coef = [scale / h[k - 1], -scale * (1.0 / h[k - 1] + 1.0 / h[k]), scale / h[k]];
        let mut entries = Vec::with_capacity(3);
        let mut rhs = 0.0;
        for (node, c) in [k - 1, k, k + 1].into_iter().zip(coef) {
            if node == 0 || node == m {
                rhs -= c;
            } else {
                entries.push((node - 1, c));
            }
        }
        rows.push(Row { entries, rhs });
    }
    rows.push(Row {
        entries: vec![(m - 2, 1.0)],
        rhs: 1.0 - h[m - 1],
    });
    rows
}

/// Symmetric positive definite matrix with half-bandwidth 2, stored by
/// diagonals: `band[i][d] = M[i][i + d]`.
struct Band5 {
    band: Vec<[f64; 3]>,
}

impl Band5 {
    fn new(diag: &[f64]) -> Self {
        Self {
            band: diag.iter().map(|&d| [d, 0.0, 0.0]).collect(),
        }
    }

    fn add(&mut self, i: usize, j: usize, v: f64) {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        self.band[lo][hi - lo] += v;
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        if hi - lo > 2 {
            0.0
        } else {
            self.band[lo][hi - lo]
        }
    }

    /// Solves `M x = b` by banded Cholesky.
    fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.band.len();
        // l[i][q] = L[i][i - q]
        let mut l = vec![[0.0f64; 3]; n];
        for i in 0..n {
            for j in i.saturating_sub(2)..=i {
                let mut sum = self.get(j, i);
                for k in i.saturating_sub(2)..j {
                    sum -= l[i][i - k] * l[j][j - k];
                }
                if j == i {
                    if !(sum > 0.0) {
                        return Err(Error::NoConvergence {
                            iterations: 0,
                            residual: f64::INFINITY,
                        });
                    }
                    l[i][0] = sum.sqrt();
                } else {
                    l[i][i - j] = sum / l[j][0];
                }
            }
        }
        let mut y = b.to_vec();
        for i in 0..n {
            for k in i.saturating_sub(2)..i {
                y[i] -= l[i][i - k] * y[k];
            }
            y[i] /= l[i][0];
        }
        for i in (0..n).rev() {
            for k in i + 1..(i + 3).min(n) {
                y[i] -= l[k][k - i] * y[k];
            }
            y[i] /= l[i][0];
        }
        Ok(y)
    }
}

/// Returns the projected curve and its KKT residual. Dual active-set
/// method: starting from the unconstrained minimiser, the most violated
/// row is added with a growing multiplier, and rows whose multipliers
/// reach zero on the way are dropped.
pub(crate) fn l2(grid: &[f64], pilot: &[f64]) -> Result<(Vec<f64>, f64)> {
    let m = grid.len() - 1;
    if m < 2 {
        return Ok((vec![1.0; grid.len()], 0.0));
    }
    let hbar = 1.0 / m as f64;
    let w: Vec<f64> = (1..m).map(|k| 0.5 * (grid[k + 1] - grid[k - 1]) / hbar).collect();
    let p: Vec<f64> = (1..m)
        .map(|k| if pilot[k].is_finite() { pilot[k] } else { 1.0 })
        .collect();
    let rows = constraints(grid);
    let nr = rows.len();
    let norms: Vec<f64> = rows
        .iter()
        .map(|r| r.entries.iter().map(|&(j, c)| c * c / w[j]).sum::<f64>().sqrt())
        .collect();
    // W^-1 G^T y for multipliers y on the rows `set`
    let lift = |set: &[usize], y: &[f64]| {
        let mut v = vec![0.0; w.len()];
        for (&r, &yr) in set.iter().zip(y) {
            for &(j, c) in &rows[r].entries {
                v[j] += c * yr / w[j];
            }
        }
        v
    };
    // (G W^-1 G^T) restricted to the sorted rows `set`: rows more than two
    // apart share no column.
    let gram = |set: &[usize]| {
        let mut mat = Band5::new(&vec![0.0; set.len()]);
        for a in 0..set.len() {
            for b in a..(a + 3).min(set.len()) {
                let mut v = 0.0;
                for &(i, ci) in &rows[set[a]].entries {
                    for &(j, cj) in &rows[set[b]].entries {
                        if i == j {
                            v += ci * cj / w[i];
                        }
                    }
                }
                mat.add(a, b, v);
            }
        }
        mat
    };
    let no_conv = |iterations: usize, residual: f64| Error::NoConvergence { iterations, residual };

    let mut active: Vec<usize> = Vec::new();
    let mut lam: Vec<f64> = Vec::new();
    let mut x = p.clone();
    let max_iter = 20 * nr;
    let mut iter = 0;
    loop {
        let q = (0..nr)
            .filter(|r| active.binary_search(r).is_err())
            .map(|r| (r, (rows[r].dot(&x) - rows[r].rhs) / norms[r]))
            .filter(|&(_, g)| g < -L2_VIOLATION_TOL)
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(r, _)| r);
        let Some(q) = q else { break };
        let gq = lift(&[q], &[1.0]);
        let mut t = 0.0;
        loop {
            iter += 1;
            if iter > max_iter {
                return Err(no_conv(iter, f64::NAN));
            }
            let mat = gram(&active);
            let base: Vec<f64> = active.iter().map(|&r| rows[r].rhs - rows[r].dot(&p)).collect();
            let lam0 = mat.solve(&base).map_err(|_| no_conv(iter, f64::NAN))?;
            let cross: Vec<f64> = active.iter().map(|&r| -rows[r].dot(&gq)).collect();
            let dl = mat.solve(&cross).map_err(|_| no_conv(iter, f64::NAN))?;
            let x0 = lift(&active, &lam0);
            let dx = lift(&active, &dl);
            let c0 = rows[q].dot(&p) + rows[q].dot(&x0) - rows[q].rhs;
            let c1 = rows[q].dot(&gq) + rows[q].dot(&dx);
            let full = if c1 > 1e-14 * rows[q].dot(&gq) { -c0 / c1 } else { f64::INFINITY };
            let partial = dl
                .iter()
                .zip(&lam0)
                .enumerate()
                .filter(|(_, (&d, _))| d < 0.0)
                .map(|(i, (&d, &l0))| (i, (-l0 / d).max(t)))
                .min_by(|a, b| a.1.total_cmp(&b.1));
            match partial {
                Some((i, tp)) if tp < full => {
                    t = tp;
                    active.remove(i);
                }
                _ if full.is_finite() => {
                    let pos = active.binary_search(&q).unwrap_err();
                    active.insert(pos, q);
                    break;
                }
                _ => return Err(Error::Domain("projection constraints are inconsistent".into())),
            }
        }
        let mat = gram(&active);
        let base: Vec<f64> = active.iter().map(|&r| rows[r].rhs - rows[r].dot(&p)).collect();
        lam = mat.solve(&base).map_err(|_| no_conv(iter, f64::NAN))?;
        let shift = lift(&active, &lam);
        x = p.iter().zip(&shift).map(|(a, b)| a + b).collect();
    }

    let mut z = vec![0.0; nr];
    for (&r, &l) in active.iter().zip(&lam) {
        z[r] = l;
    }
    let mut stat: Vec<f64> = (0..w.len()).map(|j| w[j] * (x[j] - p[j])).collect();
    for (r, &zr) in rows.iter().zip(&z) {
        for &(j, c) in &r.entries {
            stat[j] -= c * zr;
        }
    }
    let residual = rows.iter().zip(&z).fold(
        stat.iter().fold(0.0f64, |a, v| a.max(v.abs())),
        |acc, (r, &zr)| {
            let g = r.dot(&x) - r.rhs;
            acc.max((-g).max(0.0)).max((-zr).max(0.0)).max((zr * g).abs())
        },
    );
    if residual > L2_KKT_TOL {
        return Err(no_conv(iter, residual));
    }
    let mut out = Vec::with_capacity(grid.len());
    out.push(1.0);
    out.extend(x);
    out.push(1.0);
    Ok((out, residual))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimation::{EstimatorKind, MarginMode};
    use crate::pickands::uniform_grid;
    use proptest::prelude::*;

    fn curve(grid: Vec<f64>, values: Vec<f64>) -> EstimateCurve {
        EstimateCurve {
            grid,
            values,
            estimator: EstimatorKind::Pickands,
            margins: MarginMode::KnownUniform,
            projection: Projection::None,
            kkt_residual: None,
            flags: Vec::new(),
        }
    }

    fn valid(c: &EstimateCurve) -> bool {
        c.to_pickands().unwrap().validate(1e-9).passed()
    }

    /// Lower hull at node k: min over i <= k <= j of the chord through i, j.
    fn hull_brute(grid: &[f64], v: &[f64]) -> Vec<f64> {
        let n = grid.len();
        (0..n)
            .map(|k| {
                let mut best = v[k];
                for i in 0..=k {
                    for j in k..n {
                        if i < j {
                            let lam = (grid[k] - grid[i]) / (grid[j] - grid[i]);
                            best = best.min(v[i] + lam * (v[j] - v[i]));
                        }
                    }
                }
                best
            })
            .collect()
    }

    #[test]
    fn gcm_examples() {
        let g = uniform_grid(5);
        let out = project_gcm(&curve(g.clone(), vec![1.0, 0.8, 0.9, 0.7, 1.0]));
        // 0.7 at t = 3/4 is first lifted to max(t, 1 - t)
        let want = hull_brute(&g, &[1.0, 0.8, 0.9, 0.75, 1.0]);
        let expect = [1.0, 0.8, 0.775, 0.75, 1.0];
        for (a, b) in want.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-15);
        }
        for (a, b) in out.values.iter().zip(&want) {
            assert!((a - b).abs() < 1e-15);
        }
        let flat = project_gcm(&curve(g.clone(), vec![1.05; 5]));
        assert_eq!(flat.values, vec![1.0; 5]);
        let ok = vec![1.0, 0.8, 0.7, 0.8, 1.0];
        assert_eq!(project_gcm(&curve(g, ok.clone())).values, ok);
    }

    #[test]
    fn l2_examples() {
        let g = uniform_grid(11);
        let flat = project_l2(&curve(g.clone(), vec![1.05; 11])).unwrap();
        assert!(flat.values.iter().all(|v| (v - 1.0).abs() < 1e-9));
        assert!(flat.kkt_residual.unwrap() <= L2_KKT_TOL);
        let ok: Vec<f64> = g.iter().map(|t| (t * t + (1.0 - t) * (1.0 - t)).sqrt()).collect();
        assert_eq!(project_l2(&curve(g, ok.clone())).unwrap().values, ok);
    }

    #[test]
    fn l2_solves_a_small_problem_exactly() {
        // 3 nodes: only a_1 is free, optimum is the pilot clipped to [1/2, 1]
        let g = vec![0.0, 0.5, 1.0];
        let out = project_l2(&curve(g.clone(), vec![1.0, 0.3, 1.0])).unwrap();
        assert!((out.values[1] - 0.5).abs() < 1e-10);
        // only the convexity row a_1 - 2 a_2 + 1 >= 0 binds: move along (1, -2)
        let g = uniform_grid(4);
        let out = project_l2(&curve(g, vec![1.0, 0.7, 0.9, 1.0])).unwrap();
        assert!((out.values[1] - 0.72).abs() < 1e-9 && (out.values[2] - 0.86).abs() < 1e-9);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn projections_are_valid_and_not_farther(
            noise in prop::collection::vec(-0.15f64..0.15, 31),
            theta in 1.0f64..6.0,
        ) {
            let g = uniform_grid(31);
            let truth: Vec<f64> = g.iter()
                .map(|t| (t.powf(theta) + (1.0 - t).powf(theta)).powf(1.0 / theta))
                .collect();
            let pilot: Vec<f64> = truth.iter().zip(&noise).map(|(a, e)| a + e).collect();
            let c = curve(g.clone(), pilot.clone());

            let gc = project_gcm(&c);
            prop_assert!(valid(&gc));
            let sup = |v: &[f64]| v.iter().zip(&truth).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            prop_assert!(sup(&gc.values) <= sup(&pilot) + 1e-15);
            let brute = hull_brute(&g, &gcm_clip(&g, &pilot));
            for (a, b) in gc.values.iter().zip(&brute) {
                prop_assert!((a - b).abs() < 1e-12);
            }

            let l2c = project_l2(&c).unwrap();
            prop_assert!(valid(&l2c));
            prop_assert!(l2c.kkt_residual.unwrap() <= L2_KKT_TOL);
            let wnorm = |v: &[f64]| -> f64 {
                (1..30).map(|k| (v[k] - truth[k]).powi(2)).sum::<f64>()
            };
            prop_assert!(wnorm(&l2c.values) <= wnorm(&pilot) + 1e-12);
            let again = project_l2(&l2c).unwrap();
            prop_assert_eq!(again.values, l2c.values);
        }
    }

    fn gcm_clip(g: &[f64], p: &[f64]) -> Vec<f64> {
        let last = g.len() - 1;
        g.iter()
            .zip(p)
            .enumerate()
            .map(|(k, (&t, &v))| if k == 0 || k == last { 1.0 } else { v.clamp(t.max(1.0 - t), 1.0) })
            .collect()
    }
}
