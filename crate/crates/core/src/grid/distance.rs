use super::{Grid, IndicatorSet, ScalarField};
use crate::error::Result;

/// Squared distance in cell units from every cell center to the nearest cell of `set`.
///
/// Exact Euclidean transform (Felzenszwalb–Huttenlocher): one lower-envelope pass of
/// parabolas per axis. Cells are `INFINITY` when the set is empty.
fn squared_edt(set: &IndicatorSet) -> Vec<f64> {
    let grid = set.grid();
    let mut f: Vec<f64> = set.mask().iter().map(|&b| if b { 0.0 } else { f64::INFINITY }).collect();
    let longest = *grid.shape().iter().max().unwrap();
    let mut line = vec![0.0; longest];
    let mut out = vec![0.0; longest];
    let mut v = vec![0usize; longest];
    let mut z = vec![0.0; longest + 1];
    for axis in 0..grid.dim() {
        let lay = grid.axis_layout(axis);
        for o in 0..lay.outer {
            for r in 0..lay.inner {
                for j in 0..lay.n {
                    line[j] = f[lay.index(o, j, r)];
                }
                envelope_1d(&line[..lay.n], &mut out[..lay.n], &mut v, &mut z);
                for j in 0..lay.n {
                    f[lay.index(o, j, r)] = out[j];
                }
            }
        }
    }
    f
}

/// `out[q] = min_p (q - p)^2 + f[p]`.
fn envelope_1d(f: &[f64], out: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    let Some(first) = f.iter().position(|x| x.is_finite()) else {
        out.fill(f64::INFINITY);
        return;
    };
    let mut k = 0usize;
    v[0] = first;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in first + 1..n {
        if !f[q].is_finite() {
            continue;
        }
        let qf = q as f64;
        loop {
            let p = v[k] as f64;
            let s = ((f[q] + qf * qf) - (f[v[k]] + p * p)) / (2.0 * (qf - p));
            if s <= z[k] {
                // k > 0 here: z[0] is -inf.
                k -= 1;
                continue;
            }
            k += 1;
            v[k] = q;
            z[k] = s;
            z[k + 1] = f64::INFINITY;
            break;
        }
    }
    k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        let qf = q as f64;
        while z[k + 1] < qf {
            k += 1;
        }
        let p = v[k] as f64;
        *o = (qf - p) * (qf - p) + f[v[k]];
    }
}

/// Euclidean distance from each cell center to the nearest center in `set`.
pub fn distance_to_set(set: &IndicatorSet) -> ScalarField {
    let grid: Grid = set.grid().clone();
    let h = grid.spacing();
    let values = squared_edt(set).into_iter().map(|s| h * s.sqrt()).collect();
    // Infinite entries only occur for the empty set; bypass the finiteness check.
    ScalarField { grid, values }
}

fn one_sided(from: &IndicatorSet, to: &IndicatorSet) -> f64 {
    let d2 = squared_edt(to);
    let worst = from.mask().iter().zip(&d2).filter(|(&b, _)| b).map(|(_, &d)| d).fold(0.0, f64::max);
    from.grid().spacing() * worst.sqrt()
}

/// Hausdorff distance between cell-center sets.
///
/// Returns `INFINITY` when exactly one set is empty and 0 when both are.
pub fn hausdorff_distance(e: &IndicatorSet, f: &IndicatorSet) -> Result<f64> {
    e.grid().check_same(f.grid())?;
    match (e.is_empty(), f.is_empty()) {
        (true, true) => return Ok(0.0),
        (true, false) | (false, true) => return Ok(f64::INFINITY),
        _ => {}
    }
    Ok(one_sided(e, f).max(one_sided(f, e)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::ball_indicator;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute_hausdorff(e: &IndicatorSet, f: &IndicatorSet) -> f64 {
        let g = e.grid();
        let pts = |s: &IndicatorSet| -> Vec<Vec<f64>> {
            (0..g.len()).filter(|&i| s.contains(i)).map(|i| g.center(i)).collect()
        };
        let (a, b) = (pts(e), pts(f));
        let dist = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
        let side = |a: &[Vec<f64>], b: &[Vec<f64>]| {
            a.iter().map(|x| b.iter().map(|y| dist(x, y)).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max)
        };
        side(&a, &b).max(side(&b, &a))
    }

    #[test]
    fn singletons() {
        let g = Grid::new(vec![10, 12], 0.5, vec![1.0, -2.0]).unwrap();
        let a = g.index_of(&[1, 2]);
        let b = g.index_of(&[7, 10]);
        let mut e = IndicatorSet::empty(g.clone());
        let mut f = IndicatorSet::empty(g.clone());
        e.mask_mut()[a] = true;
        f.mask_mut()[b] = true;
        let expect = 0.5 * ((6.0f64 * 6.0) + 64.0).sqrt();
        assert!((hausdorff_distance(&e, &f).unwrap() - expect).abs() < 1e-12);
        assert_eq!(hausdorff_distance(&e, &e).unwrap(), 0.0);
    }

    #[test]
    fn empty_sets() {
        let g = Grid::new(vec![4, 4], 1.0, vec![0.0, 0.0]).unwrap();
        let empty = IndicatorSet::empty(g.clone());
        let full = IndicatorSet::full(g.clone());
        assert_eq!(hausdorff_distance(&empty, &empty).unwrap(), 0.0);
        assert_eq!(hausdorff_distance(&full, &empty).unwrap(), f64::INFINITY);
        assert_eq!(hausdorff_distance(&empty, &full).unwrap(), f64::INFINITY);
        let other = Grid::new(vec![4, 5], 1.0, vec![0.0, 0.0]).unwrap();
        assert!(hausdorff_distance(&full, &IndicatorSet::full(other)).is_err());
    }

    #[test]
    fn congruent_balls_3d() {
        let h = 1.0 / 16.0;
        let g = Grid::covering(&[-1.25, -1.25, -1.25], &[4.25, 1.25, 1.25], h).unwrap();
        let e = ball_indicator(&g, &[0.0, 0.0, 0.0], 1.0).unwrap();
        let f = ball_indicator(&g, &[3.0, 0.0, 0.0], 1.0).unwrap();
        let d = hausdorff_distance(&e, &f).unwrap();
        assert!((d - 3.0).abs() <= 2.0 * h, "d_H = {d}");
    }

    #[test]
    fn matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for shape in [vec![13usize], vec![9, 7], vec![5, 4, 6]] {
            let d = shape.len();
            let g = Grid::new(shape, 0.7, vec![0.0; d]).unwrap();
            for _ in 0..25 {
                let p = rng.random_range(0.02..0.5);
                let m1: Vec<bool> = (0..g.len()).map(|_| rng.random_bool(p)).collect();
                let m2: Vec<bool> = (0..g.len()).map(|_| rng.random_bool(p)).collect();
                let e = IndicatorSet::new(g.clone(), m1).unwrap();
                let f = IndicatorSet::new(g.clone(), m2).unwrap();
                if e.is_empty() || f.is_empty() {
                    continue;
                }
                let fast = hausdorff_distance(&e, &f).unwrap();
                assert!((fast - brute_hausdorff(&e, &f)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn distance_field() {
        let g = Grid::new(vec![5, 5], 1.0, vec![0.0, 0.0]).unwrap();
        let mut e = IndicatorSet::empty(g.clone());
        e.mask_mut()[g.index_of(&[0, 0])] = true;
        let dist = distance_to_set(&e);
        assert!((dist.values()[g.index_of(&[3, 4])] - 5.0).abs() < 1e-12);
    }
}
