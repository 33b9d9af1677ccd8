use crate::linalg::{self, Matrix};

use super::Polytope;

const MAX_MAJOR: usize = 1000;

/// Wolfe's algorithm: the point of `conv(points)` with minimum norm, and its
/// convex weights.
pub fn min_norm_point(points: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let n = points.len();
    assert!(n > 0, "min_norm_point needs at least one point");
    let scale = points.iter().map(|p| linalg::norm_sq(p)).fold(0.0, f64::max).max(1e-300);
    let eps_opt = 1e-12 * scale;
    let eps_w = 1e-12;

    let start = (0..n)
        .min_by(|&a, &b| linalg::norm_sq(&points[a]).total_cmp(&linalg::norm_sq(&points[b])))
        .unwrap();
    let mut set = vec![start];
    let mut w = vec![1.0];
    let mut x = points[start].clone();

    for _ in 0..MAX_MAJOR {
        let (j, pj) = (0..n)
            .map(|k| (k, linalg::dot(&x, &points[k])))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if linalg::norm_sq(&x) - pj <= eps_opt || set.contains(&j) {
            break;
        }
        set.push(j);
        w.push(0.0);
        loop {
            let Some(alpha) = affine_minimizer(points, &set) else {
                return finish(points, &set, &w);
            };
            if alpha.iter().all(|&a| a > eps_w) {
                w = alpha;
                break;
            }
            let mut theta: f64 = 1.0;
            for (wi, ai) in w.iter().zip(&alpha) {
                if *ai <= eps_w && wi - ai > 0.0 {
                    theta = theta.min(wi / (wi - ai));
                }
            }
            for (wi, ai) in w.iter_mut().zip(&alpha) {
                *wi = (1.0 - theta) * *wi + theta * ai;
            }
            let mut k = 0;
            while k < set.len() {
                if w[k] <= eps_w {
                    set.swap_remove(k);
                    w.swap_remove(k);
                } else {
                    k += 1;
                }
            }
            let s: f64 = w.iter().sum();
            w.iter_mut().for_each(|wi| *wi /= s);
            if set.len() == 1 {
                w = vec![1.0];
                break;
            }
        }
        x = combine(points, &set, &w);
    }
    finish(points, &set, &w)
}

fn combine(points: &[Vec<f64>], set: &[usize], w: &[f64]) -> Vec<f64> {
    let mut x = vec![0.0; points[0].len()];
    for (&k, wi) in set.iter().zip(w) {
        linalg::axpy(*wi, &points[k], &mut x);
    }
    x
}

fn finish(points: &[Vec<f64>], set: &[usize], w: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut full = vec![0.0; points.len()];
    for (&k, wi) in set.iter().zip(w) {
        full[k] = *wi;
    }
    (combine(points, set, w), full)
}

/// Minimizes `‖Σ α_i p_i‖` over the affine hull of the chosen points.
fn affine_minimizer(points: &[Vec<f64>], set: &[usize]) -> Option<Vec<f64>> {
    let m = set.len();
    let mut a = Matrix::zeros(m + 1, m + 1);
    for (i, &pi) in set.iter().enumerate() {
        for (j, &pj) in set.iter().enumerate() {
            a[(i, j)] = linalg::dot(&points[pi], &points[pj]);
        }
        a[(i, m)] = 1.0;
        a[(m, i)] = 1.0;
    }
    let mut b = vec![0.0; m + 1];
    b[m] = 1.0;
    let sol = linalg::solve_linear_system(&a, &b).ok()?;
    Some(sol[..m].to_vec())
}

/// Euclidean distance from `x` to `conv(points)`.
pub fn distance_to_hull(x: &[f64], points: &[Vec<f64>]) -> f64 {
    let shifted: Vec<Vec<f64>> = points.iter().map(|p| linalg::sub(p, x)).collect();
    linalg::norm(&min_norm_point(&shifted).0)
}

/// Hausdorff distance between two polytopes; attained at a vertex of one of
/// them since distance to a convex set is convex.
pub fn hausdorff_distance(a: &Polytope, b: &Polytope) -> f64 {
    let one = a.vertices().iter().map(|v| distance_to_hull(v, b.vertices())).fold(0.0, f64::max);
    let two = b.vertices().iter().map(|v| distance_to_hull(v, a.vertices())).fold(0.0, f64::max);
    one.max(two)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn point_to_segment() {
        let seg = vec![vec![0.0, 0.0], vec![2.0, 0.0]];
        assert!((distance_to_hull(&[1.0, 1.0], &seg) - 1.0).abs() < 1e-12);
        assert!((distance_to_hull(&[3.0, 0.0], &seg) - 1.0).abs() < 1e-12);
        assert!(distance_to_hull(&[1.0, 0.0], &seg) < 1e-12);
    }

    #[test]
    fn hausdorff_of_nested_boxes() {
        let a = Polytope::aabb(&[0.0, 0.0], &[1.0, 1.0]).unwrap();
        let b = Polytope::aabb(&[0.0, 0.0], &[2.0, 2.0]).unwrap();
        assert!((hausdorff_distance(&a, &b) - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(hausdorff_distance(&a, &a), 0.0);
    }

    #[test]
    fn hausdorff_of_points_is_euclidean() {
        let a = Polytope::point(vec![0.0, 0.0]);
        let b = Polytope::point(vec![3.0, 4.0]);
        assert!((hausdorff_distance(&a, &b) - 5.0).abs() < 1e-12);
    }

    /// Projected-gradient reference on the simplex of weights.
    fn slow_distance(x: &[f64], pts: &[Vec<f64>]) -> f64 {
        let n = pts.len();
        let mut w = vec![1.0 / n as f64; n];
        let lip = pts.iter().map(|p| linalg::norm_sq(&linalg::sub(p, x))).sum::<f64>().max(1e-9);
        for _ in 0..20000 {
            let y: Vec<f64> = {
                let mut y = vec![0.0; x.len()];
                for (wi, p) in w.iter().zip(pts) {
                    linalg::axpy(*wi, &linalg::sub(p, x), &mut y);
                }
                y
            };
            let g: Vec<f64> = pts.iter().map(|p| linalg::dot(&y, &linalg::sub(p, x))).collect();
            let v: Vec<f64> = w.iter().zip(&g).map(|(wi, gi)| wi - gi / lip).collect();
            w = project_simplex(&v);
        }
        let mut y = vec![0.0; x.len()];
        for (wi, p) in w.iter().zip(pts) {
            linalg::axpy(*wi, &linalg::sub(p, x), &mut y);
        }
        linalg::norm(&y)
    }

    fn project_simplex(v: &[f64]) -> Vec<f64> {
        let mut u = v.to_vec();
        u.sort_by(|a, b| b.total_cmp(a));
        let mut css = 0.0;
        let mut theta = 0.0;
        for (i, ui) in u.iter().enumerate() {
            css += ui;
            let t = (css - 1.0) / (i + 1) as f64;
            if ui - t > 0.0 {
                theta = t;
            }
        }
        v.iter().map(|vi| (vi - theta).max(0.0)).collect()
    }

    #[test]
    fn wolfe_matches_projected_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..40 {
            let d = rng.random_range(1..4);
            let k = rng.random_range(1..7);
            let pts: Vec<Vec<f64>> =
                (0..k).map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
            let x: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
            let fast = distance_to_hull(&x, &pts);
            let slow = slow_distance(&x, &pts);
            assert!((fast - slow).abs() < 1e-5, "{fast} vs {slow}");
            assert!(fast <= slow + 1e-9);
        }
    }

    #[test]
    fn weights_reproduce_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..100 {
            let pts: Vec<Vec<f64>> =
                (0..6).map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
            let (x, w) = min_norm_point(&pts);
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert!(w.iter().all(|&wi| wi >= 0.0));
            let mut y = vec![0.0; 3];
            for (wi, p) in w.iter().zip(&pts) {
                linalg::axpy(*wi, p, &mut y);
            }
            assert!(linalg::max_abs_diff(&x, &y) < 1e-9);
        }
    }
}
