use serde::{Deserialize, Serialize};

use super::gradient::GradientVector;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `det [[∂_γ E, ∂_γ' E], [∂_γ E', ∂_γ' E']]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JacobianPair {
    pub gamma: i64,
    pub gamma_prime: i64,
    pub det_value: f64,
}

pub fn jacobian_pair(g: &GradientVector, gp: &GradientVector, gamma: i64, gamma_prime: i64) -> Result<JacobianPair> {
    let get = |v: &GradientVector, n: i64| {
        v.partial(n).ok_or_else(|| Error::OutOfRange {
            what: "site index",
            detail: format!("{n} not in gradient support"),
        })
    };
    Ok(JacobianPair {
        gamma,
        gamma_prime,
        det_value: get(g, gamma)? * get(gp, gamma_prime)? - get(g, gamma_prime)? * get(gp, gamma)?,
    })
}

#[inline]
fn minor<T: Scalar>(u: &[T], v: &[T], i: usize, j: usize) -> T {
    u[i] * v[j] - u[j] * v[i]
}

/// `(i, j, u_i v_j − u_j v_i)` with `i < j` maximizing the absolute value,
/// ties to the lexicographically first pair. `None` below two entries.
pub fn max_jacobian_pair_brute<T: Scalar>(u: &[T], v: &[T]) -> Option<(usize, usize, T)> {
    best_among(u, v, &(0..u.len().min(v.len())).collect::<Vec<_>>())
}

fn best_among<T: Scalar>(u: &[T], v: &[T], idx: &[usize]) -> Option<(usize, usize, T)> {
    let mut best: Option<(usize, usize, T)> = None;
    for (a, &i) in idx.iter().enumerate() {
        for &j in &idx[a + 1..] {
            let d = minor(u, v, i, j);
            let better = match best {
                None => true,
                Some((bi, bj, bd)) => d.abs() > bd.abs() || (d.abs() == bd.abs() && (i, j) < (bi, bj)),
            };
            if better {
                best = Some((i, j, d));
            }
        }
    }
    best
}

fn cross<T: Scalar>(o: (T, T), a: (T, T), b: (T, T)) -> T {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Same result as [`max_jacobian_pair_brute`], searching only pairs on the
/// boundary of `conv{±(u_i, v_i)}`: for fixed `j`, `|p × p_j|` is the
/// absolute value of a linear functional, so its maximum sits on that
/// boundary.
pub fn max_jacobian_pair<T: Scalar>(u: &[T], v: &[T]) -> Option<(usize, usize, T)> {
    let n = u.len().min(v.len());
    if n < 8 {
        return max_jacobian_pair_brute(u, v);
    }
    let mut pts: Vec<((T, T), usize)> = (0..n)
        .flat_map(|i| [((u[i], v[i]), i), ((-u[i], -v[i]), i)])
        .collect();
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    let mut hull: Vec<(T, T)> = Vec::new();
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &((T, T), usize)>> =
            if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for &(p, _) in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= T::zero() {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    if hull.len() < 3 {
        // all points on a line through the origin: every minor vanishes
        return max_jacobian_pair_brute(u, v);
    }
    let scale = pts.iter().fold(T::zero(), |m, (p, _)| m.max(p.0.abs()).max(p.1.abs()));
    let tol = T::lit(1e-12) * scale * scale;
    let on_boundary = |p: (T, T)| {
        (0..hull.len()).any(|k| {
            let (a, b) = (hull[k], hull[(k + 1) % hull.len()]);
            cross(a, b, p) <= tol
        })
    };
    let mut cand: Vec<usize> = pts.iter().filter(|(p, _)| on_boundary(*p)).map(|&(_, i)| i).collect();
    cand.sort_unstable();
    cand.dedup();
    best_among(u, v, &cand)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradJacCheck<T = f64> {
    /// `max_{i<j} (u_i v_j − u_j v_i)²` after ℓ¹ normalization.
    pub lhs: T,
    /// `‖u − v‖₁² / (4n⁵)`.
    pub rhs: T,
    pub holds: bool,
    pub pair: Option<(usize, usize)>,
}

fn l1_normalized<T: Scalar>(x: &[T], name: &str) -> Result<Vec<T>> {
    if x.iter().any(|v| !(*v >= T::zero())) {
        return Err(Error::InvalidParameters(format!("{name} must be nonnegative")));
    }
    let s = x.iter().fold(T::zero(), |a, v| a + *v);
    if !(s > T::zero()) {
        return Err(Error::Degenerate(format!("cannot normalize zero vector {name}")));
    }
    Ok(x.iter().map(|v| *v / s).collect())
}

pub fn gradjac_bound_check<T: Scalar>(u: &[T], v: &[T]) -> Result<GradJacCheck<T>> {
    if u.len() != v.len() || u.is_empty() {
        return Err(Error::Shape(format!("vectors of lengths {} and {}", u.len(), v.len())));
    }
    let (u, v) = (l1_normalized(u, "u")?, l1_normalized(v, "v")?);
    let n = T::from_usize(u.len()).expect("length fits the scalar");
    let dist = u.iter().zip(&v).fold(T::zero(), |a, (x, y)| a + (*x - *y).abs());
    let rhs = dist * dist / (T::lit(4.0) * n.powi(5));
    let best = max_jacobian_pair(&u, &v);
    let lhs = best.map_or(T::zero(), |b| b.2 * b.2);
    Ok(GradJacCheck {
        lhs,
        rhs,
        holds: lhs >= rhs - T::lit(1e-14),
        pair: best.map(|b| (b.0, b.1)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn gv(partials: Vec<f64>) -> GradientVector {
        let l1_norm = partials.iter().sum();
        GradientVector {
            which: 0,
            energy: 0.0,
            sites: (0..partials.len() as i64).collect(),
            partials,
            l1_norm,
            covering_constant: 1.0,
        }
    }

    #[test]
    fn pair_values() {
        let (a, b) = (gv(vec![1.0, 0.0]), gv(vec![0.0, 1.0]));
        assert_eq!(jacobian_pair(&a, &b, 0, 1).unwrap().det_value, 1.0);
        assert_eq!(jacobian_pair(&a, &b, 1, 0).unwrap().det_value, -1.0);
        assert_eq!(jacobian_pair(&a, &a, 0, 1).unwrap().det_value, 0.0);
        assert!(jacobian_pair(&a, &b, 0, 7).is_err());
    }

    #[test]
    fn unit_pair_bound() {
        let c = gradjac_bound_check(&[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert_eq!(c.lhs, 1.0);
        assert_abs_diff_eq!(c.rhs, 0.03125, epsilon = 1e-17);
        assert!(c.holds);
        let c = gradjac_bound_check(&[0.3, 0.7], &[0.3, 0.7]).unwrap();
        assert_eq!((c.lhs, c.rhs, c.holds), (0.0, 0.0, true));
    }

    #[test]
    fn rejects_zero_and_negative() {
        assert!(gradjac_bound_check(&[0.0, 0.0], &[1.0, 0.0]).is_err());
        assert!(gradjac_bound_check(&[-1.0, 2.0], &[1.0, 0.0]).is_err());
        assert!(gradjac_bound_check(&[1.0], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn collinear_points() {
        let u: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let v: Vec<f64> = u.iter().map(|x| 2.0 * x).collect();
        assert_eq!(max_jacobian_pair(&u, &v), max_jacobian_pair_brute(&u, &v));
    }

    #[test]
    fn f32_path() {
        let c = gradjac_bound_check::<f32>(&[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert!(c.holds && c.lhs == 1.0);
    }

    proptest! {
        #[test]
        fn hull_matches_brute(
            u in prop::collection::vec(0.0..1.0f64, 8..40),
            v in prop::collection::vec(0.0..1.0f64, 40),
        ) {
            let v = &v[..u.len()];
            prop_assert_eq!(max_jacobian_pair(&u, v), max_jacobian_pair_brute(&u, v));
        }

        #[test]
        fn lemma_holds(
            u in prop::collection::vec(0.0..1.0f64, 1..13),
            v in prop::collection::vec(0.0..1.0f64, 12),
        ) {
            let v = &v[..u.len()];
            prop_assume!(u.iter().sum::<f64>() > 0.0 && v.iter().sum::<f64>() > 0.0);
            prop_assert!(gradjac_bound_check(&u, v).unwrap().holds);
        }

        #[test]
        fn antisymmetric(a in prop::collection::vec(0.0..1.0f64, 5), b in prop::collection::vec(0.0..1.0f64, 5), i in 0i64..5, j in 0i64..5) {
            let (g, h) = (gv(a), gv(b));
            let x = jacobian_pair(&g, &h, i, j).unwrap().det_value;
            let y = jacobian_pair(&g, &h, j, i).unwrap().det_value;
            prop_assert_eq!(x, -y);
        }
    }
}
