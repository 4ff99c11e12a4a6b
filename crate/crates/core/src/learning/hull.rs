//! Exact convex hulls of finite point sets, including lower-dimensional ones.
//!
//! The affine hull is described by equalities; within it the hull is built
//! incrementally (beneath-beyond) on a coordinate projection that is
//! injective on the affine hull.

use std::collections::HashMap;

use num_traits::Zero;

use super::linalg::{dot, nullspace, sub, RowBasis, Vector};
use crate::pddl::{rat, rat_to_f64, Rational};

/// `{ x : a·x = c for every equality, a·x <= c for every inequality }`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Polytope {
    pub equalities: Vec<(Vector, Rational)>,
    pub inequalities: Vec<(Vector, Rational)>,
    /// Dimension of the affine hull of the points.
    pub dim: usize,
}

impl Polytope {
    pub fn contains(&self, x: &[Rational]) -> bool {
        self.equalities.iter().all(|(a, c)| dot(a, x) == *c) && self.inequalities.iter().all(|(a, c)| dot(a, x) <= *c)
    }
}

#[derive(Debug, Clone)]
struct Facet {
    verts: Vec<usize>,
    normal: Vector,
    offset: Rational,
    approx: Vec<f64>,
    approx_offset: f64,
}

impl Facet {
    /// Strictly beyond the hyperplane. Decided in floating point when the
    /// margin clearly exceeds the rounding error, exactly otherwise.
    fn sees(&self, point: &[Rational], approx_point: &[f64]) -> bool {
        let mut s = -self.approx_offset;
        let mut scale = self.approx_offset.abs();
        for (a, x) in self.approx.iter().zip(approx_point) {
            s += a * x;
            scale += (a * x).abs();
        }
        let bound = 1e-9 * scale;
        if s < -bound {
            false
        } else if s > bound {
            true
        } else {
            dot(&self.normal, point) > self.offset
        }
    }
}

/// Hyperplane through `d` points of R^d, oriented so that `interior` is strictly below.
fn facet_through(points: &[Vector], verts: Vec<usize>, interior: &[Rational]) -> Facet {
    let base = &points[verts[0]];
    let rows: Vec<Vector> = verts[1..].iter().map(|&v| sub(&points[v], base)).collect();
    let mut ns = nullspace(&rows, base.len());
    debug_assert_eq!(ns.len(), 1, "facet vertices must be affinely independent");
    let mut normal = ns.pop().expect("non-degenerate facet");
    let mut offset = dot(&normal, base);
    if dot(&normal, interior) > offset {
        normal = normal.iter().map(|x| -x).collect();
        offset = -offset;
    }
    let approx = normal.iter().map(rat_to_f64).collect();
    let approx_offset = rat_to_f64(&offset);
    Facet {
        verts,
        normal,
        offset,
        approx,
        approx_offset,
    }
}

/// Facets of the hull of full-dimensional points in R^d, d >= 2.
fn full_dimensional_hull(points: &[Vector], simplex: &[usize]) -> Vec<Facet> {
    let d = points[0].len();
    let mut interior = vec![Rational::zero(); d];
    for &i in simplex {
        for (acc, x) in interior.iter_mut().zip(&points[i]) {
            *acc += x;
        }
    }
    let k = rat(simplex.len() as i64);
    for x in interior.iter_mut() {
        *x /= &k;
    }

    let mut facets: Vec<Facet> = (0..simplex.len())
        .map(|skip| {
            let mut verts: Vec<usize> = simplex
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != skip)
                .map(|(_, &v)| v)
                .collect();
            verts.sort_unstable();
            facet_through(points, verts, &interior)
        })
        .collect();

    let approx_points: Vec<Vec<f64>> = points.iter().map(|p| p.iter().map(rat_to_f64).collect()).collect();
    // Sorted input would make every point a new vertex; a scattered order
    // leaves most points inside the hull built so far.
    let n = points.len();
    let mut stride = 7919 % n.max(1);
    while stride == 0 || num_integer::gcd(stride, n) != 1 {
        stride += 1;
    }
    for p in (0..n).map(|i| (i * stride) % n) {
        let point = &points[p];
        if simplex.contains(&p) {
            continue;
        }
        // Points on a facet's hyperplane do not see it.
        let visible: Vec<bool> = facets.iter().map(|f| f.sees(point, &approx_points[p])).collect();
        if !visible.iter().any(|&v| v) {
            continue;
        }
        let mut ridge_count: HashMap<Vec<usize>, usize> = HashMap::new();
        for f in facets.iter().zip(&visible).filter(|(_, &v)| v).map(|(f, _)| f) {
            for skip in 0..f.verts.len() {
                let ridge: Vec<usize> = f
                    .verts
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != skip)
                    .map(|(_, &v)| v)
                    .collect();
                *ridge_count.entry(ridge).or_insert(0) += 1;
            }
        }
        let mut horizon: Vec<Vec<usize>> = ridge_count
            .into_iter()
            .filter(|&(_, c)| c == 1)
            .map(|(r, _)| r)
            .collect();
        horizon.sort();
        let mut kept: Vec<Facet> = facets
            .into_iter()
            .zip(visible)
            .filter(|(_, v)| !v)
            .map(|(f, _)| f)
            .collect();
        for ridge in horizon {
            let mut verts = ridge;
            verts.push(p);
            verts.sort_unstable();
            kept.push(facet_through(points, verts, &interior));
        }
        facets = kept;
    }
    facets
}

/// Exact hull of `points` (all of the same length n, at least one point).
pub fn convex_hull(points: &[Vector]) -> Polytope {
    let Some(p0) = points.first() else {
        return Polytope::default();
    };
    let n = p0.len();
    let mut basis = RowBasis::default();
    let mut simplex = vec![0usize];
    for (i, p) in points.iter().enumerate().skip(1) {
        if basis.insert(&sub(p, p0)) {
            simplex.push(i);
        }
    }
    let dim = basis.rank();
    let directions: Vec<Vector> = simplex[1..].iter().map(|&i| sub(&points[i], p0)).collect();

    let mut out = Polytope {
        dim,
        ..Polytope::default()
    };
    let normals = if directions.is_empty() {
        nullspace(&[vec![Rational::zero(); n]], n)
    } else {
        nullspace(&directions, n)
    };
    for a in normals {
        let c = dot(&a, p0);
        out.equalities.push((a, c));
    }
    if dim == 0 {
        return out;
    }

    // Coordinates on which the projection of the affine hull is injective.
    let mut m = directions.clone();
    let pivots = super::linalg::rref(&mut m);
    let project = |x: &Vector| -> Vector { pivots.iter().map(|&j| x[j].clone()).collect() };
    let lift = |a: &Vector| -> Vector {
        let mut full = vec![Rational::zero(); n];
        for (&j, v) in pivots.iter().zip(a) {
            full[j] = v.clone();
        }
        full
    };
    let projected: Vec<Vector> = points.iter().map(project).collect();

    if dim == 1 {
        let lo = projected.iter().map(|p| &p[0]).min().expect("non-empty").clone();
        let hi = projected.iter().map(|p| &p[0]).max().expect("non-empty").clone();
        out.inequalities.push((lift(&vec![rat(1)]), hi));
        out.inequalities.push((lift(&vec![rat(-1)]), -lo));
        return out;
    }

    for f in full_dimensional_hull(&projected, &simplex) {
        out.inequalities.push((lift(&f.normal), f.offset));
    }
    out
}

/// Removes duplicate points, keeping first occurrences.
pub fn dedup_points(points: Vec<Vector>) -> Vec<Vector> {
    let mut seen = std::collections::HashSet::new();
    points.into_iter().filter(|p| seen.insert(p.clone())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pddl::{Comparator, FuncTerm, LinearExpr, NumericCondition};
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn pts(xs: &[&[i64]]) -> Vec<Vector> {
        xs.iter().map(|p| p.iter().map(|&x| rat(x)).collect()).collect()
    }

    fn canon(a: &[Rational], c: &Rational, cmp: Comparator) -> NumericCondition {
        let mut lhs = LinearExpr::default();
        for (i, x) in a.iter().enumerate() {
            if !x.is_zero() {
                lhs.terms.insert(FuncTerm::new(format!("x{i}"), vec![]), x.clone());
            }
        }
        NumericCondition::canonical(lhs, cmp, c.clone())
    }

    fn constraint_set(p: &Polytope) -> BTreeSet<NumericCondition> {
        p.equalities
            .iter()
            .map(|(a, c)| canon(a, c, Comparator::Eq))
            .chain(p.inequalities.iter().map(|(a, c)| canon(a, c, Comparator::Le)))
            .collect()
    }

    /// Brute force for full-dimensional point sets: every hyperplane through d
    /// of the points with all points on one side is a facet hyperplane.
    fn brute_force_facets(points: &[Vector]) -> BTreeSet<NumericCondition> {
        let d = points[0].len();
        let mut out = BTreeSet::new();
        let idx: Vec<usize> = (0..points.len()).collect();
        let mut combos = Vec::new();
        fn choose(idx: &[usize], k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if cur.len() == k {
                out.push(cur.clone());
                return;
            }
            for i in start..idx.len() {
                cur.push(idx[i]);
                choose(idx, k, i + 1, cur, out);
                cur.pop();
            }
        }
        choose(&idx, d, 0, &mut Vec::new(), &mut combos);
        for c in combos {
            let rows: Vec<Vector> = c[1..].iter().map(|&i| sub(&points[i], &points[c[0]])).collect();
            let ns = nullspace(&rows, d);
            if ns.len() != 1 {
                continue;
            }
            let a = &ns[0];
            let off = dot(a, &points[c[0]]);
            let above = points.iter().any(|p| dot(a, p) > off);
            let below = points.iter().any(|p| dot(a, p) < off);
            if !above {
                out.insert(canon(a, &off, Comparator::Le));
            } else if !below {
                let neg: Vector = a.iter().map(|x| -x).collect();
                out.insert(canon(&neg, &-off.clone(), Comparator::Le));
            }
        }
        out
    }

    #[test]
    fn single_point_gives_equalities() {
        let h = convex_hull(&pts(&[&[10]]));
        assert_eq!(h.dim, 0);
        assert_eq!(h.equalities.len(), 1);
        assert!(h.inequalities.is_empty());
        let expected: BTreeSet<_> = [canon(&[rat(1)], &rat(10), Comparator::Eq)].into();
        assert_eq!(constraint_set(&h), expected);
    }

    #[test]
    fn two_points_give_interval() {
        let h = convex_hull(&pts(&[&[7], &[10]]));
        let expected: BTreeSet<_> = [
            canon(&[rat(1)], &rat(10), Comparator::Le),
            canon(&[rat(-1)], &rat(-7), Comparator::Le),
        ]
        .into();
        assert_eq!(constraint_set(&h), expected);
        // integer grid membership oracle
        for x in 0..20 {
            assert_eq!(h.contains(&[rat(x)]), (7..=10).contains(&x));
        }
    }

    #[test]
    fn triangle_has_three_facets() {
        let points = pts(&[&[0, 0], &[1, 0], &[0, 1]]);
        let h = convex_hull(&points);
        assert_eq!(h.dim, 2);
        assert!(h.equalities.is_empty());
        assert_eq!(h.inequalities.len(), 3);
        assert_eq!(constraint_set(&h), brute_force_facets(&points));
        let expected: BTreeSet<_> = [
            canon(&[rat(-1), rat(0)], &rat(0), Comparator::Le),
            canon(&[rat(0), rat(-1)], &rat(0), Comparator::Le),
            canon(&[rat(1), rat(1)], &rat(1), Comparator::Le),
        ]
        .into();
        assert_eq!(constraint_set(&h), expected);
    }

    #[test]
    fn collinear_points_in_the_plane() {
        let h = convex_hull(&pts(&[&[0, 0], &[2, 2], &[1, 1], &[5, 5]]));
        assert_eq!(h.dim, 1);
        assert_eq!(h.equalities.len(), 1);
        assert!(h.contains(&[rat(3), rat(3)]));
        assert!(!h.contains(&[rat(6), rat(6)]));
        assert!(!h.contains(&[rat(1), rat(2)]));
    }

    #[test]
    fn cube_with_interior_and_face_points() {
        let mut points = Vec::new();
        for x in 0..3 {
            for y in 0..3 {
                for z in 0..3 {
                    points.push(vec![rat(x), rat(y), rat(z)]);
                }
            }
        }
        let h = convex_hull(&points);
        let set = constraint_set(&h);
        assert_eq!(set.len(), 6);
        assert_eq!(set, brute_force_facets(&points));
    }

    proptest! {
        #[test]
        fn float_filter_agrees_with_exact_test(
            a in (1i64..1_000_000, 1i64..1_000_000, 1i64..1000),
            b in (-1_000_000i64..1_000_000, -1_000_000i64..1_000_000, 1i64..1000),
            t in (-1000i64..1000, 1i64..1000),
            nudge in -2i64..3,
        ) {
            // a line through two far-apart dyadic points, probed on and next to it
            let frac = |n: i64, d: i64| Rational::new(n.into(), d.into());
            let p0 = vec![frac(a.0, a.2), frac(a.1, a.2)];
            let p1 = vec![frac(b.0, b.2), frac(b.1, b.2)];
            let interior = vec![rat(0), rat(1_000_000_000)];
            let points = vec![p0.clone(), p1.clone()];
            prop_assume!(p0 != p1);
            let f = facet_through(&points, vec![0, 1], &interior);
            prop_assume!(dot(&f.normal, &interior) < f.offset);
            let s = frac(t.0, t.1);
            let on: Vector = p0.iter().zip(&p1).map(|(x, y)| x + (y - x) * &s).collect();
            let probe = vec![on[0].clone() + frac(nudge, 1_000_000_000), on[1].clone()];
            for q in [&on, &probe] {
                let approx: Vec<f64> = q.iter().map(rat_to_f64).collect();
                prop_assert_eq!(f.sees(q, &approx), dot(&f.normal, q) > f.offset);
            }
        }
    }

    proptest! {
        #[test]
        fn hull_matches_brute_force_in_2d(raw in prop::collection::vec((-6i64..6, -6i64..6), 3..14)) {
            let points = dedup_points(raw.iter().map(|&(x, y)| vec![rat(x), rat(y)]).collect());
            let h = convex_hull(&points);
            for p in &points {
                prop_assert!(h.contains(p));
            }
            if h.dim == 2 {
                prop_assert_eq!(constraint_set(&h), brute_force_facets(&points));
            }
        }

        #[test]
        fn hull_matches_brute_force_in_3d(raw in prop::collection::vec((-3i64..3, -3i64..3, -3i64..3), 4..12)) {
            let points = dedup_points(raw.iter().map(|&(x, y, z)| vec![rat(x), rat(y), rat(z)]).collect());
            let h = convex_hull(&points);
            for p in &points {
                prop_assert!(h.contains(p));
            }
            if h.dim == 3 {
                prop_assert_eq!(constraint_set(&h), brute_force_facets(&points));
            }
        }

        #[test]
        fn hull_grows_monotonically(raw in prop::collection::vec((-5i64..5, -5i64..5, -5i64..5), 2..10),
                                    extra in (-5i64..5, -5i64..5, -5i64..5),
                                    probe in prop::collection::vec((-6i64..6, -6i64..6, -6i64..6), 20)) {
            let points = dedup_points(raw.iter().map(|&(x, y, z)| vec![rat(x), rat(y), rat(z)]).collect());
            let before = convex_hull(&points);
            let mut more = points.clone();
            more.push(vec![rat(extra.0), rat(extra.1), rat(extra.2)]);
            let after = convex_hull(&dedup_points(more));
            for (x, y, z) in probe {
                let q = vec![rat(x), rat(y), rat(z)];
                if before.contains(&q) {
                    prop_assert!(after.contains(&q));
                }
            }
        }
    }
}
