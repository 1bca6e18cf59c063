mod common;

use num::{BigInt, BigRational, One, Signed, Zero};
use proptest::prelude::*;

use toricmmp::cli::{divisor_document, fan_document, parse_divisor, parse_fan};
use toricmmp::divisor::{classify_pair, discrepancy, principal_divisor, InvariantDivisor};
use toricmmp::lattice::{determinant, rat, smith_invariants, solve_exact, LatticeVector};
use toricmmp::mori::{intersection_number, is_ample, mori_cone, numerical_spaces};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, failure_persistence: None, ..ProptestConfig::default() }
}

fn vector(n: usize) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-9i64..=9, n)
}

fn square(n: usize) -> impl Strategy<Value = Vec<Vec<i64>>> {
    prop::collection::vec(vector(n), n)
}

fn big(m: &[Vec<i64>]) -> Vec<Vec<BigInt>> {
    m.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
}

fn fractions() -> impl Strategy<Value = Vec<(i64, i64)>> {
    prop::collection::vec((-20i64..=20, 1i64..=6), 1..8)
}

fn points_in_box(n: usize, r: i64) -> Vec<LatticeVector> {
    let mut out = Vec::new();
    let mut v = vec![-r; n];
    loop {
        let p = LatticeVector::from_i64(&v);
        if p.is_primitive() {
            out.push(p);
        }
        let mut k = 0;
        while k < n && v[k] == r {
            v[k] = -r;
            k += 1;
        }
        if k == n {
            return out;
        }
        v[k] += 1;
    }
}

proptest! {
    #![proptest_config(config(200))]

    #[test]
    fn primitive_of_a_multiple(v in vector(3), k in -5i64..=5) {
        let v = LatticeVector::from_i64(&v);
        prop_assume!(!v.is_zero() && k != 0);
        let p = v.scale(&BigInt::from(k)).primitive().unwrap();
        let q = v.primitive().unwrap();
        prop_assert_eq!(p, if k > 0 { q } else { q.neg() });
    }

    #[test]
    fn determinant_is_basis_invariant(m in square(3), perm in Just([0usize, 1, 2]).prop_shuffle(), ops in prop::collection::vec((0usize..3, 0usize..3, -3i64..=3), 0..6)) {
        let d = determinant(&big(&m)).unwrap();
        let permuted: Vec<Vec<i64>> = perm.iter().map(|&i| m[i].clone()).collect();
        prop_assert_eq!(determinant(&big(&permuted)).unwrap().abs(), d.abs());
        // Column operations by elementary unimodular matrices.
        let mut u = m.clone();
        for (i, j, c) in ops {
            if i != j {
                for row in u.iter_mut() {
                    row[j] += c * row[i];
                }
            }
        }
        prop_assert_eq!(determinant(&big(&u)).unwrap(), d);
    }

    #[test]
    fn smith_invariants_detect_bases(m in square(3)) {
        let d = determinant(&big(&m)).unwrap();
        prop_assume!(!d.is_zero());
        let inv = smith_invariants(&big(&m));
        prop_assert_eq!(inv.iter().all(|x| x.is_one()), d.abs().is_one());
        prop_assert_eq!(inv.iter().fold(BigInt::one(), |a, b| a * b), d.abs());
    }

    #[test]
    fn exact_solutions_are_exact(m in prop::collection::vec(vector(3), 2..5), b in vector(4)) {
        let a: Vec<Vec<BigRational>> = m.iter().map(|r| r.iter().map(|&x| rat(x, 1)).collect()).collect();
        let rhs: Vec<BigRational> = b[..a.len()].iter().map(|&x| rat(x, 1)).collect();
        if let Some(x) = solve_exact(&a, &rhs) {
            for (row, y) in a.iter().zip(&rhs) {
                let s: BigRational = row.iter().zip(&x).map(|(p, q)| p * q).sum();
                prop_assert_eq!(&s, y);
            }
        }
    }

    #[test]
    fn rounding_identities(c in fractions()) {
        let d = InvariantDivisor::new(c.iter().map(|&(p, q)| rat(p, q)).collect());
        prop_assert_eq!(d.round_up(), d.scale(&rat(-1, 1)).round_down().scale(&rat(-1, 1)));
        prop_assert_eq!(d.round_down().add(&d.fractional_part()), d.clone());
        for x in d.fractional_part().coeffs() {
            prop_assert!(!x.is_negative() && *x < BigRational::one());
        }
    }
}

proptest! {
    #![proptest_config(config(40))]

    #[test]
    fn star_subdivision_keeps_support(seed in any::<u64>(), dim in 2usize..=3) {
        let mut rng = common::rng(seed);
        let f = common::random_simplicial_fan(&mut rng, dim);
        for c in f.cones().iter().filter(|c| c.len() >= 2).take(3) {
            let v = f.cone_vectors(c).iter().fold(LatticeVector::zero(dim), |a, b| a.add(b)).primitive().unwrap();
            if f.ray_index(&v).is_some() {
                continue;
            }
            let g = f.star_subdivision(&v).unwrap();
            prop_assert!(g.is_complete());
            prop_assert_eq!(g.rays().len(), f.rays().len() + 1);
            let k = g.ray_index(&v).unwrap();
            for m in g.maximal_cones() {
                let old = m.iter().all(|&i| i != k);
                prop_assert!(!old || f.maximal_cones().iter().any(|c| f.cone_vectors(c) == g.cone_vectors(m)));
            }
            prop_assert!(g.maximal_cones().iter().filter(|m| m.contains(&k)).count() >= 2);
            for p in points_in_box(dim, 2) {
                prop_assert_eq!(f.contains(&p), g.contains(&p));
            }
        }
    }

    #[test]
    fn complete_fans_have_two_sided_walls(seed in any::<u64>(), dim in 2usize..=3) {
        let f = common::random_simplicial_fan(&mut common::rng(seed), dim);
        let walls = f.walls();
        prop_assert!(walls.iter().all(|w| w.right.is_some()));
        prop_assert_eq!(walls.len(), f.interior_walls().len());
    }

    #[test]
    fn smooth_fans_have_discrepancy_at_least_one(seed in any::<u64>()) {
        let f = common::random_smooth_fan(&mut common::rng(seed));
        let z = InvariantDivisor::zero(f.rays().len());
        let sums: Vec<LatticeVector> = f.cones().iter().filter(|c| c.len() == 2).map(|c| f.ray(c[0]).add(f.ray(c[1]))).collect();
        for p in points_in_box(f.dim(), 2) {
            if f.ray_index(&p).is_some() {
                continue;
            }
            let a = discrepancy(&f, &z, &p).unwrap();
            prop_assert!(a >= BigRational::one());
            prop_assert_eq!(a.is_one(), sums.contains(&p), "{}", p);
        }
    }

    #[test]
    fn discrepancies_decrease_with_the_boundary(seed in any::<u64>(), dim in 2usize..=3) {
        let mut rng = common::rng(seed);
        let f = common::random_simplicial_fan(&mut rng, dim);
        let d = common::random_boundary(&mut rng, &f, false);
        let e = common::random_boundary(&mut rng, &f, false);
        let big = d.add(&e);
        for p in points_in_box(dim, 2) {
            prop_assert!(discrepancy(&f, &big, &p).unwrap() <= discrepancy(&f, &d, &p).unwrap());
        }
        prop_assert!(classify_pair(&f, &big).verdict <= classify_pair(&f, &d).verdict);
    }

    #[test]
    fn lc_and_klt_read_off_the_coefficients(seed in any::<u64>(), dim in 2usize..=3) {
        let mut rng = common::rng(seed);
        let f = common::random_simplicial_fan(&mut rng, dim);
        let d = common::random_boundary(&mut rng, &f, true);
        let c = classify_pair(&f, &d);
        let one = BigRational::one();
        prop_assert_eq!(c.lc, d.coeffs().iter().all(|x| *x <= one));
        prop_assert_eq!(c.klt, d.coeffs().iter().all(|x| *x < one));
    }

    #[test]
    fn intersection_numbers_are_bilinear(seed in any::<u64>(), a in -3i64..=3, b in -3i64..=3, m in vector(3)) {
        let mut rng = common::rng(seed);
        let f = common::random_simplicial_fan(&mut rng, 3);
        let d = common::random_boundary(&mut rng, &f, true);
        let e = common::random_integral_divisor(&mut rng, &f, -2, 2);
        let combo = d.scale(&rat(a, 1)).add(&e.scale(&rat(b, 1)));
        let principal = principal_divisor(&f, &LatticeVector::from_i64(&m));
        for w in f.walls() {
            let lhs = intersection_number(&f, &combo, &w).unwrap();
            let rhs = rat(a, 1) * intersection_number(&f, &d, &w).unwrap() + rat(b, 1) * intersection_number(&f, &e, &w).unwrap();
            prop_assert_eq!(lhs, rhs);
            prop_assert!(intersection_number(&f, &principal, &w).unwrap().is_zero());
        }
    }

    #[test]
    fn picard_number_of_smooth_fans(seed in any::<u64>()) {
        let f = common::random_smooth_fan(&mut common::rng(seed));
        let nl = numerical_spaces(&f, None).unwrap();
        prop_assert_eq!(nl.rho, f.rays().len() - f.dim());
        prop_assert_eq!(mori_cone(&f, None).unwrap().dim, nl.rho);
    }

    #[test]
    fn ample_divisors_are_positive_on_every_wall(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let f = common::random_smooth_fan(&mut rng);
        let d = common::random_integral_divisor(&mut rng, &f, -1, 3);
        let positive = f.walls().iter().all(|w| intersection_number(&f, &d, w).unwrap().is_positive());
        prop_assert_eq!(is_ample(&f, &d).unwrap(), positive);
    }

    #[test]
    fn documents_round_trip(seed in any::<u64>(), dim in 2usize..=3) {
        let mut rng = common::rng(seed);
        let f = common::random_simplicial_fan(&mut rng, dim);
        let d = common::random_boundary(&mut rng, &f, true);
        let back = parse_fan(&fan_document(&f, None).to_string(), "fan").unwrap();
        prop_assert_eq!(&back.fan, &f);
        prop_assert_eq!(parse_divisor(&divisor_document(&d).to_string(), "d", &back).unwrap(), d);
    }
}

/// Positivity on NE minus 0 implies ampleness on projective fans but not on the Kleiman fan.
#[test]
fn kleiman_is_positive_on_the_cone_but_not_ample() {
    let f = toricmmp::examples::kleiman();
    let ne = mori_cone(&f, None).unwrap();
    assert_eq!((ne.lattice.rho, ne.extremal_rays.len()), (1, 1));
    let basis = &ne.lattice.divisor_basis[0];
    let d = [rat(1, 1), rat(-1, 1)]
        .iter()
        .flat_map(|s| (1..=60).map(move |k| basis.scale(&(s * rat(k, 1)))))
        .find(|d| {
            toricmmp::divisor::is_cartier(&f, d)
                && ne.lattice.curves.iter().all(|c| {
                    let x = intersection_number(&f, d, &c.wall).unwrap();
                    x.is_positive() || (x.is_zero() && c.is_numerically_trivial())
                })
        })
        .expect("a Cartier divisor positive on NE minus 0");
    assert!(!is_ample(&f, &d).unwrap());
    assert!(ne.lattice.curves.iter().any(|c| c.is_numerically_trivial()));
}
