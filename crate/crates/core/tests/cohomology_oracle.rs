mod common;

use std::collections::HashMap;

use num::{BigInt, BigRational, Signed, ToPrimitive, Zero};
use rand::Rng;

use toricmmp::cohomology::{
    cech_cohomology_in, ideal_vanishing_check, inclusion_kernel, line_bundle_cohomology, polyhedron_cohomology,
    weight_window, Sheaf,
};
use toricmmp::divisor::{canonical_divisor, InvariantDivisor};
use toricmmp::examples::*;
use toricmmp::fan::Fan;
use toricmmp::lattice::rat;
use toricmmp::mori::{is_ample, is_nef, is_projective};

/// Rank over Q by plain Gaussian elimination.
fn rank(mut m: Vec<Vec<BigRational>>) -> usize {
    let mut r = 0;
    let cols = m.first().map_or(0, |row| row.len());
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let pivot = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = &row[c] / &pivot[c];
                for (x, p) in row.iter_mut().zip(&pivot).skip(c) {
                    *x -= &f * p;
                }
            }
        }
        r += 1;
    }
    r
}

/// Reduced cohomology dimensions of the simplicial complex on `faces` (closed under subsets),
/// indexed from degree -1.
fn reduced_cohomology(faces: &[Vec<usize>], top: usize) -> Vec<usize> {
    let mut by_size: Vec<Vec<Vec<usize>>> = vec![Vec::new(); top + 2];
    by_size[0].push(Vec::new());
    for f in faces {
        if !f.is_empty() && f.len() <= top + 1 {
            by_size[f.len()].push(f.clone());
        }
    }
    let index: Vec<HashMap<Vec<usize>, usize>> =
        by_size.iter().map(|l| l.iter().enumerate().map(|(i, f)| (f.clone(), i)).collect()).collect();
    // delta_k: C^{k-1} -> C^k, from size-k faces to size-(k+1) faces.
    let mut ranks = vec![0usize; top + 2];
    for k in 0..=top {
        let rows = by_size[k + 1].len();
        let cols = by_size[k].len();
        if rows == 0 || cols == 0 {
            continue;
        }
        let mut m = vec![vec![BigRational::zero(); cols]; rows];
        for (ri, f) in by_size[k + 1].iter().enumerate() {
            for j in 0..f.len() {
                let mut g = f.clone();
                g.remove(j);
                let ci = index[k][&g];
                m[ri][ci] = BigRational::from_integer(if j % 2 == 0 { 1 } else { -1 }.into());
            }
        }
        ranks[k] = rank(m);
    }
    (0..=top).map(|k| by_size[k].len() - ranks[k] - if k > 0 { ranks[k - 1] } else { 0 }).collect()
}

/// h^i(X, O(D)) by the reduced-simplicial-complex formula, on a simplicial complete fan.
fn oracle(fan: &Fan, d: &InvariantDivisor, window: &toricmmp::cohomology::WeightWindow) -> Vec<usize> {
    let n = fan.dim();
    let lo: Vec<i64> = window.lo.iter().map(|x| x.to_i64().unwrap()).collect();
    let hi: Vec<i64> = window.hi.iter().map(|x| x.to_i64().unwrap()).collect();
    let coeffs: Vec<BigInt> = d.coeffs().iter().map(|c| c.floor().to_integer()).collect();
    let mut total = vec![0usize; n + 1];
    let mut memo: HashMap<Vec<bool>, Vec<usize>> = HashMap::new();
    let mut u = lo.clone();
    loop {
        let violated: Vec<bool> = fan
            .rays()
            .iter()
            .zip(&coeffs)
            .map(|(r, c)| {
                let s: BigInt = r.0.iter().zip(&u).map(|(a, b)| a * BigInt::from(*b)).sum();
                (s + c).is_negative()
            })
            .collect();
        let h = memo
            .entry(violated.clone())
            .or_insert_with(|| {
                let faces: Vec<Vec<usize>> =
                    fan.cones().iter().filter(|c| c.iter().all(|&i| violated[i])).cloned().collect();
                reduced_cohomology(&faces, n)
            })
            .clone();
        for i in 0..=n {
            total[i] += h[i];
        }
        let mut k = 0;
        loop {
            if k == n {
                return total;
            }
            if u[k] < hi[k] {
                u[k] += 1;
                break;
            }
            u[k] = lo[k];
            k += 1;
        }
    }
}

#[test]
fn engine_matches_simplicial_oracle_on_random_fans() {
    let mut rng = common::rng(11);
    for case in 0..40 {
        let dim = if case % 2 == 0 { 2 } else { 3 };
        let fan = common::random_simplicial_fan(&mut rng, dim);
        let d = common::random_integral_divisor(&mut rng, &fan, -3, 2);
        let w = weight_window(&fan, &d).unwrap();
        let table = line_bundle_cohomology(&fan, &d).unwrap();
        let wide = w.doubled();
        let expect = oracle(&fan, &d, &wide);
        assert_eq!(&table.dims[..=dim], &expect[..], "case {case}: {fan} D = {:?}", d.coeffs());
        assert!(table.vanishes_above(dim));
        let again = cech_cohomology_in(&fan, &Sheaf::Line(d.clone()), &wide).unwrap();
        assert_eq!(again.dims, table.dims, "window doubling changed the answer in case {case}");
    }
}

#[test]
fn rational_divisors_round_down() {
    let p1 = projective_line();
    let d = divisor(&p1, &[(&[1], rat(-3, 2))]);
    let t = line_bundle_cohomology(&p1, &d).unwrap();
    assert_eq!((t.h(0), t.h(1)), (0, 1));
}

#[test]
fn demazure_vanishing_and_serre_duality() {
    let mut rng = common::rng(12);
    for case in 0..30 {
        let fan = common::random_smooth_fan(&mut rng);
        let d = common::random_nef_cartier(&mut rng, &fan);
        assert!(is_nef(&fan, &d).unwrap());
        let t = line_bundle_cohomology(&fan, &d).unwrap();
        assert!(t.dims[1..].iter().all(|&h| h == 0), "case {case}: {:?}", t.dims);
    }
    for case in 0..20 {
        let fan = common::random_smooth_surface(&mut rng);
        let d = common::random_integral_divisor(&mut rng, &fan, -2, 2);
        let k = canonical_divisor(&fan);
        let a = line_bundle_cohomology(&fan, &d).unwrap();
        let b = line_bundle_cohomology(&fan, &k.sub(&d)).unwrap();
        for i in 0..=2 {
            assert_eq!(a.h(i), b.h(2 - i), "case {case}, degree {i}");
        }
    }
}

#[test]
fn euler_characteristic_is_riemann_roch_on_the_plane() {
    let p = projective_plane();
    for k in -5..=4 {
        let d = divisor(&p, &[(&[1, 0], rat(k, 1))]);
        let t = line_bundle_cohomology(&p, &d).unwrap();
        assert_eq!(t.euler_characteristic(), (k + 1) * (k + 2) / 2);
    }
}

#[test]
fn ideal_sequences_telescope_on_random_triples() {
    let mut rng = common::rng(13);
    let mut checked = 0;
    while checked < 10 {
        let fan = common::random_smooth_fan(&mut rng);
        let rays: Vec<usize> = (0..fan.rays().len()).filter(|_| rng.gen_bool(0.4)).collect();
        if rays.is_empty() {
            continue;
        }
        let phi: Vec<Vec<usize>> = fan.cones().iter().filter(|c| rays.iter().any(|r| c.contains(r))).cloned().collect();
        let Some(l) = is_projective(&fan).unwrap().certificate else { continue };
        assert!(is_ample(&fan, &l).unwrap());
        let iv = ideal_vanishing_check(&fan, &phi, &l).unwrap();
        assert!(iv.telescopes && iv.holds(), "{fan} {phi:?}");
        checked += 1;
    }
}

#[test]
fn sommese_and_injectivity() {
    let s = sommese();
    assert_eq!(line_bundle_cohomology(&s.fan, &s.pinned_sheaf()).unwrap().h(3), 1);
    let e = injectivity_f1();
    assert_eq!(inclusion_kernel(&e.fan, &e.a(), &e.a().add(&e.f), 1).unwrap(), 1);
}

#[test]
fn polyhedron_cycle_sections() {
    let p = projective_plane();
    let phi = projective_plane_boundary(&p);
    for d in 1..=3 {
        let l = divisor(&p, &[(&[0, 1], rat(d, 1))]);
        assert_eq!(polyhedron_cohomology(&p, &phi, &l).unwrap().h(0) as i64, 3 * d);
    }
}
