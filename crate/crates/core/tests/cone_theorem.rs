mod common;

use num::BigRational;

use toricmmp::divisor::InvariantDivisor;
use toricmmp::examples::*;
use toricmmp::fan::Fan;
use toricmmp::lattice::rat;
use toricmmp::mori::{extremal_length, negative_extremal_rays};

/// Lengths of all (K + B)-negative extremal rays.
fn lengths(fan: &Fan, d: &InvariantDivisor) -> Vec<BigRational> {
    let (_, rays) = negative_extremal_rays(fan, None, d).unwrap();
    rays.iter()
        .map(|r| {
            let l = extremal_length(fan, None, d, r).unwrap();
            assert!(l.within_two_n, "{fan}: length {} exceeds 2n", l.length);
            assert!(l.within_n_plus_one, "{fan}: length {} exceeds n + 1", l.length);
            l.length
        })
        .collect()
}

#[test]
fn random_lc_pairs_respect_both_bounds() {
    let mut rays = 0;
    for (f, d) in common::mmp_corpus(51, 100) {
        rays += lengths(&f, &d).len();
    }
    assert!(rays >= 100, "only {rays} negative rays in the corpus");
}

#[test]
fn projective_spaces_attain_n_plus_one() {
    for n in 1..=4 {
        let p = projective_space(n);
        assert_eq!(lengths(&p, &InvariantDivisor::zero(n + 1)), vec![rat(n as i64 + 1, 1)]);
    }
}

#[test]
fn boundary_shortens_rays() {
    let p = projective_plane();
    let d = divisor(&p, &[(&[1, 0], rat(1, 1)), (&[0, 1], rat(1, 2))]);
    assert_eq!(lengths(&p, &d), vec![rat(3, 2)]);
}
