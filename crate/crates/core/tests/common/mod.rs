//! Seeded random corpora of fans, boundaries and divisors shared by the integration suites.
#![allow(dead_code)]

pub mod discrepancy;

use num::{BigInt, BigRational, One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use toricmmp::divisor::{principal_divisor, InvariantDivisor};
use toricmmp::examples::{hirzebruch, product_of_lines, projective_bundle_over_line, projective_plane, projective_space};
use toricmmp::fan::Fan;
use toricmmp::lattice::{rat, LatticeVector};
use toricmmp::mori::mori_cone;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn sum_of(fan: &Fan, cone: &[usize], coeffs: &[i64]) -> LatticeVector {
    let mut v = LatticeVector::zero(fan.dim());
    for (&i, &c) in cone.iter().zip(coeffs) {
        v = v.add(&fan.ray(i).scale(&BigInt::from(c)));
    }
    v
}

/// Blow up a random torus-fixed point or invariant curve (star subdivision at a sum of rays of a
/// smooth cone): stays smooth and projective.
pub fn blow_up_randomly(fan: &Fan, rng: &mut ChaCha8Rng) -> Fan {
    let cones: Vec<Vec<usize>> = fan.cones().iter().filter(|c| c.len() >= 2).cloned().collect();
    let c = cones.choose(rng).expect("a cone of dimension at least two");
    fan.star_subdivision(&sum_of(fan, c, &vec![1; c.len()])).expect("ray sum lies in the fan")
}

pub fn random_smooth_surface(rng: &mut ChaCha8Rng) -> Fan {
    let mut f = match rng.gen_range(0..4) {
        0 => projective_plane(),
        1 => product_of_lines(),
        _ => hirzebruch(rng.gen_range(1..=3)),
    };
    for _ in 0..rng.gen_range(0..=3) {
        f = blow_up_randomly(&f, rng);
    }
    f
}

pub fn random_smooth_threefold(rng: &mut ChaCha8Rng) -> Fan {
    let mut f = match rng.gen_range(0..3) {
        0 => projective_space(3),
        1 => projective_bundle_over_line(&[0, rng.gen_range(0..=2)]),
        _ => projective_bundle_over_line(&[1, rng.gen_range(1..=2)]),
    };
    for _ in 0..rng.gen_range(0..=2) {
        f = blow_up_randomly(&f, rng);
    }
    f
}

/// Weighted projective planes and 3-spaces with e_0 = -(q_1, ..., q_n).
pub fn weighted_projective(weights: &[i64]) -> Fan {
    let n = weights.len();
    let mut rays: Vec<LatticeVector> = (0..n).map(|i| LatticeVector::unit(n, i)).collect();
    rays.push(LatticeVector::from_i64(&weights.iter().map(|w| -w).collect::<Vec<_>>()));
    let cones: Vec<Vec<usize>> = (0..=n).map(|skip| (0..=n).filter(|&i| i != skip).collect()).collect();
    Fan::new(n, rays, cones).expect("weighted projective space")
}

/// A complete simplicial fan, usually singular: a weighted projective space or a smooth fan with
/// up to two star subdivisions at random interior points of random cones.
pub fn random_simplicial_fan(rng: &mut ChaCha8Rng, dim: usize) -> Fan {
    let mut f = match (dim, rng.gen_range(0..4)) {
        (2, 0) => weighted_projective(&[1, 2]),
        (2, 1) => weighted_projective(&[2, 3]),
        (2, 2) => hirzebruch(rng.gen_range(0..=2)),
        (2, _) => projective_plane(),
        (_, 0) => weighted_projective(&[1, 1, 2]),
        (_, 1) => weighted_projective(&[1, 2, 3]),
        (_, 2) => projective_bundle_over_line(&[0, 1]),
        _ => projective_space(3),
    };
    for _ in 0..rng.gen_range(0..=2) {
        let cones: Vec<Vec<usize>> = f.cones().iter().filter(|c| c.len() >= 2).cloned().collect();
        let c = cones.choose(rng).unwrap().clone();
        let coeffs: Vec<i64> = (0..c.len()).map(|_| rng.gen_range(1..=2)).collect();
        let v = sum_of(&f, &c, &coeffs).primitive().unwrap();
        if f.ray_index(&v).is_none() {
            f = f.star_subdivision(&v).expect("interior point of a cone");
        }
    }
    f
}

/// Boundary coefficients drawn from {0, 1/3, 1/2, 2/3, 1}; with `allow_heavy`, occasionally 3/2.
pub fn random_boundary(rng: &mut ChaCha8Rng, fan: &Fan, allow_heavy: bool) -> InvariantDivisor {
    let choices = [rat(0, 1), rat(0, 1), rat(1, 3), rat(1, 2), rat(2, 3), rat(1, 1)];
    let coeffs = (0..fan.rays().len())
        .map(|_| {
            if allow_heavy && rng.gen_ratio(1, 12) {
                rat(3, 2)
            } else {
                choices.choose(rng).unwrap().clone()
            }
        })
        .collect();
    InvariantDivisor::new(coeffs)
}

pub fn random_integral_divisor(rng: &mut ChaCha8Rng, fan: &Fan, lo: i64, hi: i64) -> InvariantDivisor {
    InvariantDivisor::new((0..fan.rays().len()).map(|_| BigRational::from_integer(rng.gen_range(lo..=hi).into())).collect())
}

/// A nef integral divisor on a smooth complete projective fan: a random non-negative combination of
/// nef-cone generators, cleared of denominators and shifted by a random principal divisor.
pub fn random_nef_cartier(rng: &mut ChaCha8Rng, fan: &Fan) -> InvariantDivisor {
    let ne = mori_cone(fan, None).expect("Mori cone");
    let rho = ne.lattice.rho;
    let mut y = vec![BigRational::zero(); rho];
    for r in &ne.nef_rays {
        let k = BigRational::from_integer(rng.gen_range(0..=2).into());
        for (a, b) in y.iter_mut().zip(r) {
            *a += &k * BigRational::from_integer(b.clone());
        }
    }
    let mut d = InvariantDivisor::zero(fan.rays().len());
    for (yi, bd) in y.iter().zip(&ne.lattice.divisor_basis) {
        d = d.add(&bd.scale(yi));
    }
    let den = d.coeffs().iter().fold(BigInt::one(), |acc, c| num::integer::lcm(acc, c.denom().clone()));
    d = d.scale(&BigRational::from_integer(den));
    let m: Vec<i64> = (0..fan.dim()).map(|_| rng.gen_range(-1..=1)).collect();
    d.add(&principal_divisor(fan, &LatticeVector::from_i64(&m)))
}

/// A smooth complete surface or threefold.
pub fn random_smooth_fan(rng: &mut ChaCha8Rng) -> Fan {
    if rng.gen_bool(0.5) {
        random_smooth_surface(rng)
    } else {
        random_smooth_threefold(rng)
    }
}

/// Every built-in fan, with the zero boundary and, where one is attached, its named boundary.
pub fn builtin_pairs() -> Vec<(String, Fan, InvariantDivisor)> {
    use toricmmp::examples::*;
    let mut fans: Vec<(String, Fan)> = vec![
        ("P1".into(), projective_line()),
        ("P2".into(), projective_plane()),
        ("P3".into(), projective_space(3)),
        ("P1xP1".into(), product_of_lines()),
        ("P(1,1,2)".into(), weighted_projective(&[1, 2])),
        ("P(1,2,3)".into(), weighted_projective(&[2, 3])),
        ("kleiman".into(), kleiman()),
        ("flop-x1".into(), fp_x1()),
        ("flop-y".into(), fp_y()),
        ("flop-x".into(), fp_x().unwrap()),
        ("francia-x1".into(), francia_x1()),
        ("francia-x2".into(), francia_x2()),
        ("francia-x3".into(), francia_x3()),
        ("francia-x4".into(), francia_x4()),
        ("logflip-x".into(), logflip_x()),
        ("logflip-x-plus".into(), logflip_x_plus()),
        ("logflip-y".into(), logflip_y()),
        ("sommese".into(), sommese().fan),
        ("cone-ex-z".into(), cone_example().z),
        ("cone-ex-m".into(), cone_example().m),
    ];
    for a in 0..=3 {
        fans.push((format!("F{a}"), hirzebruch(a)));
    }
    for n in 2..=3 {
        fans.push((format!("nonqfact-{n}-x"), nonqfact_x(n).unwrap()));
        fans.push((format!("nonqfact-{n}-w"), nonqfact_w(n).unwrap()));
        fans.push((format!("nonqfact-{n}-x-plus"), nonqfact_x_plus(n).unwrap()));
    }
    let mut out: Vec<(String, Fan, InvariantDivisor)> = Vec::new();
    for (name, f) in fans {
        if name.starts_with("logflip") {
            out.push((format!("{name} + B"), f.clone(), logflip_boundary(&f)));
        }
        let zero = InvariantDivisor::zero(f.rays().len());
        out.push((name, f, zero));
    }
    out
}

/// A complete Q-factorial surface or threefold with a boundary making the pair lc.
pub fn random_lc_pair(rng: &mut ChaCha8Rng) -> (Fan, InvariantDivisor) {
    loop {
        let dim = rng.gen_range(2..=3);
        let fan = if rng.gen_bool(0.5) {
            random_simplicial_fan(rng, dim)
        } else if dim == 2 {
            random_smooth_surface(rng)
        } else {
            random_smooth_threefold(rng)
        };
        let d = random_boundary(rng, &fan, false);
        if toricmmp::divisor::classify_pair(&fan, &d).lc {
            return (fan, d);
        }
    }
}

/// A projective simplicial threefold: P^3 or a P^2-bundle over P^1 after one to three weighted
/// blow-ups with weights in 1..=3. These produce flips under the K-MMP.
pub fn random_weighted_blowup(rng: &mut ChaCha8Rng) -> Fan {
    let mut f = match rng.gen_range(0..3) {
        0 => projective_space(3),
        1 => projective_bundle_over_line(&[0, 1]),
        _ => projective_bundle_over_line(&[1, 2]),
    };
    for _ in 0..rng.gen_range(1..=3) {
        let cones: Vec<Vec<usize>> = f.cones().iter().filter(|c| c.len() >= 2).cloned().collect();
        let c = cones.choose(rng).unwrap().clone();
        let coeffs: Vec<i64> = (0..c.len()).map(|_| rng.gen_range(1..=3)).collect();
        let v = sum_of(&f, &c, &coeffs).primitive().unwrap();
        if f.ray_index(&v).is_none() {
            f = f.star_subdivision(&v).expect("interior point of a cone");
        }
    }
    f
}

/// The MMP corpus: lc pairs on random fans, half of them weighted blow-ups of threefolds.
pub fn mmp_corpus(seed: u64, count: usize) -> Vec<(Fan, InvariantDivisor)> {
    let mut rng = rng(seed);
    let mut out = Vec::new();
    while out.len() < count {
        if out.len() % 2 == 0 {
            out.push(random_lc_pair(&mut rng));
            continue;
        }
        let f = random_weighted_blowup(&mut rng);
        let d = if rng.gen_bool(0.5) { InvariantDivisor::zero(f.rays().len()) } else { random_boundary(&mut rng, &f, false) };
        if toricmmp::divisor::classify_pair(&f, &d).lc {
            out.push((f, d));
        }
    }
    out
}
