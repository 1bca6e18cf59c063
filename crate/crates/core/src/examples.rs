//! Fans and divisors of the built-in examples, constructed in code.

use num::BigRational;

use crate::divisor::InvariantDivisor;
use crate::error::{Error, Result};
use crate::fan::Fan;
use crate::lattice::{rat, LatticeVector};

fn fan(dim: usize, rays: &[&[i64]], cones: &[&[usize]]) -> Fan {
    Fan::from_i64(dim, rays, cones).expect("built-in fan is valid")
}

fn v(x: &[i64]) -> LatticeVector {
    LatticeVector::from_i64(x)
}

/// Index of a ray given by coordinates; panics if absent.
pub fn ray(f: &Fan, coords: &[i64]) -> usize {
    f.ray_index(&v(coords)).unwrap_or_else(|| panic!("no ray {coords:?}"))
}

/// Divisor from (ray, coefficient) pairs; other coefficients are zero.
pub fn divisor(f: &Fan, pairs: &[(&[i64], BigRational)]) -> InvariantDivisor {
    let p: Vec<(LatticeVector, BigRational)> = pairs.iter().map(|(c, q)| (v(c), q.clone())).collect();
    InvariantDivisor::from_pairs(f, &p).expect("rays of the example")
}

pub fn projective_line() -> Fan {
    fan(1, &[&[1], &[-1]], &[&[0], &[1]])
}

pub fn projective_plane() -> Fan {
    fan(2, &[&[1, 0], &[0, 1], &[-1, -1]], &[&[0, 1], &[1, 2], &[0, 2]])
}

pub fn projective_space(n: usize) -> Fan {
    let mut rays: Vec<LatticeVector> = (0..n).map(|i| LatticeVector::unit(n, i)).collect();
    rays.push(LatticeVector::from_i64(&vec![-1; n]));
    let cones: Vec<Vec<usize>> = (0..=n).map(|skip| (0..=n).filter(|&i| i != skip).collect()).collect();
    Fan::new(n, rays, cones).expect("projective space")
}

pub fn product_of_lines() -> Fan {
    fan(2, &[&[1, 0], &[0, 1], &[-1, 0], &[0, -1]], &[&[0, 1], &[1, 2], &[2, 3], &[3, 0]])
}

/// Hirzebruch surface F_a with rays (1,0), (0,1), (-1,a), (0,-1).
pub fn hirzebruch(a: i64) -> Fan {
    fan(2, &[&[1, 0], &[0, 1], &[-1, a], &[0, -1]], &[&[0, 1], &[1, 2], &[2, 3], &[3, 0]])
}

/// P(O + O(a_1) + ... + O(a_r)) over P^1: base rays (1,0..), (-1,a); fibre rays f_i and -sum f_i.
pub fn projective_bundle_over_line(twists: &[i64]) -> Fan {
    let r = twists.len();
    let n = r + 1;
    let mut rays = vec![LatticeVector::unit(n, 0)];
    let mut back = vec![-1];
    back.extend_from_slice(twists);
    rays.push(LatticeVector::from_i64(&back));
    for i in 0..r {
        rays.push(LatticeVector::unit(n, i + 1));
    }
    let mut last = vec![0];
    last.extend(std::iter::repeat_n(-1, r));
    rays.push(LatticeVector::from_i64(&last));
    let fibre: Vec<usize> = (2..n + 2).collect();
    let mut cones = Vec::new();
    for b in 0..2 {
        for skip in &fibre {
            let mut c = vec![b];
            c.extend(fibre.iter().copied().filter(|x| x != skip));
            cones.push(c);
        }
    }
    Fan::new(n, rays, cones).expect("projective bundle")
}

/// Labels of the Francia rays e1..e5.
pub const FRANCIA_RAYS: [[i64; 3]; 5] = [[1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, -2], [-1, -1, 1]];

/// P(1,1,1,2): all 3-subsets of e1, e2, e4, e5.
pub fn francia_x1() -> Fan {
    let r = &FRANCIA_RAYS;
    fan(3, &[&r[0], &r[1], &r[3], &r[4]], &[&[0, 1, 2], &[0, 1, 3], &[0, 2, 3], &[1, 2, 3]])
}

/// Blow-up of P(1,1,1,2) along e3 = e1 + e2 + e5.
pub fn francia_x2() -> Fan {
    francia_x1().star_subdivision(&v(&FRANCIA_RAYS[2])).expect("e3 lies in <e1,e2,e5>")
}

/// The fan of P_{P^1}(O + O(1) + O(2)) in the Francia coordinates.
pub fn francia_x4() -> Fan {
    let r = &FRANCIA_RAYS;
    let rays: Vec<&[i64]> = r.iter().map(|x| x.as_slice()).collect();
    fan(3, &rays, &[&[0, 2, 3], &[1, 2, 3], &[0, 3, 4], &[1, 3, 4], &[0, 2, 4], &[1, 2, 4]])
}

/// The contraction target of X2: wall <e1,e2> removed.
pub fn francia_x3() -> Fan {
    let r = &FRANCIA_RAYS;
    let rays: Vec<&[i64]> = r.iter().map(|x| x.as_slice()).collect();
    fan(3, &rays, &[&[0, 1, 2, 3], &[0, 3, 4], &[1, 3, 4], &[0, 2, 4], &[1, 2, 4]])
}

pub const LOGFLIP_RAYS: [[i64; 3]; 4] = [[1, 0, 0], [-1, 2, 0], [0, 0, 1], [-1, 3, -3]];

/// The non-complete threefold X with cones <e1,e3,e4>, <e2,e3,e4>.
pub fn logflip_x() -> Fan {
    let r = &LOGFLIP_RAYS;
    fan(3, &[&r[0], &r[1], &r[2], &r[3]], &[&[0, 2, 3], &[1, 2, 3]])
}

/// The flipped side: <e1,e2,e3>, <e1,e2,e4>.
pub fn logflip_x_plus() -> Fan {
    let r = &LOGFLIP_RAYS;
    fan(3, &[&r[0], &r[1], &r[2], &r[3]], &[&[0, 1, 2], &[0, 1, 3]])
}

/// The affine base: the single cone <e1,e2,e3,e4>.
pub fn logflip_y() -> Fan {
    let r = &LOGFLIP_RAYS;
    fan(3, &[&r[0], &r[1], &r[2], &r[3]], &[&[0, 1, 2, 3]])
}

/// D1 + D3 on any fan carrying the logflip rays.
pub fn logflip_boundary(f: &Fan) -> InvariantDivisor {
    divisor(f, &[(&LOGFLIP_RAYS[0], rat(1, 1)), (&LOGFLIP_RAYS[2], rat(1, 1))])
}

/// Rays e0, e1, ..., e_{n+2} of the non-Q-factorial example.
pub fn nonqfact_rays(n: usize) -> Result<Vec<LatticeVector>> {
    if n < 2 {
        return Err(Error::Invalid(format!("n must be at least 2, got {n}")));
    }
    let n = n as i64;
    let mut rays = vec![v(&[0, -1, 0])];
    for i in 1..=n + 1 {
        let s: i64 = (n + 1 - i..n).sum();
        rays.push(v(&[n + 1 - i, s, 1]));
    }
    rays.push(v(&[-1, 0, 1]));
    Ok(rays)
}

fn nonqfact_fan(n: usize, cones: Vec<Vec<usize>>) -> Result<Fan> {
    Fan::new(3, nonqfact_rays(n)?, cones)
}

/// X: <e0,e1,e_{n+2}> and <e1,...,e_{n+2}>.
pub fn nonqfact_x(n: usize) -> Result<Fan> {
    nonqfact_fan(n, vec![vec![0, 1, n + 2], (1..=n + 2).collect()])
}

/// W: the single cone <e0,...,e_{n+2}>.
pub fn nonqfact_w(n: usize) -> Result<Fan> {
    nonqfact_fan(n, vec![(0..=n + 2).collect()])
}

/// X+: <e0,e_i,e_{i+1}> for i = 1..n+1.
pub fn nonqfact_x_plus(n: usize) -> Result<Fan> {
    nonqfact_fan(n, (1..=n + 1).map(|i| vec![0, i, i + 1]).collect())
}

pub const KLEIMAN_RAYS: [[i64; 3]; 6] =
    [[1, 0, 1], [0, 1, 1], [-1, -1, 1], [1, 0, -1], [0, 1, -1], [-1, -1, -1]];

/// The complete non-projective threefold with one non-simplicial pair of quadrilateral cones.
pub fn kleiman() -> Fan {
    let r = &KLEIMAN_RAYS;
    let rays: Vec<&[i64]> = r.iter().map(|x| x.as_slice()).collect();
    fan(
        3,
        &rays,
        &[&[0, 1, 3], &[1, 3, 4], &[1, 2, 4, 5], &[0, 2, 3, 5], &[0, 1, 2], &[3, 4, 5]],
    )
}

/// The wall curve of the Kleiman fan between <v1,v2,v4> and <v2,v4,v5>, as ray coordinates.
pub const KLEIMAN_CURVE: [[i64; 3]; 2] = [[0, 1, 1], [1, 0, -1]];

pub const FP_RAYS: [[i64; 3]; 8] = [
    [1, 0, 0],
    [0, 1, 0],
    [0, 0, 1],
    [0, -1, -1],
    [-1, 0, -1],
    [-2, -1, 0],
    [-1, -1, -1],
    [-2, -1, -1],
];

/// X1 with rays v1, v2, v3, v5, v6.
pub fn fp_x1() -> Fan {
    let r = &FP_RAYS;
    fan(
        3,
        &[&r[0], &r[1], &r[2], &r[4], &r[5]],
        &[&[0, 1, 2], &[0, 2, 4], &[0, 1, 3], &[0, 3, 4], &[1, 2, 3], &[2, 3, 4]],
    )
}

/// Y: X1 blown up successively along v4, v7, v8.
pub fn fp_y() -> Fan {
    let mut f = fp_x1();
    for i in [3, 6, 7] {
        f = f.star_subdivision(&v(&FP_RAYS[i])).expect("ray inside the support");
    }
    f
}

/// X: Y with the wall <v1,v5> exchanged for <v2,v4>.
pub fn fp_x() -> Result<Fan> {
    let y = fp_y();
    let a = ray(&y, &FP_RAYS[0]);
    let b = ray(&y, &FP_RAYS[4]);
    let wall = y
        .interior_walls()
        .into_iter()
        .find(|w| w.rays == crate::fan::sorted(&[a, b]))
        .ok_or_else(|| Error::Invalid("wall <v1,v5> missing".into()))?;
    y.exchange_wall(&wall)
}

/// Data of the Sommese fourfold P_{P^1}(O + O(1)^3).
pub struct Sommese {
    pub fan: Fan,
    /// Tautological class M.
    pub m: InvariantDivisor,
    /// Fibre class F.
    pub f: InvariantDivisor,
}

impl Sommese {
    /// -5M + 3F.
    pub fn pinned_sheaf(&self) -> InvariantDivisor {
        self.m.scale(&rat(-5, 1)).add(&self.f.scale(&rat(3, 1)))
    }
}

pub fn sommese() -> Sommese {
    let fan = projective_bundle_over_line(&[1, 1, 1]);
    let m = divisor(&fan, &[(&[0, -1, -1, -1], rat(1, 1))]);
    let f = divisor(&fan, &[(&[1, 0, 0, 0], rat(1, 1))]);
    Sommese { fan, m, f }
}

/// Data of F_1 = P_{P^1}(O + O(1)): negative section S, positive section H, fibre F.
pub struct Injectivity {
    pub fan: Fan,
    pub s: InvariantDivisor,
    pub h: InvariantDivisor,
    pub f: InvariantDivisor,
}

impl Injectivity {
    /// K + S + H.
    pub fn a(&self) -> InvariantDivisor {
        crate::divisor::canonical_divisor(&self.fan).add(&self.s).add(&self.h)
    }
}

pub fn injectivity_f1() -> Injectivity {
    let fan = hirzebruch(1);
    let s = divisor(&fan, &[(&[0, 1], rat(1, 1))]);
    let h = divisor(&fan, &[(&[0, -1], rat(1, 1))]);
    let f = divisor(&fan, &[(&[1, 0], rat(1, 1))]);
    Injectivity { fan, s, h, f }
}

/// Data of the P^1-bundle M = P_Z(O + O(A_0)) over the blown-up quadric Z.
pub struct ConeExample {
    pub z: Fan,
    pub m: Fan,
    /// The section E; its restriction to X is D+.
    pub e: InvariantDivisor,
    /// The star-closed set of X = V(1,0,0) + V(1,-1,0).
    pub phi: Vec<Vec<usize>>,
}

pub fn cone_example() -> ConeExample {
    let z = fan(
        2,
        &[&[1, 0], &[1, -1], &[0, -1], &[-1, 0], &[0, 1]],
        &[&[0, 1], &[1, 2], &[2, 3], &[3, 4], &[4, 0]],
    );
    let m = bundle_over_surface(&z, &[(&[0, 1], 1)]);
    let e = divisor(&m, &[(&[0, 0, 1], rat(1, 1))]);
    let phi = star_closed_union(&m, &[&[1, 0, 0], &[1, -1, 0]]);
    ConeExample { z, m, e, phi }
}

/// P(O + O(D)) over a complete surface fan, D = sum a_v D_v: rays (v, -a_v) and (0, 0, +-1).
fn bundle_over_surface(z: &Fan, twist: &[(&[i64], i64)]) -> Fan {
    let mut rays = Vec::new();
    for r in z.rays() {
        let a = twist.iter().find(|(c, _)| v(c) == *r).map_or(0, |(_, a)| *a);
        let mut x = r.0.clone();
        x.push((-a).into());
        rays.push(LatticeVector(x));
    }
    let k = rays.len();
    rays.push(v(&[0, 0, 1]));
    rays.push(v(&[0, 0, -1]));
    let mut cones = Vec::new();
    for c in z.maximal_cones() {
        for top in [k, k + 1] {
            let mut cc = c.clone();
            cc.push(top);
            cones.push(cc);
        }
    }
    Fan::new(3, rays, cones).expect("P^1-bundle over a surface")
}

/// All cones of `f` containing one of the given rays.
pub fn star_closed_union(f: &Fan, rays: &[&[i64]]) -> Vec<Vec<usize>> {
    let idx: Vec<usize> = rays.iter().map(|r| ray(f, r)).collect();
    f.cones().iter().filter(|c| idx.iter().any(|i| c.contains(i))).cloned().collect()
}

/// The torus boundary of P^2 as a star-closed set: every nonzero cone.
pub fn projective_plane_boundary(f: &Fan) -> Vec<Vec<usize>> {
    f.cones().iter().filter(|c| !c.is_empty()).cloned().collect()
}

/// Registry ids with one-line summaries.
pub const REGISTRY: [(&str, &str); 9] = [
    ("kleiman-nonprojective", "complete non-projective threefold with rho = 1 and a half-line Mori cone"),
    ("flop-destroys-projectivity", "a flop of a projective smooth threefold whose result has NE = N_1"),
    ("francia-5.1", "Francia's flip of the blown-up P(1,1,1,2)"),
    ("logflip-5.2", "a log flip of (X, D1 + D3) with intersection numbers and adjunction"),
    ("nonqfact-5.3", "a non-Q-factorial canonical Gorenstein flip (parameter n)"),
    ("sommese", "h^3 of -5M + 3F on P_{P^1}(O + O(1)^3)"),
    ("injectivity-f1", "the kernel of H^1(K+S+H) -> H^1(K+S+H+F) on F_1"),
    ("cone-ex-bpf", "freeness of |mD+| on a reducible toric polyhedron"),
    ("toric-polyhedron", "star-closed sets, qlc centres and ideal-sheaf vanishing"),
];
