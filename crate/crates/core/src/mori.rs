//! Numerical classes, intersection numbers with wall curves, Mori and nef cones.

use num::{BigInt, BigRational, One, Signed, Zero};

use crate::divisor::{log_canonical_divisor, q_cartier_equations, support_function, InvariantDivisor, SupportFunction};
use crate::error::{Error, Result};
use crate::fan::{circuit_relation, Fan, Wall};
use crate::lattice::{nullspace, rat_dot, rref, solve_exact, to_rat, transpose, LatticeVector, RationalVector};
use crate::polyhedral::PolyCone;

/// The invariant curve V(omega) of a wall, with its numerical class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WallCurve {
    pub wall: Wall,
    /// Coordinates in the chosen basis of N_1.
    pub class: Vec<BigRational>,
    /// Circuit relation among the rays of the two adjacent cones, when they form one,
    /// oriented so the two rays off the wall are positive. Indexed by fan rays.
    pub relation: Option<Vec<BigInt>>,
}

impl WallCurve {
    pub fn is_numerically_trivial(&self) -> bool {
        self.class.iter().all(|c| c.is_zero())
    }

    /// Numbers of positive and negative coefficients in the wall relation.
    pub fn relation_signature(&self) -> Option<(usize, usize)> {
        self.relation.as_ref().map(|r| {
            (r.iter().filter(|x| x.is_positive()).count(), r.iter().filter(|x| x.is_negative()).count())
        })
    }
}

/// Bases of N^1 and N_1 (absolute, or relative to a base fan) with the wall curves.
#[derive(Debug, Clone)]
pub struct NumericalLattice {
    pub rho: usize,
    /// Basis of the space of Q-Cartier divisors, as coefficient vectors.
    pub divisor_space: Vec<Vec<BigRational>>,
    /// Basis of N_1: functionals on the divisor space (reduced row echelon rows).
    pub curve_basis: Vec<Vec<BigRational>>,
    pivots: Vec<usize>,
    /// Divisors dual to the curve basis.
    pub divisor_basis: Vec<InvariantDivisor>,
    /// Walls whose curves are contracted (all interior walls in the absolute case).
    pub curves: Vec<WallCurve>,
    pub relative: bool,
}

impl NumericalLattice {
    /// N^1 coordinates: pairings with the curve basis.
    pub fn divisor_class(&self, fan: &Fan, d: &InvariantDivisor) -> Result<Vec<BigRational>> {
        let x = self.space_coordinates(d).ok_or(Error::NotQCartier)?;
        let _ = fan;
        Ok(self.curve_basis.iter().map(|r| rat_dot(r, &x)).collect())
    }

    fn space_coordinates(&self, d: &InvariantDivisor) -> Option<Vec<BigRational>> {
        let cols = transpose(&self.divisor_space);
        solve_exact(&cols, d.coeffs())
    }

    /// Pairing matrix between the N^1 basis and the N_1 basis.
    pub fn pairing_matrix(&self) -> Vec<Vec<BigRational>> {
        self.divisor_basis
            .iter()
            .map(|d| {
                let x = self.space_coordinates(d).expect("basis divisor is Q-Cartier");
                self.curve_basis.iter().map(|r| rat_dot(r, &x)).collect()
            })
            .collect()
    }

    fn coordinates_of_functional(&self, w: &[BigRational]) -> Vec<BigRational> {
        self.pivots.iter().map(|&p| w[p].clone()).collect()
    }
}

/// D . V(omega) for a Q-Cartier divisor given by its support function.
pub fn wall_pairing(fan: &Fan, wall: &Wall, sf: &SupportFunction) -> BigRational {
    let right = wall.right.expect("interior wall");
    let ms = &sf.m[wall.left];
    let mr = &sf.m[right];
    let nu = fan.wall_normal(wall).neg();
    let b = fan.maximal_cones()[right].iter().find(|i| !wall.rays.contains(i)).expect("off-wall ray");
    let e = fan.ray(*b);
    let diff = ms.sub(mr);
    diff.dot_int(e) / to_rat(&nu.dot(e))
}

pub fn intersection_number(fan: &Fan, d: &InvariantDivisor, wall: &Wall) -> Result<BigRational> {
    let sf = support_function(fan, d).ok_or(Error::NotQCartier)?;
    Ok(wall_pairing(fan, wall, &sf))
}

/// Basis of the Q-Cartier divisor space.
pub fn q_cartier_space(fan: &Fan) -> Vec<Vec<BigRational>> {
    let n = fan.rays().len();
    if fan.is_simplicial() {
        return (0..n)
            .map(|i| (0..n).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }).collect())
            .collect();
    }
    nullspace(&q_cartier_equations(fan), n)
}

/// Whether a wall's curve is contracted to a point by the map to `base`.
fn contracted_over(fan: &Fan, base: &Fan, wall: &Wall) -> bool {
    let p = fan.cone_vectors(&wall.rays).iter().fold(LatticeVector::zero(fan.dim()), |a, b| a.add(b));
    base.minimal_cone(&p).is_some_and(|c| base.cone_dim(&c) == base.dim())
}

/// Walls whose curves generate NE: all interior walls, or those contracted over the base.
pub fn relevant_walls(fan: &Fan, base: Option<&Fan>) -> Result<Vec<Wall>> {
    match base {
        None => {
            if !fan.is_complete() {
                return Err(Error::NotComplete);
            }
            Ok(fan.interior_walls())
        }
        Some(b) => {
            if !fan.refines(b) {
                return Err(Error::NotRefinement);
            }
            Ok(fan.interior_walls().into_iter().filter(|w| contracted_over(fan, b, w)).collect())
        }
    }
}

pub fn numerical_spaces(fan: &Fan, base: Option<&Fan>) -> Result<NumericalLattice> {
    let walls = relevant_walls(fan, base)?;
    let space = q_cartier_space(fan);
    let sfs: Vec<SupportFunction> = space
        .iter()
        .map(|v| support_function(fan, &InvariantDivisor::new(v.clone())).expect("basis divisor is Q-Cartier"))
        .collect();
    let matrix: Vec<Vec<BigRational>> =
        walls.iter().map(|w| sfs.iter().map(|sf| wall_pairing(fan, w, sf)).collect()).collect();
    let (r, pivots) = rref(&matrix);
    let rho = pivots.len();
    let curve_basis: Vec<Vec<BigRational>> = r.into_iter().take(rho).collect();
    let mut lattice = NumericalLattice {
        rho,
        divisor_space: space.clone(),
        curve_basis,
        pivots,
        divisor_basis: Vec::new(),
        curves: Vec::new(),
        relative: base.is_some(),
    };
    // Dual divisors: x with curve_basis * x = e_j, mapped back to coefficient vectors.
    let mut basis = Vec::with_capacity(rho);
    for j in 0..rho {
        let e: Vec<BigRational> = (0..rho).map(|i| if i == j { BigRational::one() } else { BigRational::zero() }).collect();
        let x = solve_exact(&lattice.curve_basis, &e).expect("rows are independent");
        let mut coeffs = vec![BigRational::zero(); fan.rays().len()];
        for (xi, v) in x.iter().zip(&space) {
            for (c, vi) in coeffs.iter_mut().zip(v) {
                *c += xi * vi;
            }
        }
        basis.push(InvariantDivisor::new(coeffs));
    }
    lattice.divisor_basis = basis;
    lattice.curves = walls
        .into_iter()
        .zip(&matrix)
        .map(|(w, row)| {
            let relation = wall_relation(fan, &w);
            WallCurve { class: lattice.coordinates_of_functional(row), wall: w, relation }
        })
        .collect();
    Ok(lattice)
}

fn wall_relation(fan: &Fan, wall: &Wall) -> Option<Vec<BigInt>> {
    let right = wall.right?;
    let mut union: Vec<usize> = fan.maximal_cones()[wall.left].clone();
    union.extend(fan.maximal_cones()[right].iter().copied());
    union.sort();
    union.dedup();
    if union.len() != fan.dim() + 1 {
        return None;
    }
    let mut rel = circuit_relation(&fan.cone_vectors(&union))?;
    let a = union.iter().position(|i| !wall.rays.contains(i))?;
    if rel[a].is_negative() {
        rel = rel.iter().map(|x| -x).collect();
    }
    let mut full = vec![BigInt::zero(); fan.rays().len()];
    for (k, &i) in union.iter().enumerate() {
        full[i] = rel[k].clone();
    }
    Some(full)
}

fn primitive_integer(v: &[BigRational]) -> Option<Vec<BigInt>> {
    let rv = RationalVector(v.to_vec());
    if rv.is_zero() {
        return None;
    }
    Some(rv.primitive_ray().expect("nonzero").0)
}

/// An extremal ray of NE with the walls whose classes span it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtremalRay {
    pub generator: Vec<BigInt>,
    pub walls: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct MoriCone {
    pub lattice: NumericalLattice,
    /// Primitive integer classes of the wall curves (None for numerically trivial curves).
    pub generators: Vec<Option<Vec<BigInt>>>,
    pub extremal_rays: Vec<ExtremalRay>,
    /// Rays and lineality of the nef cone, in N^1 coordinates.
    pub nef_rays: Vec<Vec<BigInt>>,
    pub nef_lineality: Vec<Vec<BigInt>>,
    /// Dimension of the span of NE.
    pub dim: usize,
    pub is_pointed: bool,
}

impl MoriCone {
    pub fn is_whole_space(&self) -> bool {
        self.dim == self.lattice.rho && self.nef_rays.is_empty() && self.nef_lineality.is_empty()
    }

    pub fn is_half_line(&self) -> bool {
        self.dim == 1 && self.is_pointed && self.extremal_rays.len() == 1
    }

    pub fn zero_walls(&self) -> Vec<usize> {
        (0..self.generators.len()).filter(|&i| self.generators[i].is_none()).collect()
    }
}

pub fn mori_cone(fan: &Fan, base: Option<&Fan>) -> Result<MoriCone> {
    let lattice = numerical_spaces(fan, base)?;
    let rho = lattice.rho;
    let generators: Vec<Option<Vec<BigInt>>> = lattice.curves.iter().map(|c| primitive_integer(&c.class)).collect();
    let mut distinct: Vec<Vec<BigInt>> = generators.iter().flatten().cloned().collect();
    distinct.sort();
    distinct.dedup();
    if distinct.is_empty() {
        return Ok(MoriCone {
            lattice,
            generators,
            extremal_rays: vec![],
            nef_rays: vec![],
            nef_lineality: (0..rho)
                .map(|i| (0..rho).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
                .collect(),
            dim: 0,
            is_pointed: true,
        });
    }
    let gens: Vec<LatticeVector> = distinct.iter().map(|g| LatticeVector(g.clone())).collect();
    let cone = PolyCone::new(rho, gens)?;
    let is_pointed = cone.is_strongly_convex();
    let mut extremal_rays = Vec::new();
    if is_pointed {
        for (k, g) in distinct.iter().enumerate() {
            if cone.is_extremal_generator(k) {
                let walls = (0..generators.len()).filter(|&i| generators[i].as_ref() == Some(g)).collect();
                extremal_rays.push(ExtremalRay { generator: g.clone(), walls });
            }
        }
    }
    Ok(MoriCone {
        generators,
        extremal_rays,
        nef_rays: cone.facet_normals().iter().map(|v| v.0.clone()).collect(),
        nef_lineality: cone.equations().iter().map(|v| v.0.clone()).collect(),
        dim: cone.dim(),
        is_pointed,
        lattice,
    })
}

/// Pairings of D with every relevant wall curve.
pub fn wall_pairings(fan: &Fan, base: Option<&Fan>, d: &InvariantDivisor) -> Result<Vec<(Wall, BigRational)>> {
    let sf = support_function(fan, d).ok_or(Error::NotQCartier)?;
    Ok(relevant_walls(fan, base)?.into_iter().map(|w| {
        let p = wall_pairing(fan, &w, &sf);
        (w, p)
    }).collect())
}

pub fn is_nef_over(fan: &Fan, base: Option<&Fan>, d: &InvariantDivisor) -> Result<bool> {
    Ok(wall_pairings(fan, base, d)?.iter().all(|(_, p)| !p.is_negative()))
}

pub fn is_ample_over(fan: &Fan, base: Option<&Fan>, d: &InvariantDivisor) -> Result<bool> {
    Ok(wall_pairings(fan, base, d)?.iter().all(|(_, p)| p.is_positive()))
}

pub fn is_nef(fan: &Fan, d: &InvariantDivisor) -> Result<bool> {
    is_nef_over(fan, None, d)
}

pub fn is_ample(fan: &Fan, d: &InvariantDivisor) -> Result<bool> {
    is_ample_over(fan, None, d)
}

/// A wall curve on which D is negative, if any.
pub fn nef_violation(fan: &Fan, base: Option<&Fan>, d: &InvariantDivisor) -> Result<Option<(Wall, BigRational)>> {
    Ok(wall_pairings(fan, base, d)?.into_iter().find(|(_, p)| p.is_negative()))
}

#[derive(Debug, Clone)]
pub struct ProjectivityReport {
    pub projective: bool,
    /// A (relatively) ample divisor, verified wall by wall.
    pub certificate: Option<InvariantDivisor>,
    /// Walls whose curves are numerically trivial.
    pub trivial_walls: Vec<Wall>,
    pub mori_cone_pointed: bool,
}

pub fn is_projective_over(fan: &Fan, base: Option<&Fan>) -> Result<ProjectivityReport> {
    let ne = mori_cone(fan, base)?;
    let trivial_walls: Vec<Wall> =
        ne.zero_walls().into_iter().map(|i| ne.lattice.curves[i].wall.clone()).collect();
    if !trivial_walls.is_empty() || !ne.is_pointed {
        return Ok(ProjectivityReport {
            projective: false,
            certificate: None,
            trivial_walls,
            mori_cone_pointed: ne.is_pointed,
        });
    }
    let rho = ne.lattice.rho;
    let mut y = vec![BigRational::zero(); rho];
    for r in &ne.nef_rays {
        for (a, b) in y.iter_mut().zip(r) {
            *a += to_rat(b);
        }
    }
    // A nef-interior class, lifted through the dual divisor basis.
    let mut d = InvariantDivisor::zero(fan.rays().len());
    for (yi, bd) in y.iter().zip(&ne.lattice.divisor_basis) {
        d = d.add(&bd.scale(yi));
    }
    if rho > 0 {
        let den = RationalVector(d.coeffs().to_vec()).denominator();
        d = d.scale(&to_rat(&den));
    }
    let ok = is_ample_over(fan, base, &d)?;
    Ok(ProjectivityReport {
        projective: ok,
        certificate: ok.then_some(d),
        trivial_walls,
        mori_cone_pointed: true,
    })
}

pub fn is_projective(fan: &Fan) -> Result<ProjectivityReport> {
    is_projective_over(fan, None)
}

/// Length data of a (K + Delta)-negative extremal ray.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtremalLength {
    pub length: BigRational,
    pub wall: Wall,
    pub within_two_n: bool,
    pub within_n_plus_one: bool,
}

/// min of -(K + Delta) . C over wall curves C with class on the ray.
pub fn extremal_length(
    fan: &Fan,
    base: Option<&Fan>,
    boundary: &InvariantDivisor,
    ray: &ExtremalRay,
) -> Result<ExtremalLength> {
    let ne = mori_cone(fan, base)?;
    if !ne.extremal_rays.contains(ray) {
        return Err(Error::NotExtremal);
    }
    let kd = log_canonical_divisor(fan, boundary);
    let sf = support_function(fan, &kd).ok_or(Error::NotQCartier)?;
    let mut best: Option<(BigRational, Wall)> = None;
    for &wi in &ray.walls {
        let w = &ne.lattice.curves[wi].wall;
        let v = -wall_pairing(fan, w, &sf);
        if !v.is_positive() {
            return Err(Error::NotNegative);
        }
        if best.as_ref().is_none_or(|(b, _)| v < *b) {
            best = Some((v, w.clone()));
        }
    }
    let (length, wall) = best.ok_or(Error::NotExtremal)?;
    let n = BigRational::from_integer(BigInt::from(fan.dim()));
    Ok(ExtremalLength {
        within_two_n: length <= &n * BigRational::from_integer(2.into()),
        within_n_plus_one: length <= &n + BigRational::one(),
        length,
        wall,
    })
}

/// (K + Delta)-negative extremal rays, sorted by lexicographic order of their generators.
pub fn negative_extremal_rays(
    fan: &Fan,
    base: Option<&Fan>,
    boundary: &InvariantDivisor,
) -> Result<(MoriCone, Vec<ExtremalRay>)> {
    let ne = mori_cone(fan, base)?;
    let kd = log_canonical_divisor(fan, boundary);
    let sf = support_function(fan, &kd).ok_or(Error::NotQCartier)?;
    let mut rays: Vec<ExtremalRay> = ne
        .extremal_rays
        .iter()
        .filter(|r| wall_pairing(fan, &ne.lattice.curves[r.walls[0]].wall, &sf).is_negative())
        .cloned()
        .collect();
    rays.sort_by(|a, b| a.generator.cmp(&b.generator));
    Ok((ne, rays))
}

#[derive(Debug, Clone)]
pub struct ScalingStep {
    pub lambda: BigRational,
    /// A (K+B)-negative extremal ray with (K+B+lambda C) . R = 0, or None when K+B is nef.
    pub ray: Option<ExtremalRay>,
}

pub fn scaling_lambda(
    fan: &Fan,
    base: Option<&Fan>,
    boundary: &InvariantDivisor,
    c: &InvariantDivisor,
) -> Result<ScalingStep> {
    let kb = log_canonical_divisor(fan, boundary);
    let kbc = kb.add(c);
    if !is_nef_over(fan, base, &kbc)? {
        return Err(Error::NotNef);
    }
    let sk = support_function(fan, &kb).ok_or(Error::NotQCartier)?;
    let sc = support_function(fan, c).ok_or(Error::NotQCartier)?;
    let walls = relevant_walls(fan, base)?;
    let mut lambda = BigRational::zero();
    for w in &walls {
        let k = wall_pairing(fan, w, &sk);
        if k.is_negative() {
            let cw = wall_pairing(fan, w, &sc);
            let ratio = -k / cw;
            if ratio > lambda {
                lambda = ratio;
            }
        }
    }
    if lambda.is_zero() {
        return Ok(ScalingStep { lambda, ray: None });
    }
    let ne = mori_cone(fan, base)?;
    let target = kb.add(&c.scale(&lambda));
    let st = support_function(fan, &target).ok_or(Error::NotQCartier)?;
    let mut candidates: Vec<ExtremalRay> = ne
        .extremal_rays
        .iter()
        .filter(|r| {
            let w = &ne.lattice.curves[r.walls[0]].wall;
            wall_pairing(fan, w, &st).is_zero() && wall_pairing(fan, w, &sk).is_negative()
        })
        .cloned()
        .collect();
    candidates.sort_by(|a, b| a.generator.cmp(&b.generator));
    Ok(ScalingStep { lambda, ray: candidates.into_iter().next() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::rat;

    fn lv(c: &[i64]) -> LatticeVector {
        LatticeVector::from_i64(c)
    }

    fn logflip() -> Fan {
        Fan::from_i64(
            3,
            &[&[1, 0, 0], &[-1, 2, 0], &[0, 0, 1], &[-1, 3, -3]],
            &[&[0, 2, 3], &[1, 2, 3]],
        )
        .unwrap()
    }

    #[test]
    fn calibration_numbers() {
        let f = logflip();
        let walls = f.interior_walls();
        assert_eq!(walls.len(), 1);
        let w = &walls[0];
        let idx = |v: &[i64]| f.ray_index(&lv(v)).unwrap();
        let d = |v: &[i64]| InvariantDivisor::prime(&f, idx(v));
        assert_eq!(intersection_number(&f, &d(&[1, 0, 0]), w).unwrap(), rat(1, 3));
        assert_eq!(intersection_number(&f, &d(&[-1, 2, 0]), w).unwrap(), rat(1, 1));
        assert_eq!(intersection_number(&f, &d(&[0, 0, 1]), w).unwrap(), rat(-2, 1));
        assert_eq!(intersection_number(&f, &d(&[-1, 3, -3]), w).unwrap(), rat(-2, 3));
    }

    #[test]
    fn projective_plane_numbers() {
        let f = Fan::from_i64(2, &[&[1, 0], &[0, 1], &[-1, -1]], &[&[0, 1], &[1, 2], &[0, 2]]).unwrap();
        let ne = mori_cone(&f, None).unwrap();
        assert_eq!(ne.lattice.rho, 1);
        assert_eq!(ne.extremal_rays.len(), 1);
        assert!(is_ample(&f, &InvariantDivisor::from_i64(&[1, 0, 0])).unwrap());
        assert!(is_projective(&f).unwrap().projective);
        let l = extremal_length(&f, None, &InvariantDivisor::zero(3), &ne.extremal_rays[0]).unwrap();
        assert_eq!(l.length, rat(3, 1));
    }

    #[test]
    fn product_of_lines() {
        let f = Fan::from_i64(
            2,
            &[&[1, 0], &[0, 1], &[-1, 0], &[0, -1]],
            &[&[0, 1], &[1, 2], &[2, 3], &[3, 0]],
        )
        .unwrap();
        let ne = mori_cone(&f, None).unwrap();
        assert_eq!(ne.lattice.rho, 2);
        assert_eq!(ne.extremal_rays.len(), 2);
        let pm = ne.lattice.pairing_matrix();
        assert_eq!(pm, vec![vec![rat(1, 1), rat(0, 1)], vec![rat(0, 1), rat(1, 1)]]);
    }
}
