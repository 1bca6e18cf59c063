//! Cones, fans, star subdivisions and star-closed subsets.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use fixedbitset::FixedBitSet;
use num::{BigInt, BigRational, Integer, One, Signed, Zero};

use crate::error::{Error, Result};
use crate::lattice::{
    determinant, int_rank, rat_inverse, smith_normal_form, unimodular_completion, unimodular_inverse, LatticeVector,
};
use crate::polyhedral::{double_description, PolyCone};

/// A strongly convex rational polyhedral cone, stored by its primitive minimal generators.
#[derive(Debug, Clone)]
pub struct Cone {
    rays: Vec<LatticeVector>,
    poly: PolyCone,
}

impl PartialEq for Cone {
    fn eq(&self, other: &Self) -> bool {
        self.rays == other.rays
    }
}

impl Eq for Cone {}

impl Cone {
    pub fn rays(&self) -> &[LatticeVector] {
        &self.rays
    }

    pub fn dim(&self) -> usize {
        self.poly.dim()
    }

    pub fn ambient_dim(&self) -> usize {
        self.poly.ambient_dim()
    }

    pub fn is_simplicial(&self) -> bool {
        self.rays.len() == self.dim()
    }

    pub fn contains(&self, v: &LatticeVector) -> bool {
        self.poly.contains(v)
    }

    pub fn relint_contains(&self, v: &LatticeVector) -> bool {
        self.poly.relint_contains(v)
    }

    pub fn poly(&self) -> &PolyCone {
        &self.poly
    }

    pub fn classify(&self) -> ConeType {
        classify_cone(&self.rays)
    }
}

/// Builds a cone from arbitrary nonzero generators, dropping redundant ones.
pub fn build_cone(ambient: usize, generators: &[LatticeVector]) -> Result<Cone> {
    if generators.is_empty() {
        return Err(Error::EmptyCone);
    }
    let mut gens = Vec::new();
    for g in generators {
        if g.dim() != ambient {
            return Err(Error::DimensionMismatch { expected: ambient, found: g.dim() });
        }
        gens.push(g.primitive()?);
    }
    gens.sort();
    gens.dedup();
    let poly = PolyCone::new(ambient, gens.clone())?;
    if !poly.is_strongly_convex() {
        return Err(Error::NotStronglyConvex);
    }
    let rays: Vec<LatticeVector> =
        (0..gens.len()).filter(|&i| poly.is_extremal_generator(i)).map(|i| gens[i].clone()).collect();
    let poly = PolyCone::new(ambient, rays.clone())?;
    Ok(Cone { rays, poly })
}

/// Singularity type of a cone.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConeType {
    Smooth,
    Simplicial {
        index: BigInt,
        /// Weights a_i of the cyclic type 1/r(a_1,...,a_k), normalised, when the quotient group is cyclic.
        cyclic_type: Option<Vec<BigInt>>,
        invariants: Vec<BigInt>,
    },
    NonSimplicial,
}

impl ConeType {
    pub fn is_smooth(&self) -> bool {
        matches!(self, ConeType::Smooth)
    }

    pub fn is_simplicial(&self) -> bool {
        !matches!(self, ConeType::NonSimplicial)
    }

    pub fn index(&self) -> Option<BigInt> {
        match self {
            ConeType::Smooth => Some(BigInt::one()),
            ConeType::Simplicial { index, .. } => Some(index.clone()),
            ConeType::NonSimplicial => None,
        }
    }
}

impl fmt::Display for ConeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConeType::Smooth => write!(f, "smooth"),
            ConeType::Simplicial { index, cyclic_type: Some(w), .. } => {
                let ws: Vec<String> = w.iter().map(|x| x.to_string()).collect();
                write!(f, "simplicial index {index}, type 1/{index}({})", ws.join(","))
            }
            ConeType::Simplicial { index, .. } => write!(f, "simplicial index {index}, non-cyclic"),
            ConeType::NonSimplicial => write!(f, "non-simplicial"),
        }
    }
}

/// Classifies the cone spanned by linearly independent or dependent primitive generators.
pub fn classify_cone(rays: &[LatticeVector]) -> ConeType {
    let rows: Vec<Vec<BigInt>> = rays.iter().map(|r| r.0.clone()).collect();
    if rows.is_empty() {
        return ConeType::Smooth;
    }
    if int_rank(&rows) < rows.len() {
        return ConeType::NonSimplicial;
    }
    let data = SimplicialData::new(rays);
    if data.invariants.iter().all(|d| d.is_one()) {
        return ConeType::Smooth;
    }
    let index = data.invariants.iter().fold(BigInt::one(), |a, b| a * b);
    let nontrivial: Vec<usize> = (0..data.invariants.len()).filter(|&i| !data.invariants[i].is_one()).collect();
    let cyclic_type = if nontrivial.len() == 1 {
        let i = nontrivial[0];
        let r = data.invariants[i].clone();
        let weights: Vec<BigInt> = data.generators[i].iter().map(|x| x.mod_floor(&r)).collect();
        Some(normalise_cyclic(&weights, &r))
    } else {
        None
    };
    ConeType::Simplicial { index, cyclic_type, invariants: data.invariants }
}

fn normalise_cyclic(weights: &[BigInt], r: &BigInt) -> Vec<BigInt> {
    let mut best: Option<Vec<BigInt>> = None;
    let mut u = BigInt::one();
    while &u < r {
        if u.gcd(r).is_one() {
            let mut w: Vec<BigInt> = weights.iter().map(|a| (a * &u).mod_floor(r)).collect();
            w.sort();
            if best.as_ref().is_none_or(|b| w < *b) {
                best = Some(w);
            }
        }
        u += 1;
    }
    best.unwrap_or_default()
}

/// Group data of a simplicial cone: G = (lattice in the span) / (sublattice of the rays).
struct SimplicialData {
    invariants: Vec<BigInt>,
    /// For each invariant d_i, integer coefficients c with sum (c_j / d_i) v_j integral, generating G.
    generators: Vec<Vec<BigInt>>,
}

impl SimplicialData {
    fn new(rays: &[LatticeVector]) -> Self {
        let rows: Vec<Vec<BigInt>> = rays.iter().map(|r| r.0.clone()).collect();
        let (u, d, _) = smith_normal_form(&rows);
        let k = rows.len();
        let invariants: Vec<BigInt> = (0..k).map(|i| d[i][i].clone()).collect();
        SimplicialData { invariants, generators: u }
    }
}

/// Lattice points in the half-open fundamental parallelepiped of a simplicial cone,
/// with their barycentric coordinates. The origin is included.
pub fn box_points(rays: &[LatticeVector]) -> Vec<(Vec<BigRational>, LatticeVector)> {
    let data = SimplicialData::new(rays);
    let k = rays.len();
    let n = rays.first().map_or(0, |r| r.dim());
    let mut out = Vec::new();
    let mut counter: Vec<BigInt> = vec![BigInt::zero(); k];
    loop {
        let mut lambda = vec![BigRational::zero(); k];
        for (i, c) in counter.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (j, l) in lambda.iter_mut().enumerate() {
                *l += BigRational::new(c * &data.generators[i][j], data.invariants[i].clone());
            }
        }
        for l in lambda.iter_mut() {
            *l = &*l - l.floor();
        }
        let mut p = vec![BigRational::zero(); n];
        for (l, r) in lambda.iter().zip(rays) {
            for (x, y) in p.iter_mut().zip(&r.0) {
                *x += l * BigRational::from_integer(y.clone());
            }
        }
        let point = LatticeVector(p.iter().map(|x| x.to_integer()).collect());
        out.push((lambda, point));
        let mut i = 0;
        loop {
            if i == k {
                out.sort_by(|a, b| a.1.cmp(&b.1));
                out.dedup_by(|a, b| a.1 == b.1);
                return out;
            }
            counter[i] += 1;
            if counter[i] < data.invariants[i] {
                break;
            }
            counter[i] = BigInt::zero();
            i += 1;
        }
    }
}

/// A codimension-one cone with its adjacent maximal cones.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Wall {
    pub rays: Vec<usize>,
    pub left: usize,
    pub right: Option<usize>,
}

/// A fan: rays sorted lexicographically, maximal cones as sorted ray-index lists.
#[derive(Debug, Clone)]
pub struct Fan {
    dim: usize,
    rays: Vec<LatticeVector>,
    maximal: Vec<Vec<usize>>,
    polys: Vec<PolyCone>,
    faces: Vec<Vec<usize>>,
    face_dims: Vec<usize>,
}

impl PartialEq for Fan {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.rays == other.rays && self.maximal == other.maximal
    }
}

impl Eq for Fan {}

impl Fan {
    /// Builds and validates a fan from rays and (not necessarily maximal) cones given by ray indices.
    pub fn new(dim: usize, rays: Vec<LatticeVector>, cones: Vec<Vec<usize>>) -> Result<Self> {
        let mut prim = Vec::with_capacity(rays.len());
        for r in &rays {
            if r.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: r.dim() });
            }
            prim.push(r.primitive()?);
        }
        let mut order: Vec<usize> = (0..prim.len()).collect();
        order.sort_by(|&a, &b| prim[a].cmp(&prim[b]));
        for w in order.windows(2) {
            if prim[w[0]] == prim[w[1]] {
                return Err(Error::Invalid(format!("duplicate ray {}", prim[w[0]])));
            }
        }
        let mut new_index = vec![0; prim.len()];
        for (new, &old) in order.iter().enumerate() {
            new_index[old] = new;
        }
        let sorted_rays: Vec<LatticeVector> = order.iter().map(|&i| prim[i].clone()).collect();

        let mut cone_sets: Vec<Vec<usize>> = Vec::new();
        for c in &cones {
            let mut s = Vec::with_capacity(c.len());
            for &i in c {
                if i >= prim.len() {
                    return Err(Error::RayIndexOutOfRange { index: i, count: prim.len() });
                }
                s.push(new_index[i]);
            }
            s.sort();
            s.dedup();
            if s.is_empty() {
                continue;
            }
            cone_sets.push(s);
        }
        cone_sets.sort();
        cone_sets.dedup();

        let mut polys = Vec::with_capacity(cone_sets.len());
        for (ci, s) in cone_sets.iter().enumerate() {
            let gens: Vec<LatticeVector> = s.iter().map(|&i| sorted_rays[i].clone()).collect();
            let p = PolyCone::new(dim, gens)?;
            if !p.is_strongly_convex() {
                return Err(Error::NotStronglyConvex);
            }
            for (local, &g) in s.iter().enumerate() {
                if !p.is_extremal_generator(local) {
                    return Err(Error::Invalid(format!(
                        "ray {} is not an extremal ray of cone {}",
                        sorted_rays[g], ci
                    )));
                }
            }
            polys.push(p);
        }

        // Cones whose ray set sits inside another listed cone must be faces of it.
        let mut keep = vec![true; cone_sets.len()];
        for i in 0..cone_sets.len() {
            for j in 0..cone_sets.len() {
                if i != j && keep[j] && is_subset(&cone_sets[i], &cone_sets[j]) {
                    if !is_face_of(&polys[j], &cone_sets[j], &cone_sets[i]) {
                        return Err(Error::IntersectionNotFace { first: i, second: j });
                    }
                    keep[i] = false;
                    break;
                }
            }
        }
        let mut maximal = Vec::new();
        let mut max_polys = Vec::new();
        for (i, (s, p)) in cone_sets.into_iter().zip(polys).enumerate() {
            if keep[i] {
                maximal.push(s);
                max_polys.push(p);
            }
        }

        let mut used = vec![false; sorted_rays.len()];
        for c in &maximal {
            for &i in c {
                used[i] = true;
            }
        }
        if let Some(i) = used.iter().position(|u| !u) {
            return Err(Error::Invalid(format!("ray {} lies in no cone", sorted_rays[i])));
        }

        for i in 0..maximal.len() {
            for j in i + 1..maximal.len() {
                if !intersection_is_face(dim, &sorted_rays, &maximal[i], &max_polys[i], &maximal[j], &max_polys[j]) {
                    return Err(Error::IntersectionNotFace { first: i, second: j });
                }
            }
        }

        let mut face_set: BTreeSet<Vec<usize>> = BTreeSet::new();
        for (c, p) in maximal.iter().zip(&max_polys) {
            for f in p.faces() {
                face_set.insert(f.ones().map(|k| c[k]).collect());
            }
        }
        let mut faces: Vec<Vec<usize>> = face_set.into_iter().collect();
        let dims_of = |f: &Vec<usize>| {
            let rows: Vec<Vec<BigInt>> = f.iter().map(|&i| sorted_rays[i].0.clone()).collect();
            int_rank(&rows)
        };
        faces.sort_by_key(|f| (dims_of(f), f.clone()));
        let face_dims = faces.iter().map(dims_of).collect();

        Ok(Fan { dim, rays: sorted_rays, maximal, polys: max_polys, faces, face_dims })
    }

    /// The fan of a point: dimension zero, one zero cone.
    pub fn point() -> Self {
        Fan { dim: 0, rays: vec![], maximal: vec![], polys: vec![], faces: vec![vec![]], face_dims: vec![0] }
    }

    pub fn from_i64(dim: usize, rays: &[&[i64]], cones: &[&[usize]]) -> Result<Self> {
        Fan::new(
            dim,
            rays.iter().map(|r| LatticeVector::from_i64(r)).collect(),
            cones.iter().map(|c| c.to_vec()).collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rays(&self) -> &[LatticeVector] {
        &self.rays
    }

    pub fn ray(&self, i: usize) -> &LatticeVector {
        &self.rays[i]
    }

    pub fn ray_index(&self, v: &LatticeVector) -> Option<usize> {
        self.rays.binary_search(v).ok()
    }

    pub fn maximal_cones(&self) -> &[Vec<usize>] {
        &self.maximal
    }

    pub fn maximal_poly(&self, i: usize) -> &PolyCone {
        &self.polys[i]
    }

    /// All cones including the zero cone, sorted by dimension then ray indices.
    pub fn cones(&self) -> &[Vec<usize>] {
        &self.faces
    }

    pub fn cone_dims(&self) -> &[usize] {
        &self.face_dims
    }

    pub fn cone_dim(&self, rays: &[usize]) -> usize {
        let rows: Vec<Vec<BigInt>> = rays.iter().map(|&i| self.rays[i].0.clone()).collect();
        int_rank(&rows)
    }

    pub fn is_cone(&self, rays: &[usize]) -> bool {
        let mut s = rays.to_vec();
        s.sort();
        s.dedup();
        self.faces.contains(&s)
    }

    pub fn cone_vectors(&self, rays: &[usize]) -> Vec<LatticeVector> {
        rays.iter().map(|&i| self.rays[i].clone()).collect()
    }

    pub fn cone(&self, rays: &[usize]) -> Result<Cone> {
        build_cone(self.dim, &self.cone_vectors(rays))
    }

    pub fn is_pure(&self) -> bool {
        self.maximal.iter().all(|c| self.cone_dim(c) == self.dim)
    }

    pub fn is_simplicial(&self) -> bool {
        self.maximal.iter().all(|c| self.cone_dim(c) == c.len())
    }

    pub fn is_smooth(&self) -> bool {
        self.maximal.iter().all(|c| classify_cone(&self.cone_vectors(c)).is_smooth())
    }

    /// Codimension-one faces of full-dimensional maximal cones with their neighbours.
    pub fn walls(&self) -> Vec<Wall> {
        let mut map: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
        for (ci, (c, p)) in self.maximal.iter().zip(&self.polys).enumerate() {
            if p.dim() != self.dim {
                continue;
            }
            for fs in p.facet_generator_sets() {
                let w: Vec<usize> = fs.ones().map(|k| c[k]).collect();
                map.entry(w).or_default().push(ci);
            }
        }
        map.into_iter()
            .map(|(rays, cs)| Wall { rays, left: cs[0], right: cs.get(1).copied() })
            .collect()
    }

    pub fn interior_walls(&self) -> Vec<Wall> {
        self.walls().into_iter().filter(|w| w.right.is_some()).collect()
    }

    /// Primitive normal of a wall, positive on the left cone.
    pub fn wall_normal(&self, wall: &Wall) -> LatticeVector {
        let rows: Vec<Vec<BigInt>> = wall.rays.iter().map(|&i| self.rays[i].0.clone()).collect();
        let g = double_description(&[], &rows, self.dim);
        let mut nu = g.lineality.into_iter().next().expect("wall has a normal line");
        let extra = self.maximal[wall.left].iter().find(|i| !wall.rays.contains(i)).expect("left cone has an extra ray");
        if nu.dot(&self.rays[*extra]).is_negative() {
            nu = nu.neg();
        }
        nu
    }

    pub fn is_complete(&self) -> bool {
        if self.maximal.is_empty() || !self.is_pure() {
            return false;
        }
        let walls = self.walls();
        if walls.iter().any(|w| w.right.is_none()) {
            return false;
        }
        let mut probes = Vec::new();
        for i in 0..self.dim {
            let e = LatticeVector::unit(self.dim, i);
            probes.push(e.neg());
            probes.push(e);
        }
        for w in &walls {
            let nu = self.wall_normal(w);
            probes.push(nu.neg());
            probes.push(nu);
        }
        probes.iter().all(|p| self.contains(p))
    }

    pub fn contains(&self, v: &LatticeVector) -> bool {
        self.polys.iter().any(|p| p.contains(v))
    }

    /// Index of the first maximal cone containing `v`.
    pub fn locate(&self, v: &LatticeVector) -> Option<usize> {
        self.polys.iter().position(|p| p.contains(v))
    }

    /// The cone of the fan whose relative interior contains `v`.
    pub fn minimal_cone(&self, v: &LatticeVector) -> Option<Vec<usize>> {
        let ci = self.locate(v)?;
        let p = &self.polys[ci];
        let c = &self.maximal[ci];
        let mut out = FixedBitSet::with_capacity(c.len());
        out.insert_range(..);
        for (f, fs) in p.facet_normals().iter().zip(p.facet_generator_sets()) {
            if f.dot(v).is_zero() {
                out.intersect_with(&fs);
            }
        }
        Some(out.ones().map(|k| c[k]).collect())
    }

    /// Maximal cones containing the cone with the given rays.
    pub fn maximal_cones_containing(&self, rays: &[usize]) -> Vec<usize> {
        (0..self.maximal.len()).filter(|&i| is_subset(rays, &self.maximal[i])).collect()
    }

    /// All cones having the given cone as a face.
    pub fn star(&self, rays: &[usize]) -> Vec<Vec<usize>> {
        self.faces.iter().filter(|f| is_subset(rays, f)).cloned().collect()
    }

    /// Stellar subdivision at a primitive lattice point in the support that is not a ray.
    pub fn star_subdivision(&self, v: &LatticeVector) -> Result<Fan> {
        if v.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: v.dim() });
        }
        if v.is_zero() {
            return Err(Error::ZeroVector);
        }
        if !v.is_primitive() {
            return Err(Error::Invalid(format!("{v} is not primitive")));
        }
        if self.ray_index(v).is_some() {
            return Err(Error::AlreadyRay(v.to_string()));
        }
        if !self.contains(v) {
            return Err(Error::OutsideSupport(v.to_string()));
        }
        let k = self.rays.len();
        let mut rays = self.rays.clone();
        rays.push(v.clone());
        let mut cones = Vec::new();
        for (c, p) in self.maximal.iter().zip(&self.polys) {
            if !p.contains(v) {
                cones.push(c.clone());
                continue;
            }
            for (f, fs) in p.facet_normals().iter().zip(p.facet_generator_sets()) {
                if f.dot(v).is_positive() {
                    let mut nc: Vec<usize> = fs.ones().map(|i| c[i]).collect();
                    nc.push(k);
                    cones.push(nc);
                }
            }
        }
        Fan::new(self.dim, rays, cones)
    }

    /// Pulling triangulation of a cone by lexicographic ray order.
    pub fn triangulate_cone(&self, rays: &[usize]) -> Vec<Vec<usize>> {
        if self.cone_dim(rays) == rays.len() {
            return vec![rays.to_vec()];
        }
        let p = PolyCone::new(self.dim, self.cone_vectors(rays)).expect("dimensions agree");
        let apex = rays[0];
        let mut out = Vec::new();
        for fs in p.facet_generator_sets() {
            if fs.contains(0) {
                continue;
            }
            let face: Vec<usize> = fs.ones().map(|k| rays[k]).collect();
            for mut t in self.triangulate_cone(&face) {
                t.insert(0, apex);
                out.push(t);
            }
        }
        out
    }

    /// Simplicial refinement without new rays (pulling triangulation).
    pub fn pulling_triangulation(&self) -> Fan {
        let cones: Vec<Vec<usize>> = self.maximal.iter().flat_map(|c| self.triangulate_cone(c)).collect();
        Fan::new(self.dim, self.rays.clone(), cones).expect("pulling triangulation is a fan")
    }

    /// Whether every cone of `self` lies in a cone of `base` and the supports agree.
    pub fn refines(&self, base: &Fan) -> bool {
        if self.dim != base.dim {
            return false;
        }
        let inside = self.maximal.iter().all(|c| {
            let pt = sum_vectors(&self.cone_vectors(c), self.dim);
            base.polys.iter().any(|p| self.cone_vectors(c).iter().all(|r| p.contains(r)) && p.contains(&pt))
        });
        let covers = base.maximal.iter().all(|c| base.cone_vectors(c).iter().all(|r| self.contains(r)))
            && base.maximal.iter().all(|c| self.contains(&sum_vectors(&base.cone_vectors(c), self.dim)));
        inside && covers
    }

    /// Index of the cone of `base` whose relative interior meets each maximal cone of `self`.
    pub fn image_cone(&self, base: &Fan, cone: &[usize]) -> Option<Vec<usize>> {
        let pt = sum_vectors(&self.cone_vectors(cone), self.dim);
        base.minimal_cone(&pt)
    }

    /// Whether a set of cones is closed under passing to larger cones.
    pub fn is_star_closed(&self, phi: &[Vec<usize>]) -> bool {
        let set: BTreeSet<Vec<usize>> = phi.iter().map(|c| sorted(c)).collect();
        if set.iter().any(|c| !self.faces.contains(c)) {
            return false;
        }
        set.iter().all(|s| self.star(s).into_iter().all(|t| set.contains(&t)))
    }

    /// The cones of a star-closed set sorted by dimension, one qlc centre V(σ) each.
    pub fn qlc_centers(&self, phi: &[Vec<usize>]) -> Result<Vec<Vec<usize>>> {
        if !self.is_star_closed(phi) {
            return Err(Error::NotStarClosed);
        }
        let mut out: Vec<Vec<usize>> = phi.iter().map(|c| sorted(c)).collect();
        out.sort_by_key(|c| (self.cone_dim(c), c.clone()));
        out.dedup();
        Ok(out)
    }

    /// The star of a ray, realised as a fan in N / Z rho.
    pub fn star_fan(&self, ray: usize) -> Result<StarFan> {
        let rho = &self.rays[ray];
        let basis = unimodular_completion(rho)?;
        let inverse = unimodular_inverse(&basis);
        let project = |v: &LatticeVector| -> LatticeVector {
            let coords: Vec<BigInt> = (0..self.dim)
                .map(|j| v.0.iter().zip(&inverse).fold(BigInt::zero(), |acc, (x, row)| acc + x * &row[j]))
                .collect();
            LatticeVector(coords[1..].to_vec())
        };
        let star_rays: Vec<usize> = {
            let mut s: BTreeSet<usize> = BTreeSet::new();
            for c in &self.maximal {
                if c.contains(&ray) {
                    s.extend(c.iter().copied().filter(|&i| i != ray));
                }
            }
            s.into_iter().collect()
        };
        let images: Vec<LatticeVector> = star_rays.iter().map(|&i| project(&self.rays[i])).collect();
        let prim: Vec<LatticeVector> = images.iter().map(|v| v.primitive()).collect::<Result<_>>()?;
        let cones: Vec<Vec<usize>> = self
            .maximal
            .iter()
            .filter(|c| c.contains(&ray))
            .map(|c| c.iter().filter(|&&i| i != ray).map(|i| star_rays.binary_search(i).unwrap()).collect())
            .collect();
        let fan = if self.dim == 1 {
            Fan::point()
        } else {
            Fan::new(self.dim - 1, prim.clone(), cones)?
        };
        let origin = fan.rays.iter().map(|r| star_rays[prim.iter().position(|p| p == r).unwrap()]).collect();
        Ok(StarFan { fan, origin, ray, inverse })
    }

    /// Common refinement of two fans with the same support.
    pub fn common_refinement(&self, other: &Fan) -> Result<Fan> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        let mut rays: Vec<LatticeVector> = Vec::new();
        let mut cones: Vec<Vec<LatticeVector>> = Vec::new();
        for p in &self.polys {
            for q in &other.polys {
                let mut ineqs: Vec<Vec<BigInt>> = p.facet_normals().iter().map(|f| f.0.clone()).collect();
                ineqs.extend(q.facet_normals().iter().map(|f| f.0.clone()));
                let mut eqs: Vec<Vec<BigInt>> = p.equations().iter().map(|f| f.0.clone()).collect();
                eqs.extend(q.equations().iter().map(|f| f.0.clone()));
                let g = double_description(&ineqs, &eqs, self.dim);
                if g.rays.is_empty() {
                    continue;
                }
                let rows: Vec<Vec<BigInt>> = g.rays.iter().map(|r| r.0.clone()).collect();
                if int_rank(&rows) != self.dim.min(p.dim()).min(q.dim()) {
                    continue;
                }
                rays.extend(g.rays.iter().cloned());
                cones.push(g.rays);
            }
        }
        rays.sort();
        rays.dedup();
        let idx: Vec<Vec<usize>> =
            cones.iter().map(|c| c.iter().map(|r| rays.binary_search(r).unwrap()).collect()).collect();
        Fan::new(self.dim, rays, idx)
    }

    /// Replaces the two cones across a wall whose rays form a circuit by the other triangulation.
    pub fn exchange_wall(&self, wall: &Wall) -> Result<Fan> {
        let right = wall.right.ok_or_else(|| Error::Invalid("boundary wall".into()))?;
        let a = &self.maximal[wall.left];
        let b = &self.maximal[right];
        if a.len() != self.dim || b.len() != self.dim {
            return Err(Error::Invalid("wall exchange needs simplicial neighbours".into()));
        }
        let union: Vec<usize> = sorted(&[a.clone(), b.clone()].concat());
        let rel = circuit_relation(&self.cone_vectors(&union))
            .ok_or_else(|| Error::Invalid("cones across the wall do not form a circuit".into()))?;
        let off: Vec<usize> = union.iter().copied().filter(|i| !wall.rays.contains(i)).collect();
        let pos_off = union.iter().position(|&i| i == off[0]).unwrap();
        let sign = rel[pos_off].signum();
        let mut cones: Vec<Vec<usize>> =
            self.maximal.iter().enumerate().filter(|(i, _)| *i != wall.left && *i != right).map(|(_, c)| c.clone()).collect();
        for (k, &u) in union.iter().enumerate() {
            if !rel[k].is_zero() && rel[k].signum() == -sign.clone() {
                cones.push(union.iter().copied().filter(|&x| x != u).collect());
            }
        }
        Fan::new(self.dim, self.rays.clone(), cones)
    }

    /// Whether some lattice automorphism carries `self` onto `other`.
    ///
    /// Anchors on a full-dimensional simplicial maximal cone; fans without one compare as non-isomorphic
    /// unless equal.
    pub fn is_isomorphic(&self, other: &Fan) -> bool {
        if self == other {
            return true;
        }
        if self.dim != other.dim || self.rays.len() != other.rays.len() || self.maximal.len() != other.maximal.len() {
            return false;
        }
        let n = self.dim;
        let Some(anchor) = self.maximal.iter().find(|c| c.len() == n && self.cone_dim(c) == n) else {
            return false;
        };
        let src: Vec<Vec<BigRational>> = anchor.iter().map(|&i| self.rays[i].to_rational().0).collect();
        let Some(src_inv) = rat_inverse(&src) else { return false };
        let target_cones: BTreeSet<Vec<usize>> = other.maximal.iter().cloned().collect();
        for c in other.maximal.iter().filter(|c| c.len() == n) {
            for perm in permutations(n) {
                // Row-vector convention: x -> x * A with src_j * A = dst_perm(j).
                let dst: Vec<Vec<BigRational>> = perm.iter().map(|&p| other.rays[c[p]].to_rational().0).collect();
                let a: Vec<Vec<BigRational>> = (0..n)
                    .map(|r| (0..n).map(|col| (0..n).map(|k| &src_inv[r][k] * &dst[k][col]).sum()).collect())
                    .collect();
                if a.iter().flatten().any(|x| !x.is_integer()) {
                    continue;
                }
                let ai: Vec<Vec<BigInt>> = a.iter().map(|r| r.iter().map(|x| x.to_integer()).collect()).collect();
                if !determinant(&ai).is_ok_and(|d| d.abs().is_one()) {
                    continue;
                }
                let image: Option<Vec<usize>> = self
                    .rays
                    .iter()
                    .map(|v| {
                        let w = LatticeVector((0..n).map(|col| (0..n).map(|k| &v.0[k] * &ai[k][col]).sum()).collect());
                        other.ray_index(&w)
                    })
                    .collect();
                let Some(image) = image else { continue };
                let mapped: BTreeSet<Vec<usize>> =
                    self.maximal.iter().map(|c| sorted(&c.iter().map(|&i| image[i]).collect::<Vec<_>>())).collect();
                if mapped == target_cones {
                    return true;
                }
            }
        }
        false
    }

    /// Number of lattice points of the fan's rays: Picard rank of a smooth complete fan is this minus dim.
    pub fn ray_count(&self) -> usize {
        self.rays.len()
    }

    /// Maximal cones as index lists along with their singularity type.
    pub fn singular_cones(&self) -> Vec<(Vec<usize>, ConeType)> {
        self.faces
            .iter()
            .filter(|f| !f.is_empty())
            .filter_map(|f| {
                let t = classify_cone(&self.cone_vectors(f));
                (!t.is_smooth()).then(|| (f.clone(), t))
            })
            .collect()
    }
}

/// A star fan with the bookkeeping to map back to the parent fan.
#[derive(Debug, Clone)]
pub struct StarFan {
    pub fan: Fan,
    /// Parent ray index of each star-fan ray.
    pub origin: Vec<usize>,
    pub ray: usize,
    inverse: Vec<Vec<BigInt>>,
}

impl StarFan {
    /// Image of a lattice point in N / Z rho.
    pub fn project(&self, v: &LatticeVector) -> LatticeVector {
        let n = v.dim();
        let coords: Vec<BigInt> = (0..n)
            .map(|j| v.0.iter().zip(&self.inverse).fold(BigInt::zero(), |acc, (x, row)| acc + x * &row[j]))
            .collect();
        LatticeVector(coords[1..].to_vec())
    }

    pub fn star_ray_of(&self, parent: usize) -> Option<usize> {
        self.origin.iter().position(|&o| o == parent)
    }
}

impl fmt::Display for Fan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rays: Vec<String> = self.rays.iter().map(|r| r.to_string()).collect();
        writeln!(f, "dim {}; rays {}", self.dim, rays.join(" "))?;
        for c in &self.maximal {
            let vs: Vec<String> = c.iter().map(|&i| self.rays[i].to_string()).collect();
            writeln!(f, "  <{}>", vs.join(", "))?;
        }
        Ok(())
    }
}

/// Nontrivial integer relation among n+1 vectors spanning an n-dimensional space, if unique up to scale.
pub fn circuit_relation(vs: &[LatticeVector]) -> Option<Vec<BigInt>> {
    let n = vs.first()?.dim();
    let cols: Vec<Vec<BigInt>> = (0..n).map(|j| vs.iter().map(|v| v.0[j].clone()).collect()).collect();
    let k = crate::lattice::int_nullspace(&cols, vs.len());
    (k.len() == 1).then(|| k[0].0.clone())
}

fn sum_vectors(vs: &[LatticeVector], dim: usize) -> LatticeVector {
    vs.iter().fold(LatticeVector::zero(dim), |a, b| a.add(b))
}

pub(crate) fn sorted(c: &[usize]) -> Vec<usize> {
    let mut s = c.to_vec();
    s.sort();
    s.dedup();
    s
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

pub(crate) fn is_subset(a: &[usize], b: &[usize]) -> bool {
    a.iter().all(|x| b.contains(x))
}

fn is_face_of(p: &PolyCone, rays: &[usize], sub: &[usize]) -> bool {
    let mut set = FixedBitSet::with_capacity(rays.len());
    for (k, r) in rays.iter().enumerate() {
        if sub.contains(r) {
            set.insert(k);
        }
    }
    p.face_closure(&set) == set
}

fn intersection_is_face(
    dim: usize,
    rays: &[LatticeVector],
    a: &[usize],
    pa: &PolyCone,
    b: &[usize],
    pb: &PolyCone,
) -> bool {
    let shared: Vec<usize> = a.iter().copied().filter(|i| b.contains(i)).collect();
    if !is_face_of(pa, a, &shared) || !is_face_of(pb, b, &shared) {
        return false;
    }
    let mut ineqs: Vec<Vec<BigInt>> = pa.facet_normals().iter().map(|f| f.0.clone()).collect();
    ineqs.extend(pb.facet_normals().iter().map(|f| f.0.clone()));
    let mut eqs: Vec<Vec<BigInt>> = pa.equations().iter().map(|f| f.0.clone()).collect();
    eqs.extend(pb.equations().iter().map(|f| f.0.clone()));
    let g = double_description(&ineqs, &eqs, dim);
    if !g.lineality.is_empty() {
        return false;
    }
    if shared.is_empty() {
        return g.rays.is_empty();
    }
    let sp = PolyCone::new(dim, shared.iter().map(|&i| rays[i].clone()).collect()).expect("dims agree");
    g.rays.iter().all(|r| sp.contains(r))
}

/// Absolute determinant of the primitive generators of a full-dimensional simplicial cone.
pub fn multiplicity(rays: &[LatticeVector]) -> Result<BigInt> {
    let rows: Vec<Vec<BigInt>> = rays.iter().map(|r| r.0.clone()).collect();
    Ok(determinant(&rows)?.abs())
}
