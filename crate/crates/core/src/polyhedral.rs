//! Polyhedral cones and polyhedra via the double description method.

use fixedbitset::FixedBitSet;
use num::{BigInt, BigRational, One, Signed, Zero};

use crate::error::{Error, Result};
use crate::lattice::{dot, int_rank, rat_dot, LatticeVector, RationalVector};

/// Generators of {x : a_i . x >= 0}: extremal rays of the pointed part plus a lineality basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generators {
    pub rays: Vec<LatticeVector>,
    pub lineality: Vec<LatticeVector>,
}

struct DdRay {
    v: Vec<BigInt>,
    tight: FixedBitSet,
}

fn primitive_vec(v: Vec<BigInt>) -> Vec<BigInt> {
    LatticeVector(v).primitive().map(|p| p.0).expect("nonzero vector")
}

/// Double description: all generators of the cone {x : a . x >= 0 for a in ineqs, e . x = 0 for e in eqs}.
pub fn double_description(ineqs: &[Vec<BigInt>], eqs: &[Vec<BigInt>], n: usize) -> Generators {
    let mut rows: Vec<Vec<BigInt>> = Vec::new();
    for e in eqs {
        rows.push(e.clone());
        rows.push(e.iter().map(|x| -x).collect());
    }
    rows.extend(ineqs.iter().cloned());
    let m = rows.len();

    let mut lineality: Vec<Vec<BigInt>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect();
    let mut rays: Vec<DdRay> = Vec::new();

    for (k, a) in rows.iter().enumerate() {
        if a.iter().all(|x| x.is_zero()) {
            for r in rays.iter_mut() {
                r.tight.insert(k);
            }
            continue;
        }
        if let Some(li) = lineality.iter().position(|l| !dot(a, l).is_zero()) {
            let mut l = lineality.remove(li);
            let mut al = dot(a, &l);
            if al.is_negative() {
                l = l.iter().map(|x| -x).collect();
                al = -al;
            }
            for other in lineality.iter_mut() {
                let ao = dot(a, other);
                if !ao.is_zero() {
                    let v: Vec<BigInt> = other.iter().zip(&l).map(|(o, li)| o * &al - li * &ao).collect();
                    *other = primitive_vec(v);
                }
            }
            for r in rays.iter_mut() {
                let ar = dot(a, &r.v);
                if !ar.is_zero() {
                    let v: Vec<BigInt> = r.v.iter().zip(&l).map(|(x, li)| x * &al - li * &ar).collect();
                    r.v = primitive_vec(v);
                }
                r.tight.insert(k);
            }
            let mut tight = FixedBitSet::with_capacity(m);
            for j in 0..k {
                tight.insert(j);
            }
            rays.push(DdRay { v: primitive_vec(l), tight });
            continue;
        }

        let vals: Vec<BigInt> = rays.iter().map(|r| dot(a, &r.v)).collect();
        let pos: Vec<usize> = (0..rays.len()).filter(|&i| vals[i].is_positive()).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&i| vals[i].is_negative()).collect();
        if neg.is_empty() {
            for (i, r) in rays.iter_mut().enumerate() {
                if vals[i].is_zero() {
                    r.tight.insert(k);
                }
            }
            continue;
        }
        let mut new_rays: Vec<DdRay> = Vec::new();
        for &p in &pos {
            for &q in &neg {
                let mut common = rays[p].tight.clone();
                common.intersect_with(&rays[q].tight);
                let adjacent = (0..rays.len()).all(|r| r == p || r == q || !common.is_subset(&rays[r].tight));
                if !adjacent {
                    continue;
                }
                let v: Vec<BigInt> = rays[q]
                    .v
                    .iter()
                    .zip(&rays[p].v)
                    .map(|(x, y)| x * &vals[p] - y * &vals[q])
                    .collect();
                common.insert(k);
                new_rays.push(DdRay { v: primitive_vec(v), tight: common });
            }
        }
        let mut kept: Vec<DdRay> = Vec::new();
        for (i, mut r) in rays.into_iter().enumerate() {
            if vals[i].is_negative() {
                continue;
            }
            if vals[i].is_zero() {
                r.tight.insert(k);
            }
            kept.push(r);
        }
        kept.extend(new_rays);
        rays = kept;
    }

    let mut out: Vec<LatticeVector> = rays.into_iter().map(|r| LatticeVector(r.v)).collect();
    out.sort();
    out.dedup();
    Generators {
        rays: out,
        lineality: lineality.into_iter().map(|l| LatticeVector(primitive_vec(l))).collect(),
    }
}

/// A rational polyhedral cone in N_R given by lattice generators.
#[derive(Debug, Clone)]
pub struct PolyCone {
    dim: usize,
    generators: Vec<LatticeVector>,
    /// Inward facet normals: rays of the dual cone.
    facets: Vec<LatticeVector>,
    /// Basis of the orthogonal complement of the span.
    equations: Vec<LatticeVector>,
}

impl PolyCone {
    pub fn new(ambient: usize, generators: Vec<LatticeVector>) -> Result<Self> {
        for g in &generators {
            if g.dim() != ambient {
                return Err(Error::DimensionMismatch { expected: ambient, found: g.dim() });
            }
        }
        let gens: Vec<Vec<BigInt>> = generators.iter().map(|g| g.0.clone()).collect();
        let dual = double_description(&gens, &[], ambient);
        Ok(PolyCone {
            dim: ambient,
            generators,
            facets: dual.rays,
            equations: dual.lineality,
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[LatticeVector] {
        &self.generators
    }

    pub fn facet_normals(&self) -> &[LatticeVector] {
        &self.facets
    }

    pub fn equations(&self) -> &[LatticeVector] {
        &self.equations
    }

    pub fn dim(&self) -> usize {
        self.dim - self.equations.len()
    }

    pub fn is_strongly_convex(&self) -> bool {
        let mut s = vec![BigInt::zero(); self.dim];
        for f in &self.facets {
            for (x, y) in s.iter_mut().zip(&f.0) {
                *x += y;
            }
        }
        self.generators.iter().filter(|g| !g.is_zero()).all(|g| dot(&s, &g.0).is_positive())
    }

    pub fn contains(&self, x: &LatticeVector) -> bool {
        self.equations.iter().all(|e| e.dot(x).is_zero()) && self.facets.iter().all(|f| !f.dot(x).is_negative())
    }

    pub fn contains_rational(&self, x: &RationalVector) -> bool {
        self.equations.iter().all(|e| x.dot_int(e).is_zero())
            && self.facets.iter().all(|f| !x.dot_int(f).is_negative())
    }

    pub fn relint_contains(&self, x: &LatticeVector) -> bool {
        self.equations.iter().all(|e| e.dot(x).is_zero()) && self.facets.iter().all(|f| f.dot(x).is_positive())
    }

    pub fn relint_contains_rational(&self, x: &RationalVector) -> bool {
        self.equations.iter().all(|e| x.dot_int(e).is_zero())
            && self.facets.iter().all(|f| x.dot_int(f).is_positive())
    }

    /// For each facet, the indices of the generators lying on it.
    pub fn facet_generator_sets(&self) -> Vec<FixedBitSet> {
        self.facets
            .iter()
            .map(|f| {
                let mut s = FixedBitSet::with_capacity(self.generators.len());
                for (i, g) in self.generators.iter().enumerate() {
                    if f.dot(g).is_zero() {
                        s.insert(i);
                    }
                }
                s
            })
            .collect()
    }

    /// Whether generator `i` spans an extremal ray (strongly convex cones only).
    pub fn is_extremal_generator(&self, i: usize) -> bool {
        let g = &self.generators[i];
        if g.is_zero() {
            return false;
        }
        let mut rows: Vec<Vec<BigInt>> = self.equations.iter().map(|e| e.0.clone()).collect();
        rows.extend(self.facets.iter().filter(|f| f.dot(g).is_zero()).map(|f| f.0.clone()));
        int_rank(&rows) == self.dim - 1
    }

    /// Closure of a set of generators: the generators of the smallest face containing them.
    pub fn face_closure(&self, set: &FixedBitSet) -> FixedBitSet {
        let mut out = FixedBitSet::with_capacity(self.generators.len());
        out.insert_range(..);
        for fs in self.facet_generator_sets() {
            if set.is_subset(&fs) {
                out.intersect_with(&fs);
            }
        }
        out
    }

    /// All faces as sets of generator indices, including the empty face and the cone itself.
    pub fn faces(&self) -> Vec<FixedBitSet> {
        let facet_sets = self.facet_generator_sets();
        let mut all = FixedBitSet::with_capacity(self.generators.len());
        all.insert_range(..);
        let mut faces = vec![all];
        let mut frontier = faces.clone();
        while let Some(f) = frontier.pop() {
            for fs in &facet_sets {
                let mut g = f.clone();
                g.intersect_with(fs);
                if g != f && !faces.contains(&g) {
                    faces.push(g.clone());
                    frontier.push(g);
                }
            }
        }
        faces
    }

    /// A lattice point in the relative interior (sum of generators).
    pub fn interior_point(&self) -> LatticeVector {
        let mut s = LatticeVector::zero(self.dim);
        for g in &self.generators {
            s = s.add(g);
        }
        s
    }
}

/// A polyhedron {x in Q^n : a_i . x >= b_i}.
#[derive(Debug, Clone)]
pub struct Polyhedron {
    pub dim: usize,
    pub inequalities: Vec<(Vec<BigRational>, BigRational)>,
}

/// V-representation of a polyhedron.
#[derive(Debug, Clone)]
pub struct VRep {
    pub vertices: Vec<RationalVector>,
    pub rays: Vec<LatticeVector>,
    pub lineality: Vec<LatticeVector>,
}

impl Polyhedron {
    pub fn new(dim: usize, inequalities: Vec<(Vec<BigRational>, BigRational)>) -> Self {
        Polyhedron { dim, inequalities }
    }

    pub fn contains(&self, x: &RationalVector) -> bool {
        self.inequalities.iter().all(|(a, b)| rat_dot(a, &x.0) >= *b)
    }

    /// Vertices, recession rays and lineality via homogenisation.
    pub fn vrep(&self) -> VRep {
        let n = self.dim;
        let mut rows: Vec<Vec<BigInt>> = Vec::new();
        for (a, b) in &self.inequalities {
            let den = a.iter().chain(std::iter::once(b)).fold(BigInt::one(), |l, c| num::integer::lcm(l, c.denom().clone()));
            let dr = BigRational::from_integer(den);
            let mut row: Vec<BigInt> = a.iter().map(|x| (x * &dr).to_integer()).collect();
            row.push((-(b * &dr)).to_integer());
            rows.push(row);
        }
        let mut t = vec![BigInt::zero(); n + 1];
        t[n] = BigInt::one();
        rows.push(t);
        let g = double_description(&rows, &[], n + 1);
        let mut vertices = Vec::new();
        let mut rays = Vec::new();
        for r in g.rays {
            let last = r.0[n].clone();
            if last.is_zero() {
                rays.push(LatticeVector(r.0[..n].to_vec()));
            } else {
                let lr = BigRational::from_integer(last);
                vertices.push(RationalVector(
                    r.0[..n].iter().map(|x| BigRational::from_integer(x.clone()) / &lr).collect(),
                ));
            }
        }
        let lineality = g.lineality.into_iter().map(|l| LatticeVector(l.0[..n].to_vec())).collect();
        VRep { vertices, rays, lineality }
    }

    pub fn is_empty(&self) -> bool {
        self.vrep().vertices.is_empty()
    }

    /// Lattice points of a bounded polyhedron; `None` if unbounded.
    pub fn lattice_points(&self) -> Option<Vec<LatticeVector>> {
        let v = self.vrep();
        if !v.rays.is_empty() || !v.lineality.is_empty() {
            return None;
        }
        if v.vertices.is_empty() {
            return Some(Vec::new());
        }
        let n = self.dim;
        let lo: Vec<BigInt> = (0..n).map(|i| v.vertices.iter().map(|p| p.0[i].ceil().to_integer()).min().unwrap()).collect();
        let hi: Vec<BigInt> = (0..n).map(|i| v.vertices.iter().map(|p| p.0[i].floor().to_integer()).max().unwrap()).collect();
        let mut out = Vec::new();
        if lo.iter().zip(&hi).any(|(l, h)| l > h) {
            return Some(out);
        }
        let mut cur = lo.clone();
        loop {
            let p = LatticeVector(cur.clone());
            if self.contains(&p.to_rational()) {
                out.push(p);
            }
            let mut i = 0;
            loop {
                if i == n {
                    return Some(out);
                }
                cur[i] += 1;
                if cur[i] <= hi[i] {
                    break;
                }
                cur[i] = lo[i].clone();
                i += 1;
            }
        }
    }
}

pub fn abs_max(v: &[BigInt]) -> BigInt {
    v.iter().map(|x| x.abs()).max().unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{int, rat};

    fn lv(c: &[i64]) -> LatticeVector {
        LatticeVector::from_i64(c)
    }

    fn rows(r: &[&[i64]]) -> Vec<Vec<BigInt>> {
        r.iter().map(|x| x.iter().map(|&y| int(y)).collect()).collect()
    }

    #[test]
    fn orthant_dual() {
        let g = double_description(&rows(&[&[1, 0], &[0, 1]]), &[], 2);
        assert_eq!(g.rays, vec![lv(&[0, 1]), lv(&[1, 0])]);
        assert!(g.lineality.is_empty());
    }

    #[test]
    fn half_space_has_lineality() {
        let g = double_description(&rows(&[&[1, 1, 0]]), &[], 3);
        assert_eq!(g.rays.len(), 1);
        assert_eq!(g.lineality.len(), 2);
    }

    #[test]
    fn square_pyramid() {
        let c = PolyCone::new(3, vec![lv(&[1, 0, 1]), lv(&[0, 1, 1]), lv(&[-1, 0, 1]), lv(&[0, -1, 1])]).unwrap();
        assert_eq!(c.facet_normals().len(), 4);
        assert!(c.is_strongly_convex());
        assert_eq!(c.dim(), 3);
        assert_eq!(c.faces().len(), 10);
        assert!(c.relint_contains(&lv(&[0, 0, 1])));
        assert!(!c.relint_contains(&lv(&[1, 0, 1])));
        assert!(c.contains(&lv(&[1, 0, 1])));
        for i in 0..4 {
            assert!(c.is_extremal_generator(i));
        }
    }

    #[test]
    fn non_extremal_generator_detected() {
        let c = PolyCone::new(2, vec![lv(&[1, 0]), lv(&[1, 1]), lv(&[0, 1])]).unwrap();
        assert!(c.is_extremal_generator(0));
        assert!(!c.is_extremal_generator(1));
        assert!(c.is_extremal_generator(2));
    }

    #[test]
    fn line_is_not_strongly_convex() {
        let c = PolyCone::new(2, vec![lv(&[1, 0]), lv(&[-1, 0])]).unwrap();
        assert!(!c.is_strongly_convex());
        assert_eq!(c.dim(), 1);
    }

    #[test]
    fn triangle_lattice_points() {
        // x >= 0, y >= 0, x + y <= 2
        let p = Polyhedron::new(
            2,
            vec![
                (vec![rat(1, 1), rat(0, 1)], rat(0, 1)),
                (vec![rat(0, 1), rat(1, 1)], rat(0, 1)),
                (vec![rat(-1, 1), rat(-1, 1)], rat(-2, 1)),
            ],
        );
        assert_eq!(p.vrep().vertices.len(), 3);
        assert_eq!(p.lattice_points().unwrap().len(), 6);
    }
}
