//! Sheaf cohomology of invariant divisors, ideal sheaves and restrictions to toric polyhedra,
//! weight by weight, by Čech complexes on the maximal-cone cover.
//!
//! For a weight u and a chart U_tau the weight space is one-dimensional or zero:
//!
//! * `O(D)`: <u, e_rho> >= -d_rho for every ray of tau (D is rounded down).
//! * `I_Y (x) O(D)`: as above, and for every cone gamma of Phi that is a face of tau some ray of
//!   gamma has <u, e_rho> > -d_rho.
//! * `O_Y(D)`: as for O(D), and some cone gamma of Phi that is a face of tau has
//!   <u, e_rho> = -d_rho on all its rays.

use std::collections::{BTreeMap, HashMap};

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};

use crate::divisor::{is_cartier, support_function, InvariantDivisor};
use crate::error::{Error, Result};
use crate::fan::{is_subset, Fan};
use crate::lattice::{rank, solve_exact, LatticeVector};

/// Weights beyond this many points are refused.
pub const WINDOW_LIMIT: u64 = 20_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sheaf {
    Line(InvariantDivisor),
    Ideal { divisor: InvariantDivisor, phi: Vec<Vec<usize>> },
    Restriction { divisor: InvariantDivisor, phi: Vec<Vec<usize>> },
}

impl Sheaf {
    pub fn divisor(&self) -> &InvariantDivisor {
        match self {
            Sheaf::Line(d) | Sheaf::Ideal { divisor: d, .. } | Sheaf::Restriction { divisor: d, .. } => d,
        }
    }

    fn phi(&self) -> &[Vec<usize>] {
        match self {
            Sheaf::Line(_) => &[],
            Sheaf::Ideal { phi, .. } | Sheaf::Restriction { phi, .. } => phi,
        }
    }
}

/// A box lo <= u <= hi in M.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightWindow {
    pub lo: Vec<BigInt>,
    pub hi: Vec<BigInt>,
}

impl WeightWindow {
    pub fn count(&self) -> u64 {
        self.lo.iter().zip(&self.hi).fold(1u64, |acc, (l, h)| {
            let w = (h - l + 1u32).to_u64().unwrap_or(u64::MAX);
            acc.saturating_mul(w)
        })
    }

    /// The window widened by its largest side length in every direction.
    pub fn doubled(&self) -> WeightWindow {
        let w = self.lo.iter().zip(&self.hi).map(|(l, h)| h - l + 1u32).max().unwrap_or_else(BigInt::one);
        WeightWindow { lo: self.lo.iter().map(|l| l - &w).collect(), hi: self.hi.iter().map(|h| h + &w).collect() }
    }

    pub fn contains(&self, u: &LatticeVector) -> bool {
        u.0.iter().zip(self.lo.iter().zip(&self.hi)).all(|(x, (l, h))| l <= x && x <= h)
    }

    fn points(&self) -> Vec<Vec<i64>> {
        let lo: Vec<i64> = self.lo.iter().map(|x| x.to_i64().expect("window fits in i64")).collect();
        let hi: Vec<i64> = self.hi.iter().map(|x| x.to_i64().expect("window fits in i64")).collect();
        let mut out = Vec::new();
        let mut cur = lo.clone();
        if lo.iter().zip(&hi).any(|(l, h)| l > h) {
            return out;
        }
        loop {
            out.push(cur.clone());
            let mut i = 0;
            loop {
                if i == cur.len() {
                    return out;
                }
                if cur[i] < hi[i] {
                    cur[i] += 1;
                    break;
                }
                cur[i] = lo[i];
                i += 1;
            }
        }
    }
}

fn floor_coeffs(d: &InvariantDivisor) -> Vec<BigInt> {
    d.coeffs().iter().map(|c| c.floor().to_integer()).collect()
}

/// Bounding box of the vertices of the arrangement <u, e_rho> = -d_rho, padded by one.
pub fn weight_window(fan: &Fan, d: &InvariantDivisor) -> Result<WeightWindow> {
    if !fan.is_complete() {
        return Err(Error::NotComplete);
    }
    if d.len() != fan.rays().len() {
        return Err(Error::CoefficientCount { expected: fan.rays().len(), found: d.len() });
    }
    let n = fan.dim();
    let coeffs = floor_coeffs(d);
    let mut lo: Option<Vec<BigRational>> = None;
    let mut hi: Option<Vec<BigRational>> = None;
    let r = fan.rays().len();
    let mut subset: Vec<usize> = (0..n).collect();
    if r >= n {
        loop {
            let rows: Vec<Vec<BigRational>> = subset.iter().map(|&i| fan.ray(i).to_rational().0).collect();
            if rank(&rows) == n {
                let rhs: Vec<BigRational> = subset.iter().map(|&i| BigRational::from_integer(-&coeffs[i])).collect();
                let u = solve_exact(&rows, &rhs).expect("full rank system");
                match (&mut lo, &mut hi) {
                    (Some(l), Some(h)) => {
                        for k in 0..n {
                            if u[k] < l[k] {
                                l[k] = u[k].clone();
                            }
                            if u[k] > h[k] {
                                h[k] = u[k].clone();
                            }
                        }
                    }
                    _ => {
                        lo = Some(u.clone());
                        hi = Some(u);
                    }
                }
            }
            // Next n-subset in lexicographic order.
            let mut i = n;
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                if subset[i] < r - n + i {
                    subset[i] += 1;
                    for j in i + 1..n {
                        subset[j] = subset[j - 1] + 1;
                    }
                    i = usize::MAX;
                    break;
                }
            }
            if i != usize::MAX {
                break;
            }
        }
    }
    let zero = vec![BigRational::zero(); n];
    let lo = lo.unwrap_or_else(|| zero.clone());
    let hi = hi.unwrap_or(zero);
    let w = WeightWindow {
        lo: lo.iter().map(|x| x.floor().to_integer() - 1).collect(),
        hi: hi.iter().map(|x| x.ceil().to_integer() + 1).collect(),
    };
    let count = w.count();
    if count > WINDOW_LIMIT {
        return Err(Error::WindowOverflow(count));
    }
    Ok(w)
}

/// Dimensions and contributing weights of H^0, ..., H^{n+1}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CohomologyTable {
    pub dims: Vec<usize>,
    pub weights: Vec<Vec<(LatticeVector, usize)>>,
    pub window: WeightWindow,
}

impl CohomologyTable {
    pub fn h(&self, i: usize) -> usize {
        self.dims.get(i).copied().unwrap_or(0)
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.dims.iter().enumerate().map(|(i, &d)| if i % 2 == 0 { d as i64 } else { -(d as i64) }).sum()
    }

    /// h^i = 0 for i > n.
    pub fn vanishes_above(&self, n: usize) -> bool {
        self.dims.iter().skip(n + 1).all(|&d| d == 0)
    }

    fn empty(window: WeightWindow, degrees: usize) -> Self {
        CohomologyTable { dims: vec![0; degrees], weights: vec![Vec::new(); degrees], window }
    }

    fn add(&mut self, u: &[i64], dims: &[usize]) {
        for (i, &d) in dims.iter().enumerate() {
            if d > 0 {
                self.dims[i] += d;
                self.weights[i].push((LatticeVector::from_i64(u), d));
            }
        }
    }
}

/// The Čech nerve data: subsets of maximal cones up to a size, with their intersection faces.
/// Qualifying source rows, target rows and signed entries of one coboundary map.
type Coboundary = (Vec<usize>, Vec<usize>, Vec<(usize, usize, i64)>);

struct Nerve {
    /// subsets[k]: (sorted maximal-cone indices of size k+1, index of the face in `faces`).
    subsets: Vec<Vec<(Vec<usize>, usize)>>,
    index: Vec<HashMap<Vec<usize>, usize>>,
    /// Distinct intersection faces as ray lists.
    faces: Vec<Vec<usize>>,
}

impl Nerve {
    fn new(fan: &Fan, max_degree: usize) -> Self {
        let cones = fan.maximal_cones();
        let m = cones.len();
        let mut faces: Vec<Vec<usize>> = Vec::new();
        let mut face_index: HashMap<Vec<usize>, usize> = HashMap::new();
        let mut subsets: Vec<Vec<(Vec<usize>, usize)>> = Vec::new();
        let mut index = Vec::new();
        let mut level: Vec<(Vec<usize>, Vec<usize>)> = (0..m).map(|i| (vec![i], cones[i].clone())).collect();
        for _ in 0..=max_degree {
            if level.is_empty() {
                break;
            }
            let mut row = Vec::with_capacity(level.len());
            let mut idx = HashMap::with_capacity(level.len());
            for (k, (s, f)) in level.iter().enumerate() {
                let fi = *face_index.entry(f.clone()).or_insert_with(|| {
                    faces.push(f.clone());
                    faces.len() - 1
                });
                row.push((s.clone(), fi));
                idx.insert(s.clone(), k);
            }
            subsets.push(row);
            index.push(idx);
            let mut next = Vec::new();
            for (s, f) in &level {
                for (j, cone) in cones.iter().enumerate().skip(s.last().unwrap() + 1) {
                    let g: Vec<usize> = f.iter().copied().filter(|r| cone.contains(r)).collect();
                    let mut t = s.clone();
                    t.push(j);
                    next.push((t, g));
                }
            }
            level = next;
        }
        Nerve { subsets, index, faces }
    }

    /// Coboundary entries from degree k to k+1 between qualifying subsets, as (row, col, sign).
    fn coboundary(&self, k: usize, q: &[bool]) -> Coboundary {
        let src: Vec<usize> = (0..self.subsets[k].len()).filter(|&i| q[self.subsets[k][i].1]).collect();
        let dst: Vec<usize> = match self.subsets.get(k + 1) {
            Some(level) => (0..level.len()).filter(|&i| q[level[i].1]).collect(),
            None => Vec::new(),
        };
        let mut entries = Vec::new();
        if dst.is_empty() || src.is_empty() {
            return (src, dst, entries);
        }
        let dst_pos: HashMap<usize, usize> = dst.iter().enumerate().map(|(p, &i)| (i, p)).collect();
        for (col, &si) in src.iter().enumerate() {
            let s = &self.subsets[k][si].0;
            // (d c)(t) = sum_j (-1)^j c(t minus t_j): the source s appears in t = s + {j} with sign (-1)^pos.
            let m = self.max_index();
            for j in 0..m {
                if s.contains(&j) {
                    continue;
                }
                let pos = s.iter().filter(|&&x| x < j).count();
                let mut t = s.clone();
                t.insert(pos, j);
                if let Some(&ti) = self.index[k + 1].get(&t) {
                    if let Some(&row) = dst_pos.get(&ti) {
                        entries.push((row, col, if pos % 2 == 0 { 1 } else { -1 }));
                    }
                }
            }
        }
        (src, dst, entries)
    }

    fn max_index(&self) -> usize {
        self.subsets.first().map_or(0, |l| l.len())
    }
}

/// Rank of a sparse integer matrix over Q.
pub(crate) fn sparse_rank(rows: usize, cols: usize, entries: &[(usize, usize, i64)]) -> usize {
    if rows == 0 || cols == 0 || entries.is_empty() {
        return 0;
    }
    let mut m: Vec<BTreeMap<usize, BigRational>> = vec![BTreeMap::new(); rows];
    for &(r, c, v) in entries {
        let e = m[r].entry(c).or_insert_with(BigRational::zero);
        *e += BigRational::from_integer(v.into());
        if e.is_zero() {
            m[r].remove(&c);
        }
    }
    let mut rank = 0;
    let mut active: Vec<BTreeMap<usize, BigRational>> = m.into_iter().filter(|r| !r.is_empty()).collect();
    while let Some(pivot_row) = {
        // Prefer the sparsest row to limit fill-in.
        let best = (0..active.len()).min_by_key(|&i| active[i].len());
        best.map(|i| active.swap_remove(i))
    } {
        let (&pc, pv) = pivot_row.iter().next().expect("nonempty row");
        let pv = pv.clone();
        rank += 1;
        for row in active.iter_mut() {
            if let Some(f) = row.get(&pc).cloned() {
                let factor = f / &pv;
                for (c, v) in &pivot_row {
                    let e = row.entry(*c).or_insert_with(BigRational::zero);
                    *e -= &factor * v;
                    if e.is_zero() {
                        row.remove(c);
                    }
                }
            }
        }
        active.retain(|r| !r.is_empty());
    }
    rank
}

struct Engine<'a> {
    fan: &'a Fan,
    nerve: Nerve,
    coeffs: Vec<BigInt>,
    phi_faces: Vec<Vec<usize>>,
    kind: u8,
    degrees: usize,
}

impl<'a> Engine<'a> {
    fn new(fan: &'a Fan, sheaf: &Sheaf) -> Result<Self> {
        let d = sheaf.divisor();
        if d.len() != fan.rays().len() {
            return Err(Error::CoefficientCount { expected: fan.rays().len(), found: d.len() });
        }
        let phi = sheaf.phi();
        if !phi.is_empty() && !fan.is_star_closed(phi) {
            return Err(Error::NotStarClosed);
        }
        let degrees = fan.dim() + 2;
        let kind = match sheaf {
            Sheaf::Line(_) => 0,
            Sheaf::Ideal { .. } => 1,
            Sheaf::Restriction { .. } => 2,
        };
        Ok(Engine {
            fan,
            nerve: Nerve::new(fan, degrees),
            coeffs: floor_coeffs(d),
            phi_faces: phi.to_vec(),
            kind,
            degrees,
        })
    }

    /// sign(<u, e_rho> + d_rho) for every ray.
    fn pattern(&self, u: &[i64]) -> Vec<i8> {
        self.fan
            .rays()
            .iter()
            .zip(&self.coeffs)
            .map(|(r, d)| {
                let s: BigInt = r.0.iter().zip(u).map(|(a, b)| a * BigInt::from(*b)).sum::<BigInt>() + d;
                if s.is_negative() {
                    -1
                } else if s.is_zero() {
                    0
                } else {
                    1
                }
            })
            .collect()
    }

    fn qualifies(&self, pattern: &[i8], face: &[usize]) -> bool {
        if face.iter().any(|&r| pattern[r] < 0) {
            return false;
        }
        let tight = |g: &Vec<usize>| g.iter().all(|&r| pattern[r] == 0);
        let inside: Vec<&Vec<usize>> = self.phi_faces.iter().filter(|g| is_subset(g, face)).collect();
        match self.kind {
            0 => true,
            1 => !inside.iter().any(|g| tight(g)),
            _ => inside.iter().any(|g| tight(g)),
        }
    }

    fn face_flags(&self, pattern: &[i8]) -> Vec<bool> {
        self.nerve.faces.iter().map(|f| self.qualifies(pattern, f)).collect()
    }

    fn dims(&self, pattern: &[i8]) -> Vec<usize> {
        let q = self.face_flags(pattern);
        cech_dims(&self.nerve, &q, self.degrees)
    }
}

fn cech_dims(nerve: &Nerve, q: &[bool], degrees: usize) -> Vec<usize> {
    let mut sizes = Vec::with_capacity(degrees + 1);
    let mut ranks = Vec::with_capacity(degrees + 1);
    for k in 0..=degrees {
        if k >= nerve.subsets.len() {
            sizes.push(0);
            ranks.push(0);
            continue;
        }
        let (src, dst, entries) = nerve.coboundary(k, q);
        sizes.push(src.len());
        ranks.push(if k < degrees { sparse_rank(dst.len(), src.len(), &entries) } else { 0 });
    }
    (0..degrees).map(|k| sizes[k] - ranks[k] - if k > 0 { ranks[k - 1] } else { 0 }).collect()
}

/// Cohomology of a sheaf over a given window of weights.
pub fn cech_cohomology_in(fan: &Fan, sheaf: &Sheaf, window: &WeightWindow) -> Result<CohomologyTable> {
    if !fan.is_complete() {
        return Err(Error::NotComplete);
    }
    let count = window.count();
    if count > WINDOW_LIMIT {
        return Err(Error::WindowOverflow(count));
    }
    let engine = Engine::new(fan, sheaf)?;
    let mut memo: HashMap<Vec<i8>, Vec<usize>> = HashMap::new();
    let mut table = CohomologyTable::empty(window.clone(), engine.degrees);
    for u in window.points() {
        let p = engine.pattern(&u);
        let dims = memo.entry(p.clone()).or_insert_with(|| engine.dims(&p)).clone();
        table.add(&u, &dims);
    }
    log::debug!("{} weights, {} patterns", count, memo.len());
    Ok(table)
}

/// Cohomology of a sheaf, over the arrangement window of its divisor.
pub fn cech_cohomology(fan: &Fan, sheaf: &Sheaf) -> Result<CohomologyTable> {
    let w = weight_window(fan, sheaf.divisor())?;
    cech_cohomology_in(fan, sheaf, &w)
}

pub fn line_bundle_cohomology(fan: &Fan, d: &InvariantDivisor) -> Result<CohomologyTable> {
    cech_cohomology(fan, &Sheaf::Line(d.clone()))
}

/// h^i(Y, O_Y(D)) for the toric polyhedron Y of a star-closed set.
pub fn polyhedron_cohomology(fan: &Fan, phi: &[Vec<usize>], d: &InvariantDivisor) -> Result<CohomologyTable> {
    if !fan.is_star_closed(phi) {
        return Err(Error::NotStarClosed);
    }
    if !is_cartier(fan, d) {
        return Err(Error::NotCartier);
    }
    cech_cohomology(fan, &Sheaf::Restriction { divisor: d.clone(), phi: phi.to_vec() })
}

#[derive(Debug, Clone)]
pub struct IdealVanishing {
    pub ambient: CohomologyTable,
    pub ideal: CohomologyTable,
    pub restriction: CohomologyTable,
    /// Rank of H^0(X, L) -> H^0(Y, L|_Y).
    pub restriction_rank: usize,
    /// h^i(I_Y (x) L) = 0 for i > 0.
    pub vanishing: bool,
    pub surjective: bool,
    /// Alternating sum of the three Euler characteristics is zero.
    pub telescopes: bool,
}

impl IdealVanishing {
    pub fn holds(&self) -> bool {
        self.vanishing && self.surjective
    }
}

/// Computes h^i(I_Y (x) L), h^i(L), h^i(L|_Y) and the rank of restriction on H^0.
pub fn ideal_vanishing_check(fan: &Fan, phi: &[Vec<usize>], l: &InvariantDivisor) -> Result<IdealVanishing> {
    if !is_cartier(fan, l) {
        return Err(Error::NotCartier);
    }
    if !fan.is_star_closed(phi) {
        return Err(Error::NotStarClosed);
    }
    let w = weight_window(fan, l)?;
    let ambient = cech_cohomology_in(fan, &Sheaf::Line(l.clone()), &w)?;
    let ideal = cech_cohomology_in(fan, &Sheaf::Ideal { divisor: l.clone(), phi: phi.to_vec() }, &w)?;
    let sheaf = Sheaf::Restriction { divisor: l.clone(), phi: phi.to_vec() };
    let restriction = cech_cohomology_in(fan, &sheaf, &w)?;
    let engine = Engine::new(fan, &sheaf)?;
    // A global section chi^u restricts to zero on Y iff no chart of the cover sees it on Y.
    let restriction_rank = ambient.weights[0]
        .iter()
        .filter(|(u, _)| {
            let ui: Vec<i64> = u.0.iter().map(|x| x.to_i64().expect("small weight")).collect();
            let p = engine.pattern(&ui);
            engine.face_flags(&p).iter().any(|&b| b)
        })
        .count();
    let vanishing = ideal.dims.iter().skip(1).all(|&d| d == 0);
    let surjective = restriction_rank == restriction.h(0);
    let telescopes =
        ideal.euler_characteristic() - ambient.euler_characteristic() + restriction.euler_characteristic() == 0;
    Ok(IdealVanishing { ambient, ideal, restriction, restriction_rank, vanishing, surjective, telescopes })
}

/// Dimension of the kernel of H^k(O(A)) -> H^k(O(B)) induced by the inclusion, for B - A effective.
pub fn inclusion_kernel(fan: &Fan, a: &InvariantDivisor, b: &InvariantDivisor, k: usize) -> Result<usize> {
    if !b.sub(a).is_effective() {
        return Err(Error::Invalid("B - A is not effective".into()));
    }
    let wa = weight_window(fan, a)?;
    let wb = weight_window(fan, b)?;
    let window = WeightWindow {
        lo: wa.lo.iter().zip(&wb.lo).map(|(x, y)| x.min(y).clone()).collect(),
        hi: wa.hi.iter().zip(&wb.hi).map(|(x, y)| x.max(y).clone()).collect(),
    };
    let ea = Engine::new(fan, &Sheaf::Line(a.clone()))?;
    let eb = Engine::new(fan, &Sheaf::Line(b.clone()))?;
    let nerve = &ea.nerve;
    let mut memo: HashMap<(Vec<i8>, Vec<i8>), usize> = HashMap::new();
    let mut total = 0;
    for u in window.points() {
        let key = (ea.pattern(&u), eb.pattern(&u));
        let val = *memo.entry(key.clone()).or_insert_with(|| {
            let qa = ea.face_flags(&key.0);
            let qb = eb.face_flags(&key.1);
            if k >= nerve.subsets.len() {
                return 0;
            }
            // C_A^k as coordinate vectors in C_B^k, together with B_B^k = im d_B^{k-1}.
            let in_b: Vec<usize> = (0..nerve.subsets[k].len()).filter(|&i| qb[nerve.subsets[k][i].1]).collect();
            let pos: HashMap<usize, usize> = in_b.iter().enumerate().map(|(p, &i)| (i, p)).collect();
            let a_cols: Vec<usize> =
                (0..nerve.subsets[k].len()).filter(|&i| qa[nerve.subsets[k][i].1]).map(|i| pos[&i]).collect();
            let (bb_src, _, bb_entries) = if k > 0 { nerve.coboundary(k - 1, &qb) } else { (vec![], vec![], vec![]) };
            let (ba_src, ba_dst, ba_entries) = if k > 0 { nerve.coboundary(k - 1, &qa) } else { (vec![], vec![], vec![]) };
            let rank_bb = sparse_rank(in_b.len(), bb_src.len(), &bb_entries);
            let mut stacked = bb_entries.clone();
            for (j, &row) in a_cols.iter().enumerate() {
                stacked.push((row, bb_src.len() + j, 1));
            }
            let rank_sum = sparse_rank(in_b.len(), bb_src.len() + a_cols.len(), &stacked);
            let inter = a_cols.len() + rank_bb - rank_sum;
            let rank_ba = sparse_rank(ba_dst.len(), ba_src.len(), &ba_entries);
            inter - rank_ba
        });
        total += val;
    }
    Ok(total)
}

/// Minimal cones of a star-closed set: the components V(gamma) of Y.
pub fn components(fan: &Fan, phi: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut mins: Vec<Vec<usize>> =
        phi.iter().filter(|g| !phi.iter().any(|h| h != *g && is_subset(h, g))).cloned().collect();
    mins.sort();
    mins.dedup();
    let _ = fan;
    mins
}

/// Smallest cone of the fan containing all the given rays.
fn smallest_cone(fan: &Fan, rays: &[usize]) -> Option<Vec<usize>> {
    fan.cones().iter().filter(|c| is_subset(rays, c)).min_by_key(|c| c.len()).cloned()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MvCheck {
    /// Hypercohomology of the Mayer-Vietoris complex.
    pub resolution: Vec<usize>,
    /// Direct computation on Y.
    pub direct: Vec<usize>,
}

impl MvCheck {
    pub fn agrees(&self) -> bool {
        self.resolution == self.direct
    }
}

/// Compares H^*(Y, O_Y(D)) with the hypercohomology of 0 -> e_0* O -> e_1* O -> ... built from the
/// components of Y and their intersections.
pub fn mv_resolution_check(fan: &Fan, phi: &[Vec<usize>], d: &InvariantDivisor) -> Result<MvCheck> {
    let direct = polyhedron_cohomology(fan, phi, d)?;
    let comps = components(fan, phi);
    let r = comps.len();
    let degrees = fan.dim() + 2;
    // Index sets J of components with a nonempty intersection V(gamma_J).
    let mut js: Vec<Vec<(Vec<usize>, Vec<usize>)>> = Vec::new();
    let mut level: Vec<Vec<usize>> = (0..r).map(|i| vec![i]).collect();
    while !level.is_empty() && js.len() <= degrees {
        let mut row = Vec::new();
        let mut next = Vec::new();
        for j in &level {
            let rays: Vec<usize> = crate::fan::sorted(&j.iter().flat_map(|&i| comps[i].clone()).collect::<Vec<_>>());
            if let Some(g) = smallest_cone(fan, &rays) {
                row.push((j.clone(), g));
                for k in j.last().unwrap() + 1..r {
                    let mut t = j.clone();
                    t.push(k);
                    next.push(t);
                }
            }
        }
        js.push(row);
        level = next;
    }
    let engine = Engine::new(fan, &Sheaf::Line(d.clone()))?;
    let nerve = &engine.nerve;
    let w = direct.window.clone();
    let mut memo: HashMap<Vec<i8>, Vec<usize>> = HashMap::new();
    let mut totals = vec![0usize; degrees];
    for u in w.points() {
        let p = engine.pattern(&u);
        let dims = memo
            .entry(p.clone())
            .or_insert_with(|| {
                // Total complex: generators (k, s, q, j) with chart face tau_s containing gamma_j, u a
                // section of O(D) there, tight on gamma_j.
                let ok = |face: &[usize], gamma: &[usize]| {
                    is_subset(gamma, face)
                        && face.iter().all(|&x| p[x] >= 0)
                        && gamma.iter().all(|&x| p[x] == 0)
                };
                let mut gens: Vec<Vec<(usize, usize, usize, usize)>> = vec![Vec::new(); degrees + 1];
                for (k, level) in nerve.subsets.iter().enumerate() {
                    for (si, (_, fi)) in level.iter().enumerate() {
                        for (q, jl) in js.iter().enumerate() {
                            if k + q > degrees {
                                continue;
                            }
                            for (ji, (_, g)) in jl.iter().enumerate() {
                                if ok(&nerve.faces[*fi], g) {
                                    gens[k + q].push((k, si, q, ji));
                                }
                            }
                        }
                    }
                }
                let pos: Vec<HashMap<(usize, usize, usize, usize), usize>> =
                    gens.iter().map(|g| g.iter().enumerate().map(|(i, x)| (*x, i)).collect()).collect();
                let mut ranks = vec![0usize; degrees + 1];
                for t in 0..degrees {
                    let mut entries = Vec::new();
                    for (col, &(k, si, q, ji)) in gens[t].iter().enumerate() {
                        let s = &nerve.subsets[k][si].0;
                        for j in 0..nerve.max_index() {
                            if s.contains(&j) || k + 1 >= nerve.subsets.len() {
                                continue;
                            }
                            let p_ = s.iter().filter(|&&x| x < j).count();
                            let mut ss = s.clone();
                            ss.insert(p_, j);
                            if let Some(&ti) = nerve.index[k + 1].get(&ss) {
                                if let Some(&row) = pos[t + 1].get(&(k + 1, ti, q, ji)) {
                                    entries.push((row, col, if p_ % 2 == 0 { 1 } else { -1 }));
                                }
                            }
                        }
                        let jset = &js[q][ji].0;
                        if q + 1 < js.len() {
                            let sign0: i64 = if k % 2 == 0 { 1 } else { -1 };
                            for (tj, (jj, _)) in js[q + 1].iter().enumerate() {
                                if !is_subset(jset, jj) {
                                    continue;
                                }
                                let extra = jj.iter().position(|x| !jset.contains(x)).unwrap();
                                if let Some(&row) = pos[t + 1].get(&(k, si, q + 1, tj)) {
                                    let sgn = if extra % 2 == 0 { 1 } else { -1 };
                                    entries.push((row, col, sign0 * sgn));
                                }
                            }
                        }
                    }
                    ranks[t] = sparse_rank(gens[t + 1].len(), gens[t].len(), &entries);
                }
                (0..degrees).map(|t| gens[t].len() - ranks[t] - if t > 0 { ranks[t - 1] } else { 0 }).collect()
            })
            .clone();
        for (t, dd) in dims.iter().enumerate() {
            totals[t] += dd;
        }
    }
    Ok(MvCheck { resolution: totals, direct: direct.dims })
}

/// Vertex weights u_sigma with <u_sigma, e_rho> = -d_rho on sigma, for Cartier D.
fn vertex_weights(fan: &Fan, d: &InvariantDivisor) -> Result<Vec<LatticeVector>> {
    if !is_cartier(fan, d) {
        return Err(Error::NotCartier);
    }
    let sf = support_function(fan, d).ok_or(Error::NotCartier)?;
    Ok(sf.m.iter().map(|m| LatticeVector(m.0.iter().map(|x| x.to_integer()).collect())).collect())
}

/// Maximal cones sigma whose vertex weight is not a global section: the base locus is the union of V(sigma).
pub fn base_locus(fan: &Fan, d: &InvariantDivisor) -> Result<Vec<Vec<usize>>> {
    if !fan.is_complete() {
        return Err(Error::NotComplete);
    }
    let us = vertex_weights(fan, d)?;
    let mut out = Vec::new();
    for (c, u) in fan.maximal_cones().iter().zip(&us) {
        let ok = fan.rays().iter().zip(d.coeffs()).all(|(r, dr)| BigRational::from_integer(u.dot(r)) >= -dr.clone());
        if !ok {
            out.push(c.clone());
        }
    }
    Ok(out)
}

pub fn is_globally_generated(fan: &Fan, d: &InvariantDivisor) -> Result<bool> {
    Ok(base_locus(fan, d)?.is_empty())
}

/// Lattice points of P_D = {u : <u, e_rho> >= -d_rho}.
pub fn section_weights(fan: &Fan, d: &InvariantDivisor) -> Result<Vec<LatticeVector>> {
    let t = line_bundle_cohomology(fan, d)?;
    Ok(t.weights[0].iter().map(|(u, _)| u.clone()).collect())
}
