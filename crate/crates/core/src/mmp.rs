//! Extremal contractions, flips, the MMP driver and the log minimal / canonical model checks.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num::{BigInt, BigRational, One, Signed, Zero};
use serde::Serialize;

use crate::divisor::{classify_pair, is_q_factorial, log_canonical_divisor, log_support_function, support_function, InvariantDivisor};
use crate::error::{Error, Result};
use crate::fan::{box_points, build_cone, sorted, Fan, Wall};
use crate::lattice::{int_nullspace, smith_normal_form, LatticeVector};
use crate::mori::{
    is_ample_over, is_nef_over, negative_extremal_rays, numerical_spaces, relevant_walls, wall_pairing, ExtremalRay,
    MoriCone,
};
use crate::polyhedral::PolyCone;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ContractionKind {
    Fibration,
    Divisorial,
    Flipping,
}

impl ContractionKind {
    /// Type predicted by the number of negative coefficients in a wall relation.
    pub fn from_negatives(neg: usize) -> Self {
        match neg {
            0 => ContractionKind::Fibration,
            1 => ContractionKind::Divisorial,
            _ => ContractionKind::Flipping,
        }
    }
}

impl fmt::Display for ContractionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ContractionKind::Fibration => "fibration",
            ContractionKind::Divisorial => "divisorial",
            ContractionKind::Flipping => "flipping",
        })
    }
}

/// The contraction of an extremal ray.
#[derive(Debug, Clone)]
pub struct ContractionResult {
    pub kind: ContractionKind,
    pub ray: ExtremalRay,
    pub removed_walls: Vec<Wall>,
    /// Groups of source maximal cones glued across removed walls.
    pub groups: Vec<Vec<usize>>,
    /// Rays (source indices) of the cone each group glues to; empty for fibrations.
    pub merged: Vec<Vec<usize>>,
    /// Source rays that are not rays of the target.
    pub lost_rays: Vec<usize>,
    /// Target fan; for a fibration the quotient fan by the common lineality space.
    pub target: Fan,
    /// Sign signature (#positive, #negative) of the first removed wall with a circuit relation.
    pub signature: Option<(usize, usize)>,
    /// Whether every removed wall's relation predicts the computed type.
    pub trichotomy_consistent: Option<bool>,
}

impl ContractionResult {
    /// Groups of more than one cone: the cones the contraction actually changes.
    pub fn modified_groups(&self) -> impl Iterator<Item = (&Vec<usize>, &Vec<usize>)> {
        self.groups.iter().zip(&self.merged).filter(|(g, _)| g.len() > 1)
    }
}

/// Contracts a (K + Delta)-negative extremal ray of NE(X) or NE(X/base).
pub fn classify_and_contract(
    fan: &Fan,
    base: Option<&Fan>,
    boundary: &InvariantDivisor,
    ray: &ExtremalRay,
) -> Result<ContractionResult> {
    let (ne, negative) = negative_extremal_rays(fan, base, boundary)?;
    if !ne.extremal_rays.contains(ray) {
        return Err(Error::NotExtremal);
    }
    if !negative.contains(ray) {
        return Err(Error::NotNegative);
    }
    contract_ray(fan, &ne, ray)
}

fn find(parent: &mut [usize], x: usize) -> usize {
    let mut r = x;
    while parent[r] != r {
        r = parent[r];
    }
    parent[x] = r;
    r
}

/// Removes the walls of an extremal ray and glues the cones across them. No sign checks.
pub fn contract_ray(fan: &Fan, ne: &MoriCone, ray: &ExtremalRay) -> Result<ContractionResult> {
    let n = fan.dim();
    let removed_walls: Vec<Wall> = ray.walls.iter().map(|&i| ne.lattice.curves[i].wall.clone()).collect();
    let m = fan.maximal_cones().len();
    let mut parent: Vec<usize> = (0..m).collect();
    for w in &removed_walls {
        let (a, b) = (find(&mut parent, w.left), find(&mut parent, w.right.expect("interior wall")));
        parent[a.max(b)] = a.min(b);
    }
    let mut by_root: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..m {
        let r = find(&mut parent, i);
        by_root.entry(r).or_default().push(i);
    }
    let groups: Vec<Vec<usize>> = by_root.into_values().collect();
    let removed_keys: BTreeSet<Vec<usize>> = removed_walls.iter().map(|w| w.rays.clone()).collect();

    let mut merged = Vec::with_capacity(groups.len());
    let mut hulls = Vec::with_capacity(groups.len());
    let mut lost: BTreeSet<usize> = BTreeSet::new();
    let mut line = false;
    for g in &groups {
        let union: Vec<usize> = sorted(&g.iter().flat_map(|&c| fan.maximal_cones()[c].clone()).collect::<Vec<_>>());
        let hull = PolyCone::new(n, fan.cone_vectors(&union))?;
        if g.len() > 1 {
            for w in fan.walls() {
                if removed_keys.contains(&w.rays) {
                    continue;
                }
                let inside = |c: Option<usize>| c.is_some_and(|c| g.contains(&c));
                if inside(Some(w.left)) == inside(w.right) {
                    continue;
                }
                let p = fan.cone_vectors(&w.rays).iter().fold(LatticeVector::zero(n), |a, b| a.add(b));
                if hull.relint_contains(&p) {
                    return Err(Error::Invalid("cones glued across the ray do not form a convex cone".into()));
                }
            }
        }
        if !hull.is_strongly_convex() {
            line = true;
            merged.push(union);
        } else {
            let keep: Vec<usize> =
                (0..union.len()).filter(|&k| hull.is_extremal_generator(k)).map(|k| union[k]).collect();
            lost.extend(union.iter().copied().filter(|i| !keep.contains(i)));
            merged.push(keep);
        }
        hulls.push(hull);
    }

    let (kind, target) = if line {
        let lin = lineality(&hulls[groups.iter().position(|g| g.len() > 1).unwrap_or(0)], n);
        for h in &hulls {
            if lin.iter().any(|v| !h.contains(v) || !h.contains(&v.neg())) {
                return Err(Error::Invalid("fibre directions are not shared by all glued cones".into()));
            }
        }
        (ContractionKind::Fibration, quotient_fan(fan, &merged, &lin)?)
    } else {
        let keep: Vec<usize> = (0..fan.rays().len()).filter(|i| !lost.contains(i)).collect();
        let rays: Vec<LatticeVector> = keep.iter().map(|&i| fan.ray(i).clone()).collect();
        let cones: Vec<Vec<usize>> =
            merged.iter().map(|c| c.iter().map(|i| keep.binary_search(i).expect("kept ray")).collect()).collect();
        let target = Fan::new(n, rays, cones)?;
        let kind = if lost.is_empty() { ContractionKind::Flipping } else { ContractionKind::Divisorial };
        (kind, target)
    };

    let sigs: Vec<(usize, usize)> =
        ray.walls.iter().filter_map(|&i| ne.lattice.curves[i].relation_signature()).collect();
    let signature = sigs.first().copied();
    let trichotomy_consistent =
        (!sigs.is_empty()).then(|| sigs.iter().all(|s| ContractionKind::from_negatives(s.1) == kind));
    Ok(ContractionResult {
        kind,
        ray: ray.clone(),
        removed_walls,
        merged: if kind == ContractionKind::Fibration { vec![Vec::new(); groups.len()] } else { merged },
        groups,
        lost_rays: lost.into_iter().collect(),
        target,
        signature,
        trichotomy_consistent,
    })
}

/// Integer basis of the largest linear subspace of a cone.
fn lineality(p: &PolyCone, n: usize) -> Vec<LatticeVector> {
    let rows: Vec<Vec<BigInt>> = p.facet_normals().iter().chain(p.equations()).map(|v| v.0.clone()).collect();
    if rows.is_empty() {
        return (0..n).map(|i| LatticeVector::unit(n, i)).collect();
    }
    int_nullspace(&rows, n)
}

/// Images of cones in N / (N cap L).
fn quotient_fan(fan: &Fan, cones: &[Vec<usize>], lin: &[LatticeVector]) -> Result<Fan> {
    let n = fan.dim();
    let k = lin.len();
    if k == n {
        return Ok(Fan::point());
    }
    let rows: Vec<Vec<BigInt>> = lin.iter().map(|v| v.0.clone()).collect();
    let (_, _, v) = smith_normal_form(&rows);
    let project = |x: &LatticeVector| -> LatticeVector {
        LatticeVector((k..n).map(|j| (0..n).map(|i| &x.0[i] * &v[i][j]).sum()).collect())
    };
    let q = n - k;
    let mut rays: Vec<LatticeVector> = Vec::new();
    let mut images: Vec<Vec<LatticeVector>> = Vec::new();
    for c in cones {
        let imgs: Vec<LatticeVector> =
            fan.cone_vectors(c).iter().map(&project).filter(|x| !x.is_zero()).collect();
        if imgs.is_empty() {
            continue;
        }
        let cone = build_cone(q, &imgs)?;
        rays.extend(cone.rays().iter().cloned());
        images.push(cone.rays().to_vec());
    }
    rays.sort();
    rays.dedup();
    let idx = images.iter().map(|c| c.iter().map(|r| rays.binary_search(r).unwrap()).collect()).collect();
    Fan::new(q, rays, idx)
}

/// Cells of the regular subdivision of cone(rays) induced by heights psi: upper or lower envelope.
pub fn envelope_cells(fan: &Fan, rays: &[usize], psi: &[BigRational], upper: bool) -> Result<Vec<Vec<usize>>> {
    let n = fan.dim();
    let lifted: Vec<LatticeVector> = rays
        .iter()
        .map(|&r| {
            let h = &psi[r];
            let q = h.denom().clone();
            let mut x: Vec<BigInt> = fan.ray(r).0.iter().map(|c| c * &q).collect();
            x.push(h.numer().clone());
            LatticeVector(x)
        })
        .collect();
    let mut gens = lifted.clone();
    let mut vertical = vec![BigInt::zero(); n + 1];
    vertical[n] = if upper { -BigInt::one() } else { BigInt::one() };
    gens.push(LatticeVector(vertical));
    let p = PolyCone::new(n + 1, gens)?;
    if p.dim() != n + 1 {
        return Err(Error::Invalid("envelope of a cone that is not full-dimensional".into()));
    }
    let mut cells = Vec::new();
    for f in p.facet_normals() {
        let b = &f.0[n];
        if (upper && b.is_negative()) || (!upper && b.is_positive()) {
            let cell: Vec<usize> =
                rays.iter().zip(&lifted).filter(|(_, l)| f.dot(l).is_zero()).map(|(&r, _)| r).collect();
            cells.push(sorted(&cell));
        }
    }
    cells.sort();
    Ok(cells)
}

/// Values psi(e_rho) = 1 - d_rho of the support function of K + Delta.
fn psi_values(boundary: &InvariantDivisor) -> Vec<BigRational> {
    boundary.coeffs().iter().map(|d| BigRational::one() - d).collect()
}

/// Coefficients on `to` taken from the same rays of `from`; rays new to `to` get zero.
pub fn transfer(from: &Fan, d: &InvariantDivisor, to: &Fan) -> InvariantDivisor {
    InvariantDivisor::new(
        to.rays()
            .iter()
            .map(|r| from.ray_index(r).map_or_else(BigRational::zero, |i| d.coeff(i).clone()))
            .collect(),
    )
}

/// Ray vectors spanning a wall, for comparing walls across fans.
pub fn wall_vectors(fan: &Fan, wall: &Wall) -> Vec<LatticeVector> {
    fan.cone_vectors(&wall.rays)
}

#[derive(Debug, Clone)]
pub struct FlipResult {
    pub fan: Fan,
    pub boundary: InvariantDivisor,
    /// Removed walls with their (K + Delta)-pairings on X (negative).
    pub removed_walls: Vec<(Vec<LatticeVector>, BigRational)>,
    /// Added walls with their (K+ + Delta+)-pairings on X+ (positive).
    pub added_walls: Vec<(Vec<LatticeVector>, BigRational)>,
}

/// The (K + Delta)-flip of a flipping contraction: the upper-envelope subdivision of each glued cone.
pub fn flip(fan: &Fan, boundary: &InvariantDivisor, c: &ContractionResult) -> Result<FlipResult> {
    if c.kind != ContractionKind::Flipping {
        return Err(Error::NotFlipping);
    }
    let sf = log_support_function(fan, boundary)?;
    let psi = psi_values(boundary);
    let mut cones: Vec<Vec<usize>> = Vec::new();
    for (g, m) in c.groups.iter().zip(&c.merged) {
        if g.len() == 1 {
            cones.push(fan.maximal_cones()[g[0]].clone());
            continue;
        }
        let lower = envelope_cells(fan, m, &psi, false)?;
        let source: Vec<Vec<usize>> = {
            let mut s: Vec<Vec<usize>> = g.iter().map(|&i| fan.maximal_cones()[i].clone()).collect();
            s.sort();
            s
        };
        if lower != source {
            return Err(Error::NoAmpleChamber("K + Delta is not anti-ample over the contraction".into()));
        }
        let upper = envelope_cells(fan, m, &psi, true)?;
        if upper.len() < 2 {
            return Err(Error::NoAmpleChamber("K + Delta is trivial over the contraction".into()));
        }
        cones.extend(upper);
    }
    let used: BTreeSet<usize> = cones.iter().flatten().copied().collect();
    if used.len() != fan.rays().len() {
        return Err(Error::NoAmpleChamber("the ample model contracts a divisor".into()));
    }
    let plus = Fan::new(fan.dim(), fan.rays().to_vec(), cones)?;
    let boundary_plus = transfer(fan, boundary, &plus);
    let sf_plus = log_support_function(&plus, &boundary_plus)?;
    let old: BTreeSet<Vec<usize>> = fan.interior_walls().into_iter().map(|w| w.rays).collect();
    let new: BTreeSet<Vec<usize>> = plus.interior_walls().into_iter().map(|w| w.rays).collect();
    let mut removed_walls = Vec::new();
    for w in fan.interior_walls().into_iter().filter(|w| !new.contains(&w.rays)) {
        let p = wall_pairing(fan, &w, &sf);
        if !p.is_negative() {
            return Err(Error::NoAmpleChamber(format!("removed wall with (K+Delta).C = {p}")));
        }
        removed_walls.push((wall_vectors(fan, &w), p));
    }
    let mut added_walls = Vec::new();
    for w in plus.interior_walls().into_iter().filter(|w| !old.contains(&w.rays)) {
        let p = wall_pairing(&plus, &w, &sf_plus);
        if !p.is_positive() {
            return Err(Error::NoAmpleChamber(format!("added wall with (K+Delta).C = {p}")));
        }
        added_walls.push((wall_vectors(&plus, &w), p));
    }
    Ok(FlipResult { fan: plus, boundary: boundary_plus, removed_walls, added_walls })
}

/// Exchanges a wall whose curve is (K + Delta)-trivial; the neighbours must form a circuit.
pub fn flop(fan: &Fan, boundary: &InvariantDivisor, wall: &Wall) -> Result<Fan> {
    let kd = log_canonical_divisor(fan, boundary);
    let sf = support_function(fan, &kd).ok_or(Error::NotQCartier)?;
    let p = wall_pairing(fan, wall, &sf);
    if !p.is_zero() {
        return Err(Error::Invalid(format!("wall is not (K+Delta)-trivial: pairing {p}")));
    }
    fan.exchange_wall(wall)
}

/// a(v, X, Delta) before and after a step, at a primitive point of the modified region.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscrepancyCertificate {
    pub point: LatticeVector,
    pub before: BigRational,
    pub after: BigRational,
    /// The point lies over the flipped locus, so the inequality must be strict.
    pub strict: bool,
}

impl DiscrepancyCertificate {
    pub fn holds(&self) -> bool {
        if self.strict {
            self.before < self.after
        } else {
            self.before <= self.after
        }
    }
}

/// Discrepancy comparison on sums of up to three rays and box points of the modified cones.
pub fn flip_certificates(
    x: &Fan,
    dx: &InvariantDivisor,
    xp: &Fan,
    dxp: &InvariantDivisor,
    region: &[Vec<usize>],
) -> Result<Vec<DiscrepancyCertificate>> {
    let psi = log_support_function(x, dx)?;
    let psi_p = log_support_function(xp, dxp)?;
    let mut pts: BTreeSet<LatticeVector> = BTreeSet::new();
    for m in region {
        let vs = x.cone_vectors(m);
        for i in 0..vs.len() {
            pts.insert(vs[i].clone());
            for j in i + 1..vs.len() {
                pts.insert(vs[i].add(&vs[j]).primitive()?);
                for k in j + 1..vs.len() {
                    pts.insert(vs[i].add(&vs[j]).add(&vs[k]).primitive()?);
                }
            }
        }
        for f in [x, xp] {
            for c in f.maximal_cones() {
                let cv = f.cone_vectors(c);
                if cv.len() == f.dim() && cv.iter().all(|r| vs.contains(r)) {
                    pts.extend(box_points(&cv).into_iter().map(|(_, p)| p).filter(|p| !p.is_zero() && p.is_primitive()));
                }
            }
        }
    }
    let plus_cones: BTreeSet<Vec<LatticeVector>> = xp.cones().iter().map(|c| xp.cone_vectors(c)).collect();
    let one = BigRational::one();
    let mut out = Vec::new();
    for p in pts {
        let before = psi.eval(x, &p)? - &one;
        let after = psi_p.eval(xp, &p)? - &one;
        let tau = x.minimal_cone(&p).ok_or_else(|| Error::OutsideSupport(p.to_string()))?;
        let strict = !plus_cones.contains(&x.cone_vectors(&tau));
        out.push(DiscrepancyCertificate { point: p, before, after, strict });
    }
    Ok(out)
}

/// How a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MmpOutcome {
    MinimalModel,
    MoriFiberSpace,
}

#[derive(Debug, Clone)]
pub struct MmpStep {
    pub fan_before: Fan,
    pub boundary_before: InvariantDivisor,
    pub ray: ExtremalRay,
    pub kind: ContractionKind,
    pub removed_walls: Vec<Vec<LatticeVector>>,
    pub added_walls: Vec<Vec<LatticeVector>>,
    /// X_{i+1} (the flipped fan, divisorial target, or fibration base).
    pub fan_after: Fan,
    pub boundary_after: InvariantDivisor,
    pub rho_before: usize,
    /// Absent for fibrations over a base fan.
    pub rho_after: Option<usize>,
    pub q_factorial_before: bool,
    pub q_factorial_after: bool,
    pub signature: Option<(usize, usize)>,
    pub trichotomy_consistent: Option<bool>,
    /// (rho, number of (K+Delta)-negative walls) before and after.
    pub measure_before: (usize, usize),
    pub measure_after: Option<(usize, usize)>,
    pub certificates: Vec<DiscrepancyCertificate>,
}

impl MmpStep {
    pub fn measure_decreased(&self) -> Option<bool> {
        self.measure_after.map(|a| a < self.measure_before)
    }

    pub fn certificates_hold(&self) -> bool {
        self.certificates.iter().all(|c| c.holds())
    }
}

#[derive(Debug, Clone)]
pub struct MmpTrace {
    pub steps: Vec<MmpStep>,
    pub outcome: MmpOutcome,
    /// The last X_i: the minimal model, or the total space of the Mori fibre space.
    pub fan: Fan,
    pub boundary: InvariantDivisor,
}

impl MmpTrace {
    pub fn count(&self, kind: ContractionKind) -> usize {
        self.steps.iter().filter(|s| s.kind == kind).count()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct MmpOptions {
    pub step_cap: usize,
}

impl Default for MmpOptions {
    fn default() -> Self {
        MmpOptions { step_cap: 10_000 }
    }
}

fn measure(fan: &Fan, base: Option<&Fan>, boundary: &InvariantDivisor, rho: usize) -> Result<(usize, usize)> {
    let sf = log_support_function(fan, boundary)?;
    let neg = relevant_walls(fan, base)?.iter().filter(|w| wall_pairing(fan, w, &sf).is_negative()).count();
    Ok((rho, neg))
}

/// Runs the (K + Delta)-MMP, over `base` when given.
pub fn run_mmp(fan: &Fan, boundary: &InvariantDivisor, base: Option<&Fan>, opts: MmpOptions) -> Result<MmpTrace> {
    if boundary.len() != fan.rays().len() {
        return Err(Error::CoefficientCount { expected: fan.rays().len(), found: boundary.len() });
    }
    if !classify_pair(fan, boundary).lc {
        return Err(Error::NotLogCanonical);
    }
    let mut x = fan.clone();
    let mut d = boundary.clone();
    let mut steps = Vec::new();
    loop {
        if steps.len() >= opts.step_cap {
            return Err(Error::StepCapExceeded(opts.step_cap));
        }
        let (ne, negative) = negative_extremal_rays(&x, base, &d)?;
        if !ne.is_pointed {
            return Err(Error::MoriConeNotPointed);
        }
        let Some(ray) = negative.first().cloned() else {
            log::info!("minimal model after {} steps", steps.len());
            return Ok(MmpTrace { steps, outcome: MmpOutcome::MinimalModel, fan: x, boundary: d });
        };
        let rho = ne.lattice.rho;
        let measure_before = measure(&x, base, &d, rho)?;
        let c = contract_ray(&x, &ne, &ray)?;
        log::info!("step {}: {} contraction, ray {:?}", steps.len() + 1, c.kind, ray.generator);
        let mut step = MmpStep {
            fan_before: x.clone(),
            boundary_before: d.clone(),
            ray: ray.clone(),
            kind: c.kind,
            removed_walls: c.removed_walls.iter().map(|w| wall_vectors(&x, w)).collect(),
            added_walls: Vec::new(),
            fan_after: c.target.clone(),
            boundary_after: InvariantDivisor::zero(c.target.rays().len()),
            rho_before: rho,
            rho_after: None,
            q_factorial_before: is_q_factorial(&x),
            q_factorial_after: is_q_factorial(&c.target),
            signature: c.signature,
            trichotomy_consistent: c.trichotomy_consistent,
            measure_before,
            measure_after: None,
            certificates: Vec::new(),
        };
        match c.kind {
            ContractionKind::Fibration => {
                if base.is_none() && c.target.is_complete() {
                    step.rho_after = Some(numerical_spaces(&c.target, None)?.rho);
                } else if base.is_none() && c.target.dim() == 0 {
                    step.rho_after = Some(0);
                }
                steps.push(step);
                return Ok(MmpTrace { steps, outcome: MmpOutcome::MoriFiberSpace, fan: x, boundary: d });
            }
            ContractionKind::Divisorial => {
                let y = c.target.clone();
                let dy = transfer(&x, &d, &y);
                let region: Vec<Vec<usize>> = c.modified_groups().map(|(_, m)| m.clone()).collect();
                step.certificates = divisorial_certificates(&x, &d, &y, &dy, &region)?;
                let rho_y = numerical_spaces(&y, base)?.rho;
                step.rho_after = Some(rho_y);
                step.boundary_after = dy.clone();
                step.measure_after = Some(measure(&y, base, &dy, rho_y)?);
                x = y;
                d = dy;
            }
            ContractionKind::Flipping => {
                let f = flip(&x, &d, &c)?;
                let region: Vec<Vec<usize>> = c.modified_groups().map(|(_, m)| m.clone()).collect();
                step.certificates = flip_certificates(&x, &d, &f.fan, &f.boundary, &region)?;
                step.removed_walls = f.removed_walls.iter().map(|w| w.0.clone()).collect();
                step.added_walls = f.added_walls.iter().map(|w| w.0.clone()).collect();
                let rho_p = numerical_spaces(&f.fan, base)?.rho;
                step.rho_after = Some(rho_p);
                step.q_factorial_after = is_q_factorial(&f.fan);
                step.fan_after = f.fan.clone();
                step.boundary_after = f.boundary.clone();
                step.measure_after = Some(measure(&f.fan, base, &f.boundary, rho_p)?);
                x = f.fan;
                d = f.boundary;
            }
        }
        steps.push(step);
    }
}

/// For a divisorial contraction X -> Y: a(E, X, Delta) < a(E, Y, Delta_Y) on the lost rays, <= elsewhere.
fn divisorial_certificates(
    x: &Fan,
    dx: &InvariantDivisor,
    y: &Fan,
    dy: &InvariantDivisor,
    region: &[Vec<usize>],
) -> Result<Vec<DiscrepancyCertificate>> {
    let psi_y = match log_support_function(y, dy) {
        Ok(p) => p,
        // K_Y + Delta_Y need not be Q-Cartier after a divisorial contraction of a non-Q-factorial X.
        Err(Error::NotQCartier) => return Ok(Vec::new()),
        Err(e) => return Err(e),
    };
    let psi = log_support_function(x, dx)?;
    let one = BigRational::one();
    let mut rays: BTreeSet<usize> = region.iter().flatten().copied().collect();
    rays.extend((0..x.rays().len()).filter(|&i| y.ray_index(x.ray(i)).is_none()));
    let mut out = Vec::new();
    for r in rays {
        let p = x.ray(r).clone();
        let before = psi.eval(x, &p)? - &one;
        let after = psi_y.eval(y, &p)? - &one;
        out.push(DiscrepancyCertificate { strict: y.ray_index(&p).is_none(), point: p, before, after });
    }
    Ok(out)
}

/// One numbered condition of a model check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Condition {
    pub number: u8,
    pub name: &'static str,
    pub holds: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct ModelReport {
    pub conditions: Vec<Condition>,
}

impl ModelReport {
    pub fn holds(&self) -> bool {
        self.conditions.iter().all(|c| c.holds)
    }

    pub fn condition(&self, number: u8) -> Option<&Condition> {
        self.conditions.iter().find(|c| c.number == number)
    }
}

fn check_model(
    x: &Fan,
    dx: &InvariantDivisor,
    xp: &Fan,
    dxp: &InvariantDivisor,
    base: Option<&Fan>,
    canonical: bool,
) -> Result<ModelReport> {
    let refinement = x.common_refinement(xp).map_err(|_| Error::NotBirational)?;
    if !refinement.refines(x) || !refinement.refines(xp) {
        return Err(Error::NotBirational);
    }
    let mut conditions = Vec::new();
    let over_base = base.is_none_or(|b| x.refines(b) && xp.refines(b));
    conditions.push(Condition {
        number: 1,
        name: "birational over the base",
        holds: over_base,
        detail: format!("common refinement with {} rays", refinement.rays().len()),
    });
    let extra: Vec<String> = xp.rays().iter().filter(|r| x.ray_index(r).is_none()).map(|r| r.to_string()).collect();
    conditions.push(Condition {
        number: 2,
        name: "no exceptional divisors of the inverse map",
        holds: extra.is_empty(),
        detail: if extra.is_empty() { "none".into() } else { extra.join(" ") },
    });
    let strict = transfer(x, dx, xp);
    conditions.push(Condition {
        number: 3,
        name: "boundary is the strict transform",
        holds: strict == *dxp && extra.is_empty(),
        detail: String::new(),
    });
    let kd = log_canonical_divisor(xp, dxp);
    let positivity = if canonical { is_ample_over(xp, base, &kd) } else { is_nef_over(xp, base, &kd) };
    let (pos_holds, pos_detail) = match positivity {
        Ok(b) => (b, String::new()),
        Err(e) => (false, e.to_string()),
    };
    conditions.push(Condition {
        number: 4,
        name: if canonical { "K' + Delta' ample over the base" } else { "K' + Delta' nef over the base" },
        holds: pos_holds,
        detail: pos_detail,
    });
    let one = BigRational::one();
    let mut bad = Vec::new();
    let mut checked = 0;
    match log_support_function(xp, dxp) {
        Ok(psi_p) => {
            for (i, r) in x.rays().iter().enumerate() {
                if xp.ray_index(r).is_some() {
                    continue;
                }
                checked += 1;
                let a = -dx.coeff(i).clone();
                let ap = psi_p.eval(xp, r)? - &one;
                let ok = if canonical { a <= ap } else { a < ap };
                if !ok {
                    bad.push(format!("{r}: {a} vs {ap}"));
                }
            }
        }
        Err(e) => bad.push(e.to_string()),
    }
    conditions.push(Condition {
        number: 5,
        name: "discrepancies of exceptional divisors",
        holds: bad.is_empty(),
        detail: if bad.is_empty() { format!("{checked} exceptional divisors") } else { bad.join("; ") },
    });
    Ok(ModelReport { conditions })
}

/// Whether (X', Delta') is a log minimal model of (X, Delta) over the base.
pub fn check_log_minimal_model(
    x: &Fan,
    dx: &InvariantDivisor,
    xp: &Fan,
    dxp: &InvariantDivisor,
    base: Option<&Fan>,
) -> Result<ModelReport> {
    check_model(x, dx, xp, dxp, base, false)
}

/// Whether (X', Delta') is the log canonical model of (X, Delta) over the base.
pub fn check_log_canonical_model(
    x: &Fan,
    dx: &InvariantDivisor,
    xp: &Fan,
    dxp: &InvariantDivisor,
    base: Option<&Fan>,
) -> Result<ModelReport> {
    check_model(x, dx, xp, dxp, base, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::*;

    fn first_negative(f: &Fan, base: Option<&Fan>, d: &InvariantDivisor) -> ExtremalRay {
        negative_extremal_rays(f, base, d).unwrap().1.remove(0)
    }

    #[test]
    fn plane_is_a_mori_fibre_space() {
        let p = projective_plane();
        let t = run_mmp(&p, &InvariantDivisor::zero(3), None, MmpOptions::default()).unwrap();
        assert_eq!(t.outcome, MmpOutcome::MoriFiberSpace);
        assert_eq!(t.steps.len(), 1);
        assert_eq!(t.steps[0].fan_after.dim(), 0);
        assert_eq!(t.steps[0].trichotomy_consistent, Some(true));
    }

    #[test]
    fn blow_up_contracts_divisorially() {
        let x = projective_plane().star_subdivision(&LatticeVector::from_i64(&[1, 1])).unwrap();
        let d = InvariantDivisor::zero(4);
        let (_, rays) = negative_extremal_rays(&x, None, &d).unwrap();
        let e = x.ray_index(&LatticeVector::from_i64(&[1, 1])).unwrap();
        let ray = rays
            .iter()
            .find(|r| {
                let ne = crate::mori::mori_cone(&x, None).unwrap();
                ne.lattice.curves[r.walls[0]].wall.rays == vec![e]
            })
            .unwrap();
        let c = classify_and_contract(&x, None, &d, ray).unwrap();
        assert_eq!(c.kind, ContractionKind::Divisorial);
        assert!(c.target.is_isomorphic(&projective_plane()));
        assert_eq!(c.signature, Some((2, 1)));
        let rep = check_log_minimal_model(&x, &d, &c.target, &InvariantDivisor::zero(3), Some(&c.target)).unwrap();
        assert!(rep.condition(5).unwrap().holds);
    }

    #[test]
    fn francia_flip() {
        let x2 = francia_x2();
        let d = InvariantDivisor::zero(5);
        let ray = first_negative(&x2, None, &d);
        let c = classify_and_contract(&x2, None, &d, &ray).unwrap();
        assert_eq!(c.kind, ContractionKind::Flipping);
        assert_eq!(c.target, francia_x3());
        let f = flip(&x2, &d, &c).unwrap();
        assert_eq!(f.fan, francia_x4());
        let t = run_mmp(&x2, &d, None, MmpOptions::default()).unwrap();
        assert_eq!(t.count(ContractionKind::Flipping), 1);
        assert_eq!(t.outcome, MmpOutcome::MoriFiberSpace);
        assert!(t.steps.iter().all(|s| s.certificates_hold()));
        let rep = check_log_minimal_model(&x2, &d, &francia_x4(), &d, Some(&francia_x3())).unwrap();
        assert!(rep.holds(), "{:?}", rep.conditions);
    }

    #[test]
    fn logflip_over_its_base() {
        let x = logflip_x();
        let y = logflip_y();
        let d = logflip_boundary(&x);
        let ray = first_negative(&x, Some(&y), &d);
        let c = classify_and_contract(&x, Some(&y), &d, &ray).unwrap();
        assert_eq!(c.kind, ContractionKind::Flipping);
        assert_eq!(c.signature, Some((2, 2)));
        let f = flip(&x, &d, &c).unwrap();
        assert_eq!(f.fan, logflip_x_plus());
        let rep = check_log_canonical_model(&x, &d, &f.fan, &f.boundary, Some(&y)).unwrap();
        assert!(rep.holds(), "{:?}", rep.conditions);
    }

    #[test]
    fn nonqfactorial_flip() {
        for n in 2..=3 {
            let x = nonqfact_x(n).unwrap();
            let w = nonqfact_w(n).unwrap();
            let d = InvariantDivisor::zero(n + 3);
            let t = run_mmp(&x, &d, Some(&w), MmpOptions::default()).unwrap();
            assert_eq!(t.steps.len(), 1);
            assert_eq!(t.steps[0].kind, ContractionKind::Flipping);
            assert_eq!(t.fan, nonqfact_x_plus(n).unwrap());
            assert_eq!(t.steps[0].rho_before, 1);
            assert_eq!(t.steps[0].rho_after, Some(n));
        }
    }

    #[test]
    fn flip_of_flip_returns() {
        let x = logflip_x();
        let d = logflip_boundary(&x);
        let psi = psi_values(&d);
        let all: Vec<usize> = (0..4).collect();
        let up = envelope_cells(&x, &all, &psi, true).unwrap();
        let neg: Vec<BigRational> = psi.iter().map(|p| -p).collect();
        let back = envelope_cells(&x, &all, &neg, true).unwrap();
        assert_eq!(back, x.maximal_cones().to_vec());
        assert_eq!(up, logflip_x_plus().maximal_cones().to_vec());
    }

    #[test]
    fn flop_loses_projectivity() {
        let y = fp_y();
        let a = ray(&y, &FP_RAYS[0]);
        let b = ray(&y, &FP_RAYS[4]);
        let w = y.interior_walls().into_iter().find(|w| w.rays == sorted(&[a, b])).unwrap();
        let d = InvariantDivisor::zero(y.rays().len());
        let x = flop(&y, &d, &w).unwrap();
        assert_eq!(x, fp_x().unwrap());
        assert!(!crate::mori::is_projective(&x).unwrap().projective);
    }

    #[test]
    fn identity_is_minimal_when_nef() {
        let f = hirzebruch(0);
        let d = crate::divisor::torus_boundary(&f);
        let rep = check_log_minimal_model(&f, &d, &f, &d, None).unwrap();
        assert!(rep.holds());
        let p = projective_plane();
        let z = InvariantDivisor::zero(3);
        let rep = check_log_canonical_model(&p, &z, &p, &z, None).unwrap();
        assert!(!rep.condition(4).unwrap().holds);
    }
}
