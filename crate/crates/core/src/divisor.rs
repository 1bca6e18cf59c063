//! Invariant divisors: rounding, support functions, discrepancies and pair classification.

use std::fmt;

use num::integer::lcm;
use num::{BigInt, BigRational, One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fan::{box_points, classify_cone, Fan, StarFan};
use crate::lattice::{
    dot, int_nullspace, rat_dot, smith_invariants, smith_normal_form, solve_exact, to_rat, LatticeVector,
    RationalVector,
};
use crate::polyhedral::Polyhedron;

/// A torus-invariant Q-divisor: one coefficient per ray of a fan.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct InvariantDivisor {
    coeffs: Vec<BigRational>,
}

impl InvariantDivisor {
    pub fn new(coeffs: Vec<BigRational>) -> Self {
        InvariantDivisor { coeffs }
    }

    pub fn zero(n: usize) -> Self {
        InvariantDivisor { coeffs: vec![BigRational::zero(); n] }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        InvariantDivisor { coeffs: coeffs.iter().map(|&c| BigRational::from_integer(c.into())).collect() }
    }

    /// Divisor on `fan` with the given coefficients on the listed rays and zero elsewhere.
    pub fn from_pairs(fan: &Fan, pairs: &[(LatticeVector, BigRational)]) -> Result<Self> {
        let mut d = Self::zero(fan.rays().len());
        for (v, c) in pairs {
            let i = fan.ray_index(v).ok_or_else(|| Error::Invalid(format!("{v} is not a ray")))?;
            d.coeffs[i] += c;
        }
        Ok(d)
    }

    /// The prime divisor D_rho.
    pub fn prime(fan: &Fan, ray: usize) -> Self {
        let mut d = Self::zero(fan.rays().len());
        d.coeffs[ray] = BigRational::one();
        d
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> &BigRational {
        &self.coeffs[i]
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn is_integral(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_integer())
    }

    pub fn add(&self, other: &Self) -> Self {
        InvariantDivisor { coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        InvariantDivisor { coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect() }
    }

    pub fn scale(&self, k: &BigRational) -> Self {
        InvariantDivisor { coeffs: self.coeffs.iter().map(|a| a * k).collect() }
    }

    pub fn map(&self, f: impl Fn(&BigRational) -> BigRational) -> Self {
        InvariantDivisor { coeffs: self.coeffs.iter().map(f).collect() }
    }

    pub fn round_up(&self) -> Self {
        self.map(|c| c.ceil())
    }

    pub fn round_down(&self) -> Self {
        self.map(|c| c.floor())
    }

    pub fn fractional_part(&self) -> Self {
        self.map(|c| c - c.floor())
    }

    fn keep(&self, f: impl Fn(&BigRational) -> bool) -> Self {
        self.map(|c| if f(c) { c.clone() } else { BigRational::zero() })
    }

    pub fn part_eq_one(&self) -> Self {
        self.keep(|c| c.is_one())
    }

    pub fn part_lt_one(&self) -> Self {
        self.keep(|c| *c < BigRational::one())
    }

    pub fn part_le_one(&self) -> Self {
        self.keep(|c| *c <= BigRational::one())
    }

    pub fn part_gt_one(&self) -> Self {
        self.keep(|c| *c > BigRational::one())
    }

    pub fn is_boundary(&self) -> bool {
        self.coeffs.iter().all(|c| !c.is_negative() && *c <= BigRational::one())
    }

    pub fn is_subboundary(&self) -> bool {
        self.coeffs.iter().all(|c| *c <= BigRational::one())
    }

    pub fn is_effective(&self) -> bool {
        self.coeffs.iter().all(|c| !c.is_negative())
    }

    pub fn rounding(&self) -> Rounding {
        Rounding {
            round_up: self.round_up(),
            round_down: self.round_down(),
            fractional: self.fractional_part(),
            eq_one: self.part_eq_one(),
            lt_one: self.part_lt_one(),
            le_one: self.part_le_one(),
            gt_one: self.part_gt_one(),
            is_boundary: self.is_boundary(),
            is_subboundary: self.is_subboundary(),
        }
    }
}

impl fmt::Display for InvariantDivisor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cs: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        write!(f, "[{}]", cs.join(", "))
    }
}

/// All outputs of the rounding calculus of a divisor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rounding {
    pub round_up: InvariantDivisor,
    pub round_down: InvariantDivisor,
    pub fractional: InvariantDivisor,
    pub eq_one: InvariantDivisor,
    pub lt_one: InvariantDivisor,
    pub le_one: InvariantDivisor,
    pub gt_one: InvariantDivisor,
    pub is_boundary: bool,
    pub is_subboundary: bool,
}

pub fn canonical_divisor(fan: &Fan) -> InvariantDivisor {
    InvariantDivisor { coeffs: vec![-BigRational::one(); fan.rays().len()] }
}

pub fn torus_boundary(fan: &Fan) -> InvariantDivisor {
    InvariantDivisor { coeffs: vec![BigRational::one(); fan.rays().len()] }
}

/// K_X + D.
pub fn log_canonical_divisor(fan: &Fan, boundary: &InvariantDivisor) -> InvariantDivisor {
    canonical_divisor(fan).add(boundary)
}

/// Principal divisor div(chi^m) = sum <m, e_rho> D_rho.
pub fn principal_divisor(fan: &Fan, m: &LatticeVector) -> InvariantDivisor {
    InvariantDivisor { coeffs: fan.rays().iter().map(|r| to_rat(&r.dot(m))).collect() }
}

/// Piecewise-linear data of a Q-Cartier divisor: <m_sigma, e_rho> = -d_rho on each maximal cone.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportFunction {
    pub m: Vec<RationalVector>,
    pub cartier_index: BigInt,
}

impl SupportFunction {
    /// Value at a point of the support.
    pub fn eval(&self, fan: &Fan, v: &LatticeVector) -> Result<BigRational> {
        let ci = fan.locate(v).ok_or_else(|| Error::OutsideSupport(v.to_string()))?;
        Ok(self.m[ci].dot_int(v))
    }

    pub fn eval_rational(&self, fan: &Fan, v: &RationalVector) -> Result<BigRational> {
        let ci = (0..fan.maximal_cones().len())
            .find(|&i| fan.maximal_poly(i).contains_rational(v))
            .ok_or_else(|| Error::OutsideSupport(v.to_string()))?;
        Ok(self.m[ci].dot(v))
    }
}

/// Minimal positive c with c*b in the integer column space of `rows`, or None if b is not in the rational span.
fn cartier_order(rows: &[Vec<BigInt>], b: &[BigRational]) -> Option<BigInt> {
    let den = b.iter().fold(BigInt::one(), |l, c| lcm(l, c.denom().clone()));
    let bi: Vec<BigInt> = b.iter().map(|c| (c * to_rat(&den)).to_integer()).collect();
    let (u, d, _) = smith_normal_form(rows);
    let cols = rows.first().map_or(0, |r| r.len());
    let mut order = BigInt::one();
    for (i, row) in u.iter().enumerate() {
        let y = dot(row, &bi);
        let di = if i < cols { d[i][i].clone() } else { BigInt::zero() };
        if di.is_zero() {
            if !y.is_zero() {
                return None;
            }
        } else {
            let g = num::integer::gcd(y, di.clone());
            order = lcm(order, &di / g);
        }
    }
    Some(order * den)
}

/// The support function of D, or None when D is not Q-Cartier.
pub fn support_function(fan: &Fan, d: &InvariantDivisor) -> Option<SupportFunction> {
    let mut ms = Vec::with_capacity(fan.maximal_cones().len());
    let mut index = BigInt::one();
    for c in fan.maximal_cones() {
        let rows: Vec<Vec<BigInt>> = c.iter().map(|&i| fan.ray(i).0.clone()).collect();
        let b: Vec<BigRational> = c.iter().map(|&i| -d.coeffs[i].clone()).collect();
        let a: Vec<Vec<BigRational>> = rows.iter().map(|r| r.iter().map(to_rat).collect()).collect();
        let m = solve_exact(&a, &b)?;
        index = lcm(index, cartier_order(&rows, &b)?);
        ms.push(RationalVector(m));
    }
    Some(SupportFunction { m: ms, cartier_index: index })
}

pub fn is_q_cartier(fan: &Fan, d: &InvariantDivisor) -> bool {
    support_function(fan, d).is_some()
}

pub fn is_cartier(fan: &Fan, d: &InvariantDivisor) -> bool {
    support_function(fan, d).is_some_and(|s| s.cartier_index.is_one())
}

/// Whether every Weil divisor on the fan is Q-Cartier.
pub fn is_q_factorial(fan: &Fan) -> bool {
    fan.is_simplicial()
}

/// Pullback of a Q-Cartier divisor along a refinement.
pub fn pullback(refinement: &Fan, base: &Fan, d: &InvariantDivisor) -> Result<InvariantDivisor> {
    if !refinement.refines(base) {
        return Err(Error::NotRefinement);
    }
    let sf = support_function(base, d).ok_or(Error::NotQCartier)?;
    let coeffs = refinement.rays().iter().map(|v| sf.eval(base, v).map(|x| -x)).collect::<Result<_>>()?;
    Ok(InvariantDivisor { coeffs })
}

/// psi = support function of K + Delta, normalised so psi(e_rho) = 1 - d_rho.
pub fn log_support_function(fan: &Fan, boundary: &InvariantDivisor) -> Result<SupportFunction> {
    support_function(fan, &log_canonical_divisor(fan, boundary)).ok_or(Error::NotQCartier)
}

/// a(v, X, Delta) = psi(v) - 1.
pub fn discrepancy(fan: &Fan, boundary: &InvariantDivisor, v: &LatticeVector) -> Result<BigRational> {
    let psi = log_support_function(fan, boundary)?;
    Ok(psi.eval(fan, v)? - BigRational::one())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    #[serde(rename = "not-R-Cartier")]
    NotRCartier,
    NotLc,
    Lc,
    Klt,
    Canonical,
    Terminal,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Verdict::NotRCartier => "not-R-Cartier",
            Verdict::NotLc => "not-lc",
            Verdict::Lc => "lc",
            Verdict::Klt => "klt",
            Verdict::Canonical => "canonical",
            Verdict::Terminal => "terminal",
        };
        f.write_str(s)
    }
}

/// Singularity classification of a toric pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairClassification {
    pub verdict: Verdict,
    pub terminal: bool,
    pub canonical: bool,
    pub klt: bool,
    pub lc: bool,
    /// lc, and every cone all of whose rays carry coefficient 1 is smooth.
    pub dlt: bool,
    /// Cartier index of K + Delta.
    pub index: Option<BigInt>,
    pub min_discrepancy: Option<BigRational>,
    /// Candidate exceptional points with their discrepancies, sorted by discrepancy.
    pub witnesses: Vec<(LatticeVector, BigRational)>,
}

/// Candidate non-ray primitive points on which the minimal discrepancy is attained.
pub fn discrepancy_candidates(fan: &Fan) -> Vec<LatticeVector> {
    let tri = fan.pulling_triangulation();
    let mut pts: Vec<LatticeVector> = Vec::new();
    for c in tri.maximal_cones() {
        let vs = tri.cone_vectors(c);
        for (_, p) in box_points(&vs) {
            if !p.is_zero() && p.is_primitive() {
                pts.push(p);
            }
        }
        for i in 0..vs.len() {
            for j in i + 1..vs.len() {
                pts.push(vs[i].add(&vs[j]).primitive().expect("distinct rays of a cone"));
            }
        }
    }
    pts.sort();
    pts.dedup();
    pts.retain(|p| fan.ray_index(p).is_none());
    pts
}

pub fn classify_pair(fan: &Fan, boundary: &InvariantDivisor) -> PairClassification {
    let Ok(psi) = log_support_function(fan, boundary) else {
        return PairClassification {
            verdict: Verdict::NotRCartier,
            terminal: false,
            canonical: false,
            klt: false,
            lc: false,
            dlt: false,
            index: None,
            min_discrepancy: None,
            witnesses: Vec::new(),
        };
    };
    let one = BigRational::one();
    let mut witnesses: Vec<(LatticeVector, BigRational)> = discrepancy_candidates(fan)
        .into_iter()
        .map(|p| {
            let a = psi.eval(fan, &p).expect("candidate in support") - &one;
            (p, a)
        })
        .collect();
    witnesses.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    let min = witnesses.first().map(|w| w.1.clone());
    let all = |f: &dyn Fn(&BigRational) -> bool| witnesses.iter().all(|w| f(&w.1));
    let coeffs = boundary.coeffs();
    let terminal = all(&|a| a.is_positive());
    let canonical = all(&|a| !a.is_negative());
    let klt = all(&|a| *a > -&one) && coeffs.iter().all(|d| *d < one);
    let lc = all(&|a| *a >= -&one) && coeffs.iter().all(|d| *d <= one);
    let dlt = lc
        && fan.cones().iter().filter(|c| !c.is_empty()).all(|c| {
            !c.iter().all(|&i| coeffs[i].is_one()) || classify_cone(&fan.cone_vectors(c)).is_smooth()
        });
    let verdict = if !lc {
        Verdict::NotLc
    } else if !klt {
        Verdict::Lc
    } else if terminal {
        Verdict::Terminal
    } else if canonical {
        Verdict::Canonical
    } else {
        Verdict::Klt
    };
    PairClassification {
        verdict,
        terminal,
        canonical,
        klt,
        lc,
        dlt,
        index: Some(psi.cartier_index),
        min_discrepancy: min,
        witnesses,
    }
}

/// Lattice index of the sublattice generated by the given vectors in its saturation.
pub fn lattice_index(vs: &[LatticeVector]) -> BigInt {
    let rows: Vec<Vec<BigInt>> = vs.iter().map(|v| v.0.clone()).collect();
    smith_invariants(&rows).iter().fold(BigInt::one(), |a, b| a * b)
}

/// Adjunction to the divisor D_rho, which must carry coefficient 1: the star fan and the different.
pub fn adjunction_restrict(
    fan: &Fan,
    boundary: &InvariantDivisor,
    ray: usize,
) -> Result<(StarFan, InvariantDivisor)> {
    if !boundary.coeff(ray).is_one() {
        return Err(Error::CoefficientNotOne(ray));
    }
    let psi = log_support_function(fan, boundary)?;
    let star = fan.star_fan(ray)?;
    let mut coeffs = Vec::with_capacity(star.fan.rays().len());
    for &parent in &star.origin {
        let ell = lattice_index(&[fan.ray(ray).clone(), fan.ray(parent).clone()]);
        let value = psi.eval(fan, fan.ray(parent))? / to_rat(&ell);
        coeffs.push(BigRational::one() - value);
    }
    Ok((star, InvariantDivisor { coeffs }))
}

/// Affine cone over (X, H) with the cone over Delta.
#[derive(Debug, Clone)]
pub struct AffineConePair {
    pub fan: Fan,
    pub boundary: InvariantDivisor,
    /// K_X + Delta ~ r H.
    pub r: BigRational,
}

pub fn affine_cone_pair(fan: &Fan, h: &InvariantDivisor, boundary: &InvariantDivisor) -> Result<AffineConePair> {
    if !h.is_integral() || !is_cartier(fan, h) {
        return Err(Error::NotCartier);
    }
    if !crate::mori::is_ample(fan, h)? {
        return Err(Error::NotAmple);
    }
    let n = fan.dim();
    // <m, e_rho> - r h_rho = 1 - d_rho
    let a: Vec<Vec<BigRational>> = fan
        .rays()
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let mut row: Vec<BigRational> = e.0.iter().map(to_rat).collect();
            row.push(-h.coeff(i).clone());
            row
        })
        .collect();
    let b: Vec<BigRational> = boundary.coeffs().iter().map(|d| BigRational::one() - d).collect();
    let sol = solve_exact(&a, &b).ok_or_else(|| Error::Invalid("K + Delta is not proportional to H".into()))?;
    let r = sol[n].clone();
    let rays: Vec<LatticeVector> = fan
        .rays()
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let mut c = e.0.clone();
            c.push(h.coeff(i).to_integer());
            LatticeVector(c)
        })
        .collect();
    let cone_fan = Fan::new(n + 1, rays.clone(), vec![(0..rays.len()).collect()])?;
    let mut coeffs = vec![BigRational::zero(); rays.len()];
    for (i, v) in rays.iter().enumerate() {
        let j = cone_fan.ray_index(&v.primitive()?).expect("ray survives");
        coeffs[j] = boundary.coeff(i).clone();
    }
    Ok(AffineConePair { fan: cone_fan, boundary: InvariantDivisor { coeffs }, r })
}

/// One real coefficient direction of a real divisor B(t) = base + sum t_k dir_k.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RealParameter {
    pub direction: Vec<BigRational>,
    /// The real parameter lies in the open interval (lo, hi).
    pub lo: BigRational,
    pub hi: BigRational,
    /// Known exact value, when the parameter happens to be rational.
    pub exact: Option<BigRational>,
}

/// An R-divisor presented as a rational base plus real multiples of rational directions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RealDivisor {
    pub base: Vec<BigRational>,
    pub params: Vec<RealParameter>,
}

impl RealDivisor {
    pub fn rational(d: &InvariantDivisor) -> Self {
        RealDivisor { base: d.coeffs().to_vec(), params: Vec::new() }
    }

    /// Each listed coefficient is an unknown real in its open interval.
    pub fn with_intervals(base: &InvariantDivisor, intervals: &[(usize, BigRational, BigRational)]) -> Self {
        let n = base.len();
        let mut b = base.coeffs().to_vec();
        let params = intervals
            .iter()
            .map(|(i, lo, hi)| {
                b[*i] = BigRational::zero();
                let mut dir = vec![BigRational::zero(); n];
                dir[*i] = BigRational::one();
                RealParameter { direction: dir, lo: lo.clone(), hi: hi.clone(), exact: None }
            })
            .collect();
        RealDivisor { base: b, params }
    }

    pub fn evaluate(&self, t: &[BigRational]) -> InvariantDivisor {
        let mut c = self.base.clone();
        for (p, tk) in self.params.iter().zip(t) {
            for (x, d) in c.iter_mut().zip(&p.direction) {
                *x += tk * d;
            }
        }
        InvariantDivisor::new(c)
    }

    /// Exact value when every parameter is known.
    pub fn exact_value(&self) -> Option<InvariantDivisor> {
        let t: Option<Vec<BigRational>> = self.params.iter().map(|p| p.exact.clone()).collect();
        t.map(|t| self.evaluate(&t))
    }
}

/// Linear equations C d = 0 cutting out the Q-Cartier divisors.
pub(crate) fn q_cartier_equations(fan: &Fan) -> Vec<Vec<BigRational>> {
    let nrays = fan.rays().len();
    let mut eqs = Vec::new();
    for c in fan.maximal_cones() {
        let cols: Vec<Vec<BigInt>> =
            (0..fan.dim()).map(|j| c.iter().map(|&i| fan.ray(i).0[j].clone()).collect()).collect();
        // Left kernel of the ray matrix: y with sum y_k e_{rho_k} = 0.
        for y in int_nullspace(&cols, c.len()) {
            let mut row = vec![BigRational::zero(); nrays];
            for (k, &i) in c.iter().enumerate() {
                row[i] = to_rat(&y.0[k]);
            }
            eqs.push(row);
        }
    }
    eqs
}

/// A rational divisor with the same support and rounding as a real one, Q-Cartier when it is R-Cartier.
pub fn rationalize_boundary(fan: &Fan, delta: &RealDivisor, epsilon: &BigRational) -> Result<InvariantDivisor> {
    if delta.params.is_empty() {
        return Ok(InvariantDivisor::new(delta.base.clone()));
    }
    let p = delta.params.len();
    let n = delta.base.len();
    // Rounding must be fixed on the whole box, and the box must be within the tolerance.
    for i in 0..n {
        let (lo, hi) = coefficient_range(delta, i);
        if lo != hi && has_integer_strictly_between(&lo, &hi) {
            return Err(Error::AmbiguousRounding(i));
        }
        if &hi - &lo > *epsilon {
            return Err(Error::Invalid(format!("coefficient {i} varies by more than the tolerance")));
        }
    }
    let mut ineqs: Vec<(Vec<BigRational>, BigRational)> = Vec::new();
    for (k, prm) in delta.params.iter().enumerate() {
        let mut e = vec![BigRational::zero(); p];
        e[k] = BigRational::one();
        ineqs.push((e.clone(), prm.lo.clone()));
        ineqs.push((e.iter().map(|x| -x).collect(), -prm.hi.clone()));
    }
    for row in q_cartier_equations(fan) {
        let lin: Vec<BigRational> = delta.params.iter().map(|prm| rat_dot(&row, &prm.direction)).collect();
        let constant = rat_dot(&row, &delta.base);
        ineqs.push((lin.clone(), -constant.clone()));
        ineqs.push((lin.iter().map(|x| -x).collect(), constant));
    }
    let poly = Polyhedron::new(p, ineqs);
    let v = poly.vrep();
    if v.vertices.is_empty() {
        return Err(Error::NotQCartier);
    }
    let count = BigRational::from_integer(BigInt::from(v.vertices.len()));
    let mut t = vec![BigRational::zero(); p];
    for vert in &v.vertices {
        for (x, y) in t.iter_mut().zip(&vert.0) {
            *x += y;
        }
    }
    for x in t.iter_mut() {
        *x /= &count;
    }
    for (tk, prm) in t.iter().zip(&delta.params) {
        if *tk <= prm.lo || *tk >= prm.hi {
            return Err(Error::NotQCartier);
        }
    }
    Ok(delta.evaluate(&t))
}

fn coefficient_range(delta: &RealDivisor, i: usize) -> (BigRational, BigRational) {
    let mut lo = delta.base[i].clone();
    let mut hi = delta.base[i].clone();
    for prm in &delta.params {
        let d = &prm.direction[i];
        let (a, b) = (&prm.lo * d, &prm.hi * d);
        if a <= b {
            lo += a;
            hi += b;
        } else {
            lo += b;
            hi += a;
        }
    }
    (lo, hi)
}

fn has_integer_strictly_between(lo: &BigRational, hi: &BigRational) -> bool {
    let next = lo.floor() + BigRational::one();
    next < *hi
}

/// An affine function c + sum a_k t_k of the real parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineReal {
    pub constant: BigRational,
    pub linear: Vec<BigRational>,
}

impl AffineReal {
    pub fn eval(&self, t: &[BigRational]) -> BigRational {
        &self.constant + rat_dot(&self.linear, t)
    }
}

/// K + B = sum r_i (K + B_i) with rational lc boundaries B_i and m(K + B_i) Cartier.
#[derive(Debug, Clone)]
pub struct ShokurovDecomposition {
    pub terms: Vec<(AffineReal, InvariantDivisor)>,
    pub m: BigInt,
}

pub fn shokurov_decompose(fan: &Fan, b: &RealDivisor) -> Result<ShokurovDecomposition> {
    let p = b.params.len();
    let lc_ok = |d: &InvariantDivisor| -> bool {
        d.is_subboundary() && classify_pair(fan, d).lc
    };
    if p == 0 {
        let d = InvariantDivisor::new(b.base.clone());
        if !lc_ok(&d) {
            return Err(Error::NotLogCanonical);
        }
        let m = log_support_function(fan, &d)?.cartier_index;
        return Ok(ShokurovDecomposition {
            terms: vec![(AffineReal { constant: BigRational::one(), linear: vec![] }, d)],
            m,
        });
    }
    let scale = BigRational::from_integer(BigInt::from(p));
    // Each parameter may be anchored at either end of its interval; try orientations until every vertex is lc.
    for mask in 0..(1u64 << p) {
        let mut corner = Vec::with_capacity(p);
        let mut steps = Vec::with_capacity(p);
        for (k, prm) in b.params.iter().enumerate() {
            let w = &prm.hi - &prm.lo;
            if mask >> k & 1 == 0 {
                corner.push(prm.lo.clone());
                steps.push(&scale * &w);
            } else {
                corner.push(prm.hi.clone());
                steps.push(-(&scale * &w));
            }
        }
        let mut vertices = vec![b.evaluate(&corner)];
        for k in 0..p {
            let mut t = corner.clone();
            t[k] += &steps[k];
            vertices.push(b.evaluate(&t));
        }
        if !vertices.iter().all(lc_ok) {
            continue;
        }
        // r_k = (t_k - c_k) / s_k, r_0 = 1 - sum r_k.
        let mut terms = Vec::with_capacity(p + 1);
        let mut r0 = AffineReal { constant: BigRational::one(), linear: vec![BigRational::zero(); p] };
        let mut rk = Vec::with_capacity(p);
        for k in 0..p {
            let mut lin = vec![BigRational::zero(); p];
            lin[k] = steps[k].recip();
            let r = AffineReal { constant: -(&corner[k] / &steps[k]), linear: lin };
            r0.constant -= &r.constant;
            for (x, y) in r0.linear.iter_mut().zip(&r.linear) {
                *x -= y;
            }
            rk.push(r);
        }
        terms.push((r0, vertices[0].clone()));
        for (k, r) in rk.into_iter().enumerate() {
            terms.push((r, vertices[k + 1].clone()));
        }
        let mut m = BigInt::one();
        for (_, v) in &terms {
            m = lcm(m, log_support_function(fan, v)?.cartier_index);
        }
        return Ok(ShokurovDecomposition { terms, m });
    }
    Err(Error::NotLogCanonical)
}

impl ShokurovDecomposition {
    /// Exact symbolic check that sum r_i = 1 and sum r_i B_i = B(t) as affine functions of t.
    pub fn verify(&self, b: &RealDivisor) -> bool {
        let p = b.params.len();
        let n = b.base.len();
        let mut total = AffineReal { constant: BigRational::zero(), linear: vec![BigRational::zero(); p] };
        let mut sum_const = vec![BigRational::zero(); n];
        let mut sum_lin = vec![vec![BigRational::zero(); p]; n];
        for (r, d) in &self.terms {
            total.constant += &r.constant;
            for k in 0..p {
                total.linear[k] += &r.linear[k];
            }
            for i in 0..n {
                sum_const[i] += &r.constant * d.coeff(i);
                for (k, x) in sum_lin[i].iter_mut().enumerate() {
                    *x += &r.linear[k] * d.coeff(i);
                }
            }
        }
        if !total.constant.is_one() || total.linear.iter().any(|x| !x.is_zero()) {
            return false;
        }
        (0..n).all(|i| sum_const[i] == b.base[i] && (0..p).all(|k| sum_lin[i][k] == b.params[k].direction[i]))
    }

    /// Whether each r_i is positive on the open parameter box (checked at the corners).
    pub fn coefficients_positive(&self, b: &RealDivisor) -> bool {
        let p = b.params.len();
        self.terms.iter().all(|(r, _)| {
            let mut any_positive = false;
            for mask in 0..(1u64 << p) {
                let t: Vec<BigRational> = (0..p)
                    .map(|k| if mask >> k & 1 == 0 { b.params[k].lo.clone() } else { b.params[k].hi.clone() })
                    .collect();
                let v = r.eval(&t);
                if v.is_negative() {
                    return false;
                }
                any_positive |= v.is_positive();
            }
            any_positive
        })
    }
}
