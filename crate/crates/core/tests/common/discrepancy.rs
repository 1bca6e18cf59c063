//! Brute-force discrepancies: enumerate every primitive lattice point of a box, locate it in a
//! simplicial subcone of some maximal cone, and evaluate the log support function there.

use num::integer::gcd;
use num::rational::Rational64;
use num::{One, Signed, ToPrimitive, Zero};

use toricmmp::divisor::InvariantDivisor;
use toricmmp::fan::Fan;

type Q = Rational64;

/// Solve A x = b (A is rows x cols); a particular solution with free variables zero.
fn solve(a: &[Vec<Q>], b: &[Q]) -> Option<Vec<Q>> {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut m: Vec<Vec<Q>> = a.iter().zip(b).map(|(r, x)| r.iter().cloned().chain([*x]).collect()).collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x *= inv;
        }
        let pivot = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c];
                for (x, p) in row.iter_mut().zip(&pivot) {
                    *x -= f * p;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    if m[r..].iter().any(|row| !row[cols].is_zero()) {
        return None;
    }
    let mut x = vec![Q::zero(); cols];
    for (i, &c) in pivots.iter().enumerate() {
        x[c] = m[i][cols];
    }
    Some(x)
}

fn rank(vs: &[Vec<i64>]) -> usize {
    let mut m: Vec<Vec<Q>> = vs.iter().map(|v| v.iter().map(|&x| Q::from(x)).collect()).collect();
    let cols = m.first().map_or(0, |r| r.len());
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let pivot = m[r].clone();
        for row in m.iter_mut().skip(r + 1) {
            let f = row[c] / pivot[c];
            for (x, p) in row.iter_mut().zip(&pivot).skip(c) {
                *x -= f * p;
            }
        }
        r += 1;
    }
    r
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    if n < k {
        return Vec::new();
    }
    let mut out = subsets(n - 1, k);
    for mut s in subsets(n - 1, k - 1) {
        s.push(n - 1);
        out.push(s);
    }
    out
}

struct Piece {
    rays: Vec<Vec<i64>>,
    values: Vec<Q>,
}

fn to_i64(v: &toricmmp::lattice::LatticeVector) -> Vec<i64> {
    v.0.iter().map(|x| x.to_i64().unwrap()).collect()
}

/// psi of K + Delta, normalised by psi(e_rho) = 1 - d_rho, evaluated through simplicial pieces of
/// the maximal cones. None when K + Delta is not Q-Cartier.
pub struct LogSupport {
    pieces: Vec<Piece>,
    /// max over maximal cones of the sum of |e|_inf of their rays.
    pub radius: i64,
    pub coeffs: Vec<Q>,
}

impl LogSupport {
    pub fn new(fan: &Fan, boundary: &InvariantDivisor) -> Option<Self> {
        let rays: Vec<Vec<i64>> = fan.rays().iter().map(to_i64).collect();
        let d: Vec<Q> = boundary
            .coeffs()
            .iter()
            .map(|c| Q::new(c.numer().to_i64().unwrap(), c.denom().to_i64().unwrap()))
            .collect();
        let mut pieces = Vec::new();
        let mut radius = 0;
        for cone in fan.maximal_cones() {
            let vs: Vec<Vec<i64>> = cone.iter().map(|&i| rays[i].clone()).collect();
            radius = radius.max(vs.iter().map(|v| v.iter().map(|x| x.abs()).max().unwrap_or(0)).sum::<i64>());
            let a: Vec<Vec<Q>> = vs.iter().map(|v| v.iter().map(|&x| Q::from(x)).collect()).collect();
            let b: Vec<Q> = cone.iter().map(|&i| Q::one() - d[i]).collect();
            solve(&a, &b)?;
            let r = rank(&vs);
            for s in subsets(vs.len(), r) {
                let sub: Vec<Vec<i64>> = s.iter().map(|&j| vs[j].clone()).collect();
                if rank(&sub) == r {
                    pieces.push(Piece { rays: sub, values: s.iter().map(|&j| b[j]).collect() });
                }
            }
        }
        Some(LogSupport { pieces, radius, coeffs: d })
    }

    pub fn eval(&self, v: &[i64]) -> Option<Q> {
        let n = v.len();
        for p in &self.pieces {
            let a: Vec<Vec<Q>> = (0..n).map(|i| p.rays.iter().map(|r| Q::from(r[i])).collect()).collect();
            let b: Vec<Q> = v.iter().map(|&x| Q::from(x)).collect();
            if let Some(l) = solve(&a, &b) {
                if l.iter().all(|x| !x.is_negative()) {
                    return Some(l.iter().zip(&p.values).map(|(x, y)| x * y).sum());
                }
            }
        }
        None
    }
}

pub struct BruteForce {
    pub min_discrepancy: Option<Q>,
    pub points: usize,
    pub verdict: &'static str,
}

fn verdict(min: Option<Q>, d: &[Q]) -> &'static str {
    let one = Q::one();
    let lc = min.is_none_or(|m| m >= -one) && d.iter().all(|x| *x <= one);
    let klt = min.is_none_or(|m| m > -one) && d.iter().all(|x| *x < one);
    if !lc {
        "not-lc"
    } else if !klt {
        "lc"
    } else if min.is_none_or(|m| m.is_positive()) {
        "terminal"
    } else if min.is_none_or(|m| !m.is_negative()) {
        "canonical"
    } else {
        "klt"
    }
}

/// Verdict of (X, Delta) by exhaustive search over the box of radius `2 * max_cone sum |e|_inf`.
pub fn brute_force_verdict(fan: &Fan, boundary: &InvariantDivisor) -> BruteForce {
    let n = fan.dim();
    let Some(psi) = LogSupport::new(fan, boundary) else {
        return BruteForce { min_discrepancy: None, points: 0, verdict: "not-R-Cartier" };
    };
    let rays: Vec<Vec<i64>> = fan.rays().iter().map(to_i64).collect();
    let radius = 2 * psi.radius;
    let mut min: Option<Q> = None;
    let mut points = 0;
    let mut v = vec![-radius; n];
    loop {
        let g = v.iter().fold(0i64, |acc, &x| gcd(acc, x));
        if g == 1 && !rays.contains(&v) {
            if let Some(p) = psi.eval(&v) {
                points += 1;
                let a = p - Q::one();
                if min.is_none_or(|m| a < m) {
                    min = Some(a);
                }
            }
        }
        let mut k = 0;
        while k < n && v[k] == radius {
            v[k] = -radius;
            k += 1;
        }
        if k == n {
            break;
        }
        v[k] += 1;
    }
    BruteForce { min_discrepancy: min, points, verdict: verdict(min, &psi.coeffs) }
}

/// Nonzero lattice points sum lambda_i e_i with 0 <= lambda_i < 1 of a simplicial cone.
fn box_points(vs: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = vs[0].len();
    let lo: Vec<i64> = (0..n).map(|i| vs.iter().map(|v| v[i].min(0)).sum()).collect();
    let hi: Vec<i64> = (0..n).map(|i| vs.iter().map(|v| v[i].max(0)).sum()).collect();
    let a: Vec<Vec<Q>> = (0..n).map(|i| vs.iter().map(|v| Q::from(v[i])).collect()).collect();
    let mut out = Vec::new();
    let mut p = lo.clone();
    loop {
        if p.iter().any(|&x| x != 0) {
            let b: Vec<Q> = p.iter().map(|&x| Q::from(x)).collect();
            if let Some(l) = solve(&a, &b) {
                if l.iter().all(|x| !x.is_negative() && *x < Q::one()) {
                    out.push(p.clone());
                }
            }
        }
        let mut k = 0;
        while k < n && p[k] == hi[k] {
            p[k] = lo[k];
            k += 1;
        }
        if k == n {
            return out;
        }
        p[k] += 1;
    }
}

pub struct Resolution {
    pub fan: Fan,
    /// (exceptional ray of the resolution, a(E, X, Delta)).
    pub exceptional: Vec<(Vec<i64>, Q)>,
    pub min_discrepancy: Option<Q>,
    pub verdict: &'static str,
}

/// Resolves X by star subdivisions (first at ray sums of non-simplicial cones, then at the box point
/// of least psi in each singular cone), then reads discrepancies off the smooth model: exceptional
/// rays directly, everything else through sums of two rays of one smooth cone.
pub fn resolution_verdict(fan: &Fan, boundary: &InvariantDivisor) -> Resolution {
    let Some(psi) = LogSupport::new(fan, boundary) else {
        return Resolution { fan: fan.clone(), exceptional: Vec::new(), min_discrepancy: None, verdict: "not-R-Cartier" };
    };
    let mut y = fan.clone();
    loop {
        let mut cones: Vec<Vec<usize>> = y.cones().iter().filter(|c| c.len() >= 2).cloned().collect();
        cones.sort_by_key(|c| c.len());
        let non_simplicial = cones.iter().find(|c| rank(&c.iter().map(|&i| to_i64(y.ray(i))).collect::<Vec<_>>()) < c.len());
        let centre = if let Some(c) = non_simplicial {
            let mut s = vec![0i64; y.dim()];
            for &i in c {
                for (a, b) in s.iter_mut().zip(to_i64(y.ray(i))) {
                    *a += b;
                }
            }
            let g = s.iter().fold(0i64, |acc, &x| gcd(acc, x));
            Some(s.iter().map(|x| x / g).collect::<Vec<i64>>())
        } else {
            cones.iter().find_map(|c| {
                let vs: Vec<Vec<i64>> = c.iter().map(|&i| to_i64(y.ray(i))).collect();
                let mut pts: Vec<Vec<i64>> = box_points(&vs).into_iter().filter(|p| p.iter().fold(0i64, |a, &x| gcd(a, x)) == 1).collect();
                pts.sort_by(|a, b| psi.eval(a).unwrap().cmp(&psi.eval(b).unwrap()).then_with(|| a.cmp(b)));
                pts.into_iter().next()
            })
        };
        let Some(v) = centre else { break };
        y = y.star_subdivision(&toricmmp::lattice::LatticeVector::from_i64(&v)).expect("point of the support");
    }
    let original: Vec<Vec<i64>> = fan.rays().iter().map(to_i64).collect();
    let values: Vec<Q> = y.rays().iter().map(|r| psi.eval(&to_i64(r)).unwrap()).collect();
    let exceptional: Vec<(Vec<i64>, Q)> = y
        .rays()
        .iter()
        .zip(&values)
        .map(|(r, p)| (to_i64(r), *p - Q::one()))
        .filter(|(r, _)| !original.contains(r))
        .collect();
    let mut min: Option<Q> = exceptional.iter().map(|e| e.1).min();
    if values.iter().all(|p| !p.is_negative()) {
        for c in y.cones().iter().filter(|c| c.len() == 2) {
            let a = values[c[0]] + values[c[1]] - Q::one();
            if min.is_none_or(|m| a < m) {
                min = Some(a);
            }
        }
    }
    Resolution { verdict: verdict(min, &psi.coeffs), fan: y, exceptional, min_discrepancy: min }
}
