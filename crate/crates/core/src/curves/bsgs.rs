//! Group order of `E(F_ell)` by baby-step giant-step inside the Hasse interval.
//!
//! Random points are drawn alternately from `E` and from its quadratic twist
//! `E'`. Each point's exact order is folded into a running lcm (`l_curve`,
//! `l_twist`); the candidate orders are the `N` in the Hasse interval with
//! `l_curve | N` and `l_twist | 2(ell + 1) - N`. Sampling stops as soon as a
//! single candidate remains.
//!
//! Point orders only pin down the group exponent, which for small `ell` can
//! leave several candidates on both curves at once (e.g. `Z/2 x Z/4` against
//! `Z/2 x Z/2`). When that happens and the group is small, the subgroup
//! generated by the sampled points is enumerated outright and its size,
//! which divides the group order, replaces the lcm.

use std::collections::{HashMap, HashSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::group::{Point, ShortCurve};
use crate::arith::factor::{factorize, isqrt, lcm};
use crate::arith::modular::legendre;
use crate::error::{Error, Result};

/// `(lo, hi)` with `|ell + 1 - N| <= floor(2 sqrt(ell))`.
pub fn hasse_interval(ell: u64) -> (u64, u64) {
    let w = isqrt(4 * ell);
    (ell + 1 - w, ell + 1 + w)
}

/// Exact order of `p`, given some multiple `m` of it.
fn order_from_multiple(curve: &ShortCurve, p: Point, mut m: u64) -> u64 {
    for (q, _) in factorize(m) {
        while m.is_multiple_of(q) && curve.mul(p, m / q) == Point::Infinity {
            m /= q;
        }
    }
    m
}

/// Smallest `N` in `[lo, hi]` with `step | N` and `[N]p = O`, if any.
fn annihilator_in_interval(
    curve: &ShortCurve,
    p: Point,
    step: u64,
    lo: u64,
    hi: u64,
) -> Option<u64> {
    let q = curve.mul(p, step);
    let k_lo = lo.div_ceil(step);
    let k_hi = hi / step;
    if k_lo > k_hi {
        return None;
    }
    if q == Point::Infinity {
        return Some(k_lo * step);
    }
    let width = k_hi - k_lo;
    let m = isqrt(width) + 1;
    // baby steps jQ, 1 <= j <= m
    let mut baby: HashMap<Point, u64> = HashMap::with_capacity(m as usize);
    let mut jq = Point::Infinity;
    for j in 1..=m {
        jq = curve.add(jq, q);
        baby.entry(jq).or_insert(j);
    }
    let giant = curve.neg(curve.mul(q, m));
    // T_i = -[k_lo + i m] Q; want T_i = jQ, i.e. [k_lo + i m + j] Q = O.
    let mut t = curve.neg(curve.mul(q, k_lo));
    let mut i = 0u64;
    loop {
        let base = k_lo + i * m;
        if base > k_hi {
            return None;
        }
        if t == Point::Infinity {
            return Some(base * step);
        }
        if let Some(&j) = baby.get(&t) {
            let k = base + j;
            if k <= k_hi {
                return Some(k * step);
            }
        }
        t = curve.add(t, giant);
        i += 1;
    }
}

fn candidates(lo: u64, hi: u64, ell: u64, l_curve: u64, l_twist: u64) -> Vec<u64> {
    let start = lo.div_ceil(l_curve) * l_curve;
    (0..)
        .map(|k| start + k * l_curve)
        .take_while(|&n| n <= hi)
        .filter(|&n| (2 * (ell + 1) - n).is_multiple_of(l_twist))
        .take(2)
        .collect()
}

/// Draws after which explicit subgroup tracking may start.
const EXPLICIT_AFTER_DRAWS: u32 = 8;

/// Largest Hasse-interval end for which subgroups are enumerated.
const EXPLICIT_MAX_ORDER: u64 = 1 << 18;

/// The subgroup generated by the points seen so far, element by element.
struct Subgroup {
    elements: Vec<Point>,
    members: HashSet<Point>,
}

impl Subgroup {
    fn trivial() -> Self {
        Subgroup {
            elements: vec![Point::Infinity],
            members: HashSet::from([Point::Infinity]),
        }
    }

    fn size(&self) -> u64 {
        self.elements.len() as u64
    }

    /// Replaces `H` by `<H, p>`, the union of the cosets `H + jP`, `0 <= j < k`,
    /// where `k` is least with `kP` in `H`.
    fn adjoin(&mut self, curve: &ShortCurve, p: Point) {
        let mut shift = p;
        let base = self.elements.clone();
        while !self.members.contains(&shift) {
            for &h in &base {
                let e = curve.add(h, shift);
                self.elements.push(e);
                self.members.insert(e);
            }
            shift = curve.add(shift, p);
        }
    }
}

/// What is known about one of the two curves.
struct Tracker<'a> {
    curve: &'a ShortCurve,
    order_lcm: u64,
    sampled: Vec<Point>,
    subgroup: Option<Subgroup>,
}

impl<'a> Tracker<'a> {
    fn new(curve: &'a ShortCurve) -> Self {
        Tracker {
            curve,
            order_lcm: 1,
            sampled: Vec::new(),
            subgroup: None,
        }
    }

    /// A known divisor of the group order.
    fn divisor(&self) -> u64 {
        self.subgroup
            .as_ref()
            .map_or(self.order_lcm, Subgroup::size)
    }

    fn absorb(&mut self, p: Point, lo: u64, hi: u64) -> Result<()> {
        let ell = self.curve.ell;
        let multiple =
            annihilator_in_interval(self.curve, p, self.order_lcm, lo, hi).ok_or_else(|| {
                Error::Internal(format!(
                    "no multiple of {} in the Hasse interval annihilates a point mod {ell}",
                    self.order_lcm
                ))
            })?;
        let order = order_from_multiple(self.curve, p, multiple);
        self.order_lcm = lcm(self.order_lcm, order)
            .ok_or_else(|| Error::Overflow(format!("point-order lcm mod {ell}")))?;
        self.sampled.push(p);
        if let Some(h) = self.subgroup.as_mut() {
            h.adjoin(self.curve, p);
        }
        Ok(())
    }

    fn start_enumerating(&mut self) {
        let mut h = Subgroup::trivial();
        for &p in &self.sampled {
            h.adjoin(self.curve, p);
        }
        self.subgroup = Some(h);
    }
}

/// `#E(F_ell)` for `y^2 = x^3 + ax + b`, `ell >= 5` prime, nonsingular.
pub fn group_order(curve: &ShortCurve, max_points: u32) -> Result<u64> {
    let ell = curve.ell;
    let (lo, hi) = hasse_interval(ell);
    let nonresidue = (2..ell)
        .find(|&d| legendre(d, ell) == -1)
        .ok_or_else(|| Error::Internal(format!("no quadratic non-residue mod {ell}")))?;
    let twist = curve.twist(nonresidue);
    let mut rng = ChaCha8Rng::seed_from_u64(ell ^ 0x5eed_1ab0_f0e5_u64);

    let mut on_curve = Tracker::new(curve);
    let mut on_twist = Tracker::new(&twist);
    for drawn in 0..max_points {
        let tracker = if drawn % 2 == 0 {
            &mut on_curve
        } else {
            &mut on_twist
        };
        let p = tracker.curve.random_point(&mut rng);
        tracker.absorb(p, lo, hi)?;

        match candidates(lo, hi, ell, on_curve.divisor(), on_twist.divisor()).as_slice() {
            [] => {
                return Err(Error::Internal(format!(
                    "point orders mod {ell} are inconsistent with the Hasse interval"
                )))
            }
            [n] => return Ok(*n),
            _ => {}
        }
        if drawn + 1 >= EXPLICIT_AFTER_DRAWS
            && hi <= EXPLICIT_MAX_ORDER
            && on_curve.subgroup.is_none()
        {
            on_curve.start_enumerating();
            on_twist.start_enumerating();
        }
    }
    Err(Error::Internal(format!(
        "group order mod {ell} still ambiguous after {max_points} random points"
    )))
}
