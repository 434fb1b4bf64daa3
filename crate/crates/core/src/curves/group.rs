//! Affine group law on a short Weierstrass curve `y^2 = x^3 + ax + b` over `F_ell`, `ell >= 5`.

use rand::Rng;

use crate::arith::modular::{add_mod, inv_mod, legendre, mul_mod, sqrt_mod, sub_mod};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Point {
    Infinity,
    Affine(u64, u64),
}

#[derive(Clone, Copy, Debug)]
pub struct ShortCurve {
    pub a: u64,
    pub b: u64,
    pub ell: u64,
}

impl ShortCurve {
    /// The quadratic twist by the non-residue `d`: `y^2 = x^3 + a d^2 x + b d^3`.
    pub fn twist(&self, d: u64) -> ShortCurve {
        let ell = self.ell;
        let d2 = mul_mod(d, d, ell);
        ShortCurve {
            a: mul_mod(self.a, d2, ell),
            b: mul_mod(self.b, mul_mod(d2, d, ell), ell),
            ell,
        }
    }

    pub fn rhs(&self, x: u64) -> u64 {
        let ell = self.ell;
        let x2 = mul_mod(x, x, ell);
        add_mod(mul_mod(add_mod(x2, self.a, ell), x, ell), self.b, ell)
    }

    pub fn contains(&self, p: Point) -> bool {
        match p {
            Point::Infinity => true,
            Point::Affine(x, y) => mul_mod(y, y, self.ell) == self.rhs(x),
        }
    }

    pub fn neg(&self, p: Point) -> Point {
        match p {
            Point::Infinity => Point::Infinity,
            Point::Affine(x, y) => Point::Affine(x, if y == 0 { 0 } else { self.ell - y }),
        }
    }

    pub fn add(&self, p: Point, q: Point) -> Point {
        let ell = self.ell;
        let (x1, y1, x2, y2) = match (p, q) {
            (Point::Infinity, _) => return q,
            (_, Point::Infinity) => return p,
            (Point::Affine(x1, y1), Point::Affine(x2, y2)) => (x1, y1, x2, y2),
        };
        let slope = if x1 == x2 {
            if add_mod(y1, y2, ell) == 0 {
                return Point::Infinity;
            }
            let num = add_mod(mul_mod(3, mul_mod(x1, x1, ell), ell), self.a, ell);
            let den = inv_mod(mul_mod(2, y1, ell), ell).expect("2y is a unit when y != 0");
            mul_mod(num, den, ell)
        } else {
            let den = inv_mod(sub_mod(x2, x1, ell), ell).expect("distinct x differ by a unit");
            mul_mod(sub_mod(y2, y1, ell), den, ell)
        };
        let x3 = sub_mod(sub_mod(mul_mod(slope, slope, ell), x1, ell), x2, ell);
        let y3 = sub_mod(mul_mod(slope, sub_mod(x1, x3, ell), ell), y1, ell);
        Point::Affine(x3, y3)
    }

    pub fn mul(&self, p: Point, mut k: u64) -> Point {
        let mut acc = Point::Infinity;
        let mut base = p;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.add(acc, base);
            }
            base = self.add(base, base);
            k >>= 1;
        }
        acc
    }

    /// A uniformly chosen x with a square right-hand side, with a random sign on y.
    pub fn random_point<R: Rng>(&self, rng: &mut R) -> Point {
        loop {
            let x = rng.random_range(0..self.ell);
            let r = self.rhs(x);
            if legendre(r, self.ell) >= 0 {
                let y = sqrt_mod(r, self.ell).expect("residue has a root");
                let y = if rng.random::<bool>() {
                    y
                } else {
                    (self.ell - y) % self.ell
                };
                return Point::Affine(x, y);
            }
        }
    }
}
