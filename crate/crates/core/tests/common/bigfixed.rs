//! Fixed-point arithmetic on big integers, used as an independent
//! high-precision reference for scalar trigonometry in the tests.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub const BITS: usize = 256;

#[derive(Clone, Debug)]
pub struct Fixed(pub BigInt);

impl Fixed {
    pub fn from_ratio(num: i128, den: i128) -> Self {
        Fixed((BigInt::from(num) << BITS) / BigInt::from(den))
    }

    pub fn from_int(v: i64) -> Self {
        Fixed(BigInt::from(v) << BITS)
    }

    /// Exact conversion of a finite f64.
    pub fn from_f64(v: f64) -> Self {
        if v == 0.0 {
            return Fixed(BigInt::zero());
        }
        let bits = v.to_bits();
        let sign = if bits >> 63 == 1 { -1 } else { 1 };
        let exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mant, e) = if exp == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), exp - 1075)
        };
        let m = BigInt::from(mant) * sign;
        let shift = BITS as i64 + e;
        if shift >= 0 {
            Fixed(m << shift as usize)
        } else {
            Fixed(m >> (-shift) as usize)
        }
    }

    pub fn to_f64(&self) -> f64 {
        let top: BigInt = &self.0 >> (BITS - 100);
        top.to_f64().unwrap() / 2f64.powi(100)
    }

    pub fn add(&self, o: &Fixed) -> Fixed {
        Fixed(&self.0 + &o.0)
    }

    pub fn sub(&self, o: &Fixed) -> Fixed {
        Fixed(&self.0 - &o.0)
    }

    pub fn mul(&self, o: &Fixed) -> Fixed {
        Fixed((&self.0 * &o.0) >> BITS)
    }

    pub fn div(&self, o: &Fixed) -> Fixed {
        Fixed((&self.0 << BITS) / &o.0)
    }

    pub fn sqrt(&self) -> Fixed {
        Fixed((&self.0 << BITS).sqrt())
    }

    pub fn is_tiny(&self) -> bool {
        self.0.abs() < BigInt::from(1u32) << 8
    }
}

fn atan_inv(n: i64) -> Fixed {
    // atan(1/n) = sum (-1)^k / ((2k+1) n^(2k+1))
    let mut power = Fixed::from_ratio(1, n as i128);
    let n2 = BigInt::from(n * n);
    let mut sum = Fixed(BigInt::zero());
    let mut k = 0i64;
    while !power.0.is_zero() {
        let term = Fixed(&power.0 / BigInt::from(2 * k + 1));
        sum = if k % 2 == 0 {
            sum.add(&term)
        } else {
            sum.sub(&term)
        };
        power = Fixed(&power.0 / &n2);
        k += 1;
    }
    sum
}

pub fn pi() -> Fixed {
    // Machin: pi = 16 atan(1/5) - 4 atan(1/239)
    let a = atan_inv(5);
    let b = atan_inv(239);
    Fixed(a.0 * 16 - b.0 * 4)
}

/// Taylor series for sin and cos after reduction into [-pi, pi].
pub fn sin_cos(x: &Fixed) -> (Fixed, Fixed) {
    let p = pi();
    let two_pi = Fixed(&p.0 * 2);
    let mut r = x.clone();
    let turns: BigInt = (&r.0 + &p.0).div_floor_fixed(&two_pi.0);
    r = Fixed(&r.0 - turns * &two_pi.0);
    let mut sin = Fixed(BigInt::zero());
    let mut cos = Fixed(BigInt::zero());
    let mut term = Fixed(BigInt::one() << BITS); // r^k / k!
    let mut k = 0i64;
    loop {
        match k % 4 {
            0 => cos = cos.add(&term),
            1 => sin = sin.add(&term),
            2 => cos = cos.sub(&term),
            _ => sin = sin.sub(&term),
        }
        k += 1;
        term = Fixed(term.mul(&r).0 / BigInt::from(k));
        if term.is_tiny() && k > 4 {
            break;
        }
    }
    (sin, cos)
}

trait DivFloor {
    fn div_floor_fixed(&self, d: &BigInt) -> BigInt;
}

impl DivFloor for BigInt {
    fn div_floor_fixed(&self, d: &BigInt) -> BigInt {
        use num_integer::Integer;
        self.div_floor(d)
    }
}

/// asin by Newton iteration on sin, for |x| well below one.
pub fn asin(x: &Fixed) -> Fixed {
    let mut y = Fixed::from_f64(x.to_f64().asin());
    for _ in 0..8 {
        let (s, c) = sin_cos(&y);
        y = y.sub(&s.sub(x).div(&c));
    }
    y
}

/// Natural log of a positive value: reduce into [1, 2) by powers of two,
/// then ln(x) = 2 atanh((x - 1) / (x + 1)).
pub fn ln(x: &Fixed) -> Fixed {
    assert!(x.0 > BigInt::zero());
    let one = BigInt::one() << BITS;
    let two = &one * 2;
    let mut m = x.0.clone();
    let mut shift: i64 = 0;
    while m >= two {
        m >>= 1;
        shift += 1;
    }
    while m < one {
        m <<= 1;
        shift -= 1;
    }
    let m = Fixed(m);
    let onef = Fixed(one);
    let t = m.sub(&onef).div(&m.add(&onef));
    let t2 = t.mul(&t);
    let mut power = t.clone();
    let mut sum = Fixed(BigInt::zero());
    let mut k = 0i64;
    while !power.is_tiny() {
        sum = sum.add(&Fixed(&power.0 / BigInt::from(2 * k + 1)));
        power = power.mul(&t2);
        k += 1;
    }
    let ln_m = Fixed(sum.0 * 2);
    Fixed(ln_m.0 + ln2().0 * shift)
}

pub fn ln2() -> Fixed {
    // ln 2 = 2 atanh(1/3)
    let t = Fixed::from_ratio(1, 3);
    let t2 = t.mul(&t);
    let mut power = t;
    let mut sum = Fixed(BigInt::zero());
    let mut k = 0i64;
    while !power.is_tiny() {
        sum = sum.add(&Fixed(&power.0 / BigInt::from(2 * k + 1)));
        power = power.mul(&t2);
        k += 1;
    }
    Fixed(sum.0 * 2)
}

pub fn log2(x: &Fixed) -> Fixed {
    ln(x).div(&ln2())
}
