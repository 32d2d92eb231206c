//! Reference implementations used as test oracles.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub fn factorial(n: i64) -> BigInt {
    assert!(n >= 0);
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

fn triangle(a: i64, b: i64, c: i64) -> bool {
    c >= (a - b).abs() && c <= a + b && (a + b + c) % 2 == 0
}

/// Δ(abc)² with doubled arguments.
fn delta(a: i64, b: i64, c: i64) -> BigRational {
    BigRational::new(
        factorial((a + b - c) / 2) * factorial((a - b + c) / 2) * factorial((-a + b + c) / 2),
        factorial((a + b + c) / 2 + 1),
    )
}

/// sign(s) · sqrt(p · s²) evaluated from exact rationals.
fn root(p: &BigRational, s: &BigRational) -> f64 {
    if s.is_zero() {
        return 0.0;
    }
    let mag = (p * s * s).to_f64().unwrap().sqrt();
    if s.is_negative() {
        -mag
    } else {
        mag
    }
}

/// Wigner 3j symbol from the Racah sum; all arguments doubled.
pub fn three_j(j1: i64, j2: i64, j3: i64, m1: i64, m2: i64, m3: i64) -> f64 {
    if m1 + m2 + m3 != 0 || !triangle(j1, j2, j3) {
        return 0.0;
    }
    for (j, m) in [(j1, m1), (j2, m2), (j3, m3)] {
        if m.abs() > j || (j - m) % 2 != 0 {
            return 0.0;
        }
    }
    let h = |x: i64| x / 2;
    let p = delta(j1, j2, j3)
        * BigRational::from_integer(
            factorial(h(j1 + m1))
                * factorial(h(j1 - m1))
                * factorial(h(j2 + m2))
                * factorial(h(j2 - m2))
                * factorial(h(j3 + m3))
                * factorial(h(j3 - m3)),
        );
    let mut s = BigRational::zero();
    for k in 0..=(j1 + j2 + j3) {
        let args = [k, h(j3 - j2 + m1) + k, h(j3 - j1 - m2) + k, h(j1 + j2 - j3) - k, h(j1 - m1) - k, h(j2 + m2) - k];
        if args.iter().any(|&x| x < 0) {
            continue;
        }
        let den = args.iter().fold(BigInt::one(), |acc, &x| acc * factorial(x));
        let t = BigRational::new(BigInt::one(), den);
        if k % 2 == 0 {
            s += t;
        } else {
            s -= t;
        }
    }
    let phase = h(j1 - j2 - m3);
    let v = root(&p, &s);
    if phase.rem_euclid(2) == 1 {
        -v
    } else {
        v
    }
}

/// ⟨j1 m1; j2 m2 | J M⟩ through the 3j symbol; doubled arguments.
pub fn cg(j1: i64, m1: i64, j2: i64, m2: i64, j: i64, m: i64) -> f64 {
    let phase = (j1 - j2 + m) / 2;
    let v = ((j + 1) as f64).sqrt() * three_j(j1, j2, j, m1, m2, -m);
    if phase.rem_euclid(2) == 1 {
        -v
    } else {
        v
    }
}

/// 6j symbol from the Racah closed form; doubled arguments.
pub fn six_j(a: i64, b: i64, c: i64, d: i64, e: i64, f: i64) -> f64 {
    if !(triangle(a, b, c) && triangle(a, e, f) && triangle(d, b, f) && triangle(d, e, c)) {
        return 0.0;
    }
    let p = delta(a, b, c) * delta(a, e, f) * delta(d, b, f) * delta(d, e, c);
    let lo = [a + b + c, a + e + f, d + b + f, d + e + c].into_iter().max().unwrap() / 2;
    let hi = [a + b + d + e, b + c + e + f, a + c + d + f].into_iter().min().unwrap() / 2;
    let mut s = BigRational::zero();
    for t in lo..=hi {
        let den = factorial(t - (a + b + c) / 2)
            * factorial(t - (a + e + f) / 2)
            * factorial(t - (d + b + f) / 2)
            * factorial(t - (d + e + c) / 2)
            * factorial((a + b + d + e) / 2 - t)
            * factorial((b + c + e + f) / 2 - t)
            * factorial((a + c + d + f) / 2 - t);
        let term = BigRational::new(factorial(t + 1), den);
        if t % 2 == 0 {
            s += term;
        } else {
            s -= term;
        }
    }
    root(&p, &s)
}

/// 6j symbol as the contraction of four 3j symbols (slow, used for small j).
pub fn six_j_contraction(j1: i64, j2: i64, j3: i64, j4: i64, j5: i64, j6: i64) -> f64 {
    let ok = |j: i64, m: i64| m.abs() <= j && (j - m) % 2 == 0;
    let proj = |j: i64| (0..=j).map(move |k| -j + 2 * k);
    let mut sum = 0.0;
    for m1 in proj(j1) {
        for m2 in proj(j2) {
            for m5 in proj(j5) {
                let m3 = -m1 - m2;
                let m6 = m5 - m1;
                let m4 = m6 - m2;
                if !(ok(j3, m3) && ok(j6, m6) && ok(j4, m4)) || -m4 + m5 + m3 != 0 {
                    continue;
                }
                let x = three_j(j1, j2, j3, -m1, -m2, -m3)
                    * three_j(j1, j5, j6, m1, -m5, m6)
                    * three_j(j4, j2, j6, m4, m2, -m6)
                    * three_j(j4, j5, j3, -m4, m5, m3);
                if x == 0.0 {
                    continue;
                }
                let s = (j1 + j2 + j3 + j4 + j5 + j6 - m1 - m2 - m3 - m4 - m5 - m6) / 2;
                sum += if s.rem_euclid(2) == 1 { -x } else { x };
            }
        }
    }
    sum
}
