mod common;

use atomtrap::angular::{clebsch_gordan, emission_amplitude, wigner_6j, AngMom};
use proptest::prelude::*;

const MAX: u32 = 8;

fn am(two_j: u32) -> AngMom {
    AngMom::new(two_j)
}

fn six(a: [u32; 6]) -> f64 {
    wigner_6j(am(a[0]), am(a[1]), am(a[2]), am(a[3]), am(a[4]), am(a[5])).unwrap()
}

#[test]
fn oracle_self_check() {
    assert!((common::cg(1, 1, 1, -1, 0, 0) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    assert!((common::cg(2, 0, 2, 0, 4, 0) - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
    assert!((common::six_j(1, 1, 2, 1, 1, 2) - 1.0 / 6.0).abs() < 1e-15);
    for args in [[1, 1, 2, 1, 1, 2], [2, 2, 2, 2, 2, 2], [3, 1, 2, 2, 2, 1], [4, 2, 2, 3, 1, 3]] {
        let [a, b, c, d, e, f] = args.map(|x| x as i64);
        let r = common::six_j(a, b, c, d, e, f);
        let k = common::six_j_contraction(a, b, c, d, e, f);
        assert!((r - k).abs() < 1e-12, "{args:?}: {r} vs {k}");
    }
}

#[test]
fn cg_matches_oracle_up_to_two_j_8() {
    let mut checked = 0;
    for j1 in 0..=MAX {
        for j2 in 0..=MAX {
            for j in 0..=MAX {
                for m1 in am(j1).projections() {
                    for m2 in am(j2).projections() {
                        for m in am(j).projections() {
                            let got = clebsch_gordan(am(j1), m1, am(j2), m2, am(j), m).unwrap();
                            let want = common::cg(j1 as i64, m1 as i64, j2 as i64, m2 as i64, j as i64, m as i64);
                            assert!((got - want).abs() < 1e-12, "CG({j1},{m1};{j2},{m2}|{j},{m}) {got} vs {want}");
                            checked += 1;
                        }
                    }
                }
            }
        }
    }
    assert_eq!(checked, 45 * 45 * 45);
}

#[test]
fn six_j_matches_oracle_up_to_two_j_8() {
    for a in 0..=MAX {
        for b in 0..=MAX {
            for c in 0..=MAX {
                for d in 0..=MAX {
                    for e in 0..=MAX {
                        for f in 0..=MAX {
                            let got = six([a, b, c, d, e, f]);
                            let want = common::six_j(a as i64, b as i64, c as i64, d as i64, e as i64, f as i64);
                            assert!((got - want).abs() < 1e-12, "{{{a} {b} {c}; {d} {e} {f}}} {got} vs {want}");
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn six_j_matches_contraction_small() {
    for a in 0..=4u32 {
        for b in 0..=4 {
            for c in 0..=4 {
                for d in 0..=4 {
                    for e in 0..=4 {
                        for f in 0..=4 {
                            let got = six([a, b, c, d, e, f]);
                            let want = common::six_j_contraction(a as i64, b as i64, c as i64, d as i64, e as i64, f as i64);
                            assert!((got - want).abs() < 1e-12, "{{{a} {b} {c}; {d} {e} {f}}}");
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn cg_orthogonality() {
    for j1 in 0..=6u32 {
        for j2 in 0..=6u32 {
            let js: Vec<u32> = (j1.abs_diff(j2)..=j1 + j2).step_by(2).collect();
            for &ja in &js {
                for &jb in &js {
                    for ma in am(ja).projections() {
                        for mb in am(jb).projections() {
                            let mut s = 0.0;
                            for m1 in am(j1).projections() {
                                for m2 in am(j2).projections() {
                                    s += clebsch_gordan(am(j1), m1, am(j2), m2, am(ja), ma).unwrap()
                                        * clebsch_gordan(am(j1), m1, am(j2), m2, am(jb), mb).unwrap();
                                }
                            }
                            let want = if ja == jb && ma == mb { 1.0 } else { 0.0 };
                            assert!((s - want).abs() < 1e-12);
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn printed_values() {
    assert_eq!(clebsch_gordan(am(2), 2, am(2), 2, am(2), 2).unwrap(), 0.0);
    assert!((six([0, 2, 2, 0, 2, 2]) - 1.0 / 3.0).abs() < 1e-15);
    assert_eq!(six([2, 2, 6, 2, 2, 2]), 0.0);
    assert!(clebsch_gordan(am(2), 3, am(2), 0, am(2), 3).is_err());
    assert_eq!(emission_amplitude(0, 0.0).unwrap().abs(), 0.0);
    assert!((emission_amplitude(1, std::f64::consts::FRAC_PI_2).unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    assert!(emission_amplitude(2, 0.0).is_err());
}

fn permutations(a: [u32; 6]) -> Vec<[u32; 6]> {
    // columns (a,d), (b,e), (c,f); any column order, and swapping upper/lower in two columns
    let cols = [(a[0], a[3]), (a[1], a[4]), (a[2], a[5])];
    let orders = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let flips = [[false, false, false], [true, true, false], [true, false, true], [false, true, true]];
    let mut out = Vec::new();
    for o in orders {
        for fl in flips {
            let c: Vec<(u32, u32)> = (0..3)
                .map(|k| {
                    let (u, l) = cols[o[k]];
                    if fl[k] {
                        (l, u)
                    } else {
                        (u, l)
                    }
                })
                .collect();
            out.push([c[0].0, c[1].0, c[2].0, c[0].1, c[1].1, c[2].1]);
        }
    }
    out
}

proptest! {
    #[test]
    fn six_j_symmetries(a in 0..=MAX, b in 0..=MAX, c in 0..=MAX, d in 0..=MAX, e in 0..=MAX, f in 0..=MAX) {
        let base = six([a, b, c, d, e, f]);
        let all = permutations([a, b, c, d, e, f]);
        prop_assert_eq!(all.len(), 24);
        for p in all {
            prop_assert!((six(p) - base).abs() < 1e-13);
        }
    }

    #[test]
    fn cg_bounded(j1 in 0..=MAX, j2 in 0..=MAX, j in 0..=MAX, k1 in 0..=MAX, k2 in 0..=MAX) {
        let m1 = -(j1 as i32) + 2 * (k1.min(j1) as i32);
        let m2 = -(j2 as i32) + 2 * (k2.min(j2) as i32);
        let m = m1 + m2;
        if m.unsigned_abs() <= j && (j as i32 - m) % 2 == 0 {
            let v = clebsch_gordan(am(j1), m1, am(j2), m2, am(j), m).unwrap();
            prop_assert!(v.abs() <= 1.0 + 1e-15);
        }
    }
}
