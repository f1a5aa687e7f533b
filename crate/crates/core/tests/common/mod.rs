//! Direct double-loop evaluation of R-values, shared by the exactness
//! tests.
#![allow(dead_code)]

use fasi::rvalue::{CalPoint, Scope, TestPoint, Variant};
use fasi::Rational;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn r(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

pub struct Instance {
    pub cal: Vec<CalPoint<Rational>>,
    pub test: Vec<TestPoint<Rational>>,
}

pub fn instance(rng: &mut ChaCha8Rng) -> Instance {
    let groups = rng.random_range(1..=3);
    let mut cal = Vec::new();
    let mut test = Vec::new();
    for g in 0..groups {
        for _ in 0..rng.random_range(0..=12) {
            cal.push(CalPoint {
                group: g,
                score: r(rng.random_range(0..=10), 10),
                null: rng.random_bool(0.5),
            });
        }
        for _ in 0..rng.random_range(1..=12) {
            test.push(TestPoint {
                group: g,
                score: r(rng.random_range(0..=10), 10),
            });
        }
    }
    Instance { cal, test }
}

fn same(a: usize, b: usize, scope: Scope) -> bool {
    scope == Scope::Pooled || a == b
}

pub fn brute_raw(inst: &Instance, j: usize, variant: Variant, scope: Scope) -> Rational {
    let t = inst.test[j];
    let mut n = 0;
    let mut n_null = 0;
    let mut cal_hits = 0;
    for c in &inst.cal {
        if same(c.group, t.group, scope) {
            n += 1;
            if c.null {
                n_null += 1;
                if c.score >= t.score {
                    cal_hits += 1;
                }
            }
        }
    }
    let mut m = 0;
    let mut test_hits = 0;
    for k in &inst.test {
        if same(k.group, t.group, scope) {
            m += 1;
            if k.score >= t.score {
                test_hits += 1;
            }
        }
    }
    let all_hits = test_hits + inst
        .cal
        .iter()
        .filter(|c| same(c.group, t.group, scope) && c.score >= t.score)
        .count() as i64;
    let numerator = r(cal_hits + 1, n + 1);
    let denominator = match variant {
        Variant::Standard | Variant::ConservativeStandard => r(test_hits, m),
        Variant::Plus | Variant::ConservativePlus => r(all_hits + 1, m + n + 1),
    };
    let mut v = (numerator / denominator).min(r(1, 1));
    if matches!(variant, Variant::ConservativeStandard | Variant::ConservativePlus) {
        v = (v * r(n + 1, n_null + 1)).min(r(1, 1));
    }
    v
}

pub fn brute_mono(inst: &Instance, raw: &[Rational], j: usize, scope: Scope) -> Rational {
    let t = inst.test[j];
    let mut best = raw[j];
    for (k, p) in inst.test.iter().enumerate() {
        if same(p.group, t.group, scope) && p.score <= t.score && raw[k] < best {
            best = raw[k];
        }
    }
    best
}

pub const VARIANTS: [Variant; 4] = [
    Variant::Standard,
    Variant::Plus,
    Variant::ConservativeStandard,
    Variant::ConservativePlus,
];

/// Brute-force raw and monotone R-values of every test point.
pub fn brute(inst: &Instance, variant: Variant, scope: Scope) -> (Vec<Rational>, Vec<Rational>) {
    let raw: Vec<Rational> = (0..inst.test.len()).map(|j| brute_raw(inst, j, variant, scope)).collect();
    let mono = (0..inst.test.len()).map(|j| brute_mono(inst, &raw, j, scope)).collect();
    (raw, mono)
}
