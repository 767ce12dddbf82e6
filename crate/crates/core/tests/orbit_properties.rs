use collatz_core::map::{ReducedRule, ResidueClass, Rule};
use collatz_core::trajectory::{self, Outcome};
use collatz_core::Nat;

fn n(v: u64) -> Nat {
    Nat::new(v)
}

/// Reference orbit of 27 under T, written out by hand.
const ORBIT_27: [u64; 71] = [
    27, 41, 62, 31, 47, 71, 107, 161, 242, 121, 182, 91, 137, 206, 103, 155, 233, 350, 175, 263,
    395, 593, 890, 445, 668, 334, 167, 251, 377, 566, 283, 425, 638, 319, 479, 719, 1079, 1619,
    2429, 3644, 1822, 911, 1367, 2051, 3077, 4616, 2308, 1154, 577, 866, 433, 650, 325, 488, 244,
    122, 61, 92, 46, 23, 35, 53, 80, 40, 20, 10, 5, 8, 4, 2, 1,
];

#[test]
fn orbit_of_27_matches_reference() {
    let t = trajectory::orbit(&n(27), 1000, &n(1)).unwrap();
    let got: Vec<u64> = t.values.iter().map(|v| v.to_u64().unwrap()).collect();
    assert_eq!(got, ORBIT_27);
    assert_eq!(t.steps as usize, ORBIT_27.len() - 1);
    assert_eq!(t.steps, 70);
    assert_eq!(t.peak, n(4616));
    // Spot check: T(395) = 593.
    assert_eq!(collatz_core::map::step(&n(395)).unwrap().0, n(593));
}

#[test]
fn rules_agree_with_parity() {
    for x in 1..=20_000u64 {
        let t = trajectory::orbit(&n(x), 100_000, &n(1)).unwrap();
        assert!(t.reached_target);
        assert_eq!(t.rules.len() + 1, t.values.len());
        for (v, r) in t.values.iter().zip(&t.rules) {
            assert_eq!(*r == Rule::R1, v.is_even());
        }
        assert!(t.peak >= t.start && t.peak >= t.last);
    }
}

#[test]
fn class_transitions_and_no_c0_reentry() {
    for x in 1..=100_000u64 {
        let t = trajectory::orbit(&n(x), 100_000, &n(1)).unwrap();
        let mut left_c0 = false;
        for pair in t.values.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            let (ca, cb) = (ResidueClass::of(a), ResidueClass::of(b));
            let expected = match ca {
                ResidueClass::C0 if (a.to_u64().unwrap() / 3) % 2 == 0 => ResidueClass::C0,
                ResidueClass::C0 => ResidueClass::C2,
                ResidueClass::C1 => ResidueClass::C2,
                ResidueClass::C2 if a.is_even() => ResidueClass::C1,
                ResidueClass::C2 => ResidueClass::C2,
            };
            assert_eq!(cb, expected, "{a} -> {b}");
            left_c0 |= ca == ResidueClass::C0 && cb != ResidueClass::C0;
            assert!(!(left_c0 && cb == ResidueClass::C0), "orbit of {x} re-enters [0] at {b}");
        }
    }
}

#[test]
fn reduced_orbit_step_counts_add_up() {
    for x in (2..=100_000u64).step_by(3) {
        let full = trajectory::orbit(&n(x), 100_000, &n(1)).unwrap();
        let to_two = trajectory::orbit(&n(x), 100_000, &n(2)).unwrap();
        let reduced = trajectory::reduced_orbit(&n(x), 100_000).unwrap();
        let q12 = reduced.rules.iter().filter(|r| **r != ReducedRule::Q3).count() as u64;
        let q3 = reduced.rules.len() as u64 - q12;
        assert_eq!(to_two.steps, 2 * q12 + q3, "x = {x}");
        // 2 -> 1 is the final step of T.
        assert_eq!(full.steps, to_two.steps + 1, "x = {x}");
    }
}

#[test]
fn correspondence_on_class_two() {
    for x in (2..=100_000u64).step_by(3) {
        assert!(trajectory::correspondence(&n(x), 100_000).unwrap(), "x = {x}");
    }
}

#[test]
fn converges_floor_contract() {
    // Every n >= 2 drops below itself.
    for x in 2..=50_000u64 {
        let s = trajectory::converges(&n(x), 100_000, &n(x)).unwrap();
        assert!(matches!(s.outcome, Outcome::DroppedBelowFloor | Outcome::ReachedTarget));
    }
    let s = trajectory::converges(&n(2), 10, &n(2)).unwrap();
    assert_eq!(s.outcome, Outcome::ReachedTarget);
}
