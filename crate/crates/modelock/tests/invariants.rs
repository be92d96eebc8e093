//! Randomized invariant checks for the numeric kernels.

use modelock::circlemap::CircleLift;
use modelock::contfrac::cf_expand;
use modelock::precision::{float, parse_float, shortest_string, two_pi};
use proptest::prelude::*;
use rug::Float;

const PREC: u32 = 128;

fn small_float() -> impl Strategy<Value = f64> {
    prop_oneof![
        -4.0..4.0f64,
        any::<i32>().prop_map(|m| m as f64 * 1e-9),
        any::<f64>().prop_filter("finite", |x| x.is_finite() && x.abs() < 1e12),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// shortest_string must round-trip exactly at the value's precision.
    #[test]
    fn shortest_string_round_trips(x in small_float(), prec in 53u32..300) {
        let f = Float::with_val(prec, x);
        let s = shortest_string(&f);
        let back = parse_float(prec, &s).expect("own output must re-parse");
        prop_assert_eq!(back, f);
    }

    /// A lift commutes with the deck transformation:
    /// F(x + 1) = F(x) + 1, so displacement is 1-periodic.
    #[test]
    fn displacement_is_periodic(a in 0.01..0.15f64, x in -2.0..2.0f64, t in -0.5..0.5f64) {
        let base = CircleLift::standard(float(PREC, a)).unwrap();
        let map = base.translated(float(PREC, t));
        let g0 = map.displacement(1, 3, &float(PREC, x), PREC);
        let g1 = map.displacement(1, 3, &(float(PREC, x) + 1u32), PREC);
        prop_assert!((g0 - g1).abs() < float(64, 1e-30));
    }

    /// Displacement is monotone in the translation parameter with
    /// slope at least 1 over q iterates.
    #[test]
    fn displacement_monotone_in_t(a in 0.01..0.15f64, x in 0.0..1.0f64, t in -0.3..0.3f64, dt in 1e-6..0.1f64) {
        let base = CircleLift::standard(float(PREC, a)).unwrap();
        let lo = base.translated(float(PREC, t)).displacement(0, 2, &float(PREC, x), PREC);
        let hi = base.translated(float(PREC, t + dt)).displacement(0, 2, &float(PREC, x), PREC);
        // Over q = 2 iterates an increase dt in t adds at least
        // dt * (1 + min F') with min F' = 1 - 2 pi a for the standard
        // family; in particular the slope is at least 1.
        let min_deriv = 1.0 - 2.0 * std::f64::consts::PI * a;
        prop_assert!(hi - lo >= float(64, dt * (1.0 + min_deriv)) * 0.999f64);
    }

    /// Convergents satisfy the determinant identity
    /// p_n q_{n-1} - p_{n-1} q_n = (-1)^{n-1} and alternate around x.
    #[test]
    fn convergent_determinant_identity(num in 1u32..1000, den in 1001u32..5000) {
        let x = Float::with_val(PREC, num) / Float::with_val(PREC, den);
        let cf = cf_expand(&x, 12, PREC).unwrap();
        let n_avail = cf.convergents.len();
        for n in 1..n_avail {
            let a = cf.convergent(n).unwrap();
            let b = cf.convergent(n - 1).unwrap();
            let det = a.p.clone() * &b.q - b.p.clone() * &a.q;
            let expect = if n % 2 == 1 { 1 } else { -1 };
            prop_assert_eq!(det, rug::Integer::from(expect));
        }
    }

    /// The conjugated rotation really is a conjugacy: its translation
    /// displacement over q steps matches the rotation's after
    /// transporting the sample point through Psi.
    #[test]
    fn conjrot_is_conjugate_to_rotation(theta in 0.1..0.9f64, eps in 0.0..0.14f64, x in 0.0..1.0f64) {
        let base = CircleLift::conjugated_rotation(float(PREC, theta), float(PREC, eps)).unwrap();
        // Psi(x + theta q) - Psi(x) should equal F^{oq}(Psi(x)) - Psi(x).
        let tp = two_pi(PREC);
        let psi = |y: &Float| y.clone() + (y.clone() * &tp).sin() * float(PREC, eps);
        let q = 3u64;
        let start = psi(&float(PREC, x));
        let dir = base.translated(float(PREC, 0.0)).displacement(0, q, &start, PREC);
        let rot = psi(&(float(PREC, x) + float(PREC, theta) * q)) - &start;
        prop_assert!((dir - rot).abs() < float(64, 1e-28));
    }
}
