//! Randomized invariant suites: Vieta root sums, agreement of the
//! eigenvalue Hurwitz test with a Routh tabulation oracle, the jomega
//! split round trip, crossing/eigenvalue agreement on random positive
//! cascades, and steady-state map round trips.

use nalgebra::{DMatrix, DVector, RowDVector};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use posic_core::analysis::{k_bar_inf, local_stability, m_matrix};
use posic_core::builtins::{GeneExpression, Maturation, RepressedTranslation, Sis};
use posic_core::poly::Polynomial;
use posic_core::sysmodel::{steady_state_map, LtiSystem};

/// Routh tabulation oracle: `Some(true)` iff all first-column entries are
/// positive; `None` when a pivot degenerates.
fn routh_oracle(asc: &[f64]) -> Option<bool> {
    let mut desc: Vec<f64> = asc.iter().rev().copied().collect();
    if desc[0] < 0.0 {
        for c in desc.iter_mut() {
            *c = -*c;
        }
    }
    let n = desc.len() - 1;
    if n == 0 {
        return None;
    }
    let cols = n / 2 + 1;
    let mut row0: Vec<f64> = (0..cols).map(|j| *desc.get(2 * j).unwrap_or(&0.0)).collect();
    let mut row1: Vec<f64> = (0..cols)
        .map(|j| *desc.get(2 * j + 1).unwrap_or(&0.0))
        .collect();
    let scale: f64 = desc.iter().map(|c| c.abs()).sum();
    let mut first_column = vec![row0[0], row1[0]];
    for _ in 2..=n {
        if row1[0].abs() < 1e-9 * scale {
            return None;
        }
        let mut next = vec![0.0; cols];
        for j in 0..cols - 1 {
            next[j] = (row1[0] * row0[j + 1] - row0[0] * row1[j + 1]) / row1[0];
        }
        first_column.push(next[0]);
        row0 = row1;
        row1 = next;
    }
    if first_column.iter().any(|v| v.abs() < 1e-9 * scale) {
        return None;
    }
    Some(first_column.iter().all(|&v| v > 0.0))
}

proptest! {
    #[test]
    fn vieta_root_sum(coeffs in prop::collection::vec(-5.0..5.0f64, 2..=9)) {
        prop_assume!(coeffs.last().unwrap().abs() > 0.1);
        let p = Polynomial::new(coeffs.clone());
        prop_assume!(p.degree() == Some(coeffs.len() - 1));
        let n = coeffs.len() - 1;
        let roots = p.roots().unwrap();
        let sum: Complex64 = roots.iter().sum();
        let expected = -coeffs[n - 1] / coeffs[n];
        let scale = 1.0 + expected.abs();
        prop_assert!((sum.re - expected).abs() <= 1e-8 * scale, "sum {} vs {expected}", sum.re);
        prop_assert!(sum.im.abs() <= 1e-8 * scale);
    }

    #[test]
    fn hurwitz_agrees_with_routh_tabulation(
        coeffs in prop::collection::vec(-4.0..4.0f64, 3..=5),
    ) {
        prop_assume!(coeffs.last().unwrap().abs() > 0.1);
        prop_assume!(coeffs[0].abs() > 1e-3);
        let p = Polynomial::new(coeffs.clone());
        prop_assume!(p.degree() == Some(coeffs.len() - 1));
        if let Some(expected) = routh_oracle(&coeffs) {
            // orient the leading coefficient positive for the root test too
            let q = if *coeffs.last().unwrap() > 0.0 { p } else { -&p };
            prop_assert_eq!(q.is_hurwitz().unwrap(), expected);
        }
    }

    #[test]
    fn jomega_split_round_trip(
        coeffs in prop::collection::vec(-3.0..3.0f64, 1..=9),
        omegas in prop::collection::vec(-20.0..20.0f64, 10),
    ) {
        let p = Polynomial::new(coeffs);
        let split = p.jomega_split();
        for w in omegas {
            let direct = p.eval_complex(Complex64::new(0.0, w));
            let via = Complex64::new(split.real_part.eval(w), split.imag_part.eval(w));
            prop_assert!((direct - via).norm() <= 1e-10 * (1.0 + direct.norm()));
        }
    }

    #[test]
    fn antithetic_rhs_identity(
        k in 0.05..3.0f64,
        eta in 0.05..20.0f64,
        mu in 0.1..5.0f64,
        state in prop::collection::vec(0.0..8.0f64, 4),
    ) {
        use posic_core::controllers::{ClosedLoop, ControllerSpec};
        let cl = ClosedLoop::linear(
            GeneExpression::default().lti(),
            ControllerSpec::antithetic(k, eta, mu).unwrap(),
        ).unwrap();
        let s = DVector::from_vec(state.clone());
        let d = cl.rhs(&s, 0.0).unwrap();
        let y = state[1];
        let ann = k * eta * state[2] * state[3];
        let scale = 1.0 + ann.abs() + y.abs() + mu.abs();
        prop_assert!(((d[2] - d[3]) - (mu - y)).abs() <= 1e-12 * scale);
    }
}

/// Random internally positive stable cascade with relative degree >= 2,
/// so the gain bound is typically finite.
fn random_cascade(rng: &mut ChaCha8Rng, n: usize) -> LtiSystem<f64> {
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        a[(i, i)] = -rng.gen_range(0.2..3.0);
        if i > 0 {
            a[(i, i - 1)] = rng.gen_range(0.2..3.0);
        }
    }
    // sprinkle a weak extra nonnegative coupling
    if n > 2 {
        a[(0, n - 1)] += rng.gen_range(0.0..0.05);
    }
    let mut b = DVector::zeros(n);
    b[0] = rng.gen_range(0.2..2.0);
    let mut c = RowDVector::zeros(n);
    c[n - 1] = rng.gen_range(0.2..2.0);
    LtiSystem::new(a, b, c).unwrap()
}

#[test]
fn crossing_agrees_with_eigenvalues_on_random_positive_systems() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut checked = 0;
    while checked < 20 {
        let n = rng.gen_range(2..=4usize);
        let sys = random_cascade(&mut rng, n);
        assert!(sys.is_internally_positive());
        if !sys.a_is_hurwitz().unwrap() {
            continue;
        }
        let bound = k_bar_inf(&sys).unwrap();
        if !bound.value.is_finite() {
            continue;
        }
        let below = local_stability(&m_matrix(&sys, 0.99 * bound.value, false)).unwrap();
        let above = local_stability(&m_matrix(&sys, 1.01 * bound.value, false)).unwrap();
        assert!(below.max_real_part < 0.0, "M(0.99 k_bar) not Hurwitz");
        assert!(above.max_real_part > 0.0, "M(1.01 k_bar) still Hurwitz");
        checked += 1;
    }
}

#[test]
fn steady_state_round_trips() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..5 {
        let sis = Sis::<f64> {
            beta: rng.gen_range(0.3..2.0),
            n_total: rng.gen_range(20.0..200.0),
        };
        let sys = sis.nonlinear();
        let map = steady_state_map(&sys, sis.steady_state_u_range(), &sis.steady_state_seed())
            .unwrap();
        for _ in 0..5 {
            let mu = rng.gen_range(0.05..0.9) * sis.n_total;
            let u = map.invert(mu).unwrap();
            assert!((map.output(u).unwrap() - mu).abs() <= 1e-8 * (1.0 + mu.abs()));
        }

        let rt = RepressedTranslation::<f64> {
            k1: rng.gen_range(0.5..3.0),
            k2: rng.gen_range(0.5..3.0),
            gamma1: rng.gen_range(0.3..2.0),
            gamma2: rng.gen_range(0.3..2.0),
        };
        let sys = rt.nonlinear();
        let map =
            steady_state_map(&sys, rt.steady_state_u_range(), &rt.steady_state_seed()).unwrap();
        let y_max = rt.k1 * rt.k2 / (rt.gamma1 * rt.gamma2);
        for _ in 0..5 {
            let mu = rng.gen_range(0.05..0.5) * y_max;
            let u = map.invert(mu).unwrap();
            assert!((map.output(u).unwrap() - mu).abs() <= 1e-8 * (1.0 + mu.abs()));
        }
    }
}

#[test]
fn normalized_transfer_has_unit_dc_everywhere() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..20 {
        let sys = Maturation::<f64> {
            k1: 1.0,
            k2: rng.gen_range(0.2..5.0),
            k3: rng.gen_range(0.2..5.0),
            gamma1: rng.gen_range(0.2..5.0),
            gamma2: rng.gen_range(0.2..5.0),
            gamma3: rng.gen_range(0.2..5.0),
        }
        .lti();
        let hn = sys.normalized_transfer().unwrap();
        let dc = hn.num.eval(0.0) / hn.den.eval(0.0);
        assert!((dc - 1.0).abs() < 1e-12);
    }
}
