//! Dual-number derivatives against central finite differences. The dual
//! results are exact up to rounding; the finite-difference comparison is a
//! sanity net over every primitive, at seeded sample points away from the
//! singular loci.

use darboux::HyperDual;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const STEP: f64 = 1e-5;
/// Second differences divide by the step squared, so they need a larger
/// step to keep rounding error below the comparison tolerance.
const STEP2: f64 = 1e-3;
const REL_TOL: f64 = 1e-6;

fn close(dual: f64, fd: f64) -> bool {
    let scale = dual.abs().max(fd.abs()).max(1.0);
    (dual - fd).abs() <= REL_TOL * scale
}

/// Check d1 and d12 of a scalar function of one seeded variable against
/// central differences of the plain values.
fn check_univariate(name: &str, f: impl Fn(HyperDual) -> HyperDual, x: f64) {
    let value = |v: f64| f(HyperDual::constant(v)).val;
    let seeded = f(HyperDual::new(x, 1.0, 1.0, 0.0));

    let fd1 = (value(x + STEP) - value(x - STEP)) / (2.0 * STEP);
    assert!(
        close(seeded.d1, fd1),
        "{name} first derivative at {x}: dual {} vs fd {fd1}",
        seeded.d1
    );

    // Richardson-extrapolated second difference: the bare quotient is not
    // accurate enough where the fourth derivative is large.
    let d2 = |h: f64| (value(x + h) - 2.0 * value(x) + value(x - h)) / (h * h);
    let fd2 = (4.0 * d2(STEP2 / 2.0) - d2(STEP2)) / 3.0;
    assert!(
        close(seeded.d12, fd2),
        "{name} second derivative at {x}: dual {} vs fd {fd2}",
        seeded.d12
    );
}

#[test]
fn exponential_against_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..100 {
        let x = rng.gen_range(-2.0..2.0);
        check_univariate("exp", |v| v.exp(), x);
    }
}

#[test]
fn logarithm_against_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    for _ in 0..100 {
        let x = rng.gen_range(0.1..4.0);
        check_univariate("ln", |v| v.ln().unwrap(), x);
    }
}

#[test]
fn square_root_against_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    for _ in 0..100 {
        let x = rng.gen_range(0.1..4.0);
        check_univariate("sqrt", |v| v.sqrt().unwrap(), x);
    }
}

#[test]
fn reciprocal_against_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(45);
    for _ in 0..100 {
        let mut x: f64 = rng.gen_range(-3.0..3.0);
        if x.abs() < 0.2 {
            x += 0.5;
        }
        check_univariate("recip", |v| v.recip().unwrap(), x);
    }
}

#[test]
fn integer_powers_against_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(46);
    for n in [-3i32, -1, 0, 2, 3, 5] {
        for _ in 0..100 {
            let mut x: f64 = rng.gen_range(-2.0..2.0);
            if n < 0 && x.abs() < 0.3 {
                x += 1.0;
            }
            check_univariate("powi", |v| v.powi(n).unwrap(), x);
        }
    }
}

#[test]
fn fractional_powers_against_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(47);
    for k in [-5.0 / 3.0, -2.0 / 3.0, 0.5, 1.5, 2.75] {
        for _ in 0..100 {
            let x = rng.gen_range(0.2..3.0);
            check_univariate("powf", |v| v.powf(k).unwrap(), x);
        }
    }
}

#[test]
fn dual_exponent_power_against_finite_differences() {
    // a^b with both slots seeded, via the mixed d12 of f(x) = x^(c + x).
    let mut rng = ChaCha8Rng::seed_from_u64(48);
    for _ in 0..100 {
        let c = rng.gen_range(0.5..2.0);
        let x = rng.gen_range(0.5..2.0);
        check_univariate("pow", |v| v.pow(v + c).unwrap(), x);
    }
}

#[test]
fn quotients_and_products_against_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(49);
    for _ in 0..100 {
        let a = rng.gen_range(0.3..2.0);
        check_univariate("mixed", |v| (v * v + 1.0).div(v.exp() + 2.0).unwrap(), a);
    }
}

#[test]
fn mixed_partial_of_a_two_variable_function() {
    // f(x, y) = exp(x) ln(y): seed x in d1, y in d2, read d12 = exp(x)/y.
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    for _ in 0..100 {
        let x = rng.gen_range(-1.0..1.0);
        let y = rng.gen_range(0.3..3.0);
        let xd = HyperDual::new(x, 1.0, 0.0, 0.0);
        let yd = HyperDual::new(y, 0.0, 1.0, 0.0);
        let f = xd.exp() * yd.ln().unwrap();
        let exact = x.exp() / y;
        assert!(
            close(f.d12, exact),
            "mixed partial {} vs exact {exact}",
            f.d12
        );

        let g = |xv: f64, yv: f64| xv.exp() * yv.ln();
        let m = |h: f64| {
            (g(x + h, y + h) - g(x + h, y - h) - g(x - h, y + h) + g(x - h, y - h))
                / (4.0 * h * h)
        };
        let fd = (4.0 * m(STEP2 / 2.0) - m(STEP2)) / 3.0;
        assert!(close(f.d12, fd), "mixed partial {} vs fd {fd}", f.d12);
    }
}
