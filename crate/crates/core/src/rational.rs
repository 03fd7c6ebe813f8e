//! Small rational helpers: continued-fraction approximation and lattice snapping.

pub use num_integer::{gcd, lcm};

/// Best rational approximation `p/q` of `x` with `q <= max_den`, from the convergents
/// and semiconvergents of the continued fraction of `x`.
pub fn best_rational(x: f64, max_den: u64) -> (i64, u64) {
    assert!(x.is_finite() && max_den >= 1);
    let sign = if x < 0.0 { -1 } else { 1 };
    let ax = x.abs();
    // convergents h/k
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut rem = ax;
    let max = max_den as i128;
    loop {
        let a = rem.floor();
        if a > 1e15 {
            break;
        }
        let a = a as i128;
        let h2 = a * h1 + h0;
        let k2 = a * k1 + k0;
        if k2 > max {
            // largest admissible semiconvergent
            let n = (max - k0) / k1;
            let (hs, ks) = (n * h1 + h0, n * k1 + k0);
            let err_s = (ax - hs as f64 / ks as f64).abs();
            let err_c = (ax - h1 as f64 / k1 as f64).abs();
            if ks > 0 && err_s < err_c {
                h1 = hs;
                k1 = ks;
            }
            break;
        }
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
        let frac = rem - rem.floor();
        if frac < 1e-15 * rem.max(1.0) {
            break;
        }
        rem = 1.0 / frac;
    }
    (sign * h1 as i64, k1 as u64)
}

/// Nearest integer to `x` and the signed residual `x - nearest`.
pub fn nearest_integer(x: f64) -> (i64, f64) {
    let n = x.round();
    (n as i64, x - n)
}
