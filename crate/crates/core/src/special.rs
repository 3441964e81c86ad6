//! Exponentially scaled modified Bessel function of order zero.

/// `e^{-z} I0(z)` for `z >= 0`.
pub fn bessel_i0_scaled(z: f64) -> f64 {
    let z = z.abs();
    if z <= 20.0 {
        let q = 0.25 * z * z;
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = 1.0;
        while term > 1e-17 * sum {
            term *= q / (k * k);
            sum += term;
            k += 1.0;
        }
        sum * (-z).exp()
    } else {
        // e^{-z} I0(z) ~ (2 pi z)^{-1/2} sum ((2k-1)!!)^2 / (k! (8z)^k)
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..30 {
            let kf = k as f64;
            let next = term * (2.0 * kf - 1.0).powi(2) / (kf * 8.0 * z);
            if next.abs() >= term.abs() || next < 1e-17 * sum {
                break;
            }
            term = next;
            sum += term;
        }
        sum / (2.0 * std::f64::consts::PI * z).sqrt()
    }
}
