//! Quadrature on the uniform solver grid.

/// Composite Simpson rule for samples on a uniform grid with spacing `h`.
///
/// An odd number of intervals is handled by closing the last three
/// intervals with Simpson's 3/8 rule, so the rule stays fourth order for
/// any sample count >= 4.
pub fn simpson(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    match n {
        0 | 1 => 0.0,
        2 => 0.5 * h * (values[0] + values[1]),
        3 => h / 3.0 * (values[0] + 4.0 * values[1] + values[2]),
        _ => {
            if (n - 1).is_multiple_of(2) {
                return simpson_even(values, h);
            }
            let split = n - 4;
            let head = if split > 0 { simpson_even(&values[..=split], h) } else { 0.0 };
            let t = &values[split..];
            head + 3.0 * h / 8.0 * (t[0] + 3.0 * t[1] + 3.0 * t[2] + t[3])
        }
    }
}

fn simpson_even(values: &[f64], h: f64) -> f64 {
    let last = values.len() - 1;
    let mut odd = 0.0;
    let mut even = 0.0;
    for (i, v) in values.iter().enumerate().take(last).skip(1) {
        if i % 2 == 1 {
            odd += v;
        } else {
            even += v;
        }
    }
    h / 3.0 * (values[0] + values[last] + 4.0 * odd + 2.0 * even)
}

/// Simpson quadrature of `f(i)` over grid indices `0..n`.
pub fn simpson_by<F: Fn(usize) -> f64>(n: usize, h: f64, f: F) -> f64 {
    let values: Vec<f64> = (0..n).map(f).collect();
    simpson(&values, h)
}
