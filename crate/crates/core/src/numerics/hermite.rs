//! Physicists' Hermite polynomials.

/// H_n(x) by the three-term recurrence H_{n+1} = 2x H_n - 2n H_{n-1}.
pub fn hermite_poly(n: u32, x: f64) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0 * x,
        _ => {
            let mut h_prev = 1.0;
            let mut h = 2.0 * x;
            for k in 1..n {
                let next = 2.0 * x * h - 2.0 * k as f64 * h_prev;
                h_prev = h;
                h = next;
            }
            h
        }
    }
}
