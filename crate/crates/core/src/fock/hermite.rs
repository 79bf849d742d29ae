//! Normalized Hermite functions φₙ(x) = ⟨x|n⟩ for the ℏ = 1 oscillator.

use std::f64::consts::PI;

/// Fills `out[n] = φₙ(x)` for `n < out.len()` using the stable three-term recurrence.
pub fn hermite_functions_into(x: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = PI.powf(-0.25) * (-0.5 * x * x).exp();
    if out.len() > 1 {
        out[1] = std::f64::consts::SQRT_2 * x * out[0];
    }
    for n in 2..out.len() {
        let nf = n as f64;
        out[n] = (2.0 / nf).sqrt() * x * out[n - 1] - ((nf - 1.0) / nf).sqrt() * out[n - 2];
    }
}

pub fn hermite_functions(x: f64, count: usize) -> Vec<f64> {
    let mut out = vec![0.0; count];
    hermite_functions_into(x, &mut out);
    out
}

/// Table `t[g * count + n] = φₙ(x_g)` over a grid.
pub fn hermite_table(points: &[f64], count: usize) -> Vec<f64> {
    let mut table = vec![0.0; points.len() * count];
    for (g, &x) in points.iter().enumerate() {
        hermite_functions_into(x, &mut table[g * count..(g + 1) * count]);
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orthonormal_on_fine_grid() {
        let h = 0.005;
        let pts: Vec<f64> = (0..6001).map(|i| -15.0 + h * i as f64).collect();
        let count = 30;
        let t = hermite_table(&pts, count);
        for m in 0..count {
            for n in 0..count {
                let s: f64 = (0..pts.len()).map(|g| t[g * count + m] * t[g * count + n]).sum::<f64>() * h;
                let expect = if m == n { 1.0 } else { 0.0 };
                assert!((s - expect).abs() < 1e-10, "⟨{m}|{n}⟩ = {s}");
            }
        }
    }

    #[test]
    fn first_function_matches_closed_form() {
        for &x in &[-2.0, -0.3, 0.0, 1.7] {
            let phi = hermite_functions(x, 2);
            let closed = (2.0f64).sqrt() * x * PI.powf(-0.25) * (-x * x / 2.0).exp();
            assert!((phi[1] - closed).abs() < 1e-14);
        }
    }
}
