use super::NoiseError;

fn check_a(a: f64) -> Result<(), NoiseError> {
    if !(0.0..1.0).contains(&a) {
        return Err(NoiseError::InvalidParam(format!(
            "coloring parameter must be in [0, 1), got {a}"
        )));
    }
    Ok(())
}

/// First-order coloring filter `G(z) = sqrt(1 - a^2) / (1 - a z^-1)`.
///
/// `y[0] = x[0]`, `y[n] = a y[n-1] + sqrt(1 - a^2) x[n]`. Starting from
/// `x[0]` puts the recursion in its stationary state, so unit-variance white
/// input gives unit-variance output at every index. `a = 0` copies the input.
pub fn color(white: &[f64], a: f64) -> Result<Vec<f64>, NoiseError> {
    let mut out = white.to_vec();
    color_in_place(&mut out, a)?;
    Ok(out)
}

pub fn color_in_place(x: &mut [f64], a: f64) -> Result<(), NoiseError> {
    check_a(a)?;
    if a == 0.0 || x.is_empty() {
        return Ok(());
    }
    let gain = (1.0 - a * a).sqrt();
    for n in 1..x.len() {
        x[n] = a * x[n - 1] + gain * x[n];
    }
    Ok(())
}
