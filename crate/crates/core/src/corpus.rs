//! A fixed, mixed collection of densities for cross-checks and benchmarks.

use crate::density::{power_density, Density, PowerDensityParams};

/// Parametric densities from every built-in family plus one tabulated
/// triangle. Power shapes are kept at `gamma >= -0.25` so every entry lies in
/// `L^(1+alpha)` for `alpha <= 2`.
pub fn densities() -> Vec<Density> {
    let power = |gamma, theta| power_density(PowerDensityParams::new(gamma, theta).expect("valid power params"));
    let (triangle, _) = Density::piecewise_linear("triangle(0,1,2)", vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 0.0])
        .expect("valid triangle");
    vec![
        Density::uniform(0.0, 1.0).expect("uniform"),
        Density::uniform(0.0, 2.0).expect("uniform"),
        Density::uniform(-1.0, 3.0).expect("uniform"),
        Density::uniform(0.5, 1.5).expect("uniform"),
        Density::normal(0.0, 1.0).expect("normal"),
        Density::normal(0.5, 1.0).expect("normal"),
        Density::normal(0.0, 2.0).expect("normal"),
        Density::normal(-1.0, 0.5).expect("normal"),
        Density::exponential(1.0).expect("exponential"),
        Density::exponential(2.0).expect("exponential"),
        Density::exponential(0.5).expect("exponential"),
        power(-0.25, 1.0),
        power(0.5, 2.0),
        power(1.0, 1.0),
        power(2.0, 1.5),
        triangle,
    ]
}

/// Every ordered `(g, f)` pair of distinct entries of [`densities`].
pub fn distinct_pairs() -> Vec<(Density, Density)> {
    let ds = densities();
    let mut out = Vec::new();
    for (i, g) in ds.iter().enumerate() {
        for (j, f) in ds.iter().enumerate() {
            if i != j {
                out.push((g.clone(), f.clone()));
            }
        }
    }
    out
}
