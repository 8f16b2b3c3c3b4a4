//! Parallel versions of the core sweeps. Results match the sequential ones
//! cell for cell.

use foldsaddle_core::bifurcation::{
    cell_center, classify_case, collect_polylines, sphere_directions, sweep_row, Diagram, SphereSample, CLASSIFY_TOL,
};
use foldsaddle_core::TauKind;
use rayon::prelude::*;

pub fn sweep_grid(tau: TauKind, alpha: f64, lambda_range: (f64, f64), beta_range: (f64, f64), resolution: (usize, usize)) -> Diagram {
    let (nl, nb) = (resolution.0.max(1), resolution.1.max(1));
    let db = (beta_range.1 - beta_range.0) / nb as f64;
    let rows: Vec<_> = (0..nb)
        .into_par_iter()
        .map(|r| {
            let beta = cell_center(beta_range, r, nb);
            let (cells, bs) = sweep_row(tau, alpha, lambda_range, nl, beta, db);
            (beta, cells, bs)
        })
        .collect();
    let mut cells = Vec::with_capacity(nl * nb);
    let mut lines = Vec::with_capacity(nb);
    for (beta, row, bs) in rows {
        cells.extend(row);
        lines.push((beta, bs));
    }
    Diagram { tau, alpha, lambda_range, beta_range, resolution: (nl, nb), cells, polylines: collect_polylines(&lines) }
}

pub fn sweep_sphere(tau: TauKind, radius: f64, samples: usize) -> Vec<SphereSample> {
    sphere_directions(samples)
        .into_par_iter()
        .map(|d| {
            let (lambda, alpha, beta) = (radius * d[0], radius * d[1] - 1.0, radius * d[2]);
            let label = classify_case(tau, lambda, alpha, beta, CLASSIFY_TOL).ok();
            SphereSample { direction: d, lambda, alpha, beta, label }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_sequential() {
        let a = sweep_grid(TauKind::Inv, -1.0, (-0.9, 0.9), (-0.6, 0.6), (9, 6));
        let b = foldsaddle_core::bifurcation::sweep_grid(TauKind::Inv, -1.0, (-0.9, 0.9), (-0.6, 0.6), (9, 6));
        assert_eq!(a, b);
        let s = sweep_sphere(TauKind::Vis, 0.1, 50);
        assert_eq!(s, foldsaddle_core::bifurcation::sweep_sphere(TauKind::Vis, 0.1, 50));
    }
}
