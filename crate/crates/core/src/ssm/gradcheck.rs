use serde::{Deserialize, Serialize};

use super::selective::{selective_scan, selective_scan_backward, SelectiveInputs};
use crate::rng::Rng;

/// Central-difference step.
pub const FD_STEP: f64 = 1e-4;
/// Denominator floor of the relative error.
pub const REL_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradcheckReport {
    pub len: usize,
    pub state_size: usize,
    pub seed: u64,
    pub perturbations: usize,
    pub max_rel_error: f64,
    /// Field and flat index holding the worst component.
    pub worst: String,
}

/// Random instance: `a` mostly in [-2, -0.01] with an occasional near-zero
/// rate to cover the series branch, `delta` in [0.1, 1], the rest in [-1, 1].
pub fn random_selective_inputs(len: usize, state: usize, rng: &mut Rng) -> SelectiveInputs {
    let a = (0..state)
        .map(|_| {
            if rng.below(8) == 0 {
                rng.uniform_f64(-1e-5, 1e-5)
            } else {
                rng.uniform_f64(-2.0, -0.01)
            }
        })
        .collect();
    let mut unit = |n: usize| (0..n).map(|_| rng.uniform_f64(-1.0, 1.0)).collect::<Vec<_>>();
    let x = unit(len);
    let b = unit(len * state);
    let c = unit(len * state);
    let delta = (0..len).map(|_| rng.uniform_f64(0.1, 1.0)).collect();
    SelectiveInputs { a, x, delta, b, c }
}

fn loss(s: &SelectiveInputs, dy: &[f64]) -> f64 {
    selective_scan(s).iter().zip(dy).map(|(y, g)| y * g).sum()
}

/// Compares analytic gradients of `sum_t dy_t * y_t` against central finite
/// differences on every input component of a seeded random instance.
pub fn gradcheck(len: usize, state: usize, seed: u64) -> GradcheckReport {
    let mut rng = Rng::new(seed);
    let s = random_selective_inputs(len.max(1), state.max(1), &mut rng);
    let dy: Vec<f64> = (0..s.len()).map(|_| rng.uniform_f64(-1.0, 1.0)).collect();
    let g = selective_scan_backward(&s, &dy).expect("dy matches length");

    let mut report = GradcheckReport {
        len: s.len(),
        state_size: s.state_size(),
        seed,
        perturbations: 0,
        max_rel_error: 0.0,
        worst: String::new(),
    };

    type Field = fn(&mut SelectiveInputs) -> &mut Vec<f64>;
    let fields: [(&str, Field, &[f64]); 5] = [
        ("x", |s| &mut s.x, &g.d_x),
        ("delta", |s| &mut s.delta, &g.d_delta),
        ("b", |s| &mut s.b, &g.d_b),
        ("c", |s| &mut s.c, &g.d_c),
        ("a", |s| &mut s.a, &g.d_a),
    ];
    let mut probe = s.clone();
    for (name, field, analytic) in fields {
        for (k, &an) in analytic.iter().enumerate() {
            let orig = field(&mut probe)[k];
            field(&mut probe)[k] = orig + FD_STEP;
            let up = loss(&probe, &dy);
            field(&mut probe)[k] = orig - FD_STEP;
            let down = loss(&probe, &dy);
            field(&mut probe)[k] = orig;

            let fd = (up - down) / (2.0 * FD_STEP);
            let rel = (an - fd).abs() / an.abs().max(fd.abs()).max(REL_FLOOR);
            report.perturbations += 1;
            if rel > report.max_rel_error || report.worst.is_empty() {
                report.max_rel_error = rel.max(report.max_rel_error);
                report.worst = format!("{name}[{k}]");
            }
        }
    }
    report
}
