//! Fixtures shared by the benchmarks.

use skein_core::bracket::{Braid, LinkDiagram};
use skein_core::qrep::omega_matrix;
use skein_core::traintrack::punctured_torus;

/// Closure of `(σ1 σ2^-1)^k` on three strands.
pub fn alternating_closure(k: usize) -> LinkDiagram {
    let word = [1, -2].repeat(k);
    Braid::new(3, word).expect("valid word").closure()
}

/// Intersection form of the punctured torus in its weight basis.
pub fn torus_omega() -> Vec<Vec<i64>> {
    let tt = punctured_torus();
    let basis = tt.weight_basis().expect("corpus surface");
    omega_matrix(&tt, &basis).expect("basis on track")
}
