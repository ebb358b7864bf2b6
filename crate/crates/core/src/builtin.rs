//! Named systems used throughout the tests and the CLI.

use crate::geometry::{SelfSimilarSystem, Similarity};
use crate::scale::Ratio;

fn rat(p: i64, q: i64) -> Ratio {
    Ratio::rational(p, q).expect("builtin ratio")
}

fn system(ratios: Vec<Ratio>, translations: Vec<Vec<f64>>) -> SelfSimilarSystem {
    let maps = ratios
        .into_iter()
        .zip(translations)
        .map(|(r, t)| Similarity::scaled_shift(r, t).expect("builtin map"))
        .collect();
    SelfSimilarSystem::new(maps).expect("builtin system")
}

/// The golden ratio φ = (1 + √5)/2.
pub fn phi() -> f64 {
    (1.0 + 5f64.sqrt()) / 2.0
}

/// Middle-thirds Cantor set: x/3, x/3 + 2/3.
pub fn cantor() -> SelfSimilarSystem {
    system(vec![rat(1, 3), rat(1, 3)], vec![vec![0.0], vec![2.0 / 3.0]])
}

/// Nonlattice golden system: x/2 + 1/2 and 2^{−φ}·x.
pub fn golden() -> SelfSimilarSystem {
    let small = Ratio::power(2.0, -phi()).expect("2^-φ");
    system(vec![rat(1, 2), small], vec![vec![0.5], vec![0.0]])
}

/// Sierpinski gasket with unit side.
pub fn sierpinski() -> SelfSimilarSystem {
    system(
        vec![rat(1, 2), rat(1, 2), rat(1, 2)],
        vec![vec![0.0, 0.0], vec![0.5, 0.0], vec![0.25, 3f64.sqrt() / 4.0]],
    )
}

/// Four corner squares of ratio 1/4 in the unit square.
pub fn f1() -> SelfSimilarSystem {
    system(
        vec![rat(1, 4); 4],
        vec![vec![0.0, 0.0], vec![0.75, 0.0], vec![0.75, 0.75], vec![0.0, 0.75]],
    )
}

/// [0, 1] as the attractor of x/2 and x/2 + 1/2.
pub fn interval() -> SelfSimilarSystem {
    system(vec![rat(1, 2), rat(1, 2)], vec![vec![0.0], vec![0.5]])
}

/// Looks a builtin up by name.
pub fn by_name(name: &str) -> Option<SelfSimilarSystem> {
    Some(match name {
        "cantor" => cantor(),
        "golden" => golden(),
        "sierpinski" => sierpinski(),
        "f1" => f1(),
        "interval" => interval(),
        _ => return None,
    })
}

pub const NAMES: [&str; 5] = ["cantor", "golden", "sierpinski", "f1", "interval"];
