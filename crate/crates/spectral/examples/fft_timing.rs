use eulerbench_spectral::{Grid, ScalarField};
use std::time::Instant;
fn main() {
    for n in [32usize, 48, 64] {
        let g = Grid::new(n).unwrap();
        let f = ScalarField::from_fn(g, |x| (x[0] + x[1]).sin() * x[2].cos());
        let _ = f.spectrum();
        let t = Instant::now();
        let reps = 20;
        for _ in 0..reps {
            let h = ScalarField::from_values_unchecked(g, f.values().to_vec());
            let s = h.spectrum();
            let _ = s.to_field();
        }
        println!("n={n}: {:.2} ms per fwd+inv", t.elapsed().as_secs_f64() * 1e3 / reps as f64);
    }
}
