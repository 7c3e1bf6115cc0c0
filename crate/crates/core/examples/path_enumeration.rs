//! Enumerate closed lattice paths, inspect their exponent profiles and rebuild
//! `Tr T^r` from path weights.
//!
//! ```text
//! cargo run --release --example path_enumeration -- [r]
//! ```

use gbe_lab::model::build_gbe;
use gbe_lab::paths::{admissible_window, enumerate_closed, enumerate_motzkin, exponent_profile, path_weight};
use gbe_lab::randsrc::RngStream;

fn main() -> gbe_lab::Result<()> {
    let r: usize = std::env::args().nth(1).map_or(4, |a| a.parse().expect("r"));
    let closed = enumerate_closed(r)?;
    let motzkin = enumerate_motzkin(r)?;
    println!("length {r}: {} closed paths, {} Motzkin paths", closed.len(), motzkin.len());

    for w in motzkin.iter().take(12) {
        let prof = exponent_profile(w);
        let entries: Vec<String> = prof
            .entries()
            .map(|(level, a, g)| format!("{level}:a^{a} b^{g}"))
            .collect();
        println!("  {w:<10} levels {:?}  {}", w.levels(), entries.join(" "));
    }

    let n = 8;
    let t = build_gbe(n, 2.0, &mut RngStream::new(5, 0))?;
    let mut trace = 0.0;
    for w in &closed {
        for j in admissible_window(w, n).starts() {
            trace += path_weight(w, j, &t)?;
        }
    }
    // dense power for comparison
    let mut m = vec![vec![0.0; n]; n];
    for i in 0..n {
        m[i][i] = t.a(i + 1);
        if i + 1 < n {
            m[i][i + 1] = t.b(i + 1);
            m[i + 1][i] = t.b(i + 1);
        }
    }
    let mut p = m.clone();
    for _ in 1..r {
        p = (0..n)
            .map(|i| (0..n).map(|j| (0..n).map(|k| p[i][k] * m[k][j]).sum()).collect())
            .collect();
    }
    let dense: f64 = (0..n).map(|i| p[i][i]).sum();
    println!("n = {n}: path sum {trace:.12}, dense Tr T^{r} {dense:.12}");
    Ok(())
}
