//! Relative errors of the mortar solution on the two-patch square under
//! uniform refinement.

use iga_mortar_core::builtin;
use iga_mortar_core::pipeline::{loglog_slope, run, RunOptions};
use iga_mortar_core::topology::MultiPatchTopology;

fn main() -> Result<(), iga_mortar_core::Error> {
    let topo = MultiPatchTopology::new(builtin::square2())?;
    let mut rows = Vec::new();
    println!(
        "{:>10} {:>6} {:>10} {:>10} {:>10} {:>10}",
        "h", "dofs", "brokenH2", "H1", "L2", "Linf"
    );
    for levels in 2..=5 {
        let r = run(
            &topo,
            &RunOptions {
                levels,
                ..RunOptions::default()
            },
        )?;
        let e = r.errors;
        println!(
            "{:>10.3e} {:>6} {:>10.3e} {:>10.3e} {:>10.3e} {:>10.3e}",
            e.h, e.dofs, e.broken_h2, e.h1, e.l2, e.linf
        );
        rows.push(e);
    }
    let h: Vec<f64> = rows.iter().map(|e| e.h).collect();
    let l2: Vec<f64> = rows.iter().map(|e| e.l2).collect();
    println!("L2 slope {:.3}", loglog_slope(&h, &l2));
    Ok(())
}
