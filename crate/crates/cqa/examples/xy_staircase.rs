//! Magnetization staircase of the XY ring with an auxiliary Z field.
//!
//! For each chain size the global ground state starts in the M_z = 0
//! sector at B = 0 and climbs the staircase as B/J grows, saturating at
//! full polarization. `find_aux_field` reads the field strength that
//! steers the ground state into a requested sector off this staircase.
//!
//! ```bash
//! cargo run --release --example xy_staircase
//! ```

use cqa::drivers::{find_aux_field, AuxField};
use cqa::spectral::{linear_grid, magnetization_curve};

fn main() -> cqa::Result<()> {
    let grid = linear_grid(2.5, 26);

    for n in [4usize, 6, 8, 10, 12] {
        let curve = magnetization_curve(n, &grid)?;
        println!("n = {n}:  B/J        Mz   E0/(Jn)");
        let mut last_mz = i64::MIN;
        for i in 0..grid.len() {
            // print one line per step of the staircase
            if curve.mz[i] != last_mz {
                last_mz = curve.mz[i];
                println!(
                    "       {:6.3}  ->  {:3}   {:+.6}",
                    curve.b_over_j[i], curve.mz[i], curve.e0_density[i]
                );
            }
        }
        println!();
    }

    // steering the ground state into the sector a constraint requires
    let n = 8;
    for target in [0i64, 2, 4, 8] {
        match find_aux_field(n, target, 1.0)? {
            AuxField::Found { b, window } => println!(
                "n = {n}: ground state reaches M_z = {target} at B = {b:.4} (window {:.4} .. {:.4})",
                window.0, window.1
            ),
            AuxField::NotFound { attainable } => {
                println!("n = {n}: M_z = {target} is never the global minimum; attainable: {attainable:?}")
            }
        }
    }
    Ok(())
}
