//! Scratch probe: trace constant as the Dirichlet set shrinks.

use std::sync::Arc;

use fraclab::domain::{build_grid, partition_boundary, DomainSpec, FaceSelection, GridFunction};
use fraclab::fractional::cd_constant_with_inits;
use fraclab::operator::{assemble, eigendecompose, ModeCount};

fn main() -> fraclab::Result<()> {
    for frac in ["left:0.01", "left:0.1", "left:0.25", "left:0.5", "left"] {
        let grid = build_grid(&DomainSpec::unit_square(33))?;
        let part = partition_boundary(&grid, &[FaceSelection::parse(frac)?])?;
        let lap = Arc::new(assemble(&grid, &part)?);
        let basis = eigendecompose(&lap, ModeCount::Full)?;
        let lam1 = basis.eigenvalues[0];
        print!("{frac:>10}: alpha={:.4} lambda1={lam1:.4}", part.alpha);
        for &s in &[0.6, 0.9] {
            let phi1 = basis.mode(0);
            let abs_phi1 =
                GridFunction::new(&grid, phi1.values.iter().map(|v| v.abs()).collect());
            let res = cd_constant_with_inits(&basis, s, &[abs_phi1])?;
            print!("  s={s}: cd={:.4} (lam1^s={:.4})", res.value, lam1.powf(s));
        }
        println!();
    }
    Ok(())
}
