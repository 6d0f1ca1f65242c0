//! Scratch probe: Dirichlet-side conormal flux error vs (levels, grading).

use std::sync::Arc;

use fraclab::domain::{build_grid, partition_boundary, DomainSpec, FaceSelection};
use fraclab::extension::{build_cylinder, conormal_flux, default_height, extend_dirichlet};
use fraclab::operator::{assemble, eigendecompose, ModeCount};

fn main() -> fraclab::Result<()> {
    let grid = build_grid(&DomainSpec::interval(1.0, 65))?;
    let part = partition_boundary(&grid, &[FaceSelection::parse("left")?])?;
    let lap = Arc::new(assemble(&grid, &part)?);
    let basis = eigendecompose(&lap, ModeCount::Full)?;
    let phi1 = basis.mode(0);
    let lam1 = basis.eigenvalues[0];
    for &s in &[0.9] {
        println!("s = {s}  (default beta = {})", 3.0 / (2.0 * s));
        for &m in &[16usize, 24, 32, 48] {
            print!("  M = {m:>3}: ");
            for &beta in &[3.0, 3.5, 4.0, 4.5] {
                let mesh = Arc::new(build_cylinder(
                    &lap,
                    s,
                    default_height(lam1),
                    m,
                    beta,
                )?);
                let ext = extend_dirichlet(&mesh, &phi1)?;
                let flux = conormal_flux(&ext);
                let expected = phi1.scaled(lam1.powf(s));
                let rel = flux.linf_diff(&expected) / expected.linf();
                print!("beta={beta:.2}: {rel:.4}  ");
            }
            println!();
        }
    }
    Ok(())
}
