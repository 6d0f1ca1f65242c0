//! Cross-validates the two routes to the fractional solve: the cylinder
//! extension's trace against the spectral solution, over a refinement
//! ladder, plus the energy-isometry error.
//!
//! Run with `cargo run --release --example extension_oracle`.

use std::sync::Arc;

use fraclab::domain::{build_grid, make_bump, partition_boundary, DomainSpec, FaceSelection};
use fraclab::extension::{
    build_cylinder, default_grading, default_height, energy, extend_dirichlet, extend_neumann,
};
use fraclab::fractional::{frac_solve, hs_norm};
use fraclab::operator::{assemble, eigendecompose, ModeCount};

fn main() -> fraclab::Result<()> {
    let ladder = [(17usize, 12usize), (25, 24), (33, 48)];
    let dirichlet = ["left", "bottom"].map(|f| FaceSelection::parse(f).unwrap());

    for &s in &[0.6, 0.75, 0.9] {
        println!("s = {s}");
        println!(
            "  {:>7} {:>7} {:>12} {:>12}",
            "base", "levels", "trace err", "isometry err"
        );
        for &(n, m) in &ladder {
            let grid = build_grid(&DomainSpec::unit_square(n))?;
            let part = partition_boundary(&grid, &dirichlet)?;
            let lap = Arc::new(assemble(&grid, &part)?);
            let basis = eigendecompose(&lap, ModeCount::Full)?;
            let mesh = Arc::new(build_cylinder(
                &lap,
                s,
                default_height(basis.eigenvalues[0]),
                m,
                default_grading(s),
            )?);

            let f = make_bump(&grid, &[0.55, 0.55], 0.2)?;
            let spectral = frac_solve(&basis, &f, s)?;
            let ext = extend_neumann(&mesh, &f)?;
            let trace_err = ext.trace().linf_diff(&spectral) / spectral.linf();

            let u = make_bump(&grid, &[0.5, 0.6], 0.25)?;
            let lifted = extend_dirichlet(&mesh, &u)?;
            let hs2 = hs_norm(&basis, &u, s).powi(2);
            let iso_err = (energy(&lifted) - hs2).abs() / hs2;

            println!("  {n:>5}^2 {m:>7} {trace_err:>12.5} {iso_err:>12.5}");
        }
    }
    Ok(())
}
