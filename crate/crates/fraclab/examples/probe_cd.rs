//! Scratch probe: trace-constant descent with corner-bubble initialization.

use std::sync::Arc;

use fraclab::domain::{build_grid, partition_boundary, DomainSpec, FaceSelection, GridFunction};
use fraclab::fractional::{cd_constant_with_inits, sobolev_constant};
use fraclab::operator::{assemble, eigendecompose, ModeCount};

fn main() -> fraclab::Result<()> {
    for faces in [vec!["left"], vec!["left", "right"], vec!["left:0.5"]] {
        println!("dirichlet = {faces:?}");
        let grid = build_grid(&DomainSpec::unit_square(33))?;
        let sels: Vec<FaceSelection> = faces
            .iter()
            .map(|f| FaceSelection::parse(f))
            .collect::<fraclab::Result<_>>()?;
        let part = partition_boundary(&grid, &sels)?;
        let lap = Arc::new(assemble(&grid, &part)?);
        let basis = eigendecompose(&lap, ModeCount::Full)?;

        // Neumann corner farthest from the Dirichlet set: for left-ish
        // Dirichlet data that is the corner (1, 1) or (1, 0).
        for &s in &[0.6, 0.75, 0.9] {
            let eps = 2.0 * grid.h[0];
            let exponent = 1.0 - s;
            let corner = [1.0, 1.0];
            let bubble = GridFunction::from_fn(&grid, |x, y| {
                let r2 = (x - corner[0]).powi(2) + (y - corner[1]).powi(2);
                (eps * eps + r2).powf(-exponent)
            });
            let phi1 = basis.mode(0);
            let abs_phi1 =
                GridFunction::new(&grid, phi1.values.iter().map(|v| v.abs()).collect());
            let from_phi1 = cd_constant_with_inits(&basis, s, &[abs_phi1.clone()])?;
            let from_bubble = cd_constant_with_inits(&basis, s, &[bubble.clone()])?;
            let both = cd_constant_with_inits(&basis, s, &[abs_phi1, bubble])?;
            let bound = 2.0_f64.powf(-s) * sobolev_constant(2, s)?;
            println!(
                "  s={s}: phi1-init {:.4} | bubble-init {:.4} | best {:.4} | bound {:.4} {}",
                from_phi1.value,
                from_bubble.value,
                both.value,
                bound,
                if both.value <= bound + 1e-6 { "OK" } else { "ABOVE" }
            );
        }
    }
    Ok(())
}
