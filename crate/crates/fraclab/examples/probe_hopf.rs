//! Scratch probe: mesh stability of the family-minimum Hopf constant.

use std::sync::Arc;

use fraclab::domain::{
    build_grid, distance_field, make_bump, partition_boundary, DomainSpec, FaceSelection,
    GridFunction,
};
use fraclab::fractional::frac_solve;
use fraclab::maxprinciple::hopf_lower;
use fraclab::operator::{assemble, eigendecompose, ModeCount};

fn main() -> fraclab::Result<()> {
    let dirichlet = ["left", "bottom"].map(|f| FaceSelection::parse(f).unwrap());
    let centers = [
        [0.3, 0.3],
        [0.3, 0.7],
        [0.7, 0.3],
        [0.7, 0.7],
        [0.5, 0.5],
        [0.35, 0.55],
        [0.55, 0.35],
        [0.65, 0.5],
        [0.5, 0.65],
        [0.4, 0.45],
    ];
    for &s in &[0.6, 0.75, 0.9] {
        print!("s={s}: ");
        for &n in &[25usize, 33, 41, 49] {
            let grid = build_grid(&DomainSpec::unit_square(n))?;
            let part = partition_boundary(&grid, &dirichlet)?;
            let lap = Arc::new(assemble(&grid, &part)?);
            let basis = eigendecompose(&lap, ModeCount::Full)?;
            let dist = distance_field(&grid);
            let v = frac_solve(&basis, &GridFunction::constant(&grid, 1.0), s)?;
            let mut min_c = f64::INFINITY;
            for c in &centers {
                let f = make_bump(&grid, c, 0.12)?;
                let u = frac_solve(&basis, &f, s)?;
                let rep = hopf_lower(&u, &v, &f, &dist)?;
                min_c = min_c.min(rep.c_emp);
            }
            print!("n={n}: {min_c:.5}  ");
        }
        println!();
    }
    Ok(())
}
