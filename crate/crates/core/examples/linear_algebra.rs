//! Small symmetric matrices: Sylvester test, inversion, conditioning.

use semimix::smallmat::SymMatrix;

fn main() -> semimix::Result<()> {
    let a = SymMatrix::new(
        4,
        vec![
            4.0, 1.0, 0.5, 0.2, //
            1.0, 3.0, 0.3, 0.1, //
            0.5, 0.3, 2.0, 0.4, //
            0.2, 0.1, 0.4, 1.0,
        ],
    )?;
    println!("positive definite: {}", a.is_spd_sylvester());
    let block = a.invert()?;
    let elim = a.invert_elimination()?;
    let diff = block
        .as_slice()
        .iter()
        .zip(elim.as_slice())
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    println!("block vs elimination inverse: max difference {diff:.2e}");
    println!("condition estimate: {:.3}", a.condition_estimate());
    println!("solve A x = 1: {:?}", a.solve(&[1.0; 4])?);

    let indefinite = SymMatrix::diag(&[1.0, 2.0, -0.5]);
    println!("diag(1, 2, -0.5) positive definite: {}", indefinite.is_spd_sylvester());
    Ok(())
}
