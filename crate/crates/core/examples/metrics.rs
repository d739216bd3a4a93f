//! Error and fit-quality metrics on a small hand-made example.

use rolsh::eval::{mse, r_squared_paper, r_squared_standard};

fn main() -> rolsh::Result<()> {
    let y = [3.0, -0.5, 2.0, 7.0];
    let yhat = [2.5, 0.0, 2.0, 8.0];
    println!("mse                       {}", mse(&y, &yhat)?);
    println!("r2 explained / total      {}", r_squared_paper(&y, &yhat)?);
    println!("r2 (1 - ss_res / ss_tot)  {}", r_squared_standard(&y, &yhat)?);

    // the explained-variance form is not capped at 1 for non-OLS predictions
    // a constant target has no variance to explain
    let flat = [1.0, 1.0, 1.0];
    println!("constant target: {:?}", r_squared_standard(&flat, &[1.0, 1.1, 0.9]));
    Ok(())
}
