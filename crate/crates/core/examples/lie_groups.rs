//! SE2(3) exponential and logarithm, composition and the adjoint.

use nalgebra::Vector3;
use se23nav::lie::{se23_exp, se23_log, so3_exp, so3_log, Twist9};

fn main() -> se23nav::Result<()> {
    let phi = Vector3::new(0.3, -0.2, 1.1);
    let r = so3_exp(&phi);
    println!("so3 log(exp(phi)) - phi = {:.2e}", (so3_log(&r)? - phi).norm());

    let xi = Twist9::new(phi, Vector3::new(4.0, 0.5, -0.1), Vector3::new(100.0, -30.0, 2.0));
    let x = se23_exp(&xi);
    let back = se23_log(&x)?;
    println!("se23 log(exp(xi)) - xi = {:.2e}", (back.to_vector() - xi.to_vector()).norm());

    let y = se23_exp(&Twist9::new(Vector3::new(0.0, 0.0, 0.2), Vector3::new(1.0, 0.0, 0.0), Vector3::zeros()));
    let xy = x * y;
    let id = xy * xy.inverse();
    println!("X Y (X Y)^-1 is identity to {:.2e}", (id.to_matrix() - nalgebra::SMatrix::<f64, 5, 5>::identity()).amax());

    // Ad_X xi = log(X exp(xi) X^-1) for small xi
    let small = Twist9::new(Vector3::new(1e-4, 0.0, 2e-4), Vector3::new(1e-3, 0.0, 0.0), Vector3::new(0.0, 1e-3, 0.0));
    let conj = se23_log(&(x * se23_exp(&small) * x.inverse()))?;
    let lin = x.adjoint() * small.to_vector();
    println!("adjoint vs conjugation: {:.2e}", (conj.to_vector() - lin).norm());
    Ok(())
}
