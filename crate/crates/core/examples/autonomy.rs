//! How much of each filter's error-propagation matrix depends on the
//! vehicle trajectory. The navigation block of the augmented right-invariant
//! filter is the same at any attitude, velocity and rate.

use nalgebra::Vector3;
use se23nav::frames::{make_world_frame, GravityModel};
use se23nav::lie::so3_exp;
use se23nav::mech::NavState;
use se23nav::models::{build_f_g, GammaEvaluation, ModelContext, OdoCalib, Tag};

fn main() -> se23nav::Result<()> {
    let frame = make_world_frame(0.49, 1.97, 50.0)?;
    let ctx = ModelContext::new(frame, GravityModel::normal(), Vector3::zeros(), GammaEvaluation::Initial);
    let calib = OdoCalib::default();
    let r = Vector3::new(800.0, -150.0, 3.0);
    let states = [
        (
            NavState::new(so3_exp(&Vector3::new(0.0, 0.0, 0.3)), Vector3::new(2.0, 1.0, 0.0), r, 0.0),
            Vector3::new(0.0, 0.0, 0.01),
            Vector3::new(0.1, 0.0, 9.79),
        ),
        (
            NavState::new(so3_exp(&Vector3::new(0.05, -0.03, 2.4)), Vector3::new(-9.0, 6.0, 0.4), r, 0.0),
            Vector3::new(0.02, -0.01, -0.035),
            Vector3::new(-0.8, 0.6, 9.83),
        ),
    ];
    println!("{:<12} {:>10} {:>16}", "filter", "nonzeros", "nav-block change");
    for tag in Tag::ALL {
        let f: Vec<_> = states
            .iter()
            .map(|(nav, w, sf)| build_f_g(tag, &ctx, nav, w, sf, &calib).0)
            .collect();
        let nnz = f[0].iter().filter(|v| **v != 0.0).count();
        let change = (f[0].fixed_view::<9, 9>(0, 0) - f[1].fixed_view::<9, 9>(0, 0)).amax();
        println!("{:<12} {:>10} {:>16.3e}", tag.display_name(), nnz, change);
    }
    Ok(())
}
