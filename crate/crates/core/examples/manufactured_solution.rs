//! The manufactured fields, their sources and the finite-difference check of
//! the hand-coded derivatives.

use dps_hdg::mesh::Point;
use dps_hdg::mms::{derivative_mismatch, example1, MmsParams};

fn main() {
    let (exact, sources) = example1(MmsParams::default());
    println!("alpha = {:.6}", exact.alpha());
    let at = |f: &Option<dps_hdg::spaces::ScalarFn>, p| f.as_ref().map_or(0.0, |f| f(p));

    println!("free flow, y > 1/2");
    for p in [Point::new(0.25, 0.75), Point::new(0.6, 0.9)] {
        let u = exact.stokes_velocity(p);
        let f = sources.f.as_ref().map_or([0.0; 2], |f| f(p));
        println!(
            "  ({}, {}): u = ({:+.5}, {:+.5})  p = {:+.5}  f = ({:+.5}, {:+.5})",
            p.x, p.y, u[0], u[1], exact.stokes_pressure(p), f[0], f[1]
        );
    }
    println!("porous region, y < 1/2");
    for p in [Point::new(0.25, 0.25), Point::new(0.6, 0.1)] {
        let u = exact.fracture_velocity(p);
        let um = exact.matrix_velocity(p);
        println!(
            "  ({}, {}): u = ({:+.5}, {:+.5})  p = {:+.5}  g = {:+.5}  u_m = ({:+.5}, {:+.5})  p_m = {:+.5}  g_m = {:+.5}",
            p.x,
            p.y,
            u[0],
            u[1],
            exact.fracture_pressure(p),
            at(&sources.g, p),
            um[0],
            um[1],
            exact.matrix_pressure(p),
            at(&sources.g_m, p)
        );
    }
    println!("largest relative derivative mismatch over 100 points: {:.2e}", derivative_mismatch(&exact, 100, 9));
}
