//! Temporary diagnostic binary.

use deadcore::params::SystemParams;
use deadcore::radial::solve_radial_system;

fn main() {
    let params = SystemParams::laplacian(0.0, 0.0, 0.5, 0.5, 1).unwrap();
    let bc = 1.0 / 144.0;
    let prof = solve_radial_system(&params, 1.0, (bc, bc), 1000, 1e-9, 20_000).unwrap();
    println!(
        "iterations {} residual {:.3e}",
        prof.iterations, prof.residual
    );
    let v = prof.v_vals.as_ref().unwrap();
    for j in (0..=1000).step_by(100) {
        let r = prof.r_nodes[j];
        let exact = r.powi(4) / 144.0;
        println!(
            "r {:5.2}  u {:+.6e}  v {:+.6e}  exact {:+.6e}  du {:+.3e}  dv {:+.3e}",
            r,
            prof.u_vals[j],
            v[j],
            exact,
            prof.u_vals[j] - exact,
            v[j] - exact
        );
    }
}
