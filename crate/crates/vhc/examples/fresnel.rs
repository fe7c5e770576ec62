//! Fresnel integrals `C(x) = ∫₀ˣ cos(πt²/2) dt`, `S(x) = ∫₀ˣ sin(πt²/2) dt`.

use vhc::lagrangian::fresnel;

fn main() {
    for &x in &[0.0, 0.5, 1.0, 2.0, 5.0, 50.0] {
        let (c, s) = fresnel(x);
        println!("x = {x:>5}: C = {c:.12}, S = {s:.12}");
    }
}
