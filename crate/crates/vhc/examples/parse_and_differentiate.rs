//! Parse an expression, evaluate it and its symbolic derivatives.
//!
//!     cargo run --example parse_and_differentiate -- "sin(2*s)/(2 + cos(s))" 0.7

use vhc::expr::Expr;

fn main() {
    let mut args = std::env::args().skip(1);
    let src = args.next().unwrap_or_else(|| "sin(2*s)/(2 + cos(s))".into());
    let x: f64 = args.next().map(|a| a.parse().expect("x must be a number")).unwrap_or(0.7);
    let f = match Expr::parse(&src, &["s"]) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(2);
        }
    };
    let d1 = f.differentiate("s").unwrap();
    let d2 = d1.differentiate("s").unwrap();
    println!("f    = {}", f.to_canonical());
    println!("f'   = {}", d1.to_canonical());
    println!("f''  = {}", d2.to_canonical());
    for (name, e) in [("f", &f), ("f'", &d1), ("f''", &d2)] {
        println!("{name}({x}) = {}", e.eval(&[x]).unwrap());
    }
}
