fn main() {
    std::process::exit(vhc::cli::run(std::env::args_os()));
}
