fn main() {
    std::process::exit(torus_green_cli::run(std::env::args_os()));
}
