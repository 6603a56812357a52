fn main() {
    std::process::exit(boundary_uncertainty::cli::run(std::env::args_os()));
}
