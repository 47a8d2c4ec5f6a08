fn main() {
    std::process::exit(covx::cli::run(std::env::args()));
}
