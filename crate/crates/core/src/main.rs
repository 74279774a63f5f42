fn main() {
    std::process::exit(momentkit::cli::main_with_args(std::env::args().collect()));
}
