fn main() {
    std::process::exit(hill_core::cli::run(std::env::args_os()));
}
