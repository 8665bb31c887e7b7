fn main() {
    std::process::exit(lobforge::cli::run(std::env::args_os()));
}
