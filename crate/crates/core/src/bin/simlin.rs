fn main() {
    std::process::exit(simlin::cli::run(std::env::args_os()));
}
