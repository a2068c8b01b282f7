fn main() {
    std::process::exit(qpcircle::cli::run(std::env::args_os()));
}
