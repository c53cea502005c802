fn main() {
    std::process::exit(permprime_cli::run(std::env::args_os()));
}
