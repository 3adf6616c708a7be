fn main() {
    std::process::exit(wpir::cli::run(std::env::args_os()));
}
