fn main() {
    std::process::exit(scatterlab::cli::run(std::env::args_os()));
}
