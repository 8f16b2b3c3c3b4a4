fn main() {
    std::process::exit(foldsaddle::cli::run(std::env::args_os()));
}
