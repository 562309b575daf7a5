fn main() {
    std::process::exit(procrec::cli::run(std::env::args_os()));
}
