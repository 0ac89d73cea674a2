fn main() {
    std::process::exit(gwi::cli::run(std::env::args_os()));
}
