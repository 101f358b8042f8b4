fn main() {
    std::process::exit(ringpair::cli::run(std::env::args_os()));
}
