fn main() {
    std::process::exit(agparse::cli::run_from_args());
}
