fn main() {
    std::process::exit(rivercover::cli::run(std::env::args()));
}
