fn main() {
    std::process::exit(mqed::cli::run(std::env::args()));
}
