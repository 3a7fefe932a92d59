fn main() {
    std::process::exit(aseo::cli::run());
}
