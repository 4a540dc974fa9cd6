fn main() {
    std::process::exit(kenwarp::cli::run());
}
