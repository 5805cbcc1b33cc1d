fn main() {
    std::process::exit(dcsvm::cli::run());
}
