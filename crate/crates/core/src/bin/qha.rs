fn main() {
    std::process::exit(qha_core::cli::run());
}
