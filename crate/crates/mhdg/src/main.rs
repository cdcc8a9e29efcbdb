fn main() {
    std::process::exit(mhdg::cli::run());
}
