fn main() {
    std::process::exit(ripscover::cli::run());
}
