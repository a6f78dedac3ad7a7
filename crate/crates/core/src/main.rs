fn main() {
    std::process::exit(folia::cli::main());
}
