fn main() {
    std::process::exit(abelnet::cli::main());
}
