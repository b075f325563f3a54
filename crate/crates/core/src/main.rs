fn main() {
    std::process::exit(telekinesis::cli::main());
}
