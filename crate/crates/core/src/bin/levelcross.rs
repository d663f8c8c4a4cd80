fn main() {
    std::process::exit(level_crossings::cli::main());
}
