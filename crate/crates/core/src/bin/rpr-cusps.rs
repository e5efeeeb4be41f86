fn main() {
    std::process::exit(rpr_cusps::cli::main());
}
