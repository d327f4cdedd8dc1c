fn main() {
    std::process::exit(comm_ensemble::cli::main());
}
