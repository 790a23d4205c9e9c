fn main() {
    std::process::exit(qmdn::cli::main());
}
