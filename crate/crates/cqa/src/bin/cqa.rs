fn main() {
    std::process::exit(cqa::cli::main_with_exit_code());
}
