fn main() {
    std::process::exit(ramsey_mts_cli::main_with_args(std::env::args_os()));
}
