fn main() {
    std::process::exit(care_cli::main_with_args(std::env::args_os()));
}
