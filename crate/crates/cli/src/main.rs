fn main() {
    std::process::exit(cogh_cli::main_with_args(std::env::args_os()));
}
