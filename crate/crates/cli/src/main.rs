fn main() {
    std::process::exit(immunolearn_cli::main_with_args(std::env::args_os()));
}
