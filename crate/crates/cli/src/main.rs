fn main() {
    std::process::exit(condroc_cli::main_with_args(std::env::args_os()));
}
