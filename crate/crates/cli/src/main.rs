fn main() {
    std::process::exit(clqnn_cli::main_with_args(std::env::args_os()));
}
