fn main() {
    std::process::exit(magnify_cli::main_with_args(std::env::args_os()));
}
