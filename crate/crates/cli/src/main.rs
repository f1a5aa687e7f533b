fn main() {
    std::process::exit(fasi_cli::main_with_args(std::env::args_os()));
}
