fn main() {
    std::process::exit(hhfd_cli::main_with_args(std::env::args_os()));
}
