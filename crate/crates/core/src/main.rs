fn main() {
    std::process::exit(covering_lab::cli::main_with_args(std::env::args_os()));
}
