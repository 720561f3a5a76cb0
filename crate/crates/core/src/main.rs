fn main() {
    std::process::exit(srchain::cli::main_with_args(std::env::args_os()));
}
