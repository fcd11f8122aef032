fn main() {
    std::process::exit(lorot::cli::main_with_args(std::env::args_os()));
}
