fn main() {
    std::process::exit(perpetuity::cli::main_with_args(std::env::args_os()));
}
