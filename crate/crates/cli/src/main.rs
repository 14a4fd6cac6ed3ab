fn main() {
    std::process::exit(cipherchain::cli::main_with_args(std::env::args_os()));
}
