fn main() {
    std::process::exit(odmr::cli::main_with_args(std::env::args_os()));
}
