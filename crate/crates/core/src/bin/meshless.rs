fn main() {
    std::process::exit(rbffd_sl::cli::main_with_args(std::env::args_os()));
}
