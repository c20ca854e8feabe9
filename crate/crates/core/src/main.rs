fn main() {
    std::process::exit(sleconn::cli::main_with_args(std::env::args_os()));
}
