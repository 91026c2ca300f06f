fn main() {
    std::process::exit(wtrace::cli::main_with_args(std::env::args_os()));
}
