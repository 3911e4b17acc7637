fn main() {
    std::process::exit(eds_waves::cli::main_with_args(std::env::args_os()));
}
