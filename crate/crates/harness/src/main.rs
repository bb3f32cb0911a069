fn main() {
    std::process::exit(mexlab_harness::cli::main_with_args(std::env::args_os()));
}
