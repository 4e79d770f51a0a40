fn main() {
    std::process::exit(ischemic_fbp::cli::main_with_args(std::env::args_os()));
}
