fn main() {
    std::process::exit(sramfi::cli::main_with_args(std::env::args_os()));
}
