fn main() {
    std::process::exit(shape_msr::cli::run_cli(std::env::args_os()));
}
