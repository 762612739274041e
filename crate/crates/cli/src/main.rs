fn main() {
    std::process::exit(lossdiff_cli::run_cli(std::env::args_os()));
}
