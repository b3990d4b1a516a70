fn main() {
    std::process::exit(imputebench::run_cli(std::env::args_os()));
}
