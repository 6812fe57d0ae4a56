fn main() {
    std::process::exit(schatten_cli::run(std::env::args_os()));
}
