fn main() {
    std::process::exit(fracstorm_cli::run(std::env::args_os()));
}
