fn main() {
    std::process::exit(tiedown_cli::run(std::env::args_os()));
}
