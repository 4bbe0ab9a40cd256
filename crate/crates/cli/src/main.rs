fn main() {
    std::process::exit(hpq_cli::run(std::env::args_os()));
}
