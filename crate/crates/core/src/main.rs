fn main() {
    std::process::exit(heatcut::cli::run(std::env::args_os()));
}
