fn main() {
    std::process::exit(anchordoc_cli::run(std::env::args_os()));
}
