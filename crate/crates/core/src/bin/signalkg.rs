fn main() {
    std::process::exit(signalkg::interface::cli::cli_main(std::env::args_os()));
}
