fn main() {
    std::process::exit(orora::cli::cli_run(std::env::args_os()));
}
