fn main() {
    std::process::exit(active_ris::harness::cli::cli_main(std::env::args_os()));
}
