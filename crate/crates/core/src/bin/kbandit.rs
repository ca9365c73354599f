fn main() {
    std::process::exit(kbandit::harness::cli::cli_main(std::env::args_os()));
}
