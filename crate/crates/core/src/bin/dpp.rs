fn main() {
    std::process::exit(dpp_core::cli::cli_main(std::env::args_os()));
}
