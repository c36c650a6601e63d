fn main() {
    std::process::exit(ensemble_forge::cli::cli_dispatch(std::env::args_os()));
}
