fn main() {
    std::process::exit(floorsyntax::cli::cli_dispatch(std::env::args_os()));
}
