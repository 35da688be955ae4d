fn main() {
    std::process::exit(prins_core::io::cli_main(std::env::args_os()));
}
