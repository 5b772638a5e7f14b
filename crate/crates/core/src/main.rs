fn main() {
    std::process::exit(gpfest::cli::main_with(std::env::args_os()));
}
