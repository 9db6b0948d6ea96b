fn main() {
    std::process::exit(toledo::cli::main_with(std::env::args_os()));
}
