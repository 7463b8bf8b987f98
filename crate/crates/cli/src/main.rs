fn main() {
    std::process::exit(entrolab_cli::main_with(std::env::args_os()));
}
