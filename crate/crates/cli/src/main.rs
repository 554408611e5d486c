fn main() {
    std::process::exit(cohatlas::main_with(std::env::args_os()));
}
