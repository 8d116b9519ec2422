fn main() {
    std::process::exit(sibm_lab::run(std::env::args_os()));
}
