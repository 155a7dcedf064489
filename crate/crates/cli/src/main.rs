fn main() {
    std::process::exit(resetting_lab::run(std::env::args_os()));
}
