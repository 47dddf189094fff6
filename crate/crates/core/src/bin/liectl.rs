fn main() {
    std::process::exit(lie_control::cli::run(std::env::args_os()));
}
