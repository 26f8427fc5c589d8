fn main() {
    std::process::exit(sumnet::cli::run(std::env::args_os()));
}
