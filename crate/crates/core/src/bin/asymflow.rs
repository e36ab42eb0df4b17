fn main() {
    std::process::exit(asymflow::cli::run(std::env::args_os()));
}
