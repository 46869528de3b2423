fn main() {
    std::process::exit(qwalk::cli::run_from(std::env::args_os()));
}
