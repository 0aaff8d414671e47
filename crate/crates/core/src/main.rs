fn main() {
    std::process::exit(cpseg::cli::run(std::env::args_os()));
}
