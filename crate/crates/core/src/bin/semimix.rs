fn main() {
    std::process::exit(semimix::cli::run(std::env::args_os()));
}
