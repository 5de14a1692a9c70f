fn main() {
    std::process::exit(fhn_pair::cli::run(std::env::args_os()));
}
