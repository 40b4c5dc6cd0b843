fn main() {
    std::process::exit(ltrkit::cli::run(std::env::args_os()));
}
