fn main() {
    std::process::exit(tanbundle::cli::run(std::env::args_os()));
}
