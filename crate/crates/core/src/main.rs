fn main() {
    std::process::exit(qdcascade::cli::run(std::env::args_os()));
}
