fn main() {
    std::process::exit(rosenlab_cli::run(std::env::args_os()));
}
