fn main() {
    std::process::exit(ladderlab_cli::run_args(std::env::args_os()));
}
