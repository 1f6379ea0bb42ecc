fn main() {
    std::process::exit(blursynth::cli::run(std::env::args_os()));
}
