fn main() {
    std::process::exit(featprobe::cli::run(std::env::args_os()));
}
