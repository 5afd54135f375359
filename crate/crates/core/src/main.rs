fn main() {
    std::process::exit(crowdcomp::cli::run(std::env::args_os()));
}
