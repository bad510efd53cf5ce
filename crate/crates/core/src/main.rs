fn main() {
    std::process::exit(algebroid_poisson::cli::run(std::env::args_os()));
}
