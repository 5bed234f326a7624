fn main() {
    std::process::exit(wjacobi::cli::run(std::env::args_os()));
}
