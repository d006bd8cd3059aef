fn main() {
    std::process::exit(poincare_linf::cli::run(std::env::args_os()));
}
