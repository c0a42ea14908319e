fn main() {
    std::process::exit(astrocity::cli::run(std::env::args_os()));
}
