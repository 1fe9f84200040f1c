fn main() {
    std::process::exit(extmem::cli::run(std::env::args_os()));
}
