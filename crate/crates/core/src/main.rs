fn main() {
    std::process::exit(msa_core::cli::run(std::env::args().skip(1).collect()));
}
