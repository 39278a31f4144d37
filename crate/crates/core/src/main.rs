fn main() {
    if let Err(e) = thermofield::cli::run(std::env::args()) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
