fn main() {
    std::process::exit(thermoflow::cli::run(std::env::args_os()));
}
