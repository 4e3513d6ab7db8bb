fn main() {
    std::process::exit(sap_lab::cli::run(std::env::args_os()));
}
