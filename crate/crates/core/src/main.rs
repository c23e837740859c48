fn main() {
    std::process::exit(hetnet_rate::cli::run(std::env::args_os()));
}
