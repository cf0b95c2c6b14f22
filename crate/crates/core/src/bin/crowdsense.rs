fn main() {
    std::process::exit(crowdsense::cli::main_with_args(std::env::args_os()));
}
