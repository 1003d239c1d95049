fn main() {
    let code = binary_crb::cli::run(std::env::args_os(), &mut std::io::stdout().lock());
    std::process::exit(code);
}
