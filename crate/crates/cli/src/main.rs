fn main() {
    let code = compdefl_cli::run(std::env::args_os());
    std::process::exit(code);
}
