fn main() {
    let mut stdout = std::io::stdout();
    let mut stderr = std::io::stderr();
    let code = normest::cli::dispatch(std::env::args_os(), &mut stdout, &mut stderr);
    std::process::exit(code);
}
