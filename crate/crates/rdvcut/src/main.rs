fn main() {
    let code = rdvcut::cli::main_with(
        std::env::args(),
        &mut std::io::stdin().lock(),
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    );
    std::process::exit(code);
}
