use std::io;

fn main() {
    rmcs::cli::init_logging();
    let code = rmcs::cli::run_cli(std::env::args_os(), &mut io::stdout().lock(), &mut io::stderr().lock());
    std::process::exit(code);
}
