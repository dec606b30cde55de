use std::io;

fn main() {
    env_logger::init();
    let threads = std::env::var(strata_cli::THREADS_ENV).ok();
    let code = strata_cli::run_cli(
        std::env::args_os(),
        threads.as_deref(),
        &mut io::stdout(),
        &mut io::stderr(),
    );
    std::process::exit(code);
}
