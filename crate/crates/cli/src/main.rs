use clap::Parser;
use eulerbench_cli::commands::{dispatch, Cli};
use eulerbench_cli::exit;

fn main() {
    let cli = Cli::parse();
    if let Some(threads) = std::env::var("WORKBENCH_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        // ignore failure: the global pool may already exist
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build_global();
    }
    let arguments = std::env::args().skip(1).collect();
    let code = match dispatch(cli.command, arguments) {
        Ok(true) => exit::SUCCESS,
        Ok(false) => exit::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}
