use std::io::Write;

fn main() {
    let filters = std::env::var("HULLSCOPE_LOG").unwrap_or_else(|_| "info".into());
    env_logger::Builder::new()
        .parse_filters(&filters)
        .format_timestamp(None)
        .target(env_logger::Target::Stderr)
        .init();
    let out = hullscope::cli::run(std::env::args_os());
    let mut stdout = std::io::stdout().lock();
    let _ = writeln!(stdout, "{}", out.stdout.trim_end());
    let _ = stdout.flush();
    std::process::exit(out.code);
}
