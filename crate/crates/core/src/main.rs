use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    match tg_core::cli::run_args(std::env::args_os()) {
        Ok(r) => {
            let mut out = std::io::stdout().lock();
            let _ = out.write_all(r.text.as_bytes());
            ExitCode::from(r.code as u8)
        }
        Err(e) => {
            eprintln!("tg: {}", e.message.trim_end());
            ExitCode::from(e.code as u8)
        }
    }
}
