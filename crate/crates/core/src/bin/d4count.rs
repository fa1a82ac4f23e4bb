use std::io;
use std::process::ExitCode;

fn main() -> ExitCode {
    let inv = match d4count::cli::parse(std::env::args_os()) {
        Ok(inv) => inv,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let code = d4count::cli::run(&inv, &mut io::stdout().lock(), &mut io::stderr().lock());
    ExitCode::from(code as u8)
}
